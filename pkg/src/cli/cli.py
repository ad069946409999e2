"""
Command-line interface for Random Similarity Isolation Forest.
"""
import functools
import logging
import sys
import time

import click
from pydantic import ValidationError

from ..core import config
from ..core.data_manager import DataManager
from ..core.dataset import validate as validate_dataset
from ..core.errors import ConfigError, EvaluationError, RSIFError
from ..evaluation.protocol import SWEEP_PARAMETERS, TrialPlan, run_trials, sensitivity_sweep
from ..evaluation.synthetic import synth_gaussian, synth_multimodal
from ..forest.forest import fit as fit_forest, score_batch
from .run_config import RunConfig

# Configure logging
_handlers = [logging.StreamHandler(sys.stderr)]
if config.LOG_FILE:
    _handlers.append(logging.FileHandler(config.LOG_FILE))
logging.basicConfig(
    level=getattr(logging, config.LOG_LEVEL.upper(), logging.INFO),
    format=config.LOG_FORMAT,
    handlers=_handlers,
)

logger = logging.getLogger(__name__)

data_manager = DataManager()


def handle_errors(command):
    """Turn library and config errors into `Error: ...` on stderr and exit status 1."""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except (RSIFError, ValidationError) as e:
            logger.debug("Command failed", exc_info=True)
            click.echo(f"Error: {e}", err=True)
            sys.exit(1)
    return wrapper


def jobs_option(command):
    return click.option('--jobs', default=config.DEFAULT_JOBS, type=int, show_default=True,
                        help='Worker threads; results do not depend on it')(command)


@click.group()
def cli():
    """Random Similarity Isolation Forest - outlier detection on multi-modal data"""
    pass


@cli.command()
@click.option('--data', 'data_dir', required=True, type=click.Path(), help='Dataset directory')
@click.option('--config', 'config_file', required=True, type=click.Path(), help='Run configuration (JSON)')
@click.option('--out', 'out_file', required=True, type=click.Path(), help='Model file to write')
@jobs_option
@handle_errors
def fit(data_dir, config_file, out_file, jobs):
    """Fit a forest and save the model."""
    run_config = RunConfig.from_file(config_file)
    dataset = data_manager.load_dataset(data_dir)
    params = run_config.fit_params()

    started = time.perf_counter()
    model = fit_forest(dataset, params, n_jobs=jobs).with_theta(run_config.theta)
    elapsed = time.perf_counter() - started
    data_manager.save_model(model, out_file)

    click.echo(f"n={dataset.n}")
    click.echo(f"t={params.t}")
    click.echo(f"psi_eff={model.psi_eff}")
    click.echo(f"pool_size={model.pool_size}")
    click.echo(f"wall_time={elapsed:.3f}s")


@cli.command()
@click.option('--model', 'model_file', required=True, type=click.Path(), help='Model file')
@click.option('--data', 'data_dir', required=True, type=click.Path(), help='Dataset directory')
@click.option('--out', 'out_file', required=True, type=click.Path(), help='Score CSV to write')
@click.option('--theta', default=None, type=float, help='Flag examples with score >= theta')
@jobs_option
@handle_errors
def score(model_file, data_dir, out_file, theta, jobs):
    """Score a dataset with a fitted model."""
    model = data_manager.load_model(model_file)
    dataset = data_manager.load_dataset(data_dir)
    used = {feature_id for feature_id, _, _ in model.schema}
    ignored = [cid for cid in dataset.column_ids if cid not in used]
    if ignored:
        logger.warning(f"Ignoring columns the model was not fitted on: {', '.join(ignored)}")
    scores = score_batch(model, dataset, n_jobs=jobs)

    if theta is None:
        theta = model.theta
    flags = (scores >= theta).astype(int) if theta is not None else None
    data_manager.export_scores_csv(scores, out_file, flags=flags)

    summary = f"Scored {dataset.n} examples"
    if flags is not None:
        summary += f", {int(flags.sum())} flagged at theta={theta}"
    click.echo(summary)


@cli.command(name='eval')
@click.option('--data', 'data_dir', required=True, type=click.Path(), help='Labeled dataset directory')
@click.option('--config', 'config_file', required=True, type=click.Path(), help='Run configuration (JSON)')
@click.option('--trials', default=config.DEFAULT_TRIALS, type=int, show_default=True)
@click.option('--train-frac', default=config.DEFAULT_TRAIN_FRACTION, type=float, show_default=True)
@click.option('--validation-frac', default=config.DEFAULT_VALIDATION_FRACTION, type=float, show_default=True)
@click.option('--out', 'out_file', required=True, type=click.Path(), help='Report JSON to write')
@jobs_option
@handle_errors
def evaluate(data_dir, config_file, trials, train_frac, validation_frac, out_file, jobs):
    """Run repeated stratified trials and write a metrics report."""
    run_config = RunConfig.from_file(config_file)
    dataset = data_manager.load_dataset(data_dir)
    if not dataset.has_labels:
        raise EvaluationError(f"dataset '{dataset.name}' has no labels file")

    plan = TrialPlan(train_fraction=train_frac, trials=trials, validation_fraction=validation_frac,
                     seed=run_config.seed)
    candidates = run_config.candidate_configs() or None
    report = run_trials(dataset, run_config.fit_params(), plan, candidates=candidates, n_jobs=jobs)
    data_manager.save_report(report.to_dict(), out_file)

    click.echo(f"mean_ap={report.mean_ap:.4f} std_ap={report.std_ap:.4f}")
    click.echo(f"mean_auc={report.mean_auc:.4f} std_auc={report.std_auc:.4f}")


@cli.command()
@click.option('--kind', type=click.Choice(['gaussian', 'multimodal']), required=True)
@click.option('--n', 'n', default=1000, type=int, show_default=True)
@click.option('--outlier-frac', default=0.05, type=float, show_default=True)
@click.option('--dims', default=2, type=int, show_default=True, help='Dimensions (gaussian only)')
@click.option('--seed', default=config.DEFAULT_SEED, type=int, show_default=True)
@click.option('--out', 'out_dir', required=True, type=click.Path(), help='Dataset directory to write')
@handle_errors
def synth(kind, n, outlier_frac, dims, seed, out_dir):
    """Generate a labeled synthetic dataset."""
    if kind == 'gaussian':
        dataset = synth_gaussian(n, outlier_frac, dims=dims, seed=seed)
    else:
        dataset = synth_multimodal(n, outlier_frac, seed=seed)
    manifest = data_manager.write_dataset(dataset, out_dir)
    click.echo(f"Wrote {kind} dataset with {dataset.n} examples ({int(dataset.labels.sum())} outliers) to {manifest}")


@cli.command()
@click.option('--data', 'data_dir', required=True, type=click.Path(), help='Dataset directory')
@handle_errors
def validate(data_dir):
    """Check a dataset directory and list every violation."""
    dataset = data_manager.load_dataset(data_dir, check=False)
    violations = validate_dataset(dataset)
    for violation in violations:
        click.echo(violation)
    if violations:
        click.echo(f"{len(violations)} violation(s) found", err=True)
        sys.exit(1)
    kinds = ", ".join(f"{cid}:{kind.value}" for cid, kind, _ in dataset.schema())
    click.echo(f"OK: '{dataset.name}' n={dataset.n} columns=[{kinds}] labels={'yes' if dataset.has_labels else 'no'}")


def _parse_sweep_values(parameter, raw):
    items = [item.strip() for item in raw.split(',') if item.strip()]
    if not items:
        raise ConfigError("--values is empty")
    try:
        if parameter in ('t', 'psi'):
            return [int(item) for item in items]
        if parameter == 'm':
            return [float(item) for item in items]
    except ValueError as e:
        raise ConfigError(f"invalid value for {parameter}: {e}") from e
    return items


@cli.command()
@click.option('--data', 'data_dir', required=True, type=click.Path(), help='Labeled dataset directory')
@click.option('--config', 'config_file', required=True, type=click.Path(), help='Run configuration (JSON)')
@click.option('--param', 'parameter', required=True, type=click.Choice(list(SWEEP_PARAMETERS)))
@click.option('--values', 'raw_values', required=True, help='Comma-separated values, e.g. "16,64,256"')
@click.option('--trials', default=config.DEFAULT_TRIALS, type=int, show_default=True)
@click.option('--train-frac', default=config.DEFAULT_TRAIN_FRACTION, type=float, show_default=True)
@click.option('--out', 'out_file', required=True, type=click.Path(), help='CSV to write')
@jobs_option
@handle_errors
def sweep(data_dir, config_file, parameter, raw_values, trials, train_frac, out_file, jobs):
    """Vary one hyperparameter and record mean AP/AUC per value."""
    run_config = RunConfig.from_file(config_file)
    dataset = data_manager.load_dataset(data_dir)
    plan = TrialPlan(train_fraction=train_frac, trials=trials, seed=run_config.seed)
    table = sensitivity_sweep(dataset, run_config.fit_params(), plan, parameter,
                              _parse_sweep_values(parameter, raw_values), n_jobs=jobs)
    data_manager.export_table_csv(table, out_file)
    for row in table.itertuples(index=False):
        click.echo(f"{row.parameter}={row.value}: AP={row.mean_ap:.4f}±{row.std_ap:.4f} "
                   f"AUC={row.mean_auc:.4f}±{row.std_auc:.4f}")


if __name__ == '__main__':
    cli()
