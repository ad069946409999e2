"""
Data persistence manager: dataset directories, model files, reports and CSV exports.
"""
import json
import logging
import os
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from . import config
from .dataset import Dataset, FeatureColumn, FeatureKind, format_payload, parse_payload, validate
from .errors import DatasetError, ModelFormatError
from ..forest.forest import RSIFModel

logger = logging.getLogger(__name__)


def _read_lines(path: str) -> List[str]:
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return [line[:-1] if line.endswith("\r") else line for line in lines]


def _write_lines(path: str, lines: Sequence[str]):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for line in lines:
            f.write(line)
            f.write("\n")


class DataManager:
    """
    Manages every file the tool reads or writes.
    """

    def __init__(self, data_dir: str = None):
        """
        Initialize the data manager.

        Args:
            data_dir: Directory relative paths are resolved against (None keeps them relative to the working directory)
        """
        self.data_dir = data_dir

    def resolve(self, path: str) -> str:
        if self.data_dir is None or os.path.isabs(path):
            return path
        return os.path.join(self.data_dir, path)

    def load_dataset(self, path: str, check: bool = True) -> Dataset:
        """
        Load a dataset directory described by its manifest.

        Args:
            path: Dataset directory or the manifest file itself
            check: Reject datasets that fail validate(); parse errors are always raised

        Returns:
            Dataset: Loaded dataset

        Raises:
            DatasetError: on any missing file or invalid payload, naming the column and line
        """
        path = self.resolve(path)
        manifest_path = os.path.join(path, config.MANIFEST_FILE) if os.path.isdir(path) else path
        if not os.path.exists(manifest_path):
            raise DatasetError(f"manifest not found: {manifest_path}")
        root = os.path.dirname(manifest_path)
        try:
            with open(manifest_path, "r", encoding="utf-8") as f:
                manifest = json.load(f)
            entries = manifest["columns"]
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise DatasetError(f"malformed manifest {manifest_path}: {e}") from e

        columns = []
        for entry in entries:
            try:
                column_id, kind_tag, file_name = entry["id"], entry["kind"], entry["file"]
            except (KeyError, TypeError) as e:
                raise DatasetError(f"malformed manifest column entry {entry!r}") from e
            try:
                kind = FeatureKind(kind_tag)
            except ValueError as e:
                raise DatasetError(f"column '{column_id}': unknown kind '{kind_tag}'") from e
            columns.append(self._load_column(column_id, kind, os.path.join(root, file_name)))

        lengths = {column.id: len(column) for column in columns}
        if len(set(lengths.values())) > 1:
            detail = ", ".join(f"'{cid}' has {count}" for cid, count in lengths.items())
            raise DatasetError(f"ragged column lengths: {detail}")
        n = columns[0].values.shape[0] if columns else int(manifest.get("n", 0))
        if "n" in manifest and int(manifest["n"]) != n:
            raise DatasetError(f"ragged column lengths: manifest declares n={manifest['n']}, columns hold {n} rows")

        labels = None
        if manifest.get("labels"):
            labels = self._load_labels(os.path.join(root, manifest["labels"]))

        dataset = Dataset(columns=tuple(columns), labels=labels, name=manifest.get("name", "dataset"), n=n)
        violations = validate(dataset) if check else []
        if violations:
            raise DatasetError(violations[0])
        logger.info(f"Loaded dataset '{dataset.name}': n={n}, {len(columns)} columns, "
                    f"labels={'yes' if labels is not None else 'no'}")
        return dataset

    def _load_column(self, column_id: str, kind: FeatureKind, file_path: str) -> FeatureColumn:
        if not os.path.exists(file_path):
            raise DatasetError(f"column '{column_id}': file not found: {file_path}")
        payloads = []
        dim = None
        for line_no, line in enumerate(_read_lines(file_path), start=1):
            try:
                value = parse_payload(kind, line)
            except (ValueError, TypeError) as e:
                raise DatasetError(f"column '{column_id}' line {line_no}: {e}") from e
            if kind.is_vector:
                if dim is None:
                    dim = len(value)
                elif len(value) != dim:
                    raise DatasetError(f"column '{column_id}' line {line_no}: "
                                       f"vector has {len(value)} components, expected {dim}")
            payloads.append(value)
        if kind.is_vector:
            values = np.vstack(payloads) if payloads else np.empty((0, 1), dtype=float)
            return FeatureColumn(id=column_id, kind=kind, values=values)
        return FeatureColumn(id=column_id, kind=kind, values=payloads)

    def _load_labels(self, file_path: str) -> np.ndarray:
        if not os.path.exists(file_path):
            raise DatasetError(f"labels file not found: {file_path}")
        labels = []
        for line_no, line in enumerate(_read_lines(file_path), start=1):
            if line.strip() not in ("0", "1"):
                raise DatasetError(f"labels line {line_no}: expected 0 or 1, got {line!r}")
            labels.append(int(line.strip()))
        return np.asarray(labels, dtype=int)

    def write_dataset(self, dataset: Dataset, directory: str) -> str:
        """
        Write a dataset directory that load_dataset reads back unchanged.

        Args:
            dataset: Dataset to write
            directory: Target directory (created if missing)

        Returns:
            str: Path of the written manifest
        """
        directory = self.resolve(directory)
        os.makedirs(directory, exist_ok=True)
        entries = []
        for column in dataset.columns:
            file_name = f"{column.id}.txt"
            _write_lines(
                os.path.join(directory, file_name),
                [format_payload(column.kind, column.values[i]) for i in range(dataset.n)],
            )
            entries.append({"id": column.id, "kind": column.kind.value, "file": file_name})

        labels_file = None
        if dataset.labels is not None:
            labels_file = config.LABELS_FILE
            _write_lines(os.path.join(directory, labels_file), [str(int(v)) for v in dataset.labels])

        manifest = {"name": dataset.name, "n": dataset.n, "columns": entries, "labels": labels_file}
        manifest_path = os.path.join(directory, config.MANIFEST_FILE)
        with open(manifest_path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(manifest, f, indent=2)
            f.write("\n")
        logger.info(f"Wrote dataset '{dataset.name}' ({dataset.n} rows) to {directory}")
        return manifest_path

    def save_model(self, model: RSIFModel, path: str) -> str:
        """
        Save a fitted model as a versioned JSON document.

        Args:
            model: Fitted model
            path: Output file

        Returns:
            str: Path of the written file
        """
        path = self.resolve(path)
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(model.to_json(), f, separators=(",", ":"))
        logger.info(f"Saved model to {path}")
        return path

    def load_model(self, path: str) -> RSIFModel:
        """
        Load a model written by save_model.

        Raises:
            ModelFormatError: "corrupt model" for unreadable or truncated files,
            "unsupported version" for other format versions
        """
        path = self.resolve(path)
        if not os.path.exists(path):
            raise ModelFormatError(f"model file not found: {path}")
        try:
            with open(path, "r", encoding="utf-8") as f:
                obj = json.load(f)
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise ModelFormatError(f"corrupt model: {path}: {e}") from e
        model = RSIFModel.from_json(obj)
        logger.info(f"Loaded model with {len(model.trees)} trees from {path}")
        return model

    def save_report(self, report: Dict[str, Any], path: str) -> str:
        """Write a metrics report dictionary as indented JSON."""
        path = self.resolve(path)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(report, f, indent=2)
            f.write("\n")
        logger.info(f"Saved report to {path}")
        return path

    def export_scores_csv(self, scores: np.ndarray, path: str, flags: Optional[np.ndarray] = None) -> str:
        """
        Export scores as CSV with columns index,score[,flag].

        Args:
            scores: One score per example
            path: Output CSV file
            flags: Optional 0/1 outlier flags

        Returns:
            str: Path to the exported file
        """
        frame = pd.DataFrame({"index": np.arange(len(scores)), "score": np.asarray(scores, dtype=float)})
        if flags is not None:
            frame["flag"] = np.asarray(flags, dtype=int)
        return self.export_table_csv(frame, path)

    def export_table_csv(self, frame: pd.DataFrame, path: str) -> str:
        path = self.resolve(path)
        frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
        logger.info(f"Exported {len(frame)} rows to {path}")
        return path


_default_manager = DataManager()


def load_dataset(path: str, check: bool = True) -> Dataset:
    return _default_manager.load_dataset(path, check=check)


def write_dataset(dataset: Dataset, directory: str) -> str:
    return _default_manager.write_dataset(dataset, directory)


def save_model(model: RSIFModel, path: str) -> str:
    return _default_manager.save_model(model, path)


def load_model(path: str) -> RSIFModel:
    return _default_manager.load_model(path)
