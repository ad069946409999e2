"""
Core modules: configuration, errors, dataset model and persistence
"""
