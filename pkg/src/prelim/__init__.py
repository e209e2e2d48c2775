"""Rule extraction by training interpretable models on black-box-labeled
generated data, plus a benchmark harness around it."""
from .core import (Dataset, Scaler, SplitPlan, accuracy, apply_scaler, balanced_accuracy,
                   fidelity, fit_scaler, make_splits, preprocess, read_csv, relative_increase,
                   wracc, write_csv)
from .errors import PrelimError
from .kernels import BACKEND
from .pipeline import PrelimConfig, PrelimResult, choose_L, run_baseline, run_prelim

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Dataset", "PrelimConfig", "PrelimError", "PrelimResult", "Scaler", "SplitPlan",
    "accuracy", "apply_scaler", "balanced_accuracy", "choose_L", "fidelity", "fit_scaler",
    "make_splits", "preprocess", "read_csv", "relative_increase", "run_baseline", "run_prelim",
    "wracc", "write_csv",
]
