"""Partial-linear single-index regression with a neural link.

The model is eta = g(beta . x) + gamma . z where g is a small scalar neural
network, beta is a unit-norm index direction with positive leading
coordinate, and the outcome may be continuous, binary, count, or
right-censored survival.  Inference is bootstrap-based; a Monte-Carlo harness
reproduces bias/SD/SE/coverage tables, and the `plsinet` CLI drives the whole
workflow on delimited files.
"""

from .data import Dataset
from .inference import BootstrapResult, CurveBand, bootstrap, curve_band
from .model import ModelParams, apply_mean_link, index, predict_eta, project_identifiable
from .neural_link import MlpSpec
from .simgen import SimScenario, generate
from .trainer import FitConfig, FitResult, fit

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "MlpSpec",
    "ModelParams",
    "FitConfig",
    "FitResult",
    "SimScenario",
    "BootstrapResult",
    "CurveBand",
    "fit",
    "bootstrap",
    "curve_band",
    "generate",
    "index",
    "predict_eta",
    "project_identifiable",
    "apply_mean_link",
    "__version__",
]
