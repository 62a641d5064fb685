"""PAC-Bayesian estimation for sparse multi-index regression with an unknown number of indices."""
from .harness import ExperimentConfig, fit_rate, generate_synthetic, prior_for, run_experiment
from .model import ActiveIndexSet, AffineMap, Dataset, ModelState, empirical_risk, lambda_from_constants, predict
from .prior import PriorSpec, sample_prior
from .sampler import ChainConfig, draw_estimator, mh_step, run_chain
from .wavelet import CoefficientVector, WaveletDictionary, WaveletSpec, eval_link

__all__ = [
    "ActiveIndexSet",
    "AffineMap",
    "ChainConfig",
    "CoefficientVector",
    "Dataset",
    "ExperimentConfig",
    "ModelState",
    "PriorSpec",
    "WaveletDictionary",
    "WaveletSpec",
    "draw_estimator",
    "empirical_risk",
    "eval_link",
    "fit_rate",
    "generate_synthetic",
    "lambda_from_constants",
    "mh_step",
    "predict",
    "prior_for",
    "run_chain",
    "run_experiment",
    "sample_prior",
]
__version__ = "0.1.0"
