"""Data containers, the multi-index predictor and its risks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .wavelet import CoefficientVector, apply_design, besov_norm, link_design

__all__ = [
    "Dataset",
    "ActiveIndexSet",
    "AffineMap",
    "ModelState",
    "NoiseModel",
    "sparse_matrix",
    "link_inputs",
    "predict",
    "predict_many",
    "empirical_risk",
    "excess_risk_mc",
    "lambda_from_constants",
]

ROW_NORM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Dataset:
    """``n`` covariate rows in R^p with scalar labels and the sup bounds ``K`` and ``C``."""

    X: np.ndarray
    Y: np.ndarray
    K: float = 1.0
    C: float = 1.0

    def __post_init__(self) -> None:
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        Y = np.asarray(self.Y, dtype=float).reshape(-1)
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError("need n >= 1 and p >= 1")
        if Y.shape[0] != X.shape[0]:
            raise ValueError("X and Y have different numbers of rows")
        if np.abs(X).max() > self.K:
            raise ValueError(f"covariates exceed the sup bound K={self.K}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class ActiveIndexSet:
    """Row supports ``I_1, ..., I_d`` (0-based column indices, each non-empty)."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(sorted(set(int(j) for j in r))) for r in self.rows)
        if not rows or any(len(r) == 0 for r in rows):
            raise ValueError("every row support must be non-empty")
        object.__setattr__(self, "rows", rows)

    @property
    def d(self) -> int:
        return len(self.rows)

    @property
    def size(self) -> int:
        """``||I|| = sum_i |I_i|``."""
        return sum(len(r) for r in self.rows)


@dataclass(frozen=True)
class AffineMap:
    """Coordinatewise map ``z -> scale * z + shift`` applied to ``Theta x`` before the link.

    The identity is the default.  ``covering`` builds the map that sends
    ``[-B, B]`` onto the region where the scaling shifts ``|k| <= N`` form a
    partition of unity.
    """

    scale: float = 1.0
    shift: float = 0.0

    @classmethod
    def covering(cls, bound: float, support: int, N: int) -> "AffineMap":
        lo, hi = support - N, N
        if hi <= lo:
            raise ValueError(f"N={N} too small to cover any interval with support length {support}")
        return cls(scale=(hi - lo) / (2.0 * bound), shift=(hi + lo) / 2.0)

    def __call__(self, z: np.ndarray) -> np.ndarray:
        return self.scale * z + self.shift


def sparse_matrix(index_set: ActiveIndexSet, values: Sequence[Sequence[float]], p: int) -> np.ndarray:
    """Dense ``d x p`` array with row ``i`` equal to ``values[i]`` on ``I_i`` and zero elsewhere."""
    theta = np.zeros((index_set.d, p))
    for i, (cols, vals) in enumerate(zip(index_set.rows, values)):
        theta[i, list(cols)] = vals
    return theta


@dataclass(frozen=True, eq=False)
class ModelState:
    """A triplet ``(d, Theta, f)`` with ``f`` given by wavelet coefficients at level ``M``."""

    index_set: ActiveIndexSet
    theta: np.ndarray
    coeffs: CoefficientVector
    link_map: AffineMap = field(default_factory=AffineMap)

    def __post_init__(self) -> None:
        theta = np.atleast_2d(np.asarray(self.theta, dtype=float))
        object.__setattr__(self, "theta", theta)
        if theta.shape[0] != self.index_set.d:
            raise ValueError("theta must have one row per index-set row")
        if self.coeffs.dictionary.d != self.index_set.d:
            raise ValueError("link dimension does not match the number of rows of theta")

    @property
    def d(self) -> int:
        return self.index_set.d

    @property
    def M(self) -> int:
        return self.coeffs.dictionary.M

    @property
    def p(self) -> int:
        return self.theta.shape[1]

    def check(self, C: float | None = None, tol: float = ROW_NORM_TOL) -> None:
        """Raise ``ValueError`` if a structural invariant is violated."""
        for i, cols in enumerate(self.index_set.rows):
            off = np.delete(self.theta[i], list(cols))
            if np.any(off != 0.0):
                raise ValueError(f"row {i} has mass off its support")
            if abs(np.linalg.norm(self.theta[i]) - 1.0) > tol:
                raise ValueError(f"row {i} is not unit norm")
        if C is not None and besov_norm(self.coeffs) > C + 1.0 + 1e-12:
            raise ValueError("coefficients leave the ball of radius C + 1")


@dataclass(frozen=True)
class NoiseModel:
    """Constants of the sub-Gaussian noise condition and of the index distribution."""

    sigma: float
    Gamma: float
    B1: float = 1.0
    B2: float = 1.0

    def __post_init__(self) -> None:
        if min(self.sigma, self.Gamma, self.B1, self.B2) <= 0:
            raise ValueError("sigma, Gamma, B1, B2 must be positive")


def link_inputs(state: ModelState, X: np.ndarray) -> np.ndarray:
    """Arguments of the link function, ``link_map(Theta x)`` for each row of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != state.p:
        raise ValueError(f"expected covariates of dimension {state.p}, got {X.shape[1]}")
    return state.link_map(X @ state.theta.T)


def predict_many(state: ModelState, X: np.ndarray, chunk: int = 4096) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != state.p:
        raise ValueError(f"expected covariates of dimension {state.p}, got {X.shape[1]}")
    out = np.empty(X.shape[0])
    dictionary = state.coeffs.dictionary
    for lo in range(0, X.shape[0], chunk):
        U = link_inputs(state, X[lo : lo + chunk])
        out[lo : lo + chunk] = apply_design(link_design(dictionary, U), state.coeffs.beta)
    return out


def predict(state: ModelState, x) -> float:
    """``f(Theta x)`` for a single covariate vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("predict takes one covariate vector; use predict_many for batches")
    return float(predict_many(state, x[None, :])[0])


def empirical_risk(state: ModelState, data: Dataset) -> float:
    residual = data.Y - predict_many(state, data.X)
    return float(np.mean(residual**2))


def excess_risk_mc(
    state: ModelState,
    truth: Callable[[np.ndarray], np.ndarray],
    generator: Callable[[np.random.Generator, int], np.ndarray],
    n_eval: int = 100_000,
    seed: int | Sequence[int] = 0,
) -> tuple[float, float]:
    """Monte Carlo estimate and standard error of ``E[(f(Theta X) - F(X))^2]``."""
    if n_eval < 1:
        raise ValueError("n_eval must be positive")
    rng = np.random.default_rng(seed)
    X = generator(rng, n_eval)
    sq = (predict_many(state, X) - np.asarray(truth(X), dtype=float)) ** 2
    stderr = float(sq.std(ddof=1) / math.sqrt(n_eval)) if n_eval > 1 else float("inf")
    return float(sq.mean()), stderr


def lambda_from_constants(n: int, C: float, Gamma: float, sigma: float) -> tuple[float, float]:
    """Tuning rule ``Q = 8(2C+1)(Gamma v (2C+1))``, ``lambda = n / (Q + 2((2C+1)^2 + 4 sigma^2))``."""
    if n < 1 or C < 1 or Gamma <= 0 or sigma <= 0:
        raise ValueError("need n >= 1, C >= 1, Gamma > 0, sigma > 0")
    a = 2.0 * C + 1.0
    Q = 8.0 * a * max(Gamma, a)
    lam = n / (Q + 2.0 * (a * a + 4.0 * sigma * sigma))
    return Q, lam
