"""The sieve prior over active dimension, sparse row-normalised matrices and link coefficients.

    pi = C_pi sum_d 10^-d (delta_d x mu_d x nu_d)
    mu_d = C_mu,d sum_{i=d}^{dp} 10^(-i+d-1) |I_d,i|^-1 sum_{I in I_d,i} mu_d,I
    nu_d = C_nu,d sum_{M=0}^{n} 10^-M nu_d,M

``mu_d,I`` is uniform on the product of unit spheres supported on the rows
of ``I``; ``nu_d,M`` is uniform on the weighted-l1 ball of radius ``C + 1``.

Structures ``(d, M)`` whose dictionary exceeds ``max_coefficients`` are
removed from the support and the remaining mass renormalised.  The prior
still factorises given ``d``, so conditional redraws stay exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .model import ActiveIndexSet, AffineMap, ModelState
from .wavelet import CoefficientVector, WaveletDictionary, WaveletSpec, dictionary_size

__all__ = [
    "PriorSpec",
    "StructuralWeights",
    "count_index_sets",
    "log_count_index_sets",
    "sparsity_weights",
    "sample_sparsity",
    "sample_index_set",
    "sample_sphere_row",
    "sample_theta",
    "sample_coeff_ball",
    "sample_level",
    "sample_prior",
    "structural_mass",
    "g_constant",
    "structure_marginals",
]

BASE = 10.0


@lru_cache(maxsize=4096)
def _count_table(d: int, p: int) -> tuple[tuple[int, ...], ...]:
    # table[j][s]: number of (I_1..I_j) with non-empty I's and sum |I| = s
    binom = [math.comb(p, s) for s in range(p + 1)]
    table = [(1,)]
    for j in range(1, d + 1):
        prev = table[-1]
        row = [0] * (j * p + 1)
        for s_prev, c in enumerate(prev):
            if c == 0:
                continue
            for s in range(1, p + 1):
                row[s_prev + s] += c * binom[s]
        table.append(tuple(row))
    return tuple(table)


def count_index_sets(d: int, i: int, p: int) -> int:
    """``|I_d,i|``: number of ``(I_1, ..., I_d)`` of non-empty subsets with ``sum |I_j| = i``.

    Exact integer arithmetic throughout.
    """
    if not 1 <= d <= p:
        raise ValueError("need 1 <= d <= p")
    if i < d or i > d * p:
        return 0
    return _count_table(d, p)[d][i]


def log_count_index_sets(d: int, i: int, p: int) -> float:
    c = count_index_sets(d, i, p)
    return math.log(c) if c > 0 else -math.inf


def sparsity_weights(d: int, p: int) -> np.ndarray:
    """Probabilities of ``||I|| = d, ..., dp`` under ``mu_d``."""
    i = np.arange(d, d * p + 1)
    w = BASE ** (-(i - d + 1.0))
    c_mu = 9.0 / (1.0 - BASE ** ((1 - p) * d - 1))
    return c_mu * w


def sample_sparsity(d: int, p: int, rng: np.random.Generator) -> int:
    w = sparsity_weights(d, p)
    return int(d + rng.choice(len(w), p=w / w.sum()))


def sample_index_set(d: int, i: int, p: int, rng: np.random.Generator) -> ActiveIndexSet:
    """Uniform draw from ``I_d,i`` by a backward pass over the count table."""
    if not 1 <= d <= p:
        raise ValueError("need 1 <= d <= p")
    if i < d or i > d * p:
        raise ValueError(f"sparsity {i} out of range [{d}, {d * p}]")
    table = _count_table(d, p)
    rows = []
    remaining = i
    for j in range(d, 0, -1):
        # size of this row, weighted by C(p, s) * (ways to fill the other j - 1 rows)
        sizes = [s for s in range(1, p + 1) if 0 <= remaining - s < len(table[j - 1])]
        weights = [math.comb(p, s) * table[j - 1][remaining - s] for s in sizes]
        total = sum(weights)
        probs = np.array([w / total for w in weights])
        s = sizes[int(rng.choice(len(sizes), p=probs / probs.sum()))]
        rows.append(tuple(sorted(int(c) for c in rng.choice(p, size=s, replace=False))))
        remaining -= s
    return ActiveIndexSet(tuple(rows))


def sample_sphere_row(support: tuple[int, ...], p: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform unit vector on the coordinates in ``support``, zero elsewhere."""
    if len(support) == 0:
        raise ValueError("support must be non-empty")
    row = np.zeros(p)
    g = rng.standard_normal(len(support))
    nrm = np.linalg.norm(g)
    while nrm == 0.0:
        g = rng.standard_normal(len(support))
        nrm = np.linalg.norm(g)
    row[list(support)] = g / nrm
    return row


def sample_theta(d: int, p: int, rng: np.random.Generator) -> tuple[ActiveIndexSet, np.ndarray]:
    """Draw ``(I, Theta)`` from ``mu_d``."""
    i = sample_sparsity(d, p, rng)
    index_set = sample_index_set(d, i, p, rng)
    theta = np.stack([sample_sphere_row(r, p, rng) for r in index_set.rows])
    return index_set, theta


def sample_coeff_ball(
    dictionary: WaveletDictionary, radius: float, rng: np.random.Generator
) -> CoefficientVector:
    """Uniform draw from ``{beta : ||beta||_B <= radius}``.

    Uniform on the unit l1 ball (Dirichlet direction times ``U^(1/k)``),
    then scaled coordinatewise by ``radius / weight``; diagonal maps keep
    uniformity.
    """
    k = dictionary.size
    e = rng.standard_exponential(k)
    signs = rng.choice((-1.0, 1.0), size=k)
    r = rng.random() ** (1.0 / k)
    u = signs * r * e / e.sum()
    return CoefficientVector(radius * u / dictionary.weights, dictionary)


@dataclass(frozen=True)
class PriorSpec:
    """Constants defining the prior.

    ``N`` defaults to the wavelet order, the smallest radius for which the
    scaling shifts cover a unit interval.  ``link_map`` is attached to every
    sampled state.
    """

    p: int
    n: int
    C: float = 1.0
    N: int | None = None
    wavelet: WaveletSpec = field(default_factory=WaveletSpec)
    link_map: AffineMap = field(default_factory=AffineMap)
    max_coefficients: int = 20_000

    def __post_init__(self) -> None:
        if self.p < 1 or self.n < 1 or self.C < 1:
            raise ValueError("need p >= 1, n >= 1, C >= 1")
        if self.N is None:
            object.__setattr__(self, "N", self.wavelet.order)
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if not self.level_weights_feasible(1).any():
            raise ValueError("max_coefficients excludes every structure with d = 1")

    @property
    def d_max(self) -> int:
        return self.p

    @property
    def radius(self) -> float:
        return self.C + 1.0

    def dictionary(self, d: int, M: int) -> WaveletDictionary:
        return _dictionary(d, M, self.N, self.wavelet)

    def feasible(self, d: int, M: int) -> bool:
        return dictionary_size(d, M, self.N) <= self.max_coefficients

    def level_weights_feasible(self, d: int) -> np.ndarray:
        """Unnormalised ``nu_d`` level weights with infeasible levels zeroed."""
        out = np.zeros(self.n + 1)
        for M in range(self.n + 1):
            if not self.feasible(d, M):
                break  # sizes grow with M
            out[M] = BASE ** (-M)
        return out

    @cached_property
    def weights(self) -> "StructuralWeights":
        return StructuralWeights.of(self)


@lru_cache(maxsize=256)
def _dictionary(d: int, M: int, N: int, spec: WaveletSpec) -> WaveletDictionary:
    return WaveletDictionary(d, M, N, spec)


@dataclass(frozen=True, eq=False)
class StructuralWeights:
    """Closed-form weight families of the prior.

    ``dim``: ``C_pi 10^-d``; ``sparsity[d]``: ``C_mu,d 10^(-i+d-1)``;
    ``level[d]``: ``C_nu,d 10^-M`` (each untruncated).  ``dim_restricted`` and
    ``level_restricted`` are the marginal/conditional laws after removing
    structures above the coefficient budget.
    """

    dim: np.ndarray
    sparsity: dict[int, np.ndarray]
    level: np.ndarray
    dim_restricted: np.ndarray
    level_restricted: dict[int, np.ndarray]

    @classmethod
    def of(cls, spec: PriorSpec) -> "StructuralWeights":
        p, n = spec.p, spec.n
        d = np.arange(1, p + 1)
        c_pi = 9.0 / (1.0 - BASE ** (-p))
        dim = c_pi * BASE ** (-d.astype(float))
        c_nu = 9.0 / (10.0 - BASE ** (-n))
        level = c_nu * BASE ** (-np.arange(n + 1, dtype=float))
        sparsity = {int(k): sparsity_weights(int(k), p) for k in d}
        level_restricted = {}
        mass = np.zeros(p)
        for k in d:
            w = spec.level_weights_feasible(int(k))
            mass[k - 1] = c_nu * w.sum()
            level_restricted[int(k)] = w / w.sum() if w.sum() > 0 else w
        dim_r = dim * mass
        return cls(dim, sparsity, level, dim_r / dim_r.sum(), level_restricted)


def sample_level(spec: PriorSpec, d: int, rng: np.random.Generator) -> int:
    w = spec.weights.level_restricted[d]
    return int(rng.choice(len(w), p=w))


def sample_prior(spec: PriorSpec, rng: np.random.Generator) -> ModelState:
    """One draw ``(d, I, Theta, M, beta)`` from the (budget-restricted) prior."""
    w = spec.weights.dim_restricted
    d = int(1 + rng.choice(len(w), p=w))
    index_set, theta = sample_theta(d, spec.p, rng)
    M = sample_level(spec, d, rng)
    coeffs = sample_coeff_ball(spec.dictionary(d, M), spec.radius, rng)
    return ModelState(index_set, theta, coeffs, spec.link_map)


def structural_mass(spec: PriorSpec, d: int, index_set: ActiveIndexSet | int, M: int) -> float:
    """``log[C_pi C_mu,d C_nu,d 10^(-||I||-M-1) / |I_d,||I|||]``: untruncated prior mass of one structure."""
    size = index_set if isinstance(index_set, int) else index_set.size
    p, n = spec.p, spec.n
    log_norm = (
        math.log(9.0 / (1.0 - BASE ** (-p)))
        + math.log(9.0 / (1.0 - BASE ** ((1 - p) * d - 1)))
        + math.log(9.0 / (10.0 - BASE ** (-n)))
    )
    return log_norm - (size + M + 1) * math.log(BASE) - log_count_index_sets(d, size, p)


def g_constant(spec: PriorSpec, d: int, index_set: ActiveIndexSet | int, M: int) -> float:
    """``G(d, I, M) = (1/729)(1-10^-p)(1-10^((1-p)d-1))(10-10^-n) 10^(||I||+M+1) |I_d,||I|||``.

    The leading constant is ``1/729 = 9^-3``, the product of the three
    normalisers, so that ``G == exp(-structural_mass)``.
    """
    size = index_set if isinstance(index_set, int) else index_set.size
    p, n = spec.p, spec.n
    return (
        (1.0 / 729.0)
        * (1.0 - BASE ** (-p))
        * (1.0 - BASE ** ((1 - p) * d - 1))
        * (10.0 - BASE ** (-n))
        * BASE ** (size + M + 1)
        * count_index_sets(d, size, p)
    )


def structure_marginals(spec: PriorSpec) -> dict[str, np.ndarray]:
    """Exact marginal laws of ``d``, ``||I||`` and ``M`` under the budget-restricted prior.

    Arrays are indexed by value: ``d`` in ``0..p`` (entry 0 unused),
    ``||I||`` in ``0..p^2``, ``M`` in ``0..n``.
    """
    w = spec.weights
    p, n = spec.p, spec.n
    dim = np.zeros(p + 1)
    dim[1:] = w.dim_restricted
    size = np.zeros(p * p + 1)
    level = np.zeros(n + 1)
    for d in range(1, p + 1):
        s = w.sparsity[d]
        size[d : d * p + 1] += dim[d] * s / s.sum()
        level += dim[d] * w.level_restricted[d]
    return {"d": dim, "size": size, "M": level}
