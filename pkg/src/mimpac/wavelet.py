"""Daubechies scaling/wavelet tables and the tensor-product dictionary.

Functions on R^d are represented as finite expansions

    f(x) = sum_l beta_l Psi_l(x),
    Psi_l(x) = 2^(l1 d / 2) prod_i psi_{l3_i}(2^l1 x_i - l2_i),

with psi_0 = phi (scaling function) and psi_1 = psi (mother wavelet).  The
index set holds a scaling block ``(0, l2, 0)`` with ``|l2|_inf <= N`` and
detail blocks ``(l1, l2, l3)`` for ``0 <= l1 <= M``, ``|l2|_inf <= 2^l1 N``,
``l3 != 0``.  Indices are laid out in a fixed canonical order (scaling
block first, then levels ascending, shifts lexicographic, kinds
lexicographic), so truncating to a lower level is a prefix slice.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, NamedTuple, Sequence

import numpy as np

__all__ = [
    "WaveletSpec",
    "WaveletIndex",
    "WaveletDictionary",
    "CoefficientVector",
    "daubechies_filter",
    "dictionary_size",
    "enumerate_indices",
    "eval_scaling",
    "eval_wavelet",
    "eval_basis",
    "eval_link",
    "besov_norm",
    "wavelet_coefficients",
    "project_to_level",
    "link_design",
]


def daubechies_filter(order: int) -> np.ndarray:
    """Extremal-phase Daubechies low-pass filter with ``2 * order`` taps.

    Obtained by spectral factorisation of the Daubechies polynomial; taps
    are normalised so that ``sum(h) == sqrt(2)``.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    # P(y) = sum_k C(order-1+k, k) y^k with y = sin^2(w/2)
    coeffs = [math.comb(order - 1 + k, k) for k in range(order)]
    y_roots = np.roots(coeffs[::-1]) if order > 1 else np.array([])
    poly = np.poly1d([1.0])
    for y in y_roots:
        # y = (2 - z - 1/z) / 4  <=>  z^2 - (2 - 4y) z + 1 = 0; keep the root inside the unit circle
        z = np.roots([1.0, -(2.0 - 4.0 * y), 1.0])
        poly *= np.poly1d([1.0, -z[np.argmin(np.abs(z))]])
    for _ in range(order):
        poly *= np.poly1d([1.0, 1.0])
    h = np.real(poly.c)
    return h * math.sqrt(2.0) / h.sum()


def _cascade(h: np.ndarray, resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """phi and psi on the dyadic grid ``m 2^-resolution`` over ``[0, len(h)-1]``."""
    taps = len(h)
    span = taps - 1
    root2 = math.sqrt(2.0)
    # values at the integers: eigenvector of the two-scale operator for eigenvalue 1
    a = np.zeros((span + 1, span + 1))
    for i in range(span + 1):
        for j in range(span + 1):
            if 0 <= 2 * i - j < taps:
                a[i, j] = root2 * h[2 * i - j]
    w, v = np.linalg.eig(a)
    vals = np.real(v[:, np.argmin(np.abs(w - 1.0))])
    vals = vals / vals.sum()

    def refine(prev: np.ndarray, filt: np.ndarray, level: int) -> np.ndarray:
        # evaluate sqrt(2) sum_k filt_k prev(2x - k) on grid 2^-level, prev on grid 2^-(level-1)
        m = span * 2**level + 1
        pos = 2 * np.arange(m)  # 2x in units of 2^-level, i.e. 2x on grid 2^-(level-1) is pos/2
        out = np.zeros(m)
        step = 2 ** (level - 1)
        for k, hk in enumerate(filt):
            it = pos // 2 - k * step
            ok = (it >= 0) & (it < len(prev))
            out[ok] += root2 * hk * prev[it[ok]]
        return out

    phi = vals
    for level in range(1, resolution + 1):
        phi = refine(phi, h, level)
    g = np.array([(-1) ** k * h[span - k] for k in range(taps)])
    # psi(x) = sqrt(2) sum_k g_k phi(2x - k) evaluated from the finest phi table
    m = len(phi)
    psi = np.zeros(m)
    pos = 2 * np.arange(m)
    scale = 2**resolution
    for k, gk in enumerate(g):
        it = pos - k * scale
        ok = (it >= 0) & (it < m)
        psi[ok] += root2 * gk * phi[it[ok]]
    return phi, psi


@dataclass(frozen=True)
class WaveletSpec:
    """Tabulated Daubechies scaling function and wavelet.

    Values between grid nodes are linearly interpolated; both functions
    vanish outside ``[0, 2 * order - 1]``.  ``L`` is the largest of the sup
    norms of phi, psi and of their finite-difference derivatives.
    """

    order: int = 4
    table_resolution: int = 12
    filter: np.ndarray = field(init=False, repr=False, compare=False)
    phi_table: np.ndarray = field(init=False, repr=False, compare=False)
    psi_table: np.ndarray = field(init=False, repr=False, compare=False)
    L: float = field(init=False, compare=False)

    def __post_init__(self) -> None:
        if self.order < 3:
            raise ValueError("order must be >= 3 (continuously differentiable wavelets)")
        if self.table_resolution < 2:
            raise ValueError("table_resolution must be >= 2")
        h, phi, psi = _tables(self.order, self.table_resolution)
        object.__setattr__(self, "filter", h)
        object.__setattr__(self, "phi_table", phi)
        object.__setattr__(self, "psi_table", psi)
        step = 2.0**-self.table_resolution
        L = max(
            np.abs(phi).max(),
            np.abs(psi).max(),
            np.abs(np.diff(phi)).max() / step,
            np.abs(np.diff(psi)).max() / step,
        )
        object.__setattr__(self, "L", float(L))

    @property
    def support(self) -> int:
        """Right end of the common support ``[0, 2 * order - 1]``."""
        return 2 * self.order - 1

    def _interp(self, table: np.ndarray, x) -> np.ndarray:
        t = np.asarray(x, dtype=float) * 2.0**self.table_resolution
        last = len(table) - 1
        inside = (t >= 0.0) & (t <= last)
        tc = np.clip(t, 0.0, last)
        i = np.minimum(np.floor(tc).astype(np.int64), last - 1)
        frac = tc - i
        out = (1.0 - frac) * table[i] + frac * table[i + 1]
        return np.where(inside, out, 0.0)

    def phi_psi(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Both tables at the same points (shares the interpolation weights)."""
        t = np.asarray(x, dtype=float) * 2.0**self.table_resolution
        last = len(self.phi_table) - 1
        inside = (t >= 0.0) & (t <= last)
        tc = np.clip(t, 0.0, last)
        i = np.minimum(tc.astype(np.int64), last - 1)
        hi = np.where(inside, tc - i, 0.0)
        lo = np.where(inside, 1.0 - hi, 0.0)
        return lo * self.phi_table[i] + hi * self.phi_table[i + 1], lo * self.psi_table[i] + hi * self.psi_table[i + 1]

    def phi(self, x) -> np.ndarray:
        return self._interp(self.phi_table, x)

    def psi(self, x) -> np.ndarray:
        return self._interp(self.psi_table, x)


@lru_cache(maxsize=None)
def _tables(order: int, resolution: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    h = daubechies_filter(order)
    phi, psi = _cascade(h, resolution)
    for arr in (h, phi, psi):
        arr.setflags(write=False)
    return h, phi, psi


def eval_scaling(spec: WaveletSpec, x):
    """phi(x) from the cascade table (scalar in, scalar out)."""
    out = spec.phi(x)
    return float(out) if np.ndim(out) == 0 else out


def eval_wavelet(spec: WaveletSpec, x):
    """psi(x) from the cascade table (scalar in, scalar out)."""
    out = spec.psi(x)
    return float(out) if np.ndim(out) == 0 else out


class WaveletIndex(NamedTuple):
    l1: int
    l2: tuple[int, ...]
    l3: tuple[int, ...]

    @property
    def is_scaling(self) -> bool:
        return not any(self.l3)


def dictionary_size(d: int, M: int, N: int) -> int:
    """``(2N+1)^d + sum_{l=0}^{M} (2^d - 1)(2^(l+1) N + 1)^d``."""
    size = (2 * N + 1) ** d
    for level in range(M + 1):
        size += (2**d - 1) * (2 ** (level + 1) * N + 1) ** d
    return size


def enumerate_indices(d: int, M: int, N: int) -> list[WaveletIndex]:
    """All indices of the dictionary at level ``M`` and radius ``N``, canonical order."""
    if d < 1 or M < 0 or N < 1:
        raise ValueError("need d >= 1, M >= 0, N >= 1")
    zero = (0,) * d
    out = [WaveletIndex(0, l2, zero) for l2 in itertools.product(range(-N, N + 1), repeat=d)]
    kinds = [k for k in itertools.product((0, 1), repeat=d) if any(k)]
    for level in range(M + 1):
        r = 2**level * N
        for l2 in itertools.product(range(-r, r + 1), repeat=d):
            out.extend(WaveletIndex(level, l2, k) for k in kinds)
    return out


@dataclass(frozen=True, eq=False)
class WaveletDictionary:
    """The tensor basis restricted to the index set at level ``M``, radius ``N``."""

    d: int
    M: int
    N: int
    spec: WaveletSpec

    def __post_init__(self) -> None:
        if self.d < 1 or self.M < 0 or self.N < 1:
            raise ValueError("need d >= 1, M >= 0, N >= 1")

    def __eq__(self, other) -> bool:
        if not isinstance(other, WaveletDictionary):
            return NotImplemented
        return (self.d, self.M, self.N, self.spec) == (other.d, other.M, other.N, other.spec)

    def __hash__(self) -> int:
        return hash((self.d, self.M, self.N, self.spec))

    def __len__(self) -> int:
        return self.size

    @cached_property
    def size(self) -> int:
        return dictionary_size(self.d, self.M, self.N)

    @cached_property
    def indices(self) -> list[WaveletIndex]:
        return enumerate_indices(self.d, self.M, self.N)

    def block_offset(self, level: int) -> int:
        """Position of the first detail index at ``level`` (level -1 is the scaling block)."""
        if level < 0:
            return 0
        return dictionary_size(self.d, level - 1, self.N) if level > 0 else (2 * self.N + 1) ** self.d

    @cached_property
    def levels(self) -> np.ndarray:
        """``l1`` of every index, aligned with ``indices``."""
        out = np.zeros(self.size, dtype=np.int64)
        for level in range(self.M + 1):
            lo = self.block_offset(level)
            hi = self.block_offset(level + 1) if level < self.M else self.size
            out[lo:hi] = level
        out.setflags(write=False)
        return out

    @cached_property
    def weights(self) -> np.ndarray:
        """``L^d 2^(l1 (d/2 + 1))`` per index; the scaling block uses ``l1 = 0``."""
        w = self.spec.L**self.d * 2.0 ** (self.levels * (self.d / 2.0 + 1.0))
        w.setflags(write=False)
        return w

    def position(self, index: WaveletIndex) -> int:
        """Canonical position of ``index``; ``KeyError`` if it is not in the dictionary."""
        l1, l2, l3 = index
        d = self.d
        if len(l2) != d or len(l3) != d or any(b not in (0, 1) for b in l3):
            raise KeyError(index)
        if not any(l3):
            r = self.N
            if l1 != 0 or max(abs(s) for s in l2) > r:
                raise KeyError(index)
            return _rank(l2, r)
        if not 0 <= l1 <= self.M:
            raise KeyError(index)
        r = 2**l1 * self.N
        if max(abs(s) for s in l2) > r:
            raise KeyError(index)
        code = sum(b << (d - 1 - i) for i, b in enumerate(l3))
        return self.block_offset(l1) + _rank(l2, r) * (2**d - 1) + code - 1

    def __contains__(self, index) -> bool:
        try:
            self.position(index)
        except (KeyError, TypeError, ValueError):
            return False
        return True


def _rank(l2: Sequence[int], r: int) -> int:
    width = 2 * r + 1
    pos = 0
    for s in l2:
        pos = pos * width + (s + r)
    return pos


@dataclass(frozen=True, eq=False)
class CoefficientVector:
    beta: np.ndarray
    dictionary: WaveletDictionary

    def __post_init__(self) -> None:
        beta = np.asarray(self.beta, dtype=float)
        if beta.shape != (self.dictionary.size,):
            raise ValueError(
                f"coefficient length {beta.shape} does not match dictionary size {self.dictionary.size}"
            )
        object.__setattr__(self, "beta", beta)

    @classmethod
    def zeros(cls, dictionary: WaveletDictionary) -> "CoefficientVector":
        return cls(np.zeros(dictionary.size), dictionary)


def eval_basis(dictionary: WaveletDictionary, index: WaveletIndex, x) -> float:
    """Value of one tensor basis function at the point ``x`` (length ``d``)."""
    if index not in dictionary:
        raise ValueError(f"index {index} is not in the dictionary")
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (dictionary.d,):
        raise ValueError("point dimension does not match dictionary")
    spec = dictionary.spec
    l1, l2, l3 = index
    scale = 2.0**l1
    val = scale ** (dictionary.d / 2.0)
    for xi, shift, kind in zip(x, l2, l3):
        t = scale * xi - shift
        val *= spec.psi(t) if kind else spec.phi(t)
    return float(val)


def link_design(dictionary: WaveletDictionary, U) -> tuple[np.ndarray, np.ndarray]:
    """Sparse evaluation of every basis function at the rows of ``U``.

    Returns ``(idx, vals)`` of equal shape ``(n, m)`` such that
    ``f(U) = (beta[idx] * vals).sum(axis=1)``.  Only functions whose support
    contains a point appear with non-zero value; padding entries carry
    ``vals == 0``.
    """
    U = np.atleast_2d(np.asarray(U, dtype=float))
    n, d = U.shape
    if d != dictionary.d:
        raise ValueError("point dimension does not match dictionary")
    spec = dictionary.spec
    S = spec.support
    N = dictionary.N
    offs = np.arange(S)
    kinds = [k for k in itertools.product((0, 1), repeat=d) if any(k)]
    idx_blocks = []
    val_blocks = []

    def coord_tables(scale: float, r: int):
        # per coordinate: clipped shift ranks (n, S) and phi / psi values zeroed
        # where the shift falls outside |k| <= r, so padding needs no masking later
        ranks, phis, psis = [], [], []
        for i in range(d):
            t = scale * U[:, i]
            k = np.floor(t).astype(np.int64)[:, None] - offs[None, :]
            arg = t[:, None] - k
            valid = np.abs(k) <= r
            phi, psi = spec.phi_psi(arg)
            ranks.append(np.clip(k + r, 0, 2 * r).astype(np.int32))
            phis.append(np.where(valid, phi, 0.0))
            psis.append(np.where(valid, psi, 0.0))
        return ranks, phis, psis

    def tensor(parts: list[np.ndarray], combine) -> np.ndarray:
        out = parts[0]
        for part in parts[1:]:
            out = combine(out[:, :, None], part[:, None, :]).reshape(n, -1)
        return out

    # scaling block
    ranks, phis, _ = coord_tables(1.0, N)
    width = 2 * N + 1
    idx_blocks.append(tensor(ranks, lambda a, b: a * width + b))
    val_blocks.append(tensor(phis, np.multiply))

    for level in range(dictionary.M + 1):
        scale = 2.0**level
        r = 2**level * N
        width = 2 * r + 1
        ranks, phis, psis = coord_tables(scale, r)
        rank = tensor(ranks, lambda a, b: a * width + b)
        base = rank * np.int32(2**d - 1) + np.int32(dictionary.block_offset(level) - 1)
        norm = scale ** (d / 2.0)
        for kind in kinds:
            code = sum(b << (d - 1 - i) for i, b in enumerate(kind))
            parts = [psis[i] if kind[i] else phis[i] for i in range(d)]
            parts[0] = norm * parts[0]
            idx_blocks.append(base + np.int32(code))
            val_blocks.append(tensor(parts, np.multiply))
    return np.concatenate(idx_blocks, axis=1), np.concatenate(val_blocks, axis=1)


def apply_design(design: tuple[np.ndarray, np.ndarray], beta: np.ndarray) -> np.ndarray:
    idx, vals = design
    return np.einsum("ij,ij->i", beta[idx], vals)


def eval_link(coeffs: CoefficientVector, x, chunk: int = 4096):
    """``sum_l beta_l Psi_l(x)`` at one point (length ``d``) or at rows of an ``(n, d)`` array."""
    dictionary = coeffs.dictionary
    arr = np.asarray(x, dtype=float)
    single = arr.ndim <= 1
    if single:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != dictionary.d:
        raise ValueError(f"expected points of dimension {dictionary.d}, got shape {np.shape(x)}")
    out = np.empty(arr.shape[0])
    for lo in range(0, arr.shape[0], chunk):
        block = arr[lo : lo + chunk]
        out[lo : lo + chunk] = apply_design(link_design(dictionary, block), coeffs.beta)
    return float(out[0]) if single else out


def besov_norm(coeffs: CoefficientVector) -> float:
    """Weighted l1 norm ``L^d sum_l 2^(l1 (d/2+1)) |beta_l|``."""
    return float(np.dot(coeffs.dictionary.weights, np.abs(coeffs.beta)))


def wavelet_coefficients(
    f: Callable[[np.ndarray], np.ndarray],
    dictionary: WaveletDictionary,
) -> CoefficientVector:
    """Inner products ``<f, Psi_l>`` by a Riemann/trapezoid rule.

    The grid step is ``2^-(table_resolution - 2)`` and covers the union of
    all supports, so every integrand vanishes at the grid ends and the two
    rules coincide.  ``f`` is called once on an ``(m, d)`` array of grid
    points; the tensor structure of ``Psi_l`` is then used coordinatewise.
    Intended for tests and oracle construction only.
    """
    spec = dictionary.spec
    d, M, N = dictionary.d, dictionary.M, dictionary.N
    S = spec.support
    step = 2.0 ** -(spec.table_resolution - 2)
    lo = -float(N)
    hi = float(N + S)
    grid = lo + step * np.arange(int(round((hi - lo) / step)) + 1)
    g = grid.size
    pts = np.stack(np.meshgrid(*([grid] * d), indexing="ij"), axis=-1).reshape(-1, d)
    fv = np.asarray(f(pts), dtype=float).reshape((g,) * d)
    if not np.all(np.isfinite(fv)):
        raise FloatingPointError("f is not finite at a quadrature node")

    beta = np.zeros(dictionary.size)

    def project(fvals: np.ndarray, mats: list[np.ndarray]) -> np.ndarray:
        # contract each grid axis with a (g, K_i) matrix of 1-d basis values
        out = fvals
        for m in mats:
            out = np.tensordot(out, m, axes=([0], [0]))
        return out * step**d

    def one_dim(scale: float, r: int, kind: int) -> np.ndarray:
        shifts = np.arange(-r, r + 1)
        t = scale * grid[:, None] - shifts[None, :]
        vals = spec.psi(t) if kind else spec.phi(t)
        return np.sqrt(scale) * vals

    phi0 = one_dim(1.0, N, 0)
    beta[: (2 * N + 1) ** d] = project(fv, [phi0] * d).reshape(-1)
    kinds = [k for k in itertools.product((0, 1), repeat=d) if any(k)]
    for level in range(M + 1):
        scale = 2.0**level
        r = 2**level * N
        tabs = (one_dim(scale, r, 0), one_dim(scale, r, 1))
        base = dictionary.block_offset(level)
        nk = 2**d - 1
        for kind in kinds:
            code = sum(b << (d - 1 - i) for i, b in enumerate(kind))
            block = project(fv, [tabs[b] for b in kind]).reshape(-1)
            beta[base + code - 1 : base + code - 1 + block.size * nk : nk] = block
    return CoefficientVector(beta, dictionary)


def project_to_level(coeffs: CoefficientVector, M: int) -> CoefficientVector:
    """Truncate an expansion to the dictionary at level ``M`` (a prefix in canonical order)."""
    src = coeffs.dictionary
    if M >= src.M:
        return coeffs
    target = WaveletDictionary(src.d, M, src.N, src.spec)
    return CoefficientVector(coeffs.beta[: target.size].copy(), target)
