"""Synthetic sparse multi-index data, seeded experiment grids, CSV reports and rate fits."""
from __future__ import annotations

import csv
import io
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.stats import truncnorm

from .model import (
    ActiveIndexSet,
    AffineMap,
    Dataset,
    ModelState,
    NoiseModel,
    excess_risk_mc,
    lambda_from_constants,
    predict_many,
    sparse_matrix,
)
from .prior import PriorSpec, sample_coeff_ball
from .sampler import LOCAL, STRUCTURAL, ChainConfig, draw_estimator
from .wavelet import WaveletSpec

__all__ = [
    "LINK_FAMILIES",
    "CSV_COLUMNS",
    "ExperimentConfig",
    "SyntheticTruth",
    "load_config",
    "parse_config",
    "generate_synthetic",
    "prior_for",
    "run_row",
    "run_experiment",
    "write_csv",
    "read_csv",
    "fit_rate",
    "RateFit",
]

LINK_FAMILIES = ("smooth", "wavelet")
CSV_COLUMNS = (
    "seed",
    "n",
    "p",
    "d_true",
    "sparsity_true",
    "link_family",
    "lambda",
    "chain_steps",
    "d_hat",
    "sparsity_hat",
    "M_hat",
    "empirical_risk",
    "excess_risk",
    "excess_stderr",
    "acc_struct",
    "acc_local",
    "wall_time_s",
)

TRUNCATION = 4.0  # noise is cut at +-4 sigma
NOISELESS_CONSTANT = 1e-12  # stands in for sigma and Gamma when sigma = 0
RATE_FLOOR = 1e-12

# stream tags mixed into the seed sequence of each row
_TRUTH, _DATA, _CHAIN, _EVAL = 0, 1, 2, 3


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment grid.

    ``Gamma`` left at ``None`` uses the constant implied by the truncated
    noise.  ``N`` left at ``None`` uses the wavelet order.  ``link_level`` is
    the resolution of the planted link for the ``wavelet`` family and
    ``link_amplitude`` the sup of the ``smooth`` link as a fraction of ``C``.
    ``lambda_scale`` multiplies the tuned temperature (1 reproduces the tuning
    rule; other values are for diagnostics).
    """

    p: int = 20
    n_grid: tuple[int, ...] = (250, 500, 1000, 2000, 4000)
    d_true: int = 1
    sparsity_true: int = 3
    link_family: str = "smooth"
    C: float = 1.0
    K: float = 1.0
    sigma: float = 0.1
    Gamma: float | None = None
    N: int | None = None
    wavelet_order: int = 4
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    chain_steps: int = 20_000
    burn_in: int = 5_000
    n_eval: int = 100_000
    output: str = "experiment.csv"
    link_level: int = 1
    link_amplitude: float = 0.5
    lambda_scale: float = 1.0
    max_coefficients: int = 20_000
    record_wall_time: bool = False

    def __post_init__(self) -> None:
        pos = dict(
            p=self.p, d_true=self.d_true, sparsity_true=self.sparsity_true, C=self.C, K=self.K,
            wavelet_order=self.wavelet_order, chain_steps=self.chain_steps, n_eval=self.n_eval,
            lambda_scale=self.lambda_scale, max_coefficients=self.max_coefficients,
        )
        for name, value in pos.items():
            if not value > 0:
                raise ValueError(f"{name} must be positive")
        if self.sigma < 0 or (self.Gamma is not None and self.Gamma <= 0):
            raise ValueError("sigma must be non-negative and Gamma positive")
        if self.N is not None and self.N < 1:
            raise ValueError("N must be positive")
        if not 0 < self.link_amplitude <= 1 or self.link_level < 0:
            raise ValueError("need 0 < link_amplitude <= 1 and link_level >= 0")
        if not self.n_grid or any(n < 1 for n in self.n_grid) or any(
            a >= b for a, b in zip(self.n_grid, self.n_grid[1:])
        ):
            raise ValueError("n grid must be positive and strictly increasing")
        if not self.seeds or len(set(self.seeds)) != len(self.seeds) or min(self.seeds) < 0:
            raise ValueError("seeds must be distinct non-negative integers")
        if self.link_family not in LINK_FAMILIES:
            raise ValueError(f"unknown link family {self.link_family!r}; choose from {LINK_FAMILIES}")
        if not 0 <= self.burn_in < self.chain_steps:
            raise ValueError("need 0 <= burn_in < chain_steps")
        if self.d_true > self.sparsity_true:
            raise ValueError("need sparsity_true >= d_true (every row needs a support)")
        if self.sparsity_true > self.p:
            raise ValueError("sparsity_true > p: disjoint supports are impossible")

    @property
    def noise(self) -> NoiseModel:
        """Sub-Gaussian constants of the truncated noise (tiny positive stand-ins when noiseless)."""
        if self.sigma == 0:
            sd = gamma = NOISELESS_CONSTANT
        else:
            sd = self.sigma * float(truncnorm.std(-TRUNCATION, TRUNCATION))
            gamma = TRUNCATION * self.sigma
        return NoiseModel(sigma=sd, Gamma=self.Gamma if self.Gamma is not None else gamma)

    @property
    def index_bound(self) -> float:
        """Largest ``|theta_i . x|`` over the truth's rows: ``K sqrt(largest support)``."""
        return self.K * math.sqrt(-(-self.sparsity_true // self.d_true))


# --- config files ---------------------------------------------------------------------


def _convert(name: str, raw: str, kind):
    raw = raw.strip()
    if kind is bool:
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{name}: expected a boolean, got {raw!r}")
    if raw.lower() in ("none", ""):
        return None
    return kind(raw)


_KINDS = {
    "p": int, "d_true": int, "sparsity_true": int, "link_family": str, "C": float, "K": float,
    "sigma": float, "Gamma": float, "N": int, "wavelet_order": int, "chain_steps": int,
    "burn_in": int, "n_eval": int, "output": str, "link_level": int, "link_amplitude": float,
    "lambda_scale": float, "max_coefficients": int, "record_wall_time": bool,
}
_LISTS = {"n_grid", "seeds"}


def parse_config(text: str) -> ExperimentConfig:
    """Parse ``key = value`` lines (``#`` comments, comma-separated lists); unknown keys are errors."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key in values:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        try:
            if key in _LISTS:
                values[key] = tuple(int(v) for v in raw.split(",") if v.strip())
            elif key in _KINDS:
                values[key] = _convert(key, raw, _KINDS[key])
            else:
                raise KeyError(key)
        except KeyError:
            raise ValueError(f"line {lineno}: unknown key {key!r}") from None
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    return ExperimentConfig(**values)


def load_config(path: str | Path) -> ExperimentConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def format_config(cfg: ExperimentConfig) -> str:
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ", ".join(str(x) for x in v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


# --- synthetic truth ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SyntheticTruth:
    """Planted ``Theta*`` (disjoint supports), the regression function and the noise sampler."""

    index_set: ActiveIndexSet
    theta: np.ndarray
    link: Callable[[np.ndarray], np.ndarray]
    noise: Callable[[np.random.Generator, int], np.ndarray]
    C: float
    sup_bound: float
    link_state: ModelState | None = None

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return self.link(np.atleast_2d(X) @ self.theta.T)

    @property
    def d(self) -> int:
        return self.theta.shape[0]


def prior_for(cfg: ExperimentConfig, n: int) -> PriorSpec:
    """Prior with the link map sending ``[-(B+1), B+1]`` onto the partition-of-unity region."""
    wavelet = WaveletSpec(order=cfg.wavelet_order)
    N = cfg.N if cfg.N is not None else cfg.wavelet_order
    link_map = AffineMap.covering(cfg.index_bound + 1.0, wavelet.support, N)
    return PriorSpec(
        p=cfg.p, n=n, C=cfg.C, N=N, wavelet=wavelet, link_map=link_map, max_coefficients=cfg.max_coefficients
    )


def _split_sizes(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (i < extra) for i in range(parts)]


def _smooth_link(amplitude: float, bound: float) -> Callable[[np.ndarray], np.ndarray]:
    # one full sine period across the index range, averaged over rows
    def link(Z: np.ndarray) -> np.ndarray:
        return amplitude * np.mean(np.sin(math.pi * Z / bound), axis=1)

    return link


def _noise_sampler(sigma: float) -> Callable[[np.random.Generator, int], np.ndarray]:
    def sample(rng: np.random.Generator, n: int) -> np.ndarray:
        if sigma == 0:
            return np.zeros(n)
        return sigma * truncnorm.rvs(-TRUNCATION, TRUNCATION, size=n, random_state=rng)

    return sample


def make_truth(cfg: ExperimentConfig, rng: np.random.Generator) -> SyntheticTruth:
    cols = rng.permutation(cfg.p)
    rows, values, start = [], [], 0
    for size in _split_sizes(cfg.sparsity_true, cfg.d_true):
        rows.append(tuple(int(c) for c in cols[start : start + size]))
        g = rng.standard_normal(size)
        values.append(g / np.linalg.norm(g))
        start += size
    index_set = ActiveIndexSet(tuple(rows))
    # values are stored in sorted-column order by ActiveIndexSet, so re-map them
    theta = np.zeros((cfg.d_true, cfg.p))
    for i, (r, v) in enumerate(zip(rows, values)):
        theta[i, list(r)] = v
    link_state = None
    if cfg.link_family == "smooth":
        amplitude = cfg.link_amplitude * cfg.C
        link = _smooth_link(amplitude, cfg.index_bound)
        sup = amplitude
    else:
        spec = prior_for(cfg, max(cfg.n_grid))
        coeffs = sample_coeff_ball(spec.dictionary(cfg.d_true, cfg.link_level), cfg.C * cfg.link_amplitude, rng)
        link_state = ModelState(index_set, theta, coeffs, spec.link_map)

        def link(Z: np.ndarray, state=link_state) -> np.ndarray:
            # evaluate the planted link on the already-reduced inputs
            from .wavelet import apply_design, link_design

            return apply_design(link_design(state.coeffs.dictionary, state.link_map(Z)), state.coeffs.beta)

        sup = cfg.C * cfg.link_amplitude  # sup |f| <= ||beta||_B
    return SyntheticTruth(index_set, theta, link, _noise_sampler(cfg.sigma), cfg.C, sup, link_state)


def covariates(cfg: ExperimentConfig) -> Callable[[np.random.Generator, int], np.ndarray]:
    def draw(rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(-cfg.K, cfg.K, size=(n, cfg.p))

    return draw


def _rng(root: int, seed: int, *tags: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([root, seed, *tags]))


def generate_synthetic(
    cfg: ExperimentConfig, seed: int, n: int | None = None, root: int = 0
) -> tuple[Dataset, SyntheticTruth]:
    """Draw the truth for ``seed`` and ``n`` samples from it.

    The truth depends on ``(root, seed)`` only, so every ``n`` of a grid
    shares it; the sample depends on ``(root, seed, n)``.
    """
    n = n if n is not None else cfg.n_grid[0]
    truth = make_truth(cfg, _rng(root, seed, _TRUTH))
    rng = _rng(root, seed, _DATA, n)
    X = covariates(cfg)(rng, n)
    F = truth(X)
    eps = truth.noise(rng, n)
    if np.abs(X).max() > cfg.K or np.abs(F).max() > cfg.C:
        raise AssertionError("generated data violates the sup bounds")
    gram = truth.theta @ truth.theta.T
    if np.abs(gram - np.eye(truth.d)).max() > 1e-12:
        raise AssertionError("planted rows are not orthonormal")
    return Dataset(X, F + eps, K=cfg.K, C=cfg.C), truth


# --- experiment -----------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def run_row(cfg: ExperimentConfig, n: int, seed: int, root: int = 0) -> dict:
    """One ``(n, seed)`` cell of the grid."""
    start = time.perf_counter()
    data, truth = generate_synthetic(cfg, seed, n, root)
    noise = cfg.noise
    _, lam = lambda_from_constants(n, cfg.C, noise.Gamma, noise.sigma)
    lam *= cfg.lambda_scale
    spec = prior_for(cfg, n)
    chain = ChainConfig(lam=lam, steps=cfg.chain_steps, burn_in=cfg.burn_in)
    state, risk, result = draw_estimator(data, spec, chain, _rng(root, seed, _CHAIN, n))
    # same evaluation stream for every n of a seed
    excess, stderr = excess_risk_mc(
        state, truth, covariates(cfg), cfg.n_eval, seed=[root, seed, _EVAL]
    )
    wall = time.perf_counter() - start
    return {
        "seed": seed,
        "n": n,
        "p": cfg.p,
        "d_true": cfg.d_true,
        "sparsity_true": cfg.sparsity_true,
        "link_family": cfg.link_family,
        "lambda": float(lam),
        "chain_steps": cfg.chain_steps,
        "d_hat": state.d,
        "sparsity_hat": state.index_set.size,
        "M_hat": state.M,
        "empirical_risk": float(risk),
        "excess_risk": float(excess),
        "excess_stderr": float(stderr),
        "acc_struct": float(result.acceptance_rate(STRUCTURAL)),
        "acc_local": float(result.acceptance_rate(LOCAL)),
        "wall_time_s": float(wall) if cfg.record_wall_time else "",
    }


def _row_job(args) -> dict:
    return run_row(*args)


def run_experiment(cfg: ExperimentConfig, threads: int = 1, root: int = 0, progress=None) -> list[dict]:
    """All ``(n, seed)`` rows, sorted by ``(n, seed)`` whatever the execution order."""
    if threads < 1:
        raise ValueError("threads must be >= 1")
    jobs = [(cfg, n, seed, root) for n in cfg.n_grid for seed in cfg.seeds]
    rows = []
    if threads == 1:
        for job in jobs:
            rows.append(_row_job(job))
            if progress:
                progress(rows[-1])
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for row in pool.map(_row_job, jobs):
                rows.append(row)
                if progress:
                    progress(row)
    return sorted(rows, key=lambda r: (r["n"], r["seed"]))


def rows_to_csv(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in sorted(rows, key=lambda r: (int(r["n"]), int(r["seed"]))):
        writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def write_csv(rows: Iterable[dict], path: str | Path) -> None:
    Path(path).write_text(rows_to_csv(rows), encoding="utf-8")


def read_csv(path: str | Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"n", "seed", "excess_risk"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: missing n, seed or excess_risk columns")
        return list(reader)


# --- rate -----------------------------------------------------------------------------


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    medians: dict[int, float] = field(default_factory=dict)

    def report(self) -> str:
        lines = [f"slope = {self.slope:.6f}", f"intercept = {self.intercept:.6f}", "n,median_excess"]
        lines += [f"{n},{m!r}" for n, m in sorted(self.medians.items())]
        return "\n".join(lines) + "\n"


def fit_rate(rows: Sequence[dict] | str | Path) -> RateFit:
    """Least-squares slope of log(median excess risk) against log n."""
    if isinstance(rows, (str, Path)):
        rows = read_csv(rows)
    by_n: dict[int, list[float]] = {}
    for row in rows:
        by_n.setdefault(int(row["n"]), []).append(float(row["excess_risk"]))
    if len(by_n) < 3 or min(len(v) for v in by_n.values()) < 3:
        raise ValueError("need at least 3 distinct n with at least 3 seeds each")
    medians = {n: float(np.median(v)) for n, v in sorted(by_n.items())}
    vals = np.array(list(medians.values()))
    if np.any(vals <= RATE_FLOOR):
        warnings.warn(f"non-positive or tiny median excess risk floored at {RATE_FLOOR}", RuntimeWarning)
        vals = np.maximum(vals, RATE_FLOOR)
    slope, intercept = np.polyfit(np.log(list(medians)), np.log(vals), 1)
    return RateFit(float(slope), float(intercept), medians)


def zero_predictor_excess(cfg: ExperimentConfig, seed: int, root: int = 0) -> tuple[float, float]:
    """Monte Carlo ``E F(X)^2`` on the evaluation stream used by the grid."""
    truth = make_truth(cfg, _rng(root, seed, _TRUTH))
    X = covariates(cfg)(np.random.default_rng([root, seed, _EVAL]), cfg.n_eval)
    sq = truth(X) ** 2
    return float(sq.mean()), float(sq.std(ddof=1) / math.sqrt(cfg.n_eval))
