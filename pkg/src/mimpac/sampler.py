"""Trans-dimensional Metropolis-Hastings for the Gibbs posterior ``exp(-lambda R_n) d pi``.

Five moves are mixed:

``full``      independent redraw of ``(d, I, Theta, M, beta)`` from the prior
``theta``     redraw of ``(I, Theta)`` from ``mu_d`` at the current ``d``
``level``     redraw of ``(M, beta)`` from ``nu_d`` at the current ``d``
``beta``      Gaussian random walk on ``beta`` inside the coefficient ball
``geodesic``  rotation of one row of ``Theta`` along a great circle of its support sphere

The three redraws propose from the exact conditional prior, so the prior
density cancels and the acceptance probability is
``min(1, exp(-lambda (R_n(new) - R_n(old))))``.  The two local moves are
symmetric with respect to the prior's base measure and use the same ratio;
a ``beta`` proposal outside the ball has zero prior density and is rejected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .model import Dataset, ModelState, link_inputs
from .prior import (
    PriorSpec,
    sample_coeff_ball,
    sample_level,
    sample_prior,
    sample_theta,
)
from .wavelet import CoefficientVector, apply_design, besov_norm, link_design

__all__ = ["MOVES", "accept", "ChainConfig", "ChainState", "ChainResult", "evaluate", "mh_step", "run_chain", "draw_estimator"]

MOVES = ("full", "theta", "level", "beta", "geodesic")
STRUCTURAL = ("full", "theta", "level")
LOCAL = ("beta", "geodesic")

# drift of a rotated row away from unit norm beyond this aborts the chain
DRIFT_TOL = 1e-9


@dataclass(frozen=True)
class ChainConfig:
    """Sampler settings.

    ``beta_scale`` is the random-walk standard deviation in the normalised
    coordinates ``w_l beta_l`` relative to ``(C + 1) / k``; ``delta_scale`` is
    the standard deviation of the rotation angle in radians.  Both adapt
    during burn-in only.
    """

    lam: float
    move_probs: tuple[float, ...] = (0.05, 0.15, 0.15, 0.35, 0.30)
    beta_scale: float = 0.1
    delta_scale: float = 0.2
    steps: int = 10_000
    burn_in: int = 1_000
    thinning: int = 1
    seed: int = 0
    adapt: bool = True
    target_accept: float = 0.3

    def __post_init__(self) -> None:
        probs = np.asarray(self.move_probs, dtype=float)
        if probs.shape != (len(MOVES),) or np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError("move_probs must be five non-negative numbers summing to 1")
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        if not self.steps > self.burn_in >= 0 or self.thinning < 1:
            raise ValueError("need steps > burn_in >= 0 and thinning >= 1")
        if self.beta_scale <= 0 or self.delta_scale <= 0:
            raise ValueError("proposal scales must be positive")

    @property
    def n_retained(self) -> int:
        return -(-(self.steps - self.burn_in) // self.thinning)


@dataclass(frozen=True, eq=False)
class ChainState:
    """A model state together with its cached evaluation on the data."""

    state: ModelState
    design: tuple[np.ndarray, np.ndarray] = field(repr=False)
    preds: np.ndarray = field(repr=False)
    risk: float


def evaluate(state: ModelState, data: Dataset, design=None) -> ChainState:
    if design is None:
        design = link_design(state.coeffs.dictionary, link_inputs(state, data.X))
    preds = apply_design(design, state.coeffs.beta)
    risk = float(np.mean((data.Y - preds) ** 2))
    return ChainState(state, design, preds, risk)


@dataclass
class _Scales:
    beta: float
    delta: float


def _propose_beta(cur: ChainState, spec: PriorSpec, scale: float, rng) -> ModelState | None:
    coeffs = cur.state.coeffs
    dic = coeffs.dictionary
    k = dic.size
    step = scale * spec.radius / k
    beta = coeffs.beta + step * rng.standard_normal(k) / dic.weights
    new = CoefficientVector(beta, dic)
    if besov_norm(new) > spec.radius:
        return None
    return replace(cur.state, coeffs=new)


def _propose_geodesic(cur: ChainState, scale: float, rng) -> ModelState:
    state = cur.state
    i = int(rng.integers(state.d))
    cols = list(state.index_set.rows[i])
    theta = state.theta.copy()
    row = theta[i, cols]
    if len(cols) == 1:
        # the 0-sphere {-1, +1}: the only symmetric move is a flip
        theta[i, cols] = -row
        return replace(state, theta=theta)
    g = rng.standard_normal(len(cols))
    g -= np.dot(g, row) * row
    t = g / np.linalg.norm(g)
    delta = scale * rng.standard_normal()
    new = math.cos(delta) * row + math.sin(delta) * t
    drift = abs(np.linalg.norm(new) - 1.0)
    if drift > DRIFT_TOL:
        raise RuntimeError(f"row drifted {drift:.3g} from unit norm during rotation")
    theta[i, cols] = new / np.linalg.norm(new)
    return replace(state, theta=theta)


def mh_step(
    cur: ChainState,
    data: Dataset,
    spec: PriorSpec,
    cfg: ChainConfig,
    rng: np.random.Generator,
    scales: _Scales | None = None,
    move: str | None = None,
) -> tuple[ChainState, bool, str]:
    """One Metropolis-Hastings transition; returns ``(next, accepted, move)``.

    ``move`` forces a particular proposal type instead of drawing it from
    ``cfg.move_probs``.
    """
    if scales is None:
        scales = _Scales(cfg.beta_scale, cfg.delta_scale)
    if move is None:
        move = MOVES[int(rng.choice(len(MOVES), p=cfg.move_probs))]
    state = cur.state
    design = None
    if move == "full":
        proposal = sample_prior(spec, rng)
    elif move == "theta":
        index_set, theta = sample_theta(state.d, spec.p, rng)
        proposal = replace(state, index_set=index_set, theta=theta)
    elif move == "level":
        M = sample_level(spec, state.d, rng)
        proposal = replace(state, coeffs=sample_coeff_ball(spec.dictionary(state.d, M), spec.radius, rng))
    elif move == "beta":
        proposal = _propose_beta(cur, spec, scales.beta, rng)
        if proposal is None:
            return cur, False, move
        design = cur.design
    elif move == "geodesic":
        proposal = _propose_geodesic(cur, scales.delta, rng)
    else:
        raise ValueError(f"unknown move {move!r}")
    new = evaluate(proposal, data, design)
    if accept(new.risk - cur.risk, cfg.lam, rng):
        return new, True, move
    return cur, False, move


def accept(delta_risk: float, lam: float, rng: np.random.Generator) -> bool:
    """Metropolis test with probability ``min(1, exp(-lam * delta_risk))``."""
    log_ratio = -lam * delta_risk
    return log_ratio >= 0.0 or math.log(rng.random()) < log_ratio


@dataclass
class ChainResult:
    """Retained states plus per-step diagnostics.

    ``risk_trace`` and ``structure_trace`` (columns ``d``, ``||I||``, ``M``)
    hold the state after every step, burn-in included.
    """

    states: list[ModelState]
    risks: np.ndarray
    risk_trace: np.ndarray
    structure_trace: np.ndarray
    proposed: dict[str, int]
    accepted: dict[str, int]
    final: ModelState
    final_risk: float
    beta_scale: float
    delta_scale: float

    def acceptance_rate(self, moves=MOVES) -> float:
        prop = sum(self.proposed[m] for m in moves)
        return sum(self.accepted[m] for m in moves) / prop if prop else float("nan")

    @property
    def rates(self) -> dict[str, float]:
        return {m: (self.accepted[m] / self.proposed[m] if self.proposed[m] else float("nan")) for m in MOVES}


def run_chain(
    data: Dataset,
    spec: PriorSpec,
    cfg: ChainConfig,
    rng: np.random.Generator | None = None,
    init: ModelState | None = None,
) -> ChainResult:
    """Run one chain started from a prior draw (or ``init``)."""
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    if data.p != spec.p:
        raise ValueError("data and prior disagree on p")
    cur = evaluate(init if init is not None else sample_prior(spec, rng), data)
    scales = _Scales(cfg.beta_scale, cfg.delta_scale)
    proposed = dict.fromkeys(MOVES, 0)
    accepted = dict.fromkeys(MOVES, 0)
    risk_trace = np.empty(cfg.steps)
    structure = np.empty((cfg.steps, 3), dtype=np.int64)
    states: list[ModelState] = []
    risks: list[float] = []
    seen = {"beta": 0, "geodesic": 0}
    for t in range(cfg.steps):
        cur, ok, move = mh_step(cur, data, spec, cfg, rng, scales)
        proposed[move] += 1
        accepted[move] += ok
        if cfg.adapt and t < cfg.burn_in and move in seen:
            # Robbins-Monro on the log scale towards the target acceptance rate
            seen[move] += 1
            gain = (float(ok) - cfg.target_accept) / seen[move] ** 0.6
            if move == "beta":
                scales.beta = min(scales.beta * math.exp(gain), 10.0)
            elif cur.state.d > 0 and any(len(r) > 1 for r in cur.state.index_set.rows):
                scales.delta = min(scales.delta * math.exp(gain), math.pi)
        st = cur.state
        risk_trace[t] = cur.risk
        structure[t] = (st.d, st.index_set.size, st.M)
        if t >= cfg.burn_in and (t - cfg.burn_in) % cfg.thinning == 0:
            states.append(st)
            risks.append(cur.risk)
    return ChainResult(
        states=states,
        risks=np.asarray(risks),
        risk_trace=risk_trace,
        structure_trace=structure,
        proposed=proposed,
        accepted=accepted,
        final=states[-1],
        final_risk=risks[-1],
        beta_scale=scales.beta,
        delta_scale=scales.delta,
    )


def draw_estimator(
    data: Dataset,
    spec: PriorSpec,
    cfg: ChainConfig,
    rng: np.random.Generator | None = None,
) -> tuple[ModelState, float, ChainResult]:
    """A single approximate draw from the Gibbs posterior: the last retained state of one chain."""
    result = run_chain(data, spec, cfg, rng)
    return result.final, result.final_risk, result
