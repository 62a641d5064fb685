import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mimpac.model import Dataset
from mimpac.theory import (
    FiniteMeasure,
    TestMeasureSpec,
    approx_oracle,
    cardinality_bound,
    check_cardinality,
    check_structural_mass,
    coeff_ball_mass_mc,
    dv_identity_check,
    kl_coeff_ball,
    kl_discrete,
    kl_structure_T1,
    kl_structure_T2,
    oracle_bound_rhs,
    project_weighted_l1,
    sphere_cap_bound,
    sphere_cap_mass,
    sphere_cap_mass_exact,
    t1_grid_check,
)
from mimpac.wavelet import dictionary_size
from planted import planted_problem


def test_finite_measure_validation():
    FiniteMeasure(np.array([0.25, 0.75]))
    with pytest.raises(ValueError):
        FiniteMeasure(np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        FiniteMeasure(np.array([-0.1, 1.1]))


def test_kl_examples():
    mu = FiniteMeasure(np.array([0.5, 0.5]))
    assert kl_discrete(mu, mu) == 0.0
    assert kl_discrete([1.0, 0.0], mu) == pytest.approx(math.log(2))
    assert kl_discrete([0.5, 0.5], [1.0, 0.0]) == math.inf


def test_dv_examples():
    r = dv_identity_check([0.2, 0.3, 0.5], [1.5, 1.5, 1.5], n_random=100)
    assert r.lhs == pytest.approx(1.5) and r.gibbs_value == pytest.approx(1.5)
    r = dv_identity_check([0.5, 0.5], [0.0, 1.0], n_random=0)
    assert r.lhs == pytest.approx(math.log((1 + math.e) / 2))
    assert r.gap <= 1e-10


def test_dv_random_competitors_never_win():
    rng = np.random.default_rng(0)
    mu = rng.dirichlet(np.ones(5))
    h = rng.normal(size=5)
    r = dv_identity_check(mu, h, 10_000, rng)
    assert r.best_competitor <= r.lhs + 1e-10


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-20, 20), min_size=2, max_size=8), st.integers(0, 2**32 - 1))
def test_dv_gap_on_random_instances(h, seed):
    mu = np.random.default_rng(seed).dirichlet(np.ones(len(h)))
    assert dv_identity_check(mu, h, n_random=0).gap <= 1e-10


def test_kl_coeff_ball_examples():
    assert kl_coeff_ball(2.0, 1.0, 7) == 0.0
    assert kl_coeff_ball(0.5, 1.0, 6) == pytest.approx(6 * math.log(4), abs=1e-12)
    assert kl_coeff_ball(0.5, 1.0, 6) == pytest.approx(8.3178, abs=1e-4)
    with pytest.raises(ValueError):
        kl_coeff_ball(2.5, 1.0, 3)


def test_kl_coeff_ball_under_lemma_bound():
    for d in (1, 2):
        for M in (1, 2):
            k = dictionary_size(d, M, 2)
            assert kl_coeff_ball(0.1, 1.0, k) <= cardinality_bound(d, M, 2) * math.log(2.0 / 0.1)


def test_coeff_ball_mass_k2():
    rng = np.random.default_rng(1)
    ratio, se = coeff_ball_mass_mc([1.0, 3.0], 0.5, 1.0, 10**6, rng, center=[0.1, -0.05])
    assert abs(ratio - 0.25**2) <= 3 * se


def test_sphere_cap_examples():
    rng = np.random.default_rng(2)
    est, se = sphere_cap_mass(2, 1.0, 200_000, rng)
    assert abs(est - 1 / 3) <= 3 * se
    assert sphere_cap_mass_exact(2, 1.0) == pytest.approx(1 / 3, abs=1e-12)
    est, _ = sphere_cap_mass(1, 0.5, 10_000, rng)
    assert abs(est - 0.5) <= 0.02
    est, se = sphere_cap_mass(3, 0.5, 200_000, rng)
    assert est - 3 * se >= sphere_cap_bound(3, 0.5)
    assert sphere_cap_bound(3, 0.5) == pytest.approx((0.5 / (3 * math.sqrt(2))) ** 3, rel=1e-12)


@pytest.mark.parametrize("m", [2, 3, 5])
@pytest.mark.parametrize("eta", [0.25, 0.5, 1.0])
def test_exact_cap_mass_above_bound_and_matches_mc(m, eta):
    exact = sphere_cap_mass_exact(m, eta)
    assert exact >= sphere_cap_bound(m, eta)
    est, se = sphere_cap_mass(m, eta, 100_000, np.random.default_rng(m))
    assert abs(est - exact) <= 4 * se + 1e-12


def test_t1_examples():
    assert kl_structure_T1(1, 1, 0, 3) == pytest.approx(math.log(3 * math.e) + 2 * math.log(10), abs=1e-12)
    assert kl_structure_T1(1, 1, 0, 3) == pytest.approx(6.7036, abs=1e-3)
    assert kl_structure_T1(1, 2, 0, 3) > kl_structure_T1(1, 1, 0, 3)
    assert kl_structure_T1(1, 1, 1, 3) > kl_structure_T1(1, 1, 0, 3)


def test_log_g_below_t1_on_grids():
    for p in range(1, 5):
        for n in range(1, 4):
            assert all(log_g <= t1 for *_, log_g, t1 in t1_grid_check(p, n))


def test_structural_checks_pass_and_document_constant():
    rows = check_structural_mass()
    assert all(r.passed for r in rows)
    assert "1/729" in rows[0].note and "1/721" in rows[0].note


def test_cardinality_check_and_exception():
    rows = {r.name: r for r in check_cardinality()}
    assert rows["cardinality_bound"].passed
    exc = rows["cardinality_exception_N1_d2_M0"]
    assert (exc.value, exc.threshold) == (36.0, 32.0)
    assert dictionary_size(2, 0, 1) > cardinality_bound(2, 0, 1)


def test_t2_dominates_measured_component_kls():
    rng = np.random.default_rng(3)
    for size, eta, k, gamma in [(1, 0.5, 2, 0.5), (2, 0.5, 3, 0.5), (3, 1.0, 1, 0.25)]:
        # measured: -log cap mass for one row of the given size, -log ball ratio for k coefficients
        cap, _ = sphere_cap_mass(size, eta, 200_000, rng)
        w = np.ones(k)
        ratio, _ = coeff_ball_mass_mc(w, gamma, 1.0, 10**6, rng)
        measured = -math.log(cap) - math.log(ratio)
        assert kl_structure_T2(size, eta, k, 1.0, gamma) >= measured - 0.05


def test_test_measure_defaults():
    tm = TestMeasureSpec.default(d=2, p=10, n=100)
    assert tm.eta == pytest.approx(1 / 2000) and tm.gamma == pytest.approx(1 / 100)
    with pytest.raises(ValueError):
        TestMeasureSpec(eta=0.0, gamma=0.5)


def test_oracle_bound_examples():
    value = oracle_bound_rhs(1, 3, 2, 1000, 20, 2, 1.0, 0.1, 1.0)
    expected = (3 * math.log(2e4) + 8 * 4 * math.log(1e3) + math.log(20)) / 1e3
    assert value == pytest.approx(expected, rel=1e-12)
    assert value == pytest.approx(0.2538, abs=1e-3)
    for n in (2, 10, 100, 1000):
        assert oracle_bound_rhs(1, 3, 2, 2 * n, 20, 2, 1.0, 0.1, 1.0) < oracle_bound_rhs(1, 3, 2, n, 20, 2, 1.0, 0.1, 1.0)
    no_delta = oracle_bound_rhs(1, 3, 2, 1000, 20, 2, 1.0, 2.0, 1.0)
    assert no_delta == pytest.approx((3 * math.log(2e4) + 32 * math.log(1e3)) / 1e3)


def test_weighted_l1_projection():
    rng = np.random.default_rng(4)
    for _ in range(50):
        v = rng.normal(size=6) * 3
        w = rng.uniform(0.5, 3, size=6)
        x = project_weighted_l1(v, w, 1.0)
        assert np.dot(w, np.abs(x)) <= 1.0 + 1e-9
        # optimality: no feasible random point is closer
        for _ in range(20):
            y = project_weighted_l1(rng.normal(size=6), w, 1.0)
            assert np.linalg.norm(v - x) <= np.linalg.norm(v - y) + 1e-9


def test_oracle_never_worse_than_zero_link():
    I, spec, data = planted_problem(0)
    noisy = Dataset(data.X, data.Y + np.random.default_rng(1).normal(scale=0.1, size=data.n))
    res = approx_oracle(I, 1, noisy, spec, budget=3, n_starts=2)
    assert res.risk <= np.mean(noisy.Y**2)


def test_oracle_budget_monotone():
    I, spec, data = planted_problem(1, n=300)
    risks = [approx_oracle(I, 1, data, spec, budget=b, n_starts=3, rng=np.random.default_rng(5)).risk for b in (1, 3, 6)]
    assert risks[0] >= risks[1] >= risks[2]
    small = approx_oracle(I, 1, data, spec, budget=1, n_starts=3, rng=np.random.default_rng(5))
    assert small.exhausted and small.iterations == 1


def test_oracle_recovers_planted_solution():
    I, spec, data = planted_problem(2, n=600)
    res = approx_oracle(I, 1, data, spec, rng=np.random.default_rng(7))
    assert res.risk <= 1e-4
    state = res.state(I, spec.link_map)
    state.check()
