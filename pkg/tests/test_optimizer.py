import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quditforge.errors import DegenerateData, InsufficientData, NonFiniteCost
from quditforge.gateset_ecd import ECDParams
from quditforge.gateset_snapd import SnapDGateCost, SnapDParams
from quditforge.lgt_targets import gate_target
from quditforge.operator_core import FockSpace
from quditforge.optimizer import (
    GrowthSchedule,
    OptimizationConfig,
    central_difference,
    fit_fidelity_curve,
    grow_basis_minimize,
    init_samplers,
    lbfgs_minimize,
    multi_start,
    pearson_correlation_matrix,
    sampler_for,
    welch_t_test,
)
from quditforge.pulse_control import ChebyshevPulse, EvolutionConfig, HardwareConfig, PulseGateCost, embed_coefficients


class Rosenbrock:
    def __call__(self, x):
        return (1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2

    def value_and_grad(self, x):
        g = np.array([-2 * (1 - x[0]) - 400 * x[0] * (x[1] - x[0] ** 2), 200 * (x[1] - x[0] ** 2)])
        return self(x), g


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizationConfig(gradient="adjoint")
    with pytest.raises(ValueError):
        OptimizationConfig(max_iterations=0)


def test_quadratic_bowl():
    res = lbfgs_minimize(lambda x: float((x[0] - 3.0) ** 2), [0.0], OptimizationConfig(gradient="fd"))
    assert abs(res.x[0] - 3) < 1e-8


@pytest.mark.parametrize("gradient", ["analytic", "fd"])
def test_rosenbrock(gradient):
    res = lbfgs_minimize(Rosenbrock(), [-1.2, 1.0], OptimizationConfig(gradient=gradient))
    np.testing.assert_allclose(res.x, [1, 1], atol=1e-6)
    assert res.status == "converged"


def test_reported_value_is_reevaluated():
    cost = Rosenbrock()
    res = lbfgs_minimize(cost, [-1.2, 1.0], OptimizationConfig(max_iterations=15))
    assert res.status == "max_iterations"
    assert abs(res.fun - cost(res.x)) <= 1e-14


def test_non_finite_initial_point():
    with pytest.raises(NonFiniteCost):
        lbfgs_minimize(lambda x: float("nan"), [0.0])


def test_non_finite_during_run_returns_best():
    def f(x):
        return float(x[0] ** 2) if x[0] > -0.5 else float("inf")

    res = lbfgs_minimize(f, [3.0], OptimizationConfig(gradient="fd"))
    assert np.isfinite(res.fun)


def test_trajectory_recorded_and_monotone():
    res = lbfgs_minimize(Rosenbrock(), [-1.2, 1.0], OptimizationConfig(record_trajectory=True))
    t = np.array(res.trajectory)
    assert t.size > 2
    assert np.all(np.diff(t) <= 0)


def test_multi_start_single_equals_plain():
    cost = SnapDGateCost(gate_target("X(0,1)", 3), FockSpace(3, 2), 2)
    sampler = sampler_for("snapd", 3, 2)
    cfg = OptimizationConfig(max_iterations=200, seed=5)
    one = multi_start(cost, sampler, 1, cfg)
    plain = lbfgs_minimize(cost, sampler(5), cfg)
    np.testing.assert_array_equal(one.x, plain.x)
    assert one.fun == plain.fun


def test_multi_start_prefix_monotone_and_deterministic():
    cost = SnapDGateCost(gate_target("X(1,2)", 3), FockSpace(3, 2), 1)
    sampler = sampler_for("snapd", 3, 1)
    cfg = OptimizationConfig(max_iterations=200)
    vals = [multi_start(cost, sampler, n, cfg).fun for n in (1, 2, 4, 8)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    a = multi_start(cost, sampler, 4, cfg)
    b = multi_start(cost, sampler, 4, cfg)
    np.testing.assert_array_equal(a.x, b.x)
    assert [s.seed for s in a.starts] == [0, 1, 2, 3]
    assert a.starts[a.best_start].fun == a.fun
    json.dumps(a.to_dict())


def test_multi_start_tie_goes_to_lowest_index():
    res = multi_start(lambda x: 1.0, lambda seed: np.array([float(seed)]), 3, OptimizationConfig(gradient="fd"))
    assert res.best_start == 0 and res.seed == 0


def test_multi_start_stop_below():
    cost = Rosenbrock()
    res = multi_start(cost, lambda s: np.array([-1.2, 1.0]) + s, 5, OptimizationConfig(), stop_below=1e-6)
    assert len(res.starts) == 1


def test_sampler_distributions():
    a = init_samplers("snapd", 4, 3, seed=1)
    np.testing.assert_array_equal(a, init_samplers("snapd", 4, 3, seed=1))
    assert a.size == SnapDParams.n_params(4, 3)
    assert init_samplers("snapd", 4, 3, 1, complex_alpha=True).size == SnapDParams.n_params(4, 3, True)
    assert init_samplers("ecd", 4, 5, 1).size == ECDParams.n_params(5) == 22
    assert init_samplers("ecd", 4, 5, 1, complex_alpha=False).size == 17
    assert init_samplers("pulse", 4, 18, 1).size == ChebyshevPulse.n_params(18)
    alphas = np.concatenate([init_samplers("snapd", 2, 1, s)[:2] for s in range(5000)])
    assert abs(alphas.std() - 0.5) < 0.02
    thetas = np.concatenate([init_samplers("snapd", 4, 2, s)[3:] for s in range(500)])
    assert thetas.min() >= -np.pi and thetas.max() <= np.pi
    with pytest.raises(ValueError):
        init_samplers("grape", 2, 1, 0)


def test_fd_gradient_step_robust():
    cost = SnapDGateCost(gate_target("X(0,1)", 3), FockSpace(3, 2), 2)
    res = lbfgs_minimize(cost, sampler_for("snapd", 3, 2)(0), OptimizationConfig(max_iterations=5))
    g1 = central_difference(cost, res.x, 1e-5)
    g2 = central_difference(cost, res.x, 5e-6)
    assert np.linalg.norm(g1 - g2) < 1e-3 * np.linalg.norm(g1)


# -- basis growth --------------------------------------------------------------------


def test_growth_schedule():
    s = GrowthSchedule.quoctit()
    assert s.orders() == [32, 40, 45, 50]
    assert s.final_order == 50


def _pulse_family(order):
    sp = FockSpace(2, 0)
    return PulseGateCost(gate_target("X(0,1)", 2), HardwareConfig(), EvolutionConfig(sp), order, 0.2)


def test_single_batch_growth_equals_plain():
    cfg = OptimizationConfig(max_iterations=30)
    x0 = sampler_for("pulse", 2, 3)(0)
    a = grow_basis_minimize(_pulse_family, GrowthSchedule(3), x0, cfg)
    b = lbfgs_minimize(_pulse_family(3), x0, cfg)
    np.testing.assert_array_equal(a.x, b.x)


def test_growth_warm_start_and_final_order():
    sched = GrowthSchedule(2, ((2, 10), (1, 10)))
    cfg = OptimizationConfig(max_iterations=20, record_trajectory=True)
    x0 = sampler_for("pulse", 2, 2)(0)
    res = grow_basis_minimize(_pulse_family, sched, x0, cfg)
    assert res.x.size == ChebyshevPulse.n_params(sched.final_order)
    # Growth with zeroed terms preserves the cost exactly.
    small = _pulse_family(2)
    assert _pulse_family(4)(embed_coefficients(x0, 2, 4)) == pytest.approx(small(x0), abs=1e-12)
    assert res.fun <= small(x0)


# -- curve fit and statistics ------------------------------------------------------


def test_fit_round_trip():
    B = np.arange(1, 7)
    pts = [(b, d, 1 - np.exp(-6.49 * (b / d) ** 1.91)) for d in (3, 4, 5) for b in B]
    c, g, cov = fit_fidelity_curve(pts)
    assert abs(c - 6.49) < 1e-6 and abs(g - 1.91) < 1e-6
    assert np.all(np.abs(cov) < 1e-10)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.5, 8), st.floats(0.3, 2.5))
def test_fit_round_trip_property(c, g):
    pts = [(b, d, 1 - np.exp(-c * (b / d) ** g)) for d in (4, 6) for b in range(1, 6)]
    pts = [p for p in pts if 0 < p[2] < 1]
    cf, gf, _ = fit_fidelity_curve(pts)
    assert cf == pytest.approx(c, rel=1e-6) and gf == pytest.approx(g, rel=1e-6)


def test_fit_degenerate():
    with pytest.raises(DegenerateData):
        fit_fidelity_curve([(2, 4, 0.9), (3, 6, 0.8), (1, 2, 0.7)])
    with pytest.raises(ValueError):
        fit_fidelity_curve([(1, 4, 1.0), (2, 4, 0.5), (3, 4, 0.5)])


def test_pearson_examples():
    x = np.random.default_rng(0).normal(size=20)
    assert pearson_correlation_matrix(np.column_stack([x, x]))[0, 1] == pytest.approx(1)
    assert pearson_correlation_matrix(np.column_stack([x, -x]))[0, 1] == pytest.approx(-1)
    assert pearson_correlation_matrix([[1, 2], [2, 4], [3, 6]])[0, 1] == pytest.approx(1)
    R = pearson_correlation_matrix(np.column_stack([x, np.ones(20)]))
    assert np.isnan(R[1, 1]) and np.isnan(R[0, 1]) and R[0, 0] == 1
    with pytest.raises(InsufficientData):
        pearson_correlation_matrix([[1, 2]])


@settings(max_examples=20)
@given(st.integers(0, 1000))
def test_pearson_properties(seed):
    X = np.random.default_rng(seed).normal(size=(15, 4))
    R = pearson_correlation_matrix(X)
    np.testing.assert_allclose(R, R.T)
    assert np.all(np.abs(R) <= 1)
    np.testing.assert_allclose(np.diag(R), 1)
    np.testing.assert_allclose(R, np.corrcoef(X.T), atol=1e-12)


def test_welch_examples():
    a = np.array([1.0, 2.0, 3.0, 4.0])
    assert welch_t_test(a, a) == (0.0, 1.0)
    rng = np.random.default_rng(1)
    t, p = welch_t_test(1e-6 * rng.normal(size=4), 1 + 1e-6 * rng.normal(size=4))
    assert p < 1e-3 and t < 0
    b = np.array([2.0, 5.0, 1.0, 7.0, 3.0])
    t1, p1 = welch_t_test(a, b)
    t2, p2 = welch_t_test(b, a)
    assert t1 == pytest.approx(-t2) and p1 == pytest.approx(p2)
    # Textbook formula with Welch-Satterthwaite degrees of freedom.
    import scipy.stats

    va, vb = a.var(ddof=1) / 4, b.var(ddof=1) / 5
    t_ref = (a.mean() - b.mean()) / np.sqrt(va + vb)
    nu = (va + vb) ** 2 / (va**2 / 3 + vb**2 / 4)
    assert t1 == pytest.approx(t_ref)
    assert p1 == pytest.approx(2 * scipy.stats.t.sf(abs(t_ref), nu))
    with pytest.raises(InsufficientData):
        welch_t_test([1.0], b)
