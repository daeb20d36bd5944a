import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from philap import probes
from philap.clarke import AbsNorm, Potential, Term, gfunc_term, linear, quadratic
from philap.gfunc import make_family
from philap.orlicz import Trajectory
from philap.solver import (DiscreteProblem, SolverOptions, action, action_subgradient, el_residual,
                           minimize, start_radius_from_trend, verify_solution)

T = 2 * math.pi
PHI2_1 = make_family("power", p=2, n=1)
PHI2_2 = make_family("power", p=2, n=2)
PHI3_2 = make_family("power", p=3, n=2)
BENCH = Potential(2, (Term(1, quadratic(2)), Term("cos(t)", linear([1.0, 0.0]))))
LAPLACE = Potential(2, (Term("sin(t) + 1/2", gfunc_term(make_family("log_tempered", p=3, n=2))),
                        Term("cos(t)", linear([1.0, 0.0]))))


def bench_exact(N):
    t = np.arange(N) * T / N
    return np.stack([-0.5 * np.cos(t), np.zeros(N)], axis=1)


def test_problem_preconditions():
    with pytest.raises(ValueError, match="4 nodes"):
        DiscreteProblem(PHI2_2, BENCH, T, 3)
    with pytest.raises(ValueError, match="R\\^1"):
        DiscreteProblem(PHI2_1, BENCH, T, 16)
    with pytest.raises(ValueError, match="period"):
        DiscreteProblem(PHI2_2, BENCH, 1.0, 16)


# --- action and its subgradient


def test_action_of_constant_is_potential_sum():
    prob = DiscreteProblem(PHI2_2, BENCH, T, 64)
    c = np.array([0.7, -1.1])
    U = np.tile(c, (64, 1))
    expected = prob.step * sum(0.5 * c @ c + math.cos(t) * c[0] for t in prob.times)
    assert action(prob, U) == pytest.approx(expected, rel=1e-13, abs=1e-13)


def test_action_of_sine_is_half_pi():
    prob = DiscreteProblem(PHI2_1, Potential(1, ()), T, 512)
    u = Trajectory.from_function(np.sin, T, 512)
    assert action(prob, u) == pytest.approx(math.pi / 2, abs=1e-2)


def test_action_zero_for_abs_at_origin():
    prob = DiscreteProblem(PHI2_1, Potential(1, (Term(1, AbsNorm((0,))),)), T, 32)
    assert action(prob, np.zeros((32, 1))) == 0.0


def test_subgradient_of_constant_is_scaled_gradient():
    prob = DiscreteProblem(PHI3_2, LAPLACE, T, 64)
    U = np.tile([0.4, 2.0], (64, 1))
    g = action_subgradient(prob, U)
    np.testing.assert_allclose(g, prob.step * LAPLACE.gradient(prob.times, U), atol=1e-15)


def test_subgradient_matches_finite_differences(rng):
    prob = DiscreteProblem(PHI3_2, LAPLACE, T, 48)
    U = rng.standard_normal((48, 2))
    g = action_subgradient(prob, U)
    eps = 1e-6
    for _ in range(100):
        i, k = rng.integers(48), rng.integers(2)
        E = np.zeros_like(U)
        E[i, k] = eps
        fd = (action(prob, U + E) - action(prob, U - E)) / (2 * eps)
        assert g[i, k] == pytest.approx(fd, rel=1e-5, abs=1e-9)


def test_integration_by_parts_is_exact(rng):
    prob = DiscreteProblem(PHI3_2, LAPLACE, T, 64)
    h = prob.step
    for _ in range(100):
        U, V = rng.standard_normal((64, 2)), rng.standard_normal((64, 2))
        w = PHI3_2.gradient((np.roll(U, -1, axis=0) - U) / h)
        dv = (np.roll(V, -1, axis=0) - V) / h
        lhs = h * np.sum(w * dv)
        rhs = -h * np.sum((w - np.roll(w, 1, axis=0)) / h * V)
        scale = h * np.sum(np.abs(w * dv))
        assert abs(lhs - rhs) <= 1e-12 * max(scale, 1.0)


@given(st.integers(0, 63))
def test_action_rotation_invariant_for_autonomous_f(shift):
    F = Potential(2, (Term(1, quadratic(2)), Term(1, AbsNorm((1,)))))
    prob = DiscreteProblem(PHI3_2, F, T, 64)
    U = np.random.default_rng(7).standard_normal((64, 2))
    assert action(prob, np.roll(U, shift, axis=0)) == pytest.approx(action(prob, U), rel=1e-12)


# --- residuals


def test_smooth_residual_identity(rng):
    prob = DiscreteProblem(PHI2_2, BENCH, T, 128)
    h = prob.step
    for _ in range(10):
        U = rng.standard_normal((128, 2))
        upp = (np.roll(U, -1, axis=0) - 2 * U + np.roll(U, 1, axis=0)) / h ** 2
        direct = np.linalg.norm(upp - BENCH.gradient(prob.times, U), axis=1)
        el = el_residual(prob, U)
        np.testing.assert_allclose(el.per_node, direct, rtol=0, atol=1e-12 * max(1.0, direct.max()))


def test_residual_zero_at_origin_for_abs():
    prob = DiscreteProblem(PHI2_1, Potential(1, (Term(1, AbsNorm((0,))),)), T, 64)
    el = el_residual(prob, np.zeros((64, 1)))
    assert el.max == 0.0 and el.mean_condition == 0.0 and el.periodicity_gap == 0.0


def test_exact_solution_residual_first_order():
    res = []
    for N in (64, 128, 256, 512):
        prob = DiscreteProblem(PHI2_2, BENCH, T, N)
        res.append(el_residual(prob, bench_exact(N)).max)
    orders = np.log2(np.array(res[:-1]) / np.array(res[1:]))
    assert np.all(orders >= 1.0)


def test_verification_requires_strict_convexity():
    prob = DiscreteProblem(PHI2_1, Potential(1, (Term(1, AbsNorm((0,))),)), T, 16)
    assert verify_solution(prob, np.zeros((16, 1))).verified


# --- minimize


def test_smooth_benchmark_matches_analytic_solution():
    prob = DiscreteProblem(PHI2_2, BENCH, T, 256, SolverOptions(starts=2))
    res = minimize(prob)
    assert res.converged and res.verified
    assert np.max(np.abs(res.trajectory.values - bench_exact(256))) <= 5e-3
    assert res.action == pytest.approx(action(prob, res.trajectory), rel=1e-14)
    assert el_residual(prob, res.trajectory).max == pytest.approx(res.residual.max, abs=1e-15)
    assert np.max(np.abs(action_subgradient(prob, res.trajectory))) <= prob.options.tol_r


def test_nonsmooth_minimizer_is_origin():
    prob = DiscreteProblem(PHI2_1, Potential(1, (Term(1, AbsNorm((0,))),)), T, 256,
                           SolverOptions(starts=3))
    res = minimize(prob)
    assert np.max(np.abs(res.trajectory.values)) <= 1e-2
    assert res.residual.max == 0.0 and res.verified


def test_laplace_example_converges():
    prob = DiscreteProblem(PHI3_2, LAPLACE, T, 512, SolverOptions(starts=3))
    res = minimize(prob)
    assert res.converged and res.residual.max <= 1e-3
    assert all(math.isfinite(a) for _, a in res.start_actions)


def test_convex_problem_starts_agree():
    F = Potential(2, (Term(1, quadratic(2)), Term("1 + sin(t)", AbsNorm((0, 1))),
                      Term("cos(t)", linear([2.0, 1.0]))))
    prob = DiscreteProblem(PHI3_2, F, T, 128, SolverOptions(starts=6))
    res = minimize(prob)
    vals = [a for _, a in res.start_actions]
    assert max(vals) - min(vals) <= 1e-6


def test_budget_exhaustion_is_reported():
    prob = DiscreteProblem(PHI3_2, LAPLACE, T, 128, SolverOptions(starts=1, max_iter=5))
    res = minimize(prob)
    assert res.budget_exhausted and not res.converged
    assert math.isfinite(res.action)


def test_minimize_is_deterministic():
    prob = DiscreteProblem(PHI3_2, LAPLACE, T, 64, SolverOptions(starts=4, seed=3))
    a, b = minimize(prob), minimize(prob)
    assert a.to_dict() == b.to_dict()
    np.testing.assert_array_equal(a.trajectory.values, b.trajectory.values)


def test_given_initial_trajectory():
    prob = DiscreteProblem(PHI2_2, BENCH, T, 64)
    res = minimize(prob, init=Trajectory.constant([1.0, 1.0], T, 64))
    assert res.start_label == "given" and res.restarts == 1
    with pytest.raises(ValueError):
        minimize(prob, init="random")


def test_start_radius_from_trend_report():
    rep = probes.HypothesisReport({"H8": probes.probe_h8(Potential(2, (Term(1, quadratic(2)),)))})
    r0 = start_radius_from_trend(rep)
    meta = rep.results["H8"].metadata
    assert r0 == meta["radii"][meta["run"][0]]
    assert start_radius_from_trend(probes.HypothesisReport({})) is None
    prob = DiscreteProblem(PHI2_2, BENCH, T, 64, SolverOptions(starts=3))
    assert minimize(prob, report=rep).verified
