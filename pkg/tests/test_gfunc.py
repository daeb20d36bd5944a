import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, optimize

from philap.gfunc import (conjugate, conjugate_function, damped_convexity_threshold, delta2_report,
                          fenchel_young_gap, gradient_conjugate_bound_check, modular_growth_probe,
                          make_custom, make_family, matuszewska_indices, order_llcurly)

FAMILIES = [
    {"family": "power", "p": 1.5, "n": 1},
    {"family": "power", "p": 3.0, "n": 2},
    {"family": "block", "ps": [2.0, 4.0], "dims": [1, 1]},
    {"family": "log_tempered", "p": 3.0, "n": 1},
    {"family": "log_damped_companion", "p": 3.0, "n": 2},
]


def brute_conjugate_1d(f, xi, lo=-50.0, hi=50.0):
    res = optimize.minimize_scalar(lambda x: -(xi * x - f(x)), bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-12})
    return -res.fun


def test_family_values():
    assert make_family("power", p=2, n=2)([3.0, 4.0]) == pytest.approx(12.5)
    blk = make_family("block", ps=[2, 4], dims=[1, 1])
    assert blk([1.0, 0.0]) == pytest.approx(0.5)
    assert blk([0.0, 1.0]) == pytest.approx(0.25)
    assert make_family("log_tempered", p=3)(0.0) == 0.0


@pytest.mark.parametrize("p", [1.0, 0.5, -2.0])
def test_exponent_at_most_one_rejected(p):
    with pytest.raises(ValueError):
        make_family("power", p=p)


@pytest.mark.parametrize("r", [1e-4, 0.3, 2.0, 50.0, 1e4, 1e9])
def test_log_tempered_matches_quadrature(r):
    phi = make_family("log_tempered", p=3)
    ref, _ = integrate.quad(lambda s: s ** 2 / math.log(s * s + math.e), 0, r, epsrel=1e-13,
                            limit=500, points=[1.0] if r > 1 else None)
    assert phi(r) == pytest.approx(ref, rel=1e-9)


def test_conjugate_examples():
    assert conjugate(make_family("power", p=2, n=2), [1.0, 2.0]) == pytest.approx(2.5)
    phi3 = make_family("power", p=3)
    assert conjugate(phi3, 1.0) == pytest.approx(2 / 3)
    assert conjugate(phi3, 1.0, numeric=True) == pytest.approx(2 / 3, rel=1e-9)
    assert brute_conjugate_1d(lambda x: abs(x) ** 3 / 3, 1.0) == pytest.approx(2 / 3, rel=1e-8)
    for desc in FAMILIES:
        phi = make_family(desc)
        assert conjugate(phi, np.zeros(phi.dimension), numeric=True) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("xi", [0.1, 0.7, 2.0, 5.0])
def test_log_tempered_conjugate_against_brute_force(xi):
    phi = make_family("log_tempered", p=3)
    ref = brute_conjugate_1d(lambda x: float(phi(x)), xi, -60, 60)
    assert conjugate(phi, xi) == pytest.approx(ref, rel=1e-7, abs=1e-10)


def test_divergent_conjugate_is_inf():
    # phi(x) = sqrt(1 + x^2) - 1 grows linearly: phi*(xi) = inf for |xi| > 1
    phi = make_custom(lambda x: math.sqrt(1 + x @ x) - 1, lambda x: x / math.sqrt(1 + x @ x), 1)
    assert math.isinf(conjugate(phi, 2.0))
    assert conjugate(phi, 0.5) == pytest.approx(1 - math.sqrt(1 - 0.25), rel=1e-6)


def test_fenchel_young_examples():
    phi = make_family("power", p=2)
    assert fenchel_young_gap(phi, 1.0, 1.0) == pytest.approx(0.0, abs=1e-15)
    assert fenchel_young_gap(phi, 1.0, 0.0) == pytest.approx(0.5)
    lt = make_family("log_tempered", p=3)
    g = lt.gradient(2.0)
    assert abs(fenchel_young_gap(lt, 2.0, g)) < 1e-7


def test_gradient_conjugate_bounds():
    assert gradient_conjugate_bound_check(make_family("power", p=2), 1.0) == pytest.approx((1.0, 0.5))
    for desc in FAMILIES:
        phi = make_family(desc)
        up, lo = gradient_conjugate_bound_check(phi, np.zeros(phi.dimension))
        assert up == pytest.approx(0, abs=1e-14) and lo == pytest.approx(0, abs=1e-14)
    up, lo = gradient_conjugate_bound_check(make_family("log_tempered", p=3), 5.0)
    assert up >= 0 and lo >= -1e-9


@pytest.mark.parametrize("desc", FAMILIES, ids=lambda s: s["family"])
def test_structural_invariants(desc, rng):
    phi = make_family(desc)
    n = phi.dimension
    x = rng.standard_normal((300, n)) * 10 ** rng.uniform(-2, 2, (300, 1))
    y = rng.standard_normal((300, n)) * 10 ** rng.uniform(-2, 2, (300, 1))
    fx, fy = np.asarray(phi(x)), np.asarray(phi(y))
    assert phi(np.zeros(n)) == 0
    np.testing.assert_allclose(phi(-x), fx, rtol=1e-12)
    assert np.all(np.asarray(phi(0.5 * (x + y))) <= 0.5 * (fx + fy) * (1 + 1e-10) + 1e-14)
    lam = rng.uniform(0, 1, 300)
    assert np.all(np.asarray(phi(lam[:, None] * x)) <= lam * fx * (1 + 1e-10) + 1e-14)


@pytest.mark.parametrize("desc", FAMILIES, ids=lambda s: s["family"])
def test_gradient_matches_finite_differences(desc, rng):
    phi = make_family(desc)
    n = phi.dimension
    for _ in range(20):
        x = rng.standard_normal(n) * 3
        h = 1e-6 * max(1.0, float(np.linalg.norm(x)))
        fd = [(phi(x + h * e) - phi(x - h * e)) / (2 * h) for e in np.eye(n)]
        np.testing.assert_allclose(phi.gradient(x), fd, rtol=1e-6, atol=1e-8)


@pytest.mark.parametrize("desc", FAMILIES, ids=lambda s: s["family"])
def test_conjugate_involution(desc, rng):
    phi = make_family(desc)
    biconj = conjugate_function(conjugate_function(phi, numeric=True), numeric=True)
    x = rng.standard_normal((200, phi.dimension)) * 3
    f = np.asarray(phi(x))
    err = np.abs(np.asarray(biconj(x)) - f) / np.maximum(1.0, f)
    assert err.max() <= 1e-5


@pytest.mark.parametrize("desc", FAMILIES, ids=lambda s: s["family"])
def test_fenchel_young_nonnegative(desc, rng):
    phi = make_family(desc)
    x = rng.standard_normal((1000, phi.dimension)) * 4
    xi = rng.standard_normal((1000, phi.dimension)) * 4
    assert np.min(fenchel_young_gap(phi, x, xi, numeric=True)) >= -1e-7


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 5.0])
def test_delta2_constant_of_powers(p):
    rep = delta2_report(make_family("power", p=p), radius=1e3)
    assert rep.delta2
    assert rep.delta2_constant == pytest.approx(2 ** p, rel=0.01)


def test_delta2_detects_exponential_growth():
    phi = make_custom(lambda x: math.expm1(x @ x), lambda x: 2 * x * math.exp(x @ x), 1)
    rep = delta2_report(phi, radius=10)
    assert rep.delta2_constant == "unbounded"


def test_nabla2_pair_for_quadratic():
    l, c = delta2_report(make_family("power", p=2)).nabla2_pair
    assert l == 2 and c == pytest.approx(0.0, abs=1e-12)


def test_order_examples():
    p15, p2, p25, p3 = (make_family("power", p=p) for p in (1.5, 2, 2.5, 3))
    damped = make_family("log_damped_companion", p=3)
    assert order_llcurly(p15, p2).holds
    res = order_llcurly(p2, p2)
    assert not res.holds
    k, x = res.witness
    assert k < 1 and p2(np.array(x)) > p2(k * np.array(x))
    assert order_llcurly(damped, p3).holds
    # transitivity on the triple damped << power(2.5)? no: damped grows like r^3/log
    assert order_llcurly(p25, p3).holds and order_llcurly(p25, damped).holds
    assert not order_llcurly(damped, p25).holds


def test_companion_convexity_threshold():
    assert damped_convexity_threshold(3.0) == 0.0
    assert 2.5 < damped_convexity_threshold(2.0) < 3.5
    with pytest.raises(ValueError):
        make_family("log_damped_companion", p=1.2)


@pytest.mark.parametrize("p", [1.5, 2.0, 2.5, 3.0, 5.0])
def test_indices_of_powers(p):
    est = matuszewska_indices(make_family("power", p=p))
    assert est.alpha == pytest.approx(p, abs=0.05)
    assert est.beta == pytest.approx(p, abs=0.05)
    conj = matuszewska_indices(conjugate_function(make_family("power", p=p), numeric=True))
    assert 1 / est.alpha + 1 / conj.beta == pytest.approx(1.0, abs=0.03)
    assert 1 <= est.alpha <= est.beta + 0.05


def test_indices_of_block():
    est = matuszewska_indices(make_family("block", ps=[2, 4], dims=[1, 1]))
    assert est.alpha == pytest.approx(2, abs=0.05) and est.beta == pytest.approx(4, abs=0.05)


def test_growth_probe():
    from philap.orlicz import Trajectory
    phi = make_family("power", p=2)
    trajs = [Trajectory.constant(c, 1.0, 16) for c in (1.0, 10.0, 100.0, 1000.0, 1e4)]
    trend = modular_growth_probe(phi, 1.0, trajs)
    assert trend.passed
    assert np.allclose(np.diff(np.log10(trend.ratios)), 1.0)
    with pytest.raises(ValueError):
        modular_growth_probe(phi, 2.5)
    assert modular_growth_probe(make_family("log_tempered", p=3), 2.0).passed


def test_scale_option():
    phi = make_family("power", p=2, n=2, scale=2.0)
    assert phi([1.0, 2.0]) == pytest.approx(5.0)
    assert conjugate(phi, [2.0, 0.0]) == pytest.approx(1.0)
    assert conjugate(phi, [2.0, 0.0], numeric=True) == pytest.approx(1.0, rel=1e-9)


def test_custom_rejects_bad_functions():
    with pytest.raises(ValueError, match="phi\\(0\\)"):
        make_custom(lambda x: 1 + x @ x, lambda x: 2 * x, 1)
    with pytest.raises(ValueError):
        make_custom(lambda x: float(x[0] ** 3 + x[0] ** 2), lambda x: 3 * x ** 2 + 2 * x, 1)
    with pytest.raises(ValueError):
        make_custom(lambda x: float(math.sqrt(abs(x[0]))), lambda x: x, 1)


@given(st.floats(1.1, 6.0), st.floats(-20, 20))
def test_power_conjugate_closed_form(p, xi):
    phi = make_family("power", p=p)
    q = p / (p - 1)
    assert conjugate(phi, xi, numeric=True) == pytest.approx(abs(xi) ** q / q, rel=1e-6, abs=1e-12)
