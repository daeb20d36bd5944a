import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from philap.gfunc import make_family
from philap.orlicz import (Trajectory, amemiya_bound_gap, decompose, holder_gap, in_pi_space,
                           luxemburg_norm, modular, pairing, sobolev_norms, wirtinger_gap)

P2 = make_family("power", p=2)
FAMS = [P2, make_family("power", p=3), make_family("log_tempered", p=3),
        make_family("power", p=1.5)]


def band_limited(rng, nodes=64, period=2 * np.pi, modes=4, amp=2.0):
    t = np.arange(nodes) * period / nodes
    w = 2 * np.pi / period
    vals = amp * rng.standard_normal() * np.ones(nodes)
    for k in range(1, modes + 1):
        a, b = rng.standard_normal(2) * amp / k
        vals = vals + a * np.cos(k * w * t) + b * np.sin(k * w * t)
    return Trajectory(period, vals)


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory(1.0, np.zeros(3))
    with pytest.raises(ValueError):
        Trajectory(0.0, np.zeros(8))
    with pytest.raises(ValueError):
        Trajectory(1.0, np.array([0, 1, np.nan, 2.0]))


def test_derivative_sums_to_zero(rng):
    u = band_limited(rng)
    assert abs(u.step * u.derivative().sum()) < 1e-12


def test_modular_examples():
    assert modular(P2, Trajectory.constant(0.0, 1.0, 8)) == 0
    assert modular(P2, Trajectory.constant(3.0, 1.0, 8)) == pytest.approx(4.5)
    u = Trajectory.from_function(np.sin, 2 * np.pi, 512)
    assert modular(P2, u) == pytest.approx(np.pi / 2, abs=1e-3)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_luxemburg_norm_of_constant(p):
    phi = make_family("power", p=p)
    T, c = 2.0, -1.7
    u = Trajectory.constant(c, T, 16)
    assert luxemburg_norm(phi, u) == pytest.approx(abs(c) * (T / p) ** (1 / p), rel=1e-9)
    assert luxemburg_norm(phi, Trajectory.constant(0.0, T, 16)) == 0.0


@pytest.mark.parametrize("phi", FAMS, ids=lambda f: str(f.descriptor))
def test_norm_axioms_and_attainment(phi, rng):
    for _ in range(20):
        u, v = band_limited(rng), band_limited(rng)
        nu = luxemburg_norm(phi, u)
        assert luxemburg_norm(phi, u.scaled(-2.0)) == pytest.approx(2 * nu, rel=1e-9)
        assert nu + luxemburg_norm(phi, v) - luxemburg_norm(phi, u + v) >= -1e-8
        rho = modular(phi, u.scaled(1 / nu))
        assert 1 - 1e-6 <= rho <= 1 + 1e-9


def test_amemiya_examples(rng):
    assert amemiya_bound_gap(P2, Trajectory.constant(0.0, 1.0, 8)) == 1.0
    assert amemiya_bound_gap(P2, Trajectory.constant(1.0, 1.0, 8)) == pytest.approx(1.5 - 0.5 ** 0.5)
    for phi in FAMS:
        for _ in range(50):
            assert amemiya_bound_gap(phi, band_limited(rng)) >= -1e-8


def test_decompose_examples():
    c = Trajectory.constant([2.0, -1.0], 1.0, 8)
    d = decompose(c)
    np.testing.assert_allclose(d.mean, [2.0, -1.0])
    assert np.all(d.oscillation.values == 0)
    s = Trajectory.from_function(np.sin, 2 * np.pi, 128)
    assert abs(decompose(s).mean[0]) < 1e-12
    d = decompose(Trajectory.from_function(lambda t: 3 + np.sin(t), 2 * np.pi, 128))
    assert d.mean[0] == pytest.approx(3.0)
    np.testing.assert_allclose(d.oscillation.values[:, 0], np.sin(s.times), atol=1e-12)
    assert abs(decompose(d.oscillation).mean[0]) < 1e-15


def test_holder_examples(rng):
    zero = Trajectory.constant(0.0, 1.0, 16)
    assert holder_gap(P2, zero, band_limited(rng, period=1.0, nodes=16)) == pytest.approx(0.0, abs=1e-15)
    u = band_limited(rng)
    # quadratic: both norms are the L2 norm over sqrt(2), so 2|u||u| = |u|_2^2 >= pairing
    assert holder_gap(P2, u, u) >= -1e-9
    for phi in FAMS:
        for _ in range(25):
            assert holder_gap(phi, band_limited(rng), band_limited(rng)) >= -1e-6


def test_wirtinger_examples(rng):
    res = wirtinger_gap(P2, Trajectory.constant(1.5, 2 * np.pi, 32))
    assert res.gap == 0 and res.rhs == 0
    s = Trajectory.from_function(np.sin, 2 * np.pi, 512)
    res = wirtinger_gap(P2, s)
    # continuum values: (1/T) int (T cos)^2/2 = pi^2 and max sin^2/2 = 1/2
    assert res.rhs == pytest.approx(np.pi ** 2, rel=1e-3)
    assert res.gap == pytest.approx(np.pi ** 2 - 0.5, rel=1e-3)
    for phi in FAMS:
        for _ in range(50):
            r = wirtinger_gap(phi, band_limited(rng))
            assert r.gap >= -r.slack


def test_wirtinger_norm_form(rng):
    for phi in FAMS:
        for _ in range(20):
            u = band_limited(rng)
            osc = decompose(u).oscillation
            lhs = luxemburg_norm(phi, osc)
            rhs = u.period * luxemburg_norm(phi, u.derivative_trajectory())
            assert lhs <= rhs + 1e-8


def test_sobolev_norms(rng):
    zero = Trajectory.constant(0.0, 1.0, 8)
    s = sobolev_norms(P2, zero)
    assert s.standard == 0 and s.equivalent == 0
    c = Trajectory.constant(2.0, 2.0, 8)
    s = sobolev_norms(P2, c)
    assert s.standard == pytest.approx(2.0, rel=1e-9) and s.equivalent == pytest.approx(2.0)
    ratios = [sobolev_norms(P2, band_limited(rng)).ratio for _ in range(500)]
    assert 1 / 20 < min(ratios) and max(ratios) < 20


def test_pi_space_trivial(rng):
    assert in_pi_space(P2, band_limited(rng), 0.1)


def test_csv_round_trip(tmp_path, rng):
    u = Trajectory(2 * np.pi, rng.standard_normal((17, 3)))
    text = u.to_csv(tmp_path / "u.csv")
    assert text.splitlines()[0] == "t,u1,u2,u3"
    back = Trajectory.from_csv(tmp_path / "u.csv", period=2 * np.pi)
    assert np.array_equal(back.values, u.values)
    inferred = Trajectory.parse_csv(text)
    assert inferred.period == pytest.approx(u.period, rel=1e-14)


def test_csv_rejects_uneven_grid():
    with pytest.raises(ValueError):
        Trajectory.parse_csv("t,u1\n0,1\n0.1,2\n0.3,3\n0.4,4\n")


def test_pairing_matches_sum():
    u = Trajectory.constant([1.0, 2.0], 2.0, 4)
    v = Trajectory.constant([3.0, -1.0], 2.0, 4)
    assert pairing(u, v) == pytest.approx(2.0)


@given(arrays(np.float64, (12, 1), elements=st.floats(-50, 50)), st.floats(0.1, 10))
def test_modular_homogeneity_of_quadratic(values, c):
    u = Trajectory(3.0, values)
    assert modular(P2, u.scaled(c)) == pytest.approx(c * c * modular(P2, u), rel=1e-12, abs=1e-12)


@given(arrays(np.float64, (10, 1), elements=st.floats(-20, 20)))
def test_norm_below_modular_plus_one(values):
    u = Trajectory(1.0, values)
    assert luxemburg_norm(P2, u) <= modular(P2, u) + 1 + 1e-9
