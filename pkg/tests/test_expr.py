import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from philap.expr import ExpressionError, TimeExpr


def test_scalar_and_vector_evaluation():
    e = TimeExpr("sin(t) + 1/2")
    assert e(0.0) == 0.5
    np.testing.assert_allclose(e(np.array([0.0, math.pi / 2])), [0.5, 1.5])
    assert str(e) == "sin(t) + 1/2"


def test_caret_is_power_and_pi_is_known():
    assert TimeExpr("t^2")(3.0) == 9.0
    assert TimeExpr("2*pi")(0.0) == pytest.approx(2 * math.pi)
    assert TimeExpr("2*(abs(cos(t)) + 1)")(math.pi) == pytest.approx(4.0)


def test_division_by_zero_gives_inf_not_error():
    assert math.isinf(TimeExpr("1/t")(0.0))


@pytest.mark.parametrize("bad", ["exp(t)", "t.real", "__import__('os')", "x + 1", "t if t else 1",
                                 "sin(t, t)", "1 +"])
def test_rejects_outside_grammar(bad):
    with pytest.raises(ExpressionError):
        TimeExpr(bad)


@given(st.floats(-10, 10), st.floats(-5, 5))
def test_polynomial_matches_python(a, t):
    e = TimeExpr(f"{a!r}*t^2 - 3*t + 1")
    assert e(t) == pytest.approx(a * t * t - 3 * t + 1, rel=1e-12, abs=1e-12)
