import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anyonext.expr import ExprParseError, parse

X = np.array([0.3, -1.2, 2.0])
Y = np.array([0.7, 0.4, -1.5])


@pytest.mark.parametrize(
    "src,expected",
    [
        ("1 + 2 * 3", 7.0),
        ("2 ^ 3 ^ 2", 512.0),
        ("2 ** 3", 8.0),
        ("-2^2", -4.0),
        ("2^-1", 0.5),
        ("(1 + 2) * 3", 9.0),
        ("8 / 4 / 2", 1.0),
        ("pow(2, 10)", 1024.0),
        ("sqrt(16) + log(exp(2))", 6.0),
        ("cos(pi) + sin(0)", -1.0),
        ("1.5e1 + .5", 15.5),
        ("--3", 3.0),
    ],
)
def test_constant_expressions(src, expected):
    assert complex(parse(src)(0.0, 0.0)) == pytest.approx(expected)


def test_variables():
    e = parse("x*y + r")
    assert np.allclose(e(X, Y), X * Y + np.hypot(X, Y))


def test_imaginary_unit():
    e = parse("exp(i*pi)")
    assert complex(e(0.0, 0.0)) == pytest.approx(-1.0)
    assert e.uses_imag()
    assert not parse("x + 1").uses_imag()


@pytest.mark.parametrize(
    "src,pos",
    [("1 +", 3), ("sin(x", 5), ("foo(x)", 0), ("x $ y", 2), ("pow(x)", 0), ("(x))", 3), ("", 0)],
)
def test_parse_errors_carry_position(src, pos):
    with pytest.raises(ExprParseError) as info:
        parse(src)
    assert info.value.position == pos
    assert "position" in str(info.value)


@pytest.mark.parametrize(
    "src",
    ["x^2*y", "sin(x*y) + cos(r)", "exp(-r^2)*(1 + 0.5*x)", "log(1 + x*x) / (2 + y)", "sqrt(r)*y", "pow(r, 1.5)*x", "r^0.7"],
)
@pytest.mark.parametrize("var", ["x", "y"])
def test_symbolic_derivative_matches_differences(src, var):
    e = parse(src)
    d = e.diff(var)
    h = 1e-5
    if var == "x":
        fd = (e(X + h, Y) - e(X - h, Y)) / (2 * h)
    else:
        fd = (e(X, Y + h) - e(X, Y - h)) / (2 * h)
    assert np.allclose(d(X, Y), fd, rtol=1e-7, atol=1e-9)


def test_zero_derivative_is_recognised():
    assert parse("3 + pi").diff("x").is_zero


coeff = st.floats(-5, 5, allow_nan=False).map(lambda v: round(v, 3))


@settings(max_examples=50)
@given(st.lists(st.tuples(coeff, st.integers(0, 3), st.integers(0, 3)), min_size=1, max_size=5))
def test_polynomials_round_trip(terms):
    src = " + ".join(f"({c})*x^{i}*y^{j}" for c, i, j in terms)
    ref = sum(c * X**i * Y**j for c, i, j in terms)
    assert np.allclose(parse(src)(X, Y), ref, rtol=1e-12, atol=1e-12)


@settings(max_examples=50)
@given(st.floats(0.1, 3.0), st.floats(0.1, 3.0))
def test_r_is_the_radius(x, y):
    assert complex(parse("r^2 - x^2 - y^2")(x, y)) == pytest.approx(0.0, abs=1e-12)


def test_log_of_zero_radius_is_infinite():
    with np.errstate(divide="ignore"):
        v = parse("log(r)")(0.0, 0.0)
    assert math.isinf(abs(complex(v)))
