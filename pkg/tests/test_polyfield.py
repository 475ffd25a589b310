import math
from fractions import Fraction

import numpy as np
import pytest

from hypocalc.polyfield import (
    FlowEscaped,
    MultiPoly,
    ParseError,
    PolyVectorField,
    bracket,
    evaluate,
    flow_time_one,
    jet_at,
    parse_field,
    parse_poly,
    random_field,
)


def field(text, dim=2):
    return parse_field(text, dim)


def test_bracket_dx_xdy_is_dy():
    assert bracket(field("dx"), field("x*dy")) == field("dy")


def test_bracket_with_itself_vanishes():
    X = field("x^2*y*dx - 3/2*y*dy")
    assert bracket(X, X).is_zero()


def test_bracket_hand_expansion():
    # [x^2 d, d] = x^2 * 0 - 1 * 2x  (d/dx)
    assert bracket(field("x^2*dx", 1), field("dx", 1)) == field("-2*x*dx", 1)


def test_evaluate_examples():
    assert evaluate(field("x*dy"), (0, 5)) == [0, 0]
    assert evaluate(field("x*dy"), (2, 0)) == [0, 2]
    assert evaluate(field("dx", 3), (7, -1, Fraction(1, 3))) == [1, 0, 0]


def test_multipoly_canonical_form():
    p = MultiPoly(2, {(1, 0): 1, (0, 1): 0, (2, 0): Fraction(0)})
    assert dict(p.items()) == {(1, 0): 1}
    assert p == parse_poly("x + 0*y", 2)
    assert parse_poly("x*y - y*x", 2).is_zero()
    assert parse_poly("(x + y)^2", 2) == parse_poly("x^2 + 2*x*y + y^2", 2)


def test_multipoly_rejects_bad_exponents():
    with pytest.raises(ValueError):
        MultiPoly(2, {(1,): 1})
    with pytest.raises(ValueError):
        MultiPoly(1, {(-1,): 1})


@pytest.mark.parametrize("text,dim", [
    ("x^2*dx", 1),
    ("x*dy - y*dx", 2),
    ("3/4*x1*x3^2*d/dx2 + d/dx1", 3),
    ("-1/12*x^3*y*dx + 5*dy", 2),
    ("0", 2),
])
def test_print_parse_round_trip(text, dim):
    X = parse_field(text, dim)
    assert parse_field(X.to_str(), dim) == X


def test_round_trip_random_fields():
    rng = np.random.default_rng(3)
    for _ in range(30):
        dim = int(rng.integers(1, 4))
        X = random_field(rng, dim, 3)
        assert parse_field(X.to_str(), dim) == X


@pytest.mark.parametrize("bad", ["x^", "dq", "x + (y", "w*dx", "x*y"])
def test_parse_errors(bad):
    with pytest.raises(ParseError):
        parse_field(bad, 2)


def test_parse_rejects_out_of_range_variable():
    with pytest.raises(ParseError):
        parse_field("z*dx", 2)


def test_jacobi_identity_exact():
    rng = np.random.default_rng(11)
    for _ in range(15):
        dim = int(rng.integers(1, 4))
        X, Y, Z = (random_field(rng, dim, 3, density=0.4) for _ in range(3))
        total = bracket(X, bracket(Y, Z)) + bracket(Y, bracket(Z, X)) + bracket(Z, bracket(X, Y))
        assert total.is_zero()


def test_bilinear_and_antisymmetric():
    rng = np.random.default_rng(12)
    for _ in range(15):
        X, Y, Z = (random_field(rng, 2, 3) for _ in range(3))
        a, b = Fraction(3, 7), Fraction(-2, 5)
        assert bracket(X * a + Y * b, Z) == bracket(X, Z) * a + bracket(Y, Z) * b
        assert bracket(X, Y) == -bracket(Y, X)


def test_jet_examples():
    assert jet_at(field("x^2*dx", 1), [0], 1).is_zero()
    assert jet_at(field("x^2*dx", 1), [0], 2).field == field("x^2*dx", 1)
    j = jet_at(field("x*dx", 1), [1], 1)
    # in u = x - 1 the field is (1 + u) d/du
    assert j.field == field("(1 + x)*dx", 1)
    assert j.recentered() == field("x*dx", 1)


def test_jet_reproduces_polynomial_after_recentering():
    rng = np.random.default_rng(5)
    for _ in range(10):
        X = random_field(rng, 2, 3)
        p = (Fraction(int(rng.integers(-3, 4)), 2), Fraction(int(rng.integers(-3, 4)), 3))
        assert jet_at(X, p, 3).recentered() == X


def test_jet_of_bracket_matches_bracket_of_jets():
    rng = np.random.default_rng(6)
    for _ in range(10):
        X, Y = random_field(rng, 2, 3), random_field(rng, 2, 3)
        p = (Fraction(1, 2), Fraction(-1, 3))
        K = int(rng.integers(0, 4))
        lhs = jet_at(bracket(X, Y), p, K).field
        rhs = bracket(jet_at(X, p, K + 1).field, jet_at(Y, p, K + 1).field).truncate(K)
        assert lhs == rhs


def test_flow_trivial_cases():
    assert np.array_equal(flow_time_one(PolyVectorField.zero(2), (0.3, -1.0)), [0.3, -1.0])
    assert np.allclose(flow_time_one(field("dx"), (0, 0)), [1.0, 0.0], atol=1e-12)
    assert abs(flow_time_one(field("x*dx", 1), [1])[0] - math.e) < 1e-9


def test_flow_composition_by_scaling():
    X = field("y*dx - x^2*dy")
    p = (0.4, 0.2)
    tol = 1e-10
    s, t = Fraction(1, 3), Fraction(1, 2)
    two_step = flow_time_one(X * s, flow_time_one(X * t, p, tol), tol)
    one_step = flow_time_one(X * (s + t), p, tol)
    assert np.max(np.abs(two_step - one_step)) < 10 * tol


def test_flow_multiprecision_route():
    x = flow_time_one(field("x*dx", 1), [1], tol=1e-15)
    assert abs(x[0] - math.e) < 1e-15


def test_flow_escape_detected():
    with pytest.raises(FlowEscaped):
        flow_time_one(field("x^2*dx", 1), [2.0])
