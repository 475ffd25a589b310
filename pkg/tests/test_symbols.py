from fractions import Fraction

import numpy as np
import pytest

from hypocalc import catalog
from hypocalc.filtration import WeightedGenerators
from hypocalc.hncone import PairingMap, exact_point
from hypocalc.osculating import dilate_dual, free_nilpotent, osculating_with_basis
from hypocalc.polyfield import MultiPoly, ParseError, parse_field
from hypocalc.scalars import I, Gaussian
from hypocalc.symbols import (
    UNDEFINED_ORDER,
    NCPolynomial,
    PrincipalPart,
    SymbolOperator,
    character_rep,
    induce_representation,
    letter_classes,
    orbit_rank,
    parse_nc,
    parse_operator,
    principal_part,
    realize_symbol,
    symbol_character,
    vergne_polarization,
    weighted_order,
)


def letters_of(gen: WeightedGenerators):
    return tuple(zip(gen.fields, gen.weights))


def cusp_setup():
    gen = catalog.cusp_line()
    letters = ((parse_field("x^2*dx", 1), 1), (parse_field("dx", 1), 3), (parse_field("x*dx", 1), 2))
    g, basis = osculating_with_basis(gen, (0,))
    return letters, g, basis


def test_weighted_order_examples():
    letters = ((parse_field("dx", 2), 1), (parse_field("x*dy", 2), 2))
    assert weighted_order(parse_nc("X1*X1 + X2", letters)) == 2
    hor = ((parse_field("dx", 3), 1), (parse_field("dy", 3), 1), (parse_field("dz", 3), 2))
    assert weighted_order(parse_nc("X1*X1 + X2*X2 + X3", hor)) == 2
    cusp_letters, _, _ = cusp_setup()
    assert weighted_order(parse_nc("X1*X2 - X3*X3", cusp_letters)) == 4
    assert weighted_order(parse_nc("X1 - X1", cusp_letters)) is UNDEFINED_ORDER


def test_nc_parse_is_noncommutative_and_rejects_right_coefficients():
    letters = ((parse_field("dx", 2), 1), (parse_field("x*dy", 2), 2))
    P = parse_nc("X1*X2 - X2*X1", letters)
    assert len(P.monomials) == 2
    Q = parse_nc("x*X1 + 3/2*X2*X2", letters)
    assert Q.monomials[0][0] == MultiPoly.var(2, 0)
    with pytest.raises(ParseError):
        parse_nc("X1*x", letters)
    with pytest.raises(ParseError):
        parse_nc("X3", letters)


def test_nc_letter_index_validated():
    letters = ((parse_field("dx", 1), 1),)
    with pytest.raises(ValueError):
        NCPolynomial(letters, ((MultiPoly.const(1, 1), (1,)),))


def test_principal_part_of_cusp_presentations():
    letters, _, _ = cusp_setup()
    P1 = principal_part(parse_nc("X1*X2 - X3*X3", letters), (0,))
    assert P1.order == 4 and len(P1.monomials) == 2
    P2 = principal_part(parse_nc("-X3", letters), (0,), order=4)
    assert P2.order == 4 and P2.is_zero()
    assert principal_part(parse_nc("-X3", letters), (0,)).order == 2
    with pytest.raises(ValueError):
        principal_part(parse_nc("X1*X2", letters), (0,), order=3)


def test_principal_part_constant_coefficients_ignore_point():
    letters = letters_of(catalog.heisenberg_plane())
    P = parse_nc("X1*X1*X1*X1 - 2*X2*X2 + X1", letters)
    assert principal_part(P, (0, 0)) == principal_part(P, (Fraction(5), Fraction(-1, 3)))


def test_principal_part_drops_coefficients_vanishing_at_point():
    letters = letters_of(catalog.heisenberg_plane())
    PP = principal_part(parse_nc("x*X1*X1 + X2", letters), (0, 1))
    assert PP.order == 2 and [w for _, w in PP.monomials] == [(1,)]


def test_cusp_character_off_cone():
    letters, g, basis = cusp_setup()
    classes = letter_classes(letters, basis)
    P1 = principal_part(parse_nc("X1*X2 - X3*X3", letters), (0,))
    P2 = principal_part(parse_nc("-X3", letters), (0,), order=4)
    for xi in [(1, 0, 1), (2, 1, 3), (Fraction(1, 2), -1, 5)]:
        s1 = symbol_character(P1, xi, classes)
        expected = -(Fraction(xi[0]) * xi[2] - Fraction(xi[1]) ** 2)
        assert s1 == Gaussian(expected)
        assert symbol_character(P2, xi, classes) == Gaussian(0)
    assert symbol_character(P2, (1, 0, 1), classes) - symbol_character(P1, (1, 0, 1), classes) == Gaussian(1)


def test_cusp_presentations_agree_on_cone_points():
    letters, g, basis = cusp_setup()
    classes = letter_classes(letters, basis)
    phi = PairingMap.from_basis(basis)
    P1 = principal_part(parse_nc("X1*X2 - X3*X3", letters), (0,))
    P2 = principal_part(parse_nc("-X3", letters), (0,), order=4)
    rng = np.random.default_rng(0)
    for _ in range(1000):
        x, eta = (Fraction(int(rng.integers(-30, 31)), int(rng.integers(1, 11))) for _ in range(2))
        t = Fraction(int(rng.integers(1, 30)), int(rng.integers(1, 11)))
        xi = exact_point(phi, [x], [eta], t)
        assert symbol_character(P1, xi, classes) == symbol_character(P2, xi, classes) == Gaussian(0)


def test_character_homogeneity():
    letters, g, basis = cusp_setup()
    classes = letter_classes(letters, basis)
    P1 = principal_part(parse_nc("X1*X2 - X3*X3", letters), (0,))
    rng = np.random.default_rng(1)
    for _ in range(50):
        xi = rng.uniform(-2, 2, 3)
        lam = rng.uniform(0.2, 3)
        lhs = symbol_character(P1, list(dilate_dual(g, lam, list(xi))), classes)
        rhs = lam**4 * symbol_character(P1, list(xi), classes)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


def test_zero_principal_part():
    letters, g, basis = cusp_setup()
    classes = letter_classes(letters, basis)
    zero = PrincipalPart(4, (), letters)
    assert symbol_character(zero, (1, 2, 3), classes) == Gaussian(0)
    rho = induce_representation(g, [0, 0, 1])
    assert realize_symbol(zero, rho, classes).is_zero()


def test_intro_operator_character_generic_point():
    # d_x^4 + (x d_y)^4 + lambda d_y^2 with unit weights for d_x and x d_y
    gen = catalog.ladder(1, 1)
    letters = letters_of(gen) + ((parse_field("dy", 2), 2),)
    g, basis = osculating_with_basis(gen, (2, 0))
    classes = letter_classes(letters, basis)
    PP = principal_part(parse_nc("X1^4 + X2^4 + 3/2*X3^2", letters), (2, 0))
    for eta, xi in [(1, 0), (Fraction(1, 2), 3), (-2, -1)]:
        # class of x d_y at a = 2 is twice the basis vector
        c2 = classes[1][1]
        expected = Fraction(eta) ** 4 + (c2 * xi) ** 4
        assert symbol_character(PP, (eta, xi), classes) == Gaussian(expected)


@pytest.mark.parametrize("beta", [Fraction(1), Fraction(2), Fraction(-1, 2)])
def test_intro_operator_realized_symbol(beta):
    gen = catalog.ladder(1, 1)
    letters = letters_of(gen) + ((parse_field("dy", 2), 2),)
    g, basis = osculating_with_basis(gen, (0, 1))
    classes = letter_classes(letters, basis)
    lam = Fraction(3, 2)
    PP = principal_part(parse_nc(f"X1^4 + X2^4 + {lam}*X3^2", letters), (0, 1))
    rho = induce_representation(g, [0, 0, beta])
    S = realize_symbol(PP, rho, classes)
    assert S == parse_operator(f"D^4 + {beta ** 4}*y^4 - {lam * beta ** 2}")


def test_heisenberg_schrodinger_representation():
    g = free_nilpotent([1, 1], 2)
    beta = Fraction(3)
    rho = induce_representation(g, [0, 0, beta])
    assert rho.q == 1
    assert rho.action[0] == SymbolOperator.derivative(1, 0)
    assert rho.action[1] == SymbolOperator.multiplication(MultiPoly.var(1, 0)).scale(I * beta)
    assert rho.action[2] == SymbolOperator.constant(1, I * beta)


def test_ladder_representation_powers():
    g, _ = osculating_with_basis(catalog.ladder(2, 1), (0, 1))
    beta = Fraction(2)
    rho = induce_representation(g, [0, 0, 0, beta])
    y = MultiPoly.var(1, 0)
    assert rho.action[0] == SymbolOperator.derivative(1, 0)
    for slot, power in [(1, 2), (2, 1), (3, 0)]:
        assert rho.action[slot] == SymbolOperator.multiplication(y ** power).scale(I * beta)


def test_trivial_orbit_is_a_character():
    g = free_nilpotent([1, 1], 3)
    rho = induce_representation(g, [Fraction(2), Fraction(-1), 0, 0, 0])
    assert rho.q == 0
    assert [op for op in rho.action] == [SymbolOperator.constant(0, I * c) for c in (2, -1, 0, 0, 0)]
    assert character_rep(g, [2, -1, 0, 0, 0]).action == rho.action


@pytest.mark.parametrize("ell", [
    [0, 0, 0, 0, 1], [0, 0, 0, 1, 0], [0, 0, 1, 0, 0], [1, 0, 0, 1, 1], [0, 0, 2, Fraction(1, 3), -1],
])
def test_induced_representation_identities(ell):
    g = free_nilpotent([1, 1], 3)
    rho = induce_representation(g, ell)
    assert 2 * rho.q == orbit_rank(g, ell)
    assert len(vergne_polarization(g, ell)) == g.dim - rho.q
    for i in range(g.dim):
        # i * d pi(e_i) is formally symmetric
        assert rho.action[i].scale(I).is_formally_symmetric()
        for j in range(g.dim):
            rhs = SymbolOperator(rho.q)
            for k in range(g.dim):
                c = g.c(i, j, k)
                if c:
                    rhs = rhs + rho.action[k].scale(c)
            assert rho.action[i].commutator(rho.action[j]) == rhs


def test_sum_of_squares_realizes_harmonic_oscillator():
    gen = catalog.ladder(1, 1)
    letters = letters_of(gen)
    g, basis = osculating_with_basis(gen, (0, 1))
    classes = letter_classes(letters, basis)
    PP = principal_part(parse_nc("-X1*X1 - X2*X2", letters), (0, 1))
    S = realize_symbol(PP, induce_representation(g, [0, 0, 1]), classes)
    assert S == parse_operator("-D^2 + y^2")


def test_realize_respects_composition():
    gen = catalog.ladder(2, 1)
    letters = letters_of(gen)
    g, basis = osculating_with_basis(gen, (0, 1))
    classes = letter_classes(letters, basis)
    rho = induce_representation(g, [0, 0, Fraction(1, 2), Fraction(3)])
    rng = np.random.default_rng(2)
    for _ in range(20):
        words = [tuple(int(i) for i in rng.integers(0, 2, int(rng.integers(1, 4)))) for _ in range(2)]
        coeffs = [Fraction(int(rng.integers(1, 5)), int(rng.integers(1, 4))) for _ in range(2)]
        PPs = [PrincipalPart(sum(gen.weights[i] for i in w), ((c, w),), letters) for c, w in zip(coeffs, words)]
        lhs = realize_symbol(PPs[0] * PPs[1], rho, classes)
        rhs = realize_symbol(PPs[0], rho, classes).compose(realize_symbol(PPs[1], rho, classes))
        assert lhs == rhs


def test_symbol_operator_algebra():
    A = parse_operator("-D^2 + y^2")
    assert A.is_formally_symmetric() and A.order == 2
    assert not parse_operator("D").is_formally_symmetric()
    assert parse_operator("D").formal_adjoint() == parse_operator("-D")
    # [D, y] = 1
    assert parse_operator("D").commutator(parse_operator("y")) == SymbolOperator.constant(1, 1)
    assert parse_operator("(D + y)^2") == parse_operator("D^2 + y*D + D*y + y^2")
    y = MultiPoly.var(1, 0)
    assert parse_operator("D^2").apply(y ** 3) == y * 6


@pytest.mark.parametrize("text,q", [
    ("D^4 + y^4", 1), ("-D^2 + y^2 - 1", 1), ("D^2 + 2*I*y*D", 1), ("0", 1), ("D1*D2^2 - 3/2*y1*y2^2*D2 + I", 2),
])
def test_symbol_operator_text_round_trip(text, q):
    S = parse_operator(text, q)
    assert parse_operator(S.to_text(), q) == S


def test_parse_operator_two_variables():
    S = parse_operator("-D1^2 - D2^2 + y1^2 + y2^2", 2)
    assert S.q == 2 and S.is_formally_symmetric()
