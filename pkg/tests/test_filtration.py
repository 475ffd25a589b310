import math
from fractions import Fraction

import numpy as np
import pytest

from hypocalc import catalog
from hypocalc.filtration import (
    WeightedGenerators,
    check_hormander,
    fiber_dims,
    generate_filtration,
    minimal_graded_basis,
    realize_word,
)
from hypocalc.polyfield import bracket, parse_field

POLYNOMIAL_CASES = {
    "heisenberg": (catalog.heisenberg_plane, (0, 1)),
    "ladder21": (lambda: catalog.ladder(2, 1), (0, 0)),
    "cusp": (catalog.cusp_line, (0,)),
    "grushin": (catalog.grushin_type, (0, 0)),
    "sextic": (catalog.sextic, (0, 0)),
    "flat_line": (catalog.flat_line, (0,)),
}


def test_weighted_generators_validation():
    with pytest.raises(ValueError):
        WeightedGenerators.parse(2, [("dx", 3)], 2)
    with pytest.raises(ValueError):
        WeightedGenerators.parse(2, [("dx", 0)], 2)


def test_heisenberg_levels():
    filt = generate_filtration(catalog.heisenberg_plane())
    assert [w.field for w in filt.levels[1]] == [parse_field("dx", 2), parse_field("x*dy", 2)]
    new = [w for w in filt.levels[2] if w.weight == 3]
    assert [w.field for w in new] == [parse_field("dy", 2)]
    assert new[0].letters == (0, 1)


def test_single_generator_single_level():
    filt = generate_filtration(WeightedGenerators.parse(1, [("dx", 1)], 1))
    assert len(filt.levels) == 1
    assert [w.field for w in filt.levels[0]] == [parse_field("dx", 1)]


@pytest.mark.parametrize("k,n", [(1, 1), (2, 1), (2, 2), (3, 1)])
def test_ladder_levels_contain_lowered_powers(k, n):
    fields = {w.letters: w for w in generate_filtration(catalog.ladder(k, n)).words}
    for j in range(k + 1):
        w = fields[(0,) * j + (1,)]
        assert w.weight == n + j
        assert w.field == parse_field(f"{math.perm(k, j)}*x^{k - j}*dy", 2)


def test_words_match_letters_and_weights():
    gen = catalog.ladder(2, 1)
    for w in generate_filtration(gen).words:
        assert w.weight == sum(gen.weights[i] for i in w.letters)
        assert realize_word(gen, w.letters) == w.field


def test_bracket_closure_of_levels():
    gen = catalog.heisenberg_plane()
    filt = generate_filtration(gen)
    fields_by_weight = {w.weight: [] for w in filt.words}
    for w in filt.words:
        fields_by_weight[w.weight].append(w.field)
    for a in filt.words:
        for b in filt.words:
            if a.weight + b.weight > gen.depth:
                continue
            br = bracket(a.field, b.field)
            # the heisenberg filtration is spanned by constant multiples of the words
            if br.is_zero():
                continue
            candidates = [f for w, fs in fields_by_weight.items() if w <= a.weight + b.weight for f in fs]
            assert any(br == f * c for f in candidates for c in (1, -1))


def test_monotone_levels():
    filt = generate_filtration(catalog.grushin_type())
    for lo, hi in zip(filt.levels, filt.levels[1:]):
        assert set(w.letters for w in lo) <= set(w.letters for w in hi)


def test_hormander_heisenberg_witness():
    h = check_hormander(catalog.heisenberg_plane(), (0, 0))
    assert h.holds and not h.by_convention
    assert [w.letters for w in h.witness] == [(0,), (0, 1)]


def test_hormander_fails_for_single_field_on_plane():
    for p in [(0, 0), (1, 2)]:
        assert not check_hormander(WeightedGenerators.parse(2, [("dx", 1)], 1), p).holds


def test_hormander_cusp_holds_by_convention():
    h = check_hormander(catalog.cusp_line(), (0,))
    assert h.holds and h.by_convention


def test_fiber_dims_heisenberg():
    assert fiber_dims(catalog.heisenberg_plane(), (0, Fraction(7, 3))).dims == (1, 1, 1)
    for a in (1, Fraction(-1, 2), 5):
        assert fiber_dims(catalog.heisenberg_plane(), (a, 2)).dims == (1, 1, 0)


def test_fiber_dims_cusp_off_origin():
    assert fiber_dims(catalog.cusp_line(), (1,)).dims == (1, 0, 0)


def test_fiber_dims_float_point_matches_exact():
    assert fiber_dims(catalog.heisenberg_plane(), (0.0, 1.0)).dims == (1, 1, 1)


def test_fiber_report_json():
    d = fiber_dims(catalog.heisenberg_plane(), (0, 1)).to_dict()
    assert d["dims"] == [1, 1, 1] and d["stable"] and d["jet_order"] == 3
    assert d["basis_words"][2][0]["letters"] == [1, 2]


@pytest.mark.parametrize("name", sorted(POLYNOMIAL_CASES))
def test_fiber_dims_jet_order_stable(name):
    make, p = POLYNOMIAL_CASES[name]
    gen = make()
    base = fiber_dims(gen, p)
    assert fiber_dims(gen, p, K=base.jet_order + 2).dims == base.dims


@pytest.mark.parametrize("name", sorted(POLYNOMIAL_CASES))
def test_upper_semicontinuity_sampling(name):
    make, p = POLYNOMIAL_CASES[name]
    gen = make()
    at_p = fiber_dims(gen, p).dims
    rng = np.random.default_rng(0)
    for _ in range(100):
        q = tuple(Fraction(v) + Fraction(int(rng.integers(-32, 33)), 64) for v in p)
        near = fiber_dims(gen, q).dims
        assert all(a <= b for a, b in zip(near, at_p))


@pytest.mark.parametrize("name", ["heisenberg", "ladder21", "cusp", "grushin", "flat_line"])
def test_generic_total_equals_dimension(name):
    make, p = POLYNOMIAL_CASES[name]
    gen = make()
    rng = np.random.default_rng(1)
    for _ in range(20):
        q = tuple(Fraction(int(rng.integers(1, 40)), int(rng.integers(1, 9))) for _ in p)
        assert fiber_dims(gen, q).total == gen.dim


@pytest.mark.parametrize("name", sorted(POLYNOMIAL_CASES))
def test_hormander_total_at_least_dimension(name):
    make, p = POLYNOMIAL_CASES[name]
    gen = make()
    if check_hormander(gen, p).holds:
        assert fiber_dims(gen, p).total >= gen.dim


def test_sextic_fiber_exceeds_dimension():
    assert fiber_dims(catalog.sextic(), (0, 0)).dims == (4, 2)


def test_minimal_graded_basis_ladder():
    for k, n in [(1, 1), (2, 1), (2, 2)]:
        b = minimal_graded_basis(catalog.ladder(k, n), (0, 1))
        assert b.weights == [1] + list(range(n, n + k + 1))
        assert b.fields[0] == parse_field("dx", 2)
        assert b.fields[1] == parse_field(f"x^{k}*dy", 2)
        assert b.fields[-1] == parse_field("dy", 2)


def test_minimal_graded_basis_frame():
    b = minimal_graded_basis(WeightedGenerators.parse(2, [("dx", 1), ("dy", 1)], 1), (3, 4))
    assert b.fields == [parse_field("dx", 2), parse_field("dy", 2)]


def test_minimal_graded_basis_flat_line():
    b = minimal_graded_basis(catalog.flat_line(), (0,))
    assert b.weights == [1, 2]
    assert b.fields == [parse_field("x^2*dx", 1), parse_field("dx", 1)]
