import math
from fractions import Fraction

import numpy as np
import pytest

from hypocalc import catalog
from hypocalc.filtration import minimal_graded_basis
from hypocalc.hncone import (
    ConeSample,
    PairingMap,
    exact_point,
    invariance_check,
    membership,
    normalize,
    pairing,
    reachable,
    relation_residuals,
    sample_cone,
)
from hypocalc.osculating import dilate_dual, osculating_with_basis
from hypocalc.polyfield import parse_field

BUDGET = 1024


def cusp_pairing():
    return PairingMap.from_basis(minimal_graded_basis(catalog.cusp_line(), (0,)))


def basis_pairing(gen, p):
    return PairingMap.from_basis(minimal_graded_basis(gen, p))


def test_cusp_pairing_formula():
    phi = cusp_pairing()
    assert phi.weights == (1, 2, 3)
    x, eta, t = 0.7, -1.3, 0.4
    expected = [x**2 * t * eta, x * t**2 * eta, t**3 * eta]
    assert np.allclose(pairing(phi, [x], [eta], t), expected, rtol=1e-15)


def test_zero_covector_pairs_to_zero():
    phi = basis_pairing(catalog.grushin_type(), (0, 0))
    assert not np.any(pairing(phi, [0.3, -0.2], [0.0, 0.0], 0.5))


def test_cusp_image_identity_is_exact():
    phi = cusp_pairing()
    rng = np.random.default_rng(0)
    for _ in range(200):
        x, eta, t = (Fraction(int(rng.integers(-20, 21)), int(rng.integers(1, 9))) for _ in range(3))
        xi = exact_point(phi, [x], [eta], abs(t))
        assert xi[0] * xi[2] - xi[1] ** 2 == 0


def test_homogeneity_and_linearity():
    phi = basis_pairing(catalog.grushin_type(), (0, 0))
    g, _ = osculating_with_basis(catalog.grushin_type(), (0, 0))
    rng = np.random.default_rng(1)
    for _ in range(50):
        x, eta = rng.uniform(-1, 1, 2), rng.uniform(-2, 2, 2)
        t, lam, c = rng.uniform(0.01, 1), rng.uniform(0.1, 3), rng.uniform(-3, 3)
        base = pairing(phi, x, eta, t)
        scaled = pairing(phi, x, eta, lam * t)
        assert np.allclose(scaled, np.array(dilate_dual(g, lam, list(base)), dtype=float), rtol=1e-12, atol=1e-15)
        assert np.allclose(pairing(phi, x, c * eta, t), c * base, rtol=1e-12, atol=1e-15)


def test_normalize_gauge():
    xi, s = normalize([0.5, -2.0, 1.0])
    assert s == 2.0 and np.array_equal(xi, [0.25, -1.0, 0.5])
    z, s = normalize([0.0, 0.0])
    assert s == 1.0 and not np.any(z)


def test_cusp_sample_satisfies_relation():
    phi = cusp_pairing()
    sample = sample_cone(phi, BUDGET, seed=3)
    assert len(sample) >= 1000
    assert reachable(phi, sample)
    assert relation_residuals("cusp", sample.points)["xi1*xi3 - xi2^2"] < 1e-8


def test_grushin_sample_satisfies_relation():
    sample = sample_cone(basis_pairing(catalog.grushin_type(), (0, 0)), BUDGET, seed=4)
    assert len(sample) >= 1000
    assert relation_residuals("grushin", sample.points)["xi2*xi4 - xi3^2"] < 1e-8


def test_sextic_sample_satisfies_relations_and_signs():
    sample = sample_cone(basis_pairing(catalog.sextic(), (0, 0)), BUDGET, seed=5)
    assert len(sample) >= 1000
    res = relation_residuals("sextic", sample.points)
    assert res["xi1^3 - xi2*xi4^2"] < 1e-8
    assert res["xi3^3 - xi2^2*xi4"] < 1e-8
    assert res["min xi_i*xi5"] >= -1e-8


def test_flat_ratio_range():
    sample = sample_cone(catalog.flat_pairing(), 2048, seed=6, x_radius=0.5)
    res = relation_residuals("flat", sample.points)
    assert res["ratio_count"] >= 1000
    assert 1 - 1e-3 <= res["ratio_min"] and res["ratio_max"] <= 3 + 1e-3


def test_unknown_relation_suite():
    with pytest.raises(KeyError):
        relation_residuals("nope", np.zeros((1, 3)))


def test_sample_serialization():
    sample = sample_cone(cusp_pairing(), 16, seed=0)
    d = sample.to_dict()
    assert len(d["points"]) == len(sample) == len(d["parameters"])
    lines = sample.to_csv().splitlines()
    assert lines[0] == "xi1,xi2,xi3" and len(lines) == len(sample) + 1
    assert sample.projections(0, 2).shape == (len(sample), 2)


def test_sample_deterministic_for_seed():
    a = sample_cone(cusp_pairing(), 64, seed=9)
    b = sample_cone(cusp_pairing(), 64, seed=9)
    assert np.array_equal(a.points, b.points)


@pytest.mark.parametrize("seed", range(5))
def test_membership_cusp_reproducible(seed):
    phi = cusp_pairing()
    inside = membership(phi, [1, 1, 1], seed=seed)
    assert inside.verdict == "in" and inside.residual < 1e-6 and not inside.heuristic
    outside = membership(phi, [1, 0, 1], seed=seed)
    assert outside.verdict == "out" and outside.heuristic


def test_membership_witness_reproduces_candidate():
    phi = cusp_pairing()
    v = membership(phi, [1, 1, 1])
    w = v.witness
    assert np.allclose(pairing(phi, w["x"], w["eta"], w["t"]), [1, 1, 1], atol=1e-6)


def test_membership_zero_is_in():
    v = membership(cusp_pairing(), [0, 0, 0])
    assert v.verdict == "in" and v.residual == 0.0


def test_membership_rejects_bad_candidate():
    with pytest.raises(ValueError):
        membership(cusp_pairing(), [1, 1])


def test_invariance_on_cusp():
    gen = catalog.cusp_line()
    g, basis = osculating_with_basis(gen, (0,))
    phi = PairingMap.from_basis(basis)
    sample = sample_cone(phi, 256, seed=0)
    report = invariance_check(phi, sample, g, count=5, seed=0)
    assert report.checked == 20 and report.ok


def test_negative_dilation_recorded_for_sextic():
    gen = catalog.sextic()
    g, basis = osculating_with_basis(gen, (0, 0))
    phi = PairingMap.from_basis(basis)
    sample = sample_cone(phi, 64, seed=0)
    report = invariance_check(phi, sample, g, count=2, seed=0, negative_dilation=True)
    assert len(report.to_dict()["negative_dilation"]) == 2


def test_pairing_map_validation():
    with pytest.raises(ValueError):
        PairingMap((parse_field("dx", 1),), (1, 2), (0,), 1)
    with pytest.raises(TypeError):
        PairingMap((3,), (1,), (0,), 1)
    with pytest.raises(ValueError):
        pairing(cusp_pairing(), [0.0], [1.0], -1.0)


def test_exact_point_needs_polynomial_fields():
    with pytest.raises(TypeError):
        exact_point(catalog.flat_pairing(), [0, 0], [1, 0], 1)


def test_empty_sample_type():
    assert len(ConeSample(np.zeros((0, 3)), [])) == 0
    assert math.isnan(relation_residuals("flat", np.zeros((0, 4)))["ratio_min"])
