import numpy as np
import pytest

from hopflift.expr import evaluate, to_text
from hopflift.fields import SampleConfig, sample_points
from hopflift.lift import (Section, SpinorField, bilinear, compute_current, density_from_field,
                           density_matrix, lift_potential, lift_spinor, norm_squared)

from conftest import field, registry_fields

R = "sqrt(x^2 + y^2 + z^2)"
REGISTRY = registry_fields()
SECTIONS = [Section.NORTH, Section.SOUTH]


def spinor_at(psi, p):
    return psi.values(np.atleast_2d(p))[0]


def test_north_spinor_examples():
    assert np.allclose(spinor_at(lift_spinor(field("0", "0", "1")), [0.5, 0.5, 0.5]), [1, 0])
    assert np.allclose(spinor_at(lift_spinor(field("1", "0", "0")), [0.5, 0.5, 0.5]),
                       np.array([1, 1]) / np.sqrt(2))


def test_monopole_spinor_matches_closed_form(octant_points):
    psi = lift_spinor(field(*(f"{c}/(2*{R}^3)" for c in "xyz")))
    x, y, z = octant_points.T
    r = np.sqrt(x * x + y * y + z * z)
    pref = 1 / (2 * r * np.sqrt(r * (r + z)))
    expected = np.stack([pref * (r + z), pref * (x + 1j * y)], axis=-1)
    got = psi.values(octant_points)
    assert np.max(np.abs(got - expected) / np.abs(expected).max(axis=1, keepdims=True)) < 1e-10


def test_south_spinor_formula():
    psi = lift_spinor(field("1", "2", "-2"), Section.SOUTH)
    h = np.array([1, 2, -2.0])
    n = np.linalg.norm(h)
    expected = np.array([h[0] - 1j * h[1], n - h[2]]) / np.sqrt(2 * (n - h[2]))
    assert np.allclose(spinor_at(psi, [1, 1, 1]), expected, rtol=1e-14)


def test_potential_of_constant_field_vanishes():
    A = lift_potential(field("0", "0", "c"))
    assert [to_text(a) for a in A.components] == ["0", "0", "0"]


def test_potential_of_radial_field(octant_points):
    A = lift_potential(field("x", "y", "z"))
    expected = field(f"y/(2*{R}*({R} + z))", f"-x/(2*{R}*({R} + z))", "0")
    assert np.allclose(A.values(octant_points), expected.values(octant_points), rtol=1e-12, atol=0)


@pytest.mark.parametrize("sign", [1, -1])
def test_potential_of_sinh_fixed_point(sign, octant_points):
    from hopflift.fields import VectorField
    H = VectorField.parse((f"{-sign}*kappa^2/sinh(kappa*y)^2", "0", "0"), ["kappa"])
    A = lift_potential(H, positive_domain=True)
    k = {"kappa": 1.0}
    az = A.values(octant_points, k)[:, 2].real
    assert np.allclose(az, sign / np.tanh(octant_points[:, 1]), rtol=1e-12, atol=0)


def test_bilinear_examples():
    p = [[0.5, 0.5, 0.5]]
    assert np.allclose(bilinear(SpinorField(1, 0, 0, 0)).values(p), [[0, 0, 1]])
    s = 1 / np.sqrt(2)
    assert np.allclose(bilinear(SpinorField(s, 0, s, 0)).values(p), [[1, 0, 0]])


def test_density_matrix_examples():
    rho = density_matrix(SpinorField(1, 0, 0, 0), [0.5, 0.5, 0.5])
    assert np.allclose(rho, [[1, 0], [0, 0]])
    H = field(*(f"{c}/(2*{R}^3)" for c in "xyz"))
    p = np.array([1.0, 1.0, 1.0])
    rho = density_matrix(lift_spinor(H), p)
    h = H.values(p[None, :])[0].real
    assert np.trace(rho).real == pytest.approx(np.linalg.norm(h), rel=1e-12)
    assert np.allclose(rho, density_from_field(h), rtol=0, atol=1e-10 * np.linalg.norm(h))


def test_current_examples(octant_points):
    assert all(to_text(c) == "0" for c in compute_current(field("x", "y", "z")).components)
    from hopflift.fields import VectorField
    J = compute_current(VectorField.parse(("sinh(kappa*y)", "0", "0"), ["kappa"]))
    assert [to_text(c) for c in J.components] == ["0", "0", "-kappa*cosh(kappa*y)"]
    H4 = field("-y/(2*sqrt(x^2 + y^2)^3)", "x/(2*sqrt(x^2 + y^2)^3)", "0")
    assert np.all(np.isfinite(compute_current(H4).values(octant_points)))


# -- registry-wide invariants ---------------------------------------------------

def _samples(H, constants, section):
    return sample_points(SampleConfig(section=section.value), H, constants)


@pytest.mark.parametrize("section", SECTIONS, ids=lambda s: s.value)
@pytest.mark.parametrize("label,H,constants", REGISTRY, ids=[r[0] for r in REGISTRY])
def test_round_trip_and_norm(label, H, constants, section):
    S = _samples(H, constants, section)
    psi = lift_spinor(H, section)
    h = H.values(S.points, constants).real
    mag = np.linalg.norm(h, axis=1)
    back = bilinear(psi).values(S.points, constants).real
    assert np.max(np.linalg.norm(back - h, axis=1) / mag) < 1e-10
    n2 = evaluate(norm_squared(psi), S.binding(constants)).real
    assert np.max(np.abs(n2 - mag) / mag) < 1e-10


@pytest.mark.parametrize("label,H,constants", REGISTRY, ids=[r[0] for r in REGISTRY])
def test_sections_agree_on_density_matrix(label, H, constants):
    S = _samples(H, constants, Section.NORTH)
    keep = sample_points(SampleConfig(section="south"), H, constants).points
    pts = np.array([p for p in S.points if any(np.array_equal(p, q) for q in keep)])
    north, south = lift_spinor(H, Section.NORTH), lift_spinor(H, Section.SOUTH)
    for p in pts[:30]:
        a, b = density_matrix(north, p, constants), density_matrix(south, p, constants)
        assert np.max(np.abs(a - b)) <= 1e-10 * np.trace(a).real
