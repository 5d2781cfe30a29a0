import csv
import math

import numpy as np
import pytest

from hopflift.expr import EvaluationError
from hopflift.liouville import (AnalyticMap, BranchCutError, RealityError, UnsupportedPlaneMapError,
                                conjugate_power, embed_planar, half_integer, liouville_residual,
                                liouville_table, omega_alt, omega_general, omega_ns, planar_alt,
                                planar_ns, planar_zn, principal_sector, reality_fraction,
                                sector_grid, symbolic_laplacian_residual, write_liouville_csv,
                                zn_family, zn_map)
from hopflift.fields import SampleConfig
from hopflift.verify import VerifyConfig, verify_solution

FAMILY = [0.5, 1, 1.5, 2, 3]


def annulus(lo, hi, size=20, offset=0.1):
    r = np.linspace(lo, hi, size)
    t = np.linspace(0, 2 * np.pi, size, endpoint=False) + offset
    R, T = np.meshgrid(r, t)
    return np.stack([R * np.cos(T), R * np.sin(T)], axis=-1).reshape(-1, 2)


def polar(points):
    p = np.asarray(points)
    return np.hypot(p[:, 0], p[:, 1]), np.arctan2(p[:, 1], p[:, 0]) % (2 * np.pi)


# -- general solution -----------------------------------------------------------

def test_general_solution_hand_value():
    w = omega_general("zeta", "zeta", [[0.5, 0.0]])
    assert w[0] == pytest.approx(0.5 * math.log(4 / 0.5625), rel=1e-14)


def test_general_with_inverse_square_matches_alt():
    pts = annulus(0.5, 1.5) + 0.01
    pts = pts[np.abs(pts[:, 0] * pts[:, 1]) > 0.05]
    assert np.allclose(omega_general("zeta^2", "1/zeta^2", pts), omega_alt("zeta^2", pts),
                       rtol=0, atol=1e-12)


def test_general_non_real_pair():
    with pytest.raises(RealityError):
        omega_general("zeta", "zeta^3", [[0.3, 0.4]])


def test_unicode_zeta_accepted():
    assert AnalyticMap.of("ζ^2").expr is AnalyticMap.of("zeta^2").expr


# -- the two ansatze ------------------------------------------------------------

def test_ns_examples():
    assert omega_ns("zeta", [[0.0, 0.0]])[0] == pytest.approx(0.5 * math.log(4))
    with pytest.raises(EvaluationError):
        omega_ns("zeta", [[0.6, 0.8]])


def test_ns_residual_on_annulus():
    # the stencil error grows like |z|^-4 near the zero of g' at the origin
    st = liouville_residual(lambda p: omega_ns("zeta^2", p), annulus(0.4, 0.8))
    assert st.max < 1e-6


def test_alt_examples():
    w = omega_alt("zeta", [[0.3, 0.7]])
    assert w[0] == pytest.approx(0.5 * math.log(1 / 0.49), rel=1e-14)
    assert math.exp(2 * omega_alt("zeta^2", [[1.0, 2.0]])[0]) == pytest.approx(1.25, rel=1e-14)
    for p in ([1.0, 0.0], [0.0, 1.3]):
        with pytest.raises(EvaluationError):
            omega_alt("zeta^2", [p])


def test_alt_square_is_inverse_squares():
    uv = np.stack(np.meshgrid(np.linspace(0.5, 1.5, 20), np.linspace(0.5, 1.5, 20)), -1).reshape(-1, 2)
    B = planar_alt("zeta^2").B(uv)
    assert np.max(np.abs(B - (1 / uv[:, 0] ** 2 + 1 / uv[:, 1] ** 2))) < 1e-12
    st = liouville_residual(planar_alt("zeta^2").omega, uv)
    assert st.max < 1e-5


def test_constant_omega_is_not_a_solution():
    st = liouville_residual(lambda p: np.zeros(len(p)), annulus(0.5, 1.0))
    assert np.allclose(st.values, 1.0)
    assert not st.passed


def test_ns_zeta_inside_disk():
    st = liouville_residual(planar_ns("zeta").omega, annulus(0.05, 0.85))
    assert st.passed


@pytest.mark.parametrize("g", ["zeta", "zeta^3", "zeta + zeta^2/3"])
def test_both_ansatze_solve_liouville(g):
    assert liouville_residual(planar_ns(g).omega, annulus(0.4, 0.6)).passed
    pts = annulus(0.8, 1.2, offset=0.13)
    keep = np.abs(np.exp(2 * omega_alt(g, pts))) < 1e3
    assert liouville_residual(planar_alt(g).omega, pts[keep]).passed


# -- reality restriction --------------------------------------------------------

@pytest.mark.parametrize("g", ["zeta", "zeta^2", "zeta^3 + zeta"])
def test_reality_only_for_unit_powers(g):
    pts = np.random.default_rng(5).uniform(-2, 2, (400, 2))
    assert reality_fraction(g, 1, pts) == 1.0
    assert reality_fraction(g, -1, pts) == 1.0
    for nu in (0, 2, -2):
        assert reality_fraction(g, nu, pts) <= 0.05


def test_unit_powers_reproduce_ansatze():
    pts = annulus(0.3, 0.8, offset=0.2)
    g = "zeta^2"
    assert np.allclose(omega_general(g, conjugate_power(g, 1), pts), omega_ns(g, pts), rtol=0, atol=1e-10)
    assert np.allclose(omega_general(g, conjugate_power(g, -1), pts), omega_alt(g, pts), rtol=0, atol=1e-10)


# -- z^n family -------------------------------------------------------------------

def test_zn_examples():
    assert zn_family(1, 1.0, math.pi / 2) == pytest.approx(1.0)
    rho, phi = polar([[1.0, 2.0]])
    assert zn_family(2, rho, phi)[0] == pytest.approx(1.25, rel=1e-14)
    assert zn_family(0.5, 1.0, math.pi) == pytest.approx(0.25)


def test_half_power_across_branch_cut():
    # z = -1 sits on the principal cut of zeta^(1/2); B is the same on both sides
    for d in (1e-9, -1e-9):
        p = [[math.cos(math.pi - d), math.sin(math.pi - d)]]
        assert math.exp(2 * omega_alt("zeta^(1/2)", p)[0]) == pytest.approx(0.25, abs=1e-9)
    with pytest.raises(BranchCutError):
        omega_alt("zeta^(1/2)", [[-1.0, 0.0]])


@pytest.mark.parametrize("n", FAMILY)
def test_family_consistency(n):
    pts = sector_grid(n)
    rho, phi = polar(pts)
    B = np.exp(2 * omega_alt(zn_map(n), pts))
    assert np.max(np.abs(B - zn_family(n, rho, phi))) < 1e-9
    assert liouville_residual(planar_zn(n).omega, pts).max < 1e-5


@pytest.mark.parametrize("n", FAMILY)
def test_family_symmetric_under_sign_flip(n):
    rho, phi = polar(sector_grid(n))
    assert np.array_equal(zn_family(n, rho, phi), zn_family(-n, rho, phi))


@pytest.mark.parametrize("n", [0.7, 0, 1 / 3, "2/5"])
def test_non_half_integer_rejected(n):
    with pytest.raises(ValueError):
        half_integer(n)


def test_singular_ray_rejected():
    with pytest.raises(EvaluationError):
        zn_family(2, 1.0, math.pi / 2)


def test_sector_and_locus():
    assert principal_sector(1.5) == pytest.approx((0.0, 2 * math.pi / 3))
    assert "3 rays" in planar_zn(1.5).singular_locus
    pts = sector_grid(3, size=20)
    assert pts.shape == (400, 2)
    _, phi = polar(pts)
    assert np.all((phi > 0) & (phi < math.pi / 3))


@pytest.mark.parametrize("g", ["zeta^2", "zeta^3", "2*zeta^2 + zeta"])
def test_symbolic_laplacian_agrees(g):
    pts = annulus(0.5, 1.5, offset=0.3)
    pts = pts[np.abs(np.imag(AnalyticMap.of(g)(pts[:, 0] + 1j * pts[:, 1])[0])) > 0.2]
    assert np.max(symbolic_laplacian_residual(g, pts)) < 1e-10


def test_table_csv(tmp_path):
    rows = liouville_table(planar_alt("zeta^2"), [[1.0, 2.0], [0.5, 0.5]])
    write_liouville_csv(tmp_path / "l.csv", rows)
    lines = list(csv.reader(open(tmp_path / "l.csv")))
    assert lines[0] == ["u", "v", "omega", "B", "residual"]
    assert float(lines[1][3]) == pytest.approx(1.25, rel=1e-15)


# -- embedding ------------------------------------------------------------------

@pytest.mark.parametrize("sign", [1, -1])
def test_embed_reproduces_example3(sign):
    H = embed_planar("1/u^2 + 1/v^2", axis="x", sign=sign)
    assert H.texts()[1:] == ["0", "0"]
    report = verify_solution(H, "sw")
    assert report.passed, report.failing()


def test_embed_single_line_along_z():
    H = embed_planar("1/v^2", axis=(0, 0, 1))
    assert H.texts() == ["0", "0", "1/y^2"]
    assert verify_solution(H, "sw").passed
    south = VerifyConfig(sample=SampleConfig(section="south"))
    assert verify_solution(embed_planar("1/v^2", axis="z", sign=-1), "sw", south).passed


def test_embed_constant_is_not_a_solution():
    assert not verify_solution(embed_planar("2", axis="x"), "sw").passed


def test_embed_rejects_bad_geometry():
    with pytest.raises(UnsupportedPlaneMapError):
        embed_planar("1/v^2", axis=(1, 1, 0))
    with pytest.raises(UnsupportedPlaneMapError):
        embed_planar("1/v^2", axis="x", plane_map=("x", "y"))
