import json

import numpy as np
import pytest

from hopflift.fields import SampleConfig, sample_points
from hopflift.iterate import (EquationSystem, IterationConfig, IterationConfigError, Status, certify,
                              fixed_point_distance, run, step)
from hopflift.seeds import SEEDS, get_seed
from hopflift.verify import VerifyConfig, verify_solution

from conftest import field

R = "sqrt(x^2 + y^2 + z^2)"
RHO = "sqrt(x^2 + y^2)"
MONOPOLE = field(*(f"{c}/(2*{R}^3)" for c in "xyz"))
PAPER_SEEDS = [s for s in SEEDS if s.has_expected]
DEFAULT = sample_points(SampleConfig())


def config_for(seed, **kw):
    return IterationConfig(positive_domain=seed.positive_domain, constants=seed.constants, **kw)


@pytest.fixture(scope="module")
def traces():
    return {s.name: run(s.field(), s.system, config_for(s)) for s in PAPER_SEEDS}


def test_system_signs():
    assert EquationSystem.parse("sw").sign == 1
    assert EquationSystem.parse("freund").sign == -1
    with pytest.raises(ValueError):
        EquationSystem.parse("maxwell")


# -- step -----------------------------------------------------------------------

def test_step_radial_to_monopole():
    out = step(field("x", "y", "z"), "freund")
    assert fixed_point_distance(MONOPOLE, out, DEFAULT) < 1e-10


def test_step_monopole_is_fixed():
    assert fixed_point_distance(MONOPOLE, step(MONOPOLE, "freund"), DEFAULT) < 1e-10


def test_step_azimuthal_seed():
    # A[H] is invariant under H -> cH, so the first step has the fixed-point
    # direction but twice its magnitude, and the second step lands on it
    H1 = step(field("y", "-x", "0"), "sw")
    assert fixed_point_distance(field(f"-y/{RHO}^3", f"x/{RHO}^3", "0"), H1, DEFAULT) < 1e-12
    H2 = step(H1, "sw")
    assert fixed_point_distance(field(f"-y/(2*{RHO}^3)", f"x/(2*{RHO}^3)", "0"), H2, DEFAULT) < 1e-10


# -- distance -------------------------------------------------------------------

def test_distance_examples():
    H = field("x", "y", "z")
    assert fixed_point_distance(H, H, DEFAULT) == 0
    assert fixed_point_distance(H, H.scale(1.01), DEFAULT) == pytest.approx(0.01, abs=1e-12)
    assert fixed_point_distance(H, step(H, "freund"), DEFAULT) > 0.1


def test_distance_needs_points():
    with pytest.raises(ValueError):
        fixed_point_distance(MONOPOLE, MONOPOLE, DEFAULT.__class__(np.empty((0, 3))))


# -- run ------------------------------------------------------------------------

def test_example1_converges_quickly(traces):
    tr = traces["example1+"]
    assert tr.status is Status.CONVERGED
    assert tr.steps <= 3
    B = tr.final.scale(-1)
    assert fixed_point_distance(MONOPOLE.scale(-1), B, DEFAULT) < 1e-9


@pytest.mark.parametrize("name", ["example2+", "example2-"])
def test_example2_potential(name, traces):
    from hopflift.lift import lift_potential
    seed = get_seed(name)
    tr = traces[name]
    assert tr.status.success
    sign = 1 if name.endswith("+") else -1
    az = lift_potential(tr.final, positive_domain=True).values(DEFAULT.points, seed.constants)[:, 2]
    assert np.max(np.abs(az.real - sign / np.tanh(DEFAULT.points[:, 1]))) < 1e-9


@pytest.mark.parametrize("name", ["example2c+", "example2c-"])
def test_cosh_seed_potential(name, traces):
    from hopflift.lift import lift_potential
    seed = get_seed(name)
    tr = traces[name]
    assert tr.status.success
    sign = 1 if name.endswith("+") else -1
    az = lift_potential(tr.final, positive_domain=True).values(DEFAULT.points, seed.constants)[:, 2]
    assert np.max(np.abs(az.real - sign * np.tanh(DEFAULT.points[:, 1]))) < 1e-9


def test_example3_without_domain_flag():
    tr = run(field("x*y*z", "0", "0"), "sw")
    assert tr.status is Status.CONVERGED
    y, z = DEFAULT.points[:, 1], DEFAULT.points[:, 2]
    B = tr.final.values(DEFAULT.points).real
    assert np.max(np.abs(B[:, 0] + 1 / y ** 2 + 1 / z ** 2)) < 1e-9
    assert np.max(np.abs(B[:, 1:])) < 1e-9


@pytest.mark.parametrize("seed", PAPER_SEEDS, ids=lambda s: s.name)
def test_certificates(seed, traces):
    tr = traces[seed.name]
    assert tr.status is Status.CONVERGED
    # the converging step re-measured on points the run never saw
    fresh = SampleConfig(seed=12345, count=150)
    assert certify(tr, fresh, seed.constants) < 1e-9
    assert certify(tr, constants=seed.constants) < 1e-9
    cfg = VerifyConfig(positive_domain=seed.positive_domain, constants=seed.constants,
                       sample=SampleConfig(seed=99))
    report = verify_solution(tr.final, seed.system, cfg)
    assert report.passed, report.failing()


@pytest.mark.parametrize("seed", PAPER_SEEDS, ids=lambda s: s.name)
def test_one_more_step_stays_put(seed, traces):
    tr = traces[seed.name]
    fresh = sample_points(SampleConfig(seed=12345, count=150), tr.final, seed.constants)
    nxt = step(tr.final, seed.system, seed.positive_domain)
    # the next iterate is exact, but its larger expression costs a few digits in double
    assert fixed_point_distance(nxt, tr.final, fresh, seed.constants) < 1e-7
    assert fixed_point_distance(seed.expected_field(), nxt, fresh, seed.constants) < 1e-7


@pytest.mark.parametrize("seed", PAPER_SEEDS[::2], ids=lambda s: s.name)
def test_opposite_system_does_not_reuse_solution(seed):
    other = "freund" if seed.system.sign == 1 else "sw"
    tr = run(seed.field(), other, config_for(seed, node_budget=3000))
    assert tr.system is EquationSystem.parse(other)
    assert not tr.status.success
    assert tr.status in (Status.SIZE_BLOWUP, Status.MAX_ITERATIONS)


def test_trace_invariants(traces):
    for tr in traces.values():
        assert len(tr.distances) == len(tr.iterates) - 1
        assert len(tr.node_counts) == len(tr.iterates)
        assert (tr.status is Status.CONVERGED) == (tr.distances[-1] < 1e-9)


def test_exact_fixed_point():
    tr = run(field("-1/y^2", "0", "0"), "sw")
    assert tr.status is Status.EXACT_FIXED_POINT
    assert tr.status.success


def test_max_iterations():
    tr = run(field("x", "y", "z"), "freund", IterationConfig(max_iterations=1))
    assert tr.status is Status.MAX_ITERATIONS


def test_unsampleable_seed_is_evaluation_failure():
    tr = run(field("0", "0", "-1"), "sw")
    assert tr.status is Status.EVALUATION_FAILURE
    assert "rejected" in tr.message


def test_generic_seed_blows_up():
    g = get_seed("generic")
    tr = run(g.field(), g.system, IterationConfig(node_budget=g.node_budget))
    assert tr.status is Status.SIZE_BLOWUP
    assert tr.node_counts == sorted(tr.node_counts)
    assert tr.node_counts[-1] > 10 * tr.node_counts[1]


def test_zero_seed_rejected():
    with pytest.raises(IterationConfigError):
        run(field("0", "x - x", "0"), "sw")


@pytest.mark.parametrize("kw", [dict(max_iterations=0), dict(tolerance=0), dict(node_budget=0)])
def test_invalid_config(kw):
    with pytest.raises(IterationConfigError):
        run(field("x", "y", "z"), "sw", IterationConfig(**kw))


def test_trace_json(traces):
    doc = json.loads(traces["example1+"].to_json())
    assert doc["system"] == "freund"
    assert doc["status"] == "Converged"
    assert doc["seed"] == ["x", "y", "z"]
    assert all("wall_ms" not in s for s in doc["steps"])
    assert [s["node_count"] for s in doc["steps"]] == traces["example1+"].node_counts[1:]
    timed = json.loads(traces["example1+"].to_json(include_timing=True))
    assert all(s["wall_ms"] >= 0 for s in timed["steps"])
