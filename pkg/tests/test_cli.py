import csv
import json

import numpy as np
import pytest

from hopflift.cli import main


def run_cli(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)] if argv[0] != "seeds" else list(argv))


def test_iterate_example1(tmp_path, capsys):
    assert run_cli(tmp_path, "iterate", "--seed", "example1") == 0
    trace = json.loads((tmp_path / "trace.json").read_text())
    assert trace["status"] == "Converged" and len(trace["steps"]) <= 3
    sol = json.loads((tmp_path / "solution.json").read_text())
    assert set(sol) >= {"system", "let", "H", "psi", "A", "B"}
    assert "status: Converged" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [
    ["--H", "(x,0,0),(0,0,0)"],
    ["--H", "(x, y)"],
    ["--Hx", "x*(y", "--system", "sw"],
    ["--Hx", "x*q", "--system", "sw"],
    ["--Hx", "x*y*z"],
    ["--seed", "example7"],
    ["--seed", "example1", "--tolerance", "-1"],
])
def test_iterate_usage_errors(tmp_path, argv):
    assert run_cli(tmp_path, "iterate", *argv) == 2


def test_iterate_example3_inline(tmp_path):
    assert run_cli(tmp_path, "iterate", "--Hx", "x*y*z", "--Hy", "0", "--Hz", "0",
                   "--system", "sw") == 0
    sol = json.loads((tmp_path / "solution.json").read_text())
    assert sol["system"] == "sw" and sol["H"][1:] == ["0", "0"]
    assert run_cli(tmp_path / "v", "verify", "--tuple", str(tmp_path / "solution.json")) == 0


def test_iterate_generic_blows_up(tmp_path):
    assert run_cli(tmp_path, "iterate", "--seed", "generic") == 3
    assert json.loads((tmp_path / "trace.json").read_text())["status"] == "SizeBlowup"
    assert not (tmp_path / "solution.json").exists()


def test_iterate_max_iterations(tmp_path):
    assert run_cli(tmp_path, "iterate", "--seed", "example4", "--max-iterations", "1") == 3


def test_iterate_unsampleable_is_evaluation_failure(tmp_path):
    assert run_cli(tmp_path, "iterate", "--H", "(0, 0, -1)", "--system", "sw") == 4


def test_iterate_constants(tmp_path):
    assert run_cli(tmp_path, "iterate", "--Hx", "sinh(k*y)", "--system", "sw", "--const", "k=1",
                   "--positive-domain") == 0
    assert run_cli(tmp_path, "iterate", "--Hx", "sinh(k*y)", "--system", "sw") == 2


def test_verify_expected_and_perturbed(tmp_path):
    assert run_cli(tmp_path, "verify", "--seed", "example4", "--use-expected") == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["pass"] is True
    assert "overall: PASS" in (tmp_path / "report.txt").read_text()
    assert run_cli(tmp_path, "verify", "--seed", "example4", "--use-expected",
                   "--perturb", "1e-3") == 1
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["pass"] is False and rep["perturbation"]["target"] == "H1"


@pytest.mark.parametrize("target", ["psi3", "A3", "B2"])
def test_verify_perturb_target(tmp_path, target):
    assert run_cli(tmp_path, "verify", "--seed", "example4", "--use-expected",
                   "--perturb", "1e-3", "--perturb-target", target) == 1


def test_verify_bad_perturb_target(tmp_path):
    assert run_cli(tmp_path, "verify", "--seed", "example4", "--use-expected",
                   "--perturb", "1e-3", "--perturb-target", "Q3") == 2


def test_verify_radial_field_fails(tmp_path):
    assert run_cli(tmp_path, "verify", "--Hx", "x", "--Hy", "y", "--Hz", "z", "--system", "sw") == 1


def test_verify_seed_and_csv(tmp_path):
    assert run_cli(tmp_path, "verify", "--seed", "example2", "--csv", str(tmp_path / "r.csv")) == 0
    rows = list(csv.reader(open(tmp_path / "r.csv")))
    assert rows[0][:3] == ["x", "y", "z"] and len(rows) == 101


def test_verify_zero_field(tmp_path):
    assert run_cli(tmp_path, "verify", "--H", "(0, 0, 0)", "--system", "sw") == 2


def test_liouville_alt_square(tmp_path):
    assert run_cli(tmp_path, "liouville", "--alt", "--g", "zeta^2") == 0
    data = np.loadtxt(tmp_path / "liouville.csv", delimiter=",", skiprows=1)
    u, v, B = data[:, 0], data[:, 1], data[:, 3]
    assert np.max(np.abs(B - (1 / u ** 2 + 1 / v ** 2))) < 1e-9


def test_liouville_zn(tmp_path):
    assert run_cli(tmp_path, "liouville", "--zn", "3/2") == 0
    assert run_cli(tmp_path, "liouville", "--zn", "-1") == 0
    assert run_cli(tmp_path, "liouville", "--zn", "0.7") == 2
    assert run_cli(tmp_path, "liouville", "--zn", "abc") == 2


def test_liouville_ns_in_disk(tmp_path):
    assert run_cli(tmp_path, "liouville", "--ns", "--g", "zeta") == 0


def test_liouville_general(tmp_path):
    assert run_cli(tmp_path, "liouville", "--general", "--g", "zeta^2", "--h", "1/zeta^2") == 0
    assert run_cli(tmp_path, "liouville", "--general", "--g", "zeta") == 2
    assert run_cli(tmp_path, "liouville", "--general", "--g", "zeta", "--h", "zeta^3") == 4


def test_liouville_pole_on_grid(tmp_path):
    assert run_cli(tmp_path, "liouville", "--alt", "--g", "zeta^2", "--box", "0,1,0.5,1") == 4


def test_seeds_listing(capsys):
    assert main(["seeds"]) == 0
    out = capsys.readouterr().out
    names = [line.split()[0] for line in out.splitlines()[1:]]
    assert names[:2] == ["example1+", "example1-"]
    assert all(f"example{k}{s}" in names for k in range(1, 5) for s in "+-")
    main(["seeds"])
    assert capsys.readouterr().out == out


def test_sample_command(tmp_path):
    assert run_cli(tmp_path, "sample", "--seed", "example1", "--count", "7") == 0
    lines = (tmp_path / "samples.csv").read_text().splitlines()
    assert lines[0] == "x,y,z,H1,H2,H3" and len(lines) == 8
    # 17 significant digits so values re-read exactly
    assert all(f == format(float(f), ".17g") for f in lines[1].split(","))


def test_outputs_are_byte_identical(tmp_path):
    for d in ("a", "b"):
        run_cli(tmp_path / d, "iterate", "--seed", "example4")
        run_cli(tmp_path / d, "verify", "--seed", "example4", "--csv", str(tmp_path / d / "r.csv"))
        run_cli(tmp_path / d, "liouville", "--zn", "2")
    for name in ("trace.json", "solution.json", "report.json", "r.csv", "liouville.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("max_iterations = 1\n")
    assert run_cli(tmp_path, "iterate", "--seed", "example4", "--config", str(cfg)) == 3
    assert run_cli(tmp_path, "iterate", "--seed", "example4", "--config", str(cfg),
                   "--max-iterations", "5") == 0


def test_argparse_errors_exit_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["iterate", "--bogus"])
    assert exc.value.code == 2
