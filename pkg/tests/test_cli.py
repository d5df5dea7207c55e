import subprocess
import sys

import pytest

from fisher_harnack.cli import DEFAULTS, main, parse_config_text
from fisher_harnack.solver import Trajectory

SMALL = ["--set", "grid.points=64", "--set", "solver.samples=5", "--set", "solver.t_end=1"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_feasible_single_query(capsys):
    code, out, _ = run(capsys, "feasible", "--n", "1", "--c", "1", "--alpha", "0.25", "--beta", "-1")
    assert code == 0
    assert out.splitlines()[0] == "feasible regime=iii"


def test_infeasible_is_a_verdict(capsys):
    code, out, _ = run(capsys, "feasible", "--alpha", "1.2")
    assert code == 0
    assert out.splitlines()[0].startswith("infeasible (i)")


def test_sweep_row_count(capsys):
    code, out, _ = run(capsys, "sweep")
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "alpha,beta,regime,margin_ii,margin_iii"
    assert len(lines) == 2501
    alphas = {float(line.split(",")[0]) for line in lines[1:]}
    assert len(alphas) == 50 and min(alphas) > 0 and max(alphas) < 1


def test_manifest_echoes_resolved_config(tmp_path, capsys):
    code, _, _ = run(capsys, "feasible", "--out", str(tmp_path), "--set", "params.beta=-0.9", "--seed", "3")
    assert code == 0
    manifest = (tmp_path / "manifest.txt").read_text()
    assert "params.beta = -0.9" in manifest
    assert "run.seed = 3" in manifest
    assert all(f"{k} = " in manifest for k in DEFAULTS)
    assert (tmp_path / "feasible.txt").exists()


def test_precedence_flag_over_set_over_file(tmp_path, capsys):
    cfg = tmp_path / "a.cfg"
    cfg.write_text("params.beta = -0.5\nparams.alpha = 0.3\n")
    out_dir = tmp_path / "o"
    run(capsys, "feasible", "--config", str(cfg), "--set", "params.alpha=0.4", "--beta", "-0.7", "--out", str(out_dir))
    manifest = (out_dir / "manifest.txt").read_text()
    assert "params.alpha = 0.4" in manifest and "params.beta = -0.7" in manifest


@pytest.mark.parametrize(
    "argv",
    [
        ["feasible", "--config", "no_such_scenario"],
        ["feasible", "--set", "not-a-pair"],
        ["feasible", "--set", "params.alpha=abc"],
        ["verify", "harnack", "--set", "init.kind=spiky"],
        ["converge", "--set", "converge.resolutions=64,64,128"],
        ["converge", "--set", "converge.resolutions=64,128"],
    ],
)
def test_usage_errors_exit_two(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert "error" in err


def test_argparse_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "nothing"])
    assert exc.value.code == 2


def test_parse_config_text():
    assert parse_config_text("# c\na.b = 1\n\nc.d=x y\n", "t") == {"a.b": "1", "c.d": "x y"}


@pytest.mark.parametrize("config", ["compact_iii_1d", "compact_iv_1d", "noncompact_1d"])
def test_verify_harnack_small(capsys, tmp_path, config):
    code, out, _ = run(capsys, "verify", "harnack", "--config", config, *SMALL, "--out", str(tmp_path))
    assert code == 0
    assert "overall_pass=yes" in out
    csv = (tmp_path / "harnack.csv").read_text().splitlines()
    assert csv[0] == "t,min_h,tol,pass" and len(csv) == 6


def test_verify_harnack_jsonl(capsys):
    code, out, _ = run(capsys, "verify", "harnack", *SMALL, "--set", "check.format=jsonl")
    assert code == 0
    assert out.splitlines()[-1].startswith('{"summary": true')


@pytest.mark.parametrize("target", ["phi", "cutoff", "waves"])
def test_fast_verifiers_pass(capsys, target):
    code, out, _ = run(capsys, "verify", target)
    assert code == 0
    assert out


def test_verify_waves_report(capsys):
    code, out, _ = run(capsys, "verify", "waves", "--n", "1", "--c", "1")
    assert code == 0
    assert "2.000" in out and "1.2679" in out


def test_verify_identity_and_classical(capsys):
    code, _, _ = run(capsys, "verify", "identity", *SMALL)
    assert code == 0
    code, _, _ = run(
        capsys, "verify", "classical", "--set", "grid.points=128", "--set", "classical.pairs=10", "--seed", "7"
    )
    assert code == 0


def test_violation_exits_one(capsys):
    code, out, _ = run(
        capsys, "converge", "--set", "converge.resolutions=32,64,128", "--set", "converge.min_order=10", *SMALL[2:]
    )
    assert code == 1
    assert "# order_identity=" in out


def test_converge_orders(capsys):
    code, out, _ = run(capsys, "converge", *SMALL[2:])
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "dx,dt,max_identity_residual,min_h_negative_part"
    assert len([line for line in lines if not line.startswith("#")]) == 4
    order = float(next(line for line in lines if line.startswith("# order_identity=")).split("=")[1])
    assert order >= 1.9


def test_simulate_archive(tmp_path, capsys):
    code, out, _ = run(capsys, "simulate", *SMALL, "--out", str(tmp_path))
    assert code == 0
    assert out.startswith("t,min_f,max_f,mean_f")
    traj = Trajectory.load(tmp_path / "trajectory")
    assert len(traj.times) == 5 and traj.grid.shape == (64,)


def test_reruns_are_byte_identical(tmp_path, capsys):
    bodies = []
    for k in range(2):
        d = tmp_path / str(k)
        assert run(capsys, "verify", "harnack", *SMALL, "--seed", "5", "--out", str(d))[0] == 0
        bodies.append((d / "harnack.csv").read_bytes())
    assert bodies[0] == bodies[1]


def test_scenarios_listed(capsys):
    code, out, _ = run(capsys, "scenarios")
    assert code == 0
    assert "compact_iii_1d" in out.split()


def test_console_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "fisher_harnack.cli", "feasible"], capture_output=True, text=True, check=False
    )
    assert res.returncode == 0
    assert res.stdout.startswith("feasible regime=iii")
