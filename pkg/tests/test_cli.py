import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from magcap import cli
from magcap import dynamics as dy


def run(*args):
    return cli.run(list(args))


def test_capacity_plain_and_json():
    code, out = run("capacity", "--kappa", "1", "--s", "1", "--r", "1")
    assert code == 0
    assert float(out) == pytest.approx(2 * math.pi * (math.sqrt(2) - 1), rel=1e-15)
    code, out = run("capacity", "--kappa", "0", "--s", "1", "--r", "1", "--json")
    d = json.loads(out)
    assert d == {"value": math.pi, "kappa": 0.0, "s": 1.0, "r": 1.0, "stable_branch": True}


def test_capacity_full_precision():
    code, out = run("capacity", "--kappa", "-1", "--s", "1", "--r", "0.6")
    assert float(out) == cli_value(-1, 1, 0.6)
    assert out.strip() == format(cli_value(-1, 1, 0.6), ".17g")


def cli_value(k, s, r):
    from magcap.capacity import capacity_value
    return capacity_value(k, s, r).value


def test_weak_field_exit_code(capsys):
    code, out = run("capacity", "--kappa", "-1", "--s", "1", "--r", "1.2")
    assert code == 2 and out == ""
    assert "s^2 + kappa*r^2" in capsys.readouterr().err


@pytest.mark.parametrize("args", [
    ["capacity", "--r", "-1"],
    ["capacity", "--kappa", "nonsense"],
    ["nosuchcommand"],
    ["mane", "--kappa", "1"],
    ["sweep", "--param", "r", "--min", "1", "--max", "0.5"],
    ["sweep", "--param", "r", "--min", "0.5", "--max", "1", "--steps", "1"],
    ["simulate", "--kappa", "-1", "--x", "3"],
    ["simulate", "--tol", "1e-20"],
])
def test_invalid_input_exit_2(args):
    code, _ = run(*args)
    assert code == 2


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"kappa": 1.0, "s": 1.0, "r": 0.5}))
    _, out = run("capacity", "--config", str(cfg))
    assert float(out) == cli_value(1, 1, 0.5)
    _, out = run("capacity", "--config", str(cfg), "--r", "1")
    assert float(out) == cli_value(1, 1, 1)
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run("capacity", "--config", str(cfg))[0] == 2
    assert run("capacity", "--config", str(tmp_path / "missing.json"))[0] == 2


def test_certificate_json():
    code, out = run("capacity", "--kappa", "0", "--s", "1", "--r", "1", "--certify", "--json",
                    "--levels", "4")
    assert code == 0
    d = json.loads(out)
    assert d["min_period_measured"] >= 1.25 - 1e-9
    assert d["certified_lower_bound"] == pytest.approx(0.8 * (math.pi - 0.3))
    assert d["levels_checked"] == 4


def test_simulate_csv_round_trip(tmp_path):
    path = tmp_path / "traj.csv"
    args = ["simulate", "--kappa", "1", "--s", "1", "--u", "2", "--duration", "4",
            "--samples", "41", "--out", str(path)]
    assert run(*args)[0] == 0
    t, states, charts, energies = cli.read_trajectory(path)
    assert len(t) == 41 and set(charts) <= {0, 1}
    sys_ = dy.MagneticSystem(1.0, 1.0)
    traj = dy.integrate(sys_, dy.PhaseState(0, 0, 2, 0), dy.KINETIC, 4.0, 1e-10, n_samples=41)
    # 17 significant digits make the round trip exact
    assert np.array_equal(states, traj.states)
    assert np.array_equal(energies, traj.energies(sys_))
    with open(path) as fh:
        assert next(csv.reader(fh)) == ["t", "x", "y", "u", "w", "chart", "energy"]
    # deterministic: a second run writes the same bytes
    first = path.read_bytes()
    run(*args)
    assert path.read_bytes() == first
    assert not list(tmp_path.glob(".magcap-*"))


def test_simulate_failure_leaves_no_file(tmp_path):
    path = tmp_path / "fail.csv"
    code, _ = run("simulate", "--kappa", "-1", "--s", "0.5", "--u", "2", "--duration", "100",
                  "--out", str(path))
    assert code == 1
    assert not path.exists()
    assert not list(tmp_path.iterdir())


def test_simulate_zero_velocity_and_kinds():
    code, out = run("simulate", "--u", "0", "--w", "0", "--duration", "1", "--samples", "3")
    rows = list(csv.reader(io.StringIO(out)))[1:]
    assert code == 0 and len(rows) == 3
    assert all(r[1:] == rows[0][1:] for r in rows)
    code, out = run("simulate", "--kind", "circle", "--kappa", "1", "--samples", "5")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and float(rows[-1][0]) == 1.0
    code, out = run("simulate", "--kind", "profiled", "--kappa", "1", "--s", "1", "--r", "1",
                    "--u", "0.5", "--samples", "5")
    assert code == 0


def test_sweep_rows():
    code, out = run("sweep", "--kappa", "-1", "--s", "1", "--param", "r", "--min", "0.5",
                    "--max", "1.2", "--steps", "8")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 8
    for row in rows:
        r = float(row["value"])
        if r < 1:
            assert row["status"] == "ok"
            assert float(row["capacity_or_period"]) == pytest.approx(
                2 * math.pi * (1 - math.sqrt(1 - r * r)), rel=1e-12)
        else:
            assert row["status"] == "weak_field" and row["capacity_or_period"] == ""


def test_energy_sweep_measured_and_closed_form():
    base = ["sweep", "--kappa", "1", "--s", "1", "--param", "energy", "--min", "0.1",
            "--max", "1", "--steps", "3"]
    _, a = run(*base)
    _, b = run(*base, "--measure")
    pa = [float(r["capacity_or_period"]) for r in csv.DictReader(io.StringIO(a))]
    pb = [float(r["capacity_or_period"]) for r in csv.DictReader(io.StringIO(b))]
    assert np.allclose(pa, pb, rtol=1e-8)


def test_area_json():
    code, out = run("area", "--kappa", "1", "--s", "1", "--r", "1", "--grid", "64", "--json")
    d = json.loads(out)
    assert code == 0
    assert d["difference"] == pytest.approx(d["swept_area"] - d["closed_form"])
    assert abs(d["difference"]) < 2e-2


def test_mane(tmp_path):
    path = tmp_path / "mane.csv"
    code, out = run("mane", "--kappa", "-1", "--s", "1", "--json", "--out", str(path))
    reps = {r["regime"]: r for r in json.loads(out)}
    assert code == 0
    assert reps["below"]["closed"] and not reps["below"]["escaped"]
    assert reps["above"]["escaped"] and not reps["above"]["closed"]
    assert len(list(csv.reader(open(path)))) == 4


def test_verify_single_suite():
    code, out = run("verify", "geometry")
    assert code == 0
    assert out.count("PASS") == len(out.strip().splitlines())


def test_verify_detects_sign_flip(monkeypatch, capsys):
    real = dy._lorentz

    def flipped(kappa, s, y):
        return real(kappa, -s, y)

    monkeypatch.setattr(dy, "_lorentz", flipped)
    code, out = run("verify", "dynamics")
    assert code == 1
    assert "FAIL" in out
    assert "violated" in capsys.readouterr().err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "magcap", "capacity", "--kappa", "0", "--s", "2",
                          "--r", "1"], capture_output=True, text=True)
    assert res.returncode == 0
    assert float(res.stdout) == pytest.approx(math.pi / 2)
