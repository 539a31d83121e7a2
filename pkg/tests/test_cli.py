import json
import subprocess
import sys

import numpy as np
import pytest

from nsgalerkin.cli import check_inequalities, main
from nsgalerkin.config import ConfigError, parse_config
from nsgalerkin.domain import BoxDomain
from nsgalerkin.initial import random_field
from nsgalerkin.solver import read_csv

TWO_PI = 2 * np.pi


def write_config(tmp_path, name="cfg.json", **fields):
    path = tmp_path / name
    path.write_text(json.dumps(fields, indent=2))
    return path


BASE = {"dim": 4, "sides": [TWO_PI] * 4, "cutoff": 1, "nu": 0.1}


def run(cmd, cfg, out, *extra):
    return main([cmd, "--config", str(cfg), "--out", str(out), *extra])


class TestConfig:
    def test_missing_nu(self, tmp_path, capsys):
        cfg = write_config(tmp_path, dim=2, sides=[1.0, 1.0], cutoff=2)
        assert run("simulate", cfg, tmp_path / "o") == 1
        err = capsys.readouterr().err
        assert "nu" in err and "cfg.json:1" in err

    def test_unknown_key_line(self, tmp_path):
        text = '{\n  "dim": 2,\n  "sides": [1, 1],\n  "cutoff": 2,\n  "nu": 1,\n  "viscosity": 3\n}'
        with pytest.raises(ConfigError, match=r"c\.json:6: viscosity: unknown key"):
            parse_config(text, "c.json")

    @pytest.mark.parametrize("bad,field", [
        ({"nu": -1}, "nu"), ({"dim": 5}, "dim"), ({"sides": [1, 2]}, "sides"),
        ({"scheme": "euler"}, "scheme"), ({"cutoff": 0}, "cutoff"), ({"seed": -3}, "seed"),
        ({"flavor": "wall"}, "flavor"), ({"dt": "fast"}, "dt"),
    ])
    def test_rejects(self, bad, field):
        with pytest.raises(ConfigError, match=field):
            parse_config(json.dumps({**BASE, **bad}))

    def test_invalid_json(self):
        with pytest.raises(ConfigError, match=":2: invalid JSON"):
            parse_config('{\n "dim": ,\n}', "x.json")

    def test_nu_optional_for_c1(self):
        raw = {k: v for k, v in BASE.items() if k != "nu"}
        assert parse_config(json.dumps(raw), experiment="estimate-c1").nu is None

    def test_digest_tracks_content(self):
        a = parse_config(json.dumps(BASE))
        b = parse_config(json.dumps({**BASE, "seed": 1}))
        assert a.digest() != b.digest()
        assert a.digest() == parse_config(json.dumps(BASE, indent=4)).digest()


class TestCommands:
    def test_simulate_single_mode(self, tmp_path):
        cfg = write_config(tmp_path, **BASE, initial="single_mode", mode=[0, 0, 0, 1],
                           T=1.0, dt=1e-3, sample_every=100)
        out = tmp_path / "out"
        assert run("simulate", cfg, out) == 0
        header, data = read_csv(out / "trajectory.csv")
        assert header[:2] == ["t", "l2_sq"]
        assert data[-1, 1] / data[0, 1] == pytest.approx(np.exp(-0.2), rel=1e-8)
        report = json.loads((out / "report.json").read_text())
        assert {"config_hash", "guaranteed_rates", "config"} <= set(report)
        plot_header, plot = read_csv(out / "plot.csv")
        assert plot_header == ["t", "bound", "value"] and np.all(plot[:, 2] <= plot[:, 1] * (1 + 1e-9))

    def test_certify_zero(self, tmp_path):
        cfg = write_config(tmp_path, **BASE, amplitude=1.0, target_vnorm=0.0)
        assert run("certify", cfg, tmp_path / "o") == 0
        report = json.loads((tmp_path / "o" / "report.json").read_text())
        assert report["holds"] and report["existence"]["margin"] == 0.1

    def test_certify_fails(self, tmp_path):
        cfg = write_config(tmp_path, **BASE, target_vnorm=1.0)
        assert run("certify", cfg, tmp_path / "o") == 3

    def test_certify_regularity(self, tmp_path):
        cfg = write_config(tmp_path, **{**BASE, "nu": 1.0}, target_vnorm=0.1,
                           certificate="regularity")
        assert run("certify", cfg, tmp_path / "o") == 0

    def test_instability_exit(self, tmp_path, capsys):
        cfg = write_config(tmp_path, **{**BASE, "nu": 1.0}, dt=2.0, T=4.0)
        assert run("simulate", cfg, tmp_path / "o") == 2
        assert "stability bound" in capsys.readouterr().err

    def test_verify_decay(self, tmp_path):
        cfg = write_config(tmp_path, **{**BASE, "nu": 1.0, "cutoff": 2}, target_vnorm=0.09,
                           T=0.5, dt=0.01, sample_every=5)
        assert run("verify-decay", cfg, tmp_path / "o") == 0
        report = json.loads((tmp_path / "o" / "report.json").read_text())
        assert report["decay"]["envelope_ok"] and report["certificate"]["holds"]

    def test_perturbation(self, tmp_path):
        cfg = write_config(tmp_path, **{**BASE, "nu": 1.0, "cutoff": 2}, target_vnorm=0.05,
                           T=0.5, sample_every=5)
        assert run("perturbation", cfg, tmp_path / "o") == 0
        header, data = read_csv(tmp_path / "o" / "trajectory.csv")
        assert header == ["t", "difference_sq"] and np.all(np.diff(data[:, 1]) <= 1e-10)

    def test_estimate_c1(self, tmp_path):
        cfg = write_config(tmp_path, dim=2, sides=[1.0, 1.0], cutoff=2, flavor="freeslip",
                           iterations=5, restarts=1)
        assert run("estimate-c1", cfg, tmp_path / "o") == 0
        report = json.loads((tmp_path / "o" / "report.json").read_text())
        assert 0 < report["c1_lower_bound"] <= 3
        assert "lower bound" in report["note"]

    def test_check_inequalities(self, tmp_path):
        cfg = write_config(tmp_path, **BASE, samples=5)
        assert run("check-inequalities", cfg, tmp_path / "o") == 0

    def test_field_file_initial(self, tmp_path):
        d = BoxDomain(4, (TWO_PI,) * 4)
        random_field(d, 2, seed=3, vnorm=0.05).save(tmp_path / "u0.json")
        cfg = write_config(tmp_path, **BASE, initial="u0.json", T=0.1)
        assert run("simulate", cfg, tmp_path / "o") == 0

    def test_missing_field_file(self, tmp_path, capsys):
        cfg = write_config(tmp_path, **BASE, initial="nope.json")
        assert run("simulate", cfg, tmp_path / "o") == 1
        assert "nope.json" in capsys.readouterr().err

    def test_seed_override(self, tmp_path):
        cfg = write_config(tmp_path, **BASE, T=0.1)
        run("simulate", cfg, tmp_path / "a", "--seed", "1")
        run("simulate", cfg, tmp_path / "b", "--seed", "2")
        assert (tmp_path / "a" / "trajectory.csv").read_bytes() != \
            (tmp_path / "b" / "trajectory.csv").read_bytes()

    def test_usage(self):
        assert main([]) == 1
        assert main(["bogus"]) == 1

    def test_module_entry_point(self, tmp_path):
        cfg = write_config(tmp_path, **BASE, target_vnorm=0.0)
        proc = subprocess.run([sys.executable, "-m", "nsgalerkin", "certify", "--config",
                               str(cfg), "--out", str(tmp_path / "o")], capture_output=True)
        assert proc.returncode == 0


def test_check_inequalities_function():
    out = check_inequalities(BoxDomain(4, (np.pi,) * 4, "freeslip"), 2, 1.0, 4, 0)
    assert out["all_hold"]
    assert out["trilinear"]["constant_applies"]
