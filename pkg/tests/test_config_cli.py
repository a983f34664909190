import csv
import json
import os
import subprocess
import sys

import pytest

from kmsentropy import cli
from kmsentropy.config import RunConfig, load_config
from kmsentropy.errors import ConfigurationError, ValidationError


def _write(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestConfig:
    def test_defaults(self):
        cfg = load_config()
        assert isinstance(cfg, RunConfig) and cfg.thermal.beta == 1.0
        assert cfg.K2.is_zero()

    def test_full(self):
        cfg = load_config(text="""
[thermal]
beta = 2.0
mass = 0.5
[K1]
coeffs = [1.0, 0.5]
width = 2.0
[K3]
coeffs = [0.2, 0.0]
width = 2.0
[time]
t_min = 0.0
t_max = 1.0
t_steps = 3
[ness]
t_min = 10.0
t_max = 1000.0
t_steps = 3
""")
        assert cfg.K1.order == 2 and cfg.K2.coeffs == (0.0, 0.0)
        assert cfg.K2.profile == cfg.K1.profile
        assert cfg.times == pytest.approx((0.0, 0.5, 1.0))
        assert cfg.ness_times == pytest.approx((10.0, 100.0, 1000.0))

    @pytest.mark.parametrize("text", [
        "[thermal]\nbeta = 0\n",
        "[thermal]\nmass = -1\n",
        "[thermal]\ntemperature = 1\n",
        "[plot]\nx = 1\n",
        "[K1]\ncoeffs = [1.0]\n[K3]\ncoeffs = [1.0, 2.0]\n",
        "[K1]\nwidth = 1.0\n[K3]\nwidth = 2.0\n",
        "[K1]\ncoeffs = [1, 1, 1, 1]\n",
        "[time]\nt = 1.0\nt_min = 0.0\n",
        "[time]\nt_min = 0.0\n",
        "[ness]\nt = [0.0, 1.0]\n",
        "[grid]\nn_points = 64\n",
        "[cutoff]\nramp = 'cosine'\n",
        "[oracle]\ndims = [1, 2]\n",
        "[oracle]\nseed = -1\n",
        "[tolerance]\nbalance = 0\n",
        "[thermal]\nbeta = true\n",
        "[output]\ndir = ''\n",
        "not = [valid",
    ])
    def test_rejected(self, text):
        with pytest.raises(ValidationError):
            load_config(text=text)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_config(str(tmp_path / "absent.toml"))


class TestCli:
    def test_invalid_config_exit(self, tmp_path, capsys):
        cfg = _write(tmp_path, "[thermal]\nbeta = 0.0\n")
        assert cli.main(["--config", cfg, "--out", str(tmp_path / "o"), "relent"]) == 2
        assert "beta" in capsys.readouterr().err
        assert not (tmp_path / "o" / "relent.csv").exists()

    def test_negative_seed(self, tmp_path):
        assert cli.main(["--out", str(tmp_path), "--seed", "-3", "oracle"]) == 2

    def test_relent_zero_case(self, tmp_path):
        cfg = _write(tmp_path, """
[K1]
coeffs = [0.4, 0.9]
[K2]
coeffs = [1.0, -0.2]
[K3]
coeffs = [0.4, 0.9]
[time]
t = [0.0]
""")
        out = tmp_path / "o"
        assert cli.main(["--config", cfg, "--out", str(out), "--quiet", "relent"]) == 0
        rows = _rows(out / "relent.csv")
        assert rows[0] == ["t", "static", "dynamic", "total", "order_1", "order_2"]
        assert abs(float(rows[1][3])) <= 1e-12
        meta = json.loads((out / "relent.json").read_text())["meta"]
        assert meta["command"] == "relent" and meta["backend"] in ("compiled", "python")

    def test_deterministic(self, tmp_path):
        cfg = _write(tmp_path, "[oracle]\ntrials = 5\nseed = 11\n")
        blobs = []
        for k in range(2):
            out = tmp_path / f"o{k}"
            assert cli.main(["--config", cfg, "--out", str(out), "--quiet", "oracle"]) == 0
            blobs.append([(out / n).read_bytes() for n in ("oracle.csv", "oracle.json")])
        assert blobs[0] == blobs[1]
        rows = _rows(tmp_path / "o0" / "oracle.csv")
        assert len(rows) == 6 and all(r[-1] == "pass" for r in rows[1:])

    def test_seed_override_changes_trials(self, tmp_path):
        cfg = _write(tmp_path, "[oracle]\ntrials = 3\n")
        a, b = tmp_path / "a", tmp_path / "b"
        cli.main(["--config", cfg, "--out", str(a), "--quiet", "--seed", "1", "oracle"])
        cli.main(["--config", cfg, "--out", str(b), "--quiet", "--seed", "2", "oracle"])
        assert (a / "oracle.csv").read_bytes() != (b / "oracle.csv").read_bytes()

    def test_crlf(self, tmp_path):
        cfg = _write(tmp_path, "[oracle]\ntrials = 2\n")
        cli.main(["--config", cfg, "--out", str(tmp_path), "--quiet", "oracle"])
        raw = (tmp_path / "oracle.csv").read_bytes()
        assert raw.count(b"\r\n") == 3 and b"\n" not in raw.replace(b"\r\n", b"")

    @pytest.mark.parametrize("cmd,files", [
        ("entprod", ["entprod.csv", "entprod.json"]),
        ("density", ["density.csv", "density.json"]),
        ("kmscheck", ["kmscheck.csv", "kmscheck.json"]),
        ("ness", ["ness.csv", "ness.json"]),
        ("balance", ["balance.csv", "balance.json"]),
    ])
    def test_commands(self, tmp_path, cmd, files):
        cfg = _write(tmp_path, """
[K1]
coeffs = [0.0, 1.0]
[K3]
coeffs = [0.0, 0.5]
[time]
t = [0.5, 2.0]
[ness]
t_min = 10.0
t_max = 1000.0
t_steps = 9
""")
        out = tmp_path / "o"
        assert cli.main(["--config", cfg, "--out", str(out), "--quiet", cmd]) == 0
        for f in files:
            assert (out / f).exists()
        assert not [p for p in os.listdir(out) if p.startswith(".partial-")]

    def test_tolerance_failure_keeps_outputs(self, tmp_path, capsys):
        cfg = _write(tmp_path, """
[K1]
coeffs = [1.0]
[K3]
coeffs = [0.3]
[time]
t = [0.5]
[cutoff]
n_max = 4
""")
        out = tmp_path / "o"
        assert cli.main(["--config", cfg, "--out", str(out), "--quiet", "vanhove"]) == 3
        assert "van Hove" in capsys.readouterr().err
        assert len(_rows(out / "vanhove.csv")) == 5

    def test_partial_outputs_removed(self, tmp_path, monkeypatch):
        def boom(cfg, out):
            out.csv("relent.csv", ["t"], [(0.0,)])
            raise ValidationError("synthetic failure")

        monkeypatch.setitem(cli.COMMANDS, "relent", (boom, ""))
        out = tmp_path / "o"
        assert cli.main(["--out", str(out), "relent"]) == 2
        assert os.listdir(out) == []

    def test_console_script(self, tmp_path):
        r = subprocess.run([sys.executable, "-m", "kmsentropy.cli", "--help"], capture_output=True, text=True)
        assert r.returncode == 0 and "vanhove" in r.stdout
        r = subprocess.run([sys.executable, "-m", "kmsentropy.cli", "frobnicate"], capture_output=True, text=True)
        assert r.returncode == 2
