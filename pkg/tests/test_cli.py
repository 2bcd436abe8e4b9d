import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from volterra_cz import (SpatialSpace, StepFunction, TimeGrid,
                         read_step_function, write_step_function)
from volterra_cz.cli import main, render_json

from conftest import random_step, scalar_step


def run_cli(*argv):
    return main(list(argv))


@pytest.fixture
def step_csv(tmp_path):
    f = scalar_step([4.0])
    path = tmp_path / "f.csv"
    write_step_function(f, path)
    return path


@pytest.fixture
def gen_cfg(tmp_path):
    cfg = tmp_path / "gen.cfg"
    cfg.write_text("m=4\nbc=dirichlet\nLambda=1\n")
    return cfg


class TestRenderJson:
    def test_17_digit_floats(self):
        text = render_json({"x": 1.0 / 3.0, "l": [2.0 ** -52]})
        assert "0.33333333333333331" in text
        assert "2.2204460492503131e-16" in text
        parsed = json.loads(text)
        assert parsed["x"] == 1.0 / 3.0
        assert parsed["l"][0] == 2.0 ** -52

    def test_nested_structures(self):
        payload = {"a": [1, 2.5, None, True], "b": {"c": "text"}}
        assert json.loads(render_json(payload)) == payload


class TestDecompose(object):
    def test_roundtrip_report(self, step_csv, tmp_path, capsys):
        report = tmp_path / "out.json"
        parts = tmp_path / "parts"
        rc = run_cli("decompose", "--input", str(step_csv), "--alpha", "1",
                     "--report", str(report), "--emit-parts", str(parts))
        assert rc == 0
        payload = json.loads(report.read_text())
        assert payload["properties"]["ok"] is True
        assert payload["cubes"] == [{"n": 1, "k": 0, "a": 0.0, "b": 2.0, "s": 1.0}]
        assert payload["good_part"]["samples"] == [[2.0], [2.0]]
        b = read_step_function(parts / "bad_part_0000.csv")
        assert np.array_equal(b.samples[:, 0], [2.0, -2.0])
        assert "all pass" in capsys.readouterr().out

    def test_rejects_bad_alpha(self, step_csv, capsys):
        rc = run_cli("decompose", "--input", str(step_csv), "--alpha", "-1")
        assert rc == 2
        assert "--alpha" in capsys.readouterr().err

    def test_missing_input_is_usage_error(self, tmp_path):
        rc = run_cli("decompose", "--input", str(tmp_path / "nope.csv"),
                     "--alpha", "1")
        assert rc == 2

    def test_reverify_roundtrip(self, tmp_path):
        # decompose output re-read and re-verified passes identically
        f = random_step(3, N=32, m=2, density=0.6)
        src = tmp_path / "f.csv"
        write_step_function(f, src)
        rep1 = tmp_path / "r1.json"
        rep2 = tmp_path / "r2.json"
        alpha = 0.25 * float(f.cell_norms().max())
        assert run_cli("decompose", "--input", str(src), "--alpha", str(alpha),
                       "--report", str(rep1)) == 0
        assert run_cli("decompose", "--input", str(src), "--alpha", str(alpha),
                       "--report", str(rep2)) == 0
        a = json.loads(rep1.read_text())
        b = json.loads(rep2.read_text())
        assert a["cubes"] == b["cubes"]
        assert a["properties"] == b["properties"]


class TestValidateKernel:
    def test_model_size(self, capsys, tmp_path):
        out = tmp_path / "rep.json"
        rc = run_cli("validate-kernel", "--kernel", "model",
                     "--condition", "size", "--out", str(out))
        assert rc == 0
        assert "M0=1" in capsys.readouterr().out
        payload = json.loads(out.read_text())
        assert payload["size"]["M0"] == 1.0
        assert payload["size"]["diverging"] is False
        assert payload["config"]["backend"] in ("compiled", "pure")

    def test_model_holder(self, capsys):
        rc = run_cli("validate-kernel", "--kernel", "model",
                     "--condition", "holder-s")
        assert rc == 0
        out = capsys.readouterr().out
        val = float(out.split("M1=")[1].split()[0])
        assert 1.9 <= val <= 2.0 + 1e-9

    def test_heat_parabolic(self, capsys):
        rc = run_cli("validate-kernel", "--kernel", "heat:d=1",
                     "--condition", "parabolic:q=1.5")
        assert rc == 0
        assert "bounded=True" in capsys.readouterr().out

    def test_heat_rejects_operator_conditions(self, capsys):
        rc = run_cli("validate-kernel", "--kernel", "heat:d=1",
                     "--condition", "size")
        assert rc == 2

    def test_unknown_condition(self):
        assert run_cli("validate-kernel", "--kernel", "model",
                       "--condition", "bogus") == 2

    def test_green_size(self, gen_cfg, capsys):
        rc = run_cli("validate-kernel", "--kernel", f"green:{gen_cfg}",
                     "--condition", "size")
        assert rc == 0
        val = float(capsys.readouterr().out.split("M0=")[1].split()[0])
        assert val == pytest.approx(1 / math.e, abs=1e-6)


class TestHormander:
    def test_model_value(self, capsys):
        rc = run_cli("hormander", "--kernel", "model", "--s", "3", "--s0", "2")
        assert rc == 0
        out = capsys.readouterr().out
        val = float(out.split("integral=")[1].split()[0])
        assert val == pytest.approx(math.log(2), abs=1e-6)


class TestApply:
    def test_forward(self, tmp_path, capsys):
        path = tmp_path / "unit.csv"
        write_step_function(scalar_step([1.0]), path)
        rc = run_cli("apply", "--kernel", "model", "--input", str(path),
                     "--at", "2")
        assert rc == 0
        val = float(capsys.readouterr().out.strip())
        assert val == pytest.approx(math.log(2), abs=1e-10)

    def test_transpose(self, tmp_path, capsys):
        f = StepFunction(TimeGrid(0, 3), SpatialSpace(1, 2.0), [0, 0, 1.0])
        path = tmp_path / "g.csv"
        write_step_function(f, path)
        rc = run_cli("apply", "--kernel", "model", "--input", str(path),
                     "--at", "1", "--transpose")
        assert rc == 0
        val = float(capsys.readouterr().out.strip())
        assert val == pytest.approx(math.log(2), abs=1e-10)

    def test_on_support_rejected(self, step_csv):
        assert run_cli("apply", "--kernel", "model", "--input", str(step_csv),
                       "--at", "0.5") == 2


class TestSolve(object):
    def test_outputs(self, tmp_path, gen_cfg, capsys):
        f = random_step(1, N=16, m=4, density=1.0, n_min=-4)
        src = tmp_path / "f.csv"
        write_step_function(f, src)
        out = tmp_path / "sol"
        rc = run_cli("solve", "--spec", str(gen_cfg), "--input", str(src),
                     "--out", str(out))
        assert rc == 0
        u = read_step_function(out / "u.csv")
        du = read_step_function(out / "du_dt.csv")
        au = read_step_function(out / "au.csv")
        assert np.abs(du.samples + au.samples - f.samples).max() <= 1e-10
        payload = json.loads((out / "solution.json").read_text())
        assert payload["residual"] <= 1e-10

    def test_dimension_mismatch_is_usage_error(self, tmp_path, gen_cfg):
        f = random_step(1, N=8, m=2)
        src = tmp_path / "f.csv"
        write_step_function(f, src)
        assert run_cli("solve", "--spec", str(gen_cfg), "--input", str(src),
                       "--out", str(tmp_path / "x")) == 2


class TestAdjointCheck:
    def test_model(self, capsys):
        rc = run_cli("adjoint-check", "--kernel", "model", "--seed", "3",
                     "--pairs", "2")
        assert rc == 0
        assert "max_discrepancy=" in capsys.readouterr().out

    def test_green(self, gen_cfg, capsys):
        rc = run_cli("adjoint-check", "--kernel", f"green:{gen_cfg}",
                     "--seed", "1", "--pairs", "2")
        assert rc == 0


class TestSweepAndWeak:
    def test_maxreg_sweep_outputs(self, tmp_path, gen_cfg, capsys):
        out = tmp_path / "rep.json"
        csv = tmp_path / "rep.csv"
        plots = tmp_path / "plots"
        rc = run_cli("maxreg-sweep", "--spec", str(gen_cfg),
                     "--p", "2", "--r", "2",
                     "--trials", "oscillatory:count=5,seed=3",
                     "--refine", "32,64", "--out", str(out), "--csv", str(csv),
                     "--plot-data", str(plots))
        assert rc == 0
        payload = json.loads(out.read_text())
        assert len(payload["entries"]) == 2
        lines = csv.read_text().splitlines()
        assert lines[0] == "p,r,N,constant,weak_constant,M0,base_B"
        assert (plots / "weak_lambda.dat").exists()
        assert (plots / "kernel_decay.dat").exists()

    def test_weak_type(self, gen_cfg, capsys):
        rc = run_cli("weak-type", "--spec", str(gen_cfg), "--widths", "2,1",
                     "--count", "4")
        assert rc == 0
        out = capsys.readouterr().out
        assert "width=2" in out and "max_rel_change=" in out


class TestStressAndSelftest:
    def test_czd_stress_summary(self, capsys):
        rc = run_cli("czd-stress", "--seeds", "0..9",
                     "--alpha-scales", "0.1,1,10", "--N", "64")
        assert rc == 0
        assert "10x3 pass" in capsys.readouterr().out

    def test_czd_stress_mutation(self, capsys):
        rc = run_cli("czd-stress", "--seeds", "0..4", "--alpha-scales", "0.5",
                     "--N", "64", "--mutate")
        assert rc == 0

    def test_jobs_env_fallback(self, capsys, monkeypatch):
        monkeypatch.setenv("VOLTERRA_CZ_JOBS", "2")
        rc = run_cli("czd-stress", "--seeds", "0..3", "--alpha-scales", "0.5",
                     "--N", "32")
        assert rc == 0

    def test_selftest_subprocess(self):
        # a fast filtered subset, run out-of-process like a user would
        out = subprocess.run(
            [sys.executable, "-m", "volterra_cz.cli", "selftest",
             "--filter", "bochner"],
            capture_output=True, text=True)
        assert out.returncode == 0
        assert "selftest: 4 passed, 0 failed" in out.stdout


class TestUsageErrors:
    def test_unknown_flag_exits_2(self):
        out = subprocess.run(
            [sys.executable, "-m", "volterra_cz.cli", "decompose",
             "--frobnicate"],
            capture_output=True, text=True)
        assert out.returncode == 2
        assert "usage" in out.stderr.lower()

    def test_unknown_kernel(self, step_csv):
        assert run_cli("apply", "--kernel", "mystery", "--input",
                       str(step_csv), "--at", "2") == 2

    def test_malformed_trials(self, gen_cfg):
        assert run_cli("maxreg-sweep", "--spec", str(gen_cfg), "--p", "2",
                       "--r", "2", "--trials", "oscillatory:count") == 2
