"""Tests for the command-line interface."""

import json

import numpy as np
import pytest
from click.testing import CliRunner

from vrsmooth.cli import main, _numeric_guard
from vrsmooth.errors import SingularRatioError


@pytest.fixture()
def runner():
    return CliRunner()


def parse_csv(text):
    lines = [ln for ln in text.strip().splitlines() if ln]
    header = lines[0].split(",")
    rows = [ln.split(",") for ln in lines[1:]]
    return header, rows


def write_affine(path, n=201):
    xs = np.linspace(0.0, 1.0, n)
    np.savetxt(path, np.column_stack([xs, 2.0 + 3.0 * xs]), delimiter=",")


MINIMAL_SIM = {
    "scenario": {"regression": "sine", "design": "uniform01", "noise_k": 1.0},
    "kernel": "epanechnikov",
    "n": 30,
    "replications": 2,
    "seed": 5,
    "grid_size": 31,
    "bandwidths": [0.1, 0.2, 0.3],
    "estimators": [{"variant": "ll"}, {"variant": "avg", "delta": 1.0}],
    "baseline": "ll",
}


class TestFunctionals:
    def test_table_contents(self, runner):
        res = runner.invoke(main, ["functionals", "--kernel", "epanechnikov",
                                   "--delta-max", "2.5", "--delta-step", "0.5"])
        assert res.exit_code == 0
        header, rows = parse_csv(res.stdout)
        assert header == ["delta", "c", "d", "nu_tilde02", "gamma_q", "gamma_a"]
        first = dict(zip(header, map(float, rows[0])))
        assert first["delta"] == 0.0
        assert abs(first["c"]) < 1e-10 and abs(first["d"]) < 1e-10
        assert first["gamma_q"] == pytest.approx(1.0, abs=1e-8)
        assert first["gamma_a"] == pytest.approx(1.0, abs=1e-8)
        at_one = dict(zip(header, map(float, rows[2])))
        assert at_one["gamma_a"] == pytest.approx(1.22, abs=0.02)
        assert at_one["nu_tilde02"] == pytest.approx(0.478125, abs=1e-7)

    def test_uniform_saturation_row(self, runner):
        res = runner.invoke(main, ["functionals", "--kernel", "uniform",
                                   "--delta-max", "2.5", "--delta-step", "0.5"])
        header, rows = parse_csv(res.stdout)
        last = dict(zip(header, map(float, rows[-1])))
        assert last["delta"] == 2.5
        assert last["c"] == pytest.approx(0.75, abs=1e-9)

    def test_unknown_kernel_exits_2(self, runner):
        res = runner.invoke(main, ["functionals", "--kernel", "tricube"])
        assert res.exit_code == 2
        assert "kernel" in res.output

    def test_rerun_is_byte_identical(self, runner):
        args = ["functionals", "--kernel", "normal", "--delta-max", "1.0",
                "--delta-step", "0.25"]
        a = runner.invoke(main, args)
        b = runner.invoke(main, args)
        assert a.stdout == b.stdout

    def test_plot_writes_png(self, runner, tmp_path):
        out = tmp_path / "fn.csv"
        args = ["functionals", "--kernel", "epanechnikov", "--delta-max",
                "1.0", "--delta-step", "0.5", "--out", str(out), "--plot"]
        res = runner.invoke(main, args)
        assert res.exit_code == 0, res.output
        png = tmp_path / "fn.png"
        assert out.exists() and png.exists() and png.stat().st_size > 0
        first = png.read_bytes()
        res = runner.invoke(main, args)
        assert res.exit_code == 0
        assert png.read_bytes() == first  # rendering is reproducible

    def test_plot_without_out_exits_2(self, runner):
        res = runner.invoke(main, ["functionals", "--kernel", "normal",
                                   "--plot"])
        assert res.exit_code == 2


class TestCoverageTable:
    def test_reference_cells(self, runner):
        res = runner.invoke(main, ["coverage-table"])
        assert res.exit_code == 0
        header, rows = parse_csv(res.stdout)
        assert header[:2] == ["kernel", "beta"]
        table = {(r[0], float(r[1])): [float(v) for v in r[2:]] for r in rows}
        deltas = [float(c.split("=")[1]) for c in header[2:]]
        assert deltas == [0.6, 0.8, 1.0, 1.2, 1.6, 2.0]
        assert table[("epanechnikov", 0.95)][2] == pytest.approx(1.067, abs=0.01)
        assert table[("uniform", 0.8)][5] == pytest.approx(1.184, abs=0.01)
        assert table[("normal", 0.8)][5] == pytest.approx(1.086, abs=0.01)

    def test_zero_width_column_is_unity(self, runner):
        res = runner.invoke(main, ["coverage-table", "--deltas", "0",
                                   "--betas", "0.95,0.8"])
        _header, rows = parse_csv(res.stdout)
        for row in rows:
            assert float(row[2]) == pytest.approx(1.0, abs=1e-7)

    def test_invalid_level_exits_2(self, runner):
        res = runner.invoke(main, ["coverage-table", "--betas", "0.95,1.5"])
        assert res.exit_code == 2

    def test_rerun_is_byte_identical(self, runner):
        args = ["coverage-table", "--deltas", "0.6,1.0", "--betas", "0.9"]
        assert runner.invoke(main, args).stdout == \
            runner.invoke(main, args).stdout


class TestFit:
    def test_affine_recovery(self, runner, tmp_path):
        data = tmp_path / "affine.csv"
        write_affine(data)
        res = runner.invoke(main, ["fit", "--data", str(data), "--h", "0.1",
                                   "--variant", "avg", "--delta", "1.0",
                                   "--no-ridge", "--grid-size", "101"])
        assert res.exit_code == 0, res.output
        header, rows = parse_csv(res.stdout)
        assert header == ["x", "estimate", "effective_delta"]
        for row in rows:
            x, est = float(row[0]), float(row[1])
            assert est == pytest.approx(2.0 + 3.0 * x, abs=1e-8)

    def test_degenerate_variants_coincide(self, runner, tmp_path):
        data = tmp_path / "affine.csv"
        write_affine(data)
        base = ["fit", "--data", str(data), "--h", "0.1", "--delta", "0",
                "--grid-size", "51"]
        a = runner.invoke(main, base + ["--variant", "ll"])
        b = runner.invoke(main, base + ["--variant", "avg"])
        assert a.exit_code == b.exit_code == 0
        assert a.stdout == b.stdout

    def test_rerun_is_byte_identical(self, runner, tmp_path):
        data = tmp_path / "affine.csv"
        write_affine(data)
        args = ["fit", "--data", str(data), "--h", "0.08", "--variant",
                "plus", "--beta", "0.95", "--grid-size", "51"]
        assert runner.invoke(main, args).stdout == \
            runner.invoke(main, args).stdout

    def test_confidence_column(self, runner, tmp_path):
        data = tmp_path / "noisy.csv"
        rng = np.random.default_rng(61)
        xs = np.sort(rng.random(150))
        ys = np.sin(5 * np.pi * xs) + 0.3 * rng.standard_normal(150)
        np.savetxt(data, np.column_stack([xs, ys]), delimiter=",")
        res = runner.invoke(main, ["fit", "--data", str(data), "--h", "0.1",
                                   "--variant", "q", "--beta", "0.9",
                                   "--grid-size", "21"])
        assert res.exit_code == 0, res.output
        header, rows = parse_csv(res.stdout)
        assert header[-1] == "lower_cb"
        for row in rows:
            if row[1] != "NA" and row[3] != "NA":
                assert float(row[3]) <= float(row[1])

    def test_singular_windows_marked_na(self, runner, tmp_path):
        data = tmp_path / "sparse.csv"
        xs = np.array([0.05, 0.051, 0.5, 0.501, 0.95, 0.951])
        ys = np.array([1.0, 1.1, 2.0, 2.1, 3.0, 3.1])
        np.savetxt(data, np.column_stack([xs, ys]), delimiter=",")
        res = runner.invoke(main, ["fit", "--data", str(data), "--h", "0.02",
                                   "--variant", "ll", "--no-ridge",
                                   "--grid-size", "41"])
        assert res.exit_code == 0
        _header, rows = parse_csv(res.stdout)
        assert any(row[1] == "NA" for row in rows)
        assert "singular" in res.stderr

    def test_oracle_bandwidth_mode(self, runner, tmp_path):
        data = tmp_path / "sine.csv"
        rng = np.random.default_rng(62)
        xs = np.sort(rng.random(200))
        ys = np.sin(5 * np.pi * xs) + 0.25 * rng.standard_normal(200)
        np.savetxt(data, np.column_stack([xs, ys]), delimiter=",")
        res = runner.invoke(main, ["fit", "--data", str(data), "--scenario",
                                   "sine", "--noise-k", "0.5", "--variant",
                                   "avg", "--grid-size", "11", "--out",
                                   str(tmp_path / "fit.csv")])
        assert res.exit_code == 0, res.output
        manifest = json.loads((tmp_path / "fit.csv.manifest.json").read_text())
        assert 0.01 < manifest["config"]["h"] < 0.3

    def test_requires_h_or_scenario(self, runner, tmp_path):
        data = tmp_path / "affine.csv"
        write_affine(data)
        res = runner.invoke(main, ["fit", "--data", str(data)])
        assert res.exit_code == 2

    def test_malformed_input_exits_2(self, runner, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b,c\n1,2\n")
        res = runner.invoke(main, ["fit", "--data", str(bad), "--h", "0.1"])
        assert res.exit_code == 2

    def test_covariates_outside_domain_exit_2(self, runner, tmp_path):
        bad = tmp_path / "range.csv"
        np.savetxt(bad, np.column_stack([[0.2, 1.4], [1.0, 2.0]]),
                   delimiter=",")
        res = runner.invoke(main, ["fit", "--data", str(bad), "--h", "0.1"])
        assert res.exit_code == 2


class TestSimulate:
    def test_minimal_study(self, runner, tmp_path):
        cfg = tmp_path / "sim.json"
        cfg.write_text(json.dumps(MINIMAL_SIM))
        out = tmp_path / "study"
        res = runner.invoke(main, ["simulate", "--config", str(cfg), "--out",
                                   str(out), "--threads", "1"])
        assert res.exit_code == 0, res.output
        header, rows = parse_csv((tmp_path / "study.csv").read_text())
        assert header[:5] == ["estimator", "h", "mise", "isb", "iv"]
        assert len(rows) == 2 * 3
        for row in rows:
            mise, isb, iv = map(float, row[2:5])
            assert abs(mise - isb - iv) < 1e-10 * max(1.0, mise)
        doc = json.loads((tmp_path / "study.json").read_text())
        assert doc["report"]["seed"] == 5
        assert doc["manifest"]["version"]

    def test_rerun_is_byte_identical(self, runner, tmp_path, monkeypatch):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
        cfg = tmp_path / "sim.json"
        cfg.write_text(json.dumps(MINIMAL_SIM))
        for stem in ("a", "b"):
            res = runner.invoke(main, ["simulate", "--config", str(cfg),
                                       "--out", str(tmp_path / stem)])
            assert res.exit_code == 0, res.output
        assert (tmp_path / "a.csv").read_bytes() == \
            (tmp_path / "b.csv").read_bytes()
        assert (tmp_path / "a.json").read_bytes() == \
            (tmp_path / "b.json").read_bytes()

    def test_env_seed_overrides_config(self, runner, tmp_path, monkeypatch):
        cfg = tmp_path / "sim.json"
        cfg.write_text(json.dumps(MINIMAL_SIM))
        res = runner.invoke(main, ["simulate", "--config", str(cfg), "--out",
                                   str(tmp_path / "base")])
        assert res.exit_code == 0
        monkeypatch.setenv("VRSMOOTH_SEED", "99")
        res = runner.invoke(main, ["simulate", "--config", str(cfg), "--out",
                                   str(tmp_path / "env")])
        assert res.exit_code == 0
        assert (tmp_path / "env.csv").read_text() != \
            (tmp_path / "base.csv").read_text()
        doc = json.loads((tmp_path / "env.json").read_text())
        assert doc["report"]["seed"] == 99

    def test_seed_flag_overrides_config(self, runner, tmp_path):
        cfg = tmp_path / "sim.json"
        cfg.write_text(json.dumps(MINIMAL_SIM))
        res = runner.invoke(main, ["simulate", "--config", str(cfg), "--out",
                                   str(tmp_path / "s"), "--seed", "77"])
        assert res.exit_code == 0
        doc = json.loads((tmp_path / "s.json").read_text())
        assert doc["report"]["seed"] == 77

    def test_schema_violations_listed(self, runner, tmp_path):
        bad = dict(MINIMAL_SIM)
        bad["frobnicate"] = 1
        bad["estimators"] = [{"variant": "spline"}]
        cfg = tmp_path / "sim.json"
        cfg.write_text(json.dumps(bad))
        res = runner.invoke(main, ["simulate", "--config", str(cfg), "--out",
                                   str(tmp_path / "x")])
        assert res.exit_code == 2
        assert "frobnicate" in res.output
        assert "estimators[0]" in res.output

    def test_invalid_json_exits_2(self, runner, tmp_path):
        cfg = tmp_path / "sim.json"
        cfg.write_text("{not json")
        res = runner.invoke(main, ["simulate", "--config", str(cfg), "--out",
                                   str(tmp_path / "x")])
        assert res.exit_code == 2

    def test_plot_output(self, runner, tmp_path):
        cfg = tmp_path / "sim.json"
        cfg.write_text(json.dumps(MINIMAL_SIM))
        res = runner.invoke(main, ["simulate", "--config", str(cfg), "--out",
                                   str(tmp_path / "fig"), "--plot"])
        assert res.exit_code == 0, res.output
        assert (tmp_path / "fig.png").stat().st_size > 0


class TestExitCodes:
    def test_numeric_guard_maps_to_exit_3(self):
        @_numeric_guard
        def boom():
            raise SingularRatioError("bracket vanished")

        with pytest.raises(SystemExit) as exc:
            boom()
        assert exc.value.code == 3

    def test_manifest_timestamp_honours_epoch(self, runner, tmp_path,
                                              monkeypatch):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
        out = tmp_path / "fn.csv"
        res = runner.invoke(main, ["functionals", "--kernel", "uniform",
                                   "--delta-max", "0.5", "--delta-step",
                                   "0.5", "--out", str(out)])
        assert res.exit_code == 0
        manifest = json.loads((out.parent / "fn.csv.manifest.json").read_text())
        assert manifest["timestamp"].startswith("2023-11-14")
