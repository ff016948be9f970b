"""Harness plumbing: config parsing, presets, run outputs, CLI."""

import math

import numpy as np
import pytest

from fpme import cli, harness
from fpme.harness import RunConfig, format_config, parse_config, preset


class TestConfigParsing:
    def test_roundtrip(self):
        cfg = preset("exp1", s=0.25, ladder=(0.125, 0.0625))
        parsed = parse_config(format_config(cfg))
        assert parsed.s == 0.25
        assert parsed.ladder == (0.125, 0.0625)
        assert parsed.name == "exp1"

    def test_comments_and_blanks(self):
        text = """
        # a comment
        s = 0.75   # trailing comment
        ladder = 0.25, 0.125

        T = 0.5
        """
        cfg = parse_config(text)
        assert cfg.s == 0.75
        assert cfg.ladder == (0.25, 0.125)
        assert cfg.T == 0.5

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown key"):
            parse_config("wibble = 3")

    def test_missing_equals_rejected(self):
        with pytest.raises(ValueError, match="expected"):
            parse_config("just a line")

    def test_validation_errors(self):
        with pytest.raises(ValueError):
            parse_config("s = 1.5")
        with pytest.raises(ValueError):
            parse_config("ladder = 0.125, 0.25")  # not decreasing
        with pytest.raises(ValueError):
            parse_config("m = 4.0\ndatum = explicit_profile")
        with pytest.raises(ValueError):
            parse_config("snapshots = 2.0")  # beyond T

    def test_preset_names(self):
        for name in ("exp1", "exp2", "exp3", "exp4"):
            cfg = preset(name)
            assert cfg.name == name
        with pytest.raises(ValueError):
            preset("exp9")


class TestLadderRun:
    @pytest.fixture(scope="class")
    def mini_result(self):
        cfg = preset("exp1", s=0.5, ladder=(0.125, 0.0625), T=0.5,
                     snapshots=(0.25, 0.5))
        return cfg, harness.run_ladder(cfg)

    def test_errors_decrease(self, mini_result):
        _, res = mini_result
        assert res.ok
        evs = res.table.errors("E_v")
        assert evs[0] > evs[1] > 0.0

    def test_outputs_written(self, mini_result, tmp_path):
        cfg, res = mini_result
        paths = harness.write_ladder_outputs(res, tmp_path)
        names = {p.name for p in paths}
        assert {"errors.csv", "manifest.txt", "snapshot_t0.25.csv",
                "snapshot_t0.5.csv", "errors.png", "snapshots.png"} <= names
        header = (tmp_path / "errors.csv").read_text().splitlines()[0]
        assert header == "h,tau,E_v,E_u,E_u_weak,d0_bound,order_Ev,order_Eu,runtime_s"
        manifest = (tmp_path / "manifest.txt").read_text()
        assert "Cs = " in manifest and "tau = " in manifest
        assert "s = 0.5" in manifest

    def test_deterministic_outputs(self, mini_result, tmp_path):
        cfg, res = mini_result
        res2 = harness.run_ladder(cfg)
        d1, d2 = tmp_path / "run1", tmp_path / "run2"
        harness.write_ladder_outputs(res, d1)
        harness.write_ladder_outputs(res2, d2)
        assert (d1 / "snapshot_t0.5.csv").read_bytes() == (d2 / "snapshot_t0.5.csv").read_bytes()
        # errors.csv identical except the wall-clock column
        rows1 = (d1 / "errors.csv").read_text().splitlines()
        rows2 = (d2 / "errors.csv").read_text().splitlines()
        for a, b in zip(rows1, rows2):
            assert a.rsplit(",", 1)[0] == b.rsplit(",", 1)[0]

    def test_no_figures_flag(self, mini_result, tmp_path):
        cfg, res = mini_result
        cfg.figures = False
        paths = harness.write_ladder_outputs(res, tmp_path / "nofig")
        assert not [p for p in paths if p.suffix == ".png"]
        cfg.figures = True


class TestFineGridReference:
    def test_bump_run_uses_reference(self):
        cfg = preset("exp3", ladder=(0.125, 0.0625), h_ref=2.0**-6, T=0.25,
                     snapshots=(0.25,))
        res = harness.run_ladder(cfg)
        assert res.ok
        assert res.reference_rung is not None
        assert res.reference_rung.h == 2.0**-6
        evs = res.table.errors("E_v")
        assert evs[0] > evs[1] > 0.0


class TestComparisonRun:
    def test_exp4_ordering_and_crossing(self):
        cfg = preset("exp4", ladder=(0.0625,), snapshots=(0.5, 1.0))
        res = harness.run_comparison(cfg)
        assert res.v_ordered
        assert res.crossing is not None
        assert res.crossing["u1"] > res.crossing["u2"]

    def test_outputs(self, tmp_path):
        cfg = preset("exp4", ladder=(0.125,), snapshots=(1.0,), figures=False)
        res = harness.run_comparison(cfg)
        paths = harness.write_comparison_outputs(res, tmp_path)
        names = {p.name for p in paths}
        assert {"u1_snapshot_t1.csv", "u2_snapshot_t1.csv", "manifest.txt"} <= names


class TestPropertySuite:
    def test_mini_suite_passes(self):
        rep = harness.property_suite(seed=3, n_pairs=15, n_steps=25)
        assert rep.passed
        assert all(r.total == 0 for r in rep.positive)
        assert sum(r.total for r in rep.negative) >= 1

    def test_counterexample_recorded(self):
        rep = harness.property_suite(seed=3, n_pairs=5, n_steps=25)
        neg = [r for r in rep.negative if r.total > 0]
        assert neg and "phi0" in neg[0].counterexample

    def test_summary_text(self):
        rep = harness.property_suite(seed=3, n_pairs=5, n_steps=10)
        text = rep.summary()
        assert "CFL1" in text and "CFL2" in text
        assert text.endswith("PASS")


class TestCli:
    def test_weights_csv(self, capsys):
        rc = cli.main(["weights", "--s", "0.5", "--h", "1.0", "--max-k", "3",
                       "--eps-tail", "1e-4"])
        out = capsys.readouterr().out.splitlines()
        assert rc == 0
        assert out[0] == "k,w,scaled_cumsum"
        assert out[1].startswith("1,0.4244131815783875")
        k, w, c = out[1].split(",")
        assert float(w) == float(c)

    def test_weights_files(self, tmp_path, capsys):
        rc = cli.main(["weights", "--s", "0.25", "--h", "0.5", "--max-k", "10",
                       "--eps-tail", "1e-3", "--out", str(tmp_path)])
        assert rc == 0
        assert (tmp_path / "weights.csv").exists()
        assert (tmp_path / "weights.png").stat().st_size > 0

    def test_preset_run(self, tmp_path, capsys):
        rc = cli.main(["preset", "exp1", "--s", "0.5", "--T", "0.25",
                       "--ladder", "0.125,0.0625", "--out", str(tmp_path / "r"),
                       "--no-figures"])
        out = capsys.readouterr().out
        assert rc == 0
        assert (tmp_path / "r" / "errors.csv").exists()
        assert "E_v" in out

    def test_run_config_file(self, tmp_path, capsys):
        cfgfile = tmp_path / "run.cfg"
        cfgfile.write_text(
            "experiment = custom\ns = 0.5\ndatum = explicit_profile\nt0 = 1.0\n"
            "R = 0.5\nT = 0.25\nladder = 0.125\nsnapshots = 0.25\n"
        )
        rc = cli.main(["run", "--config", str(cfgfile), "--out",
                       str(tmp_path / "out"), "--no-figures"])
        assert rc == 0
        assert (tmp_path / "out" / "manifest.txt").exists()

    def test_props_exit_code(self, capsys):
        rc = cli.main(["props", "--pairs", "8", "--steps", "20", "--seed", "3"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "PASS" in out
