"""CLI plumbing tests at toy scale; physics claims live in test_acceptance."""

import numpy as np
import pytest

from idqa.cli import RunConfig, load_config, main

FAST = ["--time-scale", "5", "--tau-anneal", "1", "--tau-pause", "1"]


def read_rows(path):
    rows = [l.rstrip("\n") for l in open(path, encoding="utf-8")]
    header = [l for l in rows if l.startswith("#")]
    data = [l for l in rows if not l.startswith("#")]
    return header, data


class TestRun:
    def test_writes_observable_files(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["run", *FAST, "--s-pause", "0.46", "--outdir", str(out),
                   "--record-step", "0.1"])
        assert rc == 0
        for name in ("trajectory.tsv", "ps_pc.tsv", "groups.tsv",
                     "groups_path_restricted.tsv"):
            assert (out / name).exists(), name
        _, data = read_rows(out / "trajectory.tsv")
        assert len(data) >= 100

    def test_deterministic_without_timestamp(self, tmp_path):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            rc = main(["run", *FAST, "--s-pause", "0.46", "--outdir", str(out),
                       "--record-step", "0.1", "--no-timestamp"])
            assert rc == 0
            outs.append((out / "trajectory.tsv").read_bytes())
        assert outs[0] == outs[1]

    def test_amplitude_columns(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["run", *FAST, "--s-pause", "0.5", "--outdir", str(out),
                   "--record-step", "1.0", "--amplitudes"])
        assert rc == 0
        header, data = read_rows(out / "trajectory.tsv")
        assert len(data[0].split("\t")) == 5 + 2 * 256

    def test_invalid_s_pause_exits_1_without_outputs(self, tmp_path, capsys):
        out = tmp_path / "out"
        rc = main(["run", *FAST, "--s-pause", "1.5", "--outdir", str(out)])
        assert rc == 1
        assert not out.exists()
        assert "error" in capsys.readouterr().err

    def test_model_file_without_core_skips_observables(self, tmp_path):
        model = tmp_path / "pair.toml"
        model.write_text("n = 2\ncouplings = [[0, 1, 1.0]]\nfields = [0.0, 0.0]\n")
        out = tmp_path / "out"
        rc = main(["run", *FAST, "--s-pause", "0.5", "--model-file", str(model),
                   "--outdir", str(out), "--record-step", "0.5"])
        assert rc == 0
        assert (out / "trajectory.tsv").exists()
        assert not (out / "ps_pc.tsv").exists()


class TestSweep:
    def test_small_grid(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["sweep", "--time-scale", "2", "--tau-pairs", "1+1",
                   "--s-pause-grid", "0.3,0.7", "--outdir", str(out),
                   "--no-timestamp"])
        assert rc == 0
        _, data = read_rows(out / "sweep.tsv")
        assert len(data) == 3  # baseline + 2 grid points
        assert all(line.split("\t")[-1] == "ok" for line in data)

    def test_empty_grid_header_only(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["sweep", "--time-scale", "2", "--tau-pairs", "1+1",
                   "--s-pause-grid", "", "--outdir", str(out)])
        assert rc == 0
        _, data = read_rows(out / "sweep.tsv")
        assert data == []

    def test_two_tau_pairs_rows(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["sweep", "--time-scale", "1", "--tau-pairs", "1+1,2+2",
                   "--s-pause-grid", "0.5", "--outdir", str(out)])
        assert rc == 0
        _, data = read_rows(out / "sweep.tsv")
        assert len(data) == 4


class TestSpectrum:
    def test_gap_table_shape(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["spectrum", "--k", "20", "--s-step", "0.05",
                   "--outdir", str(out), "--no-timestamp"])
        assert rc == 0
        _, data = read_rows(out / "gaps.tsv")
        assert len(data) == 21
        assert len(data[0].split("\t")) == 21
        last = np.array([float(x) for x in data[-1].split("\t")])
        assert last[0] == 1.0
        assert np.all(last[1:17] <= 1e-9)

    def test_k_zero_rejected(self, tmp_path):
        assert main(["spectrum", "--k", "0", "--outdir", str(tmp_path)]) == 1


class TestCodegen:
    def test_writes_c_source(self, tmp_path):
        dest = tmp_path / "rhs.c"
        rc = main(["codegen", "--target", "c", "-o", str(dest)])
        assert rc == 0
        text = dest.read_text()
        assert "void id_rhs(" in text
        assigns = [l for l in text.splitlines() if l.strip().startswith("dc[")]
        assert len(assigns) == 256

    def test_exprs_target(self, tmp_path):
        dest = tmp_path / "rhs.txt"
        rc = main(["codegen", "--target", "exprs", "-o", str(dest)])
        assert rc == 0
        assigns = [l for l in dest.read_text().splitlines() if l.startswith("dc[")]
        assert len(assigns) == 256


def test_verify_subcommand_passes(capsys):
    assert main(["verify"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert out.count("PASS") >= 6


def test_config_file_and_flag_override(tmp_path):
    cfg_file = tmp_path / "cfg.toml"
    cfg_file.write_text(
        """
[model]
preset = "signature"

[schedule]
tau_anneal = 2.0
tau_pause = 0.5
s_pause = 0.3

[dynamics]
alpha = 0.01
temperature = 0.25

[run]
workers = 2
record_step = 0.5
"""
    )
    cfg = load_config(cfg_file)
    assert cfg.alpha == 0.01
    assert cfg.tau_anneal == 2.0
    assert cfg.workers == 2
    params = cfg.dynamics_params()
    assert params.temperature == 0.25

    out = tmp_path / "out"
    rc = main(["run", "--config", str(cfg_file), "--alpha", "0.02",
               "--time-scale", "2", "--outdir", str(out)])
    assert rc == 0


def test_config_unknown_section(tmp_path):
    cfg_file = tmp_path / "cfg.toml"
    cfg_file.write_text("[nope]\nx = 1\n")
    with pytest.raises(Exception):
        load_config(cfg_file)


def test_default_config_matches_reference_settings():
    cfg = RunConfig()
    params = cfg.dynamics_params()
    assert params.temperature == 0.3
    assert params.alpha == 0.0045
    assert params.atol == params.rtol == 1.136871e-13
    assert params.output_step == 0.01
    assert params.time_scale == 1000.0
