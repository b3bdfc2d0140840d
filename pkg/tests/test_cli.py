import json
from pathlib import Path

import numpy as np
import pytest

from ckdv.cli import main

SUMMARY_KEYS = {"config", "drifts", "apriori", "stability", "wall_seconds", "exit_code"}


def write_config(tmp_path: Path, **overrides) -> Path:
    config = {
        "domain": {"L": 40 * np.pi, "N": 256},
        "components": 2,
        "dt": 2e-3,
        "t_end": 0.5,
        "sample_every": 50,
        "seed": 0,
        "initial": {"type": "soliton", "C": 1.0, "x0": 0.0},
        "snapshots": 3,
    }
    config.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    return path


def read_summary(outdir: Path) -> dict:
    return json.loads((outdir / "summary.json").read_text())


class TestSimulate:
    def test_soliton_run_produces_contracted_files(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "run"
        assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0

        invariants = (out / "invariants.csv").read_text().splitlines()
        assert invariants[0] == (
            "t,H,V,H1,Hhalf_1,Hhalf_2,M_11,M_12,M_21,M_22,sobolev,apriori_bound"
        )
        snapshots = sorted(out.glob("fields_t*.csv"))
        assert len(snapshots) == 3
        header = snapshots[0].read_text().splitlines()[0]
        assert header == "x,u,phi_1,phi_2"

        summary = read_summary(out)
        assert SUMMARY_KEYS <= set(summary)
        assert summary["exit_code"] == 0
        assert summary["drifts"]["H"] < 1e-8
        assert summary["apriori"]["ok"] is True

    def test_rerun_is_byte_identical(self, tmp_path):
        cfg = write_config(tmp_path)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["simulate", "--config", str(cfg), "--out", str(out1)]) == 0
        assert main(["simulate", "--config", str(cfg), "--out", str(out2)]) == 0
        assert (out1 / "invariants.csv").read_bytes() == (out2 / "invariants.csv").read_bytes()
        for snap in out1.glob("fields_t*.csv"):
            assert snap.read_bytes() == (out2 / snap.name).read_bytes()

    def test_zero_t_end_single_snapshot(self, tmp_path):
        cfg = write_config(tmp_path, t_end=0.0)
        out = tmp_path / "run"
        assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
        assert len(list(out.glob("fields_t*.csv"))) == 1
        summary = read_summary(out)
        assert summary["drifts"]["H"] == 0.0

    def test_blow_up_exit_code(self, tmp_path):
        cfg = write_config(tmp_path, dt=0.5, t_end=50.0, force_dt=True,
                           sample_every=5)
        out = tmp_path / "run"
        assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 2
        summary = read_summary(out)
        assert summary["exit_code"] == 2
        assert summary["blow_up"]["t"] > 0

    def test_config_errors_exit_code(self, tmp_path):
        bad = write_config(tmp_path, domain={"L": 40 * np.pi, "N": 100})
        assert main(["simulate", "--config", str(bad), "--out", str(tmp_path / "x")]) == 1
        missing = tmp_path / "nope.json"
        assert main(["simulate", "--config", str(missing)]) == 1
        unknown = write_config(tmp_path, extra_field=1)
        assert main(["simulate", "--config", str(unknown)]) == 1
        too_many = write_config(tmp_path, components=17)
        assert main(["simulate", "--config", str(too_many)]) == 1

    def test_random_initial_and_file_round_trip(self, tmp_path):
        cfg = write_config(
            tmp_path, initial={"type": "random", "delta": 0.05, "mode": "mixed"},
            t_end=0.1, dt=2e-3, sample_every=10,
        )
        out = tmp_path / "r"
        assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
        snapshot = sorted(out.glob("fields_t*.csv"))[0]

        cfg2 = write_config(
            tmp_path, initial={"type": "file", "path": str(snapshot)},
            t_end=0.1, dt=2e-3, sample_every=10,
        )
        out2 = tmp_path / "r2"
        assert main(["simulate", "--config", str(cfg2), "--out", str(out2)]) == 0

    def test_soliton_pair_initial(self, tmp_path):
        cfg = write_config(
            tmp_path,
            initial={"type": "soliton-pair", "C": [1.0, 0.5], "x0": [-20.0, 0.0]},
            t_end=0.1, dt=2e-3, sample_every=50,
        )
        out = tmp_path / "pair"
        assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0


class TestSolitonCheck:
    def test_passes_for_valid_speeds(self, tmp_path):
        out = tmp_path / "sc"
        code = main(["soliton-check", "--c", "0.5,1", "--t-end", "0.5",
                     "--out", str(out)])
        assert code == 0
        lines = (out / "soliton_check.csv").read_text().splitlines()
        assert lines[0] == "C,tw_residual,propagation_error,ok"
        assert len(lines) == 3

    def test_rejects_nonpositive_speed(self, tmp_path):
        assert main(["soliton-check", "--c", "0,-1",
                     "--out", str(tmp_path / "sc")]) == 1


class TestBracketCheck:
    def test_exit_zero_and_rows(self, tmp_path):
        out = tmp_path / "bc"
        assert main(["bracket-check", "--out", str(out)]) == 0
        lines = (out / "bracket_check.csv").read_text().splitlines()
        assert lines[0] == "state,residual_half,residual_one,inferred_scale"
        assert len(lines) == 13  # soliton + trig + 10 random states
        summary = read_summary(out)
        assert all(row["inferred_scale"] == 0.5 for row in summary["bracket_check"])


class TestStability:
    def test_soliton_experiment_files(self, tmp_path):
        out = tmp_path / "st"
        code = main([
            "stability", "--experiment", "soliton", "--c", "1", "--delta", "1e-2",
            "--seeds", "2", "--t-end", "0.5", "--mode", "u-only",
            "--workers", "1", "--out", str(out),
        ])
        assert code == 0
        lines = (out / "stability.csv").read_text().splitlines()
        assert lines[0] == "t,dI,dII,tau_star,sobolev"
        for seed in (0, 1):
            seed_dir = out / f"seed_{seed:03d}"
            assert (seed_dir / "stability.csv").exists()
            assert (seed_dir / "invariants.csv").exists()
        summary = read_summary(out)
        st = summary["stability"]
        assert st["upper_ok"] and st["lower_ok"] and st["tracking_ok"]
        assert "dH" in st and "tracking_bound" in st

    def test_ground_experiment(self, tmp_path):
        out = tmp_path / "gr"
        code = main([
            "stability", "--experiment", "ground", "--delta", "1e-2",
            "--seeds", "2", "--t-end", "0.5", "--workers", "1", "--out", str(out),
        ])
        assert code == 0
        summary = read_summary(out)
        assert summary["apriori"]["ok"] is True
        assert summary["apriori"]["worst_margin"] > 0
