import json
from pathlib import Path

import numpy as np
import pytest

from ckdv_plots import ContractError, FigureRequest, render
from ckdv_plots.cli import main
from ckdv_plots.io import relative_drift_series

INVARIANT_HEADER = "t,H,V,H1,Hhalf_1,Hhalf_2,M_11,M_12,M_21,M_22,sobolev,apriori_bound"
STABILITY_HEADER = "t,dI,dII,tau_star,sobolev"
FIELDS_HEADER = "x,u,phi_1,phi_2"


def write_csv(path: Path, header: str, rows: np.ndarray) -> None:
    lines = [header] + [",".join(f"{v:.17g}" for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


@pytest.fixture()
def run_dir(tmp_path):
    """Synthetic run directory obeying the documented output contract."""
    rng = np.random.default_rng(0)
    t = np.linspace(0.0, 10.0, 21)

    base = np.array([-14.4, 24.0, 12.0, 0.31, -0.12, 0.05, 0.011, -0.009, 0.02])
    rows = []
    for ti in t:
        wobble = 1.0 + 3e-10 * np.sin(0.7 * ti) + 1e-10 * rng.standard_normal()
        quantities = base * wobble
        sobolev = 5.3666 + 1e-9 * np.sin(ti)
        rows.append([ti, *quantities, sobolev, 9.49621])
    write_csv(tmp_path / "invariants.csv", INVARIANT_HEADER, np.array(rows))

    srows = []
    for ti in t:
        d2 = 0.009 + 0.001 * np.sin(0.3 * ti)
        srows.append([ti, 0.01, d2, 0.1 * ti, 5.3666])
    write_csv(tmp_path / "stability.csv", STABILITY_HEADER, np.array(srows))

    x = np.linspace(-20.0, 20.0, 128, endpoint=False)
    for ti in (0.0, 5.0, 10.0):
        u = 3.0 / np.cosh((x - ti) / 2) ** 2
        phi = 0.01 * np.exp(-((x - 1) ** 2))
        write_csv(
            tmp_path / f"fields_t{ti:.3f}.csv",
            FIELDS_HEADER,
            np.column_stack([x, u, phi, 0.5 * phi]),
        )

    drifts = {}
    data = np.array(rows)
    for j, name in enumerate(["H", "V", "H1", "Hhalf_1", "Hhalf_2",
                              "M_11", "M_12", "M_21", "M_22"]):
        drifts[name if name in ("H", "V", "H1") else name] = float(
            relative_drift_series(data[:, 1 + j]).max()
        )
    summary = {
        "config": {"experiment": {"kind": "soliton", "C": 1.0}},
        "drifts": {
            "H": drifts["H"],
            "V": drifts["V"],
            "H1": drifts["H1"],
            "Hhalf_max": max(drifts["Hhalf_1"], drifts["Hhalf_2"]),
            "M_max": max(drifts[k] for k in ("M_11", "M_12", "M_21", "M_22")),
        },
        "apriori": {"d": 8.48528, "e": 9.6, "bound": 9.49621, "ok": True,
                    "worst_margin": 4.13},
        "stability": {"dH": 9.9e-5, "upper_ok": True, "lower_ok": True,
                      "tracking_ok": True, "tracking_bound": 0.0244},
        "wall_seconds": 1.0,
        "exit_code": 0,
    }
    (tmp_path / "summary.json").write_text(json.dumps(summary))
    return tmp_path


class TestInvariantDrift:
    def test_renders_and_reports_max_drift(self, run_dir, tmp_path):
        out = tmp_path / "fig" / "drift.png"
        request = FigureRequest("invariant-drift", run_dir, out)
        max_drift = render(request)
        assert out.exists() and out.stat().st_size > 0
        summary = json.loads((run_dir / "summary.json").read_text())
        assert max_drift == pytest.approx(max(summary["drifts"].values()), rel=1e-12)

    def test_exact_zero_drift_rendered_at_floor(self, tmp_path):
        t = np.linspace(0, 1, 5)
        rows = [[ti, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
                for ti in t]
        write_csv(tmp_path / "invariants.csv", INVARIANT_HEADER, np.array(rows))
        out = tmp_path / "zero.png"
        max_drift = render(FigureRequest("invariant-drift", tmp_path, out))
        assert out.exists()
        assert max_drift == 0.0

    def test_missing_column_rejected(self, tmp_path):
        bad = "t,H,V\n0,1,2\n1,1,2\n"
        (tmp_path / "invariants.csv").write_text(bad)
        with pytest.raises(ContractError, match="missing required column"):
            render(FigureRequest("invariant-drift", tmp_path, tmp_path / "x.png"))

    def test_missing_component_columns_rejected(self, tmp_path):
        bad = "t,H,V,H1,sobolev,apriori_bound\n0,1,2,3,4,5\n"
        (tmp_path / "invariants.csv").write_text(bad)
        with pytest.raises(ContractError, match="Hhalf"):
            render(FigureRequest("invariant-drift", tmp_path, tmp_path / "x.png"))

    def test_malformed_body_rejected(self, tmp_path):
        (tmp_path / "invariants.csv").write_text(
            INVARIANT_HEADER + "\n0,oops,1,2,3,4,5,6,7,8,9,10\n"
        )
        with pytest.raises(ContractError, match="malformed"):
            render(FigureRequest("invariant-drift", tmp_path, tmp_path / "x.png"))


class TestWaterfall:
    def test_renders_all_snapshots(self, run_dir, tmp_path):
        out = tmp_path / "wf.png"
        count = render(FigureRequest("waterfall", run_dir, out))
        assert count == 3
        assert out.exists() and out.stat().st_size > 0

    def test_single_snapshot_static_profile(self, tmp_path):
        x = np.linspace(-10, 10, 64, endpoint=False)
        u = 1.0 / np.cosh(x) ** 2
        write_csv(tmp_path / "fields_t0.000.csv", FIELDS_HEADER,
                  np.column_stack([x, u, 0 * x, 0 * x]))
        out = tmp_path / "wf1.png"
        assert render(FigureRequest("waterfall", tmp_path, out)) == 1
        assert out.exists()

    def test_no_snapshots_rejected(self, tmp_path):
        with pytest.raises(ContractError, match="snapshots"):
            render(FigureRequest("waterfall", tmp_path, tmp_path / "x.png"))


class TestStabilityFigure:
    def test_bound_line_from_summary(self, run_dir, tmp_path):
        out = tmp_path / "track.png"
        top = render(FigureRequest("dII-vs-t", run_dir, out))
        assert out.exists()
        assert top == pytest.approx(0.0244)  # the annotated bound dominates

    def test_flatline_series(self, run_dir, tmp_path):
        rows = [[ti, 0.0, 1e-9, 0.0, 5.3666] for ti in np.linspace(0, 10, 11)]
        write_csv(run_dir / "stability.csv", STABILITY_HEADER, np.array(rows))
        out = tmp_path / "flat.png"
        render(FigureRequest("dII-vs-t", run_dir, out))
        assert out.exists()

    def test_per_seed_layout(self, run_dir, tmp_path):
        seed_dir = run_dir / "seed_000"
        seed_dir.mkdir()
        (run_dir / "stability.csv").rename(seed_dir / "stability.csv")
        out = tmp_path / "seeds.png"
        render(FigureRequest("dII-vs-t", run_dir, out))
        assert out.exists()


class TestBoundCheck:
    def test_margin_positive(self, run_dir, tmp_path):
        out = tmp_path / "bound.png"
        margin = render(FigureRequest("bound-check", run_dir, out))
        assert out.exists()
        assert margin > 4.0


class TestCli:
    def test_all_kinds(self, run_dir, tmp_path):
        for kind in ("invariant-drift", "waterfall", "dII-vs-t", "bound-check"):
            out = tmp_path / f"{kind}.png"
            assert main([kind, "--in", str(run_dir), "--out", str(out)]) == 0
            assert out.exists()

    def test_print_max_drift(self, run_dir, tmp_path, capsys):
        out = tmp_path / "d.png"
        assert main(["invariant-drift", "--in", str(run_dir), "--out", str(out),
                     "--print-max-drift"]) == 0
        printed = float(capsys.readouterr().out.strip())
        summary = json.loads((run_dir / "summary.json").read_text())
        assert printed == pytest.approx(max(summary["drifts"].values()), rel=1e-12)

    def test_missing_inputs_exit_one(self, tmp_path):
        assert main(["waterfall", "--in", str(tmp_path),
                     "--out", str(tmp_path / "x.png")]) == 1

    def test_regeneration_deterministic_payload(self, run_dir, tmp_path):
        # identical inputs produce identical images modulo raster metadata;
        # SVG output strips the nondeterministic surface entirely
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        assert main(["bound-check", "--in", str(run_dir), "--out", str(a)]) == 0
        assert main(["bound-check", "--in", str(run_dir), "--out", str(b)]) == 0
        strip = lambda p: "\n".join(
            line for line in p.read_text().splitlines()
            if "metadata" not in line and "dc:date" not in line
            and "url(#" not in line and "id=" not in line
        )
        assert len(strip(a)) == len(strip(b))
