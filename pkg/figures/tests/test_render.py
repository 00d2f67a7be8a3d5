import json
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from molring_figures import FIGURE_KINDS, FigureJob, RenderError, load_manifest, render
from molring_figures.cli import main as cli_main


def write_csv(path: Path, columns, rows):
    with open(path, "w") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def make_manifest(tmp_path: Path, scenario: str, files, config=None) -> Path:
    payload = {"scenario": scenario, "config": config or {"scenario": scenario},
               "files": files, "diagnostics": {},
               "provenance": {"package_version": "test"}}
    p = tmp_path / "manifest.json"
    p.write_text(json.dumps(payload, indent=2))
    return p


@pytest.fixture
def dicke_manifest(tmp_path):
    ts = np.linspace(0, 1.5, 40)
    for nbar in (0.0, 1.0):
        rows = zip(ts, 8 * np.exp(-ts) * (1 + 6 * ts * np.exp(-nbar)), ts * 0, ts * 0)
        write_csv(tmp_path / f"trace_nbar_{nbar:g}.csv",
                  ["t", "intensity", "symmetric_population", "total_excitation"], rows)
    files = [{"path": f"trace_nbar_{nbar:g}.csv", "kind": "intensity_trace",
              "columns": ["t", "intensity", "symmetric_population", "total_excitation"]}
             for nbar in (0.0, 1.0)]
    return make_manifest(tmp_path, "dicke_decay", files,
                         {"scenario": "dicke_decay", "nbar_values": [0.0, 1.0]})


def synthetic_manifest(tmp_path: Path, kind: str) -> Path:
    if kind == "dicke_decay":
        ts = np.linspace(0, 1.5, 30)
        write_csv(tmp_path / "trace_nbar_0.csv",
                  ["t", "intensity", "symmetric_population", "total_excitation"],
                  zip(ts, np.exp(-ts) * 8, ts * 0 + 1, ts * 0 + 2))
        files = [{"path": "trace_nbar_0.csv", "kind": "intensity_trace",
                  "columns": ["t", "intensity", "symmetric_population", "total_excitation"]}]
        return make_manifest(tmp_path, kind, files,
                             {"scenario": kind, "nbar_values": [0.0]})
    if kind == "pulsed_ring":
        ts = np.linspace(0, 25, 60)
        write_csv(tmp_path / "trap_trace.csv", ["t", "total_excitation"],
                  zip(ts, 0.5 * np.exp(-0.02 * ts) + 1e-4))
        files = [{"path": "trap_trace.csv", "kind": "population_trace",
                  "columns": ["t", "total_excitation"]}]
        return make_manifest(tmp_path, kind, files)
    if kind == "dispersion":
        ks = np.arange(-10, 11)
        rows = [(k, k / 21.0, np.cos(np.pi * k / 10.0), abs(k) * 0.1 + 1e-3,
                 1.0 if abs(k) <= 2 else 0.0) for k in ks]
        write_csv(tmp_path / "dispersion.csv",
                  ["k", "q_d_over_2pi", "energy_shift", "decay_rate", "bright"], rows)
        files = [{"path": "dispersion.csv", "kind": "dispersion_table",
                  "columns": ["k", "q_d_over_2pi", "energy_shift", "decay_rate", "bright"]}]
        return make_manifest(tmp_path, kind, files)
    if kind == "dimer_transfer":
        ts = np.linspace(0, 6, 50)
        pe = np.exp(-2 * ts)
        pa = 1 - np.exp(-1.5 * ts)
        write_csv(tmp_path / "transfer_trace.csv",
                  ["t", "p_e", "p_s", "p_a", "p_e_rate", "p_s_rate", "p_a_rate"],
                  zip(ts, pe, 0.02 * pe, pa, pe, 0.02 * pe, pa))
        files = [{"path": "transfer_trace.csv", "kind": "population_trace",
                  "columns": ["t", "p_e", "p_s", "p_a",
                              "p_e_rate", "p_s_rate", "p_a_rate"]}]
        return make_manifest(tmp_path, kind, files)
    if kind == "ring_absorption":
        dets = np.linspace(150, 250, 60)
        pops = 0.01 / (1 + ((dets - 200) / 10) ** 2)
        write_csv(tmp_path / "absorption.csv", ["detuning", "excited_population"],
                  zip(dets, pops))
        (tmp_path / "absorption_report.json").write_text(json.dumps(
            {"fit_center": 200.0, "fit_width": 20.0, "fit_height": 0.01}))
        files = [{"path": "absorption.csv", "kind": "spectrum",
                  "columns": ["detuning", "excited_population"]},
                 {"path": "absorption_report.json", "kind": "report", "columns": []}]
        return make_manifest(tmp_path, kind, files)
    if kind == "nanoring_laser":
        omega = np.logspace(-1, 1, 25)
        ss = omega**2 / (1 + 25 * omega**2) * 5
        write_csv(tmp_path / "reduced_sweep.csv",
                  ["omega_p", "ss_reduced", "ss_closed_form", "pp", "re_sp", "im_sp"],
                  zip(omega, ss, ss, ss, 0 * ss, 0 * ss))
        etas = np.array([0.1, 0.3, 1.0])
        write_csv(tmp_path / "full_vs_reduced.csv",
                  ["eta_p", "ss_full", "ss_reduced", "pp_full", "pp_reduced",
                   "total_excitation", "intensity", "intensity_symmetric", "g2"],
                  zip(etas, etas * 0.1, etas * 0.1, etas * 0.2, etas * 0.2,
                      etas * 0.3, etas, etas, etas * 0 + 1))
        ms = np.arange(-6, 8)
        write_csv(tmp_path / "branching.csv",
                  ["m", "gamma_s_m", "sum_gamma_dark_m", "ratio"],
                  zip(ms, np.abs(ms) + 1.0, np.abs(ms) * 0.1 + 0.01,
                      (np.abs(ms) + 1.0) / (np.abs(ms) * 0.1 + 0.01)))
        files = [
            {"path": "reduced_sweep.csv", "kind": "laser_sweep",
             "columns": ["omega_p", "ss_reduced", "ss_closed_form", "pp", "re_sp", "im_sp"]},
            {"path": "full_vs_reduced.csv", "kind": "laser_comparison",
             "columns": ["eta_p", "ss_full", "ss_reduced", "pp_full", "pp_reduced",
                         "total_excitation", "intensity", "intensity_symmetric", "g2"]},
            {"path": "branching.csv", "kind": "branching_table",
             "columns": ["m", "gamma_s_m", "sum_gamma_dark_m", "ratio"]},
        ]
        return make_manifest(tmp_path, kind, files)
    raise AssertionError(kind)


@pytest.mark.parametrize("kind", FIGURE_KINDS)
def test_each_kind_renders(tmp_path, kind):
    manifest = synthetic_manifest(tmp_path, kind)
    out = tmp_path / f"{kind}.png"
    result = render(FigureJob(manifest, kind, out))
    assert result.exists() and result.stat().st_size > 0


@pytest.mark.parametrize("kind", FIGURE_KINDS)
def test_axis_units_embedded(tmp_path, kind):
    # render to SVG so the label text is inspectable in the output
    manifest = synthetic_manifest(tmp_path, kind)
    out = tmp_path / f"{kind}.svg"
    render(FigureJob(manifest, kind, out))
    text = out.read_text()
    assert "Gamma" in text or "\\Gamma_0" in text or "Γ" in text
    if kind == "dispersion":
        assert "wavelength" in text  # length axis carries the wavelength unit


def test_rendering_is_deterministic(tmp_path):
    manifest = synthetic_manifest(tmp_path, "dispersion")
    a = tmp_path / "a.png"
    b = tmp_path / "b.png"
    render(FigureJob(manifest, "dispersion", a))
    render(FigureJob(manifest, "dispersion", b))
    assert a.read_bytes() == b.read_bytes()


def test_missing_column_fails_loudly(tmp_path):
    manifest = synthetic_manifest(tmp_path, "dispersion")
    # tamper: drop the decay_rate column from the CSV
    path = tmp_path / "dispersion.csv"
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    keep = [i for i, c in enumerate(header) if c != "decay_rate"]
    tampered = ["\n".join([",".join(line.split(",")[i] for i in keep) for line in lines])]
    path.write_text(tampered[0])
    with pytest.raises(RenderError, match="decay_rate"):
        render(FigureJob(manifest, "dispersion", tmp_path / "out.png"))
    assert not (tmp_path / "out.png").exists()


def test_empty_manifest_rejected(tmp_path):
    p = make_manifest(tmp_path, "dispersion", [])
    with pytest.raises(RenderError, match="no output files"):
        render(FigureJob(p, "dispersion", tmp_path / "x.png"))


def test_missing_trace_file_rejected(tmp_path):
    files = [{"path": "gone.csv", "kind": "dispersion_table",
              "columns": ["k", "q_d_over_2pi", "energy_shift", "decay_rate", "bright"]}]
    p = make_manifest(tmp_path, "dispersion", files)
    with pytest.raises(RenderError, match="missing file"):
        render(FigureJob(p, "dispersion", tmp_path / "x.png"))


def test_unknown_kind_rejected(tmp_path):
    p = synthetic_manifest(tmp_path, "dispersion")
    with pytest.raises(RenderError, match="unknown figure kind"):
        FigureJob(p, "heatmap", tmp_path / "x.png")


def test_cli_roundtrip(tmp_path, capsys):
    manifest = synthetic_manifest(tmp_path, "dimer_transfer")
    out = tmp_path / "fig.png"
    code = cli_main(["--manifest", str(manifest), "--kind", "dimer_transfer",
                     "--out", str(out)])
    assert code == 0 and out.exists()
    bad = cli_main(["--manifest", str(tmp_path / "none.json"), "--kind",
                    "dimer_transfer", "--out", str(out)])
    assert bad == 2
    assert "error" in capsys.readouterr().err


@pytest.mark.skipif(shutil.which("molring") is None,
                    reason="primary CLI not installed; contract exercised synthetically")
def test_integration_against_primary_cli(tmp_path):
    # talk to the primary only through its CLI and files, never by import
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenario": "dispersion", "n": 24, "d": 0.05,
                               "lam": 0.15}))
    out_dir = tmp_path / "run"
    subprocess.run(["molring", "run", str(cfg), "--out-dir", str(out_dir)],
                   check=True, capture_output=True)
    fig = tmp_path / "dispersion.png"
    render(FigureJob(out_dir / "manifest.json", "dispersion", fig))
    assert fig.stat().st_size > 0
