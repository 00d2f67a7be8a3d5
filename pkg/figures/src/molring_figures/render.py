"""Render publication-style figures from molring scenario manifests.

The renderer is a pure consumer of the result-file contract: a manifest JSON
listing CSV/JSON outputs with their columns, plus the echoed scenario config.
It never recomputes physics; fitted curves are drawn from reported fit
parameters. Axis labels carry the simulation units (rates in units of the
single-emitter decay rate, written g0; lengths in wavelengths).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

FIGURE_KINDS = ("dicke_decay", "pulsed_ring", "dispersion", "dimer_transfer",
                "ring_absorption", "nanoring_laser")

GAMMA0 = r"$\Gamma_0$"
_SAVEFIG_METADATA = {"Software": "molring-figures"}


class RenderError(RuntimeError):
    """A manifest or data file violates the rendering contract."""


@dataclass(frozen=True)
class FigureJob:
    manifest_path: Path
    kind: str
    output_path: Path
    style: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise RenderError(f"unknown figure kind {self.kind!r}; "
                              f"expected one of {FIGURE_KINDS}")


@dataclass
class Manifest:
    scenario: str
    config: dict
    files: list
    base_dir: Path

    def entries(self, kind: str | None = None) -> list[dict]:
        if kind is None:
            return list(self.files)
        return [f for f in self.files if f.get("kind") == kind]

    def load_csv(self, entry: dict) -> dict[str, np.ndarray]:
        path = self.base_dir / entry["path"]
        if not path.exists():
            raise RenderError(f"manifest references missing file {entry['path']}")
        with open(path) as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise RenderError(f"{entry['path']} is empty")
            rows = [row for row in reader]
        declared = entry.get("columns") or []
        missing = [c for c in declared if c not in header]
        if missing:
            raise RenderError(f"{entry['path']} lacks declared columns {missing}")
        if not rows:
            raise RenderError(f"{entry['path']} has a header but no data rows")
        data = np.array(rows, dtype=float)
        return {name: data[:, i] for i, name in enumerate(header)}

    def load_json(self, name: str) -> dict:
        path = self.base_dir / name
        if not path.exists():
            raise RenderError(f"manifest references missing file {name}")
        return json.loads(path.read_text())


def load_manifest(path: str | Path) -> Manifest:
    path = Path(path)
    if not path.exists():
        raise RenderError(f"manifest not found: {path}")
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise RenderError(f"manifest is not valid JSON: {exc}") from exc
    for key in ("scenario", "config", "files"):
        if key not in payload:
            raise RenderError(f"manifest lacks required key {key!r}")
    if not payload["files"]:
        raise RenderError("manifest lists no output files; nothing to render")
    return Manifest(payload["scenario"], payload["config"], payload["files"], path.parent)


def _require_columns(data: dict, columns: list[str], context: str):
    missing = [c for c in columns if c not in data]
    if missing:
        raise RenderError(f"{context}: missing columns {missing}")


def _save(fig, output_path: Path):
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    # deterministic output: fix the writer metadata, suppress timestamps
    if output_path.suffix.lower() == ".svg":
        metadata = {"Date": None, "Creator": "molring-figures"}
    else:
        metadata = dict(_SAVEFIG_METADATA)
    fig.savefig(output_path, dpi=160, metadata=metadata)
    plt.close(fig)


def _render_dicke_decay(man: Manifest, job: FigureJob):
    traces = man.entries("intensity_trace")
    if not traces:
        raise RenderError("dicke_decay manifest carries no intensity traces")
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    nbars = man.config.get("nbar_values")
    for i, entry in enumerate(traces):
        data = man.load_csv(entry)
        _require_columns(data, ["t", "intensity"], entry["path"])
        label = (rf"$\bar n = {nbars[i]:g}$" if nbars and i < len(nbars)
                 else Path(entry["path"]).stem)
        ax.plot(data["t"], data["intensity"], label=label)
    ax.set_xlabel(rf"time  ($1/${GAMMA0})")
    ax.set_ylabel(rf"emitted intensity  ({GAMMA0})")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    _save(fig, job.output_path)


def _render_pulsed_ring(man: Manifest, job: FigureJob):
    traces = man.entries("intensity_trace") + man.entries("population_trace")
    if not traces:
        raise RenderError("pulsed_ring manifest carries no trace files")
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    logy = False
    for entry in traces:
        data = man.load_csv(entry)
        if entry["kind"] == "intensity_trace":
            _require_columns(data, ["t", "intensity"], entry["path"])
            ax.plot(data["t"], data["intensity"], label="emitted intensity")
            ax.set_ylabel(rf"emitted intensity  ({GAMMA0})")
        else:
            _require_columns(data, ["t", "total_excitation"], entry["path"])
            ax.plot(data["t"], data["total_excitation"], label="excited population")
            ax.set_ylabel("total excited population")
            logy = True
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(rf"time  ($1/${GAMMA0})")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    _save(fig, job.output_path)


def _render_dispersion(man: Manifest, job: FigureJob):
    entries = man.entries("dispersion_table")
    if not entries:
        raise RenderError("dispersion manifest carries no dispersion table")
    data = man.load_csv(entries[0])
    _require_columns(data, ["k", "q_d_over_2pi", "energy_shift", "decay_rate", "bright"],
                     entries[0]["path"])
    order = np.argsort(data["q_d_over_2pi"])
    q = data["q_d_over_2pi"][order]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.4, 3.4))
    bright = data["bright"][order] > 0.5
    for ax, values, label in ((ax1, data["energy_shift"][order], rf"energy shift  ({GAMMA0})"),
                              (ax2, data["decay_rate"][order], rf"decay rate  ({GAMMA0})")):
        if bright.any():
            ax.axvspan(q[bright].min(), q[bright].max(), color="0.88", zorder=0)
        ax.plot(q, values, ".", ms=3)
        ax.set_xlabel(r"$q d / 2\pi$  (lengths in wavelengths)")
        ax.set_ylabel(label)
    ax2.set_yscale("log")
    fig.tight_layout()
    _save(fig, job.output_path)


def _render_dimer_transfer(man: Manifest, job: FigureJob):
    entries = man.entries("population_trace")
    if not entries:
        raise RenderError("dimer_transfer manifest carries no population trace")
    data = man.load_csv(entries[0])
    _require_columns(data, ["t", "p_e", "p_s", "p_a"], entries[0]["path"])
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    for col, label in (("p_e", "doubly excited"), ("p_s", "bright"), ("p_a", "dark")):
        line, = ax.plot(data["t"], data[col], label=label)
        overlay = f"{col}_rate"
        if overlay in data:
            ax.plot(data["t"], data[overlay], "-.", color=line.get_color(), lw=1)
    ax.set_xlabel(rf"time  ($1/${GAMMA0})")
    ax.set_ylabel("population")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    _save(fig, job.output_path)


def _render_ring_absorption(man: Manifest, job: FigureJob):
    entries = man.entries("spectrum")
    if not entries:
        raise RenderError("ring_absorption manifest carries no spectrum")
    data = man.load_csv(entries[0])
    _require_columns(data, ["detuning", "excited_population"], entries[0]["path"])
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.plot(data["detuning"], data["excited_population"], ".", ms=4, label="steady state")
    try:
        rep = man.load_json("absorption_report.json")
    except RenderError:
        rep = None
    if rep:
        x = np.linspace(data["detuning"].min(), data["detuning"].max(), 400)
        hw = rep["fit_width"] / 2.0
        fit = rep["fit_height"] * hw**2 / ((x - rep["fit_center"]) ** 2 + hw**2)
        ax.plot(x, fit, "-.", lw=1.2,
                label=rf"Lorentzian fit, width ${rep['fit_width']:.1f}\,${GAMMA0}")
    ax.set_xlabel(rf"laser detuning  ({GAMMA0})")
    ax.set_ylabel("excited population")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    _save(fig, job.output_path)


def _render_nanoring_laser(man: Manifest, job: FigureJob):
    sweep = man.entries("laser_sweep")
    comparison = man.entries("laser_comparison")
    branching = man.entries("branching_table")
    if not (sweep or comparison or branching):
        raise RenderError("nanoring_laser manifest carries no laser tables")
    panels = sum(bool(x) for x in (sweep, comparison, branching))
    fig, axes = plt.subplots(1, panels, figsize=(4.0 * panels, 3.4))
    axes = np.atleast_1d(axes)
    i = 0
    if sweep:
        data = man.load_csv(sweep[0])
        _require_columns(data, ["omega_p", "ss_reduced"], sweep[0]["path"])
        ax = axes[i]; i += 1
        ax.loglog(data["omega_p"], data["ss_reduced"], label="reduced model")
        if "ss_closed_form" in data:
            ax.loglog(data["omega_p"], data["ss_closed_form"], "-.", label="closed form")
        ax.set_xlabel(rf"pump-ring coupling  ({GAMMA0})")
        ax.set_ylabel("symmetric-mode population")
        ax.legend(frameon=False, fontsize=8)
    if comparison:
        data = man.load_csv(comparison[0])
        _require_columns(data, ["eta_p", "ss_full", "ss_reduced", "g2"],
                         comparison[0]["path"])
        ax = axes[i]; i += 1
        ax.plot(data["eta_p"], data["ss_full"], "o-", label="full model")
        ax.plot(data["eta_p"], data["ss_reduced"], "-.", label="reduced model")
        ax2 = ax.twinx()
        ax2.plot(data["eta_p"], data["g2"], ":", color="0.4")
        ax2.set_ylabel(r"$g^{(2)}(0)$")
        ax.set_xlabel(rf"pump rate  ({GAMMA0})")
        ax.set_ylabel("symmetric-mode population")
        ax.legend(frameon=False, fontsize=8)
    if branching:
        data = man.load_csv(branching[0])
        _require_columns(data, ["m", "gamma_s_m", "sum_gamma_dark_m"], branching[0]["path"])
        ax = axes[i]
        ax.semilogy(data["m"], data["gamma_s_m"], "o-", label="symmetric channel")
        ax.semilogy(data["m"], np.maximum(data["sum_gamma_dark_m"], 1e-300),
                    "s-", label="dark channels")
        ax.set_xlabel("inversion quantum number m")
        ax.set_ylabel(rf"state-dependent decay rate  ({GAMMA0})")
        ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    _save(fig, job.output_path)


_RENDERERS = {
    "dicke_decay": _render_dicke_decay,
    "pulsed_ring": _render_pulsed_ring,
    "dispersion": _render_dispersion,
    "dimer_transfer": _render_dimer_transfer,
    "ring_absorption": _render_ring_absorption,
    "nanoring_laser": _render_nanoring_laser,
}


def render(job: FigureJob) -> Path:
    """Render one figure kind from a manifest; returns the image path."""
    man = load_manifest(job.manifest_path)
    _RENDERERS[job.kind](man, job)
    out = Path(job.output_path)
    if not out.exists() or out.stat().st_size == 0:
        raise RenderError(f"rendering produced no output at {out}")
    return out
