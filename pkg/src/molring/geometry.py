"""Emitter layouts: rings, chains, dimers and the pumped ring-plus-center.

All lengths are measured in units of the transition wavelength, so the
free-space wavenumber is 2*pi. Dipole orientations are unit vectors; only
the orientation line matters downstream (axis and -axis are equivalent).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
import numpy as np

from .errors import InvalidParameterError

LayoutKind = str  # one of {"ring", "chain", "dimer", "ring_with_center"}

_POLARIZATIONS = ("perpendicular", "tangential", "radial")


@dataclass(frozen=True)
class EmitterGeometry:
    """Positions and dipole axes of a set of identical emitters.

    ``count`` is the number of ring/chain emitters; a ``ring_with_center``
    layout carries one extra emitter (the pump) at the centroid, stored last.
    """

    positions: np.ndarray          # (M, 3), units of the transition wavelength
    dipole_axes: np.ndarray        # (M, 3), unit vectors
    layout_kind: LayoutKind
    count: int

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        axes = np.asarray(self.dipole_axes, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise InvalidParameterError(f"positions must be (M, 3), got {pos.shape}")
        if axes.shape != pos.shape:
            raise InvalidParameterError("dipole_axes must match positions in shape")
        norms = np.linalg.norm(axes, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise InvalidParameterError("dipole axes must be unit vectors")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "dipole_axes", axes)

    @property
    def total_emitters(self) -> int:
        return self.positions.shape[0]

    @property
    def pump_index(self) -> int | None:
        """Index of the central pump emitter, if present."""
        return self.total_emitters - 1 if self.layout_kind == "ring_with_center" else None

    def nearest_neighbor_separation(self) -> float:
        pos = self.positions[: self.count]
        dmin = np.inf
        for i in range(len(pos)):
            for j in range(i + 1, len(pos)):
                dmin = min(dmin, float(np.linalg.norm(pos[i] - pos[j])))
        return dmin

    def to_dict(self) -> dict:
        """JSON-ready description for scenario-result metadata."""
        return {
            "layout_kind": self.layout_kind,
            "count": self.count,
            "positions": self.positions.tolist(),
            "dipole_axes": self.dipole_axes.tolist(),
        }


@dataclass(frozen=True)
class DisorderSpec:
    """Gaussian positional disorder: per-axis standard deviation ``sigma``."""

    sigma: float
    realizations: int = 1
    seed: int = 0
    axes_mask: tuple[bool, bool, bool] = (True, True, True)

    def __post_init__(self):
        if self.sigma < 0:
            raise InvalidParameterError("disorder sigma must be >= 0")
        if self.realizations < 1:
            raise InvalidParameterError("realizations must be >= 1")


def ring_radius(n: int, d: float) -> float:
    """Radius of an n-site ring with nearest-neighbor chord length d."""
    return d / (2.0 * np.sin(np.pi / n))


def _ring_positions(n: int, d: float) -> np.ndarray:
    r = ring_radius(n, d)
    ang = 2.0 * np.pi * np.arange(1, n + 1) / n
    return np.column_stack([r * np.cos(ang), r * np.sin(ang), np.zeros(n)])


def _axes_for(polarization: str, positions: np.ndarray) -> np.ndarray:
    if polarization not in _POLARIZATIONS:
        raise InvalidParameterError(f"unknown polarization {polarization!r}")
    n = positions.shape[0]
    if polarization == "perpendicular":
        return np.tile([0.0, 0.0, 1.0], (n, 1))
    radial = positions - positions.mean(axis=0)
    nrm = np.linalg.norm(radial, axis=1, keepdims=True)
    if np.any(nrm < 1e-300):
        raise InvalidParameterError("radial/tangential axes undefined at the centroid")
    radial = radial / nrm
    if polarization == "radial":
        return radial
    # tangential: rotate the radial direction by 90 degrees in the plane
    return np.column_stack([-radial[:, 1], radial[:, 0], np.zeros(n)])


def _check_positive_separation(d: float):
    if not np.isfinite(d) or d <= 0:
        raise InvalidParameterError(f"separation must be finite and > 0, got {d}")


def build_ring(n: int, d: float, polarization: str = "perpendicular") -> EmitterGeometry:
    """n emitters on a circle in the xy-plane with nearest-neighbor gap d."""
    if n < 2:
        raise InvalidParameterError("ring needs at least 2 emitters")
    _check_positive_separation(d)
    pos = _ring_positions(n, d)
    return EmitterGeometry(pos, _axes_for(polarization, pos), "ring", n)


def build_dimer(d: float, polarization: str = "perpendicular") -> EmitterGeometry:
    """Two emitters separated by d along the x-axis."""
    _check_positive_separation(d)
    pos = np.array([[-d / 2, 0.0, 0.0], [d / 2, 0.0, 0.0]])
    return EmitterGeometry(pos, _axes_for(polarization, pos), "dimer", 2)


def build_chain(n: int, d: float, polarization: str = "perpendicular") -> EmitterGeometry:
    """n emitters on a line along x with uniform spacing d."""
    if n < 2:
        raise InvalidParameterError("chain needs at least 2 emitters")
    _check_positive_separation(d)
    pos = np.column_stack([d * np.arange(n), np.zeros(n), np.zeros(n)])
    if polarization != "perpendicular":
        raise InvalidParameterError("chains support only perpendicular polarization")
    return EmitterGeometry(pos, _axes_for(polarization, pos), "chain", n)


def build_ring_with_center(n: int, *, d: float | None = None, radius: float | None = None,
                           polarization: str = "perpendicular") -> EmitterGeometry:
    """Ring of n emitters plus one pump emitter at the centroid (stored last).

    The ring is specified either by the nearest-neighbor gap ``d`` or directly
    by the ``radius`` (which is also the pump-to-ring distance).
    """
    if (d is None) == (radius is None):
        raise InvalidParameterError("give exactly one of d or radius")
    if d is None:
        _check_positive_separation(radius)
        d = 2.0 * radius * np.sin(np.pi / n)
    ring = build_ring(n, d, polarization)
    pos = np.vstack([ring.positions, [0.0, 0.0, 0.0]])
    if polarization != "perpendicular":
        raise InvalidParameterError("ring_with_center supports only perpendicular polarization")
    axes = np.vstack([ring.dipole_axes, [0.0, 0.0, 1.0]])
    return EmitterGeometry(pos, axes, "ring_with_center", n)


def disorder_rng(spec: DisorderSpec, realization_index: int) -> np.random.Generator:
    """Counter-based stream: (seed, realization index) fully determines it."""
    key = np.array([spec.seed & 0xFFFFFFFFFFFFFFFF, realization_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def apply_disorder(geom: EmitterGeometry, spec: DisorderSpec,
                   realization_index: int) -> EmitterGeometry:
    """Displace every position by an independent zero-mean normal 3-vector.

    Deterministic for fixed (seed, realization_index). The pump emitter of a
    ring_with_center layout is displaced like any other site.
    """
    if realization_index >= spec.realizations:
        raise InvalidParameterError(
            f"realization_index {realization_index} >= realizations {spec.realizations}")
    if spec.sigma == 0.0:
        return geom
    rng = disorder_rng(spec, realization_index)
    shift = rng.normal(0.0, spec.sigma, size=geom.positions.shape)
    shift *= np.asarray(spec.axes_mask, dtype=float)
    return replace(geom, positions=geom.positions + shift)
