"""Vacuum-mediated dipole-dipole rates between identical emitters.

For a pair separated by r with common dipole axis at angle theta to the
separation vector, and x = 2*pi*r (lengths in wavelength units):

    Omega = (3/4)*g0*[ (1-3cos^2)(sin x/x^2 + cos x/x^3) - sin^2 * cos x/x ]
    Gamma = (3/2)*g0*[ (1-3cos^2)(cos x/x^2 - sin x/x^3) + sin^2 * sin x/x ]

The combination cos x/x^2 - sin x/x^3 cancels catastrophically for small x
and is evaluated by its series there, so the x -> 0 limit Gamma -> g0 holds
to machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, SingularSeparationError, StructureError
from .geometry import EmitterGeometry

K0 = 2.0 * np.pi  # wavenumber in wavelength units

_SERIES_CUTOFF = 0.1


def _cos_sin_kernel(x: float) -> float:
    """cos(x)/x**2 - sin(x)/x**3, stable at small x."""
    if x > _SERIES_CUTOFF:
        return np.cos(x) / x**2 - np.sin(x) / x**3
    x2 = x * x
    # sum_{k>=1} (-1)^k x^(2k-2) (2k)/(2k+1)!
    return -1.0 / 3.0 + x2 * (1.0 / 30.0 + x2 * (-1.0 / 840.0 + x2 * (1.0 / 45360.0 - x2 / 3991680.0)))


def _sinc(x: float) -> float:
    return np.sin(x) / x if x > 1e-6 else 1.0 - x * x / 6.0


def pair_rates(r_i, r_j, dipole_axis, gamma0: float = 1.0) -> tuple[float, float]:
    """Coherent and dissipative rates (Omega_ij, Gamma_ij) for one pair.

    Both emitters must share the dipole axis (identical molecules); theta is
    the angle between that axis and r_i - r_j.
    """
    rvec = np.asarray(r_i, dtype=float) - np.asarray(r_j, dtype=float)
    r = float(np.linalg.norm(rvec))
    if r == 0.0 or not np.isfinite(r):
        raise SingularSeparationError("coincident emitters: dipole-dipole kernels diverge")
    axis = np.asarray(dipole_axis, dtype=float)
    cos2 = float(np.dot(axis, rvec) / (np.linalg.norm(axis) * r)) ** 2
    sin2 = 1.0 - cos2
    x = K0 * r
    a = 1.0 - 3.0 * cos2
    omega = 0.75 * gamma0 * (a * (np.sin(x) / x**2 + np.cos(x) / x**3) - sin2 * np.cos(x) / x)
    gamma = 1.5 * gamma0 * (a * _cos_sin_kernel(x) + sin2 * _sinc(x))
    return omega, gamma


@dataclass(frozen=True)
class CouplingMatrices:
    """Pairwise rate matrices in units of the single-emitter decay rate.

    ``omega`` has an exactly zero diagonal; ``gamma`` carries gamma0 on the
    diagonal and must be (numerically) positive semidefinite.
    """

    omega: np.ndarray
    gamma: np.ndarray
    gamma0: float = 1.0

    def __post_init__(self):
        om = np.asarray(self.omega, dtype=float)
        ga = np.asarray(self.gamma, dtype=float)
        if om.shape != ga.shape or om.ndim != 2 or om.shape[0] != om.shape[1]:
            raise InvalidParameterError("omega and gamma must be square and congruent")
        if np.max(np.abs(om - om.T)) > 1e-12 or np.max(np.abs(ga - ga.T)) > 1e-12:
            raise StructureError("coupling matrices must be symmetric")
        if np.max(np.abs(np.diag(om))) != 0.0:
            raise StructureError("omega diagonal must vanish")
        if np.max(np.abs(np.diag(ga) - self.gamma0)) > 1e-12:
            raise StructureError("gamma diagonal must equal gamma0")
        if om.shape[0] <= 512:
            wmin = float(np.linalg.eigvalsh(ga).min())
            if wmin < -1e-9:
                raise StructureError(f"gamma is not PSD (min eigenvalue {wmin:.3e})")
        object.__setattr__(self, "omega", om)
        object.__setattr__(self, "gamma", ga)

    @property
    def n(self) -> int:
        return self.omega.shape[0]


def _require_parallel_axes(axes: np.ndarray):
    ref = axes[0]
    dots = np.abs(axes @ ref)
    if np.any(dots < 1.0 - 1e-12):
        raise StructureError(
            "dipole axes are not pairwise parallel; tensor kernels for "
            "non-parallel dipoles are unsupported")


def coupling_matrices(geom: EmitterGeometry, gamma0: float = 1.0) -> CouplingMatrices:
    """Evaluate pair_rates on every emitter pair of a geometry."""
    _require_parallel_axes(geom.dipole_axes)
    m = geom.total_emitters
    om = np.zeros((m, m))
    ga = gamma0 * np.eye(m)
    for i in range(m):
        for j in range(i + 1, m):
            o, g = pair_rates(geom.positions[i], geom.positions[j], geom.dipole_axes[0], gamma0)
            om[i, j] = om[j, i] = o
            ga[i, j] = ga[j, i] = g
    return CouplingMatrices(om, ga, gamma0)


def is_circulant(mat: np.ndarray, tol: float = 1e-10) -> bool:
    n = mat.shape[0]
    first = mat[0]
    for i in range(1, n):
        if np.max(np.abs(mat[i] - np.roll(first, i))) > tol:
            return False
    return True


def require_circulant(mat: np.ndarray, tol: float = 1e-10, what: str = "matrix") -> None:
    if not is_circulant(mat, tol):
        raise StructureError(f"{what} is not circulant; ring-only analysis does not apply")


def circulant_eigenvalues(row: np.ndarray) -> np.ndarray:
    """Real DFT spectrum sum_j row[j-1] * exp(i 2 pi (j-1) k / n) of a symmetric row."""
    vals = np.fft.fft(row)
    if np.max(np.abs(vals.imag)) > 1e-9 * max(1.0, np.max(np.abs(vals.real))):
        raise StructureError("circulant spectrum unexpectedly complex; row not symmetric")
    return vals.real.copy()
