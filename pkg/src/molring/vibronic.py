"""Vibronic analytics: Huang-Rhys machinery, Franck-Condon weights, thermal
displacement traces, renormalized couplings, collective decay rates and the
superradiance criterion.

The central quantity is the thermal displacement factor exp(-lam^2 (1+2 nbar))
that scales every two-site coherent or dissipative coupling; single-site terms
are untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .coupling import CouplingMatrices, circulant_eigenvalues, require_circulant
from .errors import InvalidParameterError

COLLAPSE_CONVENTIONS = ("polaron_corrected", "local")


@dataclass(frozen=True)
class VibronicParams:
    """Single-mode vibronic coupling parameters, rates in units of gamma0.

    ``lam`` is the dimensionless coupling (lam^2 is the Huang-Rhys factor),
    ``nu`` the vibrational frequency and ``gamma_nu`` its relaxation rate.
    ``collapse_convention`` selects the vibrational collapse operator:
    'polaron_corrected' uses b - lam * sigma^dag sigma (thermodynamically
    consistent at strong coupling), 'local' uses the bare b.
    """

    lam: float
    nu: float
    gamma_nu: float
    n_max: int = 4
    collapse_convention: str = "polaron_corrected"

    def __post_init__(self):
        if self.lam < 0:
            raise InvalidParameterError("lam must be >= 0")
        if self.nu <= 0:
            raise InvalidParameterError("nu must be > 0")
        if self.gamma_nu < 0:
            raise InvalidParameterError("gamma_nu must be >= 0")
        if self.n_max < 1:
            raise InvalidParameterError("n_max must be >= 1")
        if self.collapse_convention not in COLLAPSE_CONVENTIONS:
            raise InvalidParameterError(
                f"collapse_convention must be one of {COLLAPSE_CONVENTIONS}")

    @property
    def huang_rhys(self) -> float:
        return self.lam**2


@dataclass(frozen=True)
class ThermalEnvironment:
    """Thermal vibrational environment, held as the mean occupancy nbar."""

    nbar: float = 0.0
    temperature: float | None = None  # in units of nu, informational

    def __post_init__(self):
        if self.nbar < 0:
            raise InvalidParameterError("nbar must be >= 0")
        if self.temperature is not None and self.temperature > 0:
            implied = thermal_occupancy(1.0, self.temperature)
            if abs(implied - self.nbar) > 1e-12 * max(1.0, self.nbar):
                raise InvalidParameterError(
                    f"nbar {self.nbar} inconsistent with temperature {self.temperature}")

    @classmethod
    def from_temperature(cls, nu: float, temperature: float) -> "ThermalEnvironment":
        return cls(nbar=thermal_occupancy(nu, temperature), temperature=temperature / nu)


@dataclass(frozen=True)
class MolecularPotentialParams:
    """Displaced-oscillator description: reduced mass, equilibrium mismatch
    between ground and excited potential minima, vibrational frequency."""

    mu: float
    r_ge: float
    nu: float

    def __post_init__(self):
        if self.mu <= 0 or self.nu <= 0 or self.r_ge < 0:
            raise InvalidParameterError("mu, nu must be > 0 and r_ge >= 0")


def thermal_occupancy(nu: float, temperature: float) -> float:
    """Bose occupancy [exp(nu/T) - 1]^-1 with T in the same units as nu."""
    if nu <= 0:
        raise InvalidParameterError("nu must be > 0")
    if temperature < 0:
        raise InvalidParameterError("temperature must be >= 0")
    if temperature == 0.0:
        return 0.0
    return 1.0 / math.expm1(nu / temperature)


def huang_rhys_from_geometry(p: MolecularPotentialParams) -> float:
    """Dimensionless coupling lam = sqrt(mu*nu/2) * r_ge."""
    return math.sqrt(p.mu * p.nu / 2.0) * p.r_ge


def thermal_displacement_factor(lam: float, nbar: float, same_site: bool = False) -> float:
    """Thermal trace over a pair of displacement operators.

    1 on a single site; exp(-lam^2 (1+2 nbar)) for two distinct sites.
    """
    if lam < 0 or nbar < 0:
        raise InvalidParameterError("lam and nbar must be >= 0")
    if same_site:
        return 1.0
    return math.exp(-lam**2 * (1.0 + 2.0 * nbar))


def franck_condon_distribution(lam: float, n: int) -> float:
    """Poissonian branching weight exp(-lam^2) lam^(2n) / n!."""
    if n < 0:
        raise InvalidParameterError("n must be >= 0")
    if lam == 0.0:
        return 1.0 if n == 0 else 0.0
    return math.exp(-lam**2 + n * math.log(lam**2) - math.lgamma(n + 1))


def renormalized_couplings(cm: CouplingMatrices, lam: float, nbar: float = 0.0) -> CouplingMatrices:
    """Scale every off-diagonal coherent and dissipative rate by the thermal
    displacement factor; diagonals are untouched."""
    f = thermal_displacement_factor(lam, nbar)
    n = cm.n
    off = ~np.eye(n, dtype=bool)
    om = cm.omega.copy()
    ga = cm.gamma.copy()
    om[off] *= f
    ga[off] *= f
    return CouplingMatrices(om, ga, cm.gamma0)


def bare_collective_rates(cm: CouplingMatrices) -> np.ndarray:
    """DFT spectrum of the first gamma row: index 0 is the symmetric channel."""
    require_circulant(cm.gamma, what="gamma matrix")
    return circulant_eigenvalues(cm.gamma[0])


def collective_energy_shifts(cm: CouplingMatrices, lam: float = 0.0, nbar: float = 0.0) -> np.ndarray:
    """Collective-mode energy shifts (DFT of the renormalized omega row);
    index 0 is the symmetric mode. Add the bare transition frequency for
    absolute energies."""
    require_circulant(cm.omega, what="omega matrix")
    f = thermal_displacement_factor(lam, nbar)
    return circulant_eigenvalues(cm.omega[0] * f)


def collective_decay_rates(cm: CouplingMatrices, lam: float, nbar: float = 0.0) -> np.ndarray:
    """Vibronically renormalized collective decay rates for a perfect ring.

    Gamma_k(lam) = g0 * (1 - f) + f * Gamma_k(0) with f the thermal
    displacement factor; k = 0 is the symmetric channel. The spectrum sums to
    n * g0 for every (lam, nbar).
    """
    bare = bare_collective_rates(cm)
    f = thermal_displacement_factor(lam, nbar)
    return cm.gamma0 * (1.0 - f) + bare * f


def superradiance_criterion(bare_rates: np.ndarray, lam: float, nbar: float, n: int,
                            gamma0: float = 1.0) -> bool:
    """Geometry-plus-vibronics predicate for an initial superradiant burst.

    True iff sum_k Gamma_k(0)^2 exceeds (1 + f^2)/f^2 * n * g0^2 with
    f = exp(-lam^2 (1+2 nbar)). At lam = 0 this reduces to the bare
    two-level condition sum_k Gamma_k^2 > 2 n g0^2.
    """
    rates = np.asarray(bare_rates, dtype=float)
    if rates.shape != (n,):
        raise InvalidParameterError("bare_rates must have length n")
    f2 = thermal_displacement_factor(lam, nbar) ** 2
    return float(np.sum(rates**2)) > (1.0 + f2) / f2 * n * gamma0**2


def dicke_huang_rhys_bound(n: int) -> float:
    """Zero-distance boundary: superradiance survives while
    lam^2 (1+2 nbar) < log(n-1)/2."""
    if n < 2:
        raise InvalidParameterError("need n >= 2")
    return math.log(n - 1) / 2.0


def vibronic_params_with(vib: VibronicParams, **changes) -> VibronicParams:
    return replace(vib, **changes)
