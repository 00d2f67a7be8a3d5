"""Collective electronic and vibrational basis for rings.

The mode operators are discrete-Fourier combinations of the site lowering
operators, A_k = (1/sqrt(n)) sum_j sigma_j exp(+2 pi i j k / n) with j
starting at 1; k = 0 is the symmetric operator S. The same phase convention
is used for collective vibrational quadratures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix

from .coupling import CouplingMatrices
from .errors import InvalidParameterError
from .operators import HilbertLayout, RestrictedLayout, adjoint, lowering_operator
from .vibronic import bare_collective_rates


@dataclass(frozen=True)
class CollectiveMode:
    k: int
    energy_shift: float
    decay: float


@dataclass(frozen=True)
class DickeCoefficients:
    """Ladder coefficients alpha_m^(+-) for the maximal-spin (Dicke) states.

    Indexed by m = -n/2 .. n/2 in half-integer steps; both ladder ends close
    (alpha^(+) vanishes at the top, alpha^(-) at the bottom).
    """

    n: int
    m_values: np.ndarray
    alpha_minus: np.ndarray
    alpha_plus: np.ndarray

    def minus(self, m: float) -> float:
        i = int(round(m + self.n / 2))
        return float(self.alpha_minus[i])

    def plus(self, m: float) -> float:
        i = int(round(m + self.n / 2))
        return float(self.alpha_plus[i])


def mode_phases(n: int, k: int) -> np.ndarray:
    j = np.arange(1, n + 1)
    return np.exp(2j * np.pi * j * k / n)


def collective_operator(layout: HilbertLayout | RestrictedLayout, n: int, k: int) -> csr_matrix:
    """A_k on the first n two-level sites of the layout; k = 0 gives S."""
    if not 0 <= k < n:
        raise InvalidParameterError(f"mode index k={k} outside 0..{n - 1}")
    phases = mode_phases(n, k) / np.sqrt(n)
    if isinstance(layout, RestrictedLayout):
        ops = [layout.lowering(j) for j in range(n)]
    else:
        ops = [lowering_operator(layout, j) for j in range(n)]
    out = None
    for j in range(n):
        term = phases[j] * ops[j]
        out = term if out is None else out + term
    return out.tocsr()


def symmetric_operator(layout, n: int) -> csr_matrix:
    return collective_operator(layout, n, 0)


def dicke_ladder(n: int) -> DickeCoefficients:
    """alpha_m^(+-) = sqrt((n/2 -+ m)(n/2 +- m + 1)) / sqrt(n)."""
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    m = np.arange(-n / 2, n / 2 + 1)
    minus = np.sqrt(np.clip((n / 2 + m) * (n / 2 - m + 1), 0.0, None) / n)
    plus = np.sqrt(np.clip((n / 2 - m) * (n / 2 + m + 1), 0.0, None) / n)
    return DickeCoefficients(n, m, minus, plus)


def branching_rates(n: int, couplings: CouplingMatrices, m: float) -> tuple[float, np.ndarray]:
    """State-dependent loss rates from the Dicke state |n/2, m>.

    Returns (symmetric-channel rate, array of the n-1 dark-channel rates):
    the symmetric channel carries alpha_m^2 * Gamma_S, each dark channel
    alpha_m^2 * Gamma_k / (n-1), with the bare (lam = 0) collective rates.
    """
    rates = bare_collective_rates(couplings)
    if len(rates) != n:
        raise InvalidParameterError("coupling matrices do not match n")
    a2 = dicke_ladder(n).minus(m) ** 2
    gamma_s = a2 * rates[0]
    gamma_dark = a2 * rates[1:] / (n - 1)
    return float(gamma_s), gamma_dark


def vibronic_collective_coupling(n: int, lam: float, nu: float, n_vib: int = 0) -> float:
    """Coupling of the symmetric mode with n_vib vibrational quanta to any
    dark mode carrying one more: sqrt((n_vib + 1)/n) * lam * nu."""
    if n_vib < 0:
        raise InvalidParameterError("n_vib must be >= 0")
    return np.sqrt((n_vib + 1) / n) * lam * nu


def mode_populations(rho: np.ndarray, layout, n: int) -> np.ndarray:
    """<A_k^dag A_k> for k = 0..n-1."""
    pops = np.empty(n)
    for k in range(n):
        ak = collective_operator(layout, n, k)
        op = (adjoint(ak) @ ak).tocsr()
        pops[k] = float(np.real(op.multiply(rho.T).sum()))
    return pops
