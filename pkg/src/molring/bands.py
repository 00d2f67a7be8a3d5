"""Single-excitation band structure: non-Hermitian effective Hamiltonian,
complex dispersion and bright/dark classification.

In the single-excitation manifold the master equation reduces to the
effective Hamiltonian H_eff = (delta - i g0/2) on the diagonal and
(Omega^lam - i Gamma^lam / 2) off it. Modes with |k| <= ceil(n d) lie inside
the light cone and radiate; the rest are guided and inherit only the
vibronic decay floor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .coupling import CouplingMatrices
from .errors import StructureError
from .geometry import EmitterGeometry
from .vibronic import renormalized_couplings


@dataclass(frozen=True)
class DispersionResult:
    """Complex band structure of a ring, sorted into the first Brillouin zone."""

    k_values: np.ndarray        # 0, +-1, ..., +-ceil((n-1)/2)
    quasimomenta: np.ndarray    # q = 2 pi k / (n d)
    energy_shifts: np.ndarray
    decay_rates: np.ndarray
    bright_cutoff: int

    @property
    def n(self) -> int:
        return len(self.k_values)

    @property
    def bright_mask(self) -> np.ndarray:
        return np.abs(self.k_values) <= self.bright_cutoff

    def mode(self, k: int):
        i = int(np.where(self.k_values == k)[0][0])
        return self.k_values[i], self.energy_shifts[i], self.decay_rates[i]

    def rows(self):
        for i in range(self.n):
            yield (int(self.k_values[i]), float(self.quasimomenta[i]),
                   float(self.energy_shifts[i]), float(self.decay_rates[i]),
                   bool(self.bright_mask[i]))


def effective_hamiltonian(couplings: CouplingMatrices, lam: float = 0.0,
                          nbar: float = 0.0, site_detuning: float = 0.0) -> np.ndarray:
    """Dense non-Hermitian single-excitation Hamiltonian (rotating frame)."""
    eff = renormalized_couplings(couplings, lam, nbar) if lam > 0 else couplings
    n = eff.n
    h = eff.omega - 0.5j * eff.gamma
    h = h + np.eye(n) * site_detuning  # diagonal: detuning - i gamma0/2 (gamma diag carries gamma0)
    return h.astype(complex)


def bright_mode_cutoff(n: int, d: float) -> int:
    """ceil(n d) with a guard against floating-point ties."""
    return int(np.ceil(n * d - 1e-12))


def _bz_fold(n: int) -> np.ndarray:
    ks = np.arange(n)
    return np.where(ks <= n // 2, ks, ks - n)


def dispersion(geom: EmitterGeometry, couplings: CouplingMatrices, lam: float = 0.0,
               nbar: float = 0.0) -> DispersionResult:
    """Diagonalize the effective Hamiltonian of a ring and label the modes.

    Eigenvalues come from dense non-Hermitian diagonalization; mode indices k
    are assigned by maximum overlap with the discrete-Fourier vectors (an
    assignment problem, so band crossings cannot scramble labels).
    """
    if geom.layout_kind not in ("ring", "dimer"):
        raise StructureError("dispersion is defined for ring geometries")
    n = geom.count
    d = geom.nearest_neighbor_separation()
    h = effective_hamiltonian(couplings, lam, nbar)
    evals, evecs = np.linalg.eig(h)

    j = np.arange(1, n + 1)
    ks = _bz_fold(n)
    fourier = np.exp(2j * np.pi * np.outer(j, ks) / n) / np.sqrt(n)  # columns: modes
    overlap = np.abs(fourier.conj().T @ evecs) ** 2                   # (mode, eigvec)
    row, col = linear_sum_assignment(-overlap)
    order = np.empty(n, dtype=int)
    order[row] = col
    evals = evals[order]

    shifts = evals.real
    decays = -2.0 * evals.imag
    if decays.min() < -1e-9:
        raise StructureError(f"negative mode decay rate {decays.min():.3e}")
    q = 2.0 * np.pi * ks / (n * d)
    srt = np.argsort(ks)
    return DispersionResult(ks[srt], q[srt], shifts[srt], decays[srt],
                            bright_mode_cutoff(n, d))


def dispersion_csv_rows(result: DispersionResult, d: float):
    """Rows (k, q*d/2pi, shift, decay, bright) for serialization."""
    for k, q, shift, decay, bright in result.rows():
        yield k, q * d / (2.0 * np.pi), shift, decay, int(bright)
