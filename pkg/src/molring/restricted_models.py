"""Vibronic ring models on occupation-restricted bases.

Full-Hilbert vibronic rings grow as (2 (n_max+1))^n; the physics of weak
driving and single-excitation transport lives in a tiny corner of that
space. These builders assemble the same Hamiltonian and dissipators as the
full-tensor path but on a basis capped in electronic occupation and total
vibrational quanta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix

from .coupling import CouplingMatrices
from .dynamics import Dissipator, LiouvillianSpec, PulseSpec
from .errors import ConfigurationError
from .geometry import EmitterGeometry
from .operators import RestrictedLayout, adjoint
from .vibronic import VibronicParams


@dataclass
class RestrictedRingModel:
    layout: RestrictedLayout
    spec: LiouvillianSpec
    sigma: list
    bosons: list
    numbers: list
    total_number: csr_matrix


def restricted_ring_model(geom: EmitterGeometry, couplings: CouplingMatrices,
                          vib: VibronicParams,
                          elec_max: int = 1,
                          vib_total_max: int | None = 1,
                          site_detuning: float = 0.0,
                          drive_amplitude: float = 0.0,
                          pulse: PulseSpec | None = None,
                          nbar: float = 0.0) -> RestrictedRingModel:
    """Driven vibronic ring restricted to low excitation numbers.

    ``site_detuning`` is the molecular excitation energy in the chosen
    rotating frame (for laser-frame spectra pass the negative laser
    detuning). A static ``drive_amplitude`` adds eta * sum_j (sigma_j + h.c.)
    with the pulse's spatial phases when a pulse is given, uniform phases
    otherwise; a pulse instead attaches a Gaussian time-dependent drive.
    """
    if drive_amplitude and pulse is not None:
        raise ConfigurationError("give either a static drive amplitude or a pulse")
    n = geom.count
    if couplings.n != n:
        raise ConfigurationError("couplings must cover exactly the ring emitters")
    layout = RestrictedLayout(n_sites=n, elec_min=0, elec_max=elec_max,
                              n_modes=n, n_max=vib.n_max, vib_total_max=vib_total_max)
    sig = [layout.lowering(j) for j in range(n)]
    bos = [layout.annihilation(j) for j in range(n)]
    num = [(adjoint(s) @ s).tocsr() for s in sig]
    ntot = layout.total_elec_number()

    h = csr_matrix((layout.total_dim, layout.total_dim), dtype=complex)
    for j in range(n):
        q = bos[j] + adjoint(bos[j])
        h = (h + (site_detuning + vib.lam**2 * vib.nu) * num[j]
             + vib.nu * (adjoint(bos[j]) @ bos[j])
             - vib.lam * vib.nu * (num[j] @ q))
    for i in range(n):
        for j in range(n):
            if i != j and couplings.omega[i, j] != 0.0:
                h = h + couplings.omega[i, j] * (adjoint(sig[i]) @ sig[j])

    if pulse is not None:
        phases = np.exp(-1j * 2.0 * np.pi * (geom.positions[:n] @ np.asarray(pulse.k_vector)))
    else:
        phases = np.ones(n, dtype=complex)
    d = csr_matrix((layout.total_dim, layout.total_dim), dtype=complex)
    for j in range(n):
        d = d + phases[j] * sig[j] + np.conj(phases[j]) * adjoint(sig[j])
    if drive_amplitude:
        h = h + drive_amplitude * d

    blocks = [Dissipator(couplings.gamma, sig)]
    collapse = []
    for j in range(n):
        c = bos[j]
        if vib.collapse_convention == "polaron_corrected" and vib.lam != 0.0:
            c = c - vib.lam * num[j]
        collapse.append(c.tocsr())
    if vib.gamma_nu > 0:
        blocks.append(Dissipator(vib.gamma_nu * (1.0 + nbar) * np.eye(n), collapse))
        if nbar > 0:
            blocks.append(Dissipator(vib.gamma_nu * nbar * np.eye(n),
                                     [adjoint(c) for c in collapse]))

    spec = LiouvillianSpec(h.tocsr(), tuple(blocks),
                           pulse.envelope if pulse is not None else None,
                           d.tocsr() if pulse is not None else None)
    return RestrictedRingModel(layout, spec, sig, bos, num, ntot)


def project_to_lower_electronic(model_from: RestrictedRingModel, rho: np.ndarray,
                                elec_max: int) -> tuple[RestrictedRingModel, np.ndarray, float]:
    """Project a state onto the sub-basis with at most elec_max excitations.

    Returns the smaller model-compatible layout mapping, the projected state
    and the discarded weight (useful after a pulse, when upper manifolds have
    decayed to negligible population).
    """
    src = model_from.layout
    keep = [i for i, (e, v) in enumerate(src.states) if sum(e) <= elec_max]
    rho_new = rho[np.ix_(keep, keep)].copy()
    dropped = float(np.real(np.trace(rho) - np.trace(rho_new)))
    return keep, rho_new, dropped
