"""Liouvillian assembly, time evolution and steady states.

The master equation is d rho/dt = i[rho, H] + sum of dissipators, each
dissipator given by a Hermitian PSD rate matrix R and a list of collapse
operators L_m:

    D[rho] = sum_mm' R_mm'/2 ( 2 L_m rho L_m'^dag - {L_m^dag L_m', rho} ).

Evolution integrates the dense density matrix with an operator-form
right-hand side (rate matrices are pre-diagonalized into weighted collapse
channels). For small time-independent generators an exact matrix-exponential
propagator is available; it is immune to the stiffness of large coherent
dipole shifts.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm
from scipy.sparse import csr_matrix, identity as sparse_identity, kron as sparse_kron
from scipy.sparse.linalg import eigs as sparse_eigs, splu

from .coupling import CouplingMatrices
from .errors import (ConfigurationError, InvalidParameterError, MultipleSteadyStatesError,
                     StiffnessError, StructureError)
from .geometry import EmitterGeometry
from .operators import (HilbertLayout, adjoint, boson_annihilation, expectation,
                        lowering_operator, validate_density_matrix)
from .vibronic import ThermalEnvironment, VibronicParams, renormalized_couplings

DEFAULT_RTOL = 1e-8
DEFAULT_ATOL = 1e-10


@dataclass(frozen=True)
class PulseSpec:
    """Gaussian laser pulse: envelope eta * exp(-((t-t0)/tau)^2).

    ``omega_l`` is the laser detuning from the bare transition (rotating
    frame); ``k_vector`` the wave vector in units of 2*pi per wavelength.
    """

    eta: float
    t0: float
    tau: float
    omega_l: float = 0.0
    k_vector: tuple[float, float, float] = (1.0, 0.0, 0.0)

    def __post_init__(self):
        if self.tau <= 0:
            raise InvalidParameterError("pulse width tau must be > 0")
        if self.eta < 0:
            raise InvalidParameterError("pulse amplitude eta must be >= 0")

    def envelope(self, t: float) -> float:
        return self.eta * np.exp(-(((t - self.t0) / self.tau) ** 2))


@dataclass(frozen=True)
class Dissipator:
    """One dissipator block: Hermitian PSD rate matrix over collapse ops."""

    rates: np.ndarray
    ops: tuple

    def __post_init__(self):
        r = np.atleast_2d(np.asarray(self.rates, dtype=complex))
        if r.shape[0] != r.shape[1] or r.shape[0] != len(self.ops):
            raise ConfigurationError("rate matrix must be square over the collapse ops")
        if len(self.ops) == 0:
            raise ConfigurationError("collapse list must be nonempty")
        if np.max(np.abs(r - r.conj().T)) > 1e-10 * max(1.0, np.max(np.abs(r))):
            raise StructureError("rate matrix must be Hermitian")
        object.__setattr__(self, "rates", r)
        object.__setattr__(self, "ops", tuple(self.ops))

    def channels(self) -> list[tuple[float, csr_matrix]]:
        """Diagonalize the rate matrix into weighted collapse channels."""
        w, v = np.linalg.eigh(self.rates)
        scale = max(1.0, float(np.max(np.abs(w))))
        if w.min() < -1e-9 * scale:
            raise StructureError(f"rate matrix not PSD (min eigenvalue {w.min():.3e})")
        out = []
        for a in range(len(w)):
            if w[a] <= 1e-14 * scale:
                continue
            c = None
            for j, op in enumerate(self.ops):
                term = v[j, a] * op
                c = term if c is None else c + term
            out.append((float(w[a]), c.tocsr()))
        return out


@dataclass(frozen=True)
class LiouvillianSpec:
    """Hamiltonian, dissipator blocks and an optional time-dependent drive.

    The drive contributes f(t) * drive_op to the Hamiltonian, with f real.
    """

    hamiltonian: csr_matrix
    dissipators: tuple = ()
    drive_envelope: Callable[[float], float] | None = None
    drive_op: csr_matrix | None = None

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def time_dependent(self) -> bool:
        return self.drive_envelope is not None

    def with_dissipators(self, dissipators) -> "LiouvillianSpec":
        return replace(self, dissipators=tuple(dissipators))


@dataclass
class EvolutionResult:
    times: np.ndarray
    states: list
    diagnostics: dict


# ---------------------------------------------------------------------------
# Model assembly
# ---------------------------------------------------------------------------

def model_layout(geom: EmitterGeometry, mode: str, vib: VibronicParams | None = None) -> HilbertLayout:
    """Tensor layout for a geometry: electronic sites first, then one boson
    mode per molecule in 'full' mode."""
    n_elec = geom.total_emitters
    if mode == "traced":
        return HilbertLayout.build(n_elec)
    if mode == "full":
        if vib is None:
            raise ConfigurationError("full mode requires VibronicParams")
        if geom.layout_kind == "ring_with_center":
            raise ConfigurationError("full vibronic mode does not support the pump layout")
        return HilbertLayout.build(n_elec, n_boson=n_elec, n_max=vib.n_max)
    raise ConfigurationError(f"unknown mode {mode!r}")


def _effective_couplings(couplings: CouplingMatrices, mode: str,
                         vib: VibronicParams | None,
                         thermal: ThermalEnvironment | None) -> CouplingMatrices:
    if mode != "traced" or vib is None or vib.lam == 0.0:
        return couplings
    nbar = thermal.nbar if thermal is not None else 0.0
    return renormalized_couplings(couplings, vib.lam, nbar)


def build_hamiltonian(geom: EmitterGeometry, couplings: CouplingMatrices,
                      vib: VibronicParams | None = None,
                      thermal: ThermalEnvironment | None = None,
                      pulse: PulseSpec | None = None,
                      pump=None,
                      mode: str = "traced",
                      site_detuning: float = 0.0,
                      layout: HilbertLayout | None = None) -> LiouvillianSpec:
    """Hamiltonian part of the master equation, in a rotating frame.

    The bare transition frequency maps to ``site_detuning`` (default 0); with
    a pulse present the frame co-rotates with the laser, so each molecular
    site picks up an extra -pulse.omega_l. Traced mode renormalizes the
    coherent couplings by the thermal displacement factor; full mode adds the
    per-molecule vibrational and vibronic-coupling terms.
    """
    if layout is None:
        layout = model_layout(geom, mode, vib)
    eff = _effective_couplings(couplings, mode, vib, thermal)
    n_elec = geom.total_emitters
    if eff.n != n_elec:
        raise ConfigurationError("coupling matrices do not match the geometry")

    sig = [lowering_operator(layout, j) for j in range(n_elec)]
    num = [adjoint(s) @ s for s in sig]

    delta = site_detuning - (pulse.omega_l if pulse is not None else 0.0)
    h = csr_matrix((layout.total_dim, layout.total_dim), dtype=complex)
    for i in range(n_elec):
        for j in range(n_elec):
            if i != j and eff.omega[i, j] != 0.0:
                h = h + eff.omega[i, j] * (adjoint(sig[i]) @ sig[j])
    if delta != 0.0:
        for j in range(n_elec):
            h = h + delta * num[j]

    if mode == "full":
        bos = [boson_annihilation(layout, n_elec + j) for j in range(n_elec)]
        for j in range(n_elec):
            bdag_b = adjoint(bos[j]) @ bos[j]
            q = bos[j] + adjoint(bos[j])
            h = (h + vib.lam**2 * vib.nu * num[j] + vib.nu * bdag_b
                 - vib.lam * vib.nu * (num[j] @ q))

    if pump is not None:
        p = geom.pump_index
        if p is None:
            raise ConfigurationError("pump requires a ring_with_center geometry")
        if pump.omega_p != 0.0:
            h = h + pump.omega_p * num[p]

    drive_env = None
    drive_op = None
    if pulse is not None:
        phases = np.exp(-1j * 2.0 * np.pi * (geom.positions[:geom.count] @ np.asarray(pulse.k_vector)))
        d = csr_matrix((layout.total_dim, layout.total_dim), dtype=complex)
        for j in range(geom.count):
            d = d + phases[j] * sig[j] + np.conj(phases[j]) * adjoint(sig[j])
        drive_op = d.tocsr()
        drive_env = pulse.envelope

    return LiouvillianSpec(h.tocsr(), (), drive_env, drive_op)


def build_dissipators(geom: EmitterGeometry, couplings: CouplingMatrices,
                      vib: VibronicParams | None = None,
                      thermal: ThermalEnvironment | None = None,
                      pump=None,
                      mode: str = "traced",
                      layout: HilbertLayout | None = None) -> tuple:
    """Dissipator blocks for the chosen mode.

    traced: electronic collapse operators under the (renormalized) rate
    matrix. full: bare electronic rate matrix plus per-molecule vibrational
    relaxation with the configured collapse convention; a thermal environment
    adds the upward channels. A pump adds the inverted-emission channel on
    the central site; its mutual ring coupling rides in the rate matrix.
    """
    if layout is None:
        layout = model_layout(geom, mode, vib)
    eff = _effective_couplings(couplings, mode, vib, thermal)
    n_elec = geom.total_emitters
    sig = [lowering_operator(layout, j) for j in range(n_elec)]
    blocks = [Dissipator(eff.gamma, sig)]

    if mode == "full":
        nbar = thermal.nbar if thermal is not None else 0.0
        bos = [boson_annihilation(layout, n_elec + j) for j in range(n_elec)]
        collapse = []
        for j in range(n_elec):
            c = bos[j]
            if vib.collapse_convention == "polaron_corrected" and vib.lam != 0.0:
                c = c - vib.lam * (adjoint(sig[j]) @ sig[j])
            collapse.append(c.tocsr())
        if vib.gamma_nu > 0:
            down = vib.gamma_nu * (1.0 + nbar) * np.eye(n_elec)
            blocks.append(Dissipator(down, collapse))
            if nbar > 0:
                up = vib.gamma_nu * nbar * np.eye(n_elec)
                blocks.append(Dissipator(up, [adjoint(c) for c in collapse]))
    elif mode != "traced":
        raise ConfigurationError(f"unknown mode {mode!r}")

    if pump is not None:
        p = geom.pump_index
        if p is None:
            raise ConfigurationError("pump requires a ring_with_center geometry")
        if pump.eta_p > 0:
            blocks.append(Dissipator(np.array([[pump.eta_p]]), [adjoint(sig[p])]))
    return tuple(blocks)


def assemble(geom: EmitterGeometry, couplings: CouplingMatrices, *,
             mode: str = "traced",
             vib: VibronicParams | None = None,
             thermal: ThermalEnvironment | None = None,
             pulse: PulseSpec | None = None,
             pump=None,
             site_detuning: float = 0.0) -> tuple[HilbertLayout, LiouvillianSpec]:
    """Layout plus complete LiouvillianSpec for a standard model."""
    layout = model_layout(geom, mode, vib)
    ham = build_hamiltonian(geom, couplings, vib, thermal, pulse, pump, mode,
                            site_detuning, layout)
    diss = build_dissipators(geom, couplings, vib, thermal, pump, mode, layout)
    return layout, ham.with_dissipators(diss)


# ---------------------------------------------------------------------------
# Evolution
# ---------------------------------------------------------------------------

def _rhs_parts(spec: LiouvillianSpec):
    w_sum = csr_matrix((spec.dim, spec.dim), dtype=complex)
    channels = []
    for block in spec.dissipators:
        for w, c in block.channels():
            cd = adjoint(c)
            channels.append((w, c, cd.T.tocsr()))
            w_sum = w_sum + w * (cd @ c)
    k = (-1j * spec.hamiltonian - 0.5 * w_sum).tocsr()
    kd = adjoint(k)
    return k, kd, channels


def evolve(spec: LiouvillianSpec, rho0: np.ndarray, t_grid: Sequence[float],
           rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
           method: str = "DOP853", validate_initial: bool = True) -> EvolutionResult:
    """Integrate rho(t) on an increasing time grid.

    No trace renormalization is applied; the trace drift is reported as a
    diagnostic. Integrator failure raises StiffnessError.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or np.any(np.diff(t_grid) <= 0):
        raise InvalidParameterError("t_grid must be strictly increasing")
    if validate_initial:
        validate_density_matrix(rho0)
    dim = spec.dim
    if rho0.shape != (dim, dim):
        raise InvalidParameterError("rho0 dimension mismatch")

    k, kd, channels = _rhs_parts(spec)
    drive_op = spec.drive_op
    drive_env = spec.drive_envelope
    drive_opT = drive_op.T.tocsr() if drive_op is not None else None

    def rhs(t, y):
        rho = y.reshape(dim, dim)
        out = k @ rho + (kd.T @ rho.T).T
        for w, c, cdT in channels:
            out += w * (c @ (cdT @ rho.T).T)
        if drive_op is not None:
            f = drive_env(t)
            if f != 0.0:
                out += (-1j * f) * (drive_op @ rho) + (1j * f) * (drive_opT @ rho.T).T
        return out.ravel()

    start = t_grid[0]
    sol = solve_ivp(rhs, (start, t_grid[-1]), rho0.astype(complex).ravel(),
                    t_eval=t_grid, method=method, rtol=rtol, atol=atol)
    if sol.status != 0 or sol.y.shape[1] != len(t_grid):
        raise StiffnessError(
            f"integration failed ({sol.message}); consider loosening rtol/atol "
            f"or shortening the horizon")
    states = [sol.y[:, i].reshape(dim, dim) for i in range(len(t_grid))]
    traces = np.array([abs(np.trace(s) - np.trace(rho0)) for s in states])
    final = states[-1]
    herm = float(np.max(np.abs(final - final.conj().T)))
    min_eig = float(np.linalg.eigvalsh(0.5 * (final + final.conj().T)).min())
    diagnostics = {
        "trace_drift_max": float(traces.max()),
        "final_hermiticity_deviation": herm,
        "final_min_eigenvalue": min_eig,
        "nfev": int(sol.nfev),
        "method": method,
        "rtol": rtol,
        "atol": atol,
    }
    return EvolutionResult(t_grid, states, diagnostics)


def propagate_expm(spec: LiouvillianSpec, rho0: np.ndarray, t_grid: Sequence[float],
                   max_vec_dim: int = 2600) -> EvolutionResult:
    """Exact propagation on a uniform grid via one matrix exponential.

    Only for time-independent generators on small spaces; immune to coherent
    stiffness, so suited to deeply subwavelength (huge dipole shift) runs.
    """
    if spec.time_dependent:
        raise ConfigurationError("propagate_expm requires a time-independent generator")
    t_grid = np.asarray(t_grid, dtype=float)
    steps = np.diff(t_grid)
    if len(t_grid) < 2 or np.any(steps <= 0) or np.max(np.abs(steps - steps[0])) > 1e-9 * steps[0]:
        raise InvalidParameterError("t_grid must be uniform and increasing")
    dim = spec.dim
    if dim * dim > max_vec_dim**2:
        raise ConfigurationError(f"space too large for dense expm (dim {dim})")
    lmat = liouvillian_matrix(spec).toarray()
    prop = expm(lmat * steps[0])
    y = rho0.astype(complex).ravel()
    states = [y.reshape(dim, dim).copy()]
    for _ in range(len(t_grid) - 1):
        y = prop @ y
        states.append(y.reshape(dim, dim).copy())
    final = states[-1]
    diagnostics = {
        "trace_drift_max": float(max(abs(np.trace(s) - np.trace(rho0)) for s in states)),
        "final_hermiticity_deviation": float(np.max(np.abs(final - final.conj().T))),
        "final_min_eigenvalue": float(np.linalg.eigvalsh(0.5 * (final + final.conj().T)).min()),
        "nfev": 0,
        "method": "expm",
    }
    return EvolutionResult(t_grid, states, diagnostics)


# ---------------------------------------------------------------------------
# Superoperator and steady states
# ---------------------------------------------------------------------------

def liouvillian_matrix(spec: LiouvillianSpec, drive_value: float | None = None) -> csr_matrix:
    """Sparse superoperator in row-major vec convention (A rho B -> kron(A, B^T)).

    ``drive_value`` freezes the drive envelope at a constant, if present.
    """
    k, _, channels = _rhs_parts(spec)
    if spec.drive_op is not None:
        f = 0.0 if drive_value is None else drive_value
        if f != 0.0:
            k = (k - 1j * f * spec.drive_op).tocsr()
    dim = spec.dim
    eye = sparse_identity(dim, format="csr")
    lmat = sparse_kron(k, eye, format="csr") + sparse_kron(eye, k.conj(), format="csr")
    for w, c, _ in channels:
        lmat = lmat + w * sparse_kron(c, c.conj(), format="csr")
    return lmat.tocsr()


DIRECT_SOLVE_MAX_DIM = 64


def steady_state(spec: LiouvillianSpec, check_unique: bool = True,
                 t_chunk: float = 20.0, max_chunks: int = 200,
                 residual_tol: float = 1e-10) -> np.ndarray:
    """Unit-trace null vector of the Liouvillian.

    Direct sparse solve (one row replaced by the trace functional) for
    Hilbert dimension <= 64; otherwise long-time integration from the
    maximally mixed state until ||d rho/dt||_1 < residual_tol.
    """
    if spec.time_dependent:
        raise ConfigurationError("steady_state requires a time-independent generator")
    dim = spec.dim
    if dim <= DIRECT_SOLVE_MAX_DIM:
        lmat = liouvillian_matrix(spec)
        n2 = dim * dim
        diag_idx = np.arange(dim) * dim + np.arange(dim)
        lsolve = lmat.tolil()
        lsolve[0, :] = 0.0
        for i in diag_idx:
            lsolve[0, i] = 1.0
        b = np.zeros(n2, dtype=complex)
        b[0] = 1.0
        try:
            x = splu(lsolve.tocsc()).solve(b)
        except RuntimeError as exc:
            raise MultipleSteadyStatesError(f"singular steady-state system: {exc}") from exc
        rho = x.reshape(dim, dim)
        rho = 0.5 * (rho + rho.conj().T)
        rho = rho / np.trace(rho)
        resid = float(np.max(np.abs(lmat @ rho.ravel())))
        scale = max(1.0, float(np.max(np.abs(lmat.data))))
        if resid > 1e-8 * scale:
            raise MultipleSteadyStatesError(
                f"steady-state solve residual {resid:.2e}; null space may be degenerate")
        if check_unique:
            _check_null_space_unique(lmat)
        return rho
    # integration fallback: march in chunks at tight tolerance until the
    # generator residual (entrywise supremum) drops below residual_tol
    rho = np.eye(dim, dtype=complex) / dim
    k, kd, channels = _rhs_parts(spec)

    def deriv(rho):
        out = k @ rho + (kd.T @ rho.T).T
        for w, c, cdT in channels:
            out += w * (c @ (cdT @ rho.T).T)
        return out

    for _ in range(max_chunks):
        res = evolve(spec, rho, np.array([0.0, t_chunk]), rtol=1e-10, atol=1e-13,
                     validate_initial=False)
        rho = res.states[-1]
        if float(np.max(np.abs(deriv(rho)))) < residual_tol:
            rho = 0.5 * (rho + rho.conj().T)
            return rho / np.trace(rho)
    raise StiffnessError("steady-state integration did not converge")


def _check_null_space_unique(lmat: csr_matrix, tol: float = 1e-9):
    n2 = lmat.shape[0]
    if n2 < 9:
        w = np.linalg.eigvals(lmat.toarray())
        zeros = np.sum(np.abs(w) < tol)
    else:
        try:
            w = sparse_eigs(lmat.tocsc(), k=min(2, n2 - 2), sigma=tol,
                            return_eigenvectors=False)
        except Exception:
            return  # uniqueness probe is best-effort
        zeros = np.sum(np.abs(w) < tol)
    if zeros > 1:
        raise MultipleSteadyStatesError(
            f"Liouvillian null space appears {zeros}-fold degenerate")


def steady_state_observable(spec: LiouvillianSpec, op, **kwargs) -> complex:
    return expectation(steady_state(spec, **kwargs), op)
