"""Incoherently pumped nanoring light source.

A central gain emitter couples to the symmetric ring mode with a sqrt(n)
collective enhancement. The module provides the literal closed reduced
equations for (pump population, symmetric population, cross coherence), the
analytic steady state for vanishing mutual pump-ring dissipation, and the
full (N+1)-emitter master-equation model with vibronically renormalized
rates.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .collective import symmetric_operator
from .coupling import CouplingMatrices, coupling_matrices
from .dynamics import assemble, steady_state
from .errors import ConfigurationError, InvalidParameterError
from .geometry import EmitterGeometry, build_ring_with_center
from .operators import adjoint, expectation, lowering_operator, number_operator
from .vibronic import ThermalEnvironment, VibronicParams, \
    collective_decay_rates, collective_energy_shifts, thermal_displacement_factor


@dataclass(frozen=True)
class PumpSpec:
    """Incoherent pump on the central emitter.

    ``eta_p`` is the inverted-emission rate, ``omega_p`` the pump transition
    detuning in the rotating frame. ``omega_coupling``/``gamma_coupling``
    optionally override the geometric pump-ring rates (per ring emitter).
    """

    eta_p: float
    omega_p: float = 0.0
    omega_coupling: float | None = None
    gamma_coupling: float | None = None

    def __post_init__(self):
        if self.eta_p < 0:
            raise InvalidParameterError("eta_p must be >= 0")


@dataclass(frozen=True)
class ReducedState:
    """Closure variables: pump population, symmetric population, coherence."""

    pp: float
    ss: float
    sp: complex

    def __post_init__(self):
        if self.pp < -1e-9 or self.ss < -1e-9:
            raise InvalidParameterError("populations must be non-negative")


def _reduced_matrix(n: int, eta_p: float, omega_p_coupling: float, gamma_p: float,
                    gamma_s: float, omega_s: float, gamma0: float = 1.0):
    """Linear system d/dt (pp, ss, Re sp, Im sp) = A x + b, transcribed
    literally from the closed symmetric-subspace equations."""
    rt_n = np.sqrt(n)
    gbar = gamma0 + eta_p + gamma_s
    a = np.array([
        [-(gamma0 + eta_p), 0.0, -gamma_p, -2.0 * rt_n * omega_p_coupling],
        [0.0, -gamma_s, -gamma_p, 2.0 * rt_n * omega_p_coupling],
        [-gamma_p / 2.0, -gamma_p / 2.0, -gbar / 2.0, omega_s],
        [rt_n * omega_p_coupling, -rt_n * omega_p_coupling, -omega_s, -gbar / 2.0],
    ])
    b = np.array([eta_p, 0.0, 0.0, 0.0])
    return a, b


def reduced_odes(n: int, pump: PumpSpec, gamma_s: float, omega_s: float,
                 t_grid=None, gamma0: float = 1.0) -> ReducedState | list[ReducedState]:
    """Solve the closed pump-ring equations.

    With ``t_grid`` None, returns the steady state (linear solve); otherwise
    integrates from the ground state and returns one ReducedState per time.
    The weak-excitation closure assumes the ring stays near its ground state;
    validity is not enforced here.
    """
    omega_p = pump.omega_coupling if pump.omega_coupling is not None else 0.0
    gamma_p = pump.gamma_coupling if pump.gamma_coupling is not None else 0.0
    a, b = _reduced_matrix(n, pump.eta_p, omega_p, gamma_p, gamma_s, omega_s, gamma0)
    if t_grid is None:
        try:
            x = np.linalg.solve(a, -b)
        except np.linalg.LinAlgError as exc:
            raise ConfigurationError(f"singular reduced steady-state system: {exc}") from exc
        return ReducedState(float(x[0]), float(x[1]), complex(x[2], x[3]))
    w, v = np.linalg.eig(a)
    vinv = np.linalg.inv(v)
    x_inf = np.linalg.solve(a, -b)
    coeff = vinv @ (-x_inf)
    states = []
    for t in np.asarray(t_grid, dtype=float):
        x = np.real(v @ (coeff * np.exp(w * t))) + x_inf
        states.append(ReducedState(float(x[0]), float(x[1]), complex(x[2], x[3])))
    return states


def analytic_steady_state(n: int, eta_p: float, omega_p_coupling: float,
                          gamma_s: float, omega_s: float, gamma0: float = 1.0) -> float:
    """Closed-form <S^dag S> for vanishing mutual pump-ring dissipation:

        n Gbar eta_p Wp^2 / ( Gs (g0 + eta_p) [ (Gbar/2)^2 + Ws^2 ]
                              + Gbar^2 n Wp^2 ),   Gbar = g0 + eta_p + Gs.
    """
    gbar = gamma0 + eta_p + gamma_s
    num = n * gbar * eta_p * omega_p_coupling**2
    den = (gamma_s * (gamma0 + eta_p) * ((gbar / 2.0) ** 2 + omega_s**2)
           + gbar**2 * n * omega_p_coupling**2)
    return num / den if den > 0 else 0.0


@dataclass
class LaserSteadyState:
    rho: np.ndarray
    ss: float
    pp: float
    sp: complex
    total_excitation: float
    intensity: float
    intensity_symmetric: float
    g2: float
    omega_p_coupling: float
    gamma_p_coupling: float
    gamma_s: float
    omega_s: float


def _pump_ring_couplings(geom: EmitterGeometry, couplings: CouplingMatrices,
                         pump: PumpSpec) -> CouplingMatrices:
    """Apply pump-ring symmetry checks and optional overrides."""
    p = geom.pump_index
    n = geom.count
    om = couplings.omega.copy()
    ga = couplings.gamma.copy()
    if np.max(np.abs(om[p, :n] - om[p, 0])) > 1e-12 * max(1.0, abs(om[p, 0])):
        raise ConfigurationError("pump-ring coherent couplings are not symmetric")
    if np.max(np.abs(ga[p, :n] - ga[p, 0])) > 1e-12 * max(1.0, abs(ga[p, 0])):
        raise ConfigurationError("pump-ring dissipative couplings are not symmetric")
    if pump.omega_coupling is not None:
        om[p, :n] = om[:n, p] = pump.omega_coupling
    if pump.gamma_coupling is not None:
        ga[p, :n] = ga[:n, p] = pump.gamma_coupling
    return CouplingMatrices(om, ga, couplings.gamma0)


def full_laser_model(n: int, radius: float, pump: PumpSpec, lam: float = 0.0,
                     nbar: float = 0.0, gamma0: float = 1.0,
                     check_unique: bool = False) -> LaserSteadyState:
    """Steady state of the full (n+1)-emitter pump-ring master equation.

    The ring is simulated electronic-only with all couplings renormalized by
    the thermal displacement factor; the pump sits at the centroid, a ring
    radius from every ring emitter. Overrides in ``pump`` replace the
    geometric pump-ring rates (the gamma_coupling = 0 switch recovers the
    analytic steady-state case).
    """
    geom = build_ring_with_center(n, radius=radius)
    cm = _pump_ring_couplings(geom, coupling_matrices(geom, gamma0), pump)
    vib = VibronicParams(lam, 1.0, 0.0, n_max=1) if lam > 0 else None
    thermal = ThermalEnvironment(nbar=nbar)
    layout, spec = assemble(geom, cm, mode="traced", vib=vib, thermal=thermal, pump=pump)
    rho = steady_state(spec, check_unique=check_unique)
    return _laser_observables(rho, geom, cm, pump, lam, nbar, layout)


def _laser_observables(rho, geom, cm, pump, lam, nbar, layout) -> LaserSteadyState:
    from .observables import emitted_intensity, g2_zero  # local import, no cycle at import time

    n = geom.count
    p = geom.pump_index
    f = thermal_displacement_factor(lam, nbar)
    s_op = symmetric_operator(layout, n)
    sig_p = lowering_operator(layout, p)
    ss = float(np.real(expectation(rho, (adjoint(s_op) @ s_op).tocsr())))
    pp = float(np.real(expectation(rho, (adjoint(sig_p) @ sig_p).tocsr())))
    sp = complex(expectation(rho, (adjoint(s_op) @ sig_p).tocsr()))
    exc = sum(float(np.real(expectation(rho, number_operator(layout, j))))
              for j in range(geom.total_emitters))
    ring_cm = CouplingMatrices(cm.omega[:n, :n], cm.gamma[:n, :n], cm.gamma0)
    gamma_s_lam = collective_decay_rates(ring_cm, lam, nbar)[0]
    omega_s_lam = collective_energy_shifts(ring_cm, lam, nbar)[0]
    from .vibronic import renormalized_couplings
    eff = renormalized_couplings(cm, lam, nbar) if lam > 0 else cm
    intensity = emitted_intensity(rho, eff, layout)
    g2 = g2_zero(rho, layout, geom.total_emitters)
    return LaserSteadyState(
        rho=rho, ss=ss, pp=pp, sp=sp, total_excitation=exc,
        intensity=intensity, intensity_symmetric=float(gamma_s_lam * ss), g2=g2,
        omega_p_coupling=float(eff.omega[p, 0]), gamma_p_coupling=float(eff.gamma[p, 0]),
        gamma_s=float(gamma_s_lam), omega_s=float(omega_s_lam))


def ring_collective_rates(n: int, radius: float, lam: float = 0.0, nbar: float = 0.0,
                          gamma0: float = 1.0) -> tuple[float, float, float, float]:
    """(Gamma_S^lam, Omega_S^lam, Omega_p^lam, Gamma_p^lam) from the geometry."""
    geom = build_ring_with_center(n, radius=radius)
    cm = coupling_matrices(geom, gamma0)
    ring_cm = CouplingMatrices(cm.omega[:n, :n], cm.gamma[:n, :n], gamma0)
    f = thermal_displacement_factor(lam, nbar)
    gamma_s = collective_decay_rates(ring_cm, lam, nbar)[0]
    omega_s = collective_energy_shifts(ring_cm, lam, nbar)[0]
    p = geom.pump_index
    return (float(gamma_s), float(omega_s),
            float(cm.omega[p, 0] * f), float(cm.gamma[p, 0] * f))


def detect_threshold(omega_p_values: np.ndarray, ss_values: np.ndarray,
                     slope_change: float = 2.0) -> dict:
    """Locate the knee of a log-log input-output curve.

    Returns the local slopes and the coupling at the largest slope drop;
    a threshold is reported when the early slope exceeds the late slope by
    at least ``slope_change``.
    """
    x = np.log(np.asarray(omega_p_values, dtype=float))
    y = np.log(np.asarray(ss_values, dtype=float))
    slopes = np.diff(y) / np.diff(x)
    mids = np.exp(0.5 * (x[1:] + x[:-1]))
    curv = np.diff(slopes)
    knee = float(mids[1:][np.argmin(curv)]) if len(curv) else float("nan")
    detected = bool(slopes[0] >= slope_change * max(slopes[-1], 1e-12)) if len(slopes) >= 2 else False
    return {"slopes": slopes, "midpoints": mids, "threshold_coupling": knee,
            "detected": detected, "early_slope": float(slopes[0]), "late_slope": float(slopes[-1])}
