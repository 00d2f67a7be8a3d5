import numpy as np
import pytest

from molring.coupling import coupling_matrices
from molring.dynamics import PulseSpec, assemble, evolve, steady_state
from molring.errors import InvalidParameterError
from molring.geometry import build_dimer, build_ring, build_ring_with_center
from molring.laser import PumpSpec, full_laser_model
from molring.observables import (absorption_spectrum, emitted_intensity,
                                 emitted_intensity_collective, fit_lorentzian, g2_zero,
                                 lorentzian, pulse_envelope)
from molring.operators import (HilbertLayout, adjoint, basis_state, expectation,
                               lowering_operator, number_operator, pure_density)
from molring.restricted_models import restricted_ring_model
from molring.vibronic import VibronicParams, bare_collective_rates


def test_single_excited_emitter_intensity():
    geom = build_ring(2, 0.05)
    cm = coupling_matrices(geom)
    layout, _ = assemble(geom, cm, mode="traced")
    rho = pure_density(basis_state(layout, [1, 0]))
    val = emitted_intensity(rho, cm, layout)
    assert abs(val - 1.0) < 1e-12


def test_bare_and_collective_intensity_agree():
    rng = np.random.default_rng(7)
    n = 4
    geom = build_ring_with_center(n, radius=0.06)
    cm = coupling_matrices(geom)
    layout, _ = assemble(geom, cm, mode="traced")
    dim = layout.total_dim
    mat = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = mat @ mat.conj().T
    rho = rho / np.trace(rho)
    a = emitted_intensity(rho, cm, layout)
    b = emitted_intensity_collective(rho, cm, layout, n, pump_index=n)
    assert abs(a - b) < 1e-10


def test_intensity_slope_sign_tracks_superradiance():
    # tight ring from full inversion: positive early slope
    geom = build_ring(4, 0.04)
    cm = coupling_matrices(geom)
    layout, spec = assemble(geom, cm, mode="traced")
    rho0 = pure_density(basis_state(layout, [1] * 4))
    ts = np.linspace(0, 0.004, 9)
    res = evolve(spec, rho0, ts)
    vals = [emitted_intensity(r, cm, layout) for r in res.states]
    assert vals[-1] > vals[0]


def test_photon_number_conservation():
    geom = build_ring(2, 0.04)
    cm = coupling_matrices(geom)
    layout, spec = assemble(geom, cm, mode="traced")
    rho0 = pure_density(basis_state(layout, [1, 1]))
    ts = np.linspace(0, 12.0, 600)
    res = evolve(spec, rho0, ts)
    intensity = np.array([emitted_intensity(r, cm, layout) for r in res.states])
    emitted = np.trapezoid(intensity, ts)
    leftover = sum(np.real(expectation(res.states[-1], number_operator(layout, j)))
                   for j in range(2))
    assert abs(emitted + leftover - 2.0) < 0.04  # two photons total


def test_g2_single_emitter_antibunched():
    layout = HilbertLayout.build(1)
    rho = np.diag([0.3, 0.7]).astype(complex)
    assert g2_zero(rho, layout, 1) == 0.0


def test_g2_two_inverted_emitters_full_interference():
    # the four-operator expectation on |ee> gives numerator 4 and
    # denominator 4, so the interference-complete g2 is 1
    layout = HilbertLayout.build(2)
    rho = pure_density(basis_state(layout, [1, 1]))
    assert abs(g2_zero(rho, layout, 2) - 1.0) < 1e-12


def test_g2_undefined_below_intensity_floor():
    layout = HilbertLayout.build(1)
    rho = np.diag([1.0, 0.0]).astype(complex)
    assert np.isnan(g2_zero(rho, layout, 1))


def test_g2_invariant_under_global_phase_rotation():
    full = full_laser_model(3, 0.05, PumpSpec(1.0, gamma_coupling=0.0))
    geom = build_ring_with_center(3, radius=0.05)
    cm = coupling_matrices(geom)
    layout, _ = assemble(geom, cm, mode="traced", pump=PumpSpec(1.0))
    ntot = None
    for j in range(4):
        op = number_operator(layout, j)
        ntot = op if ntot is None else ntot + op
    phase = 0.73
    u = np.diag(np.exp(1j * phase * ntot.diagonal()))
    rho_rot = u @ full.rho @ u.conj().T
    a = g2_zero(full.rho, layout, 4)
    b = g2_zero(rho_rot, layout, 4)
    assert abs(a - b) < 1e-10


def test_pulse_envelope_values():
    spec = PulseSpec(eta=260.0, t0=0.1, tau=0.1)
    assert abs(pulse_envelope(spec, 0.1) - 260.0) < 1e-12
    assert abs(pulse_envelope(spec, 0.2) - 260.0 / np.e) < 1e-10
    assert abs(pulse_envelope(spec, 0.0) - 260.0 / np.e) < 1e-10


def test_lorentzian_fit_recovers_parameters():
    x = np.linspace(-30, 30, 301)
    y = lorentzian(x, 2.0, 7.0, 0.03)
    c, w, h = fit_lorentzian(x, y)
    assert abs(c - 2.0) < 1e-9 and abs(w - 7.0) < 1e-8 and abs(h - 0.03) < 1e-12


def test_single_emitter_absorption_linewidth():
    geom = build_ring(2, 3.0)  # far separated: effectively independent emitters
    cm = coupling_matrices(geom)
    vib = VibronicParams(1e-9, 50.0, 10.0, n_max=1)
    dets = np.linspace(-4, 4, 81)
    out = absorption_spectrum(geom, cm, vib, dets, drive_amplitude=0.01)
    assert abs(out.fit_center) < 0.05
    assert abs(out.fit_width - 1.0) < 0.08  # natural linewidth gamma0
    assert not out.warnings


def test_absorption_peak_quadratic_in_drive():
    geom = build_ring(3, 0.05)
    cm = coupling_matrices(geom)
    vib = VibronicParams(0.1, 500.0, 50.0, n_max=1)
    from molring.vibronic import collective_energy_shifts
    center = collective_energy_shifts(cm)[0]
    dets = center + np.linspace(-8, 8, 81)
    lo = absorption_spectrum(geom, cm, vib, dets, drive_amplitude=0.005)
    hi = absorption_spectrum(geom, cm, vib, dets, drive_amplitude=0.01)
    ratio = hi.fit_height / lo.fit_height
    assert abs(ratio - 4.0) < 0.2  # quadratic in the linear-response regime


def test_absorption_grid_spacing_enforced():
    geom = build_ring(2, 3.0)
    cm = coupling_matrices(geom)
    vib = VibronicParams(1e-9, 50.0, 10.0, n_max=1)
    dets = np.linspace(-20, 20, 11)  # spacing 4 >> width/10
    with pytest.raises(InvalidParameterError):
        absorption_spectrum(geom, cm, vib, dets, drive_amplitude=0.01)
