import numpy as np
import pytest

from molring.bands import bright_mode_cutoff, dispersion, effective_hamiltonian
from molring.coupling import coupling_matrices
from molring.geometry import build_dimer, build_ring
from molring.vibronic import collective_decay_rates, collective_energy_shifts


def test_effective_hamiltonian_dimer_closed_form():
    cm = coupling_matrices(build_dimer(0.04))
    h = effective_hamiltonian(cm)
    w = np.linalg.eigvals(h)
    om, g12 = cm.omega[0, 1], cm.gamma[0, 1]
    expected = np.array([om - 0.5j * (1 + g12), -om - 0.5j * (1 - g12)])
    for e in expected:
        assert np.min(np.abs(w - e)) < 1e-12


def test_effective_hamiltonian_strong_coupling_suppression():
    cm = coupling_matrices(build_ring(4, 0.05))
    h = effective_hamiltonian(cm, lam=50.0)
    w = np.linalg.eigvals(h)
    assert np.max(np.abs(-2 * w.imag - 1.0)) < 1e-10  # all decay at gamma0


def test_circulant_eigenvalues_match_dft():
    geom = build_ring(12, 0.06)
    cm = coupling_matrices(geom)
    disp = dispersion(geom, cm, lam=0.1)
    shifts_ref = collective_energy_shifts(cm, 0.1, 0.0)
    rates_ref = collective_decay_rates(cm, 0.1, 0.0)
    n = 12
    for k, q, shift, decay, bright in disp.rows():
        idx = k % n
        assert abs(shift - shifts_ref[idx]) < 1e-10
        assert abs(decay - rates_ref[idx]) < 1e-10


def test_bright_cutoff_examples():
    assert bright_mode_cutoff(100, 0.05) == 5
    assert bright_mode_cutoff(100, 0.051) == 6
    assert bright_mode_cutoff(10, 0.04) == 1


def test_dispersion_fig3_scale():
    geom = build_ring(100, 0.05)
    cm = coupling_matrices(geom)
    disp = dispersion(geom, cm, lam=0.15)
    assert disp.bright_cutoff == 5
    assert int(np.sum(disp.bright_mask)) == 11
    assert abs(np.sum(disp.decay_rates) - 100.0) < 1e-8
    floor = 1.0 - np.exp(-0.0225)
    deep = np.abs(disp.k_values) > 2 * disp.bright_cutoff
    rel = np.abs(disp.decay_rates[deep] - floor) / floor
    assert np.max(rel) < 0.05
    # symmetric under k -> -k
    for k in range(1, 50):
        _, sp, dp = disp.mode(k)
        _, sm, dm = disp.mode(-k)
        assert abs(sp - sm) < 1e-10 and abs(dp - dm) < 1e-10


def test_bright_state_decay_near_dicke():
    # the whole ring must sit deep inside a wavelength, not just neighbors
    geom = build_ring(100, 0.001)
    cm = coupling_matrices(geom)
    disp = dispersion(geom, cm, lam=0.15)
    _, _, decay0 = disp.mode(0)
    f = np.exp(-0.0225)
    assert abs(decay0 - (1 + 99 * f)) / (1 + 99 * f) < 0.05


def test_most_subradiant_rate_decreases_with_n():
    vals = []
    for n in (20, 40, 80):
        geom = build_ring(n, 0.05)
        disp = dispersion(geom, coupling_matrices(geom))
        vals.append(disp.decay_rates.min())
    assert vals[0] > vals[1] > vals[2] >= -1e-9


def test_vibronic_floor_lower_bound():
    geom = build_ring(30, 0.05)
    cm = coupling_matrices(geom)
    for lam, nbar in ((0.1, 0.0), (0.3, 1.0)):
        disp = dispersion(geom, cm, lam, nbar)
        floor = 1.0 - np.exp(-lam**2 * (1 + 2 * nbar))
        assert disp.decay_rates.min() >= floor - 1e-9
