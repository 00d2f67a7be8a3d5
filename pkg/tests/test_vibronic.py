import math

import numpy as np
import pytest

from molring.coupling import coupling_matrices
from molring.errors import InvalidParameterError, StructureError
from molring.geometry import build_ring
from molring.vibronic import (MolecularPotentialParams, ThermalEnvironment, VibronicParams,
                              bare_collective_rates, collective_decay_rates,
                              collective_energy_shifts, dicke_huang_rhys_bound,
                              franck_condon_distribution, huang_rhys_from_geometry,
                              renormalized_couplings, superradiance_criterion,
                              thermal_displacement_factor, thermal_occupancy)


def test_thermal_occupancy_limits():
    assert thermal_occupancy(1.0, 0.0) == 0.0
    # invert the Bose formula: nbar = 1 at T = nu / ln 2
    assert abs(thermal_occupancy(2.0, 2.0 / math.log(2.0)) - 1.0) < 1e-12
    # classical limit nbar ~ T/nu
    assert abs(thermal_occupancy(1.0, 100.0) / 100.0 - 1.0) < 1e-2


def test_huang_rhys_from_geometry():
    assert huang_rhys_from_geometry(MolecularPotentialParams(1.0, 0.0, 1.0)) == 0.0
    # mu*nu = 2 makes lam = r_ge
    p = MolecularPotentialParams(2.0, 0.15, 1.0)
    assert abs(huang_rhys_from_geometry(p) - 0.15) < 1e-15
    p2 = MolecularPotentialParams(2.0, 0.30, 1.0)
    assert abs(huang_rhys_from_geometry(p2) - 2 * huang_rhys_from_geometry(p)) < 1e-15


def test_thermal_displacement_factor_values():
    assert thermal_displacement_factor(0.0, 0.0) == 1.0
    assert thermal_displacement_factor(0.5, 3.0, same_site=True) == 1.0
    assert abs(thermal_displacement_factor(0.15, 0.0) - math.exp(-0.0225)) < 1e-15
    assert abs(thermal_displacement_factor(0.15, 0.0) - 0.977751) < 5e-7


def test_thermal_displacement_factor_monotone():
    lams = np.linspace(0, 2, 40)
    vals = [thermal_displacement_factor(l, 0.3) for l in lams]
    assert np.all(np.diff(vals) < 0)
    nbars = np.linspace(0, 4, 40)
    vals = [thermal_displacement_factor(0.4, nb) for nb in nbars]
    assert np.all(np.diff(vals) < 0)


def test_franck_condon_distribution():
    assert franck_condon_distribution(0.0, 0) == 1.0
    assert franck_condon_distribution(0.0, 3) == 0.0
    assert abs(franck_condon_distribution(1.0, 1) - math.exp(-1.0)) < 1e-15
    total = sum(franck_condon_distribution(1.0, n) for n in range(51))
    assert abs(total - 1.0) < 1e-12


def test_renormalized_couplings_off_diagonal_only():
    cm = coupling_matrices(build_ring(4, 0.05))
    out = renormalized_couplings(cm, 0.15, 0.0)
    f = math.exp(-0.0225)
    assert np.allclose(out.omega, cm.omega * f)
    off = ~np.eye(4, dtype=bool)
    assert np.allclose(out.gamma[off], cm.gamma[off] * f)
    assert np.allclose(np.diag(out.gamma), 1.0)
    # identity at lam = 0; suppression of all cooperation at large lam
    assert renormalized_couplings(cm, 0.0, 0.0).omega is not cm.omega
    big = renormalized_couplings(cm, 6.0, 0.0)
    assert np.max(np.abs(big.omega)) < 1e-14 * np.max(np.abs(cm.omega))


def test_renormalized_191_value():
    cm = coupling_matrices(build_ring(2, 1 / 40))
    out = renormalized_couplings(cm, 0.15, 0.0)
    assert abs(out.omega[0, 1] - cm.omega[0, 1] * 0.977751) < 1e-4


def test_collective_decay_rates_dicke_limit():
    cm = coupling_matrices(build_ring(8, 1e-4))
    rates0 = collective_decay_rates(cm, 0.0)
    assert abs(rates0[0] - 8.0) / 8.0 < 1e-3  # symmetric channel at n*gamma0
    lam = 0.3
    rates = collective_decay_rates(cm, lam)
    f = math.exp(-lam**2)
    # dark channels at the vibronic floor, bright at 1 + f (n-1)
    assert np.max(np.abs(rates[1:] - (1 - f))) < 2e-3
    assert abs(rates[0] - (1 + f * 7.0)) < 1e-2


def test_collective_decay_rates_sum_rule():
    cm = coupling_matrices(build_ring(6, 0.08))
    for lam, nbar in ((0.0, 0.0), (0.3, 0.0), (0.7, 1.5)):
        rates = collective_decay_rates(cm, lam, nbar)
        assert abs(rates.sum() - 6.0) < 1e-10


def test_collective_rates_require_circulant():
    from molring.coupling import CouplingMatrices
    gamma = np.eye(4)
    gamma[0, 1] = gamma[1, 0] = 0.1  # PSD but not circulant
    bad = CouplingMatrices(np.zeros((4, 4)), gamma)
    with pytest.raises(StructureError):
        collective_decay_rates(bad, 0.1)


def test_superradiance_criterion_dicke_limit_counts():
    # at lam = 0 and zero distance the criterion reduces to n > 2
    for n, expected in ((2, False), (3, True)):
        rates = np.zeros(n)
        rates[0] = n  # single superradiant channel
        assert superradiance_criterion(rates, 0.0, 0.0, n) is expected


def test_superradiance_criterion_huang_rhys_bound():
    n = 8
    rates = np.zeros(n)
    rates[0] = n
    bound = dicke_huang_rhys_bound(n)  # log(7)/2 ~ 0.973
    assert abs(bound - math.log(7) / 2) < 1e-15
    assert superradiance_criterion(rates, math.sqrt(bound) - 0.02, 0.0, n)
    assert not superradiance_criterion(rates, 1.3, 0.0, n)  # lam^2 = 1.69 > 0.973


def test_superradiance_criterion_finite_ring():
    cm = coupling_matrices(build_ring(8, 0.04))
    rates = bare_collective_rates(cm)
    assert superradiance_criterion(rates, 0.15, 0.0, 8)
    # matches the bare reference condition sum > 2 n g0^2 exactly at lam = 0
    lhs = float(np.sum(rates**2))
    assert superradiance_criterion(rates, 0.0, 0.0, 8) == (lhs > 16.0)


def test_thermal_environment_consistency_check():
    ThermalEnvironment(nbar=1.0, temperature=1.0 / math.log(2.0))
    with pytest.raises(InvalidParameterError):
        ThermalEnvironment(nbar=0.5, temperature=1.0 / math.log(2.0))


def test_vibronic_params_validation():
    with pytest.raises(InvalidParameterError):
        VibronicParams(-0.1, 1.0, 0.0)
    with pytest.raises(InvalidParameterError):
        VibronicParams(0.1, 0.0, 0.0)
    with pytest.raises(InvalidParameterError):
        VibronicParams(0.1, 1.0, 0.0, collapse_convention="other")


def test_collective_energy_shifts_match_dense_diagonalization():
    cm = coupling_matrices(build_ring(6, 0.06))
    shifts = collective_energy_shifts(cm)
    dense = np.linalg.eigvalsh(cm.omega)
    assert np.max(np.abs(np.sort(shifts) - np.sort(dense))) < 1e-10
