"""Cooperative radiative dynamics of subwavelength molecular emitter arrays.

Simulation library for dipole-coupled two-level molecules with single-mode
vibronic coupling: collective spontaneous emission in rings and dimers,
vibrationally assisted dark-state preparation, single-excitation band
structure, and an incoherently pumped nanoring light source. All rates are
expressed in units of the single-emitter decay rate and all lengths in units
of the transition wavelength.
"""

__version__ = "0.1.0"

from .coupling import CouplingMatrices, coupling_matrices, pair_rates
from .dynamics import Dissipator, LiouvillianSpec, PulseSpec, assemble, evolve, steady_state
from .errors import (ConfigurationError, InvalidParameterError, MolringError,
                     MultipleSteadyStatesError, SingularSeparationError, StiffnessError,
                     StructureError)
from .geometry import (DisorderSpec, EmitterGeometry, apply_disorder, build_chain,
                       build_dimer, build_ring, build_ring_with_center)
from .vibronic import (MolecularPotentialParams, ThermalEnvironment, VibronicParams,
                       collective_decay_rates, franck_condon_distribution,
                       huang_rhys_from_geometry, renormalized_couplings,
                       superradiance_criterion, thermal_displacement_factor,
                       thermal_occupancy)

__all__ = [
    "__version__",
    "CouplingMatrices", "coupling_matrices", "pair_rates",
    "Dissipator", "LiouvillianSpec", "PulseSpec", "assemble", "evolve", "steady_state",
    "ConfigurationError", "InvalidParameterError", "MolringError",
    "MultipleSteadyStatesError", "SingularSeparationError", "StiffnessError",
    "StructureError",
    "DisorderSpec", "EmitterGeometry", "apply_disorder", "build_chain",
    "build_dimer", "build_ring", "build_ring_with_center",
    "MolecularPotentialParams", "ThermalEnvironment", "VibronicParams",
    "collective_decay_rates", "franck_condon_distribution",
    "huang_rhys_from_geometry", "renormalized_couplings",
    "superradiance_criterion", "thermal_displacement_factor", "thermal_occupancy",
]
