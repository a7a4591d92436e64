"""Linear-depth circuit estimation of orbital-optimized second-order energies."""

from .chem import (
    ActiveSpaceSpec,
    FcidumpError,
    MolecularIntegrals,
    SpinIntegrals,
    build_perturbation,
    freeze_active_space,
    orbital_energies,
    parse_fcidump,
    spin_orbitalize,
)
from .circuits import (
    Circuit,
    Gate,
    ResourceReport,
    cnot_depth,
    compile_orbital_rotation,
    double_excitation,
    lower_circuit,
    prep_reference,
    single_excitation,
    single_particle_action,
)
from .lowrank import (
    FactorizedPerturbation,
    MeasurementGroup,
    factorize,
    group_expectation_coefficients,
)
from .omp2 import (
    DoubleExcitationIndex,
    EnergyBreakdown,
    Estimator,
    EstimatorConfig,
    ResourceSummary,
    ThetaParams,
    enumerate_doubles,
)
from .oracle import ReferenceValues, canonical_mp2, circuit_unitary, fci_energy
from .simulator import (
    FidelityEstimate,
    NoiseModel,
    ShotTable,
    StateVector,
    apply_circuit,
    expectation_with_variance,
    load_noise_presets,
    postselect,
    run,
    sample,
    trajectory_fidelity,
)

__version__ = "0.1.0"

__all__ = [
    "ActiveSpaceSpec",
    "Circuit",
    "DoubleExcitationIndex",
    "EnergyBreakdown",
    "Estimator",
    "EstimatorConfig",
    "FactorizedPerturbation",
    "FcidumpError",
    "FidelityEstimate",
    "Gate",
    "MeasurementGroup",
    "MolecularIntegrals",
    "NoiseModel",
    "ReferenceValues",
    "ResourceReport",
    "ResourceSummary",
    "ShotTable",
    "SpinIntegrals",
    "StateVector",
    "ThetaParams",
    "apply_circuit",
    "build_perturbation",
    "canonical_mp2",
    "circuit_unitary",
    "cnot_depth",
    "compile_orbital_rotation",
    "double_excitation",
    "enumerate_doubles",
    "expectation_with_variance",
    "factorize",
    "fci_energy",
    "freeze_active_space",
    "group_expectation_coefficients",
    "load_noise_presets",
    "lower_circuit",
    "orbital_energies",
    "parse_fcidump",
    "postselect",
    "prep_reference",
    "run",
    "sample",
    "single_excitation",
    "single_particle_action",
    "spin_orbitalize",
    "trajectory_fidelity",
]
