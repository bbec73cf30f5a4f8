"""
Qubit-Cavity Core Module

Contains the fundamental components:
- Signals: Time-dependent parameters and their exact integrals
- TBQ: The isolated two-level position-based qubit
- Cavity: Block-diagonal qubit-cavity Hamiltonians
- Propagate: Closed-form, exp-of-integral and time-ordered propagators
- Observe: Density matrices, populations, entropy, Rabi frequency
- Errors / Config: Exception hierarchy and numerical tolerances
"""

from .errors import (
    SimulationError,
    ConfigError,
    ConfigMismatch,
    DimensionOverflow,
    UnknownParameterPath,
    DimensionMismatch,
    IndexOutOfRange,
    NumericalError,
    QuadratureNonConvergence,
    DegenerateSpectrum,
    NormViolation,
    InvalidDensity,
    NoOscillation,
    ZeroState
)

from .config import (
    NumericsConfig,
    DEFAULT_CONFIG
)

from .signals import (
    Signal,
    SignalKind,
    Trig,
    Constant,
    Sinusoid,
    Sum,
    ZERO,
    evaluate,
    integrate,
    integrate_hopping,
    quadrature,
    adaptive_simpson,
    signal_from_dict
)

from .tbq import (
    Basis,
    QubitParams,
    StateVector,
    hamiltonian_at,
    eigenenergies,
    eigensystem_2x2,
    eigenstates,
    basis_change_matrix,
    printed_eigenvector,
    hadamard_parameters,
    adiabatic_evolve,
    rabi_probability
)

from .cavity import (
    ModeParity,
    CavityParams,
    DipoleQubit,
    BlockGenerator,
    BlockHamiltonian,
    kron,
    SITE1,
    SITE2,
    DRIVE,
    HOP,
    cavity_level_energy,
    mode_signal,
    assemble_one_qubit,
    assemble_two_qubit,
    assemble_general
)

from .propagate import (
    PropagatorMethod,
    DriveReading,
    BlockDrive,
    Propagator,
    drives_for,
    drive_hamiltonian,
    identity_propagator,
    closed_form_from_integral,
    closed_form_block,
    closed_form_coefficients,
    printed_u11,
    exp_hermitian,
    exp_of_integral_block,
    default_oracle_steps,
    time_ordered_oracle,
    build_propagator,
    propagate_state,
    eigen_block,
    printed_block_energies,
    eigen_generator,
    pauli_decomposition,
    pauli_reconstruct
)

from .observe import (
    DensityMatrix,
    density_from_state,
    reduce,
    reduce_to,
    cavity_density,
    qubit_density,
    cavity_population,
    site_probability,
    projector_site,
    projector_cavity,
    multiphoton_probability,
    normalized_joint_probabilities,
    von_neumann_entropy,
    entropy_closed_form_2x2,
    mutual_information,
    rabi_frequency_estimate
)

__all__ = [
    # Errors
    "SimulationError",
    "ConfigError",
    "ConfigMismatch",
    "DimensionOverflow",
    "UnknownParameterPath",
    "DimensionMismatch",
    "IndexOutOfRange",
    "NumericalError",
    "QuadratureNonConvergence",
    "DegenerateSpectrum",
    "NormViolation",
    "InvalidDensity",
    "NoOscillation",
    "ZeroState",

    # Config
    "NumericsConfig",
    "DEFAULT_CONFIG",

    # Signals
    "Signal",
    "SignalKind",
    "Trig",
    "Constant",
    "Sinusoid",
    "Sum",
    "ZERO",
    "evaluate",
    "integrate",
    "integrate_hopping",
    "quadrature",
    "adaptive_simpson",
    "signal_from_dict",

    # TBQ
    "Basis",
    "QubitParams",
    "StateVector",
    "hamiltonian_at",
    "eigenenergies",
    "eigensystem_2x2",
    "eigenstates",
    "basis_change_matrix",
    "printed_eigenvector",
    "hadamard_parameters",
    "adiabatic_evolve",
    "rabi_probability",

    # Cavity
    "ModeParity",
    "CavityParams",
    "DipoleQubit",
    "BlockGenerator",
    "BlockHamiltonian",
    "kron",
    "SITE1",
    "SITE2",
    "DRIVE",
    "HOP",
    "cavity_level_energy",
    "mode_signal",
    "assemble_one_qubit",
    "assemble_two_qubit",
    "assemble_general",

    # Propagate
    "PropagatorMethod",
    "DriveReading",
    "BlockDrive",
    "Propagator",
    "drives_for",
    "drive_hamiltonian",
    "identity_propagator",
    "closed_form_from_integral",
    "closed_form_block",
    "closed_form_coefficients",
    "printed_u11",
    "exp_hermitian",
    "exp_of_integral_block",
    "default_oracle_steps",
    "time_ordered_oracle",
    "build_propagator",
    "propagate_state",
    "eigen_block",
    "printed_block_energies",
    "eigen_generator",
    "pauli_decomposition",
    "pauli_reconstruct",

    # Observe
    "DensityMatrix",
    "density_from_state",
    "reduce",
    "reduce_to",
    "cavity_density",
    "qubit_density",
    "cavity_population",
    "site_probability",
    "projector_site",
    "projector_cavity",
    "multiphoton_probability",
    "normalized_joint_probabilities",
    "von_neumann_entropy",
    "entropy_closed_form_2x2",
    "mutual_information",
    "rabi_frequency_estimate",
]
