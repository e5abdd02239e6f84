"""Vector DC magnetometry simulations for NV-center spin ensembles.

Core surfaces:

- spinalg: small dense complex linear algebra
- nvmodel: static field geometry, Hamiltonian, eigensystem, inversion
- rabi: drive matrix elements and complex-plane ellipse geometry
- dynamics: Lindblad dephasing dynamics and reference propagators
- estimation: uncertainty formulas, interrogation-time optimization
- cli: command-line interface (figure regeneration, sweeps, export)
"""

from .nvmodel import (
    EigenSystem,
    InconsistentTransitionsError,
    NvParameters,
    ReferenceDcField,
    StaticField,
    UndefinedAngleError,
    build_static_hamiltonian,
    characteristic_residual,
    eigensystem,
    invert_transitions,
    ramsey_shift,
)
from .rabi import (
    AxialFieldError,
    EllipseParams,
    MicrowaveDrive,
    RabiResult,
    ellipse_params,
    ellipse_trace,
    rabi_exact,
    rabi_perturbative,
    rabi_qubit,
)
from .dynamics import (
    DensityMatrix,
    NoiseModel,
    StepSizeError,
    Trajectory,
    full_drive_propagation,
    ghz_parity_expectation,
    propagate_lindblad,
    rabi_probability,
    ramsey_probability,
    short_time_fit,
)
from .estimation import (
    SensingBudget,
    UncertaintyResult,
    entangled_advantage_ratio,
    optimize_interrogation,
    sensitivity_derivative,
    uncertainty_from_parity,
    uncertainty_from_probability,
)
from .config import ConfigError, RunConfig

__version__ = "0.1.0"

__all__ = [
    "AxialFieldError",
    "ConfigError",
    "DensityMatrix",
    "EigenSystem",
    "EllipseParams",
    "InconsistentTransitionsError",
    "MicrowaveDrive",
    "NoiseModel",
    "NvParameters",
    "RabiResult",
    "ReferenceDcField",
    "RunConfig",
    "SensingBudget",
    "StaticField",
    "StepSizeError",
    "Trajectory",
    "UncertaintyResult",
    "UndefinedAngleError",
    "build_static_hamiltonian",
    "characteristic_residual",
    "eigensystem",
    "ellipse_params",
    "ellipse_trace",
    "entangled_advantage_ratio",
    "full_drive_propagation",
    "ghz_parity_expectation",
    "invert_transitions",
    "optimize_interrogation",
    "propagate_lindblad",
    "rabi_exact",
    "rabi_perturbative",
    "rabi_probability",
    "rabi_qubit",
    "ramsey_probability",
    "ramsey_shift",
    "sensitivity_derivative",
    "short_time_fit",
    "uncertainty_from_parity",
    "uncertainty_from_probability",
    "__version__",
]
