"""Vacuum squeezing of a frequency-modulated harmonic oscillator.

The package simulates the oscillator's pure Gaussian state under an arbitrary
frequency protocol omega(t), tracks the nonadiabaticity Q*, squeezing
parameter r and irreversible work along the way, and searches bang-bang
protocols for maximal terminal squeezing.  See the module docstrings of
``protocols``, ``dynamics``, ``thermo``, ``squeezing`` and ``optimize`` for
the physics conventions, and ``cli`` for the command-line entry points.
"""

from .errors import (
    ContractError,
    NotPureError,
    PropagationError,
    ProtocolError,
    SqueezeForgeError,
    TruncationError,
)
from .protocols import (
    Constant,
    FrequencyProtocol,
    LinearRamp,
    Sampled,
    Segment,
    Sinusoid,
    ValidationReport,
    build_constant,
    build_janszky_adam,
    build_linear_ramp,
    build_sinusoidal,
    janszky_adam_switch_times,
    load_protocol,
    protocol_from_dict,
    protocol_to_dict,
    save_protocol,
    validate,
)
from .dynamics import (
    CovarianceTriple,
    FundamentalState,
    covariance,
    propagate,
    segment_transfer,
    write_trajectory_csv,
    wronskian,
)
from .thermo import (
    ThermoRecord,
    WorkQuantities,
    qstar_from_cov,
    qstar_from_state,
    trajectory_records,
    work_quantities,
    write_thermo_csv,
)
from .squeezing import (
    EstimateReport,
    FockDistribution,
    SqueezingDecomposition,
    bootstrap_stderr,
    decompose,
    energy_from_populations,
    estimate_r,
    fock_populations,
    qstar_from_r,
    r_from_qstar,
    reconstruct,
    sample_populations,
    wirr_from_r,
    write_populations_csv,
)
from .optimize import (
    ControlProblem,
    CostateState,
    OptimizationResult,
    StationarityReport,
    costate_propagate,
    objective,
    result_to_dict,
    solve_bangbang,
    switching_function,
    verify_stationarity,
)

__version__ = "0.1.0"

__all__ = [
    "SqueezeForgeError",
    "ProtocolError",
    "PropagationError",
    "NotPureError",
    "TruncationError",
    "ContractError",
    "Constant",
    "LinearRamp",
    "Sinusoid",
    "Sampled",
    "Segment",
    "FrequencyProtocol",
    "ValidationReport",
    "build_constant",
    "build_linear_ramp",
    "build_sinusoidal",
    "build_janszky_adam",
    "janszky_adam_switch_times",
    "validate",
    "protocol_to_dict",
    "protocol_from_dict",
    "save_protocol",
    "load_protocol",
    "FundamentalState",
    "CovarianceTriple",
    "segment_transfer",
    "propagate",
    "covariance",
    "wronskian",
    "write_trajectory_csv",
    "WorkQuantities",
    "ThermoRecord",
    "qstar_from_cov",
    "qstar_from_state",
    "work_quantities",
    "trajectory_records",
    "write_thermo_csv",
    "SqueezingDecomposition",
    "decompose",
    "reconstruct",
    "qstar_from_r",
    "r_from_qstar",
    "wirr_from_r",
    "FockDistribution",
    "fock_populations",
    "energy_from_populations",
    "EstimateReport",
    "estimate_r",
    "sample_populations",
    "bootstrap_stderr",
    "write_populations_csv",
    "ControlProblem",
    "objective",
    "CostateState",
    "costate_propagate",
    "switching_function",
    "OptimizationResult",
    "solve_bangbang",
    "result_to_dict",
    "StationarityReport",
    "verify_stationarity",
    "__version__",
]
