"""Laser cooling of a driven two-level emitter in a structured vacuum.

Closed-form cooling model, a dense Lindblad oracle for validation,
figure-style parameter sweeps, and a CLI.
"""

from .analytic import (
    HEATING,
    BareInit,
    DressedInit,
    Heating,
    RateSet,
    SteadyAtom,
    Trajectory,
    ValidityCheck,
    ValidityReport,
    cooling_rate,
    is_heating,
    rate_set,
    steady_atom,
    steady_phonon,
    trajectory,
    validity_report,
)
from .errors import (
    ConfigError,
    DegenerateRatesError,
    DimensionOverflowError,
    DressedCoolError,
    HeatingRunError,
    InvalidGridError,
    InvalidParamsError,
    NoSteadyStateError,
    OracleError,
    TruncationBreachError,
    UnknownPresetError,
    ZeroCouplingError,
)
from .lindblad import (
    ConvergenceRun,
    EvolveResult,
    Liouvillian,
    SteadyStateResult,
    build_liouvillian,
    converged_steady_state,
    evolve,
    product_state,
    reduced_phonon_evolve,
    steady_state,
    thermal_phonon,
)
from .params import DressedFrame, PhysicalParams, dressed_frame
from .sweep import (
    PRESET_NAMES,
    SweepRow,
    SweepSpec,
    SweepTable,
    grid_from_range,
    list_presets,
    preset_sweeps,
    run_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "HEATING",
    "BareInit",
    "ConfigError",
    "ConvergenceRun",
    "DegenerateRatesError",
    "DimensionOverflowError",
    "DressedCoolError",
    "DressedFrame",
    "DressedInit",
    "EvolveResult",
    "Heating",
    "HeatingRunError",
    "InvalidGridError",
    "InvalidParamsError",
    "Liouvillian",
    "NoSteadyStateError",
    "OracleError",
    "PhysicalParams",
    "PRESET_NAMES",
    "RateSet",
    "SteadyAtom",
    "SteadyStateResult",
    "SweepRow",
    "SweepSpec",
    "SweepTable",
    "Trajectory",
    "TruncationBreachError",
    "UnknownPresetError",
    "ValidityCheck",
    "ValidityReport",
    "ZeroCouplingError",
    "build_liouvillian",
    "converged_steady_state",
    "cooling_rate",
    "dressed_frame",
    "evolve",
    "grid_from_range",
    "is_heating",
    "list_presets",
    "preset_sweeps",
    "product_state",
    "rate_set",
    "reduced_phonon_evolve",
    "run_sweep",
    "steady_atom",
    "steady_phonon",
    "steady_state",
    "thermal_phonon",
    "trajectory",
    "validity_report",
]
