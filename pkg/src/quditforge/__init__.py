"""Cavity qudit gate synthesis: SNAP + displacement, ECD, and Chebyshev pulse control."""

from ._accel import backend_name
from .errors import (
    DegenerateData,
    DimensionMismatch,
    IndexOutOfRange,
    InsufficientData,
    MissingRepresentation,
    NonFiniteCost,
    NotNormalized,
    OutOfDomain,
    QuditForgeError,
    TruncationWarning,
    UnderSampled,
    WrongAngleCount,
)
from .gateset_ecd import ECDGateCost, ECDParams, ECDStateCost, build_circuit_ecd, ecd, qubit_rotation
from .gateset_snapd import SnapDGateCost, SnapDParams, SnapDStateCost, TimingConfig, build_circuit, snap
from .operator_core import FockSpace, JointSpace, displacement, trace_infidelity
from .optimizer import OptimizationConfig, OptimizationResult, lbfgs_minimize, multi_start
from .pulse_control import ChebyshevPulse, EvolutionConfig, HardwareConfig, PulseGateCost, PulseStateCost, evolve

__version__ = "0.1.0"

__all__ = [
    "backend_name",
    "build_circuit",
    "build_circuit_ecd",
    "ChebyshevPulse",
    "DegenerateData",
    "DimensionMismatch",
    "displacement",
    "ecd",
    "ECDGateCost",
    "ECDParams",
    "ECDStateCost",
    "EvolutionConfig",
    "evolve",
    "FockSpace",
    "HardwareConfig",
    "IndexOutOfRange",
    "InsufficientData",
    "JointSpace",
    "lbfgs_minimize",
    "MissingRepresentation",
    "multi_start",
    "NonFiniteCost",
    "NotNormalized",
    "OptimizationConfig",
    "OptimizationResult",
    "OutOfDomain",
    "PulseGateCost",
    "PulseStateCost",
    "qubit_rotation",
    "QuditForgeError",
    "snap",
    "SnapDGateCost",
    "SnapDParams",
    "SnapDStateCost",
    "TimingConfig",
    "trace_infidelity",
    "TruncationWarning",
    "UnderSampled",
    "WrongAngleCount",
]
