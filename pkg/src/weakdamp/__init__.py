"""Weak-coupling master equations for multi-transition open quantum systems."""

from .bath import Bath, Flat, Ohmic, PiecewiseLinear, Tabulated
from .system import RateTable, SystemSpec, Transition, build_rate_table, two_level, v_system
from .generators import GeneratorKind, build_generator
from .propagation import EvolutionResult, error_metric, propagate_adiabatic, propagate_fixed

__all__ = [
    "Bath", "Flat", "Ohmic", "PiecewiseLinear", "Tabulated",
    "RateTable", "SystemSpec", "Transition", "build_rate_table", "two_level", "v_system",
    "GeneratorKind", "build_generator",
    "EvolutionResult", "error_metric", "propagate_adiabatic", "propagate_fixed",
]
