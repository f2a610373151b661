"""Residual checks and simulation for controlled magnetic Hamiltonian systems."""

from ._core import (
    ContractViolation,
    DegeneracyFailure,
    ExpressionParseError,
    NumericFailure,
    Scenario,
    ScenarioSchemaError,
    gradient,
    jacobian,
    list_scenarios,
    null_space,
)

__all__ = [
    "ContractViolation",
    "DegeneracyFailure",
    "ExpressionParseError",
    "NumericFailure",
    "Scenario",
    "ScenarioSchemaError",
    "gradient",
    "jacobian",
    "list_scenarios",
    "null_space",
]
