"""Viscoelastic shell membrane solvers: 2D limit problem, 3D scaled problem, checks."""

from ._shellmem import (
    ClassificationMismatchError,
    ConfigError,
    ConvergenceReport,
    MaterialParams,
    Scenario,
    UnknownSuiteError,
    builtin_scenario,
    builtin_scenario_names,
    convolve,
    fit_loglog_slope,
    geometry_check,
    load_scenario,
    parse_scenario,
    property_suites,
    run_convergence,
    run_properties,
    solve2d,
    solve3d,
)

__all__ = [name for name in dir() if not name.startswith("_")]
