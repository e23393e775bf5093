"""Dirac wave packets on metric star graphs with transparent boundaries."""

from .bessel import BesselKernel, bessel_i0, bessel_i1
from .boundaries import (
    BoundaryPolicy,
    EndMode,
    MissingHistoryError,
    Side,
    VertexMode,
    apply_end_tbc,
    apply_vertex,
    apply_vertex_tbc,
    vertex_tbc_factor,
)
from .config import ConfigError, ExperimentConfig, SweepSpec, load_config
from .diagnostics import (
    DiagnosticsRecord,
    boundary_form,
    compute_record,
    density_profile,
    energy,
    partial_norm,
    reflection_coefficient,
    total_norm,
    transmitted_fractions,
)
from .experiments import run_experiment, sweep_alpha1
from .graph import Bond, Orientation, StarGraph, build_star_graph, sum_rule_residual
from .solver import (
    InstabilityError,
    RunResult,
    SimParams,
    Snapshot,
    SpinorField,
    build_initial_field,
    gaussian_spinor,
    run,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "BesselKernel",
    "Bond",
    "BoundaryPolicy",
    "ConfigError",
    "DiagnosticsRecord",
    "EndMode",
    "ExperimentConfig",
    "InstabilityError",
    "MissingHistoryError",
    "Orientation",
    "RunResult",
    "Side",
    "SimParams",
    "Snapshot",
    "SpinorField",
    "StarGraph",
    "SweepSpec",
    "VertexMode",
    "apply_end_tbc",
    "apply_vertex",
    "apply_vertex_tbc",
    "bessel_i0",
    "bessel_i1",
    "boundary_form",
    "build_initial_field",
    "build_star_graph",
    "compute_record",
    "density_profile",
    "energy",
    "gaussian_spinor",
    "load_config",
    "partial_norm",
    "reflection_coefficient",
    "run",
    "run_experiment",
    "step",
    "sum_rule_residual",
    "sweep_alpha1",
    "total_norm",
    "transmitted_fractions",
    "vertex_tbc_factor",
]
