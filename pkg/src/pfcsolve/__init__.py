"""Spectral solvers for stationary states of phase-field-crystal models.

The package minimizes discretized Landau-Brazovskii and Lifshitz-Petrich
free energies over truncated Fourier lattices, with mass conservation and
monotone energy dissipation enforced at every accepted iterate.
"""

from .lattice import (
    ConfigurationError,
    FourierField,
    Lattice,
    LatticeSpec,
    build_lattice,
    interaction_diagonal,
    project_mass_zero,
    re_dot,
)
from .energy import (
    EnergyBreakdown,
    ModelSpec,
    NumericalOverflowError,
    bulk_gradient,
    energy,
    full_gradient,
    hessian_vec,
    max_second_derivative,
)
from .bregman import (
    BregmanKernel,
    FixedPointError,
    bregman_divergence,
    prox_p2,
    prox_p4,
    solve_radius_fixed_point,
)
from .aabpg import AabpgConfig, aabpg_run, bb_step
from .newton import NewtonConfig, newton_pcg_run, pcg
from .baselines import BaselineConfig, baseline_run
from .hybrid import HybridConfig, acceleration_ratio, hybrid_run, should_switch
from .report import SolverReport, TraceRow
from .presets import (
    Preset,
    field_from_seeds,
    get_preset,
    initial_field,
    load_seed_entries,
    preset_names,
    random_field,
)
from .snapshots import (
    SnapshotError,
    snapshot_read,
    snapshot_write,
    summary_write,
    trace_write,
)

__all__ = [
    "AabpgConfig",
    "BaselineConfig",
    "BregmanKernel",
    "ConfigurationError",
    "EnergyBreakdown",
    "FixedPointError",
    "FourierField",
    "HybridConfig",
    "Lattice",
    "LatticeSpec",
    "ModelSpec",
    "NewtonConfig",
    "NumericalOverflowError",
    "Preset",
    "SnapshotError",
    "SolverReport",
    "TraceRow",
    "aabpg_run",
    "acceleration_ratio",
    "baseline_run",
    "bb_step",
    "bregman_divergence",
    "build_lattice",
    "bulk_gradient",
    "energy",
    "field_from_seeds",
    "full_gradient",
    "get_preset",
    "initial_field",
    "load_seed_entries",
    "preset_names",
    "random_field",
    "snapshot_read",
    "snapshot_write",
    "summary_write",
    "trace_write",
    "hessian_vec",
    "hybrid_run",
    "interaction_diagonal",
    "max_second_derivative",
    "newton_pcg_run",
    "pcg",
    "project_mass_zero",
    "re_dot",
    "prox_p2",
    "prox_p4",
    "should_switch",
    "solve_radius_fixed_point",
]
