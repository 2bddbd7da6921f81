"""Toolkit for finite multiclass hypothesis classes: combinatorial structures,
dimensions, game-value learners, lower-bound constructions, and a Monte Carlo
learning-curve laboratory.
"""

from .classes import (
    DomainError,
    FiniteClass,
    LabeledSample,
    Projection,
    RealizableDistribution,
    ResourceCapError,
    UsageError,
    VersionSpace,
    full_class,
    is_consistent,
    project,
    restrict,
    sample_iid,
)
from .pseudocube import (
    PseudoCube,
    enumerate_pseudo_cubes,
    half_mass_check,
    is_pseudo_cube,
    project_fixing,
    pseudo_cube_union,
)
from .dimensions import DimReport, dim_report, ds_dim, graph_dim, littlestone_dim, natarajan_dim

__all__ = [
    "DomainError",
    "FiniteClass",
    "LabeledSample",
    "Projection",
    "RealizableDistribution",
    "ResourceCapError",
    "UsageError",
    "VersionSpace",
    "full_class",
    "is_consistent",
    "project",
    "restrict",
    "sample_iid",
    "PseudoCube",
    "enumerate_pseudo_cubes",
    "half_mass_check",
    "is_pseudo_cube",
    "project_fixing",
    "pseudo_cube_union",
    "DimReport",
    "dim_report",
    "ds_dim",
    "graph_dim",
    "littlestone_dim",
    "natarajan_dim",
]
