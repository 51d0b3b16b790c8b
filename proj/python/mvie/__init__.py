"""Blind endmember recovery by maximum-volume inscribed ellipsoids."""

from ._core import (
    MvieError,
    affine_fit,
    enumerate_facets,
    generate_instance,
    reduce_points,
    rms_angle_error,
    run_recovery,
    solve_mvie,
)

__all__ = [
    "MvieError",
    "affine_fit",
    "enumerate_facets",
    "generate_instance",
    "reduce_points",
    "rms_angle_error",
    "run_recovery",
    "solve_mvie",
]
