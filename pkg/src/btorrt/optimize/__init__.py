"""Path post-processing: shortcutting and collision-aware spline smoothing."""

from .pipeline import DEFAULT_UPSAMPLE_ITERS, PipelineResult, optimize_path
from .shortcut import cumulative_length, downsample, path_cost, upsample
from .smoothing import SmoothResult, drop_repeats, kp_smooth
from .spline import SplinePath, discretize, fit_cubic_spline, solve_tridiagonal

__all__ = [
    "DEFAULT_UPSAMPLE_ITERS",
    "PipelineResult",
    "SmoothResult",
    "SplinePath",
    "cumulative_length",
    "discretize",
    "downsample",
    "drop_repeats",
    "fit_cubic_spline",
    "kp_smooth",
    "optimize_path",
    "path_cost",
    "solve_tridiagonal",
    "upsample",
]
