"""Three-stage post-processing of a raw planner path."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .shortcut import downsample, path_cost, upsample
from .smoothing import DEFAULT_MAX_ROUNDS, SmoothResult, kp_smooth

DEFAULT_UPSAMPLE_ITERS = 1000


@dataclass
class PipelineResult:
    raw: NDArray
    downsampled: NDArray
    upsampled: NDArray
    smooth: SmoothResult

    @property
    def trajectory(self) -> NDArray:
        return self.smooth.points

    def summary(self) -> dict:
        return {
            "raw_cost": path_cost(self.raw),
            "downsample_cost": path_cost(self.downsampled),
            "upsample_cost": path_cost(self.upsampled),
            "smooth_length": self.smooth.length,
            "keypoints_inserted": self.smooth.inserted,
            "rounds": self.smooth.rounds,
        }


def optimize_path(
    raw: ArrayLike,
    ws,
    rng: np.random.Generator,
    upsample_iters: int = DEFAULT_UPSAMPLE_ITERS,
    sample_spacing: float | None = None,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    step_size: float | None = None,
    rule: str = "bracket",
) -> PipelineResult:
    """Down-sample, up-sample, then spline-smooth ``raw``.

    ``sample_spacing`` defaults to half of ``step_size``.
    """
    raw = np.asarray(raw, dtype=float)
    if sample_spacing is None:
        if step_size is None:
            raise ValueError("give sample_spacing or step_size")
        sample_spacing = 0.5 * step_size
    down = downsample(raw, ws)
    up = upsample(down, ws, upsample_iters, rng)
    smooth = kp_smooth(up, ws, sample_spacing, max_rounds=max_rounds, rule=rule)
    return PipelineResult(raw, down, up, smooth)
