"""Forward prediction of the inhibition-rate density without observations.

Past an anchor time tau the observation terms are dropped and the density
evolves by the signal generator alone (a Fokker-Planck sweep on the grid).
The result depends only on the density at tau, never on observation
increments after tau.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridDensity, normalize
from .zakai import check_stability, fokker_planck_step

__all__ = ["PredictionRequest", "predict"]


@dataclass(frozen=True)
class PredictionRequest:
    tau: float
    horizon: float
    dt: float

    def __post_init__(self):
        if self.horizon < 0:
            raise ValueError("horizon must be non-negative")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.horizon > 0 and self.dt > self.horizon:
            raise ValueError("dt must not exceed the horizon")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))


def predict(density: GridDensity, request: PredictionRequest, params) -> GridDensity:
    """Evolve the density from tau to tau + horizon with no observation input.

    Negative values produced by the explicit scheme are floored after every
    step; the output is renormalized once at the end.
    """
    check_stability(request.dt, density.grid, params)
    current = density.copy()
    for i in range(request.n_steps):
        t = request.tau + i * request.dt
        current = fokker_planck_step(current, t, request.dt, params)
    out, _ = normalize(current)
    return out
