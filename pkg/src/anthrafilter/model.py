"""Model coefficients, drifts, diffusions and observation transforms.

Everything here is a pure function of (time, state, parameters): no
randomness, no mutable state.  All evaluations broadcast over numpy
arrays, so the same code serves scalar simulation and grid solvers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ModelParams",
    "HiddenState",
    "ObsCoords",
    "BoundaryError",
    "eval_control",
    "eval_rates",
    "eval_drift",
    "eval_diffusion",
    "eval_obs_drift",
    "noise_shape",
    "to_obs_coords",
    "from_obs_coords",
]

# Cap on |Xbar|, |Ybar| before exponentials are taken; e^30 ~ 1e13 keeps
# every intermediate finite while preserving the saturation behaviour.
OBS_ARG_CAP = 30.0


class BoundaryError(ValueError):
    """Raised when a logit transform is requested at an interval endpoint."""


@dataclass(frozen=True)
class ModelParams:
    """All scalar coefficients of the lumped anthracnose model.

    Defaults reproduce the simulation parameter table of the reference
    scenario: b1 = 5 ln 10, c_i = 10 pi, d_i = 0.75, omega1 = 25 pi,
    omega2 = 10, phi1 = 0.4, phi2 = 0.6, sigma = 0.9, kappa = 1,
    epsilon = 1e-4, eta = 1/(1+epsilon), delta_i = 1e-2, v_max = 1,
    p1 = 0, p2 = 1.  b2 and b3 derive from v_max and epsilon:
    b2 = v_max * ln(1e5 * v_max * (1 - epsilon * eta)) / 2 and
    b3 = v_max * ln(1e5 * v_max).
    """

    v_max: float = 1.0
    epsilon: float = 1e-4
    sigma: float = 0.9
    kappa: float = 1.0
    b1: float = 5.0 * math.log(10.0)
    b2: float | None = None
    b3: float | None = None
    c1: float = 10.0 * math.pi
    c2: float = 10.0 * math.pi
    c3: float = 10.0 * math.pi
    d1: float = 0.75
    d2: float = 0.75
    d3: float = 0.75
    omega1: float = 25.0 * math.pi
    omega2: float = 10.0
    phi1: float = 0.4
    phi2: float = 0.6
    delta1: float = 1e-2
    delta2: float = 1e-2
    delta3: float = 1e-2
    eta_value: float | None = None
    p1_value: float = 0.0
    p2_value: float = 1.0

    def __post_init__(self):
        if self.v_max <= 0:
            raise ValueError("v_max must be positive")
        if not 0.0 < self.sigma < 1.0:
            raise ValueError("sigma must lie in (0, 1)")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        for name in ("delta1", "delta2", "delta3"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.eta_value is None:
            object.__setattr__(self, "eta_value", 1.0 / (1.0 + self.epsilon))
        if not 0.0 < self.eta_value <= 1.0:
            raise ValueError("eta_value must lie in (0, 1]")
        if self.p1_value < 0:
            raise ValueError("p1_value must be non-negative")
        if self.p2_value <= 0:
            raise ValueError("p2_value must be positive")
        if self.b2 is None:
            b2 = self.v_max * math.log(
                1e5 * self.v_max * (1.0 - self.epsilon * self.eta_value)
            ) / 2.0
            object.__setattr__(self, "b2", b2)
        if self.b3 is None:
            object.__setattr__(self, "b3", self.v_max * math.log(1e5 * self.v_max))


@dataclass
class HiddenState:
    """State triple (theta, v, rho); fields may be scalars or arrays."""

    theta: float | np.ndarray
    v: float | np.ndarray
    rho: float | np.ndarray


@dataclass
class ObsCoords:
    """Logit observation coordinates and their mean counterparts."""

    X: float | np.ndarray
    Y: float | np.ndarray
    Xbar: float | np.ndarray
    Ybar: float | np.ndarray


def eval_control(t, params: ModelParams):
    """Fungicide control u(t) and the induced factor w = 1/(1 - sigma u)."""
    u = np.sin(params.omega1 * (t - params.phi1) ** 2) ** 2 * np.exp(
        -params.omega2 * (t - params.phi2) ** 2
    )
    w = 1.0 / (1.0 - params.sigma * u)
    return u, w


def eval_rates(t, s: HiddenState, params: ModelParams):
    """Environmental rate functions (alpha, beta, gamma, eta) at time t.

    gamma follows the seasonal form b3 (1 - cos(c3 t)) (t - d3)^2
    (theta - kappa rho) v and is floored at zero, so the nonnegativity
    assumed of all rates holds everywhere.
    """
    alpha = params.p1_value + params.b1 * (1.0 - np.cos(params.c1 * t)) * (
        t - params.d1
    ) ** 2
    beta = params.b2 * (1.0 - np.cos(params.c2 * t)) * (t - params.d2) ** 2 * (
        params.p2_value
    )
    gamma_raw = (
        params.b3
        * (1.0 - np.cos(params.c3 * t))
        * (t - params.d3) ** 2
        * (s.theta - params.kappa * s.rho)
        * s.v
    )
    gamma = np.maximum(gamma_raw, 0.0)
    eta = params.eta_value
    return alpha, beta, gamma, eta


def eval_drift(t, s: HiddenState, params: ModelParams):
    """Drift triple (f1, f2, f3) of the state equations."""
    alpha, beta, gamma, eta = eval_rates(t, s, params)
    _, w = eval_control(t, params)
    f1 = alpha * (1.0 - s.theta * w)
    f2 = beta / (eta * params.v_max) * (
        eta * params.v_max - s.v / (1.0 + params.epsilon - s.theta)
    )
    f3 = gamma * (1.0 - s.rho)
    return f1, f2, f3


def noise_shape(x):
    """State-dependent noise factor: x (1 - x) on (0, 1), zero elsewhere."""
    x = np.asarray(x, dtype=float)
    inside = (x > 0.0) & (x < 1.0)
    out = np.where(inside, x * (1.0 - x), 0.0)
    return out if out.ndim else float(out)


def eval_diffusion(t, s: HiddenState, params: ModelParams):
    """Diffusion triple (g1, g2, g3); each vanishes at its state bounds."""
    g1 = params.delta1 * noise_shape(s.theta)
    g2 = params.delta2 * noise_shape(np.asarray(s.v, dtype=float) / params.v_max)
    g3 = params.delta3 * noise_shape(s.rho)
    return g1, g2, g3


def eval_obs_drift(t, xbar, ybar, theta, params: ModelParams, cap=OBS_ARG_CAP):
    """Drifts (f, g) of the logit observation processes X and Y.

    f is the time derivative of logit(vbar / v_max) along the mean-volume
    ODE and g the analogue for logit(rhobar).  Arguments are clipped to
    [-cap, cap] before exponentiation so large logit values saturate
    instead of overflowing.
    """
    xb = np.clip(xbar, -cap, cap)
    yb = np.clip(ybar, -cap, cap)
    eta = params.eta_value
    _, beta, _, _ = eval_rates(t, HiddenState(0.0, 0.0, 0.0), params)
    f = (eta * (1.0 + np.exp(-xb)) - 1.0 / (1.0 + params.epsilon - theta)) * (
        beta * (1.0 + np.exp(xb)) / (eta * params.v_max)
    )
    v_from_x = params.v_max * np.exp(xb) / (1.0 + np.exp(xb))
    rho_from_y = np.exp(yb) / (1.0 + np.exp(yb))
    _, _, gamma, _ = eval_rates(t, HiddenState(theta, v_from_x, rho_from_y), params)
    g = (1.0 + np.exp(-yb)) * gamma
    return f, g


def to_obs_coords(v, rho, params: ModelParams):
    """Logit transforms X = ln(v / (v_max - v)), Y = ln(rho / (1 - rho)).

    Only defined strictly inside (0, v_max) x (0, 1); endpoints raise
    BoundaryError rather than silently aliasing with interior points.
    """
    v = np.asarray(v, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if np.any(v <= 0.0) or np.any(v >= params.v_max):
        raise BoundaryError("v must lie strictly inside (0, v_max)")
    if np.any(rho <= 0.0) or np.any(rho >= 1.0):
        raise BoundaryError("rho must lie strictly inside (0, 1)")
    X = np.log(v / (params.v_max - v))
    Y = np.log(rho / (1.0 - rho))
    if X.ndim == 0:
        return float(X), float(Y)
    return X, Y


def from_obs_coords(X, Y, params: ModelParams):
    """Inverse logistic map back to (v, rho)."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    v = params.v_max / (1.0 + np.exp(-X))
    rho = 1.0 / (1.0 + np.exp(-Y))
    if v.ndim == 0:
        return float(v), float(rho)
    return v, rho
