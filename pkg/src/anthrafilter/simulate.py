"""Seeded Euler-Maruyama simulation of the hidden state and observations."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .model import (
    ModelParams,
    HiddenState,
    eval_drift,
    eval_diffusion,
    eval_obs_drift,
    to_obs_coords,
)

__all__ = [
    "SimConfig",
    "TruthPath",
    "ObsPath",
    "brownian_streams",
    "simulate_truth",
    "integrate_mean_obs",
    "simulate_observations",
]


@dataclass(frozen=True)
class SimConfig:
    t_end: float = 1.0
    dt: float = 1e-3
    seed: int = 0
    theta0: float = 0.05
    v0: float = 0.5
    rho0: float = 0.25
    record_stride: int = 1

    def __post_init__(self):
        if not 0.0 < self.dt <= self.t_end:
            raise ValueError("need 0 < dt <= t_end")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass
class TruthPath:
    """Recorded hidden-state trajectory plus the driving Brownian increments.

    ``brownian`` holds the three increment streams aggregated onto the
    recorded time grid, so downstream consumers (observation noise, audit
    tools) see exactly the randomness that drove the recorded path.
    """

    times: np.ndarray
    theta: np.ndarray
    v: np.ndarray
    rho: np.ndarray
    brownian: np.ndarray  # shape (3, len(times) - 1)
    n_clamped: int = 0
    max_overshoot: float = 0.0


@dataclass
class ObsPath:
    times: np.ndarray
    Xbar: np.ndarray
    Ybar: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    dX: np.ndarray
    dY: np.ndarray


def brownian_streams(seed: int, n_steps: int, dt: float) -> np.ndarray:
    """Three independent Brownian increment streams derived from one seed.

    Streams are spawned with fixed offsets from the master seed, so
    toggling one noise source never perturbs the others.
    """
    children = np.random.SeedSequence(seed).spawn(3)
    sqdt = math.sqrt(dt)
    return np.stack(
        [np.random.default_rng(c).standard_normal(n_steps) * sqdt for c in children]
    )


def simulate_truth(
    config: SimConfig, params: ModelParams, brownian: np.ndarray | None = None
) -> TruthPath:
    """Euler-Maruyama integration of the hidden (theta, v, rho) dynamics.

    Each component is clamped to its closed interval after every step;
    clamping events and the worst pre-clamp overshoot are reported on the
    returned path.
    """
    n = config.n_steps
    if brownian is None:
        brownian = brownian_streams(config.seed, n, config.dt)
    if brownian.shape != (3, n):
        raise ValueError(f"brownian increments must have shape (3, {n})")

    dt = config.dt
    theta, v, rho = config.theta0, config.v0, config.rho0
    stride = config.record_stride
    n_rec = n // stride + 1
    out_t = np.empty(n_rec)
    out_theta = np.empty(n_rec)
    out_v = np.empty(n_rec)
    out_rho = np.empty(n_rec)
    out_t[0], out_theta[0], out_v[0], out_rho[0] = 0.0, theta, v, rho

    dB1, dB2, dB3 = brownian
    n_clamped = 0
    max_over = 0.0
    k = 1
    for i in range(n):
        t = i * dt
        s = HiddenState(theta, v, rho)
        f1, f2, f3 = eval_drift(t, s, params)
        g1, g2, g3 = eval_diffusion(t, s, params)
        theta = theta + f1 * dt + g1 * dB1[i]
        v = v + f2 * dt + g2 * dB2[i]
        rho = rho + f3 * dt + g3 * dB3[i]
        over = max(
            -theta, theta - 1.0, -v, v - params.v_max, -rho, rho - 1.0
        )
        if over > 0.0:
            n_clamped += 1
            max_over = max(max_over, over)
            theta = min(max(theta, 0.0), 1.0)
            v = min(max(v, 0.0), params.v_max)
            rho = min(max(rho, 0.0), 1.0)
        if (i + 1) % stride == 0:
            out_t[k] = (i + 1) * dt
            out_theta[k], out_v[k], out_rho[k] = theta, v, rho
            k += 1

    agg = brownian[:, : (n_rec - 1) * stride].reshape(3, n_rec - 1, stride).sum(axis=2)
    return TruthPath(
        times=out_t[:k],
        theta=out_theta[:k],
        v=out_v[:k],
        rho=out_rho[:k],
        brownian=agg,
        n_clamped=n_clamped,
        max_overshoot=max_over,
    )


def integrate_mean_obs(truth: TruthPath, params: ModelParams):
    """Mean-observation ODEs conditioned on the theta path.

    Integrates vbar and rhobar with the explicit scheme of the truth
    simulation, freezing a component while its noisy counterpart sits at
    zero, then maps through the logit transforms.  Returns (Xbar, Ybar).
    """
    times = truth.times
    n = len(times)
    vbar = np.empty(n)
    rbar = np.empty(n)
    vbar[0], rbar[0] = truth.v[0], truth.rho[0]
    for i in range(n - 1):
        dt = times[i + 1] - times[i]
        s = HiddenState(truth.theta[i], vbar[i], rbar[i])
        _, f2, f3 = eval_drift(times[i], s, params)
        vbar[i + 1] = vbar[i] + (f2 * dt if truth.v[i] > 0.0 else 0.0)
        rbar[i + 1] = rbar[i] + (f3 * dt if truth.rho[i] > 0.0 else 0.0)
        vbar[i + 1] = min(max(vbar[i + 1], 0.0), params.v_max)
        rbar[i + 1] = min(max(rbar[i + 1], 0.0), 1.0)
    if np.any(vbar <= 0.0) or np.any(vbar >= params.v_max) or np.any(
        rbar <= 0.0
    ) or np.any(rbar >= 1.0):
        warnings.warn("mean-observation path hit a state boundary", RuntimeWarning)
        # Keep the logit finite at frozen boundary values.
        tiny = 1e-12
        vbar = np.clip(vbar, tiny * params.v_max, (1.0 - tiny) * params.v_max)
        rbar = np.clip(rbar, tiny, 1.0 - tiny)
    Xbar, Ybar = to_obs_coords(vbar, rbar, params)
    return Xbar, Ybar


def simulate_observations(
    mean,
    config: SimConfig,
    params: ModelParams,
    brownian: np.ndarray | None = None,
) -> ObsPath:
    """Noised observation paths X, Y built on the mean processes.

    ``brownian`` should carry the (3, n) increment streams of the driving
    noise; when omitted the streams are re-derived from ``config.seed``,
    which reproduces the exact increments used by ``simulate_truth`` for
    the same config (the observation noise is the same Brownian motion
    that drives v and rho).
    """
    Xbar, Ybar = np.asarray(mean[0], dtype=float), np.asarray(mean[1], dtype=float)
    n = len(Xbar) - 1
    if brownian is None:
        brownian = brownian_streams(config.seed, n, config.dt * config.record_stride)
    if brownian.shape[0] != 3 or brownian.shape[1] != n:
        raise ValueError(f"brownian increments must have shape (3, {n})")
    X = Xbar + np.concatenate([[0.0], np.cumsum(params.delta2 * brownian[1])])
    Y = Ybar + np.concatenate([[0.0], np.cumsum(params.delta3 * brownian[2])])
    times = np.arange(len(Xbar)) * (config.dt * config.record_stride)
    return ObsPath(
        times=times,
        Xbar=Xbar,
        Ybar=Ybar,
        X=X,
        Y=Y,
        dX=np.diff(X),
        dY=np.diff(Y),
    )
