"""Derivative-free micro-scale training via simultaneous perturbation.

Each step draws one Rademacher direction, evaluates the objective at
theta +- c_k * delta (two forward passes), and descends the resulting
gradient estimate. Step sizes follow the standard decaying schedule

    a_k = a / (k + 1 + A)^0.602        c_k = c / (k + 1)^0.101

This is a demonstration-scale optimizer: configurations are capped at
20,000 parameters.
"""

from dataclasses import dataclass

import numpy as np

from .losses import LossWeights, total_loss
from .model import ModelConfig, init_weights, kinest_forward, parameter_count

__all__ = [
    "PARAM_LIMIT",
    "SpsaSchedule",
    "TrainResult",
    "train_micro",
    "smoothed_trace",
]

PARAM_LIMIT = 20000

_DIVERGENCE_FACTOR = 10.0
_DIVERGENCE_PATIENCE = 50


@dataclass(frozen=True)
class SpsaSchedule:
    a: float = 0.001
    c: float = 0.01
    big_a: float = 50.0
    alpha: float = 0.602
    gamma: float = 0.101

    def step_sizes(self, k: int):
        a_k = self.a / (k + 1 + self.big_a) ** self.alpha
        c_k = self.c / (k + 1) ** self.gamma
        return a_k, c_k


@dataclass(frozen=True)
class TrainResult:
    weights: dict
    trace: np.ndarray
    initial_loss: float
    final_loss: float


def _flatten(weights):
    names = list(weights)
    vec = np.concatenate([weights[n].astype(np.float64).ravel() for n in names])
    shapes = [(n, weights[n].shape, weights[n].size) for n in names]
    return vec, shapes


def _unflatten(vec, shapes):
    out = {}
    off = 0
    for name, shape, size in shapes:
        out[name] = vec[off : off + size].reshape(shape).astype(np.float32)
        off += size
    return out


def smoothed_trace(trace: np.ndarray, window: int = 50) -> np.ndarray:
    """Trailing moving average; entry k averages the last <= window values."""
    trace = np.asarray(trace, dtype=np.float64)
    csum = np.concatenate([[0.0], np.cumsum(trace)])
    idx = np.arange(1, len(trace) + 1)
    lo = np.maximum(idx - window, 0)
    return (csum[idx] - csum[lo]) / (idx - lo)


def train_micro(config: ModelConfig, x: np.ndarray, z: np.ndarray,
                iters: int = 500, seed: int = 0,
                loss_weights: LossWeights = LossWeights(),
                schedule: SpsaSchedule = SpsaSchedule(),
                weights: dict = None, chunk: int = 16) -> TrainResult:
    """Fit a micro configuration to one (input, target) sequence pair.

    The trace records (loss_plus + loss_minus) / 2 per iteration. Raises if
    the parameter count exceeds PARAM_LIMIT or if the loss stays above ten
    times its initial value for 50 consecutive steps.
    """
    if weights is None:
        weights = init_weights(config)
    n_params = parameter_count(weights)
    if n_params > PARAM_LIMIT:
        raise ValueError(
            f"configuration has {n_params} parameters; micro training is "
            f"capped at {PARAM_LIMIT}"
        )
    x = np.asarray(x, dtype=np.float32)
    z = np.asarray(z, dtype=np.float64)

    theta, shapes = _flatten(weights)
    rng = np.random.Generator(np.random.PCG64(seed))

    def objective(vec):
        # a perturbation that blows up the forward pass reads as infinite
        # loss so the divergence guard, not a crash, handles it
        with np.errstate(all="ignore"):
            try:
                y = kinest_forward(x, config, _unflatten(vec, shapes), chunk=chunk)
            except (FloatingPointError, ValueError):
                return np.inf
        return total_loss(np.asarray(y, dtype=np.float64), z, loss_weights)

    initial = objective(theta)
    if not np.isfinite(initial):
        raise RuntimeError("initial loss is not finite")
    trace = np.empty(iters)
    high = 0
    for k in range(iters):
        a_k, c_k = schedule.step_sizes(k)
        delta = rng.integers(0, 2, size=theta.size).astype(np.float64) * 2.0 - 1.0
        loss_plus = objective(theta + c_k * delta)
        loss_minus = objective(theta - c_k * delta)
        trace[k] = 0.5 * (loss_plus + loss_minus)
        if np.isfinite(loss_plus) and np.isfinite(loss_minus):
            # rademacher entries are +-1, so delta^-1 = delta
            theta = theta - a_k * (loss_plus - loss_minus) / (2.0 * c_k) * delta
        if trace[k] > _DIVERGENCE_FACTOR * initial:
            high += 1
            if high >= _DIVERGENCE_PATIENCE:
                raise RuntimeError(
                    f"training diverged: loss above {_DIVERGENCE_FACTOR}x the "
                    f"initial value for {_DIVERGENCE_PATIENCE} consecutive steps"
                )
        else:
            high = 0
    final = objective(theta)
    return TrainResult(
        weights=_unflatten(theta, shapes),
        trace=trace,
        initial_loss=float(initial),
        final_loss=float(final),
    )
