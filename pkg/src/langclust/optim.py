"""Adam with bias correction, global-norm clipping, and the warmup schedule."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import Tensor


@dataclass
class AdamState:
    """Per-parameter first/second moments plus the shared step counter."""

    beta1: float = 0.9
    beta2: float = 0.98
    epsilon: float = 1e-9
    step_count: int = 0
    first_moment: dict = field(default_factory=dict)
    second_moment: dict = field(default_factory=dict)


def adam_step(params: dict[str, Tensor], grads: dict[str, np.ndarray],
              state: AdamState, lr: float) -> None:
    """One Adam update, in place on ``params``; increments ``state.step_count``."""
    state.step_count += 1
    t = state.step_count
    bc1 = 1.0 - state.beta1 ** t
    bc2 = 1.0 - state.beta2 ** t
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.data.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {p.data.shape} for {name}")
        m = state.first_moment.get(name)
        if m is None:
            m = np.zeros_like(p.data)
            v = np.zeros_like(p.data)
        else:
            v = state.second_moment[name]
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * (g * g)
        state.first_moment[name] = m
        state.second_moment[name] = v
        p.data -= lr * (m / bc1) / (np.sqrt(v / bc2) + state.epsilon)


def clip_global_norm(grads: dict[str, np.ndarray], max_norm: float = 5.0) -> float:
    """Scale all gradients so their joint L2 norm is at most ``max_norm``."""
    total = 0.0
    for g in grads.values():
        total += float((g * g).sum())
    norm = total ** 0.5
    if norm > max_norm and norm > 0.0:
        factor = max_norm / norm
        for name in grads:
            grads[name] = grads[name] * factor
    return norm


@dataclass
class LrSchedule:
    """Inverse-square-root schedule with linear warmup over ``warmup_steps``."""

    d_model: int
    warmup_steps: int = 4000
    scale: float = 1.0

    def __post_init__(self):
        if self.warmup_steps < 1:
            raise ValueError("warmup_steps must be >= 1")
        if self.d_model < 1:
            raise ValueError("d_model must be positive")


def noam_lr(schedule: LrSchedule, step: int) -> float:
    """Learning rate at ``step`` (1-based); peaks exactly at warmup_steps."""
    if step < 1:
        raise ValueError(f"schedule step must be >= 1, got {step}")
    rate = schedule.d_model ** -0.5 * min(step ** -0.5, step * schedule.warmup_steps ** -1.5)
    return schedule.scale * rate
