"""Single-threaded deterministic training loop: Adam + warmup schedule +
global-norm gradient clipping, with NaN-loss divergence detection."""

from __future__ import annotations

import logging
import math

from .optim import AdamState, LrSchedule, adam_step, clip_global_norm, noam_lr

log = logging.getLogger(__name__)


class DivergenceError(RuntimeError):
    """Raised when the training loss stops being finite."""


def fit(model, batches, steps: int, schedule: LrSchedule | None = None,
        clip_norm: float = 5.0, log_every: int = 200, checkpoint_steps=(),
        on_checkpoint=None) -> list[float]:
    """Train ``model`` for ``steps`` optimizer updates; returns the loss trace.

    ``batches`` is an iterator of MultilingualBatch. ``on_checkpoint(step)``
    fires after the update at each step in ``checkpoint_steps`` (and always
    at the final step).
    """
    if schedule is None:
        schedule = LrSchedule(model.config.d_model)
    state = AdamState()
    checkpoint_steps = set(checkpoint_steps) | {steps}
    losses = []
    for step in range(1, steps + 1):
        batch = next(batches)
        loss = model.loss(batch)
        value = loss.item()
        if not math.isfinite(value):
            raise DivergenceError(f"loss became {value} at step {step}")
        losses.append(value)
        model.zero_grad()
        loss.backward()
        grads = {name: p.grad for name, p in model.params.items() if p.grad is not None}
        clip_global_norm(grads, clip_norm)
        lr = noam_lr(schedule, state.step_count + 1)
        adam_step({n: model.params[n] for n in grads}, grads, state, lr)
        if log_every and step % log_every == 0:
            window = losses[-log_every:]
            log.info("step %d: loss %.4f (lr %.2e)", step, sum(window) / len(window), lr)
        if step in checkpoint_steps and on_checkpoint is not None:
            on_checkpoint(step)
    return losses
