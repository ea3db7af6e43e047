"""Optimizers over weight groups plus per-step learning-rate schedules.

Weight decay never enters here: decay is a gradient term produced by the
regularizer module and summed into ``grad`` by the caller, so the same
optimizer serves decayed and undecayed runs.

Step-index convention: ``step(..., t, sched)`` applies the update that
produces the state at ``t + 1`` from the state at ``t`` (t is 0-based), and
the schedule multiplier consumed is ``multiplier_at(sched, t)``. For the
equivalence construction this means ``Multipliers(d)[0]`` scales the very
first update; the paired-trajectory tests pin this convention by matching
trajectories rather than trusting the index algebra.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .exceptions import GradientOverflowError, InvalidHyperparameterError
from .linalg import as_vector
from .reparam import WeightGroup

__all__ = [
    "Constant", "StepDecay", "Multipliers", "LrSchedule", "multiplier_at",
    "OptimizerState", "step", "make_theorem1_multipliers",
]


@dataclass(frozen=True)
class Constant:
    pass


@dataclass(frozen=True)
class StepDecay:
    factor: float
    every: int

    def __post_init__(self):
        if not (0 < self.factor):
            raise InvalidHyperparameterError("decay factor must be positive")
        if self.every < 1:
            raise InvalidHyperparameterError("decay interval must be >= 1")


@dataclass(frozen=True)
class Multipliers:
    values: tuple

    def __init__(self, values):
        object.__setattr__(self, "values", tuple(float(v) for v in values))
        if any(v <= 0 for v in self.values):
            raise InvalidHyperparameterError("multipliers must be positive")


LrSchedule = Constant | StepDecay | Multipliers


def multiplier_at(sched: LrSchedule, t: int) -> float:
    if isinstance(sched, Constant):
        return 1.0
    if isinstance(sched, StepDecay):
        return sched.factor ** (t // sched.every)
    if t >= len(sched.values):
        raise InvalidHyperparameterError(
            f"multiplier sequence of length {len(sched.values)} exhausted at step {t}"
        )
    return sched.values[t]


@dataclass
class OptimizerState:
    """Optimizer kind, hyperparameters, and per-group accumulator buffers.

    Buffers are created lazily per group id with the group's length; the
    Adam step counter counts applied updates per group, starting at 0.
    """

    kind: str
    eta: float
    mu: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps_adam: float = 1e-8
    buffers: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("sgd", "momentum", "adam"):
            raise InvalidHyperparameterError(f"unknown optimizer kind '{self.kind}'")
        if self.eta <= 0:
            raise InvalidHyperparameterError("learning rate must be positive")

    @classmethod
    def sgd(cls, eta: float) -> "OptimizerState":
        return cls("sgd", eta)

    @classmethod
    def momentum(cls, eta: float, mu: float = 0.9) -> "OptimizerState":
        return cls("momentum", eta, mu=mu)

    @classmethod
    def adam(cls, eta: float = 0.001, beta1: float = 0.9, beta2: float = 0.999,
             eps_adam: float = 1e-8) -> "OptimizerState":
        if not (0 <= beta1 < 1 and 0 <= beta2 < 1):
            raise InvalidHyperparameterError("adam betas must lie in [0, 1)")
        return cls("adam", eta, beta1=beta1, beta2=beta2, eps_adam=eps_adam)

    def _group_buffers(self, group: WeightGroup) -> dict:
        buf = self.buffers.get(group.group_id)
        if buf is None:
            if self.kind == "momentum":
                buf = {"momentum": np.zeros(group.n)}
            elif self.kind == "adam":
                buf = {"m": np.zeros(group.n), "v": np.zeros(group.n), "t": 0}
            else:
                buf = {}
            self.buffers[group.group_id] = buf
        return buf


def step(state: OptimizerState, group: WeightGroup, grad, t: int,
         sched: LrSchedule = Constant()) -> WeightGroup:
    """Apply one update in place on ``group.w``; returns the group.

    Raises GradientOverflowError on the first step where the incoming
    gradient, the updated weights, or any accumulator buffer holds a
    non-finite entry, so a blown-up run stops exactly where it blew up
    instead of propagating NaNs.
    """
    grad = as_vector(grad)
    if grad.shape[0] != group.n:
        raise InvalidHyperparameterError(
            f"gradient length {grad.shape[0]} != group size {group.n}")
    if not np.isfinite(grad).all():
        raise GradientOverflowError(group.group_id, t, "non-finite gradient entry")

    eta_t = state.eta * multiplier_at(sched, t)
    buf = state._group_buffers(group)
    if state.kind == "sgd":
        kernels.sgd_step(group.w, grad, eta_t)
    elif state.kind == "momentum":
        kernels.momentum_step(group.w, grad, buf["momentum"], eta_t, state.mu)
        if not np.isfinite(buf["momentum"]).all():
            raise GradientOverflowError(group.group_id, t, "non-finite momentum buffer")
    else:
        buf["t"] += 1
        kernels.adam_step(group.w, grad, buf["m"], buf["v"], eta_t,
                          state.beta1, state.beta2, state.eps_adam, buf["t"])
        if not (np.isfinite(buf["m"]).all() and np.isfinite(buf["v"]).all()):
            raise GradientOverflowError(group.group_id, t, "non-finite moment accumulator")
    if not np.isfinite(group.w).all():
        raise GradientOverflowError(group.group_id, t, "non-finite weight after update")
    return group


def make_theorem1_multipliers(lam: float, eta: float, T: int, p0: float = 1.0):
    """Multipliers that let an undecayed run retrace a decayed run.

    With coupled decay the update contracts weights by (1 - lam*eta) before
    the task step; an undecayed run started from ``p0`` times the decayed
    run's weights retraces the same normalized trajectory when its t-th
    update (0-based) is scaled by d[t] = 1 / (p_t^2 * (1 - lam*eta)) where
    p_{t+1} = (1 - lam*eta) * p_t. Returns (d, p) with len(d) == T and
    len(p) == T + 1; the one-step similar-triangle identity
    w_decayed_1 == (1 - lam*eta) * w_scaled_1 fixes the indexing.
    """
    if T < 1:
        raise InvalidHyperparameterError("T must be >= 1")
    if p0 <= 0:
        raise InvalidHyperparameterError("p0 must be positive")
    if lam < 0 or eta <= 0:
        raise InvalidHyperparameterError("need lambda >= 0 and eta > 0")
    le = lam * eta
    if le >= 1.0:
        raise InvalidHyperparameterError(
            f"lambda * eta = {le:g} >= 1; the per-step contraction (1 - lambda*eta) must stay positive")
    p = np.empty(T + 1)
    p[0] = p0
    for q in range(T):
        p[q + 1] = (1.0 - le) * p[q]
    d = 1.0 / (p[:T] ** 2 * (1.0 - le))
    return d, p
