"""Regularizer values and gradients.

Plain L2 is the usual coupled weight decay term. The shifted variant moves
the penalty's minimum away from zero magnitude: for magnitude-style groups
the penalty is 0.5 * lam * (|w| - eps)^2, for mean/std-style groups it is
0.5 * lam * n * (mean^2 + (std - eps)^2). Its gradient vanishes when the
magnitude (or spread) equals eps, so weights are pinned away from the
degenerate zero region while still being decayed from above; the decay
factor lam * (1 - eps/|w|) grows with |w|, shrinking large weights harder.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import kernels
from .exceptions import ConfigurationError, DegenerateWeightError
from .reparam import WeightGroup

__all__ = ["Style", "L2", "EpsShiftedL2", "RegularizerSpec", "reg_value", "reg_grad", "style_for_kind"]


class Style(enum.Enum):
    MAGNITUDE = "magnitude"
    MEANSTD = "meanstd"


@dataclass(frozen=True)
class L2:
    lam: float

    def __post_init__(self):
        if self.lam < 0:
            raise ConfigurationError("lambda must be nonnegative")


@dataclass(frozen=True)
class EpsShiftedL2:
    lam: float
    epsilon: float
    style: Style

    def __post_init__(self):
        if self.lam < 0:
            raise ConfigurationError("lambda must be nonnegative")
        # epsilon == 0 is allowed and reduces exactly to plain L2; the
        # stability guarantee needs epsilon > 0.
        if self.epsilon < 0:
            raise ConfigurationError("epsilon must be nonnegative")


RegularizerSpec = L2 | EpsShiftedL2 | None


def style_for_kind(kind) -> Style:
    """The shifted-penalty style that matches a reparameterization kind."""
    if kind.family in ("wn", "cwn"):
        return Style.MAGNITUDE
    if kind.family == "ws":
        return Style.MEANSTD
    raise ConfigurationError("identity groups have no shifted-regularizer style")


def _check_pairing(group: WeightGroup, spec: EpsShiftedL2):
    fam = group.kind.family
    if spec.style is Style.MAGNITUDE and fam not in ("wn", "cwn"):
        raise ConfigurationError(
            f"magnitude-style shifted L2 pairs with wn/cwn groups, not '{fam}' (group '{group.group_id}')"
        )
    if spec.style is Style.MEANSTD and fam != "ws":
        raise ConfigurationError(
            f"mean/std-style shifted L2 pairs with ws groups, not '{fam}' (group '{group.group_id}')"
        )


def reg_value(group: WeightGroup, spec: RegularizerSpec) -> float:
    if spec is None:
        return 0.0
    if isinstance(spec, L2):
        k = group.norm
        return 0.5 * spec.lam * k * k
    _check_pairing(group, spec)
    if spec.style is Style.MAGNITUDE:
        k = group.norm
        return 0.5 * spec.lam * (k - spec.epsilon) ** 2
    m, v = group.mean_std
    return 0.5 * spec.lam * group.n * (m * m + (v - spec.epsilon) ** 2)


def reg_grad(group: WeightGroup, spec: RegularizerSpec) -> np.ndarray:
    if spec is None:
        return np.zeros_like(group.w)
    w = group.w[None, :]
    if isinstance(spec, L2):
        return kernels.l2_grad(w, spec.lam)[0]
    _check_pairing(group, spec)
    if spec.style is Style.MAGNITUDE:
        if group.norm == 0.0:
            raise DegenerateWeightError(group.group_id, "zero norm in shifted-L2 gradient")
        return kernels.mag_shift_grad(w, spec.lam, spec.epsilon)[0]
    _, v = group.mean_std
    if v == 0.0:
        raise DegenerateWeightError(group.group_id, "zero spread in shifted-L2 gradient")
    return kernels.meanstd_shift_grad(w, spec.lam, spec.epsilon)[0]
