"""Weight reparameterizations: length normalization (WN), centered length
normalization (CWN), and standardization (WS) with an optional denominator
shift, each with an exact vector-Jacobian backward and, for WN/WS, a
diagonal-only backward kept as a selectable fidelity variant.

The diagonal variant multiplies the incoming gradient by the diagonal of
the Jacobian elementwise and drops the cross terms; it is retained because
both variants factor as ``G(direction) / magnitude``, which is what the
learning-rate-scaling equivalence analysis needs, but only the exact
variant agrees with finite differences of the forward map.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .exceptions import DegenerateWeightError, GroupSizeWarning, UnsupportedVariantError
from .linalg import as_vector, mean_std, norm2

__all__ = [
    "ReparamKind", "IDENTITY", "WN", "CWN", "WS",
    "BackwardVariant", "WeightGroup",
    "forward", "backward", "validate_group_size",
    "DEFAULT_MIN_GROUP_SIZE",
]

DEFAULT_MIN_GROUP_SIZE = 8


@dataclass(frozen=True)
class ReparamKind:
    """Which transform a group uses. ``eps_denom`` only applies to 'ws',
    where zero recovers pure standardization."""

    family: str
    eps_denom: float = 0.0

    def __post_init__(self):
        if self.family not in ("identity", "wn", "cwn", "ws"):
            raise ValueError(f"unknown reparameterization family '{self.family}'")
        if self.eps_denom < 0:
            raise ValueError("eps_denom must be nonnegative")
        if self.eps_denom != 0.0 and self.family != "ws":
            raise ValueError("eps_denom is only meaningful for the 'ws' family")

    @property
    def normalized(self) -> bool:
        return self.family != "identity"

    @staticmethod
    def parse(text: str) -> "ReparamKind":
        """Parse 'identity', 'wn', 'cwn', 'ws', or 'ws:<eps>'."""
        text = text.strip().lower()
        if text.startswith("ws:"):
            return WS(float(text[3:]))
        if text == "ws":
            return WS()
        if text in ("identity", "wn", "cwn"):
            return ReparamKind(text)
        raise ValueError(f"cannot parse reparameterization kind '{text}'")

    def spec_string(self) -> str:
        if self.family == "ws" and self.eps_denom:
            return f"ws:{self.eps_denom:g}"
        return self.family


IDENTITY = ReparamKind("identity")
WN = ReparamKind("wn")
CWN = ReparamKind("cwn")


def WS(eps_denom: float = 0.0) -> ReparamKind:
    return ReparamKind("ws", eps_denom)


class BackwardVariant(enum.Enum):
    EXACT = "exact"
    DIAGONAL = "diagonal"

    @staticmethod
    def parse(text: str) -> "BackwardVariant":
        return BackwardVariant(text.strip().lower())


@dataclass
class WeightGroup:
    """One normalized parameter group: a flat trainable vector plus its
    transform kind. Derived quantities are recomputed on demand, never
    cached, so they can't go stale after in-place updates."""

    w: np.ndarray
    kind: ReparamKind = IDENTITY
    group_id: str = "group"
    undersized: bool = field(default=False, compare=False)

    def __post_init__(self):
        self.w = as_vector(self.w)

    @property
    def n(self) -> int:
        return self.w.shape[0]

    @property
    def norm(self) -> float:
        return norm2(self.w)

    @property
    def mean_std(self) -> tuple[float, float]:
        return mean_std(self.w)


def _check_nondegenerate(group: WeightGroup):
    fam = group.kind.family
    if fam == "wn":
        if norm2(group.w) == 0.0:
            raise DegenerateWeightError(group.group_id, "zero norm under length normalization")
    elif fam == "cwn":
        _, v = mean_std(group.w)
        if v == 0.0:
            raise DegenerateWeightError(group.group_id, "constant vector under centered normalization")
    elif fam == "ws":
        _, v = mean_std(group.w)
        if v == 0.0 and group.kind.eps_denom == 0.0:
            raise DegenerateWeightError(group.group_id, "zero spread under standardization")


def forward(group: WeightGroup) -> np.ndarray:
    """Apply the group's transform to its weights."""
    _check_nondegenerate(group)
    w = group.w[None, :]
    fam = group.kind.family
    if fam == "identity":
        return group.w.copy()
    if fam == "wn":
        return kernels.fwd_wn(w)[0]
    if fam == "cwn":
        return kernels.fwd_cwn(w)[0]
    return kernels.fwd_ws(w, group.kind.eps_denom)[0]


def backward(group: WeightGroup, grad_out, variant: BackwardVariant = BackwardVariant.EXACT) -> np.ndarray:
    """Pull a gradient w.r.t. the transformed weights back to the raw weights.

    EXACT is the full vector-Jacobian product. DIAGONAL keeps only the
    Jacobian diagonal (defined for 'wn' and 'ws'); it matches EXACT on the
    diagonal but differs as a full gradient.
    """
    grad_out = as_vector(grad_out)
    if grad_out.shape[0] != group.n:
        raise DegenerateWeightError(group.group_id, f"gradient length {grad_out.shape[0]} != group size {group.n}")
    _check_nondegenerate(group)
    fam = group.kind.family
    g = grad_out[None, :]
    w = group.w[None, :]
    if variant is BackwardVariant.DIAGONAL:
        if fam == "wn":
            return kernels.bwd_wn_diag(w, g)[0]
        if fam == "ws":
            return kernels.bwd_ws_diag(w, g, group.kind.eps_denom)[0]
        raise UnsupportedVariantError(f"diagonal backward is not defined for '{fam}'")
    if fam == "identity":
        return grad_out.copy()
    if fam == "wn":
        return kernels.bwd_wn_exact(w, g)[0]
    if fam == "cwn":
        return kernels.bwd_cwn_exact(w, g)[0]
    return kernels.bwd_ws_exact(w, g, group.kind.eps_denom)[0]


def validate_group_size(n: int, kind: ReparamKind, threshold: int = DEFAULT_MIN_GROUP_SIZE) -> bool:
    """Warn when a normalized group is too small to keep useful degrees of
    freedom (a 1-parameter length-normalized group is a constant sign).
    Returns True when the size is fine; never blocks execution."""
    if n < 1:
        raise ValueError("group size must be >= 1")
    if kind.normalized and n < threshold:
        warnings.warn(
            f"normalized group of size {n} is below the recommended minimum {threshold}; "
            f"normalization removes most of its degrees of freedom",
            GroupSizeWarning,
            stacklevel=2,
        )
        return False
    return True
