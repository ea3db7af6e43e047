"""Small fully-connected network with reparameterized linear layers.

Each layer's weight matrix is normalized row-wise: one group per output
unit, so a layer with ``out_dim`` units holds ``out_dim`` groups of size
``in_dim``. Biases are never reparameterized and never regularized. ReLU
sits between layers, nothing after the last. The loss is mean softmax
cross entropy over the batch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .exceptions import ConfigurationError, DegenerateWeightError
from .linalg import RngStream, he_fanout_init, norm2
from .regularize import RegularizerSpec, reg_value
from .reparam import (
    IDENTITY,
    BackwardVariant,
    ReparamKind,
    WeightGroup,
    validate_group_size,
)

__all__ = [
    "LayerSpec", "Layer", "Network", "Batch",
    "forward_loss", "backward", "effective_lr",
    "network_objective", "accuracy",
]


@dataclass(frozen=True)
class LayerSpec:
    in_dim: int
    out_dim: int
    kind: ReparamKind = IDENTITY
    backward_variant: BackwardVariant = BackwardVariant.EXACT
    regularizer: RegularizerSpec = None
    has_bias: bool = False

    def __post_init__(self):
        if self.in_dim < 1 or self.out_dim < 1:
            raise ConfigurationError("layer dimensions must be positive")


@dataclass
class Layer:
    spec: LayerSpec
    weights: np.ndarray          # (out_dim, in_dim), rows are groups
    bias: np.ndarray | None      # (out_dim,) or None
    groups: list = field(default_factory=list)

    def row_group(self, i: int) -> WeightGroup:
        return self.groups[i]


class Batch:
    """Feature matrix (examples x features) with integer class labels."""

    def __init__(self, x, y):
        self.x = np.ascontiguousarray(x, dtype=np.float64)
        self.y = np.ascontiguousarray(y, dtype=np.int64)
        if self.x.ndim != 2:
            raise ConfigurationError(f"batch features must be 2-d, got {self.x.shape}")
        if self.y.shape != (self.x.shape[0],):
            raise ConfigurationError("labels must align with feature rows")

    def __len__(self):
        return self.x.shape[0]


class Network:
    def __init__(self, layers: list[Layer]):
        if not layers:
            raise ConfigurationError("network needs at least one layer")
        for a, b in zip(layers, layers[1:]):
            if a.spec.out_dim != b.spec.in_dim:
                raise ConfigurationError(
                    f"layer dimensions do not chain: {a.spec.out_dim} -> {b.spec.in_dim}")
        self.layers = layers

    @classmethod
    def build(cls, specs: list[LayerSpec], seed: int) -> "Network":
        rng = RngStream(seed, lane=1)
        layers = []
        for li, spec in enumerate(specs):
            w = he_fanout_init(spec.out_dim, spec.in_dim, rng)
            bias = np.zeros(spec.out_dim) if spec.has_bias else None
            ok = validate_group_size(spec.in_dim, spec.kind)
            groups = [
                WeightGroup(w[r], spec.kind, f"L{li}.r{r}", undersized=not ok)
                for r in range(spec.out_dim)
            ]
            layers.append(Layer(spec, w, bias, groups))
        return cls(layers)

    def copy(self) -> "Network":
        layers = []
        for li, layer in enumerate(self.layers):
            w = layer.weights.copy()
            bias = None if layer.bias is None else layer.bias.copy()
            groups = [
                WeightGroup(w[r], layer.spec.kind, g.group_id, undersized=g.undersized)
                for r, g in enumerate(layer.groups)
            ]
            layers.append(Layer(layer.spec, w, bias, groups))
        return Network(layers)

    def groups(self):
        for layer in self.layers:
            yield from layer.groups

    @property
    def in_dim(self) -> int:
        return self.layers[0].spec.in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].spec.out_dim


def _transform_rows(layer: Layer) -> np.ndarray:
    """Apply the layer's reparameterization to every weight row, checking
    for degenerate rows first so errors carry the group id."""
    kind = layer.spec.kind
    w = layer.weights
    if kind.family == "identity":
        return w
    if kind.family == "wn":
        norms2 = np.einsum("ij,ij->i", w, w)
        if not norms2.all():
            r = int(np.flatnonzero(norms2 == 0.0)[0])
            raise DegenerateWeightError(layer.groups[r].group_id, "zero norm under length normalization")
        return kernels.fwd_wn(w)
    c = w - w.mean(axis=1, keepdims=True)
    spread2 = np.einsum("ij,ij->i", c, c)
    if kind.family == "cwn":
        if not spread2.all():
            r = int(np.flatnonzero(spread2 == 0.0)[0])
            raise DegenerateWeightError(layer.groups[r].group_id, "constant row under centered normalization")
        return kernels.fwd_cwn(w)
    if kind.eps_denom == 0.0 and not spread2.all():
        r = int(np.flatnonzero(spread2 == 0.0)[0])
        raise DegenerateWeightError(layer.groups[r].group_id, "zero spread under standardization")
    return kernels.fwd_ws(w, kind.eps_denom)


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def forward_loss(net: Network, batch: Batch):
    """Mean cross-entropy of softmax logits; returns (loss, cache)."""
    if len(batch) == 0:
        raise ConfigurationError("batch must be nonempty")
    if batch.y.size and (batch.y.min() < 0 or batch.y.max() >= net.out_dim):
        raise ConfigurationError("label outside the network's class range")
    h = batch.x
    inputs, preacts, transformed = [], [], []
    for i, layer in enumerate(net.layers):
        wp = _transform_rows(layer)
        z = h @ wp.T
        if layer.bias is not None:
            z = z + layer.bias
        inputs.append(h)
        preacts.append(z)
        transformed.append(wp)
        h = np.maximum(z, 0.0) if i < len(net.layers) - 1 else z
    logits = h
    m = len(batch)
    shifted = logits - logits.max(axis=1, keepdims=True)
    logprobs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    loss = float(-logprobs[np.arange(m), batch.y].mean())
    cache = {
        "inputs": inputs,
        "preacts": preacts,
        "transformed": transformed,
        "probs": np.exp(logprobs),
        "labels": batch.y,
        "logits": logits,
    }
    return loss, cache


def backward(net: Network, cache):
    """Task gradients for every layer from a forward_loss cache.

    Returns a list of (weight_grads, bias_grads) per layer, where
    weight_grads has the layer's (out_dim, in_dim) shape and bias_grads is
    None for bias-free layers.
    """
    m = cache["probs"].shape[0]
    dz = cache["probs"].copy()
    dz[np.arange(m), cache["labels"]] -= 1.0
    dz /= m
    grads = [None] * len(net.layers)
    for i in reversed(range(len(net.layers))):
        layer = net.layers[i]
        h = cache["inputs"][i]
        wp = cache["transformed"][i]
        d_wp = dz.T @ h
        db = dz.sum(axis=0) if layer.bias is not None else None
        if i > 0:
            dh = dz @ wp
            dz = dh * (cache["preacts"][i - 1] > 0.0)
        grads[i] = (_pullback_rows(layer, d_wp), db)
    return grads


def _pullback_rows(layer: Layer, d_wp: np.ndarray) -> np.ndarray:
    kind = layer.spec.kind
    variant = layer.spec.backward_variant
    w = layer.weights
    if variant is BackwardVariant.DIAGONAL:
        if kind.family == "wn":
            return kernels.bwd_wn_diag(w, d_wp)
        if kind.family == "ws":
            return kernels.bwd_ws_diag(w, d_wp, kind.eps_denom)
        from .exceptions import UnsupportedVariantError

        raise UnsupportedVariantError(f"diagonal backward is not defined for '{kind.family}'")
    if kind.family == "identity":
        return d_wp
    if kind.family == "wn":
        return kernels.bwd_wn_exact(w, d_wp)
    if kind.family == "cwn":
        return kernels.bwd_cwn_exact(w, d_wp)
    return kernels.bwd_ws_exact(w, d_wp, kind.eps_denom)


def effective_lr(group: WeightGroup, eta_t: float, identity_exponent: float = 1.0) -> float:
    """Step-size factor multiplying the direction-space gradient.

    Inversely proportional to the group's magnitude: eta/|w| for length
    normalization, eta/std for standardization, eta/|w - mean| for the
    centered variant. Identity groups use eta/|w|^c with configurable
    exponent so unnormalized layers can be charted on a comparable scale.
    """
    fam = group.kind.family
    if fam == "wn":
        k = group.norm
        if k == 0.0:
            raise DegenerateWeightError(group.group_id, "zero norm in effective learning rate")
        return eta_t / k
    if fam == "ws":
        _, v = group.mean_std
        denom = v + group.kind.eps_denom
        if denom == 0.0:
            raise DegenerateWeightError(group.group_id, "zero spread in effective learning rate")
        return eta_t / denom
    if fam == "cwn":
        _, v = group.mean_std
        if v == 0.0:
            raise DegenerateWeightError(group.group_id, "zero spread in effective learning rate")
        return eta_t / (v * np.sqrt(group.n))
    k = group.norm
    if k == 0.0:
        raise DegenerateWeightError(group.group_id, "zero norm in effective learning rate")
    return eta_t / k ** identity_exponent


def network_objective(net: Network, batch: Batch) -> float:
    """Task loss plus every layer's regularizer over its row groups."""
    loss, _ = forward_loss(net, batch)
    total = loss
    for layer in net.layers:
        spec = layer.spec.regularizer
        if spec is None:
            continue
        for g in layer.groups:
            total += reg_value(g, spec)
    return total


def accuracy(net: Network, batch: Batch) -> float:
    _, cache = forward_loss(net, batch)
    return float((cache["logits"].argmax(axis=1) == batch.y).mean())
