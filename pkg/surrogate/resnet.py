"""
Residual surrogate: an affine+ReLU trunk summed with a fully connected
shortcut layer,

    y = trunk(x) + Ws x + bs.

Trunk weights are stored (fan_in, fan_out) so a batch evaluates as X @ W + b;
the shortcut keeps the (outputs, inputs) orientation of AffineModel.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from analytics.computation import (
    AffineModel,
    Provenance,
    init_jacobian,
    init_linearized_pf,
    make_rng,
    predict,
    ridge_fit,
)
from gridflow.exceptions import BadParameter, DimensionMismatch, MissingContext
from network.case_io import Network

logger = logging.getLogger(__name__)

TRUNK_OUTPUT_INITS = ("he", "zero")
# leaky-ReLU slope for trunk He-uniform draws; bound becomes 1/sqrt(fan_in)
TRUNK_HE_SLOPE = math.sqrt(5.0)


class InitScheme(str, Enum):
    RANDOM = "random"
    DATA = "data"
    LPF = "lpf"
    JAC = "jac"

    @property
    def provenance(self) -> Provenance:
        return {
            InitScheme.RANDOM: Provenance.RANDOM,
            InitScheme.DATA: Provenance.RIDGE,
            InitScheme.LPF: Provenance.LINEARIZED_PF,
            InitScheme.JAC: Provenance.JACOBIAN,
        }[self]


@dataclass(frozen=True)
class NetSpec:
    layer_sizes: tuple[int, ...]
    shortcut: bool = True
    trunk_output_init: str = "he"

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(sizes) < 3:
            raise BadParameter(f"need at least one hidden layer, got layer sizes {list(sizes)}")
        if sizes[0] != sizes[-1]:
            raise BadParameter(f"input width {sizes[0]} must equal output width {sizes[-1]}")
        if min(sizes) < 1:
            raise BadParameter(f"layer sizes must be positive, got {list(sizes)}")
        if self.trunk_output_init not in TRUNK_OUTPUT_INITS:
            raise BadParameter(f"trunk_output_init must be one of {TRUNK_OUTPUT_INITS}")

    @classmethod
    def for_network(cls, net: Network, hidden: Sequence[int], **kwargs) -> "NetSpec":
        return cls(layer_sizes=(net.dimension, *hidden, net.dimension), **kwargs)

    @property
    def width(self) -> int:
        return self.layer_sizes[0]

    def to_dict(self) -> dict:
        return {
            "layer_sizes": list(self.layer_sizes),
            "shortcut": self.shortcut,
            "trunk_output_init": self.trunk_output_init,
        }


@dataclass(eq=False)
class ResidualNet:
    spec: NetSpec
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    Ws: np.ndarray
    bs: np.ndarray
    provenance: Provenance
    seed: int = 0

    def __post_init__(self):
        sizes = self.spec.layer_sizes
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise DimensionMismatch(f"{len(self.weights)} trunk layers for layer sizes {list(sizes)}")
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            if W.shape != (sizes[i], sizes[i + 1]) or b.shape != (sizes[i + 1],):
                raise DimensionMismatch(f"trunk layer {i} has shapes {W.shape}, {b.shape}")
        if self.Ws.shape != (self.spec.width, self.spec.width) or self.bs.shape != (self.spec.width,):
            raise DimensionMismatch(f"shortcut shapes {self.Ws.shape}, {self.bs.shape} do not match width {self.spec.width}")

    @property
    def shortcut(self) -> AffineModel:
        return AffineModel(Ws=self.Ws, bs=self.bs, provenance=self.provenance)

    def parameters(self) -> list[np.ndarray]:
        """Tensors in checkpoint order: W1, b1, ..., WL, bL, Ws, bs."""
        out = []
        for W, b in zip(self.weights, self.biases):
            out.extend([W, b])
        out.extend([self.Ws, self.bs])
        return out

    def copy(self) -> "ResidualNet":
        return ResidualNet(
            spec=self.spec,
            weights=[W.copy() for W in self.weights],
            biases=[b.copy() for b in self.biases],
            Ws=self.Ws.copy(),
            bs=self.bs.copy(),
            provenance=self.provenance,
            seed=self.seed,
        )


@dataclass(eq=False)
class ForwardCache:
    X: np.ndarray
    activations: list[np.ndarray] = field(default_factory=list)  # inputs of each trunk layer
    pre_activations: list[np.ndarray] = field(default_factory=list)  # hidden z before ReLU


def he_uniform(rng: np.random.Generator, fan_in: int, shape: tuple[int, ...], slope: float = 0.0) -> np.ndarray:
    bound = np.sqrt(6.0 / ((1.0 + slope**2) * fan_in))
    return rng.uniform(-bound, bound, size=shape)


def _shortcut_for(
    scheme: InitScheme,
    spec: NetSpec,
    rng: np.random.Generator,
    net: Optional[Network],
    X: Optional[np.ndarray],
    Y: Optional[np.ndarray],
    ridge_lambda: Optional[float],
    standardize: bool,
) -> AffineModel:
    if scheme is InitScheme.RANDOM:
        d = spec.width
        return AffineModel(Ws=he_uniform(rng, d, (d, d)), bs=np.zeros(d), provenance=Provenance.RANDOM)
    if scheme is InitScheme.DATA:
        if X is None or Y is None:
            raise MissingContext(scheme.value, "training data (X, Y)")
        return ridge_fit(X, Y, ridge_lambda, standardize=standardize)
    if net is None:
        raise MissingContext(scheme.value, "a parsed network")
    if scheme is InitScheme.LPF:
        return init_linearized_pf(net)
    return init_jacobian(net)


def init_net(
    spec: NetSpec,
    scheme,
    *,
    net: Optional[Network] = None,
    X: Optional[np.ndarray] = None,
    Y: Optional[np.ndarray] = None,
    seed: int = 0,
    ridge_lambda: Optional[float] = None,
    standardize: bool = False,
) -> ResidualNet:
    """
    Build a ResidualNet. Every trunk layer is fan-in-scaled He-uniform for
    every scheme; ``trunk_output_init="zero"`` zero-fills the last one so the
    net starts equal to its shortcut. The shortcut is random (Random), a ridge
    fit (Data), the DLPF pseudo-inverse (LPF) or the inverse base-case
    Jacobian (Jac).
    """
    scheme = InitScheme(scheme)
    rng = make_rng(seed, "init")
    sizes = spec.layer_sizes
    weights, biases = [], []
    last = len(sizes) - 2
    for i in range(len(sizes) - 1):
        shape = (sizes[i], sizes[i + 1])
        if i == last and spec.trunk_output_init == "zero":
            weights.append(np.zeros(shape))
        else:
            weights.append(he_uniform(rng, sizes[i], shape, TRUNK_HE_SLOPE))
        biases.append(np.zeros(sizes[i + 1]))

    if spec.shortcut:
        affine = _shortcut_for(scheme, spec, rng, net, X, Y, ridge_lambda, standardize)
        if affine.Ws.shape != (spec.width, spec.width):
            raise DimensionMismatch(f"shortcut {affine.Ws.shape} does not match width {spec.width}")
        Ws, bs, provenance = affine.Ws.copy(), affine.bs.copy(), affine.provenance
    else:
        Ws, bs, provenance = np.zeros((spec.width, spec.width)), np.zeros(spec.width), scheme.provenance

    logger.info(f"Initialized {list(sizes)} residual net with {provenance.value} shortcut (seed {seed})")
    return ResidualNet(spec=spec, weights=weights, biases=biases, Ws=Ws, bs=bs, provenance=provenance, seed=seed)


def _check_input(model: ResidualNet, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.spec.width:
        raise DimensionMismatch(f"input width {X.shape[1]} does not match network width {model.spec.width}")
    return X


def trunk(model: ResidualNet, X) -> np.ndarray:
    X = _check_input(model, X)
    h = X
    for W, b in zip(model.weights[:-1], model.biases[:-1]):
        h = np.maximum(h @ W + b, 0.0)
    return h @ model.weights[-1] + model.biases[-1]


def forward(model: ResidualNet, X) -> tuple[np.ndarray, ForwardCache]:
    X = _check_input(model, X)
    cache = ForwardCache(X=X)
    h = X
    for W, b in zip(model.weights[:-1], model.biases[:-1]):
        cache.activations.append(h)
        z = h @ W + b
        cache.pre_activations.append(z)
        h = np.maximum(z, 0.0)
    cache.activations.append(h)
    out = h @ model.weights[-1] + model.biases[-1]
    return out + predict(model.shortcut, X), cache


def backward(model: ResidualNet, cache: ForwardCache, dY: np.ndarray) -> list[np.ndarray]:
    """Gradients in ``parameters()`` order; the shortcut receives dY directly."""
    n_layers = len(model.weights)
    grads_W: list[np.ndarray] = [np.empty(0)] * n_layers
    grads_b: list[np.ndarray] = [np.empty(0)] * n_layers

    delta = dY
    for i in range(n_layers - 1, -1, -1):
        grads_W[i] = cache.activations[i].T @ delta
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ model.weights[i].T) * (cache.pre_activations[i - 1] > 0)

    grads = []
    for gW, gb in zip(grads_W, grads_b):
        grads.extend([gW, gb])
    if model.spec.shortcut:
        grads.extend([dY.T @ cache.X, dY.sum(axis=0)])
    else:
        grads.extend([np.zeros_like(model.Ws), np.zeros_like(model.bs)])
    return grads


def mse_loss(Y_hat: np.ndarray, Y: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean over all entries of the squared error, and its gradient with respect to Y_hat."""
    diff = Y_hat - Y
    return float(np.mean(diff ** 2)), 2.0 * diff / diff.size


def infer(model: ResidualNet, X, batch_size: int = 8192) -> np.ndarray:
    X = _check_input(model, X)
    if X.shape[0] <= batch_size:
        return forward(model, X)[0]
    return np.vstack([forward(model, X[i:i + batch_size])[0] for i in range(0, X.shape[0], batch_size)])
