from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import pandas as pd

from analytics.computation import make_rng
from gridflow.exceptions import BadParameter, DimensionMismatch, NonFiniteLoss

from .resnet import ResidualNet, backward, forward, infer, mse_loss

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    """
    Mini-batch Adam with early stopping on validation MSE.

    Defaults: batch 32, lr 1e-3 (1e-4 for convergence-rate studies),
    betas (0.9, 0.999), eps 1e-8, patience 20 epochs, min_delta 1e-7.
    """

    batch_size: int = 32
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    max_epochs: int = 500
    patience: int = 20
    min_delta: float = 1e-7
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1:
            raise BadParameter(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_rate <= 0 or self.epsilon <= 0:
            raise BadParameter("learning_rate and epsilon must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise BadParameter(f"Adam betas must lie in [0, 1), got ({self.beta1}, {self.beta2})")
        if self.max_epochs < 1 or self.patience < 1 or self.min_delta < 0:
            raise BadParameter("max_epochs and patience must be >= 1, min_delta >= 0")


@dataclass
class TrainTrace:
    train_mse: list[float] = field(default_factory=list)
    val_mse: list[float] = field(default_factory=list)
    best_val_mse: list[float] = field(default_factory=list)
    seconds: list[float] = field(default_factory=list)
    best_epoch: int = 0
    initial_train_mse: float = float("nan")
    initial_val_mse: float = float("nan")
    stop_reason: str = ""

    @property
    def epochs(self) -> int:
        return len(self.train_mse)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "epoch": np.arange(1, self.epochs + 1),
            "train_mse": self.train_mse,
            "val_mse": self.val_mse,
            "best_val_mse": self.best_val_mse,
            "seconds": self.seconds,
        })


class Adam:
    def __init__(self, params: list[np.ndarray], cfg: TrainConfig):
        self.cfg = cfg
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params: list[np.ndarray], grads: list[np.ndarray], frozen: frozenset = frozenset()) -> None:
        """In-place update; indices in ``frozen`` are skipped."""
        cfg = self.cfg
        self.t += 1
        correction1 = 1.0 - cfg.beta1 ** self.t
        correction2 = 1.0 - cfg.beta2 ** self.t
        for i, (p, g) in enumerate(zip(params, grads)):
            if i in frozen:
                continue
            self.m[i] = cfg.beta1 * self.m[i] + (1.0 - cfg.beta1) * g
            self.v[i] = cfg.beta2 * self.v[i] + (1.0 - cfg.beta2) * g * g
            m_hat = self.m[i] / correction1
            v_hat = self.v[i] / correction2
            p -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)


def dataset_mse(model: ResidualNet, X: np.ndarray, Y: np.ndarray) -> float:
    return float(np.mean((infer(model, X) - Y) ** 2))


def _check_split(name: str, X: np.ndarray, Y: np.ndarray, width: int) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.ndim != 2 or Y.shape != X.shape or X.shape[1] != width:
        raise DimensionMismatch(f"{name} split shapes {X.shape}, {Y.shape} do not match network width {width}")
    if X.shape[0] == 0:
        raise BadParameter(f"{name} split is empty")
    return X, Y


def train(
    model: ResidualNet,
    train_data: tuple[np.ndarray, np.ndarray],
    val_data: tuple[np.ndarray, np.ndarray],
    cfg: TrainConfig,
    *,
    freeze_trunk: bool = False,
    on_epoch: Optional[Callable[[int, float, float], None]] = None,
) -> tuple[ResidualNet, TrainTrace]:
    """
    Train a copy of ``model``; returns the best-validation parameters and the trace.

    Each epoch reshuffles the training rows with a stream derived from
    ``cfg.seed``; validation is checked once per epoch.
    """
    X, Y = _check_split("train", *train_data, model.spec.width)
    X_val, Y_val = _check_split("val", *val_data, model.spec.width)
    model = model.copy()
    params = model.parameters()
    n_trunk = 2 * len(model.weights)
    frozen = set(range(n_trunk)) if freeze_trunk else set()
    if not model.spec.shortcut:
        frozen |= {n_trunk, n_trunk + 1}
    frozen = frozenset(frozen)

    optimizer = Adam(params, cfg)
    rng = make_rng(cfg.seed, "shuffle")
    trace = TrainTrace(
        initial_train_mse=dataset_mse(model, X, Y),
        initial_val_mse=dataset_mse(model, X_val, Y_val),
    )
    best_val = trace.initial_val_mse
    best = model.copy()
    wait = 0
    n = X.shape[0]

    for epoch in range(1, cfg.max_epochs + 1):
        started = time.perf_counter()
        order = rng.permutation(n)
        for batch, lo in enumerate(range(0, n, cfg.batch_size), start=1):
            idx = order[lo:lo + cfg.batch_size]
            Y_hat, cache = forward(model, X[idx])
            loss, dY = mse_loss(Y_hat, Y[idx])
            if not np.isfinite(loss):
                logger.error(f"Non-finite loss at epoch {epoch}, batch {batch}")
                raise NonFiniteLoss(epoch, batch)
            optimizer.step(params, backward(model, cache, dY), frozen)

        train_mse = dataset_mse(model, X, Y)
        val_mse = dataset_mse(model, X_val, Y_val)
        if not (np.isfinite(train_mse) and np.isfinite(val_mse)):
            raise NonFiniteLoss(epoch, -(-n // cfg.batch_size))
        trace.train_mse.append(train_mse)
        trace.val_mse.append(val_mse)
        trace.seconds.append(time.perf_counter() - started)

        if val_mse < best_val - cfg.min_delta:
            best_val = val_mse
            best = model.copy()
            trace.best_epoch = epoch
            wait = 0
        else:
            wait += 1
        trace.best_val_mse.append(best_val)
        logger.info(f"Epoch {epoch}: train {train_mse:.3e}, val {val_mse:.3e}, best {best_val:.3e}")
        if on_epoch is not None:
            on_epoch(epoch, train_mse, val_mse)
        if wait >= cfg.patience:
            trace.stop_reason = f"no improvement above {cfg.min_delta:g} for {cfg.patience} epochs"
            logger.info(f"Early stop at epoch {epoch}; restoring epoch {trace.best_epoch}")
            break
    else:
        trace.stop_reason = f"reached max_epochs={cfg.max_epochs}"

    return best, trace
