from __future__ import annotations

import concurrent.futures
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from analytics.computation import make_rng, newton_raphson, unknowns_from_state
from analytics.computation._header import NR_MAX_ITER, NR_TOLERANCE
from gridflow.exceptions import (
    BadSpec,
    DimensionMismatch,
    Diverged,
    SingularJacobian,
    TooManyDivergences,
)
from network.case_io import Network

from ._header import CSV_FLOAT_FORMAT, MAX_DIVERGED_FRACTION
from .scenario import ScenarioSpec, sample_injections

logger = logging.getLogger(__name__)

SPLIT_NAMES = ("train", "val", "test")


def injection_columns(net: Network) -> list[str]:
    ids = net.bus_ids
    return (
        [f"pg_{ids[i]}" for i in net.pv]
        + [f"pl_{ids[i]}" for i in net.pq]
        + [f"ql_{ids[i]}" for i in net.pq]
    )


def unknown_columns(net: Network) -> list[str]:
    ids = net.bus_ids
    return (
        [f"va_{ids[i]}" for i in net.pv]
        + [f"va_{ids[i]}" for i in net.pq]
        + [f"vm_{ids[i]}" for i in net.pq]
    )


def _solve_chunk(net: Network, X: np.ndarray, tol: float, max_iter: int):
    Y = np.full(X.shape, np.nan)
    ok = np.zeros(X.shape[0], dtype=bool)
    iterations = np.zeros(X.shape[0], dtype=np.int64)
    for i, x in enumerate(X):
        try:
            state, iterations[i] = newton_raphson(net, x, tol=tol, max_iter=max_iter)
        except (Diverged, SingularJacobian) as e:
            logger.debug(f"Sample {i} of chunk dropped: {e}")
            continue
        Y[i] = unknowns_from_state(net, state)
        ok[i] = True
    return Y, ok, iterations


def solve_batch(
    net: Network,
    X: np.ndarray,
    *,
    tol: float = NR_TOLERANCE,
    max_iter: int = NR_MAX_ITER,
    threads: int = 1,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    NR-solve every row of X from flat start.

    Returns (Y, ok, iterations); rows that failed are NaN in Y and False in ok.
    Results are ordered by row regardless of the worker count.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != net.dimension:
        raise DimensionMismatch(f"injections have width {X.shape[1]}, expected {net.dimension}")
    workers = max(1, min(int(threads), X.shape[0]))
    if workers == 1:
        return _solve_chunk(net, X, tol, max_iter)

    bounds = np.linspace(0, X.shape[0], workers + 1).astype(int)
    chunks = [(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    results = {}
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as executor:
        futures = {
            executor.submit(_solve_chunk, net, X[lo:hi], tol, max_iter): k
            for k, (lo, hi) in enumerate(chunks)
        }
        for future in concurrent.futures.as_completed(futures):
            results[futures[future]] = future.result()

    ordered = [results[k] for k in range(len(chunks))]
    return (
        np.vstack([r[0] for r in ordered]),
        np.concatenate([r[1] for r in ordered]),
        np.concatenate([r[2] for r in ordered]),
    )


@dataclass(eq=False)
class Dataset:
    X: np.ndarray
    Y: np.ndarray
    splits: dict[str, np.ndarray]
    meta: dict = field(default_factory=dict)
    x_columns: Optional[list[str]] = None
    y_columns: Optional[list[str]] = None

    def split(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        idx = self.splits[name]
        return self.X[idx], self.Y[idx]

    def save(self, directory: str) -> None:
        os.makedirs(directory, exist_ok=True)
        x_cols = self.x_columns or [f"x{i}" for i in range(self.X.shape[1])]
        y_cols = self.y_columns or [f"y{i}" for i in range(self.Y.shape[1])]
        pd.DataFrame(self.X, columns=x_cols).to_csv(
            os.path.join(directory, "X.csv"), index=False, float_format=CSV_FLOAT_FORMAT
        )
        pd.DataFrame(self.Y, columns=y_cols).to_csv(
            os.path.join(directory, "Y.csv"), index=False, float_format=CSV_FLOAT_FORMAT
        )
        meta = dict(self.meta)
        meta["splits"] = {name: idx.tolist() for name, idx in self.splits.items()}
        with open(os.path.join(directory, "meta.json"), "w", encoding="utf-8") as f:
            json.dump(meta, f, indent=2, sort_keys=True)
            f.write("\n")
        logger.info(f"Saved dataset with {self.X.shape[0]} rows to {directory}")

    @classmethod
    def load(cls, directory: str) -> "Dataset":
        meta_path = os.path.join(directory, "meta.json")
        try:
            with open(meta_path, "r", encoding="utf-8") as f:
                meta = json.load(f)
        except FileNotFoundError as e:
            error_msg = f"Dataset metadata not found: {meta_path}"
            logger.error(error_msg)
            raise FileNotFoundError(error_msg) from e
        X_frame = pd.read_csv(os.path.join(directory, "X.csv"), float_precision="round_trip")
        Y_frame = pd.read_csv(os.path.join(directory, "Y.csv"), float_precision="round_trip")
        splits = {name: np.asarray(idx, dtype=np.int64) for name, idx in meta.pop("splits", {}).items()}
        return cls(
            X=X_frame.to_numpy(dtype=float),
            Y=Y_frame.to_numpy(dtype=float),
            splits=splits,
            meta=meta,
            x_columns=list(X_frame.columns),
            y_columns=list(Y_frame.columns),
        )


def split_indices(n_rows: int, requested: Sequence[int], seed: int) -> dict[str, np.ndarray]:
    """Disjoint, exhaustive train/val/test index sets in the requested proportions."""
    if len(requested) != 3 or min(requested) < 0 or sum(requested) <= 0:
        raise BadSpec(f"splits must be three non-negative sizes, got {list(requested)}")
    total = sum(requested)
    n_train = int(round(n_rows * requested[0] / total))
    n_val = min(int(round(n_rows * requested[1] / total)), n_rows - n_train)
    order = make_rng(seed, "split").permutation(n_rows)
    return {
        "train": np.sort(order[:n_train]),
        "val": np.sort(order[n_train:n_train + n_val]),
        "test": np.sort(order[n_train + n_val:]),
    }


def generate_dataset(
    net: Network,
    spec: ScenarioSpec,
    splits: Optional[Sequence[int]] = None,
    *,
    tol: float = NR_TOLERANCE,
    max_iter: int = NR_MAX_ITER,
    threads: int = 1,
    max_diverged_fraction: float = MAX_DIVERGED_FRACTION,
    case_text: str = "",
) -> Dataset:
    """
    Sample injections and solve each row by NR. Diverged rows are dropped and
    counted; more than ``max_diverged_fraction`` of the request is an error.
    """
    splits = list(splits) if splits is not None else [spec.samples, 0, 0]
    X = sample_injections(net, spec)
    Y, ok, iterations = solve_batch(net, X, tol=tol, max_iter=max_iter, threads=threads)

    dropped = np.flatnonzero(~ok)
    requested = X.shape[0]
    if len(dropped) > max_diverged_fraction * requested:
        logger.error(f"{len(dropped)} of {requested} samples diverged")
        raise TooManyDivergences(len(dropped), requested)
    if len(dropped):
        logger.warning(f"Dropped {len(dropped)} diverged samples of {requested}")

    X, Y = X[ok], Y[ok]
    split_sets = split_indices(X.shape[0], splits, spec.seed)
    meta = {
        "case": net.name,
        "dimension": net.dimension,
        "spec_hash": spec.digest(case_text),
        "scenario": spec.to_dict(),
        "seed": spec.seed,
        "nr_tolerance": tol,
        "nr_max_iter": max_iter,
        "requested": requested,
        "retained": int(X.shape[0]),
        "dropped_count": int(len(dropped)),
        "dropped_indices": dropped.tolist(),
        "requested_splits": dict(zip(SPLIT_NAMES, (int(s) for s in splits))),
        "split_sizes": {name: int(len(idx)) for name, idx in split_sets.items()},
        "mean_iterations": float(iterations[ok].mean()) if ok.any() else 0.0,
    }
    return Dataset(
        X=X,
        Y=Y,
        splits=split_sets,
        meta=meta,
        x_columns=injection_columns(net),
        y_columns=unknown_columns(net),
    )
