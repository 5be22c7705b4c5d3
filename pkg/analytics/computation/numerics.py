from __future__ import annotations

import warnings
import zlib
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy import linalg
from scipy.linalg import lapack
from scipy.stats import beta as beta_dist
from scipy.stats import norm, weibull_min

from gridflow.exceptions import (
    BadParameter,
    DimensionMismatch,
    NonFinite,
    NotPositiveDefinite,
    SingularMatrix,
)

from ._header import LU_PIVOT_TOLERANCE, PINV_RCOND, PSD_JITTER

Size = Optional[Union[int, tuple[int, ...]]]


# --- random streams -------------------------------------------------------

def _purpose_key(purpose: str) -> int:
    return zlib.crc32(purpose.encode("utf-8"))


def make_rng(seed: int, purpose: str = "default") -> np.random.Generator:
    """
    Independent generator for a named purpose ("scenario", "shuffle", ...).
    Equal (seed, purpose) pairs always give bitwise-equal streams.
    """
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=(_purpose_key(purpose),))
    return np.random.Generator(np.random.PCG64(sequence))


def worker_rng(seed: int, worker_id: int, purpose: str = "worker") -> np.random.Generator:
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=(_purpose_key(purpose), int(worker_id)))
    return np.random.Generator(np.random.PCG64(sequence))


# --- distributions --------------------------------------------------------

@dataclass(frozen=True)
class StdNormal:
    pass


@dataclass(frozen=True)
class Weibull:
    k: float
    lam: float

    def __post_init__(self):
        if not (self.k > 0 and self.lam > 0):
            raise BadParameter(f"Weibull needs k > 0 and lambda > 0, got k={self.k}, lambda={self.lam}")


@dataclass(frozen=True)
class Beta:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise BadParameter(f"Beta needs alpha, beta > 0, got {self.alpha}, {self.beta}")


@dataclass(frozen=True)
class Bernoulli:
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise BadParameter(f"Bernoulli probability must lie in [0, 1], got {self.p}")


Distribution = Union[StdNormal, Weibull, Beta, Bernoulli]


def _open_uniform(u):
    # rng.random() may return exactly 0, where the normal inverse CDF is -inf
    return np.clip(u, 2.0 ** -53, 1.0 - 2.0 ** -53)


def transform_uniform(u, dist: Distribution):
    """Inverse-CDF transform of uniforms in [0, 1); shared by MC and QMC paths."""
    if isinstance(dist, StdNormal):
        return norm.ppf(_open_uniform(u))
    if isinstance(dist, Weibull):
        return weibull_min.ppf(_open_uniform(u), dist.k, scale=dist.lam)
    if isinstance(dist, Beta):
        return beta_dist.ppf(_open_uniform(u), dist.alpha, dist.beta)
    if isinstance(dist, Bernoulli):
        return (np.asarray(u) < dist.p).astype(float)
    raise BadParameter(f"unknown distribution {dist!r}")


def sample(rng: np.random.Generator, dist: Distribution, size: Size = None):
    """
    Draw variates. Normal and Weibull go through the inverse CDF, Beta is the
    ratio of two Gamma variates, Bernoulli thresholds a uniform.
    """
    if isinstance(dist, (StdNormal, Weibull)):
        out = transform_uniform(rng.random(size), dist)
    elif isinstance(dist, Beta):
        g1 = rng.standard_gamma(dist.alpha, size)
        g2 = rng.standard_gamma(dist.beta, size)
        out = g1 / (g1 + g2)
    elif isinstance(dist, Bernoulli):
        out = (rng.random(size) < dist.p).astype(float)
    else:
        raise BadParameter(f"unknown distribution {dist!r}")
    return float(out) if size is None else out


# --- dense linear algebra -------------------------------------------------

def _as_matrix(A, name: str = "A") -> np.ndarray:
    A = np.asarray(A)
    if A.dtype.kind not in "fc":
        A = A.astype(float)
    if A.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NonFinite(f"{name} contains non-finite entries")
    return A


def lu_solve(A, B) -> np.ndarray:
    """Solve A X = B by LU with partial pivoting; SingularMatrix on a tiny pivot."""
    A = _as_matrix(A)
    B = np.asarray(B)
    if A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"A must be square, got {A.shape}")
    if B.shape[0] != A.shape[0]:
        raise DimensionMismatch(f"B has {B.shape[0]} rows, A has {A.shape[0]}")
    if A.shape[0] == 0:
        return np.zeros(B.shape, dtype=np.result_type(A, B))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", linalg.LinAlgWarning)
        lu, piv = linalg.lu_factor(A, check_finite=False)

    threshold = LU_PIVOT_TOLERANCE * np.linalg.norm(A, np.inf)
    small = np.flatnonzero(np.abs(np.diag(lu)) <= threshold)
    if small.size:
        raise SingularMatrix(int(small[0]))
    return linalg.lu_solve((lu, piv), B, check_finite=False)


def pinv(A) -> np.ndarray:
    """Moore-Penrose pseudo-inverse; singular values below 1e-10 * max are dropped."""
    A = _as_matrix(A)
    if A.size == 0:
        return np.zeros(A.shape[::-1], dtype=A.dtype)
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    cutoff = PINV_RCOND * s.max()
    s_inv = np.zeros_like(s)
    keep = s > cutoff
    s_inv[keep] = 1.0 / s[keep]
    return (Vh.conj().T * s_inv) @ U.conj().T


def cholesky(A) -> np.ndarray:
    """Lower-triangular L with L L^T = A; NotPositiveDefinite names the failing row."""
    A = _as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"A must be square, got {A.shape}")
    if not np.allclose(A, A.T, rtol=1e-12, atol=1e-14):
        raise BadParameter("cholesky needs a symmetric matrix")
    if A.shape[0] == 0:
        return A.copy()
    L, info = lapack.dpotrf(np.asarray(A, dtype=float), lower=1, clean=1)
    if info > 0:
        raise NotPositiveDefinite(int(info) - 1)
    if info < 0:
        raise BadParameter(f"LAPACK potrf rejected argument {-info}")
    return L


def nearest_psd(C, jitter: float = PSD_JITTER) -> np.ndarray:
    """Clip negative eigenvalues to ``jitter`` and restore the unit diagonal."""
    C = _as_matrix(C, "C")
    C = 0.5 * (C + C.T)
    eigval, eigvec = np.linalg.eigh(C)
    repaired = (eigvec * np.maximum(eigval, jitter)) @ eigvec.T
    scale = np.sqrt(np.diag(repaired))
    return repaired / np.outer(scale, scale)
