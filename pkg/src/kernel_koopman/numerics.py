"""Dense decompositions with explicit truncation and normalization rules."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    DefectiveMatrix,
    NotSymmetric,
    RankZero,
    RepeatedEigenvalueWarning,
    ZeroSingularValue,
)

__all__ = [
    "TruncationPolicy",
    "TruncatedBasis",
    "EigenPairs",
    "truncated_sym_eig",
    "general_eig",
    "pinv_diag",
    "eig_order",
]

COND_LIMIT = 1e12
# Gramian eigenvalues below this fraction of the largest are roundoff
NOISE_FLOOR = 10 * np.finfo(float).eps


@dataclass(frozen=True)
class TruncationPolicy:
    """Which singular values survive.

    Exactly one of ``rank`` (keep the ``rank`` largest) or ``threshold``
    (keep ``s >= threshold * s_max``) is set. Thresholds apply to singular
    values, i.e. square roots of Gramian eigenvalues, so a threshold ``t``
    here is a relative cutoff of ``t**2`` on the Gramian spectrum.
    """

    rank: int | None = None
    threshold: float | None = None

    def __post_init__(self):
        if (self.rank is None) == (self.threshold is None):
            raise ValueError("set exactly one of rank or threshold")
        if self.rank is not None and (int(self.rank) != self.rank or self.rank < 1):
            raise ValueError(f"rank must be a positive integer, got {self.rank}")
        if self.threshold is not None and not 0 < self.threshold <= 1:
            raise ValueError(f"threshold must lie in (0, 1], got {self.threshold}")

    @classmethod
    def fixed_rank(cls, r: int) -> "TruncationPolicy":
        return cls(rank=int(r))

    @classmethod
    def relative(cls, tau: float) -> "TruncationPolicy":
        return cls(threshold=float(tau))

    def count(self, s_desc: np.ndarray) -> int:
        """Number of leading entries of the descending, positive ``s_desc`` to keep."""
        if len(s_desc) == 0:
            return 0
        if self.rank is not None:
            return min(self.rank, len(s_desc))
        return int(np.count_nonzero(s_desc >= self.threshold * s_desc[0]))

    def describe(self) -> str:
        return f"rank:{self.rank}" if self.rank is not None else f"threshold:{self.threshold!r}"


DEFAULT_POLICY = TruncationPolicy.relative(1e-6)


@dataclass(frozen=True)
class TruncatedBasis:
    """Leading eigenvectors ``Q`` of a Gramian and ``sigma = sqrt(eigenvalues)``."""

    Q: np.ndarray
    sigma: np.ndarray
    discarded: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def r(self) -> int:
        return self.sigma.shape[0]

    @property
    def M(self) -> int:
        return self.Q.shape[0]


def truncated_sym_eig(G, policy: TruncationPolicy = DEFAULT_POLICY) -> TruncatedBasis:
    """Method-of-snapshots factorization ``G ~ Q diag(sigma**2) Q.T``.

    Eigenvalues at or below ``NOISE_FLOOR * max(eig)`` are dropped before the
    policy is applied; on a positive semidefinite Gramian they are roundoff,
    and keeping them would amplify that roundoff by ``1 / sigma``. ``discarded`` holds the
    eigenvalues of ``G`` that were not kept (descending, clamped at zero).
    """
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1] or G.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {G.shape}")
    gnorm = np.abs(G).max()
    if np.abs(G - G.T).max() > 1e-10 * gnorm:
        raise NotSymmetric("Gramian is not symmetric to 1e-10 relative")
    evals, evecs = scipy.linalg.eigh(0.5 * (G + G.T))
    evals, evecs = evals[::-1], evecs[:, ::-1]
    norm2 = max(abs(evals[0]), abs(evals[-1]))
    if evals[-1] < -1e-10 * norm2:
        warnings.warn(
            f"Gramian has eigenvalue {evals[-1]:.3e}, far below roundoff; it is not PSD",
            RuntimeWarning,
            stacklevel=2,
        )
    n_pos = int(np.count_nonzero(evals > NOISE_FLOOR * max(evals[0], 0.0)))
    sigma = np.sqrt(evals[:n_pos])
    r = policy.count(sigma)
    if r == 0:
        raise RankZero("no Gramian eigenvalue survived truncation")
    return TruncatedBasis(
        Q=np.ascontiguousarray(evecs[:, :r]),
        sigma=sigma[:r].copy(),
        discarded=np.maximum(evals[r:], 0.0),
    )


def pinv_diag(sigma) -> np.ndarray:
    """Elementwise reciprocal of retained singular values."""
    sigma = np.asarray(sigma, dtype=float)
    if np.any(~(sigma > 0)):
        raise ZeroSingularValue("singular values must be strictly positive after truncation")
    return 1.0 / sigma


def eig_order(values: np.ndarray) -> np.ndarray:
    """Library-wide ordering: ``|mu|`` descending, then imaginary part descending."""
    return np.lexsort((-values.imag, -np.abs(values)))


@dataclass(frozen=True)
class EigenPairs:
    """Right eigenvectors as columns of ``right``; ``left @ right = I``.

    Rows of ``left`` are the scaled left eigenvectors ``w_k^*``.
    """

    values: np.ndarray
    right: np.ndarray
    left: np.ndarray
    cond: float
    repeated: bool = False

    @property
    def well_conditioned(self) -> bool:
        return self.cond <= COND_LIMIT


def _pin_phase(V: np.ndarray) -> np.ndarray:
    V = V / np.linalg.norm(V, axis=0)
    # largest entry made real positive; conjugate columns stay conjugate
    idx = np.argmax(np.abs(V) - 1e-12 * np.arange(V.shape[0])[:, None], axis=0)
    ph = V[idx, np.arange(V.shape[1])]
    return V * (np.abs(ph) / ph)


def general_eig(Khat, check: bool = True) -> EigenPairs:
    """Right and left eigenvectors of a real square matrix.

    Right vectors have unit norm with their largest entry real and positive;
    the left vectors are the rows of the inverse of the right-vector matrix, so
    ``w_i^* v_j = delta_ij``. If that matrix has condition number above 1e12
    a :class:`DefectiveMatrix` is raised, unless ``check`` is false, in which
    case a pseudoinverse stands in and the caller is responsible for flagging
    the result.
    """
    K = np.asarray(Khat, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {K.shape}")
    if not np.all(np.isfinite(K)):
        raise ValueError("matrix has non-finite entries")
    vals, V = scipy.linalg.eig(K)
    order = eig_order(vals)
    vals, V = vals[order], _pin_phase(V[:, order].astype(complex))
    cond = float(np.linalg.cond(V)) if V.size else 1.0
    if not np.isfinite(cond):
        cond = np.inf
    if cond > COND_LIMIT:
        if check:
            raise DefectiveMatrix(f"eigenvector matrix condition number {cond:.3e} exceeds {COND_LIMIT:.0e}")
        W = np.linalg.pinv(V)
    else:
        W = np.linalg.inv(V)
    repeated = False
    if len(vals) > 1:
        gaps = np.abs(vals[:, None] - vals[None, :])
        np.fill_diagonal(gaps, np.inf)
        scale = np.maximum(np.abs(vals)[:, None], np.abs(vals)[None, :])
        repeated = bool(np.any(gaps <= 1e-10 * np.maximum(scale, np.finfo(float).tiny)))
    if repeated:
        warnings.warn(
            "eigenvalues are not pairwise distinct; biorthogonality holds only blockwise",
            RepeatedEigenvalueWarning,
            stacklevel=2,
        )
    return EigenPairs(values=vals, right=V, left=W, cond=cond, repeated=repeated)
