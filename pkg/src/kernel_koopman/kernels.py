"""Kernel functions, Gram matrices and snapshot containers.

A kernel ``f(x, z)`` stands in for the feature-space inner product
``psi(z) . psi(x)`` so the dictionary ``psi`` never has to be formed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .errors import DegenerateData, DimensionMismatch

__all__ = [
    "Kernel",
    "PolynomialKernel",
    "GaussianKernel",
    "LinearKernel",
    "parse_kernel",
    "kernel_eval",
    "gram",
    "SnapshotSet",
    "GramPair",
    "gram_pair",
    "normalize_snapshots",
]


class Kernel:
    """Base class. Subclasses implement :meth:`_matrix` on 2-D inputs."""

    family: str = ""

    def __call__(self, x, z) -> float:
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
        if x.ndim != 1 or x.shape != z.shape:
            raise DimensionMismatch(f"kernel inputs have shapes {x.shape} and {z.shape}")
        return float(self._matrix(x[None, :], z[None, :])[0, 0])

    def _matrix(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def resolve(self, X: np.ndarray) -> "Kernel":
        """Fill in data-dependent defaults. Most kernels have none."""
        return self

    def spec(self) -> str:
        """String form accepted by :func:`parse_kernel`."""
        raise NotImplementedError


@dataclass(frozen=True)
class PolynomialKernel(Kernel):
    """``(1 + z.x) ** alpha``: all monomials up to total degree ``alpha``."""

    alpha: int = 2
    family = "polynomial"

    def __post_init__(self):
        if int(self.alpha) != self.alpha or self.alpha < 1:
            raise ValueError(f"polynomial degree must be a positive integer, got {self.alpha}")

    def _matrix(self, A, B):
        return (1.0 + A @ B.T) ** int(self.alpha)

    def spec(self):
        return f"polynomial:{int(self.alpha)}"


@dataclass(frozen=True)
class GaussianKernel(Kernel):
    """``exp(-|x - z|**2 / sigma**2)``.

    With ``sigma=None`` the width is set by :meth:`resolve` to the median
    pairwise distance of at most 500 evenly spaced rows of the data.
    """

    sigma: float | None = None
    family = "gaussian"

    def __post_init__(self):
        if self.sigma is not None and not self.sigma > 0:
            raise ValueError(f"gaussian width must be positive, got {self.sigma}")

    def _matrix(self, A, B):
        if self.sigma is None:
            raise ValueError("gaussian width is unset; call resolve(X) first")
        d2 = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * (A @ B.T)
        return np.exp(-np.maximum(d2, 0.0) / self.sigma**2)

    def resolve(self, X):
        if self.sigma is not None:
            return self
        X = np.asarray(X, dtype=float)
        idx = np.unique(np.linspace(0, len(X) - 1, min(len(X), 500)).astype(int))
        med = float(np.median(pdist(X[idx]))) if len(idx) > 1 else 0.0
        if not med > 0:
            raise DegenerateData("cannot pick a gaussian width: sampled rows coincide")
        return GaussianKernel(med)

    def spec(self):
        return "gaussian" if self.sigma is None else f"gaussian:{self.sigma!r}"


@dataclass(frozen=True)
class LinearKernel(Kernel):
    """``z.x``; the kernel pipeline then reduces to DMD."""

    family = "linear"

    def _matrix(self, A, B):
        return A @ B.T

    def spec(self):
        return "linear"


def parse_kernel(text: str) -> Kernel:
    """Parse ``polynomial:ALPHA``, ``gaussian[:SIGMA]`` or ``linear``."""
    name, _, arg = text.strip().partition(":")
    name = name.lower()
    try:
        if name == "polynomial":
            return PolynomialKernel(int(arg))
        if name == "gaussian":
            return GaussianKernel(float(arg) if arg else None)
        if name == "linear" and not arg:
            return LinearKernel()
    except ValueError as exc:
        raise ValueError(f"bad kernel spec {text!r}: {exc}") from None
    raise ValueError(f"unknown kernel spec {text!r}")


def kernel_eval(kernel: Kernel, x, z) -> float:
    return kernel(x, z)


def gram(kernel: Kernel, A, B) -> np.ndarray:
    """Matrix with entry ``(i, j) = kernel(A[i], B[j])``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatch(f"row lengths differ: {A.shape[1]} vs {B.shape[1]}")
    return kernel._matrix(A, B)


@dataclass(frozen=True)
class SnapshotSet:
    """Snapshot pairs: row ``m`` of ``Y`` is the image of row ``m`` of ``X``.

    ``dt`` is the sampling interval, or ``None`` for intrinsically discrete data.
    """

    X: np.ndarray
    Y: np.ndarray
    dt: float | None = None

    def __post_init__(self):
        X = np.array(self.X, dtype=float, order="C")
        Y = np.array(self.Y, dtype=float, order="C")
        if X.ndim == 1:
            X, Y = X[:, None], Y.reshape(-1, 1)
        if X.ndim != 2 or X.shape != Y.shape:
            raise DimensionMismatch(f"X {X.shape} and Y {Y.shape} must be equal-shape matrices")
        if X.shape[0] < 2:
            raise DegenerateData("at least two snapshot pairs are required")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise DegenerateData("snapshots contain non-finite values")
        if self.dt is not None and not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        X.flags.writeable = False
        Y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        if self.dt is not None:
            object.__setattr__(self, "dt", float(self.dt))

    @classmethod
    def from_series(cls, series, dt: float | None = None) -> "SnapshotSet":
        """Pair consecutive rows of a time series."""
        series = np.asarray(series, dtype=float)
        return cls(series[:-1], series[1:], dt)

    @property
    def M(self) -> int:
        return self.X.shape[0]

    @property
    def N(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class GramPair:
    Ghat: np.ndarray
    Ahat: np.ndarray


def gram_pair(kernel: Kernel, S: SnapshotSet) -> GramPair:
    """``Ghat[i, j] = f(x_i, x_j)`` and ``Ahat[i, j] = f(y_i, x_j)``."""
    G = gram(kernel, S.X, S.X)
    # symmetrize away roundoff from the matrix product
    G = 0.5 * (G + G.T)
    return GramPair(G, gram(kernel, S.Y, S.X))


def normalize_snapshots(S: SnapshotSet) -> tuple[SnapshotSet, float]:
    """Rescale X and Y by one factor so the mean Euclidean norm of the rows of X is 1."""
    total = float(np.linalg.norm(S.X, axis=1).sum())
    if not total > 0:
        raise DegenerateData("all snapshots are zero; cannot normalize")
    scale = S.M / total
    return SnapshotSet(S.X * scale, S.Y * scale, S.dt), scale
