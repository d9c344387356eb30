"""Kernel Extended DMD: Koopman eigenvalues, eigenfunctions and modes from snapshot pairs.

All work happens on the ``M x M`` Gramians; the feature map is never formed.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BranchCutWarning,
    ConjugateImbalance,
    DimensionMismatch,
    NonFiniteGram,
    SingularEigenbasisWarning,
)
from .kernels import Kernel, SnapshotSet, gram, gram_pair, normalize_snapshots
from .numerics import DEFAULT_POLICY, TruncatedBasis, TruncationPolicy, general_eig, pinv_diag, truncated_sym_eig

__all__ = [
    "KoopmanDecomposition",
    "fit",
    "eigenfunction_at",
    "predict",
    "reconstruct",
    "select_tuples",
    "continuous_eigenvalues",
]

# |mu| below this is treated as an exact zero eigenvalue
ZERO_EIG = 1e-12


def continuous_eigenvalues(mu, dt: float | None):
    """``log(mu) / dt`` on the principal branch; ``nan`` where ``mu`` is zero."""
    mu = np.asarray(mu, dtype=complex)
    lam = np.full(mu.shape, np.nan + 0j)
    nz = np.abs(mu) > ZERO_EIG
    lam[nz] = np.log(mu[nz]) / (1.0 if dt is None else dt)
    return lam


@dataclass(frozen=True)
class KoopmanDecomposition:
    """Approximate Koopman tuples fitted by :func:`fit`.

    ``Phi_x[m, k]`` is eigenfunction ``k`` at training state ``m``; row ``k`` of
    ``Xi`` is the mode paired with ``mu[k]``, in the physical (unscaled) units
    of the input. ``X_train`` holds the scaled states the kernel is evaluated
    against; inputs to :meth:`eigenfunction_at` are multiplied by ``scale``
    before use.
    """

    mu: np.ndarray
    Phi_x: np.ndarray
    Xi: np.ndarray
    efun_coeff: np.ndarray
    basis: TruncatedBasis
    kernel: Kernel
    X_train: np.ndarray
    scale: float = 1.0
    dt: float | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def lam(self) -> np.ndarray | None:
        if self.dt is None:
            return None
        return continuous_eigenvalues(self.mu, self.dt)

    @property
    def r(self) -> int:
        return self.mu.shape[0]

    @property
    def N(self) -> int:
        return self.X_train.shape[1]

    @property
    def X_physical(self) -> np.ndarray:
        return self.X_train / self.scale

    def eigenfunction_at(self, x) -> np.ndarray:
        """Eigenfunction values at one state (length ``r``) or at each row of a matrix."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        x2 = np.atleast_2d(x)
        if x2.shape[1] != self.N:
            raise DimensionMismatch(f"state length {x2.shape[1]} != {self.N}")
        row = gram(self.kernel, x2 * self.scale, self.X_train)
        out = row @ self.efun_coeff
        return out[0] if single else out

    def predict(self, x, tol: float = 1e-6) -> np.ndarray:
        """One-step map ``sum_k mu_k xi_k phi_k(x)`` in physical units."""
        phi = self.eigenfunction_at(x)
        z = (phi * self.mu) @ self.Xi
        bound = tol * np.linalg.norm(z, axis=-1)
        resid = np.linalg.norm(z.imag, axis=-1)
        if np.any(resid > bound):
            raise ConjugateImbalance(
                f"imaginary residue {np.max(resid):.3e} exceeds {tol:g} * |result|; conjugate pairing is broken"
            )
        return z.real

    def reconstruct(self) -> tuple[np.ndarray, float]:
        """Data reconstruction ``Re(Phi_x Xi)`` and its relative Frobenius residual."""
        Xhat = (self.Phi_x @ self.Xi).real
        X = self.X_physical
        return Xhat, float(np.linalg.norm(X - Xhat) / np.linalg.norm(X))

    def select_tuples(self, criterion: str = "slowest-decay", n: int | None = None) -> np.ndarray:
        """Indices of tuples ordered by ``criterion``; the decomposition is not modified.

        ``slowest-decay`` sorts by real part of ``log(mu) / dt`` (``dt = 1``
        when absent), skipping zero eigenvalues. ``largest-magnitude`` sorts
        by ``|mu|``. ``top-n`` is the first ``n`` of the slowest-decay order.
        Sorts are stable.
        """
        if criterion == "largest-magnitude":
            idx = np.argsort(-np.abs(self.mu), kind="stable")
        elif criterion in ("slowest-decay", "top-n"):
            lam = continuous_eigenvalues(self.mu, self.dt)
            keep = np.flatnonzero(np.isfinite(lam.real))
            idx = keep[np.argsort(-lam.real[keep], kind="stable")]
            if criterion == "top-n":
                if n is None:
                    raise ValueError("top-n needs n")
                idx = idx[:n]
        else:
            raise ValueError(f"unknown selection criterion {criterion!r}")
        return idx if n is None else idx[:n]


def fit(
    S: SnapshotSet,
    kernel: Kernel,
    policy: TruncationPolicy = DEFAULT_POLICY,
    normalize: bool = False,
) -> KoopmanDecomposition:
    """Fit Koopman tuples to snapshot pairs.

    Builds ``Ghat = f(x_i, x_j)`` and ``Ahat = f(y_i, x_j)``, factors
    ``Ghat = Q Sigma**2 Q^T`` under ``policy`` and eigendecomposes
    ``Khat = (Sigma^+ Q^T) Ahat (Q Sigma^+)``. If the eigenvector matrix is
    too ill-conditioned to invert, modes come from a least-squares fit of the
    data to the eigenfunction values instead, and
    ``diagnostics["singular_eigenbasis"]`` is set.
    """
    t0 = time.perf_counter()
    scale = 1.0
    if normalize:
        S, scale = normalize_snapshots(S)
    kernel = kernel.resolve(S.X)
    gp = gram_pair(kernel, S)
    if not (np.all(np.isfinite(gp.Ghat)) and np.all(np.isfinite(gp.Ahat))):
        raise NonFiniteGram("kernel matrix is not finite; rescale the data or lower the kernel degree")
    basis = truncated_sym_eig(gp.Ghat, policy)
    QSinv = basis.Q * pinv_diag(basis.sigma)
    Khat = QSinv.T @ gp.Ahat @ QSinv
    eig = general_eig(Khat, check=False)

    Phi_x = (basis.Q * basis.sigma) @ eig.right
    singular = not eig.well_conditioned
    if singular:
        warnings.warn(
            f"eigenvector matrix condition number {eig.cond:.3e}; modes computed by pseudoinverse",
            SingularEigenbasisWarning,
            stacklevel=2,
        )
        Xi = np.linalg.pinv(Phi_x) @ S.X
    else:
        Xi = eig.left @ (QSinv.T @ S.X)
    Xi = Xi / scale

    mu = eig.values
    on_cut = (np.abs(mu.imag) <= 1e-14 * np.abs(mu)) & (mu.real < -ZERO_EIG)
    if S.dt is not None and np.any(on_cut):
        warnings.warn(
            f"{int(on_cut.sum())} eigenvalue(s) on the negative real axis; their continuous "
            "counterparts sit on the branch cut",
            BranchCutWarning,
            stacklevel=2,
        )
    diagnostics = {
        "rank": basis.r,
        "gram_condition": float((basis.sigma[0] / basis.sigma[-1]) ** 2),
        "eigvec_condition": eig.cond,
        "singular_eigenbasis": singular,
        "repeated_eigenvalues": eig.repeated,
        "branch_cut": np.flatnonzero(on_cut).tolist() if S.dt is not None else [],
        "kernel": kernel.spec(),
        "policy": policy.describe(),
        "normalized": bool(normalize),
    }
    D = KoopmanDecomposition(
        mu=mu,
        Phi_x=Phi_x,
        Xi=Xi,
        efun_coeff=QSinv @ eig.right,
        basis=basis,
        kernel=kernel,
        X_train=np.array(S.X),
        scale=scale,
        dt=S.dt,
        diagnostics=diagnostics,
    )
    diagnostics["reconstruction_residual"] = D.reconstruct()[1]
    diagnostics["wall_time"] = time.perf_counter() - t0
    return D


def eigenfunction_at(D: KoopmanDecomposition, x) -> np.ndarray:
    return D.eigenfunction_at(x)


def predict(D: KoopmanDecomposition, x) -> np.ndarray:
    return D.predict(x)


def reconstruct(D: KoopmanDecomposition) -> tuple[np.ndarray, float]:
    return D.reconstruct()


def select_tuples(D: KoopmanDecomposition, criterion: str = "slowest-decay", n: int | None = None) -> np.ndarray:
    return D.select_tuples(criterion, n)
