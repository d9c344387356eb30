"""Extended DMD with an explicit monomial dictionary.

Small-dimension reference for the kernel pipeline. With square-root
multinomial weights the lifted inner product equals the inhomogeneous
polynomial kernel exactly; the identity dictionary reproduces plain DMD.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from itertools import combinations_with_replacement
from math import factorial, prod

import numpy as np

from .errors import DictionaryTooLarge, DimensionMismatch, RankZero
from .kernels import SnapshotSet
from .numerics import DEFAULT_POLICY, TruncationPolicy, general_eig

__all__ = ["ExplicitDictionary", "lift", "EdmdResult", "edmd_fit", "MatchReport", "match_spectra"]

MAX_LIFT_ENTRIES = 10**8


@dataclass(frozen=True)
class ExplicitDictionary:
    """Monomials ``w_k * prod_i x_i ** e_ki``, one row of ``exponents`` per feature.

    Features are ordered by total degree, then by exponent tuple in
    descending lexicographic order, so ``x1`` precedes ``x2`` and ``x1**2``
    precedes ``x1*x2``.
    """

    N: int
    alpha: int
    exponents: np.ndarray
    weights: np.ndarray

    @property
    def K(self) -> int:
        return self.exponents.shape[0]

    @classmethod
    def monomials(cls, N: int, alpha: int, weighted: bool = True) -> "ExplicitDictionary":
        """All monomials of total degree ``<= alpha``.

        ``weighted=True`` uses ``sqrt(alpha! / ((alpha - |e|)! prod e_i!))``
        so that ``lift(x) . lift(z) == (1 + z.x) ** alpha``.
        """
        if N < 1 or alpha < 0:
            raise ValueError("need N >= 1 and alpha >= 0")
        exps = []
        for d in range(alpha + 1):
            for combo in combinations_with_replacement(range(N), d):
                e = np.zeros(N, dtype=int)
                for i in combo:
                    e[i] += 1
                exps.append(e)
        exps = np.array(exps, dtype=int).reshape(-1, N)
        if weighted:
            # exact integer multinomial coefficients; np.prod would overflow
            w = np.sqrt(
                [
                    float(factorial(alpha) // (factorial(alpha - int(e.sum())) * prod(factorial(int(k)) for k in e)))
                    for e in exps
                ]
            )
        else:
            w = np.ones(len(exps))
        return cls(N, alpha, exps, w)

    @classmethod
    def identity(cls, N: int) -> "ExplicitDictionary":
        """``psi(x) = x``: the DMD dictionary."""
        return cls(N, 1, np.eye(N, dtype=int), np.ones(N))


def lift(d: ExplicitDictionary, X) -> np.ndarray:
    """Feature matrix with row ``m`` equal to ``psi(x_m)``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != d.N:
        raise DimensionMismatch(f"state length {X.shape[1]} != dictionary dimension {d.N}")
    if X.shape[0] * d.K > MAX_LIFT_ENTRIES:
        raise DictionaryTooLarge(f"{X.shape[0]} x {d.K} feature matrix exceeds {MAX_LIFT_ENTRIES} entries")
    Psi = np.ones((X.shape[0], d.K))
    for i in range(d.N):
        Psi *= X[:, i : i + 1] ** d.exponents[:, i]
    return Psi * d.weights


@dataclass(frozen=True)
class EdmdResult:
    K: np.ndarray
    mu: np.ndarray
    V: np.ndarray  # right eigenvectors: eigenfunction coefficients
    W: np.ndarray  # rows w_k^*, scaled so W @ V = I
    Phi_x: np.ndarray
    Xi: np.ndarray
    rank: int
    dictionary: ExplicitDictionary

    def modes_from_left(self, B) -> np.ndarray:
        """Modes from left eigenvectors, given ``x = B^T psi(x)``."""
        return self.W @ np.asarray(B, dtype=float)


def _truncated_pinv(Psi: np.ndarray, policy: TruncationPolicy) -> tuple[np.ndarray, int]:
    U, s, Vt = np.linalg.svd(Psi, full_matrices=False)
    r = policy.count(s[s > 0])
    if r == 0:
        raise RankZero("no singular value of the feature matrix survived truncation")
    return (Vt[:r].T / s[:r]) @ U[:, :r].T, r


def _truncated_gram_pinv(G: np.ndarray, policy: TruncationPolicy) -> tuple[np.ndarray, int]:
    evals, evecs = np.linalg.eigh(G)
    evals, evecs = evals[::-1], evecs[:, ::-1]
    sigma = np.sqrt(evals[evals > 0])
    r = policy.count(sigma)
    if r == 0:
        raise RankZero("no eigenvalue of the dictionary Gramian survived truncation")
    return (evecs[:, :r] / sigma[:r] ** 2) @ evecs[:, :r].T, r


def edmd_fit(
    S: SnapshotSet,
    dictionary: ExplicitDictionary,
    policy: TruncationPolicy = DEFAULT_POLICY,
    route: str = "svd",
) -> EdmdResult:
    """``K = pinv(Psi_x) Psi_y`` with the pseudoinverse truncated by ``policy``.

    ``route="normal"`` forms ``K = pinv(G) A`` from ``G = Psi_x^T Psi_x`` and
    ``A = Psi_x^T Psi_y`` instead; the thresholds then act on
    ``sqrt(eig(G))``, i.e. on the same singular values.

    Modes are the least-squares coefficients of ``X`` on the eigenfunction
    values ``Psi_x V``.
    """
    Psi_x, Psi_y = lift(dictionary, S.X), lift(dictionary, S.Y)
    if route == "svd":
        P, r = _truncated_pinv(Psi_x, policy)
        K = P @ Psi_y
    elif route == "normal":
        P, r = _truncated_gram_pinv(Psi_x.T @ Psi_x, policy)
        K = P @ (Psi_x.T @ Psi_y)
    else:
        raise ValueError(f"unknown route {route!r}")
    with warnings.catch_warnings():
        # K generally has a repeated zero eigenvalue of multiplicity K - rank
        warnings.simplefilter("ignore")
        eig = general_eig(K, check=False)
    Phi_x = Psi_x @ eig.right
    Xi = np.linalg.pinv(Phi_x) @ S.X
    return EdmdResult(K, eig.values, eig.right, eig.left, Phi_x, Xi, r, dictionary)


@dataclass(frozen=True)
class MatchReport:
    pairs: list  # (i, j, distance) for matched pairs
    unmatched_a: list
    unmatched_b: list
    max_distance: float
    tol: float

    @property
    def ok(self) -> bool:
        return not self.unmatched_a and not self.unmatched_b

    def table(self) -> list[tuple]:
        return [(i, j, d) for i, j, d in self.pairs]


def match_spectra(a, b, tol: float, zero_tol: float = 1e-10, relative: bool = False) -> MatchReport:
    """Greedy nearest-neighbour pairing of two eigenvalue lists.

    Values with magnitude below ``zero_tol`` are dropped from both lists.
    Pairs are taken in order of increasing distance; a pair counts as matched
    when ``|a_i - b_j| <= tol`` (times ``max(1, |a_i|)`` if ``relative``).
    Indices refer to positions in the original arrays.
    """
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    ia = np.flatnonzero(np.abs(a) >= zero_tol)
    ib = np.flatnonzero(np.abs(b) >= zero_tol)
    dist = np.abs(a[ia][:, None] - b[ib][None, :])
    free_a, free_b = set(ia.tolist()), set(ib.tolist())
    pairs = []
    if dist.size:
        for flat in np.argsort(dist, axis=None, kind="stable"):
            p, q = divmod(int(flat), len(ib))
            i, j = int(ia[p]), int(ib[q])
            if i not in free_a or j not in free_b:
                continue
            limit = tol * (max(1.0, abs(a[i])) if relative else 1.0)
            if dist[p, q] > limit:
                continue
            pairs.append((i, j, float(dist[p, q])))
            free_a.discard(i)
            free_b.discard(j)
    return MatchReport(
        pairs=pairs,
        unmatched_a=sorted(free_a),
        unmatched_b=sorted(free_b),
        max_distance=max((d for _, _, d in pairs), default=0.0),
        tol=tol,
    )
