"""Kernel-based approximation of Koopman eigenvalues, eigenfunctions and modes.

Typical use::

    from kernel_koopman import SnapshotSet, PolynomialKernel, TruncationPolicy, fit

    S = SnapshotSet.from_series(trajectory, dt=1.0)
    D = fit(S, PolynomialKernel(20), TruncationPolicy.fixed_rank(150), normalize=True)
    D.lam, D.Xi, D.eigenfunction_at(x)
"""

__version__ = "0.1.0"

from .core import (
    KoopmanDecomposition,
    continuous_eigenvalues,
    eigenfunction_at,
    fit,
    predict,
    reconstruct,
    select_tuples,
)
from .edmd import ExplicitDictionary, edmd_fit, lift, match_spectra
from .kernels import (
    GaussianKernel,
    LinearKernel,
    PolynomialKernel,
    SnapshotSet,
    gram,
    kernel_eval,
    normalize_snapshots,
    parse_kernel,
)
from .numerics import TruncationPolicy, general_eig, pinv_diag, truncated_sym_eig

__all__ = [
    "KoopmanDecomposition",
    "continuous_eigenvalues",
    "eigenfunction_at",
    "fit",
    "predict",
    "reconstruct",
    "select_tuples",
    "ExplicitDictionary",
    "edmd_fit",
    "lift",
    "match_spectra",
    "GaussianKernel",
    "LinearKernel",
    "PolynomialKernel",
    "SnapshotSet",
    "gram",
    "kernel_eval",
    "normalize_snapshots",
    "parse_kernel",
    "TruncationPolicy",
    "general_eig",
    "pinv_diag",
    "truncated_sym_eig",
]
