"""Exception and warning classes raised by kernel_koopman."""


class KoopmanError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(KoopmanError, ValueError):
    pass


class DegenerateData(KoopmanError, ValueError):
    pass


class NotSymmetric(KoopmanError, ValueError):
    pass


class RankZero(KoopmanError):
    """No singular value survived truncation."""


class ZeroSingularValue(KoopmanError, ValueError):
    pass


class DefectiveMatrix(KoopmanError):
    """Right eigenvector matrix is too ill-conditioned to invert reliably."""


class ConjugateImbalance(KoopmanError):
    """A prediction kept an imaginary part that conjugate pairs should cancel."""


class NonFiniteGram(KoopmanError):
    """Kernel matrix overflowed or contains NaN."""


class DictionaryTooLarge(KoopmanError):
    pass


class Instability(KoopmanError):
    """Time integration blew up."""


class NoConvergence(KoopmanError):
    pass


class DataFormatError(KoopmanError):
    """A snapshot or decomposition file could not be parsed."""


class ConfigError(KoopmanError, ValueError):
    pass


class RepeatedEigenvalueWarning(UserWarning):
    """Eigenvalues are not pairwise distinct; biorthogonality holds only blockwise."""


class SingularEigenbasisWarning(UserWarning):
    """Eigenvector matrix is ill-conditioned; modes were computed by pseudoinverse."""


class BranchCutWarning(UserWarning):
    """A discrete eigenvalue lies on the negative real axis."""
