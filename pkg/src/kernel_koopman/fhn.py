"""FitzHugh-Nagumo reaction-diffusion data generator.

The activator ``v`` and inhibitor ``w`` obey

    v_t = v_xx + v - w - v**3
    w_t = delta * w_xx + epsilon * (v - c1 * w - c0)

on ``[0, L]`` with Neumann boundaries. Both fields are expanded in
``n_modes`` cosine modes ``cos(k pi x / L)``; the matching collocation grid is
the cell-centred DCT-II grid ``x_j = (j + 1/2) L / n_modes``. With the
orthonormal DCT-II the map between grid values and coefficients is orthogonal,
so norms agree in both representations.

Time stepping uses ETDRK4 (Cox & Matthews; Kassam & Trefethen): diffusion is
integrated exactly in spectral space, every reaction term explicitly.

Snapshot vectors are physical grid values with ``v`` stacked before ``w``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from .errors import Instability, NoConvergence
from .kernels import SnapshotSet

__all__ = [
    "FhnConfig",
    "FieldState",
    "fhn_rhs",
    "jacobian",
    "integrate",
    "perturb",
    "generate_trajectory",
    "generate_dataset",
    "find_equilibrium",
    "linearization_oracle",
]

_BLOWUP = 1e6


@dataclass(frozen=True)
class FhnConfig:
    c0: float = -0.03
    c1: float = 2.0
    delta: float = 4.0
    epsilon: float = 0.02
    length: float = 20.0
    n_modes: int = 128
    dt_sample: float = 1.0
    perturb_period: float = 25.0
    forcing_centers: tuple[float, ...] = (7.5, 10.0, 12.5)
    forcing_std: float = 0.1
    n_snapshots: int = 2500
    n_trajectories: int = 5
    rng_seed: int = 0
    dt_internal: float = 0.01

    def __post_init__(self):
        if self.n_modes < 2 or self.n_snapshots < 2 or self.n_trajectories < 1:
            raise ValueError("n_modes, n_snapshots must be >= 2 and n_trajectories >= 1")
        if self.length <= 0 or self.dt_sample <= 0 or self.dt_internal <= 0:
            raise ValueError("length, dt_sample and dt_internal must be positive")
        if self.forcing_std < 0:
            raise ValueError("forcing_std must be non-negative")
        if len(self.forcing_centers) != 3:
            raise ValueError("exactly three forcing centers are expected")
        object.__setattr__(self, "forcing_centers", tuple(float(c) for c in self.forcing_centers))
        _ratio(self.dt_sample, self.dt_internal, "dt_sample / dt_internal")
        _ratio(self.perturb_period, self.dt_sample, "perturb_period / dt_sample")

    @property
    def state_dim(self) -> int:
        return 2 * self.n_modes

    @property
    def substeps(self) -> int:
        return _ratio(self.dt_sample, self.dt_internal, "dt_sample / dt_internal")

    @property
    def samples_per_period(self) -> int:
        return _ratio(self.perturb_period, self.dt_sample, "perturb_period / dt_sample")

    @property
    def grid(self) -> np.ndarray:
        return (np.arange(self.n_modes) + 0.5) * self.length / self.n_modes

    @property
    def wavenumbers_sq(self) -> np.ndarray:
        return (np.arange(self.n_modes) * np.pi / self.length) ** 2

    def replace(self, **changes) -> "FhnConfig":
        return dataclasses.replace(self, **changes)


def _ratio(a: float, b: float, what: str) -> int:
    q = a / b
    n = int(round(q))
    if n < 1 or abs(q - n) > 1e-9 * max(1.0, q):
        raise ValueError(f"{what} must be a positive integer, got {q}")
    return n


def _dct(a):
    return scipy.fft.dct(a, type=2, norm="ortho", axis=-1)


def _idct(a):
    return scipy.fft.idct(a, type=2, norm="ortho", axis=-1)


@dataclass(frozen=True)
class FieldState:
    """Cosine-spectral coefficients of the activator and inhibitor fields."""

    v: np.ndarray
    w: np.ndarray

    @classmethod
    def from_physical(cls, v, w) -> "FieldState":
        return cls(_dct(np.asarray(v, dtype=float)), _dct(np.asarray(w, dtype=float)))

    @classmethod
    def from_vector(cls, x) -> "FieldState":
        """Inverse of :meth:`to_vector`."""
        x = np.asarray(x, dtype=float)
        n = x.shape[-1] // 2
        return cls.from_physical(x[:n], x[n:])

    @classmethod
    def _from_stacked(cls, u) -> "FieldState":
        return cls(u[0].copy(), u[1].copy())

    def physical(self) -> tuple[np.ndarray, np.ndarray]:
        return _idct(self.v), _idct(self.w)

    def to_vector(self) -> np.ndarray:
        """Physical grid values, ``v`` then ``w``."""
        return np.concatenate(self.physical())

    def _stacked(self) -> np.ndarray:
        return np.stack([self.v, self.w]).astype(float)


def _linear_symbol(cfg: FhnConfig) -> np.ndarray:
    k2 = cfg.wavenumbers_sq
    return np.stack([-k2, -cfg.delta * k2])


def _reaction_hat(u_hat: np.ndarray, cfg: FhnConfig) -> np.ndarray:
    # only the cubic term needs the grid; the rest is linear in the coefficients
    v_hat, w_hat = u_hat
    cubic = _dct(_idct(v_hat) ** 3)
    out = np.empty_like(u_hat)
    out[0] = v_hat - w_hat - cubic
    out[1] = cfg.epsilon * (v_hat - cfg.c1 * w_hat)
    # orthonormal DCT of a constant c is c * sqrt(n) in mode 0
    out[1, 0] -= cfg.epsilon * cfg.c0 * np.sqrt(cfg.n_modes)
    return out


def fhn_rhs(state: FieldState, cfg: FhnConfig) -> FieldState:
    """Time derivative of ``state`` in spectral coefficients."""
    u_hat = state._stacked()
    du = _linear_symbol(cfg) * u_hat + _reaction_hat(u_hat, cfg)
    return FieldState._from_stacked(du)


def _laplacian_matrix(cfg: FhnConfig) -> np.ndarray:
    # row i is dct(e_i): this is the transpose of the grid -> coefficient map
    B = _dct(np.eye(cfg.n_modes))
    return B @ np.diag(-cfg.wavenumbers_sq) @ B.T


def jacobian(cfg: FhnConfig, state: FieldState) -> np.ndarray:
    """Jacobian of the discretized right-hand side in physical coordinates.

    Acts on ``[v; w]`` grid vectors. Because the DCT is orthogonal this is
    similar to the spectral-coordinate Jacobian.
    """
    n = cfg.n_modes
    D2 = _laplacian_matrix(cfg)
    v, _ = state.physical()
    eye = np.eye(n)
    return np.block(
        [
            [D2 + np.diag(1.0 - 3.0 * v**2), -eye],
            [cfg.epsilon * eye, cfg.delta * D2 - cfg.epsilon * cfg.c1 * eye],
        ]
    )


@dataclass
class _Etdrk4:
    cfg: FhnConfig
    n_roots: int = 32
    _c: dict = field(init=False, repr=False)

    def __post_init__(self):
        h = self.cfg.dt_internal
        lin = _linear_symbol(self.cfg)
        # contour-integral evaluation of the phi-functions avoids cancellation near lin = 0
        roots = np.exp(1j * np.pi * (np.arange(1, self.n_roots + 1) - 0.5) / self.n_roots)
        lr = h * lin[..., None] + roots
        self._c = {
            "E": np.exp(h * lin),
            "E2": np.exp(h * lin / 2),
            "Q": h * np.real(np.mean((np.exp(lr / 2) - 1) / lr, axis=-1)),
            "f1": h * np.real(np.mean((-4 - lr + np.exp(lr) * (4 - 3 * lr + lr**2)) / lr**3, axis=-1)),
            "f2": h * np.real(np.mean((2 + lr + np.exp(lr) * (lr - 2)) / lr**3, axis=-1)),
            "f3": h * np.real(np.mean((-4 - 3 * lr - lr**2 + np.exp(lr) * (4 - lr)) / lr**3, axis=-1)),
        }

        # dense transforms beat FFT calls at this size
        # row vectors: coefs @ B.T gives grid values, grid @ B gives coefs
        B = _dct(np.eye(self.cfg.n_modes))
        self._coef_from_grid = B
        self._grid_from_coef = B.T.copy()
        cfg = self.cfg
        self._lin_reaction = np.array(
            [[1.0, -1.0], [cfg.epsilon, -cfg.epsilon * cfg.c1]]
        )
        self._forcing = np.zeros((2, cfg.n_modes))
        self._forcing[1, 0] = -cfg.epsilon * cfg.c0 * np.sqrt(cfg.n_modes)

    def reaction(self, u: np.ndarray) -> np.ndarray:
        out = self._lin_reaction @ u + self._forcing
        v = u[0] @ self._grid_from_coef
        out[0] -= (v * v * v) @ self._coef_from_grid
        return out

    def step(self, u: np.ndarray) -> np.ndarray:
        c = self._c
        E, E2, Q = c["E"], c["E2"], c["Q"]
        Nu = self.reaction(u)
        a = E2 * u + Q * Nu
        Na = self.reaction(a)
        b = E2 * u + Q * Na
        Nb = self.reaction(b)
        cc = E2 * a + Q * (2 * Nb - Nu)
        Nc = self.reaction(cc)
        return E * u + c["f1"] * Nu + 2 * c["f2"] * (Na + Nb) + c["f3"] * Nc

    def advance(self, u: np.ndarray, nsteps: int) -> np.ndarray:
        for _ in range(nsteps):
            u = self.step(u)
        if not np.all(np.isfinite(u)) or np.abs(u).max() > _BLOWUP:
            raise Instability("FitzHugh-Nagumo integration diverged")
        return u


def integrate(cfg: FhnConfig, start: FieldState, t_span: float) -> list[FieldState]:
    """Unforced trajectory sampled every ``cfg.dt_sample``, including ``start``."""
    n_samples = _ratio(t_span, cfg.dt_sample, "t_span / dt_sample") if t_span else 0
    stepper = _Etdrk4(cfg)
    u = start._stacked()
    out = [FieldState._from_stacked(u)]
    for _ in range(n_samples):
        u = stepper.advance(u, cfg.substeps)
        out.append(FieldState._from_stacked(u))
    return out


def _bumps(cfg: FhnConfig, u) -> np.ndarray:
    x = cfg.grid
    centers = np.asarray(cfg.forcing_centers)
    return np.asarray(u, dtype=float) @ np.exp(-((x[None, :] - centers[:, None]) ** 2))


def perturb(state: FieldState, u, cfg: FhnConfig) -> FieldState:
    """Add ``sum_i u_i exp(-(x - x_i)**2)`` to the activator; ``w`` is untouched."""
    u = np.asarray(u, dtype=float)
    if u.shape != (3,):
        raise ValueError("perturbation amplitudes must have length 3")
    return FieldState(state.v + _dct(_bumps(cfg, u)), state.w.copy())


def find_equilibrium(cfg: FhnConfig = FhnConfig(), tol: float = 1e-10, max_iter: int = 200) -> FieldState:
    """Standing-front equilibrium by Newton iteration from a tanh front."""
    x = cfg.grid
    v0 = np.tanh(x - cfg.length / 2)
    state = FieldState.from_physical(v0, (v0 - cfg.c0) / cfg.c1 * 0.3)
    for _ in range(max_iter):
        r = fhn_rhs(state, cfg)
        res = np.concatenate([r.v, r.w])
        if np.abs(res).max() < tol:
            return state
        J = jacobian(cfg, state)
        step = np.linalg.solve(J, np.concatenate(r.physical()))
        state = FieldState.from_vector(state.to_vector() - step)
    raise NoConvergence(f"Newton did not reach |rhs| < {tol} in {max_iter} iterations")


def linearization_oracle(cfg: FhnConfig, eq: FieldState) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of the Jacobian at ``eq``, sorted by real part descending.

    Eigenvectors are unit-norm columns in the physical ``[v; w]`` layout.
    """
    vals, vecs = np.linalg.eig(jacobian(cfg, eq))
    order = np.lexsort((-vals.imag, -vals.real))
    return vals[order], vecs[:, order]


def generate_trajectory(cfg: FhnConfig, index: int = 0, start: FieldState | None = None) -> np.ndarray:
    """Snapshot matrix ``[n_snapshots x 2 n_modes]`` for trajectory ``index``.

    The random stream is ``PCG64(rng_seed + index)``; each perturbation
    consumes three standard normals, scaled by ``forcing_std``. A perturbation
    is applied right after recording every snapshot whose time is a multiple
    of ``perturb_period``.
    """
    if start is None:
        start = find_equilibrium(cfg)
    rng = np.random.Generator(np.random.PCG64(cfg.rng_seed + index))
    stepper = _Etdrk4(cfg)
    period = cfg.samples_per_period
    bump_hat = _dct(_bumps(cfg, np.eye(3)))
    u = start._stacked()
    snaps = np.empty((cfg.n_snapshots, cfg.state_dim))
    for t in range(cfg.n_snapshots):
        snaps[t] = _idct(u).ravel()
        if t == cfg.n_snapshots - 1:
            break
        if t % period == 0:
            amp = cfg.forcing_std * rng.standard_normal(3)
            u = u.copy()
            u[0] += amp @ bump_hat
        u = stepper.advance(u, cfg.substeps)
    return snaps


def generate_dataset(cfg: FhnConfig = FhnConfig()) -> list[SnapshotSet]:
    """One snapshot-pair set per trajectory, all started from the equilibrium."""
    eq = find_equilibrium(cfg)
    out = []
    for i in range(cfg.n_trajectories):
        snaps = generate_trajectory(cfg, i, start=eq)
        out.append(SnapshotSet(snaps[:-1], snaps[1:], dt=cfg.dt_sample))
    return out
