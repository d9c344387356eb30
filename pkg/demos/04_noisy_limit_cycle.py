"""
A noisy limit cycle
===================

Samples of the Hopf normal form r' = r (1 - r^2), theta' = omega on its
attracting cycle, with Gaussian measurement noise. The Koopman eigenvalues
of a limit cycle form a lattice k * i * omega on the imaginary axis, and the
fit recovers the first few of them despite the noise.
"""

import warnings

import numpy as np

from kernel_koopman import PolynomialKernel, SnapshotSet, TruncationPolicy, fit

omega, dt = 1.3, 0.1
t = np.arange(1001) * dt
x = np.stack([np.cos(omega * t), np.sin(omega * t)], axis=1)
x += 0.01 * np.random.default_rng(5).normal(size=x.shape)

# negative real mu are noise eigenvalues with no continuous-time counterpart
warnings.filterwarnings("ignore", message=".*branch cut")
D = fit(SnapshotSet.from_series(x, dt=dt), PolynomialKernel(4), TruncationPolicy.relative(1e-5))
print(f"rank {D.r}")
for k in D.select_tuples("slowest-decay", 7):
    lam = D.lam[k]
    print(f"lambda = {lam.real:+.4f} {lam.imag:+.4f}i   Im/omega = {lam.imag / omega:+.3f}")

# one-step prediction from a clean point on the cycle
x0 = np.array([np.cos(0.4), np.sin(0.4)])
exact = np.array([np.cos(0.4 + omega * dt), np.sin(0.4 + omega * dt)])
print("prediction error:", np.linalg.norm(D.predict(x0).real - exact))
