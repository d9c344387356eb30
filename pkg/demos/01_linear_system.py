"""
Koopman spectrum of a linear map
================================

For x' = A x the Koopman eigenvalues include those of A, and with a linear
kernel the kernel pipeline reduces to exact DMD. The modes come out aligned
with the eigenvectors of A.
"""

import numpy as np

from kernel_koopman import LinearKernel, SnapshotSet, TruncationPolicy, fit

rng = np.random.default_rng(0)
A = np.array([[0.9, 0.2], [0.0, 0.5]])
X = rng.normal(size=(40, 2))
S = SnapshotSet(X, X @ A.T, dt=0.1)

D = fit(S, LinearKernel(), TruncationPolicy.relative(1e-8))

print("eig(A):      ", np.sort(np.linalg.eigvals(A)))
print("fitted mu:   ", np.sort(D.mu.real))
print("lambda = log(mu)/dt:", np.sort(D.lam.real))

# modes are rows of Xi; compare directions with the eigenvectors of A
w, V = np.linalg.eig(A)
for k in np.argsort(-D.mu.real):
    xi = D.Xi[k].real / np.linalg.norm(D.Xi[k])
    j = np.argmin(np.abs(w - D.mu[k]))
    print(f"mu={D.mu[k].real:.3f}  |cos(mode, eigvec)| = {abs(xi @ V[:, j]):.12f}")

# the decomposition predicts one step ahead from any state
x0 = np.array([1.0, -1.0])
print("A x0      ", A @ x0)
print("predicted ", D.predict(x0).real)
