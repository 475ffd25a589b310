"""Independent numerical oracles shared by the test modules."""

import numpy as np
from scipy.linalg import eigh
from scipy.special import roots_hermite

# lowest two eigenvalues of d^4 + y^4 from the quadrature oracle below at M = 400
QUARTIC = (1.3967282304621376, 7.131528765176268)


def hermite_functions(M, y):
    psi = np.zeros((M, y.size))
    psi[0] = np.pi**-0.25 * np.exp(-y**2 / 2)
    if M > 1:
        psi[1] = np.sqrt(2) * y * psi[0]
    for n in range(1, M - 1):
        psi[n + 1] = np.sqrt(2 / (n + 1)) * y * psi[n] - np.sqrt(n / (n + 1)) * psi[n - 1]
    return psi


def quartic_oracle(M):
    """Weak form <h_i'', h_j''> + <h_i, y^4 h_j> by Gauss-Hermite quadrature.

    Uses h_n'' = (y^2 - 2n - 1) h_n and Christoffel weights 1 / sum h_n(y_k)^2,
    which keeps everything bounded at the outer nodes.
    """
    y, _ = roots_hermite(M + 4)
    full = hermite_functions(M + 4, y)
    W = 1.0 / np.sum(full**2, axis=0)
    psi = full[:M]
    d2 = (y**2 - (2 * np.arange(M)[:, None] + 1)) * psi
    A = (d2 * W) @ d2.T + (psi * W * y**4) @ psi.T
    return eigh(A, eigvals_only=True)[:2]
