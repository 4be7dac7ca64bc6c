"""Independent brute-force oracles for the test suite.

Everything here is written directly from the defining formulas with scalar
loops and no shared code with the package: matrix assembly via the pair rule,
eigenvalues via Faddeev-LeVerrier characteristic polynomials, dynamics via
the dense matrix exponential.
"""

import math

import numpy as np
import scipy.linalg


def brute_modulation(p, q, weights, x):
    """F_x = sum_s f_s cos((p/q) s pi x), straight scalar sum."""
    return sum(w * math.cos(math.pi * p * (s + 1) * x / q) for s, w in enumerate(weights))


def brute_hamiltonian(N, p, q, dist_weights, mod_weights, periodic):
    """Pair-rule assembly: H[m][n] = f_dist * F_x with the distance taken
    cyclically under periodic boundary and the phase x = m + n for bulk
    pairs, x = m + n + N for pairs wrapping the boundary."""
    d = len(dist_weights)
    H = [[0.0] * N for _ in range(N)]
    for m in range(1, N + 1):
        for n in range(1, N + 1):
            if m == n:
                continue
            gap = abs(m - n)
            if periodic:
                dist = min(gap, N - gap)
                wrapped = gap > N - gap
            else:
                dist = gap
                wrapped = False
            if not (1 <= dist <= d):
                continue
            x = m + n + (N if wrapped else 0)
            H[m - 1][n - 1] = dist_weights[dist - 1] * brute_modulation(p, q, mod_weights, x)
    return np.array(H)


def brute_diagonal_aah(N, p, q, t, V, periodic):
    H = [[0.0] * N for _ in range(N)]
    for n in range(1, N + 1):
        H[n - 1][n - 1] = V * math.cos(2.0 * math.pi * p * n / q)
        if n < N:
            H[n - 1][n] = t
            H[n][n - 1] = t
    if periodic:
        H[0][N - 1] += t
        H[N - 1][0] += t
    return np.array(H)


def charpoly_eigenvalues(H):
    """Eigenvalues via Faddeev-LeVerrier coefficients and polynomial roots.

    The root finder goes through the companion-matrix QR path, a different
    algorithm from the symmetric eigensolver under test.
    """
    H = np.asarray(H, dtype=float)
    n = H.shape[0]
    coeffs = [1.0]
    M = np.zeros_like(H)
    for k in range(1, n + 1):
        M = H @ M + coeffs[-1] * np.eye(n)
        coeffs.append(-np.trace(H @ M) / k)
    roots = np.roots(coeffs)
    return np.sort(roots.real)


def brute_fd(state, N):
    density = [abs(c) ** 2 for c in state]
    ipr = sum(v * v for v in density)
    return ipr, -math.log(ipr) / math.log(N)


def expm_quench(H, psi0, times):
    """Site populations and return probability via the dense propagator."""
    psi0 = np.asarray(psi0, dtype=complex)
    pops, ret = [], []
    for t in times:
        U = scipy.linalg.expm(-1j * t * np.asarray(H, dtype=complex))
        psi = U @ psi0
        pops.append(np.abs(psi) ** 2)
        ret.append(abs(np.vdot(psi0, psi)) ** 2)
    return np.array(pops).T, np.array(ret)


def constant_chain_gamma(E, t=1.0):
    """Closed-form Lyapunov exponent of the uniform chain: the log of the
    largest-magnitude eigenvalue of the constant transfer matrix."""
    lam1 = (E + complex(E * E - 4.0 * t * t) ** 0.5) / (2.0 * t)
    lam2 = (E - complex(E * E - 4.0 * t * t) ** 0.5) / (2.0 * t)
    return math.log(max(abs(lam1), abs(lam2)))
