"""Independent reference computations shared by the tests."""
import numpy as np
from scipy.special import jv


def gram_schmidt_opuc(density_values, grid, n_max):
    """Orthonormal polynomials by Cholesky of the monomial Gram matrix.

    Uses the pointwise density samples only, never the Szegő recursion.
    Returns grid values, one row per degree.
    """
    z = grid.nodes
    V = np.array([z ** k for k in range(n_max + 1)])
    G = (V * density_values) @ np.conj(V).T / grid.M  # G[j,k] = <z^j, z^k>
    # with G = L L^*, the rows of L^{-1} V are orthonormal and L^{-1} is
    # lower triangular with positive diagonal
    L = np.linalg.cholesky(G)
    return np.linalg.solve(L, V)


def bessel_half_line(n, m, T):
    """``<delta_n, e^{iT J_0} delta_m>`` on the half line by the reflection formula."""
    return 1j ** (n - m) * jv(n - m, T) - 1j ** (n + m) * jv(n + m, T)


def brute_moments(seq, k_max, M=2 ** 18):
    """Moments ``int z^k / |phi_N^*|^2 dm`` from pointwise samples on a fine grid."""
    z = np.exp(2j * np.pi * np.arange(M) / M)
    Phis = np.ones(M, dtype=complex)
    Phi = np.ones(M, dtype=complex)
    for g in seq.gamma:
        Phi, Phis = z * Phi - g * Phis, Phis - g * z * Phi
    nu2 = np.prod(1.0 / (1.0 - seq.gamma ** 2))
    dens = 1.0 / (nu2 * np.abs(Phis) ** 2)
    return np.array([np.mean(z ** k * dens) for k in range(k_max + 1)]).real
