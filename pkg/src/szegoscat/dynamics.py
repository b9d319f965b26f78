"""Free and perturbed Jacobi evolutions on the half line.

States are stored 0-based: ``amp[k]`` is the amplitude at site ``n = k + 1``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import jv

from .bridge import JacobiCoeffs, geronimus_forward, iter_oprl
from .errors import ConfigError, TruncationWarning
from .opuc import (CircleGrid, SpectralDensity, SzegoData, VerblunskySeq,
                   _next_pow2, bernstein_szego_data,
                   bernstein_szego_density)

__all__ = [
    "StateVec", "JacobiModel", "spreading_radius", "free_evolution",
    "free_kernel_bessel", "jacobi_evolution_eig", "jacobi_evolution_chebyshev",
    "spectral_transform", "inverse_spectral_transform",
    "jacobi_evolution_spectral",
]


@dataclass(frozen=True, eq=False)
class StateVec:
    """Finitely supported state on the half line.

    ``tail_mass`` is the squared norm known to be lost by truncation and
    ``sensitivity`` the truncation-doubling estimate of a propagator.
    """

    amp: np.ndarray
    tail_mass: float = 0.0
    sensitivity: float | None = None

    def __post_init__(self):
        amp = np.array(self.amp, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(amp)):
            raise ConfigError("state amplitudes must be finite")
        amp.setflags(write=False)
        object.__setattr__(self, "amp", amp)

    def __len__(self):
        return self.amp.size

    @property
    def norm(self):
        return float(np.linalg.norm(self.amp))

    @classmethod
    def delta(cls, n, size=None):
        """Unit vector at site ``n >= 1``."""
        a = np.zeros(max(n, size or n), dtype=complex)
        a[n - 1] = 1.0
        return cls(a)

    def padded(self, n):
        """First ``n`` amplitudes, zero-padded when the state is shorter."""
        out = np.zeros(max(n, len(self)), dtype=complex)
        out[:len(self)] = self.amp
        return out[:n]

    def odd_extension_values(self, grid):
        """``U_0 f``: values of ``sum_n f_n (z^n - z^{-n})`` on ``grid``."""
        if 2 * len(self) >= grid.M:
            raise ConfigError(f"grid M={grid.M} cannot hold a state of length {len(self)}")
        c = np.zeros(grid.M, dtype=complex)
        n = len(self)
        c[1:n + 1] = self.amp
        c[grid.M - n:] = -self.amp[::-1]
        return grid.synthesize(c)

    @classmethod
    def from_odd_values(cls, values, grid, n_state, tail_mass=0.0):
        """Inverse of :meth:`odd_extension_values` restricted to ``n <= n_state``."""
        c = grid.fourier(values)
        return cls(c[1:n_state + 1], tail_mass=tail_mass)


@dataclass(frozen=True, eq=False)
class JacobiModel:
    """A Jacobi operator together with its spectral data on the circle.

    Built either from a finite Verblunsky sequence (Bernstein–Szegő case)
    or, with ``seq=None``, as the free operator ``J_0`` with b = 1/2, v = 0,
    whose pulled-back density is ``2 sin^2(theta)``.
    """

    seq: VerblunskySeq | None = None
    label: str = ""

    @classmethod
    def free(cls):
        return cls(None, "J0")

    @property
    def is_free(self):
        return self.seq is None

    @property
    def support(self):
        """Number of Jacobi coefficients that can differ from the free ones."""
        return 0 if self.seq is None else len(self.seq) // 2 + 2

    def coeffs(self, n):
        if self.seq is None:
            return JacobiCoeffs(np.full(n, 0.5), np.zeros(n))
        return geronimus_forward(self.seq, n)

    def density(self, grid):
        if self.seq is None:
            return SpectralDensity(grid, 2.0 * np.sin(grid.theta) ** 2, -1, "free")
        return bernstein_szego_density(self.seq, grid)

    def szego(self, grid):
        """Closed-form Szegő data: ``D = 1/phi_N^*``, or ``(1 - z^2)/sqrt 2`` for ``J_0``."""
        if self.seq is None:
            D = (1.0 - grid.nodes ** 2) / math.sqrt(2.0)
            return SzegoData(grid, D, 1.0 / D, 1.0 / math.sqrt(2.0))
        return bernstein_szego_data(self.seq, grid)


def spreading_radius(T):
    """Sites beyond which the free kernel at time ``T`` is below round-off."""
    T = abs(float(T))
    return int(math.ceil(T + 10.0 * T ** (1.0 / 3.0) + 40.0))


def free_evolution(f, T, window=None):
    """``e^{iTJ_0} f`` on the half line via the odd extension.

    The odd extension of ``f`` is transformed to the circle, multiplied by
    ``e^{iT cos x}`` and transformed back; the result is restricted to
    ``n >= 1``.

    Parameters
    ----------
    f : StateVec
    T : float
    window : int, optional
        Number of sites kept. Defaults to ``len(f) + spreading_radius(T)``.

    Raises
    ------
    ConfigError
        If ``window`` is too small to hold the spread state.
    """
    need = len(f) + spreading_radius(T)
    if window is None:
        window = need
    elif window < need:
        raise ConfigError(f"window {window} too small for T={T}; need at least {need}")
    L = max(_next_pow2(2 * window + 2), 16)
    x = np.zeros(L, dtype=complex)
    n = len(f)
    x[1:n + 1] = f.amp
    x[L - n:] = -f.amp[::-1]
    theta = 2.0 * np.pi * np.arange(L) / L
    fhat = np.fft.ifft(x) * L
    out = np.fft.fft(fhat * np.exp(1j * T * np.cos(theta))) / L
    amp = out[1:window + 1]
    tail = max(f.norm ** 2 - float(np.vdot(amp, amp).real), 0.0)
    return StateVec(amp, tail_mass=tail)


def free_kernel_bessel(n, m, T):
    """``<delta_n, e^{iTJ_0} delta_m>`` for the half line, by Bessel series.

    ``i^{n-m} J_{n-m}(T) - i^{n+m} J_{n+m}(T)``.
    """
    n = np.asarray(n)
    m = np.asarray(m)
    return (1j ** ((n - m) % 4) * jv(n - m, T)
            - 1j ** ((n + m) % 4) * jv(n + m, T))


def _apply_tridiag(b, v, w):
    out = v * w
    out[:-1] += b[:-1] * w[1:]
    out[1:] += b[:-1] * w[:-1]
    return out


def _eig_propagate(jc, f, T, n):
    c = jc.extended(n) if n > len(jc) else JacobiCoeffs(jc.b[:n], jc.v[:n])
    lam, Q = eigh_tridiagonal(c.v, c.b[:-1])
    x = np.zeros(n, dtype=complex)
    x[:len(f)] = f.amp
    return Q @ (np.exp(-1j * T * lam) * (Q.T @ x))


def jacobi_evolution_eig(jc, f, T, n_trunc=None, tol=1e-10):
    """``e^{-iTJ} f`` by dense eigendecomposition of the truncated matrix.

    ``jc`` is padded with free coefficients when shorter than ``n_trunc``.
    The truncation is validated by doubling: the result is recomputed on
    ``2 n_trunc`` sites and the norm of the difference is stored as
    ``sensitivity``. A :class:`TruncationWarning` is emitted when it
    exceeds ``tol``.
    """
    if n_trunc is None:
        n_trunc = len(f) + int(math.ceil(4 * abs(T))) + 40
    if n_trunc < len(f):
        raise ConfigError("truncation smaller than the state")
    if T == 0:
        return StateVec(f.amp, sensitivity=0.0)
    g1 = _eig_propagate(jc, f, T, n_trunc)
    g2 = _eig_propagate(jc, f, T, 2 * n_trunc)
    diff = np.concatenate([g2[:n_trunc] - g1, g2[n_trunc:]])
    sens = float(np.linalg.norm(diff))
    if sens > tol:
        warnings.warn(f"truncation sensitivity {sens:.2e} exceeds {tol:.0e}",
                      TruncationWarning, stacklevel=2)
    return StateVec(g1, sensitivity=sens)


def _chebyshev_terms(x, tol=1e-17):
    """Number of Chebyshev terms for ``e^{-ix t}`` on ``[-1, 1]``."""
    x = abs(x)
    k = int(x) + 1
    while abs(jv(k, x)) > tol or k < x:
        k += max(1, int(x ** (1.0 / 3.0)))
    return k + 2


def jacobi_evolution_chebyshev(jc, f, T, n_trunc=None):
    """``e^{-iTJ} f`` by a Chebyshev expansion of the exponential.

    With ``J = a X`` and ``||X|| <= 1``,
    ``e^{-iTJ} = J_0(aT) + 2 sum_k (-i)^k J_k(aT) T_k(X)``. A degree-``K``
    polynomial moves mass at most ``K`` sites, so a truncation of
    ``len(f) + K + 1`` sites is exact for the semi-infinite operator.
    """
    # Gershgorin bound for the semi-infinite operator; free padding has radius 1
    a = max(float(np.max(np.abs(jc.v) + jc.b + np.concatenate([[0.0], jc.b[:-1]]))), 1.0)
    K = _chebyshev_terms(a * T)
    if n_trunc is None:
        n_trunc = len(f) + K + 1
    c = jc.extended(n_trunc) if n_trunc > len(jc) else JacobiCoeffs(jc.b[:n_trunc], jc.v[:n_trunc])
    b = c.b / a
    vs = c.v / a
    b[-1] = 0.0
    x = np.zeros(n_trunc, dtype=complex)
    x[:len(f)] = f.amp
    t_prev = x
    t_cur = _apply_tridiag(b, vs, x)
    out = jv(0, a * T) * t_prev + 2.0 * (-1j) * jv(1, a * T) * t_cur
    phase = -1j
    for k in range(2, K + 1):
        t_prev, t_cur = t_cur, 2.0 * _apply_tridiag(b, vs, t_cur) - t_prev
        phase *= -1j
        out += 2.0 * phase * jv(k, a * T) * t_cur
    return StateVec(out, tail_mass=max(f.norm ** 2 - float(np.vdot(out, out).real), 0.0))


def spectral_transform(jc, f, grid):
    """``(U f)(cos theta) = sum_n f_n p_{n-1}(cos theta)`` on ``grid``."""
    if len(f) > len(jc) + 1:
        jc = jc.extended(len(f))
    lam = grid.nodes.real
    G = np.zeros(grid.M, dtype=complex)
    amp = f.amp
    for k, p in iter_oprl(jc, lam, len(f) - 1):
        if amp[k] != 0:
            G += amp[k] * p
    return G


def inverse_spectral_transform(jc, G, density, n_out):
    """``f_n = <G, p_{n-1}>_rho`` for ``n = 1..n_out``, by circle quadrature."""
    grid = density.grid
    G = grid.check_values(G, "G")
    if n_out > len(jc) + 1:
        jc = jc.extended(n_out)
    w = G * density.weights / grid.M
    out = np.empty(n_out, dtype=complex)
    for k, p in iter_oprl(jc, grid.nodes.real, n_out - 1):
        out[k] = np.dot(w, p)
    return out


def jacobi_evolution_spectral(model, f, T, n_out=None, grid=None):
    """``e^{-iTJ} f = U^{-1}(e^{-iT lambda} U f)``.

    Parameters
    ----------
    model : JacobiModel or VerblunskySeq
    f : StateVec
    T : float
    n_out : int, optional
        Sites returned; defaults to ``len(f) + spreading_radius(T)``.
    grid : CircleGrid, optional
        Defaults to the smallest grid meeting the oversampling floor.
    """
    if isinstance(model, VerblunskySeq):
        model = JacobiModel(model)
    if n_out is None:
        n_out = len(f) + spreading_radius(T)
    if grid is None:
        grid = CircleGrid.for_degree(max(len(f), n_out, int(abs(T)) + 1))
    else:
        grid.require_degree(max(len(f), n_out))
    jc = model.coeffs(max(len(f), n_out) + 1)
    density = model.density(grid)
    G = spectral_transform(jc, f, grid)
    G = G * np.exp(-1j * T * grid.nodes.real)
    amp = inverse_spectral_transform(jc, G, density, n_out)
    tail = max(f.norm ** 2 - float(np.vdot(amp, amp).real), 0.0)
    return StateVec(amp, tail_mass=tail)
