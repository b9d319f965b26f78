"""Orthogonal polynomials on the unit circle for real Verblunsky sequences.

Everything here is built around finitely supported coefficient sequences,
whose orthogonality measures are Bernstein-Szegő measures

.. math::  d\\sigma = \\frac{dm}{|\\varphi_N^*|^2},

so the density, the Szegő function and all ``L^2_\\sigma`` integrals are
computable to quadrature accuracy on a uniform grid of the circle.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterator, Optional

import numpy as np

from .errors import ConfigError, DomainError

__all__ = [
    "OVERSAMPLE", "DEFAULT_M", "VerblunskySeq", "CircleGrid", "PolyTable",
    "SpectralDensity", "SzegoData", "LogaProfile", "validate_verblunsky",
    "iter_szego", "evaluate_opuc", "szego_recursion",
    "bernstein_szego_density", "bernstein_szego_moments",
    "bernstein_szego_data", "szego_function", "szego_identity_residual",
    "inner_product_sigma", "loga_value", "loga_profile",
]

#: Minimum ratio between grid size and the largest polynomial degree.
OVERSAMPLE = 16
DEFAULT_M = 2 ** 14
# refuse dense tables larger than this many complex entries
_MAX_TABLE_ENTRIES = 2 ** 26


def _next_pow2(n):
    return 1 << max(int(math.ceil(math.log2(max(n, 1)))), 0)


@dataclass(frozen=True, eq=False)
class VerblunskySeq:
    """Finite real Verblunsky sequence ``gamma[0..N-1]``.

    Entries beyond the stored length are zero; ``coefficient(-1)`` returns
    the conventional value ``-1``.
    """

    gamma: np.ndarray
    label: str = ""

    def __post_init__(self):
        arr = np.array(self.gamma, dtype=float).reshape(-1)
        arr.setflags(write=False)
        object.__setattr__(self, "gamma", arr)

    def __len__(self):
        return self.gamma.size

    def __eq__(self, other):
        if not isinstance(other, VerblunskySeq):
            return NotImplemented
        return np.array_equal(self.gamma, other.gamma)

    def __hash__(self):
        return hash(self.digest)

    def __repr__(self):
        return (f"VerblunskySeq(N={len(self)}, l2={self.l2_norm:.6g}"
                + (f", label={self.label!r})" if self.label else ")"))

    @cached_property
    def digest(self):
        return hashlib.sha256(self.gamma.tobytes()).hexdigest()[:16]

    @property
    def l2_norm(self):
        return float(np.sqrt(np.sum(self.gamma ** 2)))

    def tail_norm(self, n):
        """``(sum_{s >= n} gamma_s^2)^{1/2}``."""
        return float(np.sqrt(np.sum(self.gamma[max(n, 0):] ** 2)))

    def coefficient(self, n):
        if n == -1:
            return -1.0
        if n < -1 or n >= len(self):
            return 0.0
        return float(self.gamma[n])

    def padded(self, n):
        """Coefficients ``gamma[0..n-1]`` with zero padding."""
        out = np.zeros(n)
        k = min(n, len(self))
        out[:k] = self.gamma[:k]
        return out

    def rho(self, n=None):
        """``rho_s = (1 - gamma_s^2)^{1/2}`` for ``s < n``."""
        g = self.gamma if n is None else self.padded(n)
        return np.sqrt(1.0 - g ** 2)

    def log_nu(self, n):
        """``log nu_n = -1/2 sum_{s<n} log(1 - gamma_s^2)``."""
        return -0.5 * math.fsum(np.log1p(-self.gamma[:n] ** 2))

    def to_json(self):
        return json.dumps([float(g) for g in self.gamma])

    @classmethod
    def from_json(cls, text, label=""):
        return validate_verblunsky(json.loads(text), label=label)


def validate_verblunsky(raw, strict=False, label=""):
    """Check a raw coefficient list and wrap it as a :class:`VerblunskySeq`.

    Parameters
    ----------
    raw : sequence of float
        Candidate coefficients.
    strict : bool
        Additionally require ``||gamma||_2 <= 1/2``.
    label : str
        Free-form tag carried along for reports.

    Raises
    ------
    DomainError
        If an entry is not a finite real number of modulus < 1, or the
        strict norm bound fails. ``index`` names the first bad entry.
    """
    arr = np.asarray(raw)
    if arr.size and np.iscomplexobj(arr):
        bad = np.flatnonzero(np.abs(arr.imag) > 0)
        if bad.size:
            raise DomainError(f"gamma[{bad[0]}] is not real", index=int(bad[0]))
        arr = arr.real
    arr = np.asarray(arr, dtype=float).reshape(-1)
    bad = np.flatnonzero(~np.isfinite(arr) | (np.abs(arr) >= 1.0))
    if bad.size:
        i = int(bad[0])
        raise DomainError(f"|gamma[{i}]| = {abs(arr[i])!r} violates |gamma| < 1",
                          index=i)
    seq = VerblunskySeq(arr, label=label)
    if strict and seq.l2_norm > 0.5:
        raise DomainError(f"strict mode: ||gamma||_2 = {seq.l2_norm:.6g} > 1/2")
    return seq


@dataclass(frozen=True)
class CircleGrid:
    """``M`` equispaced nodes on the unit circle with weights ``1/M``.

    With ``offset=True`` the nodes are rotated by half a step,
    ``theta_k = 2 pi (k + 1/2) / M``, so no node lies on the real axis.
    The trapezoid rule integrates every trigonometric polynomial of degree
    ``< M`` exactly, with or without the offset.
    """

    M: int
    offset: bool = False

    def __post_init__(self):
        M = int(self.M)
        if M < 4 or M & (M - 1):
            raise ConfigError(f"grid size must be a power of two >= 4, got {self.M}")
        object.__setattr__(self, "M", M)

    @classmethod
    def for_degree(cls, degree, offset=False, minimum=DEFAULT_M):
        """Smallest admissible grid for polynomials up to ``degree``."""
        return cls(max(_next_pow2(OVERSAMPLE * max(degree, 1)), minimum), offset)

    def require_degree(self, degree):
        if self.M < OVERSAMPLE * degree:
            raise ConfigError(
                f"grid M={self.M} too coarse for degree {degree}; "
                f"need M >= {OVERSAMPLE * degree}")

    @cached_property
    def theta(self):
        k = np.arange(self.M, dtype=float)
        if self.offset:
            k += 0.5
        return 2.0 * np.pi * k / self.M

    @cached_property
    def nodes(self):
        return np.exp(1j * self.theta)

    @cached_property
    def frequencies(self):
        return np.fft.fftfreq(self.M, 1.0 / self.M).astype(np.int64)

    @property
    def weight(self):
        return 1.0 / self.M

    def integrate(self, values, axis=-1):
        """Trapezoid approximation of ``int f dm``."""
        return np.mean(values, axis=axis)

    def fourier(self, values):
        """Coefficients ``c_n = int f z^{-n} dm`` in FFT order."""
        c = np.fft.fft(values, axis=-1) / self.M
        if self.offset:
            c = c * np.exp(-1j * np.pi * self.frequencies / self.M)
        return c

    def synthesize(self, coeffs):
        """Inverse of :meth:`fourier`: grid values of ``sum c_n z^n``."""
        c = np.asarray(coeffs, dtype=complex)
        if self.offset:
            c = c * np.exp(1j * np.pi * self.frequencies / self.M)
        return np.fft.ifft(c, axis=-1) * self.M

    def power(self, n):
        """Grid values of ``z^n`` evaluated directly from the angles."""
        return np.exp(1j * n * self.theta)

    def check_values(self, values, name="values"):
        values = np.asarray(values)
        if values.shape[-1] != self.M:
            raise ConfigError(f"{name} has {values.shape[-1]} points, grid has {self.M}")
        return values


def iter_szego(seq, z, n_max) -> Iterator[tuple]:
    """Run the monic Szegő recursion in tandem for ``Phi_n`` and ``Phi_n^*``.

    Yields ``(n, Phi_n, Phi_n^*, nu_n)`` for ``n = 0..n_max`` where
    ``phi_n = nu_n Phi_n``. The yielded arrays are never modified in place
    afterwards, so consumers may keep references. Coefficients past the
    stored length are taken to be zero, which leaves ``Phi^*`` unchanged.
    """
    z = np.asarray(z, dtype=complex)
    gamma = seq.gamma
    Phi = np.ones_like(z)
    Phis = Phi
    # compensated running sum of -1/2 log(1 - gamma^2)
    log_nu, comp = 0.0, 0.0
    yield 0, Phi, Phis, 1.0
    for n in range(n_max):
        g = gamma[n] if n < gamma.size else 0.0
        zPhi = z * Phi
        if g != 0.0:
            Phi = zPhi - g * Phis
            Phis = Phis - g * zPhi
            term = -0.5 * math.log1p(-g * g) - comp
            t = log_nu + term
            comp = (t - log_nu) - term
            log_nu = t
        else:
            Phi = zPhi
        yield n + 1, Phi, Phis, math.exp(log_nu)


def evaluate_opuc(seq, z, n):
    """Orthonormal ``(phi_n(z), phi_n^*(z))`` at arbitrary points ``z``."""
    for k, Phi, Phis, nu in iter_szego(seq, z, n):
        if k == n:
            return nu * Phi, nu * Phis


@dataclass(frozen=True, eq=False)
class PolyTable:
    """Orthonormal ``phi_n`` and ``phi_n^*`` on a grid for ``n <= n_max``."""

    grid: CircleGrid
    seq: VerblunskySeq
    phi: np.ndarray
    phistar: np.ndarray
    nu: np.ndarray

    @property
    def n_max(self):
        return self.phi.shape[0] - 1

    def s(self, n):
        """``s_n = z^{-n} phi_{2n}``."""
        if 2 * n > self.n_max:
            raise ConfigError(f"s_{n} needs phi_{2 * n}; table stops at {self.n_max}")
        return self.grid.power(-n) * self.phi[2 * n]

    def reversed_at_zero(self, n):
        """``phi_n^*(0) = nu_n``, since ``Phi_n^*(0) = 1``."""
        return self.nu[n]


def szego_recursion(seq, grid, n_max):
    """Tabulate orthonormal OPUC on ``grid`` for degrees ``0..n_max``.

    Raises
    ------
    ConfigError
        If the grid violates the oversampling floor for ``n_max`` or the
        table would be unreasonably large (use :func:`iter_szego` instead).
    """
    grid.require_degree(n_max)
    if (n_max + 1) * grid.M > _MAX_TABLE_ENTRIES:
        raise ConfigError("table too large to hold in memory; stream with iter_szego")
    phi = np.empty((n_max + 1, grid.M), dtype=complex)
    phistar = np.empty_like(phi)
    nu = np.empty(n_max + 1)
    for n, Phi, Phis, nu_n in iter_szego(seq, grid.nodes, n_max):
        phi[n] = nu_n * Phi
        phistar[n] = nu_n * Phis
        nu[n] = nu_n
    return PolyTable(grid, seq, phi, phistar, nu)


@dataclass(frozen=True, eq=False)
class SpectralDensity:
    """Density ``sigma'`` of an absolutely continuous measure on a grid.

    ``values`` are pointwise samples. ``weights`` are the grid values of the
    Fourier series of the measure truncated to ``|k| <= M/2``; the trapezoid
    rule with these weights integrates every trigonometric polynomial of
    degree ``< M/2`` exactly, even when ``sigma'`` has features narrower than
    the grid spacing. For well-resolved densities the two agree to
    round-off.
    """

    grid: CircleGrid
    values: np.ndarray
    order: int
    label: str = "bernstein-szego"
    weights: np.ndarray | None = None

    def __post_init__(self):
        if self.weights is None:
            object.__setattr__(self, "weights", self.values)

    @property
    def normalization(self):
        return float(self.grid.integrate(self.weights))

    @property
    def resolution_error(self):
        """``max |values - weights|``; large when the grid misses structure."""
        return float(np.max(np.abs(np.asarray(self.values) - np.asarray(self.weights))))

    def integrate(self, f):
        """``int f dsigma`` by weighted trapezoid rule."""
        return self.grid.integrate(np.asarray(f) * self.weights)


@dataclass(frozen=True, eq=False)
class SzegoData:
    """Boundary values of the Szegő function ``D`` and ``Pi = 1/D``."""

    grid: CircleGrid
    D: np.ndarray
    Pi: np.ndarray
    D0: float


def bernstein_szego_moments(seq, k_max):
    """Moments ``mu_k = int z^k dsigma`` for ``0 <= k <= k_max``.

    Orthogonality of ``Phi_{n+1}`` to 1 gives
    ``mu_{n+1} = gamma_n prod_{j<n} rho_j^2 - sum_{j<n} a_j mu_{j+1}`` with
    ``Phi_n = sum_j a_j z^j``. Past the sequence this is a linear recurrence
    whose characteristic roots are the zeros of ``Phi_N`` (inside the disk),
    so the forward iteration is stable.
    """
    gamma = seq.gamma
    N = gamma.size
    mu = np.empty(k_max + 1)
    mu[0] = 1.0
    a = np.ones(1)
    norm2 = 1.0
    for n in range(min(N, k_max)):
        g = gamma[n]
        mu[n + 1] = g * norm2 - np.dot(a[:-1], mu[1:n + 1])
        a = np.concatenate([[0.0], a]) - g * np.concatenate([a[::-1], [0.0]])
        norm2 *= 1.0 - g * g
    if k_max > N:
        head = a[:-1]
        for k in range(N + 1, k_max + 1):
            mu[k] = -np.dot(head, mu[k - N:k])
    return mu


@lru_cache(maxsize=32)
def _bs_density_cached(seq, grid):
    N = len(seq)
    phis = np.ones(grid.M, dtype=complex)
    for n, _, Phis, nu in iter_szego(seq, grid.nodes, N):
        if n == N:
            phis = nu * Phis
    values = 1.0 / np.abs(phis) ** 2
    half = grid.M // 2
    mu = bernstein_szego_moments(seq, half)
    c = np.empty(grid.M)
    c[:half + 1] = mu
    c[half + 1:] = mu[1:half][::-1]
    weights = grid.synthesize(c).real
    values.setflags(write=False)
    weights.setflags(write=False)
    return values, weights


def bernstein_szego_density(seq, grid, tol=1e-8):
    """Density ``1/|phi_N^*|^2`` of the measure with coefficients ``seq``.

    Quadrature weights come from the exact moments, see
    :class:`SpectralDensity`. Results are cached per (sequence, grid).

    Raises
    ------
    ConfigError
        If the total mass differs from one by more than ``tol``.
    """
    values, weights = _bs_density_cached(seq, grid)
    dens = SpectralDensity(grid, values, len(seq), weights=weights)
    if abs(dens.normalization - 1.0) > tol:
        raise ConfigError(
            f"density mass {dens.normalization!r} != 1 on M={grid.M}; refine the grid")
    return dens


def bernstein_szego_data(seq, grid):
    """Closed-form Szegő data ``D = 1/phi_N^*``, ``D(0) = prod rho``."""
    N = len(seq)
    for n, _, Phis, nu in iter_szego(seq, grid.nodes, N):
        if n == N:
            Pi = nu * Phis
    return SzegoData(grid, 1.0 / Pi, Pi, 1.0 / float(np.exp(seq.log_nu(N))))


def szego_function(density):
    """Szegő function from the log-density by analytic projection.

    ``log D`` keeps the Fourier modes of ``log sigma'`` with index >= 1,
    plus half of the zeroth mode; ``D = exp(log D)`` and ``Pi = 1/D``.
    """
    grid = density.grid
    vals = np.asarray(density.values)
    if np.any(~(vals > 0)):
        raise DomainError("density must be strictly positive for the Szegő function")
    c = grid.fourier(np.log(vals))
    freq = grid.frequencies
    proj = np.where(freq > 0, c, 0.0)
    proj[0] = 0.5 * c[0]
    logD = grid.synthesize(proj)
    D = np.exp(logD)
    return SzegoData(grid, D, 1.0 / D, float(np.exp(0.5 * c[0].real)))


def szego_identity_residual(seq, density):
    """``|prod (1 - gamma_n^2) - exp(int log sigma' dm)|``."""
    lhs = math.exp(math.fsum(np.log1p(-seq.gamma ** 2)))
    rhs = math.exp(float(density.grid.integrate(np.log(density.values))))
    return abs(lhs - rhs)


def inner_product_sigma(f, g, density):
    """``<f, g>_sigma = int f conj(g) sigma' dm`` by the trapezoid rule."""
    grid = density.grid
    f = grid.check_values(f, "f")
    g = grid.check_values(g, "g")
    return complex(density.integrate(f * np.conj(g)))


@dataclass(frozen=True)
class LogaProfile:
    n: np.ndarray
    values: np.ndarray
    decaying: bool


def loga_value(seq, n):
    """``log(n) * sum_{s=n}^{2n} gamma_s^2``."""
    g = seq.gamma[n:2 * n + 1]
    return math.log(n) * float(np.sum(g ** 2))


def loga_profile(seq, ns=None):
    """Condition-(loga) profile over dyadic ``n`` up to ``N/2``.

    ``decaying`` is the empirical flag "last value < first value"; it is
    False for profiles with fewer than two points.
    """
    if ns is None:
        ns = []
        n = 2
        while n <= max(len(seq) // 2, 2):
            ns.append(n)
            n *= 2
    ns = np.asarray(ns, dtype=int)
    vals = np.array([loga_value(seq, int(n)) for n in ns])
    decaying = bool(vals.size >= 2 and vals[-1] < vals[0])
    return LogaProfile(ns, vals, decaying)
