"""Szegő mapping between even measures on the circle and measures on [-1, 1].

Jacobi coefficients use the 1-based indexing of the matrix

    J = [[v_1, b_1, 0, ...], [b_1, v_2, b_2, ...], ...]

and are stored in 0-based arrays, ``b[i] = b_{i+1}``, ``v[i] = v_{i+1}``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from .errors import ConfigError, DomainError
from .opuc import CircleGrid, VerblunskySeq, validate_verblunsky

__all__ = [
    "JacobiCoeffs", "OPRLTable", "InverseGeronimus", "FREE_JACOBI",
    "geronimus_forward", "geronimus_inverse", "iter_oprl", "oprl_recursion",
    "oprl_normalizers", "pn_opuc_crosscheck", "sz_pullback_check",
    "jacobi_moments",
]


@dataclass(frozen=True, eq=False)
class JacobiCoeffs:
    """Off-diagonal ``b`` (positive) and diagonal ``v`` of a Jacobi matrix."""

    b: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        b = np.array(self.b, dtype=float).reshape(-1)
        v = np.array(self.v, dtype=float).reshape(-1)
        if b.size != v.size:
            raise ConfigError(f"b and v lengths differ: {b.size} vs {v.size}")
        if np.any(~(b > 0)) or not np.all(np.isfinite(v)):
            i = int(np.flatnonzero(~(b > 0) | ~np.isfinite(v))[0])
            raise DomainError(f"Jacobi coefficient {i + 1} invalid (b must be > 0)", index=i)
        b.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "v", v)

    def __len__(self):
        return self.b.size

    def extended(self, n):
        """Length-``n`` coefficients, padding with the free values b=1/2, v=0.

        For coefficients produced by :func:`geronimus_forward` from a finite
        sequence the padding agrees with the exact continuation.
        """
        if n <= len(self):
            return JacobiCoeffs(self.b[:n], self.v[:n])
        b = np.full(n, 0.5)
        v = np.zeros(n)
        b[:len(self)] = self.b
        v[:len(self)] = self.v
        return JacobiCoeffs(b, v)

    def to_json(self):
        return json.dumps({"b": self.b.tolist(), "v": self.v.tolist()})

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(d["b"], d["v"])


def FREE_JACOBI(n):
    """The free operator ``J_0`` (b = 1/2, v = 0) truncated to ``n`` sites."""
    return JacobiCoeffs(np.full(n, 0.5), np.zeros(n))


def geronimus_forward(seq, n_out):
    """Jacobi coefficients of ``Sz(sigma)`` from real Verblunsky coefficients.

    ``b_{k+1} = 1/2 [(1 - g_{2k-1})(1 - g_{2k}^2)(1 + g_{2k+1})]^{1/2}``,
    ``v_{k+1} = -1/2 [g_{2k-2}(1 + g_{2k-1}) - g_{2k}(1 - g_{2k-1})]``
    with ``g_{-1} = -1``; coefficients past the sequence are zero.
    """
    g = np.zeros(2 * n_out + 4)
    # g[i + 2] holds gamma_i, so gamma_{-2} = 0 and gamma_{-1} = -1
    g[1] = -1.0
    m = min(len(seq), 2 * n_out + 2)
    g[2:2 + m] = seq.gamma[:m]
    k = np.arange(n_out)
    g_2k_m2, g_2k_m1 = g[2 * k], g[2 * k + 1]
    g_2k, g_2k_p1 = g[2 * k + 2], g[2 * k + 3]
    rad = (1.0 - g_2k_m1) * (1.0 - g_2k ** 2) * (1.0 + g_2k_p1)
    if np.any(rad <= 0):
        i = int(np.flatnonzero(rad <= 0)[0])
        raise DomainError(f"nonpositive radicand for b_{i + 1}", index=i)
    b = 0.5 * np.sqrt(rad)
    v = -0.5 * (g_2k_m2 * (1.0 + g_2k_m1) - g_2k * (1.0 - g_2k_m1))
    return JacobiCoeffs(b, v)


@dataclass(frozen=True)
class InverseGeronimus:
    seq: VerblunskySeq
    alpha: np.ndarray
    beta: np.ndarray
    defect: float
    defect_b: np.ndarray
    defect_v: np.ndarray


def geronimus_inverse(b, v, alpha=None, beta=None):
    """Verblunsky coefficients reproducing ``(b, v)`` modulo an l^1 sequence.

    Uses the decomposition ``b_{k+1} = 1/2 (1 + beta_{k+1} - beta_k)`` and
    ``v_{k+1} = 1/2 (alpha_{k+1} - alpha_k)`` and sets
    ``gamma_{2n-2} = alpha_n``, ``gamma_{2n-1} = 2 beta_n`` for ``n >= 1``.
    When ``alpha``/``beta`` are not supplied they are recovered by
    cumulative sums anchored at ``alpha_0 = beta_0 = 0``.

    Supplied ``alpha``/``beta`` are indexed from 1 (``alpha[0] = alpha_1``).

    Returns
    -------
    InverseGeronimus
        ``defect`` is the l^1 norm of ``geronimus_forward(gamma) - (b, v)``
        over the supplied length.

    Raises
    ------
    DomainError
        If a recovered coefficient has modulus >= 1; the perturbation has
        to be scaled down by the caller.
    """
    b = np.asarray(b, dtype=float).reshape(-1)
    v = np.asarray(v, dtype=float).reshape(-1)
    if b.size != v.size:
        raise ConfigError("b and v must have equal length")
    n = b.size
    if alpha is None:
        alpha = 2.0 * np.cumsum(v)
    if beta is None:
        beta = np.cumsum(2.0 * b - 1.0)
    alpha = np.asarray(alpha, dtype=float)[:n]
    beta = np.asarray(beta, dtype=float)[:n]
    gamma = np.zeros(2 * n)
    gamma[0::2][:alpha.size] = alpha
    gamma[1::2][:beta.size] = 2.0 * beta
    seq = validate_verblunsky(gamma, label="inverse-geronimus")
    fwd = geronimus_forward(seq, n)
    db = fwd.b - b
    dv = fwd.v - v
    defect = math.fsum(np.abs(db)) + math.fsum(np.abs(dv))
    return InverseGeronimus(seq, alpha, beta, defect, db, dv)


def iter_oprl(jc, lam, n_max) -> Iterator[tuple]:
    """Yield ``(n, p_n(lam))`` for ``n = 0..n_max`` by three-term recursion.

    ``lam p_k = b_k p_{k-1} + v_{k+1} p_k + b_{k+1} p_{k+1}`` with
    ``p_{-1} = 0``, ``p_0 = 1``.
    """
    if n_max >= len(jc) + 1:
        raise ConfigError(f"p_{n_max} needs b_{n_max}; only {len(jc)} coefficients")
    lam = np.asarray(lam)
    b, v = jc.b, jc.v
    p_prev = np.zeros(lam.shape)
    p = np.ones(lam.shape)
    yield 0, p
    for k in range(n_max):
        bk_prev = b[k - 1] if k > 0 else 0.0
        p_next = ((lam - v[k]) * p - bk_prev * p_prev) / b[k]
        p_prev, p = p, p_next
        yield k + 1, p


@dataclass(frozen=True, eq=False)
class OPRLTable:
    """``p_n(lambda_q)`` for ``lambda_q = cos(theta_q)`` on a circle grid."""

    grid: CircleGrid
    lam: np.ndarray
    values: np.ndarray
    c: np.ndarray


def oprl_normalizers(seq, n_max):
    """``c_n = (2 (1 - gamma_{2n-1}))^{-1/2}`` for ``n = 0..n_max``."""
    return np.array([(2.0 * (1.0 - seq.coefficient(2 * n - 1))) ** -0.5
                     for n in range(n_max + 1)])


def oprl_recursion(jc, grid, n_max, seq=None):
    """Tabulate orthonormal ``p_n`` at ``lambda = cos(theta)`` on ``grid``.

    ``seq`` is only needed to attach the normalizers ``c_n``.
    """
    lam = grid.nodes.real
    values = np.empty((n_max + 1, grid.M))
    for n, p in iter_oprl(jc, lam, n_max):
        values[n] = p
    c = oprl_normalizers(seq, n_max) if seq is not None else np.full(n_max + 1, np.nan)
    return OPRLTable(grid, lam, values, c)


def pn_opuc_crosscheck(poly, seq, oprl, n):
    """``max |p_n(cos x) - c_n (s_n + conj(s_n))|`` over the grid."""
    if poly.grid != oprl.grid:
        raise ConfigError("OPUC and OPRL tables live on different grids")
    c_n = (2.0 * (1.0 - seq.coefficient(2 * n - 1))) ** -0.5
    s = poly.s(n)
    return float(np.max(np.abs(oprl.values[n] - c_n * (s + np.conj(s)))))


def jacobi_moments(jc, n_moments):
    """Chebyshev moments ``<e_1, T_k(J) e_1>`` for ``k < n_moments``.

    Exact for the semi-infinite operator as long as ``len(jc) > k/2``.
    """
    size = min(len(jc), n_moments // 2 + 2)
    if len(jc) < (n_moments - 1) // 2 + 1:
        raise ConfigError("not enough Jacobi coefficients for the requested moments")
    b, v = jc.b[:size], jc.v[:size]

    def apply(w):
        out = v * w
        out[:-1] += b[:-1] * w[1:]
        out[1:] += b[:-1] * w[:-1]
        return out

    mom = np.empty(n_moments)
    w_prev = np.zeros(size)
    w_prev[0] = 1.0
    mom[0] = 1.0
    if n_moments == 1:
        return mom
    w = apply(w_prev)
    mom[1] = w[0]
    for k in range(2, n_moments):
        w_prev, w = w, 2.0 * apply(w) - w_prev
        mom[k] = w[0]
    return mom


def sz_pullback_check(F, density, jc, degree=128):
    """Compare ``int F dsigma`` with ``int F(e^{i arccos x}) drho(x)``.

    The circle side is the weighted trapezoid rule of ``density``. The line side
    never touches ``sigma'``: ``F`` is interpolated in Chebyshev polynomials
    of ``x = cos(theta)`` and integrated against ``rho`` through the moments
    ``<e_1, T_k(J) e_1>`` of the Jacobi matrix.

    Parameters
    ----------
    F : callable
        Vectorized function of ``z`` on the circle with ``F(z) = F(1/z)``.
    density : SpectralDensity
    jc : JacobiCoeffs
        Coefficients of ``J``, normally ``geronimus_forward`` of the model.

    Raises
    ------
    DomainError
        If ``F`` is not even.
    """
    grid = density.grid
    z = grid.nodes
    Fz = np.asarray(F(z))
    if np.max(np.abs(Fz - np.asarray(F(1.0 / z)))) > 1e-12 * max(1.0, np.max(np.abs(Fz))):
        raise DomainError("F must satisfy F(z) = F(1/z)")
    circle = complex(density.integrate(Fz))
    coef = npcheb.chebinterpolate(lambda x: np.asarray(F(np.exp(1j * np.arccos(x)))).real,
                                  degree)
    coef_im = npcheb.chebinterpolate(lambda x: np.asarray(F(np.exp(1j * np.arccos(x)))).imag,
                                     degree)
    mom = jacobi_moments(jc, degree + 1)
    line = complex(np.dot(coef, mom), np.dot(coef_im, mom))
    return abs(circle - line)
