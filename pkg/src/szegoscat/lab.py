"""Numerical witnesses for the weighted sums of OPUC and the arc estimate.

All operations stream the Szegő recursion once, accumulating the sums on
the grid, so no table of polynomials is ever stored.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import polygamma

from .errors import ConfigError, PreconditionError
from .opuc import (CircleGrid, bernstein_szego_data, bernstein_szego_density,
                   evaluate_opuc, iter_szego, szego_recursion)
from .wavepackets import Partition, build_partition

__all__ = [
    "KAPPA_CEILING", "ARC_CONSTANT", "GAMMA_CONSTANT", "LabConfig",
    "lab_weights", "lab_grid", "LemmaResult", "lemma21_residual",
    "lemma22_defect", "corollary24_check", "sigma_kappa_residual",
    "g_matrix_closed", "g_matrix_residual", "GammaProjection",
    "gamma_projection_norm", "ArcSpec", "ArcMass", "arc_mass", "arc_bound",
    "PCATrajectory", "pca_monitor", "partition_plancherel_residual",
    "alpha_envelope_constant",
]

#: Largest kappa accepted without ``allow_large_kappa``.
KAPPA_CEILING = 48
#: Constant of the arc-mass bound: four times the free-case supremum 1/(2 pi).
ARC_CONSTANT = 4.0 / (2.0 * math.pi)
#: Constant in ``sum_s |Gamma(s,u)|^2 <= C ||gamma||^2`` for ``u >= 0``.
GAMMA_CONSTANT = 1.0


@dataclass(frozen=True)
class LabConfig:
    """Sweep description for the weighted-sum experiments.

    ``weights`` is one of ``"ones"``, ``"unimodular"`` (seeded random
    phases) or ``"fhat"`` (samples of a test state at the partition centers).
    """

    kappas: tuple = (8, 16, 32)
    weights: str = "ones"
    seed: int = 0
    ell: int = 2
    allow_large_kappa: bool = False

    def __post_init__(self):
        if self.weights not in ("ones", "unimodular", "fhat"):
            raise ConfigError(f"unknown weight generator {self.weights!r}")
        for k in self.kappas:
            check_kappa(k, self.allow_large_kappa)


def check_kappa(kappa, allow_large=False):
    if kappa < 4:
        raise ConfigError(f"kappa must be >= 4, got {kappa}")
    if kappa > KAPPA_CEILING and not allow_large:
        raise ConfigError(
            f"kappa={kappa} exceeds the ceiling {KAPPA_CEILING}; pass allow_large_kappa")


def lab_weights(kind, kappa, seed=0, test_state=None):
    """Weights ``f_{j,kappa}`` with ``|f| <= 1``."""
    if kind == "ones":
        f = np.ones(kappa, dtype=complex)
    elif kind == "unimodular":
        rng = np.random.default_rng([seed, kappa])
        f = np.exp(2j * np.pi * rng.random(kappa))
    elif kind == "fhat":
        if test_state is None:
            raise ConfigError("weights 'fhat' need a test state")
        x = 2.0 * np.pi * np.arange(kappa) / kappa
        f = test_state.evaluate(x).astype(complex)
    else:
        raise ConfigError(f"unknown weight generator {kind!r}")
    if np.max(np.abs(f)) > 1.0 + 1e-12:
        raise ConfigError("weights must satisfy |f_{j,kappa}| <= 1")
    return f


def lab_grid(seq, degree):
    """Grid meeting the floor for both the sums and ``phi_N^*``."""
    return CircleGrid.for_degree(max(degree, len(seq), 1))


def _weights(f, kappa):
    if f is None:
        return np.ones(kappa, dtype=complex)
    f = np.asarray(f, dtype=complex)
    if f.shape != (kappa,):
        raise ConfigError(f"need {kappa} weights, got {f.shape}")
    if np.max(np.abs(f)) > 1.0 + 1e-12:
        raise ConfigError("weights must satisfy |f_{j,kappa}| <= 1")
    return f


def _stream_s(seq, grid, n_max, wanted):
    """Yield ``(n, s_n)`` for ``n`` in the sorted set ``wanted``, ``n <= n_max``.

    ``s_n = z^n conj(phi^*_{2n})`` on the circle.
    """
    wanted = set(int(n) for n in wanted)
    for d, _, Phis, nu in iter_szego(seq, grid.nodes, 2 * n_max):
        if d % 2 == 0 and d // 2 in wanted:
            n = d // 2
            yield n, grid.power(n) * np.conj(nu * Phis)


@dataclass(frozen=True)
class LemmaResult:
    """Residual ``||A - B||_{2,sigma}`` and the companion norm defect."""

    kappa: int
    residual: float
    defect: float
    grid_size: int
    extra: dict = field(default_factory=dict)


def _sigma_norm(values, density):
    return math.sqrt(max(float(density.integrate(np.abs(values) ** 2).real), 0.0))


def lemma21_residual(seq, kappa, f=None, grid=None, allow_large_kappa=False):
    """``||A - B||_{2,sigma}`` with ``|u| <= kappa - 1``.

    ``A = sum_j sum_u f_j alpha_{j,u} s_{kappa^2 + 2 j kappa + u}`` and
    ``B = sum_j f_j s_{kappa^2 + 2 j kappa} lambda_j`` with
    ``lambda_j = sum_{|u| < kappa} alpha_{j,u} z^u`` and ``alpha`` the
    partition coefficients. ``defect`` is
    ``||B||^2_{2,sigma} - int sum_j |f_j|^2 |lambda_j|^2 dm``.
    """
    check_kappa(kappa, allow_large_kappa)
    f = _weights(f, kappa)
    k2 = kappa * kappa
    n_max = k2 + 2 * (kappa - 1) * kappa + kappa - 1
    grid = grid or lab_grid(seq, 2 * n_max)
    grid.require_degree(2 * n_max)
    density = bernstein_szego_density(seq, grid)
    part = build_partition(kappa, grid)
    u = np.arange(-(kappa - 1), kappa)
    coef = np.zeros(n_max + 1, dtype=complex)
    lam = []
    centers = {}
    plancherel = 0.0
    for j in range(kappa):
        a = part.alpha_at(j, u)
        n0 = k2 + 2 * j * kappa
        coef[n0 + u] += f[j] * a
        c = np.zeros(grid.M, dtype=complex)
        c[u % grid.M] = a
        lam.append(grid.synthesize(c))
        centers[n0] = j
        plancherel += abs(f[j]) ** 2 * float(np.sum(np.abs(a) ** 2))
    A = np.zeros(grid.M, dtype=complex)
    B = np.zeros(grid.M, dtype=complex)
    wanted = np.flatnonzero(coef)
    for n, s in _stream_s(seq, grid, n_max, set(wanted) | set(centers)):
        if coef[n] != 0:
            A += coef[n] * s
        if n in centers:
            j = centers[n]
            B += f[j] * s * lam[j]
    res = _sigma_norm(A - B, density)
    defect = _sigma_norm(B, density) ** 2 - plancherel
    return LemmaResult(kappa, res, defect, grid.M,
                       {"norm_A": _sigma_norm(A, density), "plancherel": plancherel})


def lemma22_defect(seq, kappa, f=None, grid=None, allow_large_kappa=False):
    """``||B||^2_{2,sigma} - int sum_j |f_j|^2 |lambda_j|^2 dm``."""
    return lemma21_residual(seq, kappa, f, grid, allow_large_kappa).defect


def corollary24_check(seq, kappa, f=None, grid=None, allow_large_kappa=False):
    """``||A - B||_{2,sigma}`` with ``|u| <= kappa^2`` and the norm defect.

    Here ``B = sum_j f_j s_{kappa^2 + 2 j kappa} omega_j`` uses the full
    bump. ``defect`` is
    ``sum_j |f_j|^2 ||phi^*_{2(kappa^2+2j kappa)} omega_j||^2_{2,sigma}
    - int sum_j |f_j|^2 |omega_j|^2 dm``.
    """
    check_kappa(kappa, allow_large_kappa)
    f = _weights(f, kappa)
    k2 = kappa * kappa
    n_max = k2 + 2 * (kappa - 1) * kappa + k2
    grid = grid or lab_grid(seq, 2 * n_max)
    grid.require_degree(2 * n_max)
    density = bernstein_szego_density(seq, grid)
    part = build_partition(kappa, grid)
    u = np.arange(-k2, k2 + 1)
    coef = np.zeros(n_max + 1, dtype=complex)
    centers = {}
    for j in range(kappa):
        n0 = k2 + 2 * j * kappa
        coef[n0 + u] += f[j] * part.alpha_at(j, u)
        centers[n0] = j
    A = np.zeros(grid.M, dtype=complex)
    B = np.zeros(grid.M, dtype=complex)
    local = 0.0
    flat = 0.0
    for n, s in _stream_s(seq, grid, n_max, set(np.flatnonzero(coef)) | set(centers)):
        if coef[n] != 0:
            A += coef[n] * s
        if n in centers:
            j = centers[n]
            w = part.omega(j)
            B += f[j] * s * w
            aw = abs(f[j]) ** 2
            local += aw * float(density.integrate(np.abs(s * w) ** 2).real)
            flat += aw * float(grid.integrate(w ** 2))
    return LemmaResult(kappa, _sigma_norm(A - B, density), local - flat, grid.M)


def sigma_kappa_residual(seq, kappa, f=None, grid=None, allow_large_kappa=False):
    """``||Sigma_kappa - Pi sum_j f_j omega_j||_{2,sigma}``.

    ``Sigma_kappa = sum_j f_j phi^*_{kappa^2 + kappa j} omega_j``; ``Pi`` is the
    closed form ``phi_N^*`` of the Bernstein–Szegő measure.
    """
    check_kappa(kappa, allow_large_kappa)
    f = _weights(f, kappa)
    k2 = kappa * kappa
    d_max = k2 + kappa * (kappa - 1)
    grid = grid or lab_grid(seq, d_max)
    grid.require_degree(max(d_max, len(seq)))
    density = bernstein_szego_density(seq, grid)
    Pi = bernstein_szego_data(seq, grid).Pi
    part = build_partition(kappa, grid)
    at = {k2 + kappa * j: j for j in range(kappa)}
    S = np.zeros(grid.M, dtype=complex)
    ref = np.zeros(grid.M, dtype=complex)
    for d, _, Phis, nu in iter_szego(seq, grid.nodes, d_max):
        if d in at:
            j = at[d]
            w = part.omega(j)
            S += f[j] * nu * Phis * w
            ref += f[j] * w
    return LemmaResult(kappa, _sigma_norm(S - Pi * ref, density), 0.0, grid.M)


def g_matrix_closed(seq, k, l):
    """Closed form of ``<z phi_l, phi_k>_sigma`` for real coefficients."""
    if k == l + 1:
        return math.sqrt(1.0 - seq.coefficient(l) ** 2)
    if k >= l + 2:
        return 0.0
    prod = math.exp(-(seq.log_nu(l) - seq.log_nu(k))) if l > k else 1.0
    return -seq.coefficient(l) * seq.coefficient(k - 1) * prod


def g_matrix_residual(seq, k_max, grid=None):
    """``max_{k,l <= k_max} |<z phi_l, phi_k>_sigma - closed form|``."""
    grid = grid or lab_grid(seq, k_max + 1)
    table = szego_recursion(seq, grid, k_max + 1)
    density = bernstein_szego_density(seq, grid)
    phi = table.phi[:k_max + 1]
    zphi = grid.nodes * phi
    quad = (np.conj(phi) * density.weights) @ zphi.T / grid.M
    # quad[k, l] = <z phi_l, phi_k>
    closed = np.array([[g_matrix_closed(seq, k, l) for l in range(k_max + 1)]
                       for k in range(k_max + 1)])
    return float(np.max(np.abs(quad - closed)))


@dataclass(frozen=True)
class GammaProjection:
    u: int
    mass: float
    bound: float | None
    within: bool | None
    values: np.ndarray


def gamma_projection_norm(seq, u, s_max=None, grid=None):
    """``sum_s |Gamma(s,u)|^2`` with ``Gamma(s,u) = <z^{u+1} phi_s, 1>_sigma``.

    The sum is finite: ``Gamma(s,u)`` vanishes for ``s > max(N, -u-1)``.
    For ``u >= 0`` the mass is compared with ``GAMMA_CONSTANT ||gamma||^2``;
    the constant is one because the mass is at most ``1 - prod(1-gamma^2)``.
    """
    N = len(seq)
    if s_max is None:
        s_max = max(N, -u - 1) + 2
    grid = grid or lab_grid(seq, s_max + abs(u) + 1)
    density = bernstein_szego_density(seq, grid)
    zpow = grid.power(u + 1) * density.weights
    vals = np.empty(s_max + 1, dtype=complex)
    for s, Phi, _, nu in iter_szego(seq, grid.nodes, s_max):
        vals[s] = grid.integrate(zpow * nu * Phi)
    mass = float(np.sum(np.abs(vals) ** 2))
    if u >= 0:
        bound = GAMMA_CONSTANT * seq.l2_norm ** 2
        return GammaProjection(u, mass, bound, mass <= bound + 1e-12, vals)
    return GammaProjection(u, mass, None, None, vals)


@dataclass(frozen=True)
class ArcSpec:
    """Arc of angular length ``width`` (radians) centered at ``center``."""

    center: float
    width: float

    def __post_init__(self):
        if not 0.0 < self.width <= 2.0 * math.pi:
            raise ConfigError(f"arc width must lie in (0, 2 pi], got {self.width}")

    @property
    def nu(self):
        return 1.0 / self.width


@dataclass(frozen=True)
class ArcMass:
    measured: float
    bound: float
    within: bool


def _gauss_legendre_adaptive(fn, a, b, rtol=1e-12, order=24, max_rounds=60):
    """Adaptive composite Gauss–Legendre; ``fn`` is vectorized."""
    x, w = np.polynomial.legendre.leggauss(order)
    panels = [(a, b)]
    total = 0.0
    for _ in range(max_rounds):
        if not panels:
            return total
        lo = np.array([p[0] for p in panels])
        hi = np.array([p[1] for p in panels])
        mid = 0.5 * (lo + hi)
        edges = np.stack([lo, mid, hi], axis=1)

        def nodes(l, h):
            return (0.5 * (h - l))[:, None] * x[None, :] + (0.5 * (h + l))[:, None]

        pts = np.concatenate([nodes(lo, hi), nodes(edges[:, 0], edges[:, 1]),
                              nodes(edges[:, 1], edges[:, 2])], axis=0)
        vals = fn(pts.ravel()).reshape(pts.shape)
        k = len(panels)
        whole = 0.5 * (hi - lo) * (vals[:k] @ w)
        halves = 0.25 * (hi - lo) * (vals[k:2 * k] @ w + vals[2 * k:] @ w)
        scale = max(abs(total) + float(np.abs(halves).sum()), 1e-300)
        done = np.abs(whole - halves) <= rtol * scale
        total += float(halves[done].sum())
        panels = []
        for i in np.flatnonzero(~done):
            panels.append((lo[i], mid[i]))
            panels.append((mid[i], hi[i]))
    raise ConfigError("adaptive arc quadrature did not converge")


def _arc_integrand(seq, m):
    N = len(seq)

    def fn(theta):
        z = np.exp(1j * theta)
        phi_m, _ = evaluate_opuc(seq, z, m)
        _, phis_N = evaluate_opuc(seq, z, N)
        return np.abs(phi_m) ** 2 / np.abs(phis_N) ** 2
    return fn


def arc_bound(seq, m, arc, C=ARC_CONSTANT, ell=2):
    """``C (|I| + sum_n (n+1)^{-l} sum_{|s-m| < nu(n+1)} gamma_s^2 + (m/nu)^{-l})``.

    The outer sum is infinite; once the window covers the whole sequence
    the remaining terms are ``||gamma||^2 sum (n+1)^{-l}``, summed in
    closed form.
    """
    if ell != 2:
        raise ConfigError("only ell = 2 is implemented")
    g2 = seq.gamma ** 2
    csum = np.concatenate([[0.0], np.cumsum(g2)])
    N = len(seq)
    nu = arc.nu
    S = 0.0
    n = 0
    while True:
        r = nu * (n + 1)
        # integers s >= 0 with |s - m| < r
        lo = max(0, math.floor(m - r) + 1)
        hi = min(N - 1, math.ceil(m + r) - 1)
        S += (csum[hi + 1] - csum[lo]) / (n + 1) ** 2 if hi >= lo else 0.0
        if lo == 0 and hi == N - 1:
            S += csum[N] * float(polygamma(1, n + 2))
            break
        n += 1
    return C * (arc.width + S + (m / nu) ** -2)


def arc_mass(seq, m, arc, C=ARC_CONSTANT):
    """``int_I |phi_m|^2 dsigma`` against the localized bound.

    The measured mass uses adaptive quadrature with exact pointwise
    evaluation, so narrow peaks of ``sigma'`` are resolved.

    Raises
    ------
    PreconditionError
        If ``m < nu``.
    """
    if m < arc.nu:
        raise PreconditionError(f"m={m} is below nu={arc.nu:.3g}")
    a = arc.center - 0.5 * arc.width
    b = arc.center + 0.5 * arc.width
    measured = _gauss_legendre_adaptive(_arc_integrand(seq, m), a, b) / (2.0 * math.pi)
    bound = arc_bound(seq, m, arc, C)
    return ArcMass(measured, bound, measured <= bound)


@dataclass(frozen=True)
class PCATrajectory:
    n: np.ndarray
    sup: np.ndarray

    @property
    def decreasing(self):
        """Strictly decreasing until it reaches exactly zero, then zero."""
        s = self.sup
        step = np.diff(s)
        return bool(np.all((step < 0) | ((s[:-1] == 0) & (s[1:] == 0))))


def pca_monitor(seq, n_list, grid=None):
    """``sup_k |phi_n^*(z_k) - Pi(z_k)|`` along ``n_list``.

    ``Pi = phi_N^*`` is taken from the recursion itself, so the trajectory
    is exactly zero from ``n = N`` on.
    """
    n_list = sorted(int(n) for n in n_list)
    grid = grid or lab_grid(seq, max(n_list))
    Pi = bernstein_szego_data(seq, grid).Pi
    wanted = set(n_list)
    sup = {}
    for n, _, Phis, nu in iter_szego(seq, grid.nodes, max(n_list)):
        if n in wanted:
            sup[n] = float(np.max(np.abs(nu * Phis - Pi)))
    return PCATrajectory(np.array(n_list), np.array([sup[n] for n in n_list]))


def partition_plancherel_residual(part, j=0):
    """``|sum_u |alpha_{j,u}|^2 - int |omega_j|^2 dm|``."""
    a = part.alpha(j)
    return abs(float(np.sum(np.abs(a) ** 2)) - float(part.grid.integrate(part.omega(j) ** 2)))


def alpha_envelope_constant(part, ell, u_max=None):
    """``max_u |alpha_{0,u}| kappa (1 + (|u|/kappa)^ell)``.

    A bounded value, stable across ``kappa``, witnesses the decay
    ``|alpha_{j,u}| <= C_ell (kappa (1 + (|u|/kappa)^ell))^{-1}``.
    """
    k = part.kappa
    u = part.grid.frequencies
    if u_max is not None:
        sel = np.abs(u) <= u_max
    else:
        sel = np.ones(u.size, dtype=bool)
    a = np.abs(part.alpha0[sel])
    uu = np.abs(u[sel])
    return float(np.max(a * k * (1.0 + (uu / k) ** ell)))
