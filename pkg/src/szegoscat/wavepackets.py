"""Smooth partition of unity on the circle and wavepacket coefficients."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .dynamics import StateVec
from .errors import ConfigError, DomainError
from .opuc import CircleGrid

__all__ = [
    "bump", "partition_profile", "Partition", "build_partition",
    "WavepacketCoeffs", "wavepacket_coeffs", "fit_decay_exponent",
    "mass_concentration", "reconstruction_error", "TestState", "DecayFit",
    "make_test_state",
]

TWO_PI = 2.0 * np.pi


def bump(t):
    """``exp(-1/(1 - t^2))`` on ``|t| < 1`` and zero elsewhere."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


def partition_profile(y):
    """Profile ``h`` supported in ``[-2 pi, 2 pi]`` with ``sum_k h(y - 2 pi k) = 1``."""
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    inside = np.abs(y) < TWO_PI
    yi = y[inside]
    num = bump(yi / TWO_PI)
    den = sum(bump((yi - TWO_PI * k) / TWO_PI) for k in (-1, 0, 1))
    out[inside] = num / den
    return out


def _wrap(x):
    """Map angles to ``[-pi, pi)``."""
    return (np.asarray(x) + np.pi) % TWO_PI - np.pi


@dataclass(frozen=True, eq=False)
class Partition:
    """``kappa`` rotated bumps ``omega_j(e^{ix}) = h(kappa (x - x_j))``.

    Only ``omega_0`` and its Fourier coefficients are stored; rotated copies
    are produced on demand.
    """

    kappa: int
    grid: CircleGrid

    @cached_property
    def omega0(self):
        return partition_profile(self.kappa * _wrap(self.grid.theta))

    @cached_property
    def alpha0(self):
        """``alpha_{0,u}`` in FFT order; real because ``omega_0`` is even."""
        return self.grid.fourier(self.omega0)

    def center(self, j):
        return TWO_PI * j / self.kappa

    def omega(self, j):
        return partition_profile(self.kappa * _wrap(self.grid.theta - self.center(j)))

    def alpha(self, j):
        """``alpha_{j,u} = alpha_{0,u} z_j^{-u}`` in FFT order."""
        u = self.grid.frequencies
        return self.alpha0 * np.exp(-1j * u * self.center(j))

    def alpha_at(self, j, u):
        """``alpha_{j,u}`` for an array of integer frequencies ``|u| < M/2``."""
        u = np.asarray(u)
        return self.alpha0[u % self.grid.M] * np.exp(-1j * u * self.center(j))

    def partition_sum(self):
        return sum(self.omega(j) for j in range(self.kappa))


def build_partition(kappa, grid=None):
    """Partition of unity with ``kappa >= 4`` pieces on ``grid``."""
    kappa = int(kappa)
    if kappa < 4:
        raise ConfigError(f"kappa must be >= 4, got {kappa}")
    if grid is None:
        grid = CircleGrid.for_degree(kappa * kappa)
    if grid.M < 8 * kappa:
        raise ConfigError(f"grid M={grid.M} cannot resolve kappa={kappa}")
    return Partition(kappa, grid)


@dataclass(frozen=True, eq=False)
class WavepacketCoeffs:
    """``E_j(n)`` for ``n`` in ``[-M/2, M/2)`` (ascending) and ``n_j``."""

    T: float
    j: int
    kappa: int
    n: np.ndarray
    E: np.ndarray
    n_j: float

    def at(self, n):
        return self.E[np.asarray(n) - self.n[0]]

    def offsets(self):
        """``u = n - ceil(n_j)``."""
        return self.n - math.ceil(self.n_j)


def wavepacket_coeffs(part, T, j, grid=None):
    """Fourier coefficients of ``e^{iT cos x} omega_j(e^{ix})``.

    Raises
    ------
    ConfigError
        If the grid has fewer than ``8 |T|`` nodes.
    """
    if grid is None:
        grid = part.grid
    elif grid != part.grid:
        part = Partition(part.kappa, grid)
    if grid.M < 8 * abs(T):
        raise ConfigError(f"grid M={grid.M} under-resolves T={T}; need M >= {8 * abs(T)}")
    vals = np.exp(1j * T * np.cos(grid.theta)) * part.omega(j)
    c = np.fft.fftshift(grid.fourier(vals))
    n = np.fft.fftshift(grid.frequencies)
    n_j = -T * math.sin(TWO_PI * j / part.kappa)
    return WavepacketCoeffs(float(T), int(j), part.kappa, n, c, n_j)


@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    n_points: int
    floor: float


def fit_decay_exponent(wc, u_min=None, u_max=None, floor_rel=1e-13):
    """Least-squares slope of ``log|E_j(ceil(n_j)+u)|`` against ``log(1+u/kappa)``.

    Uses ``u`` in ``[u_min, u_max]`` (default ``[2 kappa, 20 kappa]``) on
    both sides of the stationary index. Values below ``floor_rel`` times the
    peak are round-off and excluded, since keeping them would flatten the
    fitted slope.
    """
    k = wc.kappa
    u_min = 2 * k if u_min is None else u_min
    u_max = 20 * k if u_max is None else u_max
    u = wc.offsets()
    a = np.abs(wc.E)
    floor = floor_rel * a.max()
    sel = (np.abs(u) >= u_min) & (np.abs(u) <= u_max) & (a > floor)
    if sel.sum() < 2:
        raise ConfigError("not enough coefficients above round-off for a fit")
    x = np.log1p(np.abs(u[sel]) / k)
    y = np.log(a[sel])
    slope, intercept = np.polyfit(x, y, 1)
    return DecayFit(float(slope), float(intercept), int(sel.sum()), float(floor))


def mass_concentration(wc, radius=None):
    """Fraction of ``sum_n |E_j(n)|^2`` within ``|n - n_j| <= radius``."""
    radius = 10 * wc.kappa if radius is None else radius
    w = np.abs(wc.E) ** 2
    return float(w[np.abs(wc.n - wc.n_j) <= radius].sum() / w.sum())


@dataclass(frozen=True, eq=False)
class TestState:
    """Odd smooth momentum profile with its half-line state.

    ``fhat`` holds ``f^(e^{ix}) = beta(x) - beta(-x)`` on ``grid`` where
    ``beta`` is a bump of half-width ``width`` at ``x0``. ``state`` holds
    ``f_n = <f^, z^n>`` for ``1 <= n <= len(state)``; by the odd symmetry
    ``||f^||_{L^2(m)}^2 = 2 ||state||^2``.
    """

    __test__ = False

    delta: float
    x0: float
    width: float
    grid: CircleGrid
    fhat: np.ndarray
    state: StateVec

    def evaluate(self, x):
        """``f^(e^{ix})`` at arbitrary angles."""
        x = _wrap(x)
        w = self.width
        return np.e * (bump((x - self.x0) / w) - bump((-x - self.x0) / w))


def make_test_state(delta, x0, width=None, grid=None, rel_tol=1e-15):
    """Smooth odd test state avoiding ``delta``-neighborhoods of ``+-1, +-i``.

    Parameters
    ----------
    delta : float
        Excision margin in ``(0, pi/8)``.
    x0 : float
        Bump center in ``[delta, pi/2 - delta]`` or ``[pi/2 + delta, pi - delta]``.
    width : float, optional
        Half-width of the bump; defaults to the largest admissible one.
    rel_tol : float
        Physical coefficients below ``rel_tol * max|f_n|`` past the last
        significant one are dropped; their mass is kept in ``tail_mass``.

    Raises
    ------
    DomainError
        If the bump support leaves the admissible region.
    """
    if not 0.0 < delta < np.pi / 8:
        raise DomainError(f"delta must lie in (0, pi/8), got {delta}")
    if delta <= x0 <= np.pi / 2 - delta:
        lo, hi = delta, np.pi / 2 - delta
    elif np.pi / 2 + delta <= x0 <= np.pi - delta:
        lo, hi = np.pi / 2 + delta, np.pi - delta
    else:
        raise DomainError(f"center {x0} lies in an excised arc for delta={delta}")
    room = min(x0 - lo, hi - x0)
    if width is None:
        width = room
    if not 0.0 < width <= room + 1e-15:
        raise DomainError(f"bump of half-width {width} at {x0} leaves [{lo}, {hi}]")
    if grid is None:
        grid = CircleGrid(2 ** 16)
    x = _wrap(grid.theta)
    # normalized so the peak value is exactly one
    fhat = np.e * (bump((x - x0) / width) - bump((-x - x0) / width))
    c = grid.fourier(fhat)[1:grid.M // 2]
    a = np.abs(c)
    keep = np.flatnonzero(a > rel_tol * a.max())
    n_state = int(keep[-1]) + 1
    tail = float(np.sum(a[n_state:] ** 2))
    return TestState(float(delta), float(x0), float(width), grid, fhat,
                     StateVec(c[:n_state], tail_mass=tail))


def reconstruction_error(ts, T, kappa=None, grid=None):
    """``|| sum_j f^(z_j) sum_n E_j(n) z^n - e^{iT cos x} f^ ||_{L^2(m)}``.

    ``ts`` is a :class:`TestState`; ``kappa`` defaults to ``floor(sqrt(T))``.
    """
    kappa = math.isqrt(int(T)) if kappa is None else int(kappa)
    grid = ts.grid if grid is None else grid
    part = build_partition(kappa, grid)
    fhat = ts.evaluate(grid.theta)
    acc = np.zeros(grid.M, dtype=complex)
    for j in range(kappa):
        fj = float(ts.evaluate(part.center(j)))
        if fj == 0.0:
            continue
        wc = wavepacket_coeffs(part, T, j, grid)
        acc += fj * grid.synthesize(np.fft.ifftshift(wc.E))
    diff = acc - np.exp(1j * T * np.cos(grid.theta)) * fhat
    return float(np.sqrt(grid.integrate(np.abs(diff) ** 2)))
