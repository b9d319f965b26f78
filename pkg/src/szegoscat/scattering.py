"""Explicit wave operator and the convergence/completeness harness."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import (JacobiModel, StateVec, free_evolution,
                       inverse_spectral_transform, jacobi_evolution_chebyshev,
                       jacobi_evolution_spectral, spectral_transform,
                       spreading_radius)
from .errors import OracleMismatch
from .opuc import CircleGrid, VerblunskySeq
from .wavepackets import bump

__all__ = [
    "WaveOperatorData", "wave_operator_data", "wave_operator_apply",
    "ConvergenceRow", "ConvergenceReport", "scattering_error",
    "CompletenessResult", "completeness_roundtrip", "spectral_cutoff_state",
]

SQRT_HALF = math.sqrt(0.5)


def _as_model(model):
    return JacobiModel(model) if isinstance(model, VerblunskySeq) else model


@dataclass(frozen=True, eq=False)
class WaveOperatorData:
    """Multiplier ``m`` and spectral data on an offset grid."""

    model: JacobiModel
    grid: CircleGrid
    m: np.ndarray
    density: np.ndarray
    Pi: np.ndarray

    def symmetry_residual(self):
        """``max |m(1/z) + m(z)|``; on the offset grid ``1/z_k = z_{M-1-k}``."""
        return float(np.max(np.abs(self.m[::-1] + self.m)))

    def modulus_residual(self):
        """``max | |m|^2 sigma' - 1/2 |``."""
        return float(np.max(np.abs(np.abs(self.m) ** 2 * self.density - 0.5)))


def wave_operator_data(model, grid):
    """``m(z) = (z^{-1} 1_{Im z<0} conj(Pi) - z 1_{Im z>0} Pi) / sqrt 2``."""
    model = _as_model(model)
    if not grid.offset:
        grid = CircleGrid(grid.M, offset=True)
    z = grid.nodes
    Pi = model.szego(grid).Pi
    lower = z.imag < 0
    m = np.where(lower, np.conj(Pi) / z, -z * Pi) * SQRT_HALF
    return WaveOperatorData(model, grid, m, np.asarray(model.density(grid).values), Pi)


def wave_operator_apply(model, f, n_out=None, grid=None):
    """``Omega_+ f = U^{-1} V^{-1} T_m U_0 f``.

    ``U_0 f`` is the odd Fourier image, ``T_m`` multiplication by ``m``,
    ``V^{-1}`` reads the even result as a function of ``cos x`` and ``U^{-1}``
    expands it in ``p_{n-1}`` by circle quadrature against ``sigma'``.

    Parameters
    ----------
    model : JacobiModel or VerblunskySeq
    f : StateVec
    n_out : int, optional
        Sites returned; defaults to ``len(f) + len(seq) + 64``.
    """
    model = _as_model(model)
    if n_out is None:
        n_out = len(f) + (0 if model.is_free else len(model.seq)) + 64
    if grid is None:
        grid = CircleGrid.for_degree(max(len(f), n_out), offset=True)
    data = wave_operator_data(model, grid)
    grid = data.grid
    fhat = f.odd_extension_values(grid)
    G = data.m * fhat
    jc = model.coeffs(n_out + 1)
    dens = model.density(grid)
    amp = inverse_spectral_transform(jc, G, dens, n_out)
    tail = max(f.norm ** 2 - float(np.vdot(amp, amp).real), 0.0)
    return StateVec(amp, tail_mass=tail)


@dataclass(frozen=True)
class ConvergenceRow:
    T: float
    err: float
    cauchy: float
    tail_mass: float
    route_gap: float


@dataclass(frozen=True)
class ConvergenceReport:
    """Rows ordered by ``T``; ``cauchy`` compares consecutive rows."""

    label: str
    rows: tuple = field(default_factory=tuple)
    norm_f: float = 1.0

    @property
    def errors(self):
        return np.array([r.err for r in self.rows])

    @property
    def cauchy(self):
        return np.array([r.cauchy for r in self.rows[1:]])

    @property
    def err_decreasing(self):
        e = self.errors
        return bool(np.all(np.diff(e) < 0))

    @property
    def cauchy_decreasing(self):
        c = self.cauchy
        return bool(c.size < 2 or np.all(np.diff(c) < 0))

    @property
    def ratio(self):
        e = self.errors
        return float(e[-1] / e[0]) if e[0] > 0 else 0.0

    def triangle_ok(self, slack=1e-12):
        """``cauchy_k <= err_{k-1} + err_k`` for every consecutive pair."""
        return all(b.cauchy <= a.err + b.err + slack
                   for a, b in zip(self.rows, self.rows[1:]))


def scattering_error(model, f, T_list, omega=None, tol=1e-5, label=""):
    """Empirical side of the wave-operator limit.

    For each ``T`` computes ``g_T = e^{-iTJ} e^{iTJ_0} f`` by the spectral
    route, cross-checks it against the Chebyshev route and compares with
    ``Omega_+ f`` from :func:`wave_operator_apply`. ``cauchy`` is
    ``||g_T - g_T'||`` for the previous ``T'`` in the list (NaN in the first
    row) and ``tail_mass`` is ``||f||^2 - ||g_T||^2`` on the window.

    Raises
    ------
    OracleMismatch
        If the two ``e^{-iTJ}`` routes differ by more than ``tol`` relative
        to ``||f||``.
    """
    model = _as_model(model)
    T_list = sorted(float(T) for T in T_list)
    windows = [len(f) + 2 * spreading_radius(T) for T in T_list]
    W = max(windows)
    if omega is None:
        omega = wave_operator_apply(model, f, n_out=W)
    om = omega.padded(W)
    nf = f.norm
    rows, prev = [], None
    for T, w in zip(T_list, windows):
        h = free_evolution(f, T)
        g = jacobi_evolution_spectral(model, h, T, n_out=w)
        c = jacobi_evolution_chebyshev(model.coeffs(max(len(h), model.support) + 1), h, T)
        k = min(len(g), len(c))
        gap = float(np.linalg.norm(g.amp[:k] - c.amp[:k]))
        if gap > tol * max(nf, 1e-300):
            raise OracleMismatch(f"propagator routes disagree by {gap:.3e} at T={T}")
        gp = g.padded(W)
        err = float(np.linalg.norm(gp - om))
        cauchy = float(np.linalg.norm(gp - prev)) if prev is not None else float("nan")
        tail = nf ** 2 - float(np.vdot(g.amp, g.amp).real)
        rows.append(ConvergenceRow(T, err, cauchy, tail, gap))
        prev = gp
    return ConvergenceReport(label or getattr(model, "label", ""), tuple(rows), nf)


@dataclass(frozen=True)
class CompletenessResult:
    residual: float
    excluded_nodes: int
    n_state: int


def completeness_roundtrip(model, g, n_state=None, grid=None, m_floor=1e-12):
    """``||Omega_+ U_0^{-1} T_m^{-1} V U g - g||``.

    Nodes where ``|m| < m_floor`` are excluded from the division; their
    count is reported.
    """
    model = _as_model(model)
    n_seq = 0 if model.is_free else len(model.seq)
    if n_state is None:
        n_state = len(g) + n_seq + 64
    if grid is None:
        grid = CircleGrid.for_degree(max(len(g), n_state), offset=True)
    data = wave_operator_data(model, grid)
    grid = data.grid
    jc = model.coeffs(max(len(g), n_state) + 1)
    G = spectral_transform(jc, g, grid)
    ok = np.abs(data.m) >= m_floor
    fhat = np.zeros(grid.M, dtype=complex)
    fhat[ok] = G[ok] / data.m[ok]
    f = StateVec.from_odd_values(fhat, grid, n_state)
    back = wave_operator_apply(model, f, n_out=len(g), grid=grid)
    res = float(np.linalg.norm(back.amp - g.amp))
    return CompletenessResult(res, int((~ok).sum()), n_state)


def spectral_cutoff_state(model, cutoff=0.9, n_out=None, grid=None, rel_tol=1e-15):
    """``U^{-1}(chi)`` for a smooth ``chi(lambda)`` supported in ``|lambda| < cutoff``.

    Since ``U delta_1 = 1`` this is ``delta_1`` with its spectral content
    near ``lambda = +-1`` removed. Trailing amplitudes below ``rel_tol``
    times the largest are dropped.
    """
    model = _as_model(model)
    if n_out is None:
        n_out = 512 + (0 if model.is_free else len(model.seq))
    if grid is None:
        grid = CircleGrid.for_degree(n_out, offset=True)
    chi = np.e * bump(grid.nodes.real / cutoff)
    amp = inverse_spectral_transform(model.coeffs(n_out + 1), chi,
                                     model.density(grid), n_out)
    a = np.abs(amp)
    last = int(np.flatnonzero(a > rel_tol * a.max())[-1]) + 1
    return StateVec(amp[:last], tail_mass=float(np.sum(a[last:] ** 2)))
