"""Acceptance criteria, one PASS/FAIL line per check.

Tolerances are pinned here and must not be loosened.
"""
import json
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, CORPUS
from oracles import bessel_half_line, gram_schmidt_opuc
from szegoscat import (ArcSpec, CircleGrid, ExperimentConfig, JacobiModel,
                       StateVec, arc_mass, bernstein_szego_data,
                       bernstein_szego_density, build_partition,
                       completeness_roundtrip, corollary24_check,
                       fit_decay_exponent, free_evolution, g_matrix_residual,
                       generate_family, geronimus_forward, geronimus_inverse,
                       jacobi_evolution_chebyshev, jacobi_evolution_eig,
                       jacobi_evolution_spectral, lemma21_residual,
                       make_test_state, mass_concentration, pca_monitor, run,
                       scattering_error, sigma_kappa_residual,
                       spectral_cutoff_state, szego_function,
                       szego_identity_residual, szego_recursion,
                       validate_verblunsky, wave_operator_apply,
                       wavepacket_coeffs)

TS = make_test_state(math.pi / 16, 3 * math.pi / 4)
T_LIST = [64.0, 256.0, 1024.0, 4096.0]
FINITE = {name: validate_verblunsky(g, label=name) for name, g in sorted(CORPUS.items())}


def report(criterion, name, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] {criterion} {name}" + (f": {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def strictly_decreasing(x):
    x = np.asarray(x, dtype=float)
    return bool(np.all(np.diff(x) < 0))


def test_c01_opuc_engine():
    t0 = time.perf_counter()
    grid = CircleGrid(2 ** 14)
    rng = np.random.default_rng(20240501)
    worst = 0.0
    for _ in range(20):
        seq = validate_verblunsky(rng.uniform(-0.5, 0.5, rng.integers(1, 9)))
        dens = bernstein_szego_density(seq, grid)
        ref = gram_schmidt_opuc(dens.values, grid, 8)
        worst = max(worst, float(np.max(np.abs(szego_recursion(seq, grid, 8).phi - ref))))
    dt = time.perf_counter() - t0
    ok = report("C1", "szego_recursion vs Gram-Schmidt", worst < 1e-9, f"max dev {worst:.2e}")
    ok &= report("C1", "runtime < 10 s", dt < 10, f"{dt:.2f} s")
    assert ok


def test_c02_measure_layer():
    t0 = time.perf_counter()
    orth = ident = modulus = closed = 0.0
    for seq in FINITE.values():
        N = max(len(seq), 1)
        grid = CircleGrid.for_degree(2 * N)
        dens = bernstein_szego_density(seq, grid)
        t = szego_recursion(seq, grid, 2 * N)
        gram = (np.conj(t.phi) * dens.weights) @ t.phi.T / grid.M
        orth = max(orth, float(np.max(np.abs(gram - np.eye(2 * N + 1)))))
        ident = max(ident, szego_identity_residual(seq, dens))
        sz = szego_function(dens)
        modulus = max(modulus, float(np.max(np.abs(np.abs(sz.D) ** 2 - dens.values))))
        # D = 1/phi_N^* against the independent FFT outer function
        cf = bernstein_szego_data(seq, grid)
        closed = max(closed, float(np.max(np.abs(sz.D - 1.0 / t.phistar[len(seq)]))),
                     float(np.max(np.abs(sz.D - cf.D))))
    dt = time.perf_counter() - t0
    ok = report("C2", "orthonormality up to 2N", orth < 1e-8, f"{orth:.2e}")
    ok &= report("C2", "Szego identity residual", ident < 1e-10, f"{ident:.2e}")
    ok &= report("C2", "|D|^2 = density", modulus < 1e-8, f"{modulus:.2e}")
    ok &= report("C2", "D = 1/phi_N^*", closed < 1e-8, f"{closed:.2e}")
    ok &= report("C2", "runtime < 30 s", dt < 30, f"{dt:.2f} s")
    assert ok


def test_c03_geronimus():
    jc = geronimus_forward(validate_verblunsky([]), 50)
    free_ok = jc.b[0] == math.sqrt(2) / 2 and np.all(jc.b[1:] == 0.5) and np.all(jc.v == 0)
    ok = report("C3", "gamma = 0 gives (sqrt2/2, 1/2, ...), v = 0 exactly", bool(free_ok))
    jc = geronimus_forward(generate_family({"kind": "chebyshev_u_pattern", "N_trunc": 400}), 199)
    dev = max(float(np.max(np.abs(jc.b - 0.5))), float(np.max(np.abs(jc.v))))
    ok &= report("C3", "chebyshev_u_pattern gives free Jacobi", dev < 1e-14, f"{dev:.2e}")
    worst = 0.0
    rng = np.random.default_rng(11)
    for _ in range(25):
        a, c = rng.uniform(0.01, 0.2, 2)
        eps = rng.uniform(0, 0.05)
        n = int(rng.integers(4, 80))
        k = np.arange(n + 1)
        alpha, beta = a * (k + 1.0) ** -0.6, c * (k + 1.0) ** -0.6
        l1 = eps * (k[:-1] + 1.0) ** -2
        b = 0.5 * (1 + beta[1:] - beta[:-1]) + l1
        v = 0.5 * (alpha[1:] - alpha[:-1]) - l1
        inv = geronimus_inverse(b, v)
        fwd = geronimus_forward(inv.seq, n)
        direct = math.fsum(np.abs(fwd.b - b)) + math.fsum(np.abs(fwd.v - v))
        worst = max(worst, abs(direct - inv.defect))
    ok &= report("C3", "inverse-forward defect = reported l1 defect", worst < 1e-12,
                 f"{worst:.2e}")
    assert ok


def test_c04_g_matrix(power2000):
    models = dict(FINITE, power2000=power2000)
    worst = max(g_matrix_residual(s, 12) for s in models.values())
    assert report("C4", "G-matrix closed form, k, l <= 12", worst < 1e-8, f"{worst:.2e}")


def test_c05_dynamics():
    unit = bessel = route = 0.0
    for T in (0.5, 5.0, 17.0, 50.0):
        for m in (1, 2, 7):
            g = free_evolution(StateVec.delta(m), T)
            n = np.arange(1, len(g) + 1)
            bessel = max(bessel, float(np.max(np.abs(g.amp - bessel_half_line(n, m, T)))))
            unit = max(unit, abs(g.norm - 1.0))
    rng = np.random.default_rng(5)
    f = StateVec(rng.normal(size=6) + 1j * rng.normal(size=6))
    f = StateVec(f.amp / f.norm)
    for name in ("half", "three", "random8", "power64"):
        model = JacobiModel(FINITE[name])
        for T in (5.0, 50.0, 200.0):
            n = len(f) + int(4 * T) + 40
            a = jacobi_evolution_eig(model.coeffs(n), f, T, n)
            b = jacobi_evolution_spectral(model, f, T, n_out=n)
            c = jacobi_evolution_chebyshev(model.coeffs(max(len(f), model.support) + 1), f, T)
            k = max(len(c), n)
            route = max(route, float(np.linalg.norm(b.amp - c.padded(n)[:len(b.amp)])),
                        float(np.linalg.norm(a.padded(k) - c.padded(k))))
            unit = max(unit, *(abs(g.norm - 1.0) for g in (a, b, c)))
    ok = report("C5", "unitarity", unit < 1e-12, f"{unit:.2e}")
    ok &= report("C5", "free kernel vs Bessel oracle, T <= 50", bessel < 1e-10, f"{bessel:.2e}")
    ok &= report("C5", "e^{-iTJ} routes agree, T <= 200", route < 1e-6, f"{route:.2e}")
    assert ok


def test_c06_wavepacket_decay():
    T, kappa = 1e4, 100
    part = build_partition(kappa, CircleGrid(2 ** 17))
    slopes, conc = [], []
    for j in range(kappa):
        if abs(math.sin(2 * math.pi * j / kappa)) < 0.5:
            continue
        wc = wavepacket_coeffs(part, T, j)
        slopes.append(fit_decay_exponent(wc).slope)
        conc.append(mass_concentration(wc))
    ok = report("C6", "decay exponent <= -3", max(slopes) <= -3,
                f"worst {max(slopes):.2f} over {len(slopes)} packets")
    ok &= report("C6", "mass concentration >= 0.99", min(conc) >= 0.99, f"worst {min(conc):.5f}")
    assert ok


@pytest.fixture(scope="module")
def power8192():
    return generate_family({"kind": "power_law", "c": 0.3, "alpha": 0.7, "N_trunc": 8192})


@pytest.mark.slow
def test_c07_lab_suite(power8192):
    t0 = time.perf_counter()
    exact = 0.0
    for name in ("zeros", "half", "three", "random8"):
        seq = FINITE[name]
        for kappa in (8, 16):
            if len(seq) >= kappa * kappa / 2:
                continue
            exact = max(exact, lemma21_residual(seq, kappa).residual,
                        abs(lemma21_residual(seq, kappa).defect),
                        abs(corollary24_check(seq, kappa).defect),
                        sigma_kappa_residual(seq, kappa).residual)
    ok = report("C7", "finite models stabilize to 0 (lemma21, defects, sigma_kappa)",
                exact <= 1e-9, f"{exact:.2e}")
    l21, c24, sk = [], [], []
    for kappa in (8, 16, 32):
        l21.append(lemma21_residual(power8192, kappa).residual)
        c24.append(corollary24_check(power8192, kappa).residual)
        sk.append(sigma_kappa_residual(power8192, kappa).residual)
    sk.append(sigma_kappa_residual(power8192, 64, allow_large_kappa=True).residual)
    fmt = lambda xs: ", ".join(f"{x:.3e}" for x in xs)  # noqa: E731
    ok &= report("C7", "lemma21_residual decreasing", strictly_decreasing(l21), fmt(l21))
    ok &= report("C7", "corollary24_check decreasing", strictly_decreasing(c24), fmt(c24))
    ok &= report("C7", "sigma_kappa_residual decreasing incl. kappa=64",
                 strictly_decreasing(sk), fmt(sk))
    dt = time.perf_counter() - t0
    ok &= report("C7", "runtime <= 10 min", dt <= 600, f"{dt:.0f} s")
    assert ok


@pytest.mark.xfail(strict=True, reason="finite-kappa bump tail beyond |u| = kappa^2 is nonzero")
def test_c07_corollary_residual_exact_zero():
    worst = 0.0
    for name in ("zeros", "half", "three"):
        for kappa in (8, 16):
            worst = max(worst, corollary24_check(FINITE[name], kappa).residual)
    assert report("C7", "corollary24_check residual = 0 for finite models", worst <= 1e-9,
                  f"{worst:.2e} (known: window tail)")


@pytest.mark.slow
def test_c08_scattering_harness(power2000, tmp_path):
    t0 = time.perf_counter()
    omega = wave_operator_apply(JacobiModel.free(), TS.state)
    lit = scattering_error(JacobiModel.free(), TS.state, T_LIST, omega=omega)
    err = max(r.err for r in lit.rows)
    ok = report("C8", "literal J0 gives identity scattering", err <= 1e-8, f"max err {err:.2e}")
    cfg = ExperimentConfig(family={"kind": "zeros", "N": 0}, stages=("waveop",),
                           T_list=tuple(T_LIST), out_dir=str(tmp_path))
    res = run(cfg)
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    ratio_tol = manifest["tolerances"]["scattering_ratio"]
    ok &= report("C8", "thresholds recorded in manifest", ratio_tol == 0.5, f"ratio < {ratio_tol}")
    ok &= report("C8", "gamma = 0 run flags", res.passed,
                 json.dumps(manifest["flags"]["waveop"], sort_keys=True))
    for label, model in (("gamma = 0", validate_verblunsky([])), ("power law N=2000", power2000)):
        rep = scattering_error(model, TS.state, T_LIST)
        errs = [r.err for r in rep.rows]
        ok &= report("C8", f"{label}: err decreasing", rep.err_decreasing,
                     ", ".join(f"{e:.2e}" for e in errs))
        ok &= report("C8", f"{label}: err(4096)/err(64) < {ratio_tol}", rep.ratio < ratio_tol,
                     f"{rep.ratio:.2e}")
        ok &= report("C8", f"{label}: Cauchy increments decreasing", rep.cauchy_decreasing)
    dt = time.perf_counter() - t0
    ok &= report("C8", "runtime <= 15 min", dt <= 900, f"{dt:.0f} s")
    assert ok


def test_c09_completeness():
    states = [TS, make_test_state(math.pi / 16, math.pi / 4, width=0.4)]
    worst_ts = worst_cut = 0.0
    for seq in FINITE.values():
        for ts in states:
            g = wave_operator_apply(seq, ts.state)
            worst_ts = max(worst_ts, completeness_roundtrip(seq, g).residual)
        worst_cut = max(worst_cut, completeness_roundtrip(seq, spectral_cutoff_state(seq)).residual)
    ok = report("C9", "completeness on test states", worst_ts < 1e-6, f"{worst_ts:.2e}")
    ok &= report("C9", "completeness on spectrally cut off delta_1", worst_cut < 1e-6,
                 f"{worst_cut:.2e}")
    assert ok


@pytest.mark.slow
def test_c10_arcs_and_pca(power2000):
    total, inside, worst = 0, 0, 0.0
    for m in (64, 128):
        for i in range(16):
            r = arc_mass(power2000, m, ArcSpec(2 * math.pi * i / 16, 2 * math.pi / 16))
            total += 1
            inside += bool(r.within)
            worst = max(worst, r.measured / r.bound)
    ok = report("C10", "arc mass within calibrated bound", inside == total,
                f"{inside}/{total}, worst ratio {worst:.3f}")
    seq = generate_family({"kind": "log_tempered", "c": 0.2, "alpha": 0.9, "N_trunc": 4096})
    tr = pca_monitor(seq, [16, 32, 64, 128, 256, 512, 1024, 2048])
    ok &= report("C10", "pca trajectory decreasing (log-tempered family)",
                 strictly_decreasing(tr.sup), ", ".join(f"{s:.3e}" for s in tr.sup))
    zero = True
    for name in ("half", "three", "random8", "power64"):
        s = FINITE[name]
        tr = pca_monitor(s, [len(s), len(s) + 1, 2 * len(s), 4 * len(s)])
        zero &= bool(np.all(tr.sup == 0.0))
    ok &= report("C10", "pca trajectory exactly 0 beyond the support", zero)
    assert ok
