import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from szegoscat import (ARC_CONSTANT, ArcSpec, CircleGrid, ConfigError,
                       LabConfig, PreconditionError, arc_bound, arc_mass,
                       build_partition, corollary24_check, g_matrix_closed,
                       g_matrix_residual, gamma_projection_norm, lab_weights,
                       lemma21_residual, lemma22_defect, make_test_state,
                       pca_monitor, sigma_kappa_residual, validate_verblunsky)

ZERO = validate_verblunsky([])
HALF = validate_verblunsky([0.5])


@pytest.mark.parametrize("gamma", [[], [0.5], [0.3]])
@pytest.mark.parametrize("kappa", [4, 8])
def test_finite_models_are_exact(gamma, kappa):
    seq = validate_verblunsky(gamma)
    a = lemma21_residual(seq, kappa)
    assert a.residual < 1e-10 and abs(a.defect) < 1e-10
    c = corollary24_check(seq, kappa)
    assert abs(c.defect) < 1e-10
    assert sigma_kappa_residual(seq, kappa).residual < 1e-10


def _tail_oracle(kappa, f, M=2 ** 16):
    # coefficient-space norm of sum_j f_j z^{n_j} sum_{|u| > kappa^2} alpha_{j,u} z^u
    part = build_partition(kappa, CircleGrid(M))
    u = np.fft.fftfreq(M, 1.0 / M).astype(int)
    total = {}
    for j in range(kappa):
        a = part.alpha(j)
        sel = np.abs(u) > kappa * kappa
        n0 = kappa * kappa + 2 * j * kappa
        for uu, aa in zip(u[sel], a[sel]):
            total[n0 + uu] = total.get(n0 + uu, 0) + f[j] * aa
    return math.sqrt(sum(abs(v) ** 2 for v in total.values()))


def test_corollary_residual_is_bump_tail_for_free_model():
    kappa = 8
    f = lab_weights("unimodular", kappa, seed=3)
    c = corollary24_check(ZERO, kappa, f)
    assert c.residual == pytest.approx(_tail_oracle(kappa, f), rel=1e-8)
    assert c.residual > 1e-6


def test_lemma22_defect_wrapper():
    assert lemma22_defect(HALF, 4) == lemma21_residual(HALF, 4).defect


def test_kappa_ceiling():
    with pytest.raises(ConfigError):
        lemma21_residual(ZERO, 64)
    with pytest.raises(ConfigError):
        LabConfig(kappas=(8, 200))
    LabConfig(kappas=(8, 200), allow_large_kappa=True)


def test_weights():
    assert np.all(lab_weights("ones", 5) == 1)
    w = lab_weights("unimodular", 7, seed=1)
    assert np.allclose(np.abs(w), 1.0)
    assert np.array_equal(w, lab_weights("unimodular", 7, seed=1))
    ts = make_test_state(math.pi / 16, 3 * math.pi / 4)
    assert np.max(np.abs(lab_weights("fhat", 16, test_state=ts))) <= 1.0
    with pytest.raises(ConfigError):
        lemma21_residual(HALF, 4, f=np.full(4, 2.0))
    with pytest.raises(ConfigError):
        lab_weights("bogus", 4)


def test_g_matrix_examples():
    assert g_matrix_closed(HALF, 1, 0) == pytest.approx(math.sqrt(0.75))
    assert g_matrix_closed(HALF, 0, 0) == pytest.approx(0.5)
    assert g_matrix_closed(ZERO, 3, 2) == 1.0
    assert g_matrix_closed(ZERO, 2, 2) == 0.0
    assert g_matrix_residual(ZERO, 12) < 1e-13


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_g_matrix_random(seed):
    seq = validate_verblunsky(np.random.default_rng(seed).uniform(-0.5, 0.5, 10))
    assert g_matrix_residual(seq, 12) < 1e-8


def test_g_matrix_spiky_model(power2000):
    assert g_matrix_residual(power2000, 12) < 1e-8


def test_gamma_projection():
    assert gamma_projection_norm(ZERO, 2).mass < 1e-25
    r = gamma_projection_norm(HALF, 0)
    assert r.mass == pytest.approx(1 - (1 - 0.25), abs=1e-12)
    seq = validate_verblunsky(np.random.default_rng(9).uniform(-0.4, 0.4, 12))
    for u in range(-4, 5):
        r = gamma_projection_norm(seq, u)
        assert r.mass <= 1 + 1e-10
        if u >= 0:
            assert r.within
            assert r.mass <= 1 - np.prod(1 - seq.gamma ** 2) + 1e-12
        else:
            assert r.bound is None
    assert gamma_projection_norm(seq, -1).mass == pytest.approx(1.0)


def test_arc_mass_free_exact():
    arc = ArcSpec(1.1, 0.7)
    r = arc_mass(ZERO, 16, arc)
    assert r.measured == pytest.approx(0.7 / (2 * math.pi), abs=1e-13)
    assert r.within


def test_arc_mass_single():
    r = arc_mass(HALF, 16, ArcSpec(0.0, 2 * math.pi / 8))
    assert r.measured == pytest.approx(1 / 8, abs=1e-12)  # phi_16 has |phi|^2 sigma' = 1
    assert r.within


def test_arc_precondition():
    with pytest.raises(PreconditionError):
        arc_mass(HALF, 1, ArcSpec(0.0, 0.1))
    with pytest.raises(ConfigError):
        ArcSpec(0.0, 7.0)


def test_arc_bound_against_direct_sum():
    seq = validate_verblunsky(0.3 * (np.arange(50) + 1.0) ** -0.7)
    arc = ArcSpec(0.0, 0.5)
    m = 30
    S = 0.0
    for n in range(200000):
        r = (n + 1) / arc.width
        S += sum(g * g for s, g in enumerate(seq.gamma) if abs(s - m) < r) / (n + 1) ** 2
    ref = ARC_CONSTANT * (arc.width + S + (m * arc.width) ** -2)
    assert arc_bound(seq, m, arc) == pytest.approx(ref, rel=1e-5)


def test_pca_monitor_finite_and_free():
    assert np.all(pca_monitor(ZERO, [1, 4, 9]).sup == 0)
    seq = validate_verblunsky([0.3, -0.2, 0.1])
    tr = pca_monitor(seq, [1, 2, 3, 4, 10, 50])
    assert np.all(tr.sup[tr.n >= 3] == 0.0)
    assert tr.sup[0] > 0
