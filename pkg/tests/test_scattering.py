import math

import numpy as np
import pytest

from szegoscat import (CircleGrid, JacobiModel, OracleMismatch, StateVec,
                       completeness_roundtrip, make_test_state,
                       scattering_error, spectral_cutoff_state,
                       validate_verblunsky, wave_operator_apply,
                       wave_operator_data)

TS = make_test_state(math.pi / 16, 3 * math.pi / 4)


def test_multiplier_identities(corpus_seq):
    data = wave_operator_data(corpus_seq, CircleGrid(2 ** 12))
    assert data.grid.offset
    assert np.min(np.abs(data.grid.nodes.imag)) > 0
    assert data.symmetry_residual() < 1e-12
    assert data.modulus_residual() < 1e-10


def test_free_sequence_multiplier():
    data = wave_operator_data(validate_verblunsky([]), CircleGrid(256))
    z = data.grid.nodes
    m = np.where(z.imag < 0, 1 / z, -z) / math.sqrt(2)
    assert np.max(np.abs(data.m - m)) < 1e-15


def test_free_sequence_wave_operator_is_not_identity():
    # the target operator has b_1 = sqrt(2)/2, so sites near 1 feel it
    f = StateVec.delta(3)
    g = wave_operator_apply(validate_verblunsky([]), f)
    assert np.linalg.norm(g.padded(len(g)) - f.padded(len(g))) > 0.1
    g = wave_operator_apply(validate_verblunsky([]), TS.state)
    assert np.linalg.norm(g.padded(len(g)) - TS.state.padded(len(g))) > 1e-3


def test_literal_free_operator_has_identity_wave_operator():
    g = wave_operator_apply(JacobiModel.free(), TS.state)
    assert np.linalg.norm(g.padded(len(g)) - TS.state.padded(len(g))) < 1e-12


def test_zero_state():
    g = wave_operator_apply(validate_verblunsky([0.5]), StateVec(np.zeros(4)))
    assert np.all(g.amp == 0)


def test_isometry(corpus_seq):
    g = wave_operator_apply(corpus_seq, TS.state)
    assert abs(g.norm - TS.state.norm) < 1e-8


def test_isometry_spiky_model(power2000):
    g = wave_operator_apply(power2000, TS.state)
    assert abs(g.norm - TS.state.norm) < 1e-8


def test_scattering_error_free_literal_is_zero():
    rep = scattering_error(JacobiModel.free(), TS.state, [16.0, 64.0])
    assert np.all(rep.errors < 1e-8)


def test_scattering_error_single_coefficient():
    rep = scattering_error(validate_verblunsky([0.5]), TS.state, [16.0, 64.0, 256.0])
    assert rep.err_decreasing and rep.cauchy_decreasing and rep.triangle_ok()
    assert rep.ratio < 0.5
    assert np.isnan(rep.rows[0].cauchy)
    assert all(r.route_gap < 1e-6 for r in rep.rows)


def test_oracle_mismatch_raised():
    with pytest.raises(OracleMismatch):
        scattering_error(validate_verblunsky([0.5]), TS.state, [64.0], tol=1e-30)


def test_completeness_test_state(corpus_seq):
    g = wave_operator_apply(corpus_seq, TS.state)
    res = completeness_roundtrip(corpus_seq, g)
    assert res.residual < 1e-7
    assert res.excluded_nodes == 0


def test_completeness_cutoff_delta():
    seq = validate_verblunsky([0.5])
    g = spectral_cutoff_state(seq)
    assert abs(g.amp[0]) > 0.1
    assert completeness_roundtrip(seq, g).residual < 1e-6


def test_completeness_zero():
    assert completeness_roundtrip(validate_verblunsky([0.5]), StateVec(np.zeros(3))).residual == 0
