import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from carleman.decomposition import complete_frame, split_family
from carleman.errors import CertificateViolation
from carleman.operators import decay_profile, preset_family, select_e_sequence
from carleman.schmidt import (nuclearity_report, quarter_power, random_unit_vectors,
                              schmidt_decompose, schwarz_certify)


def rank_one(sigma, N=6, seed=0):
    rng = np.random.default_rng(seed)
    p = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    q = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    p /= np.linalg.norm(p)
    q /= np.linalg.norm(q)
    return sigma * np.outer(q, p.conj()), p, q


def test_zero_operator():
    sd = schmidt_decompose(np.zeros((5, 5)))
    assert sd.rank == 0
    A = quarter_power(sd)
    assert not np.any(A.matrix)
    assert schwarz_certify(A, np.zeros((5, 5)), 50)["violations"] == 0


def test_rank_one_quarter_power():
    J, p, q = rank_one(1e-4)
    sd = schmidt_decompose(J)
    assert sd.rank == 1 and sd.singulars[0] == pytest.approx(1e-4)
    A = quarter_power(sd)
    assert np.linalg.norm(A.matrix, 2) == pytest.approx(0.1, rel=1e-12)
    # equality case f = p
    assert np.linalg.norm(A.matrix @ p) == pytest.approx(np.linalg.norm(J @ p) ** 0.25, rel=1e-12)


def test_identity_pair():
    sd = schmidt_decompose(np.diag([1.0, 1.0]))
    assert np.allclose(sd.singulars, [1.0, 1.0])
    assert np.allclose(quarter_power(sd).matrix, np.eye(2))


def test_singulars_sorted_and_reconstruction():
    rng = np.random.default_rng(3)
    J = (rng.standard_normal((10, 10)) + 1j * rng.standard_normal((10, 10))) / 10
    sd = schmidt_decompose(J)
    assert np.all(np.diff(sd.singulars) <= 0)
    assert np.max(np.abs(sd.operator() - J)) <= 1e-10
    assert np.allclose(J @ sd.right, sd.left * sd.singulars, atol=1e-13)


def test_quarter_singulars():
    rng = np.random.default_rng(4)
    J = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    sd = schmidt_decompose(J)
    sa = np.linalg.svd(quarter_power(sd).matrix, compute_uv=False)
    assert np.allclose(sa ** 4, sd.singulars, atol=1e-9, rtol=0)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_schwarz_random(seed):
    rng = np.random.default_rng(seed)
    J = rng.standard_normal((7, 7)) + 1j * rng.standard_normal((7, 7))
    J *= rng.uniform(1e-6, 1.0) / np.linalg.norm(J, 2)
    A = quarter_power(schmidt_decompose(J), seed=seed)
    rep = schwarz_certify(A, J, 100, seed=seed)
    assert rep["violations"] == 0 and rep["min_slack"] >= -1e-9


def test_schwarz_detects_bad_A():
    J, _, _ = rank_one(1e-4)
    with pytest.raises(CertificateViolation):
        schwarz_certify(np.eye(6), J, 20)


def test_unit_vectors_seeded():
    a = random_unit_vectors(5, 4, 1)
    assert np.allclose(np.linalg.norm(a, axis=0), 1.0)
    assert np.array_equal(a, random_unit_vectors(5, 4, 1))


def test_nuclearity_report():
    sd = schmidt_decompose(np.diag([1e-4, 1e-8]), drop_tol=1e-12)
    rep = nuclearity_report(sd)
    assert rep["sum_sqrt"] == pytest.approx(0.0101, rel=1e-12)
    assert rep["tail_bound"] == 0.0 and not rep["tail_flag"]
    dropped = schmidt_decompose(np.diag([1.0, 1e-13]), drop_tol=1e-12)
    assert dropped.rank == 1 and dropped.tail_mass == pytest.approx(1e-13)


def test_diag_stable_under_refinement():
    # at rule 1/2 the leading J singulars do not move when N doubles
    out = []
    for N in (48, 96):
        fam = preset_family("diagonal-decay", N, 2)
        sel = select_e_sequence(decay_profile(fam), 0.5)
        fr = complete_frame(sel, N)
        out.append(schmidt_decompose(split_family(fam, fr).J[0]).singulars)
    assert np.allclose(out[0], out[1][:out[0].size], rtol=1e-12)
