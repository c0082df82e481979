import numpy as np
import pytest

from carleman.errors import GridMismatch, OrderBudgetExceeded, ScheduleExceeded
from carleman.kernels import (KernelField, KernelGrid, KernelPart, assemble_F, assemble_K,
                              assemble_P, carleman_norm, carleman_norms, coefficient_matrix,
                              conjugated_h_image, expansion_vectors, kernel_orders,
                              sample_basis)

PRESETS = ["zero", "diagonal-decay", "weighted-shift", "random-compact"]


def test_kernel_orders():
    assert kernel_orders(2) == [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0)]


def test_grid():
    g = KernelGrid(4.0, 0.5)
    assert g.size == 17 and g.points[0] == -4.0 and g.points[-1] == 4.0
    assert g.weights.sum() == pytest.approx(8.0)
    assert g.points[g.sub_slice(2.0)].tolist() == [-2.0 + 0.5 * i for i in range(9)]
    with pytest.raises(GridMismatch):
        g.sub_slice(5.0)
    with pytest.raises(ValueError):
        KernelGrid(1.0, 0.3)


@pytest.mark.parametrize("preset", PRESETS)
def test_pairing(small_structures, preset):
    st_ = small_structures[preset]
    pr, fr, part = st_.pairing, st_.frames, st_.partition
    assert len(set(pr.forward)) == pr.N == fr.N
    for p in range(pr.N):
        assert pr.inverse(pr.forward[p]) == p
    for k, e_pos in enumerate(fr.x, 1):
        assert pr.roles[pr.position_of(("e", e_pos))] == ("g", k)
        assert pr.forward[pr.position_of(("e", e_pos))] == part.g_index(k)
    for k in range(1, fr.e_perp.shape[1] + 1):
        assert pr.roles[pr.position_of(("p", k))] == ("h", part.n_of_k[k - 1])
    F = fr.f
    assert np.max(np.abs(F.conj().T @ F - np.eye(fr.N))) < 1e-13


@pytest.mark.parametrize("preset", ["zero", "diagonal-decay", "weighted-shift"])
def test_parts_match_splitting(small_constructions, preset):
    # P carries Q_r and F carries J_r^*, since A p_n = s_n^(1/4) q_n
    con = small_constructions[preset]
    st_ = con.structure
    for r in range(1, st_.split.R + 1):
        K = con.kernels[r - 1]
        Q = coefficient_matrix(st_.split.Q[r - 1], st_.frames)
        Js = coefficient_matrix(st_.split.J[r - 1].conj().T, st_.frames)
        assert np.max(np.abs(K.parts["P"].coefficients - Q)) < 1e-14
        assert np.max(np.abs(K.parts["F"].coefficients - Js)) < 1e-13


def test_zero_images(small_structures):
    st_ = small_structures["zero"]
    img = conjugated_h_image(1, 1, st_.pairing, st_.split, st_.frames)
    assert img.norm == 0.0


@pytest.mark.parametrize("preset", ["diagonal-decay", "weighted-shift", "random-compact"])
def test_image_norm(small_structures, preset):
    st_ = small_structures[preset]
    fr = st_.frames
    for k in range(1, fr.e_perp.shape[1] + 1):
        img = conjugated_h_image(k, 2, st_.pairing, st_.split, fr)
        ref = np.linalg.norm(st_.split.S[1].conj().T @ fr.e_perp[:, k - 1])
        assert img.norm == pytest.approx(ref, rel=1e-12, abs=1e-15)
    with pytest.raises(ScheduleExceeded):
        conjugated_h_image(fr.e_perp.shape[1] + 1, 1, st_.pairing, st_.split, fr)


def test_zero_kernel(small_constructions):
    con = small_constructions["zero"]
    for K in con.kernels:
        assert all(not np.any(F) for F in K.fields.values())
        assert not np.any(carleman_norms(K, con.samples))


def test_single_term_P(small_constructions):
    con = small_constructions["weighted-shift"]
    st_ = con.structure
    orders = kernel_orders(2)
    P1 = assemble_P(1, st_.pairing, st_.split, st_.frames, con.samples, orders, st_.mother,
                    0.5, terms=1)
    img = conjugated_h_image(1, 1, st_.pairing, st_.split, st_.frames)
    row = st_.pairing.position_of(("p", 1))
    phi = con.samples[0]
    expected = np.outer(phi[:, row], (phi @ img.coefficients).conj())
    assert np.allclose(P1.fields[(0, 0)], expected, rtol=0, atol=1e-15)
    K1 = KernelField(con.grid, P1.fields, {"P": P1}, P1.coefficients)
    assert np.allclose(carleman_norms(K1, con.samples), np.abs(phi[:, row]) * img.norm,
                       rtol=1e-12, atol=1e-30)
    assert P1.provenance["terms"] == 1


def test_finite_differences(small_constructions):
    # fine grid of its own: at step 0.01 the five-point rule resolves the
    # highest frequency 8 pi / 3 to about 1e-7
    con = small_constructions["diagonal-decay"]
    st_ = con.structure
    C = con.kernels[0].coefficients
    h = 0.01
    s = h * np.arange(-200, 201)
    phi = sample_basis(st_.mother, st_.pairing, s, 2)
    field = lambda i, j: phi[i] @ C @ phi[j].conj().T
    for i, j in [(0, 0), (1, 0), (0, 1)]:
        F = field(i, j)
        fd_s = (-F[4:] + 8 * F[3:-1] - 8 * F[1:-3] + F[:-4]) / (12 * h)
        fd_t = (-F[:, 4:] + 8 * F[:, 3:-1] - 8 * F[:, 1:-3] + F[:, :-4]) / (12 * h)
        ds, dt = field(i + 1, j)[2:-2], field(i, j + 1)[:, 2:-2]
        assert np.max(np.abs(fd_s - ds)) <= 1e-6 * np.max(np.abs(ds))
        assert np.max(np.abs(fd_t - dt)) <= 1e-6 * np.max(np.abs(dt))


def test_expansion_norms(small_structures):
    st_ = small_structures["random-compact"]
    for A in st_.quarter:
        a, b = expansion_vectors(A, st_.frames)
        s4 = A.source.singulars ** 0.25
        assert np.allclose(np.linalg.norm(a, axis=0), s4, atol=1e-12)
        assert np.allclose(np.linalg.norm(b, axis=0), s4, atol=1e-12)


def test_rank_one_F(small_constructions):
    con = small_constructions["diagonal-decay"]
    st_ = con.structure
    orders = kernel_orders(2)
    F1 = assemble_F(1, st_.pairing, st_.quarter[0], st_.frames, con.samples, orders,
                    st_.mother, terms=1)
    a, b = expansion_vectors(st_.quarter[0], st_.frames)
    s1 = st_.quarter[0].source.singulars[0]
    phi = con.samples[0]
    expected = np.sqrt(s1) * np.outer(phi @ b[:, 0], (phi @ a[:, 0]).conj())
    assert np.allclose(F1.fields[(0, 0)], expected, rtol=0, atol=1e-15)


@pytest.mark.parametrize("preset", ["zero", "diagonal-decay", "weighted-shift"])
def test_K_is_P_plus_F(small_constructions, preset):
    for K in small_constructions[preset].kernels:
        for o, v in K.fields.items():
            assert np.array_equal(v, K.parts["P"].fields[o] + K.parts["F"].fields[o])


def test_carleman_norm_against_quadrature(small_constructions):
    # all basis functions of the small diagonal case are visible on [-4, 4]
    con = small_constructions["diagonal-decay"]
    st_ = con.structure
    K = con.kernels[0]
    pts = np.array([-1.0, 0.0, 0.7])
    wide = np.linspace(-300, 300, 60001)
    phi_s = sample_basis(st_.mother, st_.pairing, pts, 0)[0]
    phi_t = sample_basis(st_.mother, st_.pairing, wide, 0)[0]
    vals = phi_s @ K.coefficients @ phi_t.conj().T
    quad = np.sqrt(np.trapezoid(np.abs(vals) ** 2, wide, axis=1))
    parseval = carleman_norm(pts, K, st_.mother, st_.pairing)
    visible = [p for p, pair in enumerate(st_.pairing.pairs) if pair.j >= -3]
    resolved = np.linalg.norm((phi_s @ K.coefficients)[:, visible], axis=1)
    assert np.allclose(quad, resolved, rtol=1e-3)
    assert np.all(parseval >= resolved * (1 - 1e-12))
    assert carleman_norm(0.0, K, st_.mother, st_.pairing) == pytest.approx(parseval[1])


def test_order_budget(small_constructions):
    con = small_constructions["diagonal-decay"]
    st_ = con.structure
    with pytest.raises(OrderBudgetExceeded):
        assemble_P(1, st_.pairing, st_.split, st_.frames, con.samples, [(2, 1)], st_.mother, 0.5)


def test_mismatched_parts(small_constructions):
    con = small_constructions["diagonal-decay"]
    P = con.kernels[0].parts["P"]
    bad = KernelPart("F", P.coefficients, {o: v[:-1] for o, v in P.fields.items()})
    with pytest.raises(GridMismatch):
        assemble_K(P, bad, con.grid)
    with pytest.raises(GridMismatch):
        assemble_K(P, KernelPart("F", P.coefficients, {(0, 0): P.fields[(0, 0)]}), con.grid)
