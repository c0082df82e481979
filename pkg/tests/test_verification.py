from dataclasses import replace

import numpy as np
import pytest

from carleman import verification as V
from carleman.kernels import KernelField
from carleman.pipeline import verify


def corrupted(K, s_index, t_index, amount):
    fields = {o: v.copy() for o, v in K.fields.items()}
    fields[(0, 0)][s_index, t_index] += amount
    return KernelField(K.grid, fields, K.parts, K.coefficients)


def test_small_diag_verifies(small_constructions):
    rep = verify(small_constructions["diagonal-decay"])
    names = {c.name: c for c in rep.checks}
    for key in ("gram", "splitting", "schwarz", "quarter_power", "assembly", "scalar_recovery",
                "b_assembly", "hs_chains", "basel_product", "schedules",
                "smoothness[r=1]"):
        assert names[key].status == "pass", names[key].message
    # no basis function keeps 99.9% of its mass on [-4, 4]
    assert names["representation[r=1]"].status == "skip"
    assert names["d_decay"].status == "fail"


def test_zero_skips(small_constructions):
    con = small_constructions["zero"]
    K = con.kernels[0]
    assert V.vanishing_check(K).status == "skip"
    assert V.d_decay_check(np.zeros(4)).status == "skip"
    assert V.smoothness_check(K).status == "pass"
    pos = [p for p, role in enumerate(con.structure.pairing.roles) if role[0] == "g"]
    rep = V.representation_check(K, con.direct[0], con.samples, pos)
    assert rep.status == "pass" and rep.value == 0.0


def test_representation_skip_without_positions(small_constructions):
    con = small_constructions["diagonal-decay"]
    chk = V.representation_check(con.kernels[0], con.direct[0], con.samples, [])
    assert chk.status == "skip" and "reason" in chk.detail


def test_corrupted_field_is_located(small_constructions):
    K = small_constructions["diagonal-decay"].kernels[0]
    bad = corrupted(K, 40, 100, 1.0)
    chk = V.smoothness_check(bad)
    assert chk.status == "fail"
    jump = chk.detail["jump"]
    assert jump["field"] == "0,0"
    pts = K.grid.points
    assert (jump["s"], jump["t"]) in {(pts[40], pts[100]), (pts[39], pts[100]),
                                      (pts[40], pts[99])}


def test_vanishing_on_small_kernel(small_constructions):
    con = small_constructions["weighted-shift"]
    K = con.kernels[0]
    chk = V.vanishing_check(K, con.carleman[0], 0.1, (2.0, 3.0, 4.0))
    assert chk.detail["nested_extents"] == [2.0, 3.0, 4.0]
    loose = V.vanishing_check(K, con.carleman[0], 1.0, (2.0, 3.0, 4.0))
    assert "warning" in loose.detail
    # a bump on the boundary ring breaks the ratio test
    edge = corrupted(K, 0, K.grid.size // 2, 10 * np.max(np.abs(K.values)))
    assert V.vanishing_check(edge, None, 0.1, (2.0, 4.0)).status == "fail"


def test_ring_statistics_profile():
    from carleman.kernels import KernelGrid
    g = KernelGrid(2.0, 0.1)
    prof = np.exp(-g.points ** 2)
    ring, inner, width = V.ring_statistics(prof, g)
    assert width == pytest.approx(0.2)
    assert ring == pytest.approx(np.exp(-1.8 ** 2)) and inner == 1.0


def test_d_decay():
    assert V.d_decay_check([1.0, 0.5, 0.2, 0.05]).status == "pass"
    assert V.d_decay_check([1.0, 0.5, 0.6, 0.05]).status == "fail"
    assert V.d_decay_check([1.0, 0.8, 0.5]).status == "fail"


def test_gram_check():
    assert V.gram_check(np.eye(3)).passed
    G = np.eye(3)
    G[0, 2] = 2e-6
    assert not V.gram_check(G).passed


def test_basel_check():
    chk = V.basel_check()
    assert chk.status == "pass" and 2.60 <= chk.value <= 2.706


def test_scalar_recovery_detects_rounding(small_constructions):
    con = small_constructions["diagonal-decay"]
    assert V.scalar_recovery_check(con.kernels, con.b_kernels).passed
    off = con.b_kernels[1]
    nudged = replace(off, fields={o: v * (1 + 2.0 ** -50) for o, v in off.fields.items()})
    bad = V.scalar_recovery_check(con.kernels, [con.b_kernels[0], nudged])
    assert not bad.passed


def test_report_serialises(small_constructions):
    rep = verify(small_constructions["zero"])
    d = rep.to_dict()
    assert d["verdict"] == ("pass" if rep.verdict else "fail")
    assert [c["name"] for c in d["checks"]] == sorted(c["name"] for c in d["checks"])
    assert all("claim" in c for c in d["checks"])
