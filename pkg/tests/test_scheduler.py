import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from carleman.errors import BudgetExceeded, InsufficientNegativeScales
from carleman.scheduler import (Enumeration, enumerate_pairs, partition_gh, scale_threshold,
                                sup_norm_GH, summability_ledger)
from carleman.wavelet import order_bound, scale_bound


def ring_by_angle(m):
    """Shell m ordered counter-clockwise from (0, m) by polar angle of (j, k)."""
    pts = [(j, k) for j in range(-m, m + 1) for k in range(-m, m + 1)
           if max(abs(j), abs(k)) == m]
    return sorted(pts, key=lambda p: (math.atan2(p[1], p[0]) - math.pi / 2) % (2 * math.pi))


def oracle_sequence(shells):
    out = [(0, 0)]
    for m in range(1, shells + 1):
        out += ring_by_angle(m)
    return out


def test_first_pairs():
    assert enumerate_pairs(1) == (0, 0)
    head = [tuple(enumerate_pairs(n)) for n in range(1, 13)]
    assert head == [(0, 0), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0),
                    (1, 1), (0, 2), (-1, 2), (-2, 2)]


def test_matches_angle_oracle():
    enum = Enumeration(8)
    expected = oracle_sequence(6)
    assert [tuple(enum.pair(n)) for n in range(1, len(expected) + 1)] == expected


def test_first_25_cover_shell_two_once():
    seen = [tuple(enumerate_pairs(n)) for n in range(1, 26)]
    assert len(set(seen)) == 25
    assert set(seen) == {(j, k) for j in range(-2, 3) for k in range(-2, 3)}


@given(st.integers(min_value=1, max_value=(2 * 300 + 1) ** 2))
def test_round_trip(n):
    enum = Enumeration(300)
    assert enum.index(enum.pair(n)) == n


def test_budget_exceeded():
    enum = Enumeration(2)
    with pytest.raises(BudgetExceeded):
        enum.pair(26)
    with pytest.raises(BudgetExceeded):
        enum.index((3, 0))


@pytest.mark.parametrize("j", [-1, -2, -5])
def test_pairs_at_scale_brute_force(j):
    enum = Enumeration(8)
    brute = sorted((n for n in range(1, enum.size + 1) if enum.pair(n).j == j))
    listed = [enum.index(p) for p in enum.pairs_at_scale(j)]
    assert listed == brute


def test_scale_threshold():
    assert scale_threshold(1, 0.5) == -2
    assert scale_threshold(3, 0.5) == -6
    assert scale_threshold(1, 2.0 ** -10) == -20
    assert scale_threshold(1, 0.9) == -1
    for k in range(1, 20):
        assert scale_bound(scale_threshold(k, 0.7)) <= 0.7 ** k


def test_partition_half():
    enum = Enumeration(128)
    part = partition_gh(enum, 0.5, h_count=20, schedule_length=12)
    assert all(p.j <= -1 for p in part.h_pairs)
    assert sum(scale_bound(p.j) for p in part.h_pairs) <= 1.0
    assert all(b > a for a, b in zip(part.n_of_k, part.n_of_k[1:]))
    for k, n in enumerate(part.n_of_k, 1):
        assert scale_bound(part.h_pair(n).j) <= 0.5 ** k / k
    h = set(part.h_indices)
    g = part.g_indices(200)
    assert not h & set(g)
    assert sorted(h | set(g))[:150] == list(range(1, 151))


def test_reference_h_scales():
    part = partition_gh(Enumeration(4096), 2.0 ** -10, h_count=3)
    assert [tuple(p) for p in part.h_pairs] == [(-20, 20), (-40, 40), (-60, 60)]


def test_first_h_bound(mother):
    part = partition_gh(Enumeration(64), 0.8, h_count=4)
    assert part.h_pair(1).j == -1
    H, ceiling = sup_norm_GH(mother, part, "h", 1, 0)
    assert H <= order_bound(mother, 0) / math.sqrt(2) * (1 + 1e-12)
    assert H <= ceiling


def test_weighted_tail_vanishes(mother):
    part = partition_gh(Enumeration(2048), 0.5, schedule_length=30)
    led = summability_ledger(mother, part, 2)
    assert led["sum_D_ok"]
    for i in range(3):
        assert led["orders"][i]["ok"]
        assert led["orders"][i]["last_increment"] < 1e-6


def test_g_sup_norms_under_bound(mother):
    part = partition_gh(Enumeration(64), 0.5, h_count=8)
    for k in range(1, 30):
        for i in range(3):
            value, ceiling = sup_norm_GH(mother, part, "g", k, i)
            assert value <= ceiling


def test_insufficient_negative_scales():
    with pytest.raises(InsufficientNegativeScales):
        partition_gh(Enumeration(30), 2.0 ** -10, h_count=2)


def test_refinement_stable(mother):
    from carleman.wavelet import _estimate_sup_norm
    for i in range(3):
        coarse = _estimate_sup_norm(mother, i, step=0.02)
        assert coarse == pytest.approx(mother.sup_norm(i), rel=1e-8)
