"""Enumeration of the dyadic children u_{jk} into one sequence u_n and the
split of that sequence into the families {g_k} and {h_k}.

Pairs are ordered by square shells ``max(|j|, |k|) = 0, 1, 2, ...``.  Shell
``m`` is walked counter-clockwise in the (j, k) plane starting from (0, m),
so within a shell the non-positive scales come first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceeded, InsufficientNegativeScales
from .wavelet import ChildIndex, MotherWavelet, child_sup_norm, order_bound, scale_bound

SHELL_RULE = ("square shells max(|j|,|k|)=0,1,2,...; shell m walked counter-clockwise "
              "from (j,k)=(0,m): top edge leftwards, left edge down, bottom edge "
              "rightwards, right edge up, top edge back to (1,m)")


def _ring_pair(m, p):
    if p <= m:
        return ChildIndex(-p, m)
    if p <= 3 * m:
        return ChildIndex(-m, m - (p - m))
    if p <= 5 * m:
        return ChildIndex(-m + (p - 3 * m), -m)
    if p <= 7 * m:
        return ChildIndex(m, -m + (p - 5 * m))
    return ChildIndex(m - (p - 7 * m), m)


def _ring_position(j, k):
    m = max(abs(j), abs(k))
    if k == m and j <= 0:
        return -j
    if j == m and k > -m:
        return 5 * m + (k + m)
    if k == m:
        return 7 * m + (m - j)
    if j == -m:
        return m + (m - k)
    return 3 * m + (j + m)


@dataclass(frozen=True)
class Enumeration:
    """Bijection n <-> (j_n, k_n) on the first ``(2 B + 1)^2`` indices."""

    shell_budget: int = 4096
    shell_rule: str = field(default=SHELL_RULE, init=False)

    @property
    def size(self) -> int:
        return (2 * self.shell_budget + 1) ** 2

    def pair(self, n: int) -> ChildIndex:
        n = int(n)
        if n < 1 or n > self.size:
            raise BudgetExceeded(f"index {n} outside materialized range 1..{self.size}")
        if n == 1:
            return ChildIndex(0, 0)
        m = (math.isqrt(n - 1) + 1) // 2
        return _ring_pair(m, n - 1 - (2 * m - 1) ** 2)

    def index(self, pair) -> int:
        j, k = int(pair[0]), int(pair[1])
        m = max(abs(j), abs(k))
        if m > self.shell_budget:
            raise BudgetExceeded(f"pair {(j, k)} lies in shell {m} > budget {self.shell_budget}")
        if m == 0:
            return 1
        return (2 * m - 1) ** 2 + 1 + _ring_position(j, k)

    def pairs_at_scale(self, j: int):
        """Children with scale ``j`` in enumeration order."""
        m0 = abs(j)
        if m0 == 0:
            yield ChildIndex(0, 0)
        elif j < 0:
            for k in range(m0, -m0 - 1, -1):
                yield ChildIndex(j, k)
        else:
            for k in range(-m0, m0 + 1):
                yield ChildIndex(j, k)
        for m in range(m0 + 1, self.shell_budget + 1):
            # top edge precedes the bottom edge for j <= 0, follows it for j > 0
            first, second = (m, -m) if j <= 0 else (-m, m)
            yield ChildIndex(j, first)
            yield ChildIndex(j, second)


def enumerate_pairs(n: int, enum: Enumeration | None = None) -> ChildIndex:
    """The n-th child (1-based) under the square-shell ordering."""
    return (enum or Enumeration()).pair(n)


def scale_threshold(k: int, geometric_target: float) -> int:
    """Largest scale j <= -1 with 2^{j/2} <= geometric_target^k."""
    j = math.floor(2 * k * math.log2(geometric_target) + 1e-12)
    return min(j, -1)


@dataclass
class BasisPartition:
    """{h_k} listed explicitly, {g_k} generated lazily as the complement.

    ``n_of_k[k-1]`` is the 1-based position inside the h list that receives
    the k-th vector of the orthogonal complement frame.
    """

    enumeration: Enumeration
    geometric_target: float
    h_pairs: list
    n_of_k: list
    _h_set: set = field(default_factory=set, repr=False)
    _g_cache: list = field(default_factory=list, repr=False)
    _g_cursor: int = field(default=0, repr=False)

    def __post_init__(self):
        self._h_set = {self.enumeration.index(p) for p in self.h_pairs}

    @property
    def h_indices(self):
        return [self.enumeration.index(p) for p in self.h_pairs]

    def g_index(self, k: int) -> int:
        """Enumeration index of g_k (1-based k)."""
        while len(self._g_cache) < k:
            self._g_cursor += 1
            if self._g_cursor > self.enumeration.size:
                raise BudgetExceeded("enumeration exhausted while listing g")
            if self._g_cursor not in self._h_set:
                self._g_cache.append(self._g_cursor)
        return self._g_cache[k - 1]

    def g_pair(self, k: int) -> ChildIndex:
        return self.enumeration.pair(self.g_index(k))

    def g_indices(self, count: int):
        return [self.g_index(k) for k in range(1, count + 1)]

    def h_pair(self, k: int) -> ChildIndex:
        return self.h_pairs[k - 1]

    @property
    def g_count(self) -> int:
        return self.enumeration.size - len(self.h_pairs)

    def is_h(self, n: int) -> bool:
        return n in self._h_set

    def to_dict(self, g_listed: int = 0):
        return {
            "shell_rule": self.enumeration.shell_rule,
            "shell_budget": self.enumeration.shell_budget,
            "enumeration_size": self.enumeration.size,
            "geometric_target": self.geometric_target,
            "h": [{"k": k, "n": self.enumeration.index(p), "j": p.j, "translation": p.k,
                   "D": scale_bound(p.j)} for k, p in enumerate(self.h_pairs, 1)],
            "n_of_k": list(self.n_of_k),
            "g_count": self.g_count,
            "g_head": [{"k": k, "n": self.g_index(k), "j": self.g_pair(k).j,
                        "translation": self.g_pair(k).k} for k in range(1, g_listed + 1)],
        }


def partition_gh(enum: Enumeration, geometric_target: float = 0.5,
                 h_count: int = 16, schedule_length: int = 0) -> BasisPartition:
    """Reserve sparse negative scales for {h_k} and schedule n(k).

    h_k is the first unused child at scale ``scale_threshold(k)``, so that
    D_{n_k} <= t^k.  n(k) is the first h position after n(k-1) whose D is
    at most t^k / k.  The h list grows until ``schedule_length`` entries of
    n(k) exist.
    """
    if not 0 < geometric_target < 1:
        raise ValueError("geometric_target must lie in (0, 1)")
    h_pairs, streams = [], {}

    def extend():
        k = len(h_pairs) + 1
        j = scale_threshold(k, geometric_target)
        if -j > enum.shell_budget:
            raise InsufficientNegativeScales(
                f"h_{k} needs scale {j} but the shell budget stops at {-enum.shell_budget}")
        stream = streams.setdefault(j, enum.pairs_at_scale(j))
        try:
            pair = next(stream)
        except StopIteration:
            raise InsufficientNegativeScales(f"no unused child left at scale {j}") from None
        enum.index(pair)
        h_pairs.append(pair)

    while len(h_pairs) < h_count:
        extend()
    n_of_k, last = [], 0
    for k in range(1, schedule_length + 1):
        ceiling = geometric_target ** k / k
        m = last + 1
        while True:
            while len(h_pairs) < m:
                extend()
            if scale_bound(h_pairs[m - 1].j) <= ceiling:
                break
            m += 1
        n_of_k.append(m)
        last = m
    return BasisPartition(enum, geometric_target, h_pairs, n_of_k)


def sup_norm_GH(mother: MotherWavelet, part: BasisPartition, which: str, k: int,
                order: int = 0):
    """(sampled sup-norm, D*A ceiling) for g_k or h_k at the given order."""
    if which == "g":
        pair = part.g_pair(k)
    elif which == "h":
        pair = part.h_pair(k)
    else:
        raise ValueError("which must be 'g' or 'h'")
    value = child_sup_norm(mother, pair, order)
    ceiling = scale_bound(pair.j) * order_bound(mother, order)
    return value, ceiling


def summability_ledger(mother: MotherWavelet, part: BasisPartition, i_max: int):
    """Finite partial sums behind the h-family summability conditions.

    For every order i <= i_max reports sum_k D_{n_k}, sum_k H_{k,i},
    sum_k k H_{n(k),i} together with the geometric ceilings
    t/(1-t) and A_i t/(1-t).
    """
    t = part.geometric_target
    geo = t / (1.0 - t)
    d_values = np.array([scale_bound(p.j) for p in part.h_pairs])
    out = {"sum_D": float(d_values.sum()), "sum_D_ceiling": geo,
           "sum_D_ok": bool(d_values.sum() <= geo * (1 + 1e-12)), "orders": {}}
    for i in range(i_max + 1):
        H = np.array([child_sup_norm(mother, p, i) for p in part.h_pairs])
        weighted = np.array([k * H[n - 1] for k, n in enumerate(part.n_of_k, 1)])
        partial = np.cumsum(weighted) if weighted.size else np.zeros(0)
        ceiling = order_bound(mother, i) * geo
        out["orders"][i] = {
            "sum_H": float(H.sum()),
            "sum_kH_nk": float(partial[-1]) if partial.size else 0.0,
            "ceiling": ceiling,
            "ok": bool((partial <= ceiling * (1 + 1e-12)).all()),
            "last_increment": float(weighted[-1]) if weighted.size else 0.0,
        }
    return out
