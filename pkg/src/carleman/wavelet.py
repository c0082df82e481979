"""Lemarié-Meyer mother wavelet with a C-infinity bell, its dyadic children and
their sup-norm bounds.

The mother function is

    u(s) = 1/(2 pi) * int exp(i xi (1/2 + s)) sgn(xi) b(|xi|) dxi

and folding the negative half-line onto the positive one gives, for the
derivative of order m,

    u^(m)(s) = 1/(2 pi) * int_{2pi/3}^{8pi/3}
               [(i xi)^m e^{i xi a} - (-i xi)^m e^{-i xi a}] b(xi) dxi,
    a = 1/2 + s.

The integral is computed by composite Gauss-Legendre quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import OrderBudgetExceeded

FREQ_LO = 2.0 * np.pi / 3.0
FREQ_MID = 4.0 * np.pi / 3.0
FREQ_HI = 8.0 * np.pi / 3.0

PANEL_NODES = 32
# Largest |1/2 + s| a rule with n nodes resolves to ~1e-12 is about n / 3.
NODES_PER_UNIT_ARGUMENT = 3.0
# Past this argument |u^(m)| is far below double precision round-off.
NEGLIGIBLE_RADIUS = 4000.0


class ChildIndex(NamedTuple):
    j: int
    k: int


def _theta(x, sharpness):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-sharpness / x[pos])
    return out


def smooth_step(x, sharpness=1.0):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1, nu(x) + nu(1 - x) = 1."""
    a = _theta(x, sharpness)
    b = _theta(1.0 - np.asarray(x, dtype=float), sharpness)
    return a / (a + b)


@dataclass(frozen=True)
class BellFunction:
    """Meyer window supported on [2pi/3, 8pi/3] with an exp(-1/x) transition."""

    transition_sharpness: float = 1.0
    support: tuple = field(default=(FREQ_LO, FREQ_HI), init=False)

    def __post_init__(self):
        if not self.transition_sharpness > 0:
            raise ValueError("transition_sharpness must be positive")

    def __call__(self, xi):
        xi = np.abs(np.asarray(xi, dtype=float))
        out = np.zeros_like(xi)
        rise = (xi >= FREQ_LO) & (xi <= FREQ_MID)
        fall = (xi > FREQ_MID) & (xi <= FREQ_HI)
        c = self.transition_sharpness
        out[rise] = np.sin(0.5 * np.pi * smooth_step(3.0 * xi[rise] / (2.0 * np.pi) - 1.0, c))
        out[fall] = np.cos(0.5 * np.pi * smooth_step(3.0 * xi[fall] / (4.0 * np.pi) - 1.0, c))
        return out


def bell_eval(xi, bell: BellFunction | None = None):
    """Evaluate the bell function; returns a float for scalar input."""
    bell = bell or BellFunction()
    out = bell(np.atleast_1d(xi))
    return float(out[0]) if np.ndim(xi) == 0 else out


def _gauss_legendre(n_nodes, lo=FREQ_LO, hi=FREQ_HI):
    panels = max(1, n_nodes // PANEL_NODES)
    per_panel = max(1, n_nodes // panels)
    x, w = np.polynomial.legendre.leggauss(per_panel)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


class MotherWavelet:
    """Evaluator for the mother wavelet u and its derivatives.

    Parameters
    ----------
    bell : callable, optional
        Frequency window; defaults to :class:`BellFunction`.
    quadrature_nodes : int
        Gauss-Legendre nodes on [2pi/3, 8pi/3] for moderate arguments.
        Larger arguments automatically get proportionally more nodes.
    i_max : int
        Highest derivative order that may be requested.

    Instances are read-only after construction; sup-norms for every order up
    to ``i_max`` are computed eagerly.
    """

    def __init__(self, bell: Callable | None = None, quadrature_nodes: int = 256,
                 i_max: int = 4, chunk: int = 4096):
        if quadrature_nodes < 1:
            raise ValueError("quadrature_nodes must be positive")
        if i_max < 0:
            raise ValueError("i_max must be non-negative")
        self.bell = bell if bell is not None else BellFunction()
        self.quadrature_nodes = int(quadrature_nodes)
        self.i_max = int(i_max)
        self._chunk = chunk
        self._rules = {}
        self._sup = {}
        for order in range(self.i_max + 1):
            self._sup[order] = _estimate_sup_norm(self, order)

    def _rule(self, n_nodes):
        if n_nodes not in self._rules:
            nodes, weights = _gauss_legendre(n_nodes)
            self._rules[n_nodes] = (nodes, weights * self.bell(nodes) / (2.0 * np.pi))
        return self._rules[n_nodes]

    def _nodes_for(self, radius):
        need = self.quadrature_nodes
        while need / NODES_PER_UNIT_ARGUMENT < radius:
            need *= 2
        return need

    def _check_order(self, order):
        if order < 0 or order > self.i_max:
            raise OrderBudgetExceeded(
                f"derivative order {order} outside budget 0..{self.i_max}")

    def __call__(self, s, order: int = 0):
        return self.eval(s, order)

    def eval(self, s, order: int = 0):
        """u^(order)(s) for scalar or array ``s``; complex result."""
        self._check_order(order)
        s_arr = np.asarray(s, dtype=float)
        flat = s_arr.ravel()
        out = np.zeros(flat.shape, dtype=complex)
        a = 0.5 + flat
        radius = np.abs(a)
        base = self.quadrature_nodes / NODES_PER_UNIT_ARGUMENT
        near = radius <= base
        groups = [(near, self.quadrature_nodes)]
        far = ~near & (radius <= NEGLIGIBLE_RADIUS)
        if far.any():
            # bucket far points by the node count their radius needs
            need = np.array([self._nodes_for(r) for r in radius[far]])
            idx = np.flatnonzero(far)
            for n_nodes in np.unique(need):
                mask = np.zeros_like(far)
                mask[idx[need == n_nodes]] = True
                groups.append((mask, int(n_nodes)))
        for mask, n_nodes in groups:
            if mask.any():
                out[mask] = self._integrate(a[mask], order, n_nodes)
        if s_arr.ndim == 0:
            return complex(out[0])
        return out.reshape(s_arr.shape)

    def _integrate(self, a, order, n_nodes):
        nodes, wb = self._rule(n_nodes)
        plus = (1j * nodes) ** order * wb
        minus = (-1j * nodes) ** order * wb
        chunk = max(1, (self._chunk * 256) // n_nodes)
        res = np.empty(a.shape, dtype=complex)
        for lo in range(0, a.size, chunk):
            phase = np.exp(1j * np.outer(a[lo:lo + chunk], nodes))
            res[lo:lo + chunk] = phase @ plus - phase.conj() @ minus
        return res

    def sup_norm(self, order: int = 0) -> float:
        """Estimated ||u^(order)||_C(R)."""
        self._check_order(order)
        return self._sup[order]

    @property
    def cached_sup_norms(self):
        return dict(self._sup)


def _estimate_sup_norm(mother, order, radius=40.0, step=0.01, tol=1e-8):
    """Sup of |u^(order)| by dense sampling plus local grid refinement.

    Outside [-radius, radius] the function is below 1e-6 of its peak, so the
    global maximum is inside the window.
    """
    s = np.linspace(-radius, radius, int(round(2 * radius / step)) + 1)
    vals = np.abs(mother.eval(s, order))
    interior = (vals[1:-1] >= vals[:-2]) & (vals[1:-1] >= vals[2:])
    peaks = np.flatnonzero(interior) + 1
    if peaks.size == 0:
        return float(vals.max())
    best = float(vals.max())
    for p in peaks[np.argsort(vals[peaks])[::-1][:4]]:
        centre, h, value = s[p], step, vals[p]
        while True:
            h *= 0.5
            grid = centre + h * np.arange(-4, 5)
            local = np.abs(mother.eval(grid, order))
            i = int(np.argmax(local))
            change = local[i] - value
            centre, value = grid[i], max(value, local[i])
            if abs(change) < tol and h < 1e-5:
                break
            if h < 1e-12:
                break
        best = max(best, float(value))
    return best


def child_eval(mother: MotherWavelet, idx, s, order: int = 0):
    """u_{jk}^(order)(s) = 2^{j/2} 2^{j order} u^(order)(2^j s - k)."""
    j, k = idx
    scale = 2.0 ** (j * (order + 0.5))
    arg = np.ldexp(np.asarray(s, dtype=float), j) - k
    value = mother.eval(arg, order)
    return scale * value


def child_sup_norm(mother: MotherWavelet, idx, order: int = 0) -> float:
    """Exact rescaling of the mother's sup-norm to the child (j, k)."""
    j = idx[0]
    return 2.0 ** (j * (order + 0.5)) * mother.sup_norm(order)


def scale_bound(j: int) -> float:
    """D for a child at scale j: 2^{j^2} above zero, 2^{-|j|/2} otherwise."""
    if j > 0:
        return math.ldexp(1.0, j * j) if j * j < 1024 else math.inf
    return 2.0 ** (j / 2.0)


def order_bound(mother: MotherWavelet, order: int) -> float:
    """A_i = 2^{(i + 1/2)^2} ||u^(i)||_C."""
    return 2.0 ** ((order + 0.5) ** 2) * mother.sup_norm(order)


def bounds_DA(mother: MotherWavelet, idx, order: int = 0):
    """Return (D, A) with ||u_{jk}^(order)||_C <= D * A."""
    mother._check_order(order)
    return scale_bound(idx[0]), order_bound(mother, order)


# Beyond this argument |u| < 1e-11 and the mother's L2 mass past it is ~1e-20.
EFFECTIVE_RADIUS = 85.0


def gram_matrix(mother: MotherWavelet, pairs, extent: float = 350.0, step: float = 0.02,
                radius: float = EFFECTIVE_RADIUS):
    """Gram matrix of children by the trapezoid rule on [-extent, extent].

    Each child is set to zero where its mother argument exceeds ``radius``.
    The children are band-limited, so the trapezoid rule converges
    spectrally once ``step`` resolves the highest frequency involved.
    """
    s = np.linspace(-extent, extent, int(round(2 * extent / step)) + 1)
    h = s[1] - s[0]
    V = np.zeros((s.size, len(pairs)), dtype=complex)
    for c, (j, k) in enumerate(pairs):
        arg = np.ldexp(s, j) - k
        keep = np.abs(arg + 0.5) <= radius
        V[keep, c] = 2.0 ** (j / 2.0) * mother.eval(arg[keep])
    w = np.full(s.size, h)
    w[0] = w[-1] = 0.5 * h
    return (V.conj() * w[:, None]).T @ V


class MassTable:
    """Cumulative |u|^2 on [-extent, extent] for the L2 mass of a child
    outside an interval."""

    def __init__(self, mother: MotherWavelet, extent: float = 200.0, step: float = 0.005):
        self.s = np.linspace(-extent, extent, int(round(2 * extent / step)) + 1)
        dens = np.abs(mother.eval(self.s)) ** 2
        h = self.s[1] - self.s[0]
        self.cumulative = np.concatenate(([0.0], np.cumsum(0.5 * h * (dens[1:] + dens[:-1]))))
        self.total = float(self.cumulative[-1])

    def mass_between(self, lo, hi):
        c = np.interp([lo, hi], self.s, self.cumulative)
        return float(max(c[1] - c[0], 0.0))

    def outside(self, idx, lo: float, hi: float) -> float:
        """L2 mass of u_{jk} outside [lo, hi] (relative to its unit norm)."""
        j, k = idx
        a, b = math.ldexp(lo, j) - k, math.ldexp(hi, j) - k
        return max(0.0, self.total - self.mass_between(a, b)) / self.total
