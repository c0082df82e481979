"""The unitary U (an index pairing f_n -> u_{sigma(n)}), the kernels P and F
of the conjugated pieces of T = U S U^{-1}, and K = P + F sampled on a grid.

Every operator X on the truncated space is carried to L2 through its
coefficient matrix C with C[n, m] = <X f_m, f_n>; the corresponding kernel is

    X(s, t) = sum_{n,m} C[n, m] u_{sigma(n)}(s) conj(u_{sigma(m)}(t)),

and its (i, j) partial derivative replaces u by u^(i) in s and u^(j) in t.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .decomposition import FrameSet, SplitOperators
from .errors import GridMismatch, InconsistentPairing, OrderBudgetExceeded, ScheduleExceeded
from .scheduler import BasisPartition
from .schmidt import QuarterPowerA, nuclearity_report
from .wavelet import MotherWavelet, child_eval, child_sup_norm, order_bound

TWO_FORM_TOL = 1e-10


@dataclass(frozen=True)
class KernelGrid:
    """Symmetric square lattice [-extent, extent]^2 with spacing ``step``."""

    extent: float = 12.0
    step: float = 0.05

    def __post_init__(self):
        if self.extent <= 0 or self.step <= 0:
            raise ValueError("grid extent and step must be positive")
        n = self.extent / self.step
        if abs(n - round(n)) > 1e-9:
            raise ValueError("extent must be an integer multiple of step")

    @property
    def half_count(self) -> int:
        return int(round(self.extent / self.step))

    @property
    def points(self) -> np.ndarray:
        return self.step * np.arange(-self.half_count, self.half_count + 1)

    @property
    def size(self) -> int:
        return 2 * self.half_count + 1

    @property
    def weights(self) -> np.ndarray:
        w = np.full(self.size, self.step)
        w[0] = w[-1] = 0.5 * self.step
        return w

    def sub_slice(self, extent: float) -> slice:
        """Index range of the nested grid [-extent, extent] with the same step."""
        half = int(round(extent / self.step))
        if half > self.half_count or abs(half * self.step - extent) > 1e-9:
            raise GridMismatch(f"extent {extent} is not a nested sub-grid of {self}")
        c = self.half_count
        return slice(c - half, c + half + 1)

    def to_dict(self):
        return {"extent": self.extent, "step": self.step, "points_per_axis": self.size}


@dataclass(frozen=True)
class UnitaryPairing:
    """f-position -> enumeration index of its image u_n.

    ``roles[p]`` is ("g", k) or ("h", k): f_p is sent to g_k or h_k.
    """

    labels: tuple
    forward: tuple
    pairs: tuple
    roles: tuple

    @property
    def N(self):
        return len(self.forward)

    def inverse(self, n: int) -> int:
        return self.forward.index(n)

    def position_of(self, label) -> int:
        return self.labels.index(label)

    def to_dict(self):
        return [{"f": f"{kind}{k}", "role": f"{r[0]}{r[1]}", "n": n, "j": p.j, "translation": p.k}
                for (kind, k), r, n, p in zip(self.labels, self.roles, self.forward, self.pairs)]


def build_pairing(frames: FrameSet, part: BasisPartition) -> UnitaryPairing:
    """x_k -> g_k, x_k^perp -> h_(slot) with e_k^perp landing on h_{n(k)}."""
    if not frames.x and frames.K_e:
        raise InconsistentPairing("x sequence has not been attached to the frames")
    target = {}
    for k, e_pos in enumerate(frames.x, 1):
        target[("e", e_pos)] = ("g", k, part.g_index(k), part.g_pair(k))
    if len(part.h_pairs) < (max(frames.x_perp_slots) if frames.x_perp_slots else 0):
        raise InconsistentPairing(
            f"h list has {len(part.h_pairs)} entries, slot {max(frames.x_perp_slots)} needed")
    for label, slot in zip(frames.x_perp, frames.x_perp_slots):
        pair = part.h_pair(slot)
        target[label] = ("h", slot, part.enumeration.index(pair), pair)
    for k in range(1, frames.e_perp.shape[1] + 1):
        if k > len(part.n_of_k):
            raise InconsistentPairing(f"n(k) schedule ends before k={k}")
        role = target.get(("p", k))
        if role is None or role[:2] != ("h", part.n_of_k[k - 1]):
            raise InconsistentPairing(f"e_{k}^perp is not sent to h_n({k})")
    missing = [lab for lab in frames.f_labels if lab not in target]
    if missing:
        raise InconsistentPairing(f"frame vectors without image: {missing}")
    forward = tuple(target[lab][2] for lab in frames.f_labels)
    if len(set(forward)) != len(forward):
        raise InconsistentPairing("pairing is not injective")
    return UnitaryPairing(frames.f_labels, forward,
                          tuple(target[lab][3] for lab in frames.f_labels),
                          tuple(target[lab][:2] for lab in frames.f_labels))


def coefficient_matrix(M, frames: FrameSet):
    """C[n, m] = <M f_m, f_n>."""
    F = frames.f
    return F.conj().T @ M @ F


def sample_basis(mother: MotherWavelet, pairing: UnitaryPairing, s, max_order: int):
    """Array (max_order + 1, len(s), N) with u_{sigma(n)}^(i)(s)."""
    s = np.asarray(s, dtype=float)
    out = np.empty((max_order + 1, s.size, pairing.N), dtype=complex)
    for i in range(max_order + 1):
        for p, pair in enumerate(pairing.pairs):
            out[i, :, p] = child_eval(mother, pair, s, i)
    return out


def basis_sup_norms(mother: MotherWavelet, pairing: UnitaryPairing, max_order: int):
    """(max_order + 1, N) array of ||u_{sigma(n)}^(i)||_C."""
    return np.array([[child_sup_norm(mother, p, i) for p in pairing.pairs]
                     for i in range(max_order + 1)])


def kernel_orders(i_max: int):
    return [(i, j) for i in range(i_max + 1) for j in range(i_max + 1 - i)]


@dataclass(frozen=True)
class CoefficientVector:
    """Coefficients on f-positions (equivalently on u_{sigma(n)})."""

    coefficients: np.ndarray
    u_indices: tuple
    sup_bounds: tuple
    tail_bound: float = 0.0

    @property
    def norm(self):
        return float(np.linalg.norm(self.coefficients))


def conjugated_h_image(k: int, r: int, pairing: UnitaryPairing, split: SplitOperators,
                       frames: FrameSet, sup_norms=None) -> CoefficientVector:
    """Coefficients of T^* h_{n(k)} = U S_r^* e_k^perp.

    c_n = <S^* e_k^perp, f_n> is computed directly and as
    k <e_k^perp, Gamma f_n>; the two must agree.
    """
    if k < 1 or k > frames.e_perp.shape[1]:
        raise ScheduleExceeded(f"k={k} outside 1..{frames.e_perp.shape[1]}")
    F = frames.f
    ep = frames.e_perp[:, k - 1]
    S, G = split.S[r - 1], split.Gamma[r - 1]
    direct = F.conj().T @ (S.conj().T @ ep)
    via_gamma = k * (F.conj().T @ (G.conj().T @ ep))
    gap = float(np.max(np.abs(direct - via_gamma))) if direct.size else 0.0
    if gap > TWO_FORM_TOL:
        raise InconsistentPairing(f"T*h image: direct and Gamma forms differ by {gap:.3e}")
    bounds = () if sup_norms is None else tuple(float(np.abs(direct) @ row) for row in sup_norms)
    return CoefficientVector(direct, pairing.forward, bounds)


@dataclass
class KernelPart:
    name: str
    coefficients: np.ndarray
    fields: dict
    provenance: dict = field(default_factory=dict)


def _fields(coeff, samples, orders):
    out = {}
    for i, j in orders:
        out[(i, j)] = samples[i] @ coeff @ samples[j].conj().T
    return out


def _check_orders(orders, samples):
    top = samples.shape[0] - 1
    for i, j in orders:
        if i + j > top or i < 0 or j < 0:
            raise OrderBudgetExceeded(f"order ({i},{j}) exceeds sampled budget {top}")


def assemble_P(r: int, pairing: UnitaryPairing, split: SplitOperators, frames: FrameSet,
               samples, orders, mother: MotherWavelet, geometric_target: float,
               terms: int | None = None) -> KernelPart:
    """P(s,t) = sum_k h_{n(k)}(s) conj((T^* h_{n(k)})(t)).

    ``terms`` truncates the series to its first terms (default: all).
    Provenance carries, for every (i, j), the dominating partial sum
    sum_k H_{n(k),i} |(T^* h_{n(k)})^(j)|_C, the constants C_j with
    |(T^* h_{n(k)})^(j)|_C <= C_j k, and the geometric remainder past the
    last term.
    """
    _check_orders(orders, samples)
    top = samples.shape[0] - 1
    sup = basis_sup_norms(mother, pairing, top)
    K_perp = frames.e_perp.shape[1]
    terms = K_perp if terms is None else min(terms, K_perp)
    N = pairing.N
    coeff = np.zeros((N, N), dtype=complex)
    C_j = np.zeros(top + 1)
    dom = {o: 0.0 for o in orders}
    for k in range(1, terms + 1):
        img = conjugated_h_image(k, r, pairing, split, frames, sup)
        row = pairing.position_of(("p", k))
        coeff[row] += img.coefficients.conj()
        C_j = np.maximum(C_j, np.array(img.sup_bounds) / k)
        for i, j in orders:
            dom[(i, j)] += sup[i, row] * img.sup_bounds[j]
    t = geometric_target
    remainder = {f"{i},{j}": float(order_bound(mother, i) * C_j[j] * t ** (terms + 1) / (1 - t))
                 for i, j in orders}
    prov = {"terms": terms, "C_j": C_j.tolist(),
            "dominating_sum": {f"{i},{j}": float(v) for (i, j), v in dom.items()},
            "series_remainder": remainder}
    return KernelPart("P", coeff, _fields(coeff, samples, orders), prov)


def expansion_vectors(quarter: QuarterPowerA, frames: FrameSet):
    """Coefficient columns of U A p_n and U A^* q_n in the f-frame."""
    sd = quarter.source
    F = frames.f
    a = F.conj().T @ (quarter.matrix @ sd.right)
    b = F.conj().T @ (quarter.H @ sd.left)
    return a, b


def assemble_F(r: int, pairing: UnitaryPairing, quarter: QuarterPowerA, frames: FrameSet,
               samples, orders, mother: MotherWavelet, terms: int | None = None) -> KernelPart:
    """F(s,t) = sum_n s_n^{1/2} (U A^* q_n)(s) conj((U A p_n)(t))."""
    _check_orders(orders, samples)
    sd = quarter.source
    top = samples.shape[0] - 1
    a, b = expansion_vectors(quarter, frames)
    expected = sd.singulars ** 0.25
    for name, vecs in (("A p_n", a), ("A^* q_n", b)):
        gap = np.max(np.abs(np.linalg.norm(vecs, axis=0) - expected)) if sd.rank else 0.0
        if gap > 1e-10:
            raise InconsistentPairing(f"|U {name}| differs from s_n^(1/4) by {gap:.3e}")
    rank = sd.rank if terms is None else min(terms, sd.rank)
    w = np.sqrt(sd.singulars[:rank])
    coeff = (b[:, :rank] * w) @ a[:, :rank].conj().T
    sup = basis_sup_norms(mother, pairing, top)
    a_sup = np.abs(a[:, :rank]).T @ sup.T if rank else np.zeros((0, top + 1))
    b_sup = np.abs(b[:, :rank]).T @ sup.T if rank else np.zeros((0, top + 1))
    nuc = nuclearity_report(sd)
    prov = {"terms": rank, "nuclearity": nuc,
            "uniform_bounds": {"UAp": a_sup.max(axis=0).tolist() if rank else [],
                               "UA*q": b_sup.max(axis=0).tolist() if rank else []},
            "dominating_sum": {f"{i},{j}": float(np.sum(w * b_sup[:, i] * a_sup[:, j]))
                               for i, j in orders}}
    return KernelPart("F", coeff, _fields(coeff, samples, orders), prov)


@dataclass
class KernelField:
    """Samples of K and of its partial derivatives on a grid."""

    grid: KernelGrid
    fields: dict
    parts: dict
    coefficients: np.ndarray
    provenance: dict = field(default_factory=dict)

    @property
    def values(self):
        return self.fields[(0, 0)]

    @property
    def orders(self):
        return sorted(self.fields)

    def scaled(self, factor) -> "KernelField":
        """Kernel of factor * T (the B_r kernel for factor = r)."""
        parts = {name: replace(p, coefficients=factor * p.coefficients,
                               fields={o: factor * v for o, v in p.fields.items()})
                 for name, p in self.parts.items()}
        return KernelField(self.grid, {o: factor * v for o, v in self.fields.items()}, parts,
                           factor * self.coefficients, dict(self.provenance, scale=factor))


def assemble_K(P: KernelPart, F: KernelPart, grid: KernelGrid, provenance=None) -> KernelField:
    if set(P.fields) != set(F.fields):
        raise GridMismatch("P and F carry different derivative orders")
    fields = {}
    for o in P.fields:
        if P.fields[o].shape != F.fields[o].shape:
            raise GridMismatch(f"field {o}: shapes {P.fields[o].shape} vs {F.fields[o].shape}")
        fields[o] = P.fields[o] + F.fields[o]
    prov = {"P": P.provenance, "F": F.provenance}
    prov.update(provenance or {})
    return KernelField(grid, fields, {"P": P, "F": F}, P.coefficients + F.coefficients, prov)


def carleman_norms(kernel: KernelField, samples, order: int = 0):
    """s -> |d^i/ds^i K(s, .)|_{L2} by Parseval over the orthonormal u_n."""
    return np.linalg.norm(samples[order] @ kernel.coefficients, axis=1)


def carleman_norm(s, kernel: KernelField, mother: MotherWavelet, pairing: UnitaryPairing,
                  order: int = 0):
    """|K^(order, .)(s, .)|_{L2} at arbitrary points s."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    phi = sample_basis(mother, pairing, s_arr, order)[order]
    out = np.linalg.norm(phi @ kernel.coefficients, axis=1)
    return float(out[0]) if np.ndim(s) == 0 else out
