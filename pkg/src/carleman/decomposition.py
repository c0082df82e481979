"""Frames {e_k}, {e_k^perp}, {f_n}, the splitting S_r = Q_r + J_r^*, the
weighted projector Lambda, Gamma_r = Lambda S_r and the functional d(h)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NotUnitVector, RankDeficiency, ReconstructionFailure, ScheduleExhausted
from .operators import ESelection, OperatorFamily, WitnessSequence
from .scheduler import BasisPartition
from .wavelet import MotherWavelet, child_sup_norm

SPLIT_TOL = 1e-12
DROP_TOL = 1e-8


@dataclass(frozen=True)
class FrameSet:
    """Orthonormal frames as matrix columns plus the bookkeeping of {f_n}.

    Labels are ``("e", k)`` or ``("p", k)`` with 1-based k.  ``x`` lists the
    e-positions chosen as x_1, x_2, ...; ``x_perp`` lists labels of
    x_1^perp, x_2^perp, ... and ``x_perp_slots`` the h position each one
    occupies.
    """

    e: np.ndarray
    e_perp: np.ndarray
    f_labels: tuple
    x: tuple = ()
    x_perp: tuple = ()
    x_perp_slots: tuple = ()

    @property
    def N(self):
        return self.e.shape[0]

    @property
    def K_e(self):
        return self.e.shape[1]

    def vector(self, label):
        kind, k = label
        return (self.e if kind == "e" else self.e_perp)[:, k - 1]

    @property
    def f(self) -> np.ndarray:
        """Matrix whose n-th column is f_n."""
        return np.column_stack([self.vector(lab) for lab in self.f_labels])

    def position(self, label) -> int:
        return self.f_labels.index(label)

    def to_dict(self):
        return {"K_e": self.K_e, "N": self.N,
                "f_order": [f"{kind}{k}" for kind, k in self.f_labels],
                "x": [f"e{k}" for k in self.x],
                "x_perp": [f"{kind}{k}" for kind, k in self.x_perp],
                "x_perp_slots": list(self.x_perp_slots)}


def gram_schmidt_complete(basis, N, drop_tol=DROP_TOL):
    """Extend orthonormal columns ``basis`` by canonical vectors (modified
    Gram-Schmidt with one re-orthogonalisation pass)."""
    found = []
    current = basis.copy()
    for m in range(N):
        v = np.zeros(N, dtype=complex)
        v[m] = 1.0
        for _ in range(2):
            for q in current.T:
                v = v - (q.conj() @ v) * q
        nrm = np.linalg.norm(v)
        if nrm < drop_tol:
            continue
        v = v / nrm
        found.append(v)
        current = np.column_stack([current, v])
        if current.shape[1] == N:
            break
    return np.array(found, dtype=complex).T.reshape(N, len(found))


def complete_frame(sel: ESelection, N: int | None = None,
                   witness: WitnessSequence | None = None) -> FrameSet:
    """e-frame from the selection, e^perp by Gram-Schmidt, f interleaved."""
    if witness is None:
        if N is None:
            raise ValueError("need N or a witness sequence")
        witness = WitnessSequence.canonical(N)
    N = witness.vectors.shape[0]
    K_e = sel.K_e
    if K_e >= N:
        raise RankDeficiency(f"K_e={K_e} leaves no room for a complement in dimension {N}")
    e = witness.vectors[:, list(sel.indices)]
    perp = gram_schmidt_complete(e, N)
    if perp.shape[1] < N - K_e:
        raise RankDeficiency(f"completion produced {perp.shape[1]} of {N - K_e} vectors")
    labels = []
    for k in range(1, max(K_e, perp.shape[1]) + 1):
        if k <= K_e:
            labels.append(("e", k))
        if k <= perp.shape[1]:
            labels.append(("p", k))
    return FrameSet(e, perp, tuple(labels))


def projector(cols):
    return cols @ cols.conj().T


def lambda_operator(frames: FrameSet):
    """Lambda = sum_k (1/k) <., e_k^perp> e_k^perp."""
    weights = 1.0 / np.arange(1, frames.e_perp.shape[1] + 1)
    return (frames.e_perp * weights) @ frames.e_perp.conj().T


def split_operator(S, frames: FrameSet):
    """Q = (1 - E) S and J = S^* E; both forms of Q are checked."""
    E = projector(frames.e)
    I = np.eye(frames.N)
    Q = (I - E) @ S
    J = S.conj().T @ E
    err = np.max(np.abs(S - (Q + J.conj().T))) if S.size else 0.0
    if err > SPLIT_TOL:
        raise ReconstructionFailure(f"|S - (Q + J^*)|_max = {err:.3e}")
    # sum_k <., S^* e_k^perp> e_k^perp
    Q_rank = frames.e_perp @ (S.conj().T @ frames.e_perp).conj().T
    err_rank = np.max(np.abs(Q - Q_rank)) if S.size else 0.0
    if err_rank > SPLIT_TOL:
        raise ReconstructionFailure(f"rank form of Q differs by {err_rank:.3e}")
    return Q, J


def gamma_operator(S, frames: FrameSet, lam=None):
    lam = lambda_operator(frames) if lam is None else lam
    return lam @ S


@dataclass(frozen=True)
class SplitOperators:
    """Per-r Q_r, J_r, Gamma_r (canonical coordinates) and S_r itself."""

    S: tuple
    Q: tuple
    J: tuple
    Gamma: tuple
    Lam: np.ndarray
    reconstruction_error: tuple

    @property
    def R(self):
        return len(self.S)

    def in_f_frame(self, M, frames: FrameSet):
        F = frames.f
        return F.conj().T @ M @ F


def split_family(fam: OperatorFamily, frames: FrameSet) -> SplitOperators:
    lam = lambda_operator(frames)
    S_all, Q_all, J_all, G_all, errs = [], [], [], [], []
    for r in range(1, fam.R + 1):
        S = fam.S(r)
        Q, J = split_operator(S, frames)
        S_all.append(S)
        Q_all.append(Q)
        J_all.append(J)
        G_all.append(gamma_operator(S, frames, lam))
        errs.append(float(np.max(np.abs(S - (Q + J.conj().T)))))
    return SplitOperators(tuple(S_all), tuple(Q_all), tuple(J_all), tuple(G_all), lam,
                          tuple(errs))


@dataclass(frozen=True)
class DValue:
    total: float
    j_term: float
    jstar_term: float
    gamma_term: float


def d_functional(h, split: SplitOperators) -> DValue:
    """d(h) = max_r |J_r h|^{1/4} + max_r |J_r^* h|^{1/4} + max_r |Gamma_r h|."""
    h = np.asarray(h, dtype=complex)
    if abs(np.linalg.norm(h) - 1.0) > 1e-10:
        raise NotUnitVector(f"|h| = {np.linalg.norm(h):.12g}")
    j_term = max(np.linalg.norm(J @ h) for J in split.J) ** 0.25
    js_term = max(np.linalg.norm(J.conj().T @ h) for J in split.J) ** 0.25
    g_term = max(np.linalg.norm(G @ h) for G in split.Gamma)
    return DValue(float(j_term + js_term + g_term), float(j_term), float(js_term), float(g_term))


@dataclass(frozen=True)
class DLedger:
    """d(e_k) for every selected e_k, with the three-term breakdown."""

    values: tuple

    @property
    def totals(self):
        return np.array([v.total for v in self.values])

    def to_dict(self):
        return [{"k": k, "d": v.total, "J": v.j_term, "J*": v.jstar_term, "Gamma": v.gamma_term}
                for k, v in enumerate(self.values, 1)]


def d_ledger(frames: FrameSet, split: SplitOperators) -> DLedger:
    return DLedger(tuple(d_functional(frames.e[:, k], split) for k in range(frames.K_e)))


@dataclass(frozen=True)
class XSelection:
    positions: tuple
    thresholds: tuple
    weighted: tuple
    certificates: dict
    skipped: tuple = field(default=())


def select_x_sequence(ledger: DLedger, part: BasisPartition, mother: MotherWavelet,
                      i_max: int, target: float = 0.5, scale="auto") -> XSelection:
    """Greedy subsequence x_k of e with d(x_k) (max_i G_{k,i} + 1) <= c t^k.

    With ``scale="auto"`` the constant c is fixed so that e_1 always
    qualifies as x_1; a numeric ``scale`` is used as given.  Selection
    stops at the first k for which no later e qualifies.
    """
    d = ledger.totals
    G = lambda k: max(child_sup_norm(mother, part.g_pair(k), i) for i in range(i_max + 1))
    if d.size == 0:
        raise ScheduleExhausted("no e vectors to choose from")
    if scale == "auto":
        scale = d[0] * (G(1) + 1.0) / target
    scale = float(scale)
    chosen, thresholds, weighted, last = [], [], [], -1
    while True:
        k = len(chosen) + 1
        ceiling = scale * target ** k
        gk = G(k)
        hit = None
        for m in range(last + 1, d.size):
            if d[m] * (gk + 1.0) <= ceiling * (1 + 1e-12):
                hit = m
                break
        if hit is None:
            break
        chosen.append(hit)
        thresholds.append(ceiling)
        weighted.append(float(d[hit] * (gk + 1.0)))
        last = hit
    if not chosen:
        raise ScheduleExhausted(
            f"x_1 needs d(e_m) (max_i G_1,i + 1) <= {scale * target:.4g}; smallest value "
            f"is {float(d.min() * (G(1) + 1.0)):.4g}")
    certificates = {}
    for i in range(i_max + 1):
        total = sum(d[m] * (child_sup_norm(mother, part.g_pair(k), i) + 1.0)
                    for k, m in enumerate(chosen, 1))
        ceiling = scale * target / (1.0 - target)
        certificates[i] = {"sum": float(total), "ceiling": ceiling,
                           "ok": bool(total <= ceiling * (1 + 1e-12))}
    skipped = tuple(m for m in range(d.size) if m not in chosen)
    return XSelection(tuple(m + 1 for m in chosen), tuple(thresholds), tuple(weighted),
                      certificates, skipped=tuple(m + 1 for m in skipped))


def attach_x(frames: FrameSet, xsel: XSelection, part: BasisPartition) -> FrameSet:
    """Order {x_k^perp} = {e_k^perp} u ({e_k} minus {x_k}) by h position.

    e_k^perp sits at position n(k); the left-over e vectors take the free
    positions in increasing order.
    """
    n_perp = frames.e_perp.shape[1]
    if len(part.n_of_k) < n_perp:
        raise ScheduleExhausted(
            f"n(k) is scheduled for {len(part.n_of_k)} terms but {n_perp} are needed")
    slots = {part.n_of_k[k - 1]: ("p", k) for k in range(1, n_perp + 1)}
    rest = [("e", k) for k in range(1, frames.K_e + 1) if k not in xsel.positions]
    pos = 1
    for label in rest:
        while pos in slots:
            pos += 1
        slots[pos] = label
        pos += 1
    ordered = sorted(slots)
    return replace(frames, x=tuple(xsel.positions), x_perp=tuple(slots[p] for p in ordered),
                   x_perp_slots=tuple(ordered))


def basel_product(R: int, K: int) -> float:
    """sum_{r<=R} 1/r^2 * sum_{k<=K} 1/k^2."""
    return float(np.sum(1.0 / np.arange(1, R + 1) ** 2) * np.sum(1.0 / np.arange(1, K + 1) ** 2))


def _link(name, lhs, relation, rhs):
    if relation == "<=":
        holds = lhs <= rhs * (1 + 1e-12) + 1e-15
    else:
        holds = abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs), abs(rhs))
    return {"link": name, "lhs": float(lhs), "relation": relation, "rhs": float(rhs),
            "holds": bool(holds)}


def hs_summability_report(split: SplitOperators, frames: FrameSet, sel: ESelection):
    """Evaluate every link of the Hilbert-Schmidt chains for J_r and Gamma_r."""
    E, P = frames.e, frames.e_perp
    R = split.R
    r_w = 1.0 / np.arange(1, R + 1) ** 2
    fro2 = lambda M: float(np.sum(np.abs(M) ** 2))
    colnorm2 = lambda M: np.sum(np.abs(M) ** 2, axis=0)

    Jstar_e = np.stack([colnorm2(J.conj().T @ E) for J in split.J])       # (R, K_e)
    J_e = np.stack([colnorm2(J @ E) for J in split.J])
    Sstar_e = np.stack([colnorm2(S.conj().T @ E) for S in split.S])
    rS_sup = np.max(np.stack([(r + 1) ** 2 * Sstar_e[r] for r in range(R)]), axis=0)
    m_partial = sel.chain["sum_B"]
    j_chain = [
        _link("sum_k max_r |J_r^* e_k|^2 <= sum_r sum_k |J_r^* e_k|^2",
              Jstar_e.max(axis=0).sum(), "<=", Jstar_e.sum()),
        _link("sum_r sum_k |J_r^* e_k|^2 <= sum_r |J_r^*|_2^2",
              Jstar_e.sum(), "<=", sum(fro2(J.conj().T) for J in split.J)),
        _link("sum_r |J_r^*|_2^2 = sum_r |J_r|_2^2",
              sum(fro2(J.conj().T) for J in split.J), "=", sum(fro2(J) for J in split.J)),
        _link("sum_r |J_r|_2^2 = sum_r sum_k |J_r e_k|^2",
              sum(fro2(J) for J in split.J), "=", J_e.sum()),
        _link("sum_r sum_k |J_r e_k|^2 = sum_r sum_k |S_r^* e_k|^2",
              J_e.sum(), "=", Sstar_e.sum()),
        _link("sum_r sum_k |S_r^* e_k|^2 <= sum_r r^-2 sum_k max_r |r S_r^* e_k|^2",
              Sstar_e.sum(), "<=", r_w.sum() * rS_sup.sum()),
        _link("sum_r r^-2 sum_k max_r |r S_r^* e_k|^2 <= M_partial^8 sum_{r<=R} r^-2",
              r_w.sum() * rS_sup.sum(), "<=", m_partial ** 8 * r_w.sum()),
        _link("M_partial^8 sum_{r<=R} r^-2 <= M^8 pi^2/6",
              m_partial ** 8 * r_w.sum(), "<=", sel.M ** 8 * math.pi ** 2 / 6),
    ]

    F = frames.f
    lam = split.Lam
    K_perp = P.shape[1]
    G_e = np.stack([colnorm2(G @ E) for G in split.Gamma])
    hs_G = sum(fro2(G) for G in split.Gamma)
    hs_Gs = sum(fro2(G.conj().T) for G in split.Gamma)
    via_f = sum(fro2(S.conj().T @ lam @ F) for S in split.S)
    lam_perp = float(np.sum(colnorm2(lam @ P)))
    g_chain = [
        _link("sum_k max_r |Gamma_r e_k|^2 <= sum_r sum_k |Gamma_r e_k|^2",
              G_e.max(axis=0).sum(), "<=", G_e.sum()),
        _link("sum_r sum_k |Gamma_r e_k|^2 <= sum_r |Gamma_r|_2^2", G_e.sum(), "<=", hs_G),
        _link("sum_r |Gamma_r|_2^2 = sum_r |Gamma_r^*|_2^2", hs_G, "=", hs_Gs),
        _link("sum_r |Gamma_r^*|_2^2 = sum_r sum_n |S_r^* Lambda f_n|^2", hs_Gs, "=", via_f),
        _link("sum_r sum_n |S_r^* Lambda f_n|^2 <= sum_r r^-2 sum_k |Lambda e_k^perp|^2",
              via_f, "<=", r_w.sum() * lam_perp),
        _link("sum_r r^-2 sum_k |Lambda e_k^perp|^2 = sum_{r<=R} r^-2 sum_{k<=K} k^-2",
              r_w.sum() * lam_perp, "=", basel_product(R, K_perp)),
        _link("sum_{r<=R} r^-2 sum_{k<=K} k^-2 <= pi^4/36",
              basel_product(R, K_perp), "<=", math.pi ** 4 / 36),
    ]
    return {"J_chain": j_chain, "Gamma_chain": g_chain,
            "all_hold": all(l["holds"] for l in j_chain + g_chain)}
