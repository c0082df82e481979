"""Numerical checks of the constructed kernels and of the structural
certificates behind them."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import maximum_filter1d

from .decomposition import basel_product
from .kernels import KernelField, KernelGrid, UnitaryPairing, sample_basis
from .wavelet import MassTable

FD_WEIGHTS = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
BASEL_RANGE = (2.60, 2.706)


@dataclass
class Check:
    """One verification entry; ``status`` is "pass", "fail" or "skip"."""

    name: str
    status: str
    value: float
    threshold: float
    claim: str
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status != "fail"

    @property
    def message(self) -> str:
        return (f"{self.name}: {self.status} (measured {self.value:.6g}, tolerance "
                f"{self.threshold:.3g}; claim: {self.claim})")

    def to_dict(self):
        return {"name": self.name, "status": self.status, "value": float(self.value),
                "threshold": float(self.threshold), "claim": self.claim, "detail": self.detail}


def _status(ok: bool) -> str:
    return "pass" if ok else "fail"


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)

    def add(self, check: Check):
        self.checks.append(check)
        return check

    @property
    def verdict(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self):
        return [c for c in self.checks if not c.passed]

    def to_dict(self):
        ordered = sorted(self.checks, key=lambda c: c.name)
        return {"verdict": "pass" if self.verdict else "fail",
                "checks": [c.to_dict() for c in ordered]}


def _relative_l2(a, b, w=None):
    """|a - b| / |b| with 0/0 = 0 (weights ``w`` on the first axis)."""
    w = np.ones(len(b)) if w is None else w
    num = np.sqrt(np.sum(w * np.abs(a - b) ** 2))
    den = np.sqrt(np.sum(w * np.abs(b) ** 2))
    if den == 0.0:
        return 0.0 if num == 0.0 else float("inf")
    return float(num / den)


def _tag(name, r):
    return name if r is None else f"{name}[r={r}]"


def localized_positions(pairs, grid: KernelGrid, table: MassTable, max_outside=1e-3):
    """f-positions whose image keeps all but ``max_outside`` of its mass on the grid."""
    return [p for p, pair in enumerate(pairs)
            if table.outside(pair, -grid.extent, grid.extent) <= max_outside]


def representation_check(kernel: KernelField, direct_coefficients, samples, positions,
                         count: int = 8, seed: int = 0, tol: float = 1e-2, r=None) -> Check:
    """Compare int K(s,t) f(t) dt (trapezoid on the grid) with (T f)(s).

    Test functions are seeded random combinations of the basis functions at
    ``positions`` (those living on the grid); the exact image is read off the
    coefficient matrix of T.  Without admissible positions the check is
    skipped.
    """
    name = _tag("representation", r)
    claim = "(T f)(s) equals the integral of K(s,t) f(t) dt"
    if not positions:
        return Check(name, "skip", 0.0, tol, claim,
                     {"reason": "no basis function is supported inside the grid"})
    w = kernel.grid.weights
    phi = samples[0]
    rng = np.random.default_rng(seed)
    N = direct_coefficients.shape[0]
    values = []
    for _ in range(count):
        a = np.zeros(N, dtype=complex)
        a[positions] = rng.standard_normal(len(positions)) + 1j * rng.standard_normal(len(positions))
        f = phi @ a
        exact = phi @ (direct_coefficients @ a)
        quad = kernel.values @ (w * f)
        values.append(_relative_l2(quad, exact, w))
    worst = max(values)
    return Check(name, _status(worst <= tol), worst, tol, claim,
                 {"functions": count, "discrepancies": values,
                  "basis_positions": list(positions)})


def _central_diff(field_, step, axis):
    """Five-point first derivative; drops two nodes on each side of ``axis``."""
    n = field_.shape[axis]
    out = 0.0
    for w, shift in zip(FD_WEIGHTS, range(-2, 3)):
        if w:
            out = out + w * np.take(field_, range(2 + shift, n - 2 + shift), axis=axis)
    return out / step


def _interior(field_, axis):
    n = field_.shape[axis]
    return np.take(field_, range(2, n - 2), axis=axis)


def smoothness_check(kernel: KernelField, tol: float = 1e-3, jump_factor: float = 10.0,
                     r=None) -> Check:
    """Finite differences of each field against the next-order field.

    Also bounds every neighbour jump by jump_factor * step * (local max of
    the next derivative); the worst offending sample is reported.  Fields of
    top order have no successor and are only required to be finite.
    """
    h = kernel.grid.step
    pts = kernel.grid.points
    fields = kernel.fields
    rel, worst, located = {}, 0.0, None
    finite = all(np.all(np.isfinite(F)) for F in fields.values())
    for (i, j), F in sorted(fields.items()):
        for axis, nxt in ((0, (i + 1, j)), (1, (i, j + 1))):
            if nxt not in fields:
                continue
            D = fields[nxt]
            fd = _central_diff(F, h, axis)
            ref = _interior(D, axis)
            scale = float(np.max(np.abs(ref)))
            err = 0.0 if scale == 0 else float(np.max(np.abs(fd - ref)) / scale)
            rel[f"{i},{j}->{nxt[0]},{nxt[1]}"] = err
            if err > worst:
                worst = err
            jump = np.abs(np.diff(F, axis=axis))
            local = maximum_filter1d(np.abs(D), size=5, axis=axis, mode="nearest")
            n = F.shape[axis]
            local = np.maximum(np.take(local, range(0, n - 1), axis=axis),
                               np.take(local, range(1, n), axis=axis))
            floor = 1e-12 * max(1.0, float(np.abs(D).max()))
            excess = jump - (jump_factor * h * local + floor)
            idx = np.unravel_index(int(np.argmax(excess)), excess.shape)
            if excess[idx] > 0 and (located is None or excess[idx] > located["excess"]):
                a, b = idx
                located = {"field": f"{i},{j}", "axis": "s" if axis == 0 else "t",
                           "s": float(pts[a]), "t": float(pts[b]), "excess": float(excess[idx])}
    ok = finite and worst <= tol and located is None
    detail = {"relative_errors": rel, "finite": bool(finite)}
    if located is not None:
        detail["jump"] = located
    return Check(_tag("smoothness", r), _status(ok), worst, tol,
                 "K has continuous partial derivatives up to the order budget", detail)


def _ring_mask(points, extent, width):
    big = np.maximum.outer(np.abs(points), np.abs(points))
    return big >= extent - width - 1e-12


def ring_statistics(values, grid: KernelGrid, extent=None):
    """(ring max, interior max, ring width) of |values| on [-extent, extent]^d.

    ``values`` may be a 2-d field or a 1-d profile along s.
    """
    extent = grid.extent if extent is None else extent
    sl = grid.sub_slice(extent)
    pts = grid.points[sl]
    width = max(2 * grid.step, 0.05 * extent)
    if np.ndim(values) == 1:
        sub = np.abs(values[sl])
        ring = np.abs(pts) >= extent - width - 1e-12
    else:
        sub = np.abs(values[sl, sl])
        ring = _ring_mask(pts, extent, width)
    return float(sub[ring].max()), float(sub[~ring].max()), width


def vanishing_check(kernel: KernelField, carleman=None, margin_fraction: float = 0.1,
                    nested=(6.0, 8.0, 12.0), r=None) -> Check:
    """Ring-to-interior ratios of every field and of the Carleman norms
    (``carleman`` maps order -> profile on the grid), plus strictly
    decreasing ring maxima of |K| over nested sub-grids."""
    name = _tag("vanishing", r)
    claim = "K, its derivatives and the Carleman function vanish at infinity"
    if not np.any(kernel.values):
        return Check(name, "skip", 0.0, margin_fraction, claim,
                     {"reason": "interior maximum is zero"})
    ratios = {}
    profiles = {f"field {i},{j}": F for (i, j), F in sorted(kernel.fields.items())}
    for order, prof in sorted((carleman or {}).items()):
        profiles[f"carleman {order}"] = prof
    for label, F in profiles.items():
        ring_max, inner_max, _ = ring_statistics(F, kernel.grid)
        ratios[label] = 0.0 if ring_max == 0 else (
            float("inf") if inner_max == 0 else ring_max / inner_max)
    worst = max(ratios.values())
    extents = [e for e in nested if e <= kernel.grid.extent + 1e-12]
    ring_maxima = [ring_statistics(kernel.values, kernel.grid, e)[0] for e in extents]
    monotone = all(b < a for a, b in zip(ring_maxima, ring_maxima[1:]))
    detail = {"ratios": ratios, "nested_extents": extents, "ring_maxima": ring_maxima,
              "nested_monotone": bool(monotone)}
    if margin_fraction >= 1.0:
        detail["warning"] = "margin_fraction >= 1 makes the ratio test vacuous"
    return Check(name, _status(worst <= margin_fraction and monotone), worst, margin_fraction,
                 claim, detail)


def d_decay_check(d_totals, tol: float = 0.1) -> Check:
    """d(e_k) strictly decreasing after the first term, final/initial < tol."""
    claim = "d(e_k) tends to zero along the selected sequence"
    d = np.asarray(d_totals, dtype=float)
    if d.size == 0 or not np.any(d):
        return Check("d_decay", "skip", 0.0, tol, claim, {"reason": "all d(e_k) vanish"})
    ratio = float(d[-1] / d[0])
    decreasing = bool(np.all(np.diff(d[1:]) < 0))
    return Check("d_decay", _status(ratio < tol and decreasing), ratio, tol, claim,
                 {"d": d.tolist(), "strictly_decreasing": decreasing})


def gram_check(gram, tol: float = 1e-6) -> Check:
    n = gram.shape[0]
    off = np.abs(gram - np.diag(np.diag(gram)))
    diag = float(np.max(np.abs(np.diag(gram) - 1.0)))
    worst = max(float(off.max()) if n > 1 else 0.0, diag)
    return Check("gram", _status(worst <= tol), worst, tol,
                 "the dyadic children form an orthonormal system",
                 {"children": n, "max_offdiagonal": float(off.max()), "max_diag_deviation": diag})


def hs_chain_check(report) -> Check:
    failing = [l["link"] for l in report["J_chain"] + report["Gamma_chain"] if not l["holds"]]
    return Check("hs_chains", _status(not failing), float(len(failing)), 0.0,
                 "J and Gamma are Hilbert-Schmidt with the stated bounds",
                 {"failing_links": failing})


def basel_check(R: int = 200, K: int = 200) -> Check:
    value = basel_product(R, K)
    seq = [basel_product(n, n) for n in range(1, max(R, K) + 1)]
    monotone = all(b > a for a, b in zip(seq, seq[1:]))
    lo, hi = BASEL_RANGE
    ok = lo <= value <= hi and monotone and value < np.pi ** 4 / 36
    return Check("basel_product", _status(ok), value, hi,
                 "the truncated product of Basel sums increases toward pi^4/36",
                 {"R": R, "K": K, "range": [lo, hi], "monotone": bool(monotone),
                  "limit": np.pi ** 4 / 36})


def splitting_check(split, tol: float = 1e-12) -> Check:
    worst = float(max(split.reconstruction_error)) if split.reconstruction_error else 0.0
    return Check("splitting", _status(worst <= tol), worst, tol, "S_r = Q_r + J_r^*",
                 {"per_r": list(split.reconstruction_error)})


def schwarz_check(reports, tol: float = 1e-9) -> Check:
    viol = sum(r["violations"] for r in reports)
    slack = min(r["min_slack"] for r in reports) if reports else 0.0
    return Check("schwarz", _status(viol == 0 and slack >= -tol), slack, -tol,
                 "|A f| <= |J f|^(1/4) and |A^* f| <= |J^* f|^(1/4)",
                 {"samples": sum(r["samples"] for r in reports), "violations": viol})


def quarter_power_check(pairs, tol: float = 1e-9) -> Check:
    """``pairs`` holds (A matrix, all singular values of J) per r."""
    worst = 0.0
    for A, s in pairs:
        sa = np.linalg.svd(A, compute_uv=False)
        full = np.zeros(sa.size)
        full[:len(s)] = s
        worst = max(worst, float(np.max(np.abs(sa ** 4 - full))) if sa.size else 0.0)
    return Check("quarter_power", _status(worst <= tol), worst, tol,
                 "A has singular values s_n^(1/4)", {})


def assembly_check(kernels, direct, tol: float = 1e-12) -> Check:
    """P + F coefficient matrix against <S f_m, f_n>, per r."""
    gaps = [float(np.max(np.abs(k.coefficients - c))) if c.size else 0.0
            for k, c in zip(kernels, direct)]
    worst = max(gaps) if gaps else 0.0
    return Check("assembly", _status(worst <= tol), worst, tol,
                 "P + F reproduces the kernel of T", {"per_r": gaps})


def scalar_recovery_check(s_kernels, b_kernels) -> Check:
    """B_r field equal to r times the S_r field, bit for bit."""
    bad = []
    for r, (ks, kb) in enumerate(zip(s_kernels, b_kernels), 1):
        for o in ks.fields:
            if not np.array_equal(kb.fields[o], r * ks.fields[o]):
                bad.append(f"r={r} field {o[0]},{o[1]}")
    return Check("scalar_recovery", _status(not bad), float(len(bad)), 0.0,
                 "B_r = r S_r on the kernel level", {"mismatches": bad})


def b_assembly_check(b_kernels, b_direct, tol: float = 1e-12) -> Check:
    """B_r field against the field assembled straight from B_r's coefficients."""
    gaps = []
    for k, ref in zip(b_kernels, b_direct):
        scale = max(1.0, float(np.max(np.abs(ref))))
        gaps.append(float(np.max(np.abs(k.values - ref))) / scale)
    worst = max(gaps) if gaps else 0.0
    return Check("b_assembly", _status(worst <= tol), worst, tol,
                 "the B_r kernel assembled directly agrees with r times the S_r kernel",
                 {"per_r": gaps})


@dataclass
class QuadratureWindow:
    """Basis samples on a wide t-window, shared by the Carleman cross-checks.

    Columns whose basis function lives on [-window, window] are
    ``resolved``; the h functions, spread over widths of 2^20 and more,
    carry no mass there.  Columns in between are listed as ``unclear``.
    """

    resolved: np.ndarray
    unclear: np.ndarray
    samples: np.ndarray
    weights: np.ndarray
    window: float

    @classmethod
    def build(cls, mother, pairing: UnitaryPairing, table: MassTable, window: float = 300.0,
              step: float = 0.02):
        outside = np.array([table.outside(p, -window, window) for p in pairing.pairs])
        resolved = np.flatnonzero(outside <= 1e-9)
        unclear = np.flatnonzero((outside > 1e-9) & (outside < 1.0 - 1e-9))
        t = np.linspace(-window, window, int(round(2 * window / step)) + 1)
        w = np.full(t.size, t[1] - t[0])
        w[0] = w[-1] = 0.5 * (t[1] - t[0])
        sub = UnitaryPairing(tuple(pairing.labels[p] for p in resolved),
                             tuple(pairing.forward[p] for p in resolved),
                             tuple(pairing.pairs[p] for p in resolved),
                             tuple(pairing.roles[p] for p in resolved))
        return cls(resolved, unclear, sample_basis(mother, sub, t, 0)[0], w, window)


def carleman_quadrature_check(kernel: KernelField, s_samples, window: QuadratureWindow,
                              points: int = 5, tol: float = 1e-3, r=None) -> Check:
    """Coefficient-space |K(s,.)| against t-quadrature of |K(s,t)|^2.

    The t-integral runs over the window's own grid, independent of the
    stored kernel grid, so every resolved column is seen in full.
    Unresolved columns are left out of both sides and their Parseval share
    is reported.  ``s_samples`` are the order-0 basis samples on the
    kernel grid.
    """
    name = _tag("carleman_quadrature", r)
    claim = "the Carleman function is K(s,.) in L2"
    grid = kernel.grid
    res = window.resolved
    if res.size == 0:
        return Check(name, "skip", 0.0, tol, claim, {"reason": "no column lives on the window"})
    idx = np.linspace(grid.size // 4, 3 * grid.size // 4, points).astype(int)
    rows = s_samples[idx] @ kernel.coefficients
    parseval = np.linalg.norm(rows[:, res], axis=1)
    quad = np.sqrt(np.abs(rows[:, res] @ window.samples.T) ** 2 @ window.weights)
    errs = [0.0 if a == 0 and b == 0 else float(abs(a - b) / max(a, b))
            for a, b in zip(quad, parseval)]
    worst = max(errs)
    ok = worst <= tol and window.unclear.size == 0
    return Check(name, _status(ok), worst, tol, claim,
                 {"s": grid.points[idx].tolist(), "relative_errors": errs,
                  "window": window.window, "resolved_columns": int(res.size),
                  "partially_visible_columns": window.unclear.tolist(),
                  "parseval_full": np.linalg.norm(rows, axis=1).tolist(),
                  "parseval_resolved": parseval.tolist()})
