"""analyze -> construct -> verify, driven by a RunConfig."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import verification as V
from .config import RunConfig
from .decomposition import (DLedger, FrameSet, SplitOperators, XSelection, attach_x,
                            complete_frame, d_ledger, hs_summability_report, select_x_sequence,
                            split_family)
from .errors import InconsistentPairing
from .kernels import (KernelField, KernelGrid, UnitaryPairing, assemble_F, assemble_K,
                      assemble_P, build_pairing, carleman_norms, coefficient_matrix,
                      kernel_orders, sample_basis)
from .operators import (DecayProfile, ESelection, OperatorFamily, decay_profile, load_family,
                        select_e_sequence)
from .scheduler import BasisPartition, Enumeration, partition_gh, summability_ledger
from .schmidt import QuarterPowerA, SchmidtData, quarter_power, schmidt_decompose, schwarz_certify
from .wavelet import MassTable, MotherWavelet, gram_matrix


class Timer:
    """Wall-clock bookkeeping kept apart from the deterministic outputs."""

    def __init__(self):
        self.spans = {}

    def __call__(self, name):
        timer = self

        class _Span:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                timer.spans[name] = timer.spans.get(name, 0.0) + time.perf_counter() - self.t0

        return _Span()


@dataclass
class Analysis:
    config: RunConfig
    family: OperatorFamily
    profile: DecayProfile
    selection: ESelection

    def to_dict(self):
        return {"family": self.family.to_dict(), "decay_profile": self.profile.to_dict(),
                "e_selection": self.selection.to_dict()}


@dataclass
class Structure:
    analysis: Analysis
    mother: MotherWavelet
    frames: FrameSet
    split: SplitOperators
    d: DLedger
    partition: BasisPartition
    x: XSelection
    pairing: UnitaryPairing
    schmidt: list
    quarter: list
    schwarz: list
    hs_report: dict
    summability: dict

    def to_dict(self):
        return {"frames": self.frames.to_dict(), "d_ledger": self.d.to_dict(),
                "partition": self.partition.to_dict(g_listed=len(self.x.positions)),
                "x_selection": {"positions": [f"e{k}" for k in self.x.positions],
                                "thresholds": list(self.x.thresholds),
                                "weighted": list(self.x.weighted),
                                "certificates": {str(i): c for i, c in
                                                 self.x.certificates.items()}},
                "pairing": self.pairing.to_dict(),
                "schmidt": [sd.to_dict() for sd in self.schmidt],
                "schwarz": self.schwarz, "hs_chains": self.hs_report,
                "h_summability": {**self.summability,
                                  "orders": {str(i): v for i, v in
                                             self.summability["orders"].items()}},
                "mother_sup_norms": {str(i): v for i, v in
                                     self.mother.cached_sup_norms.items()}}


@dataclass
class Construction:
    structure: Structure
    grid: KernelGrid
    samples: np.ndarray
    kernels: list
    b_kernels: list
    direct: list
    carleman: list
    timer: Timer = field(default_factory=Timer)

    @property
    def config(self):
        return self.structure.analysis.config


def analyze(cfg: RunConfig) -> Analysis:
    fam = load_family(cfg.family_spec(), cfg.base_dir)
    profile = decay_profile(fam)
    sel = select_e_sequence(profile, cfg.rule_target, cfg.e_cap)
    return Analysis(cfg, fam, profile, sel)


def _partition_for(frames, xsel, cfg, enum):
    K_perp = frames.e_perp.shape[1]
    part = partition_gh(enum, cfg.geometric_target, h_count=1, schedule_length=K_perp)
    attached = attach_x(frames, xsel, part)
    need = max(attached.x_perp_slots, default=0)
    if need > len(part.h_pairs):
        g_before = part.g_indices(len(xsel.positions))
        part = partition_gh(enum, cfg.geometric_target, h_count=need, schedule_length=K_perp)
        if part.g_indices(len(xsel.positions)) != g_before:
            raise InconsistentPairing("extending the h list moved the g sequence")
    return part, attached


def build_structure(an: Analysis, timer: Timer | None = None) -> Structure:
    cfg = an.config
    timer = timer or Timer()
    with timer("wavelet"):
        mother = MotherWavelet(quadrature_nodes=cfg.quadrature_nodes, i_max=cfg.orders)
    with timer("decomposition"):
        frames = complete_frame(an.selection, an.family.N)
        split = split_family(an.family, frames)
        led = d_ledger(frames, split)
        enum = Enumeration(cfg.shell_budget)
        K_perp = frames.e_perp.shape[1]
        part0 = partition_gh(enum, cfg.geometric_target, h_count=1, schedule_length=K_perp)
        xsel = select_x_sequence(led, part0, mother, cfg.orders, cfg.x_target, cfg.x_scale)
        part, frames = _partition_for(frames, xsel, cfg, enum)
        pairing = build_pairing(frames, part)
        hs = hs_summability_report(split, frames, an.selection)
        summ = summability_ledger(mother, part, cfg.orders)
    with timer("schmidt"):
        sds, quarters, schwarz = [], [], []
        for r in range(1, an.family.R + 1):
            sd = schmidt_decompose(split.J[r - 1], cfg.drop_tol)
            A = quarter_power(sd, seed=cfg.seed + r)
            sds.append(sd)
            quarters.append(A)
            schwarz.append(schwarz_certify(A, split.J[r - 1], cfg.schwarz_samples,
                                           seed=cfg.seed + 1000 * r))
    return Structure(an, mother, frames, split, led, part, xsel, pairing, sds, quarters,
                     schwarz, hs, summ)


def construct(cfg: RunConfig, timer: Timer | None = None) -> Construction:
    timer = timer or Timer()
    with timer("analyze"):
        an = analyze(cfg)
    st = build_structure(an, timer)
    grid = KernelGrid(cfg.extent, cfg.step)
    orders = kernel_orders(cfg.orders)
    with timer("samples"):
        samples = sample_basis(st.mother, st.pairing, grid.points, cfg.orders)
    kernels, b_kernels, direct, carleman = [], [], [], []
    with timer("kernels"):
        for r in range(1, an.family.R + 1):
            P = assemble_P(r, st.pairing, st.split, st.frames, samples, orders, st.mother,
                           cfg.geometric_target)
            F = assemble_F(r, st.pairing, st.quarter[r - 1], st.frames, samples, orders,
                           st.mother)
            K = assemble_K(P, F, grid, {"r": r, "orders": [list(o) for o in orders]})
            kernels.append(K)
            b_kernels.append(K.scaled(r))
            direct.append(coefficient_matrix(st.split.S[r - 1], st.frames))
            carleman.append({i: carleman_norms(K, samples, i) for i in range(cfg.orders + 1)})
    return Construction(st, grid, samples, kernels, b_kernels, direct, carleman, timer)


def verify(con: Construction) -> V.VerificationReport:
    cfg = con.config
    st = con.structure
    timer = con.timer
    rep = V.VerificationReport()
    with timer("verify_structural"):
        rep.add(V.d_decay_check(st.d.totals))
        enum = st.partition.enumeration
        rep.add(V.gram_check(gram_matrix(st.mother, [enum.pair(n) for n in
                                                     range(1, cfg.gram_children + 1)])))
        rep.add(V.hs_chain_check(st.hs_report))
        rep.add(V.basel_check())
        rep.add(V.splitting_check(st.split))
        rep.add(V.schwarz_check(st.schwarz))
        rep.add(V.quarter_power_check(
            [(A.matrix, np.linalg.svd(J, compute_uv=False))
             for A, J in zip(st.quarter, st.split.J)]))
        rep.add(V.assembly_check(con.kernels, con.direct))
        rep.add(V.scalar_recovery_check(con.kernels, con.b_kernels))
        phi = con.samples[0]
        b_direct = [phi @ coefficient_matrix(B, st.frames) @ phi.conj().T
                    for B in st.analysis.family.matrices]
        rep.add(V.b_assembly_check(con.b_kernels, b_direct))
        rep.add(summability_check(st))
    with timer("verify_kernels"):
        table = MassTable(st.mother)
        positions = V.localized_positions(st.pairing.pairs, con.grid, table)
        window = V.QuadratureWindow.build(st.mother, st.pairing, table)
        for r, K in enumerate(con.kernels, 1):
            rep.add(V.representation_check(K, con.direct[r - 1], con.samples, positions,
                                           cfg.test_functions, cfg.seed + r,
                                           cfg.representation_tol, r=r))
            rep.add(V.smoothness_check(K, cfg.smoothness_tol, r=r))
            rep.add(V.vanishing_check(K, con.carleman[r - 1], cfg.margin_fraction,
                                      cfg.nested_extents, r=r))
            rep.add(V.carleman_quadrature_check(K, con.samples[0], window, r=r))
    return rep


def summability_check(st: Structure) -> V.Check:
    """Finite certificates for the e-, x- and h-schedules."""
    flags = {"e_chain": st.analysis.selection.chain["holds"],
             "x_certificates": all(c["ok"] for c in st.x.certificates.values()),
             "h_sum_D": st.summability["sum_D_ok"],
             "h_weighted": all(o["ok"] for o in st.summability["orders"].values())}
    bad = [k for k, v in flags.items() if not v]
    return V.Check("schedules", "pass" if not bad else "fail", float(len(bad)), 0.0,
                   "the e, x and h schedules satisfy their summability bounds",
                   {"flags": flags})
