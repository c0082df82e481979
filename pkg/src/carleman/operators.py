"""Truncated operator families {B_r}, their decay profile along a witness
sequence, and selection of the subsequence {e_k}."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (ConditionFails, DimensionMismatch, MalformedConfig, NonSquareMatrix,
                     UnknownPreset)

PRESETS = ("zero", "diagonal-decay", "weighted-shift", "random-compact")
NORM_SLACK = 1e-12


def operator_norm(B) -> float:
    """Spectral norm (largest singular value)."""
    if not np.any(B):
        return 0.0
    return float(np.linalg.norm(B, 2))


@dataclass(frozen=True)
class OperatorFamily:
    """Coordinate matrices of B_1..B_R, shape (R, N, N), rescaled to norm <= 1."""

    matrices: np.ndarray
    raw_norms: tuple
    name: str = "explicit"

    @property
    def R(self) -> int:
        return self.matrices.shape[0]

    @property
    def N(self) -> int:
        return self.matrices.shape[1]

    @property
    def norms(self):
        return tuple(operator_norm(B) for B in self.matrices)

    def S(self, r: int):
        """S_r = B_r / r for 1-based r."""
        return self.matrices[r - 1] / r

    def to_dict(self):
        return {"name": self.name, "R": self.R, "N": self.N,
                "raw_norms": list(self.raw_norms), "norms": list(self.norms)}


def normalize(matrices, name="explicit") -> OperatorFamily:
    """Rescale every B_r with ||B_r|| > 1 to unit norm."""
    mats = np.array(matrices, dtype=complex)
    if mats.ndim != 3:
        raise DimensionMismatch("expected a stack of matrices with shape (R, N, N)")
    if mats.shape[1] != mats.shape[2]:
        raise NonSquareMatrix(f"matrices are {mats.shape[1]}x{mats.shape[2]}")
    if not np.all(np.isfinite(mats)):
        raise MalformedConfig("matrix entries must be finite")
    raw = []
    for r in range(mats.shape[0]):
        nrm = operator_norm(mats[r])
        raw.append(nrm)
        if nrm > 1.0 + NORM_SLACK:
            mats[r] = mats[r] / nrm
    return OperatorFamily(mats, tuple(raw), name)


def preset_family(name: str, N: int, R: int, seed: int = 0) -> OperatorFamily:
    """Built-in test families.

    zero            B_r = 0
    diagonal-decay  B_r = diag(m^{-r}); every B_r has norm 1
    weighted-shift  B_1 e_m = e_{m+1} / (m + 1), B_r = B_1^r
    random-compact  entries xi_{mn} / (m n), xi uniform on the unit disc
    """
    if N < 1 or R < 1:
        raise MalformedConfig("N and R must be positive")
    m = np.arange(1, N + 1, dtype=float)
    if name == "zero":
        mats = np.zeros((R, N, N), dtype=complex)
    elif name == "diagonal-decay":
        mats = np.stack([np.diag(m ** (-float(r))) for r in range(1, R + 1)]).astype(complex)
    elif name == "weighted-shift":
        shift = np.diag(1.0 / (m[:-1] + 1.0), k=-1).astype(complex)
        mats = np.stack([np.linalg.matrix_power(shift, r) for r in range(1, R + 1)])
    elif name == "random-compact":
        rng = np.random.default_rng(seed)
        radius = np.sqrt(rng.uniform(size=(R, N, N)))
        angle = rng.uniform(0.0, 2.0 * np.pi, size=(R, N, N))
        xi = radius * np.exp(1j * angle)
        mats = xi / np.outer(m, m)[None, :, :]
    else:
        raise UnknownPreset(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return normalize(mats, name)


def read_matrix_file(path):
    """Parse the dense complex matrix text format.

    Header ``N R`` (or ``rows cols R``), then R row-major blocks of
    ``re im`` pairs.  Whitespace and line breaks are free-form; ``#`` starts
    a comment.
    """
    text = Path(path).read_text()
    tokens = []
    for line in text.splitlines():
        tokens.extend(line.split("#", 1)[0].split())
    if not tokens:
        raise MalformedConfig(f"{path}: empty matrix file")
    try:
        if len(tokens) >= 3 and _looks_like_3_header(tokens):
            rows, cols, R = (int(t) for t in tokens[:3])
            body = tokens[3:]
        else:
            rows, R = int(tokens[0]), int(tokens[1])
            cols = rows
            body = tokens[2:]
    except ValueError as exc:
        raise MalformedConfig(f"{path}: bad header") from exc
    if rows != cols:
        raise NonSquareMatrix(f"{path}: {rows}x{cols} matrices are not square")
    need = 2 * rows * cols * R
    if len(body) != need:
        raise MalformedConfig(f"{path}: expected {need} numbers, found {len(body)}")
    try:
        vals = np.array([float(t) for t in body])
    except ValueError as exc:
        raise MalformedConfig(f"{path}: non-numeric entry") from exc
    pairs = vals.reshape(R, rows, cols, 2)
    return pairs[..., 0] + 1j * pairs[..., 1]


def _looks_like_3_header(tokens):
    head = tokens[:3]
    if not all(t.lstrip("-").isdigit() for t in head):
        return False
    rows, cols, R = (int(t) for t in head)
    return len(tokens) - 3 == 2 * rows * cols * R


def write_matrix_file(path, matrices):
    mats = np.asarray(matrices, dtype=complex)
    R, N, _ = mats.shape
    lines = [f"{N} {R}"]
    for r in range(R):
        for row in mats[r]:
            lines.append(" ".join(f"{z.real:.17g} {z.imag:.17g}" for z in row))
    Path(path).write_text("\n".join(lines) + "\n")


def load_family(spec, base_dir=None) -> OperatorFamily:
    """Build a family from a mapping with keys preset|matrix_file, N, R, seed."""
    try:
        spec = dict(spec)
    except (TypeError, ValueError) as exc:
        raise MalformedConfig("family section must be a mapping") from exc
    preset, source = spec.get("preset"), spec.get("matrix_file")
    if bool(preset) == bool(source):
        raise MalformedConfig("family needs exactly one of 'preset' or 'matrix_file'")
    try:
        N = int(spec["N"]) if spec.get("N") is not None else None
        R = int(spec["R"]) if spec.get("R") is not None else None
        seed = int(spec.get("seed", 0))
    except ValueError as exc:
        raise MalformedConfig("N, R and seed must be integers") from exc
    if preset:
        if N is None or R is None:
            raise MalformedConfig("preset families need N and R")
        return preset_family(str(preset), N, R, seed)
    path = Path(source)
    if base_dir is not None and not path.is_absolute():
        path = Path(base_dir) / path
    if not path.exists():
        raise MalformedConfig(f"matrix file {path} not found")
    mats = read_matrix_file(path)
    if N is not None and mats.shape[1] != N:
        raise DimensionMismatch(f"config says N={N}, file has N={mats.shape[1]}")
    if R is not None and mats.shape[0] != R:
        raise DimensionMismatch(f"config says R={R}, file has R={mats.shape[0]}")
    return normalize(mats, path.stem)


@dataclass(frozen=True)
class WitnessSequence:
    """Orthonormal vectors v_n stored as columns."""

    vectors: np.ndarray

    @classmethod
    def canonical(cls, N):
        return cls(np.eye(N, dtype=complex))

    def __post_init__(self):
        V = self.vectors
        gram = V.conj().T @ V
        if np.max(np.abs(gram - np.eye(V.shape[1]))) > 1e-10:
            raise MalformedConfig("witness vectors are not orthonormal")

    def __len__(self):
        return self.vectors.shape[1]


@dataclass(frozen=True)
class DecayProfile:
    """profile[n] = max_r ||B_r^* v_n|| together with the per-r values."""

    values: np.ndarray
    per_r: np.ndarray
    envelope: np.ndarray = field(repr=False)

    def to_dict(self):
        return {"profile": self.values.tolist(), "envelope": self.envelope.tolist(),
                "per_r": self.per_r.tolist()}


def decay_profile(fam: OperatorFamily, w: WitnessSequence | None = None) -> DecayProfile:
    w = w or WitnessSequence.canonical(fam.N)
    if w.vectors.shape[0] != fam.N:
        raise DimensionMismatch(f"witness dimension {w.vectors.shape[0]} != N={fam.N}")
    per_r = np.stack([np.linalg.norm(B.conj().T @ w.vectors, axis=0) for B in fam.matrices])
    values = per_r.max(axis=0)
    # tail supremum: the smallest monotone majorant of the profile
    envelope = np.maximum.accumulate(values[::-1])[::-1]
    return DecayProfile(values, per_r, envelope)


@dataclass(frozen=True)
class ESelection:
    indices: tuple
    values: tuple
    rule_target: float
    M: float
    chain: dict

    @property
    def K_e(self) -> int:
        return len(self.indices)

    def to_dict(self):
        return {"indices": [i + 1 for i in self.indices], "sup_norms": list(self.values),
                "rule_target": self.rule_target, "M": self.M, "K_e": self.K_e,
                "chain": self.chain}


def select_e_sequence(profile: DecayProfile, rule_target: float = 0.5,
                      cap: int | None = None) -> ESelection:
    """Greedy choice of e_k = first unused v_n with profile^{1/4} <= t^k.

    ``cap`` bounds the number of selected vectors (default N // 4) so the
    orthogonal complement keeps most of the truncated space.
    """
    if not 0 < rule_target < 1:
        raise ValueError("rule_target must lie in (0, 1)")
    N = profile.values.size
    cap = max(1, N // 4) if cap is None else cap
    cap = min(cap, N - 1)
    quarter = profile.values ** 0.25
    chosen, last = [], -1
    while len(chosen) < cap:
        k = len(chosen) + 1
        hits = np.flatnonzero(quarter[last + 1:] <= rule_target ** k)
        if hits.size == 0:
            break
        last = last + 1 + int(hits[0])
        chosen.append(last)
    if not chosen:
        floor = float(quarter.min())
        raise ConditionFails(
            f"no witness vector has max_r ||B_r^* v_n||^(1/4) <= {rule_target}; "
            f"smallest value in the truncation is {floor:.6g}", floor=floor)
    idx = np.array(chosen)
    R = profile.per_r.shape[0]
    r = np.arange(1, R + 1)[:, None]
    s_sup = (profile.per_r[:, idx] / r).max(axis=0)
    rs_sup = profile.per_r[:, idx].max(axis=0)
    M = rule_target / (1.0 - rule_target)
    chain = {"sum_S": float(np.sum(s_sup ** 0.25)), "sum_rS": float(np.sum(rs_sup ** 0.25)),
             "sum_B": float(np.sum(quarter[idx])), "M": M}
    chain["holds"] = bool(chain["sum_S"] <= chain["sum_rS"] * (1 + 1e-12)
                          and abs(chain["sum_rS"] - chain["sum_B"]) <= 1e-12 * max(1, chain["sum_B"])
                          and chain["sum_B"] <= M * (1 + 1e-12))
    return ESelection(tuple(int(i) for i in idx), tuple(float(v) for v in profile.values[idx]),
                      rule_target, M, chain)
