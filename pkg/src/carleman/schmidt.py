"""Schmidt decomposition of J, the quarter-power operator A and the
associated inequality / nuclearity certificates."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CertificateViolation, ConvergenceFailure, ReconstructionFailure

RECON_TOL = 1e-10


@dataclass(frozen=True)
class SchmidtData:
    """Kept triples (s_n, p_n, q_n) with J p_n = s_n q_n.

    ``right`` holds p_n and ``left`` holds q_n as columns.
    """

    singulars: np.ndarray
    left: np.ndarray
    right: np.ndarray
    discarded: np.ndarray
    reconstruction_error: float

    @property
    def rank(self) -> int:
        return self.singulars.size

    @property
    def tail_mass(self) -> float:
        return float(self.discarded.sum())

    def operator(self):
        return (self.left * self.singulars) @ self.right.conj().T

    def to_dict(self):
        return {"rank": self.rank, "singulars": self.singulars.tolist(),
                "discarded": self.discarded.tolist(),
                "reconstruction_error": self.reconstruction_error}


def schmidt_decompose(J, drop_tol: float = 1e-12) -> SchmidtData:
    """SVD of J; triples with s_n < drop_tol * s_1 are dropped.

    LAPACK's divide-and-conquer SVD is used; the contract is the
    reconstruction error, which is checked against the full matrix.
    """
    J = np.asarray(J, dtype=complex)
    n = J.shape[1]
    try:
        U, s, Vh = np.linalg.svd(J)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"SVD did not converge: {exc}") from exc
    s_max = s[0] if s.size else 0.0
    keep = s >= drop_tol * s_max if s_max > 0 else np.zeros(s.shape, dtype=bool)
    rank = int(np.count_nonzero(keep))
    sd = SchmidtData(s[:rank].copy(), U[:, :rank].copy(), Vh[:rank].conj().T.copy(),
                     s[rank:].copy(), 0.0)
    recon = sd.operator() if rank else np.zeros_like(J)
    err = float(np.max(np.abs(recon - J))) if J.size else 0.0
    if err > RECON_TOL * max(1.0, s_max) + drop_tol * s_max * n:
        raise ReconstructionFailure(f"Schmidt reconstruction error {err:.3e}")
    return SchmidtData(sd.singulars, sd.left, sd.right, sd.discarded, err)


@dataclass(frozen=True)
class QuarterPowerA:
    matrix: np.ndarray
    source: SchmidtData

    @property
    def H(self):
        return self.matrix.conj().T


def fractional_gram_power(sd: SchmidtData, side: str, power: float):
    """(J^*J)^power for side="right", (J J^*)^power for side="left"."""
    V = sd.right if side == "right" else sd.left
    return (V * sd.singulars ** (2 * power)) @ V.conj().T


def quarter_power(sd: SchmidtData, spot_checks: int = 8, seed: int = 0) -> QuarterPowerA:
    """A = sum_n s_n^{1/4} <., p_n> q_n.

    Spot-checks |A f| = |(J^*J)^{1/8} f| and |A^* f| = |(JJ^*)^{1/8} f| on
    a few random vectors.
    """
    N = sd.left.shape[0]
    A = (sd.left * sd.singulars ** 0.25) @ sd.right.conj().T if sd.rank else \
        np.zeros((N, sd.right.shape[0]), dtype=complex)
    if sd.rank and spot_checks:
        rng = np.random.default_rng(seed)
        right8 = fractional_gram_power(sd, "right", 1 / 8)
        left8 = fractional_gram_power(sd, "left", 1 / 8)
        for _ in range(spot_checks):
            f = rng.standard_normal(A.shape[1]) + 1j * rng.standard_normal(A.shape[1])
            g = rng.standard_normal(N) + 1j * rng.standard_normal(N)
            a = abs(np.linalg.norm(A @ f) - np.linalg.norm(right8 @ f))
            b = abs(np.linalg.norm(A.conj().T @ g) - np.linalg.norm(left8 @ g))
            scale = np.linalg.norm(f) + np.linalg.norm(g)
            if max(a, b) > 1e-10 * scale:
                raise ReconstructionFailure("fractional-power identities fail for A")
    return QuarterPowerA(A, sd)


def random_unit_vectors(count, dim, seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((dim, count)) + 1j * rng.standard_normal((dim, count))
    return v / np.linalg.norm(v, axis=0)


def schwarz_certify(A, J, sample_count: int = 100, seed: int = 0, tol: float = 1e-9,
                    vectors=None):
    """Check |A f| <= |J f|^{1/4} and |A^* f| <= |J^* f|^{1/4} for unit f."""
    A = A.matrix if isinstance(A, QuarterPowerA) else np.asarray(A)
    J = np.asarray(J)
    f = random_unit_vectors(sample_count, J.shape[1], seed) if vectors is None else vectors
    slack_a = np.linalg.norm(J @ f, axis=0) ** 0.25 - np.linalg.norm(A @ f, axis=0)
    slack_b = np.linalg.norm(J.conj().T @ f, axis=0) ** 0.25 - np.linalg.norm(A.conj().T @ f, axis=0)
    slack = np.minimum(slack_a, slack_b)
    violations = int(np.count_nonzero(slack < -tol))
    report = {"samples": int(f.shape[1]), "violations": violations,
              "min_slack": float(slack.min()) if slack.size else 0.0, "tolerance": tol}
    if violations:
        raise CertificateViolation(
            f"{violations} Schwarz violations, worst slack {report['min_slack']:.3e}")
    return report


def nuclearity_report(sd: SchmidtData, flag_fraction: float = 0.01):
    """sum_n s_n^{1/2} over kept triples, the dropped tail and a warning flag."""
    kept = float(np.sum(np.sqrt(sd.singulars)))
    tail = float(np.sum(np.sqrt(sd.discarded)))
    return {"sum_sqrt": kept, "tail_bound": tail, "total": kept + tail,
            "tail_flag": bool(kept > 0 and tail > flag_fraction * kept)}
