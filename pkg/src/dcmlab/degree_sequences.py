"""Bi-degree sequences: generation, empirical laws, and regularity checks.

A bi-degree sequence assigns every node an (in-degree, out-degree) pair
with equal column sums, the input the pairing model needs.  Sequences are
generated from a prescribed joint law by i.i.d. sampling followed by a
minimal +1 repair of the lighter side at uniformly chosen indices, with a
resampling guard on the imbalance.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import EmptyGraph, InvalidLaw, RetriesExhausted
from .laws import DiscreteLaw, JointDegreeLaw, d1_truncation_error, wasserstein1
from .rng import substream

_DCMS_MAGIC = b"DCMS"
_DCMS_VERSION = 1


@dataclass(frozen=True)
class Provenance:
    """How a sequence was repaired: imbalance, retry count, touched indices."""

    delta_n: int
    retries: int
    modified: np.ndarray  # indices that received +1

    def __post_init__(self):
        arr = np.asarray(self.modified, dtype=np.int64).copy()
        arr.flags.writeable = False
        object.__setattr__(self, "modified", arr)


@dataclass(frozen=True)
class BiDegreeSequence:
    d_minus: np.ndarray
    d_plus: np.ndarray
    provenance: Provenance | None = None

    def __post_init__(self):
        dm = np.asarray(self.d_minus, dtype=np.int64).copy()
        dp = np.asarray(self.d_plus, dtype=np.int64).copy()
        if dm.shape != dp.shape or dm.ndim != 1:
            raise InvalidLaw("degree arrays must be 1-d with matching length")
        if np.any(dm < 0) or np.any(dp < 0):
            raise InvalidLaw("degrees must be nonnegative")
        if dm.sum() != dp.sum():
            raise InvalidLaw("in- and out-degree totals differ")
        dm.flags.writeable = False
        dp.flags.writeable = False
        object.__setattr__(self, "d_minus", dm)
        object.__setattr__(self, "d_plus", dp)

    @property
    def n(self) -> int:
        return self.d_minus.size

    @cached_property
    def L_n(self) -> int:
        return int(self.d_minus.sum())


@dataclass(frozen=True)
class EmpiricalDegreeDistributions:
    """Empirical marginal and size-biased degree laws of one sequence."""

    g_n_plus: DiscreteLaw
    g_n_minus: DiscreteLaw
    f_n_plus: DiscreteLaw
    f_n_minus: DiscreteLaw
    nu_n: float
    mu_n: float


@dataclass(frozen=True)
class AssumptionReport:
    """Checkable regularity of a sequence against its limit laws.

    The four d1 fields include the truncation error bound of the limit
    pmfs, so the verdict is conservative.
    """

    d1_g_plus: float
    d1_g_minus: float
    d1_f_plus: float
    d1_f_minus: float
    eps_threshold: float
    moment_sum: float
    moment_bound: float
    omega_n_holds: bool
    eps: float
    kappa: float
    K_kappa: float


def default_delta(kappa: float, c: float = 0.9) -> float:
    """Imbalance exponent: delta = c*kappa/(1+kappa) for kappa < 1, 0.25 at 1."""
    if not 0 < kappa <= 1:
        raise ValueError("kappa must be in (0, 1]")
    if kappa >= 1.0:
        return 0.25
    return c * kappa / (1.0 + kappa)


def sample_iid_bidegree(
    law: JointDegreeLaw,
    n: int,
    seed: int,
    delta: float | None = None,
    max_retries: int = 1000,
) -> BiDegreeSequence:
    """Draw n pairs from the joint law and repair the column-sum imbalance.

    Pairs are redrawn wholesale while |sum(D-) - sum(D+)| exceeds
    n^(1-delta); then the lighter side gets +1 at |imbalance| indices
    chosen uniformly without replacement.
    """
    if n < 1:
        raise InvalidLaw("need n >= 1")
    if delta is None:
        delta = default_delta(law.default_kappa)
    if not 0 < delta < 1:
        raise InvalidLaw("delta must be in (0, 1)")
    threshold = n ** (1.0 - delta)
    rng = substream(seed, "iid-bidegree")
    for attempt in range(max_retries + 1):
        dm, dp = law.sample_pairs(rng, n)
        delta_n = int(dm.sum() - dp.sum())
        if abs(delta_n) <= threshold:
            break
    else:  # pragma: no cover - loop always breaks or raises below
        pass
    if abs(delta_n) > threshold:
        raise RetriesExhausted(
            f"imbalance stayed above n^(1-delta)={threshold:.1f} "
            f"after {max_retries} retries"
        )
    k = abs(delta_n)
    if k:
        modified = rng.choice(n, size=k, replace=False)
        if delta_n <= 0:
            dm = dm.copy()
            dm[modified] += 1
        else:
            dp = dp.copy()
            dp[modified] += 1
    else:
        modified = np.empty(0, dtype=np.int64)
    prov = Provenance(delta_n=delta_n, retries=attempt, modified=modified)
    return BiDegreeSequence(dm, dp, provenance=prov)


def empirical_distributions(seq: BiDegreeSequence) -> EmpiricalDegreeDistributions:
    """Marginal laws g_n+- and stub-weighted (size-biased) laws f_n+-.

    f_n_plus(t) is the probability that following a uniformly chosen edge
    forward lands on a node of out-degree t: each node of out-degree t
    counts with weight equal to its in-degree.
    """
    if seq.L_n <= 0:
        raise EmptyGraph("sequence has no stubs")
    n, L = seq.n, seq.L_n
    g_plus = DiscreteLaw(np.bincount(seq.d_plus) / n)
    g_minus = DiscreteLaw(np.bincount(seq.d_minus) / n)
    f_plus = DiscreteLaw(np.bincount(seq.d_plus, weights=seq.d_minus) / L)
    f_minus = DiscreteLaw(np.bincount(seq.d_minus, weights=seq.d_plus) / L)
    nu_n = L / n
    mu_n = float(seq.d_minus @ seq.d_plus) / L
    return EmpiricalDegreeDistributions(g_plus, g_minus, f_plus, f_minus, nu_n, mu_n)


def check_assumption(
    seq: BiDegreeSequence,
    law: JointDegreeLaw,
    eps: float = 0.1,
    kappa: float | None = None,
    K_kappa: float | None = None,
) -> AssumptionReport:
    """Verify the regularity event: four d1 distances below n^-eps and the
    joint kappa-moment sum below K_kappa * n."""
    if kappa is None:
        kappa = law.default_kappa
    if K_kappa is None:
        K_kappa = 4.0 * law.kappa_moment(kappa)
    emp = empirical_distributions(seq)
    g_minus, g_plus = law.marginal_laws()
    f_plus, f_minus = law.size_biased()
    pairs = [
        (emp.g_n_plus, g_plus),
        (emp.g_n_minus, g_minus),
        (emp.f_n_plus, f_plus),
        (emp.f_n_minus, f_minus),
    ]
    d1 = [wasserstein1(a, b) + d1_truncation_error(a, b) for a, b in pairs]
    dm = seq.d_minus.astype(np.float64)
    dp = seq.d_plus.astype(np.float64)
    moment_sum = float(((dm**kappa + dp**kappa) * dm * dp).sum())
    eps_threshold = seq.n ** (-eps)
    moment_bound = K_kappa * seq.n
    holds = max(d1) <= eps_threshold and moment_sum <= moment_bound
    return AssumptionReport(
        d1_g_plus=d1[0],
        d1_g_minus=d1[1],
        d1_f_plus=d1[2],
        d1_f_minus=d1[3],
        eps_threshold=eps_threshold,
        moment_sum=moment_sum,
        moment_bound=moment_bound,
        omega_n_holds=bool(holds),
        eps=eps,
        kappa=kappa,
        K_kappa=K_kappa,
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def save_bidegree(seq: BiDegreeSequence, path: str | Path) -> None:
    """Binary format: magic "DCMS", version u32, n u64, then n (u32,u32)
    little-endian (in-degree, out-degree) pairs."""
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(_DCMS_MAGIC)
        fh.write(struct.pack("<IQ", _DCMS_VERSION, seq.n))
        pairs = np.empty((seq.n, 2), dtype="<u4")
        pairs[:, 0] = seq.d_minus
        pairs[:, 1] = seq.d_plus
        fh.write(pairs.tobytes())


def load_bidegree(path: str | Path) -> BiDegreeSequence:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _DCMS_MAGIC:
            raise ValueError(f"not a DCMS file: magic {magic!r}")
        version, n = struct.unpack("<IQ", fh.read(12))
        if version != _DCMS_VERSION:
            raise ValueError(f"unsupported DCMS version {version}")
        pairs = np.frombuffer(fh.read(8 * n), dtype="<u4").reshape(n, 2)
    return BiDegreeSequence(pairs[:, 0].astype(np.int64), pairs[:, 1].astype(np.int64))


def bidegree_to_csv(seq: BiDegreeSequence, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "d_minus", "d_plus"])
        for i in range(seq.n):
            writer.writerow([i, int(seq.d_minus[i]), int(seq.d_plus[i])])


def bidegree_from_csv(path: str | Path) -> BiDegreeSequence:
    data = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
    order = np.argsort(data[:, 0])
    return BiDegreeSequence(data[order, 1], data[order, 2])
