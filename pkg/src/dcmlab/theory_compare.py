"""Limiting hopcount law and comparison with measured histograms.

The limit law of the centered hopcount H_n - floor(log_mu n), conditioned
on finiteness, is

    P(H <= x) = 1 - E[ exp{ -(nu/(mu-1)) * mu^(floor(log_mu n) + floor(x))
                            / n * W+ W- }  |  W+ W- > 0 ],

with W+ and W- the independent martingale limits of the forward and
backward exploration trees.  The d-regular case collapses to a closed
form because both limits are identically 1.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path

import numpy as np

from .branching import GWSpec, WPool, population_dynamics
from .coupling import DepletionSampler
from .degree_sequences import BiDegreeSequence
from .errors import EmptyEmpirical, InvalidLaw, NoSurvivingMass
from .hopcount_engine import HopcountHistogram
from .laws import JointDegreeLaw
from .rng import salt64, substream


def floor_log(n: int, mu: float) -> int:
    """floor(log_mu n) with a guard at integer boundaries.

    Near-integer logarithms are re-decided by exact rational power
    comparison, because the floor of a float logarithm silently goes
    wrong exactly there.
    """
    if n < 1 or mu <= 1:
        raise InvalidLaw("need n >= 1 and mu > 1")
    x = math.log(n) / math.log(mu)
    r = round(x)
    if abs(x - r) < 1e-9:
        return r if Fraction(mu) ** r <= n else r - 1
    return int(math.floor(x))


@dataclass(frozen=True)
class TheoreticalHopcountLaw:
    """Monte-Carlo form of the limiting hopcount distribution."""

    n: int
    nu: float
    mu: float
    w_plus: WPool
    w_minus: WPool

    @cached_property
    def conditioned_products(self) -> np.ndarray:
        prod = self.w_plus.samples * self.w_minus.samples
        out = prod[prod > 0.0]
        out.flags.writeable = False
        return out

    @cached_property
    def _floor_log(self) -> int:
        return floor_log(self.n, self.mu)


def build_theoretical_law(
    law: JointDegreeLaw,
    n: int,
    pool_size: int = 100_000,
    generations: int = 30,
    seed: int = 0,
) -> TheoreticalHopcountLaw:
    """Pools for W+ and W- from independent population-dynamics runs."""
    if not law.is_supercritical:
        raise InvalidLaw("hopcount theory needs a supercritical law (mu > 1)")
    wp = population_dynamics(GWSpec.from_joint_law(law, "+"), pool_size,
                             generations, seed=salt64(seed, "w-plus"))
    wm = population_dynamics(GWSpec.from_joint_law(law, "-"), pool_size,
                             generations, seed=salt64(seed, "w-minus"))
    return TheoreticalHopcountLaw(n=n, nu=law.nu, mu=law.mu, w_plus=wp, w_minus=wm)


def theoretical_cdf(law: TheoreticalHopcountLaw, x: float) -> float:
    """P(H <= x) for the centered hopcount, by pool average."""
    w = law.conditioned_products
    if w.size == 0:
        raise NoSurvivingMass("both pools are entirely extinct")
    factor = (law.nu / (law.mu - 1.0)) * law.mu ** (law._floor_log + math.floor(x)) / law.n
    return 1.0 - float(np.exp(-factor * w).mean())


def theoretical_cdf_curve(law: TheoreticalHopcountLaw, xs: np.ndarray) -> np.ndarray:
    w = law.conditioned_products
    if w.size == 0:
        raise NoSurvivingMass("both pools are entirely extinct")
    xs = np.asarray(xs, dtype=np.float64)
    factors = (law.nu / (law.mu - 1.0)) * law.mu ** (
        law._floor_log + np.floor(xs)
    ) / law.n
    return 1.0 - np.exp(-np.outer(factors, w)).mean(axis=1)


def d_regular_hopcount_cdf(d: int, n: int, x: float) -> float:
    """Closed form of the limit law for the d-regular sequence.

    Both martingale limits are identically 1, so the pool average
    collapses to 1 - exp{-(d/(d-1)) d^(floor(log_d n) + floor(x)) / n}.
    """
    if d < 2:
        raise InvalidLaw("need d >= 2")
    fl = floor_log(n, float(d))
    return 1.0 - math.exp(-(d / (d - 1.0)) * d ** (fl + math.floor(x)) / n)


def prob_finite(s_plus: float, s_minus: float) -> float:
    """Limit probability that a uniform ordered pair is connected."""
    if not (0.0 <= s_plus <= 1.0 and 0.0 <= s_minus <= 1.0):
        raise ValueError("survival probabilities must lie in [0, 1]")
    return s_plus * s_minus


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov comparison
# ---------------------------------------------------------------------------

KS_WINDOW = 40  # integer lattice half-width around floor(log_mu n)


def ks_distance(empirical: HopcountHistogram, theory: TheoreticalHopcountLaw) -> float:
    """sup_t |empirical CDF(t) - theory CDF(t)| over the integer lattice.

    Both sides are conditioned on finiteness; the theory CDF at hop t is
    the centered law evaluated at x = t - floor(log_mu n).
    """
    if empirical.finite_pairs <= 0:
        raise EmptyEmpirical("empirical histogram has no finite pairs")
    shift = theory._floor_log
    lo = min(1, shift - KS_WINDOW)
    hi = max(empirical.counts.size, shift + KS_WINDOW) + 1
    ts = np.arange(lo, hi)
    emp_cdf = np.zeros(ts.size)
    c = empirical.cdf()
    inside = (ts >= 0) & (ts < c.size)
    emp_cdf[inside] = c[ts[inside]]
    emp_cdf[ts >= c.size] = 1.0
    th_cdf = theoretical_cdf_curve(theory, ts - shift)
    return float(np.abs(emp_cdf - th_cdf).max())


def ks_bootstrap_ci(
    empirical: HopcountHistogram,
    theory: TheoreticalHopcountLaw,
    resamples: int = 200,
    seed: int = 0,
    level: float = 0.95,
) -> tuple[float, float]:
    """Percentile CI for the KS value under pool-resampling, quantifying
    the Monte-Carlo error of the theory side."""
    rng = substream(seed, "ks-bootstrap")
    w = theory.conditioned_products
    vals = []
    for _ in range(resamples):
        pick = rng.integers(0, w.size, size=w.size)
        boot = TheoreticalHopcountLaw(
            n=theory.n, nu=theory.nu, mu=theory.mu,
            w_plus=WPool(samples=w[pick], generations=theory.w_plus.generations,
                         pool_size=w.size, seed=0),
            w_minus=WPool(samples=np.ones(w.size), generations=0,
                          pool_size=w.size, seed=0),
        )
        vals.append(ks_distance(empirical, boot))
    alpha = (1.0 - level) / 2.0
    return (float(np.quantile(vals, alpha)), float(np.quantile(vals, 1.0 - alpha)))


# ---------------------------------------------------------------------------
# Exact small-n tail of the hopcount
# ---------------------------------------------------------------------------


def survival_product_p(A: int, B: int, L: int) -> float:
    """Probability that none of A out-stubs hits a fixed set of B in-stubs
    when L unpaired stubs remain on each side:

        p(A, B, L) = 1(A + B <= L) * prod_{s=0}^{A-1} (1 - B/(L - s)).
    """
    if A < 0 or B < 0 or L < 0:
        raise ValueError("A, B, L must be nonnegative")
    if A + B > L:
        return 0.0
    if A == 0 or B == 0:
        return 1.0
    s = np.arange(A, dtype=np.float64)
    return float(math.exp(math.fsum(np.log1p(-B / (L - s)))))


@dataclass(frozen=True)
class TailEstimate:
    """Monte-Carlo estimate of P(H_n > k) with its standard error."""

    k: int
    value: float
    stderr: float
    reps: int


class _JointExploration:
    """Two-cluster exploration of one sequence, conditioned on staying
    disconnected, for the sequential tail estimator.

    The forward cluster grows from the source along out-stubs, the
    backward cluster from the target along in-stubs, alternating.  Each
    pairing is uniform among the allowed stubs: inactive-node stubs plus
    the same cluster's own unpaired stubs; the opposite frontier is
    excluded, and the probability of that exclusion is the factor
    p(Z+, Z-, L - pairings) accumulated by the caller.
    """

    def __init__(self, seq: BiDegreeSequence, rng: np.random.Generator):
        if seq.n < 2:
            raise InvalidLaw("need at least two nodes for an ordered pair")
        self.seq = seq
        self.rng = rng
        self.L = seq.L_n
        self.P = 0  # pairings made so far
        self.fwd = DepletionSampler(seq.d_plus, seq.d_minus)   # discover by in-stub
        self.bwd = DepletionSampler(seq.d_minus, seq.d_plus)   # discover by out-stub
        self.v_in = 0   # unpaired in-stubs on forward-cluster nodes
        self.v_out = 0  # unpaired out-stubs on backward-cluster nodes
        src = int(rng.integers(seq.n))
        tgt = int(rng.integers(seq.n - 1))
        if tgt >= src:
            tgt += 1
        self._activate(src)
        self._activate(tgt)
        self.v_in = int(seq.d_minus[src])
        self.v_out = int(seq.d_plus[tgt])
        self.z_fwd = int(seq.d_plus[src])   # out-stub frontier of the source
        self.z_bwd = int(seq.d_minus[tgt])  # in-stub frontier of the target

    def _activate(self, node: int) -> None:
        self.fwd.remove(node)
        self.bwd.remove(node)

    def _draw(self) -> float:
        u = self.rng.random()
        while u == 0.0:
            u = self.rng.random()
        return u

    def advance_forward(self) -> None:
        new_frontier = 0
        for _ in range(self.z_fwd):
            mass = self.fwd.total + self.v_in
            target = self._draw() * mass
            if target <= self.v_in:
                self.v_in -= 1  # cycle edge inside the forward cluster
            else:
                node, deg = self.fwd.search(target - self.v_in)
                self._activate(node)
                self.v_in += int(self.seq.d_minus[node]) - 1
                new_frontier += deg
            self.P += 1
        self.z_fwd = new_frontier

    def advance_backward(self) -> None:
        new_frontier = 0
        for _ in range(self.z_bwd):
            mass = self.bwd.total + self.v_out
            target = self._draw() * mass
            if target <= self.v_out:
                self.v_out -= 1
            else:
                node, deg = self.bwd.search(target - self.v_out)
                self._activate(node)
                self.v_out += int(self.seq.d_plus[node]) - 1
                new_frontier += deg
            self.P += 1
        self.z_bwd = new_frontier


def exact_tail_curve(seq: BiDegreeSequence, k_max: int, reps: int, seed: int
                     ) -> np.ndarray:
    """Monte-Carlo values of P(H_n > k) for k = 0..k_max on one sequence.

    Each replicate runs the conditioned two-cluster exploration and
    multiplies the per-step no-collision probabilities

        P(H_n > k) = E[ prod_{i=2}^{k+1}
                        p(Z+_{ceil(i/2)}, Z-_{floor(i/2)}, L - S_{i-2}) ],

    where S counts previously paired stubs.  Returns the replicate
    matrix column means; index 0 is exactly 1 (distinct endpoints).
    """
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    weights = np.zeros((reps, k_max + 1))
    weights[:, 0] = 1.0
    for r in range(reps):
        rng = substream(seed, "tail", r)
        jx = _JointExploration(seq, rng)
        w = 1.0
        for i in range(2, k_max + 2):
            if w > 0.0:
                w *= survival_product_p(jx.z_fwd, jx.z_bwd, jx.L - jx.P)
            weights[r, i - 1] = w
            if w == 0.0 or i == k_max + 1:
                continue
            if i % 2 == 0:
                jx.advance_forward()
            else:
                jx.advance_backward()
    return weights


def exact_tail_smalln(seq: BiDegreeSequence, k: int, reps: int, seed: int
                      ) -> TailEstimate:
    """P(H_n > k) over uniform distinct ordered pairs of one sequence."""
    weights = exact_tail_curve(seq, k, reps, seed)[:, k]
    value = float(weights.mean())
    stderr = float(weights.std(ddof=1) / math.sqrt(reps)) if reps > 1 else math.inf
    return TailEstimate(k=k, value=value, stderr=stderr, reps=reps)


# ---------------------------------------------------------------------------
# Comparison report
# ---------------------------------------------------------------------------


def save_comparison(
    empirical: HopcountHistogram,
    theory: TheoreticalHopcountLaw,
    csv_path: str | Path,
    meta: dict | None = None,
    sidecar_path: str | Path | None = None,
) -> float:
    """CSV of (t, empirical_pmf, theoretical_pmf) plus a JSON sidecar with
    the KS distance and run constants; returns the KS distance."""
    ks = ks_distance(empirical, theory)
    shift = theory._floor_log
    hi = max(empirical.counts.size, shift + KS_WINDOW) + 1
    ts = np.arange(1, hi)
    emp_pmf = np.zeros(ts.size)
    pm = empirical.pmf()
    inside = ts < pm.size
    emp_pmf[inside] = pm[ts[inside]]
    th_cdf = theoretical_cdf_curve(theory, ts - shift)
    th_lo = theoretical_cdf_curve(theory, ts - 1 - shift)
    th_pmf = th_cdf - th_lo
    csv_path = Path(csv_path)
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "empirical_pmf", "theoretical_pmf"])
        for t, e, th in zip(ts, emp_pmf, th_pmf):
            writer.writerow([int(t), repr(float(e)), repr(float(th))])
    payload = {
        "ks": ks,
        "n": theory.n,
        "nu": theory.nu,
        "mu": theory.mu,
        "floor_log_mu_n": shift,
        "pool_size_plus": theory.w_plus.pool_size,
        "pool_size_minus": theory.w_minus.pool_size,
        "pool_seed_plus": theory.w_plus.seed,
        "pool_seed_minus": theory.w_minus.seed,
    }
    if meta:
        payload.update(meta)
    if sidecar_path is None:
        sidecar_path = csv_path.with_suffix(".json")
    Path(sidecar_path).write_text(json.dumps(payload, indent=2))
    return ks
