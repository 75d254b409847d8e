"""Delayed branching processes and their limit analytics.

A delayed process has root offspring law g and offspring law f everywhere
else.  With nu = mean(g) and mu = mean(f), Z_k / (nu mu^(k-1)) is a mean
one martingale whose limit W drives the hopcount fluctuation law; W is
approximated here by pool-based population dynamics on the distributional
fixed point W = sum_{i<=N} W_i / mu.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateLaw, InvalidLaw, PopulationOverflow, UndefinedTilt
from .laws import DiscreteLaw, JointDegreeLaw
from .rng import substream

DEFAULT_POOL_SIZE = 100_000
DEFAULT_GENERATIONS = 30
GENERATION_CAP = 1_000_000_000


@dataclass(frozen=True)
class GWSpec:
    """Root law g, offspring law f, and their means."""

    g: DiscreteLaw
    f: DiscreteLaw

    @property
    def nu(self) -> float:
        return self.g.mean

    @property
    def mu(self) -> float:
        return self.f.mean

    @staticmethod
    def from_joint_law(law: JointDegreeLaw, direction: str) -> "GWSpec":
        """The limit process coupled to exploration in the given direction.

        '+' explores out-components: root ~ out-degree law, offspring ~
        stub-weighted out-degree law.  '-' is the mirror image.
        """
        g_minus, g_plus = law.marginal_laws()
        f_plus, f_minus = law.size_biased()
        if direction == "+":
            return GWSpec(g=g_plus, f=f_plus)
        if direction == "-":
            return GWSpec(g=g_minus, f=f_minus)
        raise InvalidLaw(f"direction must be '+' or '-', got {direction!r}")


@dataclass(frozen=True)
class GWPath:
    """One trajectory: generation sizes and the normalized martingale."""

    z: np.ndarray  # Z_0 = 1, Z_1, ..., Z_K
    w: np.ndarray  # W_k = Z_k / (nu mu^(k-1)) for k = 1..K

    def __post_init__(self):
        for name in ("z", "w"):
            arr = np.asarray(getattr(self, name))
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class WPool:
    """Monte-Carlo pool approximating the martingale limit W.

    Extinct lineages contribute exact zeros; ``zero_fraction`` is their
    share.  ``near_zero_fraction`` (samples below 1e-6 that are not exact
    zeros) tracks how much survivor mass the finite-depth truncation left
    near the extinction atom.
    """

    samples: np.ndarray
    generations: int
    pool_size: int
    seed: int

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64).copy()
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    @property
    def zero_fraction(self) -> float:
        return float((self.samples == 0.0).mean())

    @property
    def near_zero_fraction(self) -> float:
        return float(((self.samples > 0.0) & (self.samples < 1e-6)).mean())

    @property
    def mean(self) -> float:
        return float(self.samples.mean())

    def positive(self) -> np.ndarray:
        return self.samples[self.samples > 0.0]


def simulate_delayed_gw(spec: GWSpec, generations: int, seed: int,
                        cap: int = GENERATION_CAP) -> GWPath:
    """One path of the delayed process, Z_0 = 1 through Z_generations."""
    paths = simulate_delayed_gw_many(spec, generations, n_paths=1, seed=seed, cap=cap)
    z = paths[0]
    mu_pow = spec.nu * spec.mu ** np.arange(generations)
    w = np.divide(z[1:], mu_pow, out=np.zeros(generations), where=mu_pow > 0)
    return GWPath(z=z, w=w)


def simulate_delayed_gw_many(spec: GWSpec, generations: int, n_paths: int,
                             seed: int, cap: int = GENERATION_CAP) -> np.ndarray:
    """Matrix of n_paths trajectories, columns Z_0..Z_generations."""
    if generations < 1:
        raise ValueError("need generations >= 1")
    rng = substream(seed, "delayed-gw")
    out = np.zeros((n_paths, generations + 1), dtype=np.int64)
    out[:, 0] = 1
    sizes = spec.g.sample(rng, n_paths)
    out[:, 1] = sizes
    for k in range(2, generations + 1):
        total = int(sizes.sum())
        if total > cap:
            raise PopulationOverflow(f"generation {k - 1} holds {total} individuals")
        if total == 0:
            break
        draws = spec.f.sample(rng, total)
        bounds = np.concatenate([[0], np.cumsum(sizes)])
        csum = np.concatenate([[0], np.cumsum(draws)])
        sizes = csum[bounds[1:]] - csum[bounds[:-1]]
        out[:, k] = sizes
    return out


def pgf(law: DiscreteLaw, s: float) -> float:
    return law.pgf(s)


def extinction_probability(f: DiscreteLaw, tol: float = 1e-12,
                           max_iter: int = 1_000_000) -> float:
    """Smallest fixed point of s -> E[s^N] on [0, 1].

    Monotone iteration from 0; for the degenerate f = delta_1 every point
    is fixed and the iteration stays at 0 by convention.
    """
    q = 0.0
    for _ in range(max_iter):
        nxt = f.pgf(q)
        if nxt - q < tol:
            return float(nxt)
        q = nxt
    return float(q)


def survival_probability(g: DiscreteLaw, q: float) -> float:
    """1 - sum_t g(t) q^t: survival of the delayed process whose root law
    is g when the non-delayed extinction probability is q."""
    if not 0.0 <= q <= 1.0 + 1e-12:
        raise ValueError("q must lie in [0, 1]")
    return 1.0 - g.pgf(min(q, 1.0))


def tilted_laws(g: DiscreteLaw, f: DiscreteLaw, q: float
                ) -> tuple[DiscreteLaw, DiscreteLaw]:
    """Offspring laws of the process conditioned on extinction.

    g~(i) = g(i) q^i / sum_t g(t) q^t  and  f~(i) = f(i) q^(i-1).
    The conditioned process is subcritical: mean(f~) < 1 for 0 < q < 1.
    At q = 0 extinction forces a childless root, so g~ is a point mass at
    zero and f~ is returned as None (no individual ever draws from it).
    """
    if q < 0 or q > 1 + 1e-12:
        raise ValueError("q must lie in [0, 1]")
    q = min(q, 1.0)
    if q == 0.0:
        if g.pmf[0] <= 0.0:
            raise UndefinedTilt("conditioning event has probability zero")
        return DiscreteLaw.point_mass(0), None
    ig = np.arange(g.tail_cutoff, dtype=np.float64)
    gw = g.pmf * q**ig
    g_tilde = DiscreteLaw(gw / gw.sum())
    if_ = np.arange(f.tail_cutoff, dtype=np.float64)
    fw = f.pmf * q ** (if_ - 1.0)
    total = fw.sum()
    if not 0.9 < total < 1.1:
        raise UndefinedTilt(f"tilted offspring law sums to {total:.6g}; "
                            "q is not a fixed point of the offspring pgf")
    f_tilde = DiscreteLaw(fw / total)
    return g_tilde, f_tilde


def population_dynamics(spec: GWSpec, pool_size: int = DEFAULT_POOL_SIZE,
                        generations: int = DEFAULT_GENERATIONS,
                        seed: int = 0) -> WPool:
    """Bootstrap approximation of the martingale limit W.

    Starting from a pool of ones, each round replaces every entry with
    (1/mu) * sum of N resampled entries, N ~ f; after ``generations``
    rounds a final delayed pass draws N ~ g and normalizes by nu.  Extinct
    lineages yield exact zeros.
    """
    if spec.mu <= 0 or spec.nu <= 0:
        raise DegenerateLaw("population dynamics needs nu > 0 and mu > 0")
    rng = substream(seed, "population-dynamics")
    pool = np.ones(pool_size)
    for _ in range(generations):
        pool = _resample_round(pool, spec.f, spec.mu, rng, pool_size)
    samples = _resample_round(pool, spec.g, spec.nu, rng, pool_size)
    return WPool(samples=samples, generations=generations,
                 pool_size=pool_size, seed=seed)


def _resample_round(pool: np.ndarray, law: DiscreteLaw, norm: float,
                    rng: np.random.Generator, out_size: int) -> np.ndarray:
    counts = law.sample(rng, out_size)
    total = int(counts.sum())
    picks = rng.integers(0, pool.size, size=total)
    csum = np.concatenate([[0.0], np.cumsum(pool[picks])])
    bounds = np.concatenate([[0], np.cumsum(counts)])
    return (csum[bounds[1:]] - csum[bounds[:-1]]) / norm


def save_wpool(pool: WPool, csv_path: str | Path,
               sidecar_path: str | Path | None = None) -> None:
    """CSV with one sample per line plus a JSON sidecar of run metadata."""
    csv_path = Path(csv_path)
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["w"])
        for v in pool.samples:
            writer.writerow([repr(float(v))])
    if sidecar_path is None:
        sidecar_path = csv_path.with_suffix(".json")
    meta = {
        "pool_size": pool.pool_size,
        "generations": pool.generations,
        "seed": pool.seed,
        "zero_fraction": pool.zero_fraction,
        "mean": pool.mean,
    }
    Path(sidecar_path).write_text(json.dumps(meta, indent=2))


def load_wpool(csv_path: str | Path, sidecar_path: str | Path | None = None) -> WPool:
    csv_path = Path(csv_path)
    if sidecar_path is None:
        sidecar_path = csv_path.with_suffix(".json")
    meta = json.loads(Path(sidecar_path).read_text())
    samples = np.loadtxt(csv_path, skiprows=1, dtype=np.float64, ndmin=1)
    return WPool(samples=samples, generations=meta["generations"],
                 pool_size=meta["pool_size"], seed=meta["seed"])
