"""Directed shortest-path (hopcount) measurement.

Exact distances come from per-source breadth-first search with vectorized
frontier expansion.  At large scale the neighborhood function N(t) -- the
number of ordered pairs (u, v), u != v, at directed distance <= t -- is
estimated with one probabilistic cardinality counter per node, propagated
synchronously along out-edges with register-wise max; differences of N
give the hopcount histogram.

Registers hold the rank of the lowest set bit of a salted 64-bit hash,
one byte per register; with 2^p registers per counter the estimate's
relative standard error is about 1.04 / sqrt(2^p).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .dcm_graph import Digraph
from .errors import EmptyEmpirical, EmptyGraph, NodeOutOfRange, NonMonotoneInput
from .rng import salt64, substream

ALPHA_INF = 0.721347520444481703680  # 1 / (2 ln 2)
DEFAULT_PRECISION = 10
_CHUNK_BYTES = 1 << 27  # working-set cap per gather in the counter sweep

INFINITE = math.inf


# ---------------------------------------------------------------------------
# Breadth-first search
# ---------------------------------------------------------------------------


def _expand(offsets: np.ndarray, targets: np.ndarray, frontier: np.ndarray
            ) -> np.ndarray:
    """Concatenated adjacency lists of the frontier nodes."""
    starts = offsets[frontier]
    counts = offsets[frontier + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return targets[:0]
    seg_begin = np.cumsum(counts) - counts
    flat = np.repeat(starts - seg_begin, counts) + np.arange(total)
    return targets[flat]


def bfs_distances_from(g: Digraph, source: int, reverse: bool = False,
                       stop_at: int | None = None) -> np.ndarray:
    """Distance array from source along out-edges (or into it, reversed);
    unreached nodes hold -1."""
    if not 0 <= source < g.n:
        raise NodeOutOfRange(f"node {source} not in 0..{g.n - 1}")
    offsets, targets = (
        (g.in_offsets, g.in_sources) if reverse else (g.out_offsets, g.out_targets)
    )
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int64)
    d = 0
    while frontier.size:
        if stop_at is not None and dist[stop_at] >= 0:
            break
        d += 1
        nbrs = _expand(offsets, targets, frontier)
        if nbrs.size == 0:
            break
        new = np.unique(nbrs[dist[nbrs] < 0])
        if new.size == 0:
            break
        dist[new] = d
        frontier = new
    return dist


def bfs_distance(g: Digraph, source: int, target: int) -> int | float:
    """Length of the shortest directed path, INFINITE if none, 0 if equal."""
    if not 0 <= target < g.n:
        raise NodeOutOfRange(f"node {target} not in 0..{g.n - 1}")
    if source == target:
        if not 0 <= source < g.n:
            raise NodeOutOfRange(f"node {source} not in 0..{g.n - 1}")
        return 0
    dist = bfs_distances_from(g, source, stop_at=target)
    d = int(dist[target])
    return d if d >= 0 else INFINITE


# ---------------------------------------------------------------------------
# Hopcount histograms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HopcountHistogram:
    """Counts of ordered pairs by directed distance.

    counts[t] is the number (or estimate) of ordered pairs at distance
    exactly t >= 1; pairs (u, u) are excluded by convention.  For sampled
    and counter-based modes the counts are respectively a sample tally and
    a real-valued estimate.
    """

    counts: np.ndarray
    finite_pairs: float
    total_pairs: float
    mode: str

    def __post_init__(self):
        arr = np.asarray(self.counts, dtype=np.float64).copy()
        arr.flags.writeable = False
        object.__setattr__(self, "counts", arr)

    def pmf(self) -> np.ndarray:
        """Distribution of the distance conditioned on being finite."""
        if self.finite_pairs <= 0:
            raise EmptyEmpirical("histogram has no finite-distance pairs")
        return self.counts / self.finite_pairs

    def cdf(self) -> np.ndarray:
        if self.finite_pairs <= 0:
            raise EmptyEmpirical("histogram has no finite-distance pairs")
        return np.cumsum(self.counts) / self.finite_pairs

    @staticmethod
    def combine(histograms: list["HopcountHistogram"]) -> "HopcountHistogram":
        width = max(h.counts.size for h in histograms)
        counts = np.zeros(width)
        for h in histograms:
            counts[: h.counts.size] += h.counts
        return HopcountHistogram(
            counts=counts,
            finite_pairs=sum(h.finite_pairs for h in histograms),
            total_pairs=sum(h.total_pairs for h in histograms),
            mode=histograms[0].mode,
        )


def sample_hopcounts(g: Digraph, num_pairs: int, seed: int) -> HopcountHistogram:
    """Distances of num_pairs uniform ordered pairs (i != j), grouped by
    source so each distinct source costs one search."""
    if g.n < 2:
        raise EmptyGraph("need at least two nodes to sample pairs")
    rng = substream(seed, "sample-pairs")
    src = rng.integers(0, g.n, size=num_pairs)
    dst = rng.integers(0, g.n - 1, size=num_pairs)
    dst += (dst >= src).astype(dst.dtype)
    order = np.argsort(src, kind="stable")
    src, dst = src[order], dst[order]
    dists = np.empty(num_pairs, dtype=np.int64)
    i = 0
    while i < num_pairs:
        j = i
        while j < num_pairs and src[j] == src[i]:
            j += 1
        dist = bfs_distances_from(g, int(src[i]))
        dists[i:j] = dist[dst[i:j]]
        i = j
    finite = dists[dists > 0]
    counts = np.bincount(finite) if finite.size else np.zeros(1, dtype=np.int64)
    return HopcountHistogram(
        counts=counts,
        finite_pairs=int(finite.size),
        total_pairs=num_pairs,
        mode="sampled_pairs",
    )


# ---------------------------------------------------------------------------
# Probabilistic counters
# ---------------------------------------------------------------------------


def _mix64(x: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer: avalanching 64-bit hash."""
    z = x + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _hash_items(items: np.ndarray, salt: int, p: int
                ) -> tuple[np.ndarray, np.ndarray]:
    """(register index, register value) for each item."""
    h = _mix64(np.asarray(items, dtype=np.uint64) ^ np.uint64(salt))
    m = np.uint64(1 << p)
    idx = (h & (m - np.uint64(1))).astype(np.int64)
    q = 64 - p
    w = (h >> np.uint64(p)) | (np.uint64(1) << np.uint64(q))
    lowbit = w & (np.uint64(0) - w)
    rho = np.log2(lowbit.astype(np.float64)).astype(np.uint8) + np.uint8(1)
    return idx, rho


def _sigma(x: np.ndarray) -> np.ndarray:
    """Power-series correction used by the register-histogram estimator."""
    x = np.asarray(x, dtype=np.float64)
    z = x.copy()
    y = 1.0
    xx = x.copy()
    for _ in range(200):
        xx = xx * xx
        z_new = z + xx * y
        y *= 2.0
        if np.array_equal(z_new, z):
            break
        z = z_new
    z = np.where(x >= 1.0, np.inf, z)
    return z


_POW_TABLE = np.exp2(-np.arange(65, dtype=np.float64))


def estimate_cardinality(registers: np.ndarray) -> np.ndarray:
    """Cardinality estimates for a (rows, m) register matrix.

    Valid while registers stay below 64 - p (always true for node counts
    up to 2^50), so the saturated-register correction is omitted.
    """
    from ._kernels import register_sums

    reg = np.atleast_2d(np.ascontiguousarray(registers))
    m = reg.shape[1]
    pow_sum, zeros = register_sums(reg, _POW_TABLE)
    z = (pow_sum - zeros) + m * _sigma(zeros / m)
    with np.errstate(divide="ignore"):
        return ALPHA_INF * m * m / z


@dataclass
class HllCounter:
    """One probabilistic cardinality counter (2^p byte registers).

    Merging takes the register-wise max, which makes merge commutative,
    associative, and idempotent.
    """

    p: int = DEFAULT_PRECISION
    salt: int = 0
    registers: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.registers is None:
            self.registers = np.zeros(1 << self.p, dtype=np.uint8)
        else:
            self.registers = np.asarray(self.registers, dtype=np.uint8)
            if self.registers.size != 1 << self.p:
                raise ValueError("register array does not match precision")

    def add(self, items) -> None:
        items = np.atleast_1d(np.asarray(items, dtype=np.uint64))
        idx, rho = _hash_items(items, self.salt, self.p)
        np.maximum.at(self.registers, idx, rho)

    def merge(self, other: "HllCounter") -> "HllCounter":
        if other.p != self.p:
            raise ValueError("cannot merge counters of different precision")
        return HllCounter(p=self.p, salt=self.salt,
                          registers=np.maximum(self.registers, other.registers))

    def estimate(self) -> float:
        return float(estimate_cardinality(self.registers[None, :])[0])


# ---------------------------------------------------------------------------
# Neighborhood function
# ---------------------------------------------------------------------------


def neighborhood_function(
    g: Digraph,
    mode: str = "exact",
    t_max: int = 128,
    p: int = DEFAULT_PRECISION,
    seed: int = 0,
) -> np.ndarray:
    """N(t) = ordered pairs (u, v), u != v, at directed distance <= t.

    Returned as an array with N[0] = 0, up to the first t where the
    counts stabilize (or t_max).  "exact" runs one search per source;
    "hll" propagates per-node counters along out-edges so that node u's
    counter after t rounds sketches the ball of radius t around u.
    """
    if t_max < 1:
        raise ValueError("need t_max >= 1")
    if mode == "exact":
        return _neighborhood_exact(g, t_max)
    if mode == "hll":
        return _neighborhood_hll(g, t_max, p, seed)
    raise ValueError(f"unknown mode {mode!r}")


def _neighborhood_exact(g: Digraph, t_max: int) -> np.ndarray:
    per_dist = np.zeros(t_max + 1, dtype=np.int64)
    deepest = 0
    for s in range(g.n):
        dist = bfs_distances_from(g, s)
        dist = dist[dist > 0]
        if dist.size:
            deepest = max(deepest, int(dist.max()))
            inside = dist[dist <= t_max]
            per_dist += np.bincount(inside, minlength=t_max + 1)
    N = np.cumsum(per_dist)
    return N[: min(deepest, t_max) + 1]


def _neighborhood_hll(g: Digraph, t_max: int, p: int, seed: int) -> np.ndarray:
    from ._kernels import propagate_max

    n = g.n
    salt = salt64(seed, "hll-salt")
    idx, rho = _hash_items(np.arange(n, dtype=np.uint64), salt, p)
    reg = np.zeros((n, 1 << p), dtype=np.uint8)
    reg[np.arange(n), idx] = rho
    N = [0.0]
    for _ in range(t_max):
        new = reg.copy()
        propagate_max(g.out_offsets, g.out_targets, reg, new)
        if np.array_equal(new, reg):
            break  # counters converged: N is flat from here on
        reg = new
        N.append(float(estimate_cardinality(reg).sum()) - n)
    # register growth makes the per-node estimates monotone; guard anyway
    return np.maximum.accumulate(np.array(N))


def hopcount_pmf_from_nf(N: np.ndarray) -> np.ndarray:
    """pmf(t) = (N(t) - N(t-1)) / N(stable), with N(0) = 0.

    An all-zero N (no finitely-separated pairs) yields an all-zero pmf.
    """
    N = np.asarray(N, dtype=np.float64)
    if N.size == 0 or N[0] != 0:
        raise NonMonotoneInput("N must start at N(0) = 0")
    diffs = np.diff(N, prepend=0.0)
    if np.any(diffs < 0):
        raise NonMonotoneInput("N must be nondecreasing")
    if N[-1] == 0:
        return np.zeros_like(N)
    return diffs / N[-1]


def histogram_from_nf(N: np.ndarray, n: int, mode: str) -> HopcountHistogram:
    N = np.asarray(N, dtype=np.float64)
    diffs = np.diff(N, prepend=0.0)
    if np.any(diffs < 0):
        raise NonMonotoneInput("N must be nondecreasing")
    return HopcountHistogram(
        counts=diffs,
        finite_pairs=float(N[-1]),
        total_pairs=float(n) * (n - 1),
        mode=mode,
    )


# ---------------------------------------------------------------------------
# Reachability statistics via the strongly-connected condensation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Condensation:
    labels: np.ndarray
    n_comp: int
    fwd_offsets: np.ndarray
    fwd_targets: np.ndarray
    rev_offsets: np.ndarray
    rev_targets: np.ndarray
    giant: int
    to_giant: np.ndarray    # comps with a path into the largest component
    from_giant: np.ndarray  # comps reachable from it

    @cached_property
    def _fwd_cache(self) -> dict:
        return {}

    @cached_property
    def _rev_cache(self) -> dict:
        return {}


def _dag_csr(n_comp: int, src: np.ndarray, dst: np.ndarray):
    offsets = np.zeros(n_comp + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n_comp), out=offsets[1:])
    order = np.argsort(src, kind="stable")
    return offsets, dst[order]


def _dag_reach(offsets, targets, start: int, n_comp: int) -> np.ndarray:
    seen = np.zeros(n_comp, dtype=bool)
    seen[start] = True
    frontier = np.array([start], dtype=np.int64)
    while frontier.size:
        nbrs = _expand(offsets, targets, frontier)
        if nbrs.size == 0:
            break
        new = np.unique(nbrs[~seen[nbrs]])
        if new.size == 0:
            break
        seen[new] = True
        frontier = new
    return seen


def condensation(g: Digraph) -> _Condensation:
    adj = csr_matrix(
        (np.ones(g.m, dtype=np.int8), g.out_targets, g.out_offsets),
        shape=(g.n, g.n),
    )
    n_comp, labels = connected_components(adj, directed=True, connection="strong")
    src, _ = g.edges()
    cs, cd = labels[src], labels[g.out_targets]
    mask = cs != cd
    keys = np.unique(cs[mask].astype(np.int64) * n_comp + cd[mask])
    dsrc = (keys // n_comp).astype(np.int64)
    ddst = (keys % n_comp).astype(np.int64)
    fwd_off, fwd_tgt = _dag_csr(n_comp, dsrc, ddst)
    rev_off, rev_tgt = _dag_csr(n_comp, ddst, dsrc)
    giant = int(np.bincount(labels).argmax())
    to_giant = _dag_reach(rev_off, rev_tgt, giant, n_comp)
    from_giant = _dag_reach(fwd_off, fwd_tgt, giant, n_comp)
    return _Condensation(labels, n_comp, fwd_off, fwd_tgt, rev_off, rev_tgt,
                         giant, to_giant, from_giant)


def _reaches(cond: _Condensation, ci: int, cj: int) -> bool:
    """Is component cj reachable from component ci in the condensation?"""
    if ci == cj:
        return True
    if cond.to_giant[ci] and cond.from_giant[cj]:
        return True
    # One side is detached from the giant component, so its relevant
    # reach set is small; search on that side and memoize.
    if not cond.to_giant[ci]:
        reach = cond._fwd_cache.get(ci)
        if reach is None:
            reach = _dag_reach(cond.fwd_offsets, cond.fwd_targets, ci, cond.n_comp)
            cond._fwd_cache[ci] = reach
        return bool(reach[cj])
    reach = cond._rev_cache.get(cj)
    if reach is None:
        reach = _dag_reach(cond.rev_offsets, cond.rev_targets, cj, cond.n_comp)
        cond._rev_cache[cj] = reach
    return bool(reach[ci])


def sample_finite_fraction(g: Digraph, num_pairs: int, seed: int) -> float:
    """Fraction of uniform ordered pairs (i != j) with a directed i->j path."""
    if g.n < 2:
        raise EmptyGraph("need at least two nodes to sample pairs")
    cond = condensation(g)
    rng = substream(seed, "finite-pairs")
    src = rng.integers(0, g.n, size=num_pairs)
    dst = rng.integers(0, g.n - 1, size=num_pairs)
    dst += (dst >= src).astype(dst.dtype)
    ci = cond.labels[src]
    cj = cond.labels[dst]
    finite = (ci == cj) | (cond.to_giant[ci] & cond.from_giant[cj])
    unresolved = np.flatnonzero(~finite)
    for k in unresolved:
        finite[k] = _reaches(cond, int(ci[k]), int(cj[k]))
    return float(finite.mean())


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------


def pairs_at_least(hist: HopcountHistogram) -> np.ndarray:
    """Complementary view: entry t counts finite pairs at distance >= t."""
    below = np.cumsum(hist.counts)
    return hist.finite_pairs - below + hist.counts


def save_histogram(hist: HopcountHistogram, csv_path: str | Path,
                   meta: dict | None = None,
                   sidecar_path: str | Path | None = None,
                   view: str = "exactly") -> None:
    """CSV of (t, count) plus a JSON sidecar with run metadata.

    view "exactly" writes pairs at distance exactly t; "atleast" writes
    the complementary cumulative count of finite pairs at distance >= t.
    """
    if view == "exactly":
        column = hist.counts
    elif view == "atleast":
        column = pairs_at_least(hist)
    else:
        raise ValueError(f"unknown view {view!r}")
    csv_path = Path(csv_path)
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "count"])
        for t, c in enumerate(column):
            if t == 0:
                continue
            writer.writerow([t, repr(float(c))])
    payload = {
        "mode": hist.mode,
        "view": view,
        "finite_pairs": hist.finite_pairs,
        "total_pairs": hist.total_pairs,
    }
    if meta:
        payload.update(meta)
    if sidecar_path is None:
        sidecar_path = csv_path.with_suffix(".json")
    Path(sidecar_path).write_text(json.dumps(payload, indent=2))
