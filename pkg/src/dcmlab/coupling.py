"""Joint construction of the graph exploration and its limit tree.

The breadth-first exploration of a stub-pairing graph assigns to each
frontier stub an offspring count drawn from a state-dependent law: the
degree of the inactive node the stub lands on, weighted by that node's
unpaired opposite-side stubs, with the mass of active-node stubs folded
into offspring value zero.  Drawing that value and a limit-law value
through a single shared uniform per stub (inverse-CDF on both sides)
couples the exploration to a delayed branching process generation by
generation.

The state-dependent law is never materialized per stub.  A Fenwick tree
over nodes sorted by the offspring-value degree supports the quantile
query in O(log n) and node activation in O(log n); the active-stub mass
is a scalar maintained through the identity V = L - sum(inactive
opposite degrees) - traversed.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .branching import GWSpec
from .degree_sequences import BiDegreeSequence, sample_iid_bidegree
from .errors import ExhaustedStubs, InvalidLaw, OutOfValidityWindow, ParameterOutOfRange
from .laws import DiscreteLaw, JointDegreeLaw
from .rng import salt64, substream


def pseudo_inverse_sample(cdf: np.ndarray, u: float) -> int:
    """Generalized inverse of a step CDF on 0, 1, 2, ...:

        F^{-1}(u) = inf{ x : F(x) >= u },

    evaluated as the smallest index k with cdf[k] >= u.  A u beyond the
    retained total (possible for truncated laws) clamps to the last
    retained value.
    """
    return int(min(np.searchsorted(cdf, u, side="left"), len(cdf) - 1))


# ---------------------------------------------------------------------------
# Weighted sampling with depletion
# ---------------------------------------------------------------------------


class Fenwick:
    """Prefix sums with point updates and lower-bound search, 1-based."""

    def __init__(self, weights: np.ndarray):
        w = np.asarray(weights, dtype=np.int64)
        self.size = w.size
        tree = np.zeros(self.size + 1, dtype=np.int64)
        tree[1:] = w
        step = 1
        while step <= self.size:
            idx = np.arange(step, self.size + 1 - step, 2 * step)
            tree[idx + step] += tree[idx]
            step *= 2
        self.tree = tree
        self.total = int(w.sum())
        self._top_bit = 1 << max(0, self.size.bit_length() - 1)

    def add(self, pos: int, delta: int) -> None:
        """Add delta at 0-based position pos."""
        i = pos + 1
        while i <= self.size:
            self.tree[i] += delta
            i += i & (-i)
        self.total += delta

    def prefix(self, count: int) -> int:
        """Sum of the first ``count`` weights."""
        s = 0
        i = count
        while i > 0:
            s += self.tree[i]
            i -= i & (-i)
        return int(s)

    def search(self, target: float) -> int:
        """Smallest 0-based index whose prefix sum reaches target.

        Requires 0 < target <= total; zero-weight entries are never
        returned because the scan stops at the first index that reaches
        the target.
        """
        pos = 0
        rem = target
        bit = self._top_bit
        while bit:
            nxt = pos + bit
            if nxt <= self.size and self.tree[nxt] < rem:
                rem -= self.tree[nxt]
                pos = nxt
            bit >>= 1
        return pos  # 0-based: pos entries lie strictly before the hit


class DepletionSampler:
    """Nodes bucketed by an integer key, sampled by integer weight.

    Sampling returns nodes in proportion to their weight; buckets are
    contiguous because nodes are kept sorted by key, so a single Fenwick
    search yields both the key (the offspring value) and the node.
    """

    def __init__(self, keys: np.ndarray, weights: np.ndarray):
        keys = np.asarray(keys, dtype=np.int64)
        order = np.argsort(keys, kind="stable")
        self.nodes = order
        self.keys_sorted = keys[order]
        self.rank = np.empty(keys.size, dtype=np.int64)
        self.rank[order] = np.arange(keys.size)
        self._weights = np.asarray(weights, dtype=np.int64)[order].copy()
        self.fen = Fenwick(self._weights)
        self.zero_end = int(np.searchsorted(self.keys_sorted, 0, side="right"))

    @property
    def total(self) -> int:
        return self.fen.total

    def zero_bucket_mass(self) -> int:
        return self.fen.prefix(self.zero_end)

    def remove(self, node: int) -> int:
        r = self.rank[node]
        w = int(self._weights[r])
        if w:
            self.fen.add(r, -w)
            self._weights[r] = 0
        return w

    def search(self, target: float) -> tuple[int, int]:
        """(node, key) of the weight-proportional hit for target mass."""
        r = self.fen.search(target)
        return int(self.nodes[r]), int(self.keys_sorted[r])

    def node_at_rank(self, r: int) -> tuple[int, int]:
        return int(self.nodes[r]), int(self.keys_sorted[r])


# ---------------------------------------------------------------------------
# Graph-side exploration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExplorationState:
    """Snapshot of one direction of the stub exploration."""

    direction: str
    active: np.ndarray            # True once a node has been uncovered
    traversed: int                # stubs traversed so far (T)
    v_opposite: int               # unpaired opposite-side stubs on active nodes
    L_n: int
    frontier_parents: np.ndarray | None = None
    frontier_child_index: np.ndarray | None = None

    def check_v_identity(self, seq: BiDegreeSequence) -> bool:
        opp = seq.d_minus if self.direction == "+" else seq.d_plus
        expected = seq.L_n - int(opp[~self.active].sum()) - self.traversed
        return expected == self.v_opposite


def dynamic_offspring_law(state: ExplorationState, seq: BiDegreeSequence) -> DiscreteLaw:
    """Materialize the state-dependent offspring law of the next stub.

    h(t) for t >= 1 carries the opposite-degree-weighted count of
    inactive nodes with value-degree t; the active-stub mass V joins
    t = 0.  Normalizer is the number of unpaired stubs, L - T.
    """
    if state.traversed >= seq.L_n:
        raise ExhaustedStubs("all stubs already traversed")
    key = seq.d_plus if state.direction == "+" else seq.d_minus
    wgt = seq.d_minus if state.direction == "+" else seq.d_plus
    inactive = ~state.active
    h = np.bincount(key[inactive], weights=wgt[inactive].astype(np.float64),
                    minlength=1)
    h[0] += state.v_opposite
    return DiscreteLaw(h / (seq.L_n - state.traversed))


class GraphSideExplorer:
    """Sequential stub exploration of one direction, driven by uniforms.

    ``step`` consumes one uniform and traverses one frontier stub: the
    returned value is the number of newly discovered stubs (0 when the
    stub lands on an already-active node or on an inactive node with no
    value-side stubs).
    """

    def __init__(self, seq: BiDegreeSequence, direction: str):
        if direction not in ("+", "-"):
            raise InvalidLaw(f"direction must be '+' or '-', got {direction!r}")
        self.seq = seq
        self.direction = direction
        key = seq.d_plus if direction == "+" else seq.d_minus
        self.weight = seq.d_minus if direction == "+" else seq.d_plus
        self.key = key
        self.sampler = DepletionSampler(key, self.weight)
        self.L = seq.L_n
        self.T = 0
        self.V = 0
        self.active = np.zeros(seq.n, dtype=bool)
        self.active_dd_sum = 0  # sum of D+ D- over active nodes

    def _activate(self, node: int) -> None:
        self.active[node] = True
        self.sampler.remove(node)
        self.active_dd_sum += int(self.seq.d_plus[node]) * int(self.seq.d_minus[node])

    def root_step(self, u: float) -> int:
        """Uncover a uniformly chosen node; returns its value-side degree.

        The node at rank ceil(u*n)-1 of the key-sorted order realizes the
        empirical-law quantile at u and is uniform within its degree class.
        """
        idx = min(self.seq.n - 1, max(0, math.ceil(u * self.seq.n) - 1))
        node, deg = self.sampler.node_at_rank(idx)
        self._activate(node)
        self.V += int(self.weight[node])
        return deg

    def step(self, u: float) -> int:
        if self.T >= self.L:
            raise ExhaustedStubs("all stubs already traversed")
        target = u * (self.L - self.T)
        p0 = self.sampler.zero_bucket_mass()
        if target <= p0 + self.V:
            if target <= p0:
                node, _ = self.sampler.search(target)
                self._activate(node)
                self.V += int(self.weight[node]) - 1
            else:
                self.V -= 1  # an unpaired stub of an active node is consumed
            self.T += 1
            return 0
        node, deg = self.sampler.search(target - self.V)
        self._activate(node)
        self.V += int(self.weight[node]) - 1
        self.T += 1
        return deg

    def state(self, frontier_parents=None, frontier_child_index=None) -> ExplorationState:
        return ExplorationState(
            direction=self.direction,
            active=self.active.copy(),
            traversed=self.T,
            v_opposite=self.V,
            L_n=self.L,
            frontier_parents=frontier_parents,
            frontier_child_index=frontier_child_index,
        )


# ---------------------------------------------------------------------------
# The coupled run
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoupledTrace:
    """Per-generation record of the coupled pair of processes.

    For every generation m >= 1, z[m-1] counts graph-side labels,
    z_hat[m-1] tree-side labels, and the deficits count labels present on
    one side only; by construction
    z_hat - deficit_tree_only <= z <= z_hat + deficit_graph_only.
    """

    direction: str
    n: int
    L_n: int
    seed: int
    z: np.ndarray
    z_hat: np.ndarray
    deficit_tree_only: np.ndarray
    deficit_graph_only: np.ndarray
    t_start: np.ndarray           # stubs traversed when each generation begins
    active_dd_start: np.ndarray   # sum of D+D- over active nodes at that moment
    exhausted: bool
    discrepancies: np.ndarray | None = None  # (T, |chi_hat - chi|) per graph stub

    @property
    def first_divergence(self) -> int | None:
        nz = np.flatnonzero((self.deficit_tree_only > 0) | (self.deficit_graph_only > 0))
        return int(nz[0]) + 1 if nz.size else None

    def generations(self) -> int:
        return self.z.size


_tree_quantile = pseudo_inverse_sample


def coupled_exploration(
    seq: BiDegreeSequence,
    law: GWSpec,
    direction: str,
    k_max: int,
    seed: int,
    record_discrepancies: bool = False,
) -> CoupledTrace:
    """Run graph exploration and the limit tree off shared uniforms.

    Labels are traversed in lexicographic order within each generation;
    each label consumes exactly one uniform, used by whichever of the two
    processes contains it (the root compares the empirical degree law to
    the limit root law, later stubs the dynamic law to the limit
    offspring law).  If the graph runs out of stubs the graph side stops
    and is flagged; the tree side continues to k_max.
    """
    if k_max < 1:
        raise InvalidLaw("need k_max >= 1")
    if seq.n == 0:
        raise InvalidLaw("empty sequence")
    rng = substream(seed, "coupled-exploration", direction)
    explorer = GraphSideExplorer(seq, direction)
    g_cdf = law.g.cdf
    f_cdf = law.f.cdf

    def draw() -> float:
        u = rng.random()
        while u == 0.0:
            u = rng.random()
        return u

    z = np.zeros(k_max, dtype=np.int64)
    z_hat = np.zeros(k_max, dtype=np.int64)
    d_tree = np.zeros(k_max, dtype=np.int64)
    d_graph = np.zeros(k_max, dtype=np.int64)
    t_start = np.zeros(k_max, dtype=np.int64)
    dd_start = np.zeros(k_max, dtype=np.int64)
    disc: list[tuple[int, int]] = []
    exhausted = False

    u0 = draw()
    chi0 = explorer.root_step(u0)
    chihat0 = _tree_quantile(g_cdf, u0)
    # generation entries as (in_graph, in_tree) flag pairs in label order
    gen = [(j < chi0, j < chihat0) for j in range(max(chi0, chihat0))]
    z[0] = chi0
    z_hat[0] = chihat0
    d_tree[0] = max(chihat0 - chi0, 0)
    d_graph[0] = max(chi0 - chihat0, 0)

    for m in range(1, k_max):
        t_start[m - 1] = explorer.T
        dd_start[m - 1] = explorer.active_dd_sum
        nxt: list[tuple[bool, bool]] = []
        zg = zt = dt = dg = 0
        for in_g, in_t in gen:
            u = draw()
            chi = 0
            if in_g and not exhausted:
                if explorer.T >= explorer.L:
                    exhausted = True  # graph stub dropped; tree continues
                else:
                    chi = explorer.step(u)
                    if record_discrepancies:
                        disc.append(
                            (explorer.T - 1, abs(_tree_quantile(f_cdf, u) - chi))
                        )
            chihat = _tree_quantile(f_cdf, u) if in_t else 0
            zg += chi
            zt += chihat
            dt += max(chihat - chi, 0)
            dg += max(chi - chihat, 0)
            for j in range(max(chi, chihat)):
                nxt.append((j < chi, j < chihat))
        z[m] = zg
        z_hat[m] = zt
        d_tree[m] = dt
        d_graph[m] = dg
        gen = nxt
        if not gen:
            break
    t_start[k_max - 1] = explorer.T
    dd_start[k_max - 1] = explorer.active_dd_sum

    return CoupledTrace(
        direction=direction,
        n=seq.n,
        L_n=seq.L_n,
        seed=seed,
        z=z,
        z_hat=z_hat,
        deficit_tree_only=d_tree,
        deficit_graph_only=d_graph,
        t_start=t_start,
        active_dd_start=dd_start,
        exhausted=exhausted,
        discrepancies=np.asarray(disc, dtype=np.int64) if record_discrepancies else None,
    )


# ---------------------------------------------------------------------------
# Coupling quality measurement
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CouplingFailureRates:
    freq_any_deficit_exceeds: float | None
    freq_ratio_bound_fails: float | None
    reps: int
    exhausted_runs: int
    k: int
    gamma: float
    n: int


def admissible_k(n: int, mu: float, delta: float) -> int:
    """Largest generation count inside the coupling guarantee window."""
    return max(1, int(math.floor((1.0 - delta) * math.log(n) / math.log(mu))))


def coupling_failure_rate(
    law: JointDegreeLaw,
    n: int,
    delta: float,
    gamma: float,
    reps: int,
    seed: int,
    k: int | None = None,
    direction: str = "+",
    eps: float = 0.1,
    kappa: float | None = None,
    iid_delta: float | None = None,
) -> CouplingFailureRates:
    """Empirical failure frequency of the per-generation coupling bounds.

    Over ``reps`` fresh sequences and couplings, measures how often some
    generation m <= k has a one-sided label deficit above z_hat_m *
    n^-gamma, and how often the two-sided sandwich
    z_hat (1 - n^-gamma) <= z <= z_hat (1 + n^-gamma) breaks.
    """
    if kappa is None:
        kappa = law.default_kappa
    if not 0 < delta < 1:
        raise ParameterOutOfRange("delta must be in (0, 1)")
    if not 0 < gamma < min(delta * kappa, eps):
        raise ParameterOutOfRange(
            f"gamma must be in (0, min(delta*kappa, eps)) = "
            f"(0, {min(delta * kappa, eps):.4g})"
        )
    k_cap = admissible_k(n, law.mu, delta)
    if k is None:
        k = k_cap
    elif k > k_cap:
        raise ParameterOutOfRange(f"k={k} exceeds the admissible window {k_cap}")
    if reps == 0:
        return CouplingFailureRates(None, None, 0, 0, k, gamma, n)
    spec = GWSpec.from_joint_law(law, direction)
    tol = float(n) ** (-gamma)
    deficit_fails = 0
    sandwich_fails = 0
    exhausted = 0
    for r in range(reps):
        seq = sample_iid_bidegree(law, n, seed=salt64(seed, "seq", r), delta=iid_delta)
        trace = coupled_exploration(seq, spec, direction, k,
                                    seed=salt64(seed, "run", r))
        exhausted += int(trace.exhausted)
        zh = trace.z_hat.astype(np.float64)
        bound = zh * tol
        if np.any(trace.deficit_tree_only > bound) or np.any(
            trace.deficit_graph_only > bound
        ):
            deficit_fails += 1
        lo = zh * (1.0 - tol)
        hi = zh * (1.0 + tol)
        if np.any(trace.z < lo) or np.any(trace.z > hi):
            sandwich_fails += 1
    return CouplingFailureRates(
        freq_any_deficit_exceeds=deficit_fails / reps,
        freq_ratio_bound_fails=sandwich_fails / reps,
        reps=reps,
        exhausted_runs=exhausted,
        k=k,
        gamma=gamma,
        n=n,
    )


# ---------------------------------------------------------------------------
# Error-function diagnostic
# ---------------------------------------------------------------------------


def error_bound_E(
    t: int,
    seq: BiDegreeSequence,
    inactive: np.ndarray,
    nu: float,
    mu: float,
    eps: float,
) -> float:
    """Mean-discrepancy bound for the coupled pair at traversal time t:

        E(t) = 4/(nu n) * sum_active D+ D-  +  4 mu t / (nu n)  +  3 n^-eps,

    valid while t <= (nu/2) n.
    """
    n = seq.n
    if t > 0.5 * nu * n:
        raise OutOfValidityWindow(f"t={t} outside the window t <= nu*n/2")
    active = ~np.asarray(inactive, dtype=bool)
    dd = float((seq.d_plus[active] * seq.d_minus[active]).sum())
    return 4.0 * dd / (nu * n) + 4.0 * mu * t / (nu * n) + 3.0 * float(n) ** (-eps)


def error_overlay(trace: CoupledTrace, seq: BiDegreeSequence, nu: float,
                  mu: float, eps: float) -> np.ndarray:
    """E(t) evaluated at each generation's starting traversal time, from
    the activity sums recorded in the trace."""
    n = trace.n
    return (
        4.0 * trace.active_dd_start / (nu * n)
        + 4.0 * mu * trace.t_start / (nu * n)
        + 3.0 * float(n) ** (-eps)
    )


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------


def save_trace(trace: CoupledTrace, csv_path: str | Path,
               overlay: np.ndarray | None = None,
               meta: dict | None = None,
               sidecar_path: str | Path | None = None) -> None:
    csv_path = Path(csv_path)
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["m", "z", "z_hat", "deficit_tree_only", "deficit_graph_only"]
        if overlay is not None:
            header.append("error_bound")
        writer.writerow(header)
        for i in range(trace.z.size):
            row = [i + 1, int(trace.z[i]), int(trace.z_hat[i]),
                   int(trace.deficit_tree_only[i]), int(trace.deficit_graph_only[i])]
            if overlay is not None:
                row.append(repr(float(overlay[i])))
            writer.writerow(row)
    payload = {
        "direction": trace.direction,
        "n": trace.n,
        "L_n": trace.L_n,
        "seed": trace.seed,
        "exhausted": trace.exhausted,
        "first_divergence": trace.first_divergence,
    }
    if meta:
        payload.update(meta)
    if sidecar_path is None:
        sidecar_path = csv_path.with_suffix(".json")
    Path(sidecar_path).write_text(json.dumps(payload, indent=2))
