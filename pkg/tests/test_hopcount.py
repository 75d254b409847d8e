import math

import numpy as np
import pytest
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra, floyd_warshall

from dcmlab.dcm_graph import _csr_from_edges, erase, pair_stubs
from dcmlab.degree_sequences import sample_iid_bidegree
from dcmlab.errors import EmptyEmpirical, NodeOutOfRange, NonMonotoneInput
from dcmlab.hopcount_engine import (
    HllCounter,
    HopcountHistogram,
    bfs_distance,
    bfs_distances_from,
    condensation,
    estimate_cardinality,
    histogram_from_nf,
    hopcount_pmf_from_nf,
    neighborhood_function,
    sample_finite_fraction,
    sample_hopcounts,
)


def graph_of(edges, n):
    src = np.array([e[0] for e in edges], dtype=np.int64)
    dst = np.array([e[1] for e in edges], dtype=np.int64)
    return _csr_from_edges(n, src, dst, is_multigraph=True)


def path3():
    return graph_of([(0, 1), (1, 2)], n=3)


def oracle_distances(g):
    src, dst = g.edges()
    adj = csr_matrix((np.ones(g.m), (src, dst)), shape=(g.n, g.n))
    return dijkstra(adj, unweighted=True)


class TestBfs:
    def test_path_graph(self):
        g = path3()
        assert bfs_distance(g, 0, 2) == 2
        assert bfs_distance(g, 2, 0) == math.inf
        assert bfs_distance(g, 0, 1) == 1

    def test_self_distance_zero(self):
        g = path3()
        for v in range(3):
            assert bfs_distance(g, v, v) == 0

    def test_out_of_range(self):
        g = path3()
        with pytest.raises(NodeOutOfRange):
            bfs_distance(g, 0, 5)
        with pytest.raises(NodeOutOfRange):
            bfs_distances_from(g, -1)

    def test_matches_floyd_warshall(self, pp_independent):
        # O(n^3) external oracle on small random instances
        for seed in range(10):
            seq = sample_iid_bidegree(pp_independent, 120, seed=seed)
            g = pair_stubs(seq, seed=seed + 50)
            src, dst = g.edges()
            adj = csr_matrix((np.ones(g.m), (src, dst)), shape=(g.n, g.n))
            fw = floyd_warshall(adj, directed=True, unweighted=True)
            for s in range(g.n):
                mine = bfs_distances_from(g, s).astype(float)
                mine[mine < 0] = np.inf
                mine[s] = 0
                assert np.array_equal(mine, fw[s])

    def test_reverse_direction(self):
        g = path3()
        dist = bfs_distances_from(g, 2, reverse=True)
        assert list(dist) == [2, 1, 0]


class TestSampledHopcounts:
    def test_complete_digraph(self):
        edges = [(i, j) for i in range(3) for j in range(3) if i != j]
        g = graph_of(edges, 3)
        hist = sample_hopcounts(g, 500, seed=1)
        assert hist.finite_pairs == 500
        assert hist.counts[1] == 500

    def test_no_edges(self):
        g = graph_of([], 4)
        hist = sample_hopcounts(g, 200, seed=2)
        assert hist.finite_pairs == 0
        assert hist.total_pairs == 200
        with pytest.raises(EmptyEmpirical):
            hist.pmf()

    def test_matches_exact_histogram(self, pp_independent):
        # multinomial bands around the all-pairs truth
        seq = sample_iid_bidegree(pp_independent, 1000, seed=3)
        g = pair_stubs(seq, seed=33)
        dists = oracle_distances(g)
        np.fill_diagonal(dists, np.inf)
        finite = dists[np.isfinite(dists)].astype(int)
        total = g.n * (g.n - 1)
        p_inf = 1.0 - finite.size / total
        exact_pmf = np.bincount(finite) / total
        # per-bin 3-sigma bands over ~16 bins have a few-percent joint
        # false-alarm rate; seed frozen from a pilot (worst bin 2.1 sigma)
        M = 40_000
        hist = sample_hopcounts(g, M, seed=5)
        sampled = np.zeros(exact_pmf.size)
        upto = min(hist.counts.size, exact_pmf.size)
        sampled[:upto] = hist.counts[:upto] / M
        for t in range(1, exact_pmf.size):
            sigma = math.sqrt(exact_pmf[t] * (1 - exact_pmf[t]) / M)
            assert abs(sampled[t] - exact_pmf[t]) <= 3 * sigma + 1e-12, f"t={t}"
        sigma_inf = math.sqrt(p_inf * (1 - p_inf) / M)
        sampled_inf = 1.0 - hist.finite_pairs / M
        assert abs(sampled_inf - p_inf) <= 3 * sigma_inf

    def test_deterministic(self, pp_independent):
        seq = sample_iid_bidegree(pp_independent, 500, seed=5)
        g = pair_stubs(seq, seed=55)
        a = sample_hopcounts(g, 1000, seed=6)
        b = sample_hopcounts(g, 1000, seed=6)
        assert np.array_equal(a.counts, b.counts)


class TestNeighborhoodFunction:
    def test_path_graph_exact(self):
        N = neighborhood_function(path3(), "exact", t_max=10)
        assert list(N) == [0, 2, 3]

    def test_empty_graph(self):
        N = neighborhood_function(graph_of([], 4), "exact", t_max=5)
        assert list(N) == [0]

    def test_exact_equals_all_pairs_oracle(self, pp_independent, zipf_equal):
        for law, seed in ((pp_independent, 0), (zipf_equal, 1)):
            seq = sample_iid_bidegree(law, 150, seed=seed)
            g = pair_stubs(seq, seed=seed + 9)
            N = neighborhood_function(g, "exact", t_max=64)
            dists = oracle_distances(g)
            np.fill_diagonal(dists, np.inf)
            finite = dists[np.isfinite(dists)].astype(int)
            expect = np.cumsum(np.bincount(finite)[1:])
            assert np.array_equal(N[1:], expect)

    def test_truncation_drops_deeper_pairs(self):
        # distances beyond t_max must not be folded into the last bin
        g = graph_of([(0, 1), (1, 2), (2, 3)], n=4)
        N = neighborhood_function(g, "exact", t_max=2)
        assert list(N) == [0, 3, 5]  # pairs at distance 3 excluded

    def test_monotone_and_stable(self, pp_independent):
        seq = sample_iid_bidegree(pp_independent, 300, seed=7)
        g = pair_stubs(seq, seed=77)
        N = neighborhood_function(g, "exact", t_max=64)
        assert np.all(np.diff(N) >= 0)
        dists = oracle_distances(g)
        np.fill_diagonal(dists, np.inf)
        assert N[-1] == np.isfinite(dists).sum()

    def test_hll_within_five_percent(self, pp_independent):
        # estimator accuracy gate at p = 12 on a 1000-node instance
        seq = sample_iid_bidegree(pp_independent, 1000, seed=8)
        g = pair_stubs(seq, seed=88)
        exact = neighborhood_function(g, "exact", t_max=64).astype(float)
        est = neighborhood_function(g, "hll", t_max=64, p=12, seed=9)
        upto = min(exact.size, est.size)
        for t in range(1, upto):
            if exact[t] >= 10_000:
                assert abs(est[t] - exact[t]) / exact[t] < 0.05, f"t={t}"
        assert abs(est[-1] - exact[-1]) / exact[-1] < 0.05

    def test_hll_deterministic(self, pp_independent):
        seq = sample_iid_bidegree(pp_independent, 400, seed=10)
        g = pair_stubs(seq, seed=100)
        a = neighborhood_function(g, "hll", t_max=32, p=10, seed=11)
        b = neighborhood_function(g, "hll", t_max=32, p=10, seed=11)
        assert np.array_equal(a, b)

    def test_hopcount_invariant_under_erase(self, pp_independent):
        for seed in range(3):
            seq = sample_iid_bidegree(pp_independent, 400, seed=seed)
            g = pair_stubs(seq, seed=seed + 1000)
            assert np.array_equal(
                neighborhood_function(g, "exact", t_max=64),
                neighborhood_function(erase(g), "exact", t_max=64),
            )


class TestPmfFromNf:
    def test_path_graph(self):
        pmf = hopcount_pmf_from_nf(np.array([0, 2, 3]))
        assert pmf == pytest.approx([0.0, 2 / 3, 1 / 3])

    def test_all_zero(self):
        pmf = hopcount_pmf_from_nf(np.array([0.0, 0.0]))
        assert np.all(pmf == 0.0)

    def test_rejects_decreasing(self):
        with pytest.raises(NonMonotoneInput):
            hopcount_pmf_from_nf(np.array([0, 5, 3]))
        with pytest.raises(NonMonotoneInput):
            hopcount_pmf_from_nf(np.array([1, 2, 3]))

    def test_matches_exact_histogram(self, pp_independent):
        # the two exact computations are the same numbers
        seq = sample_iid_bidegree(pp_independent, 500, seed=12)
        g = pair_stubs(seq, seed=120)
        N = neighborhood_function(g, "exact", t_max=64)
        pmf = hopcount_pmf_from_nf(N)
        dists = oracle_distances(g)
        np.fill_diagonal(dists, np.inf)
        finite = dists[np.isfinite(dists)].astype(int)
        expect = np.bincount(finite) / finite.size
        assert pmf == pytest.approx(expect[: pmf.size], abs=1e-12)


class TestHllCounter:
    def test_estimate_small_sets_linear_regime(self):
        c = HllCounter(p=12, salt=1)
        c.add(np.arange(300))
        assert abs(c.estimate() - 300) / 300 < 0.05

    def test_estimate_large_set(self):
        c = HllCounter(p=12, salt=2)
        c.add(np.arange(80_000))
        assert abs(c.estimate() - 80_000) / 80_000 < 0.05

    def test_empty_estimates_zero(self):
        assert HllCounter(p=8).estimate() == 0.0

    def test_merge_laws(self):
        rng = np.random.default_rng(3)
        counters = []
        for _ in range(3):
            c = HllCounter(p=8, salt=9)
            c.add(rng.integers(0, 10_000, size=500).astype(np.uint64))
            counters.append(c)
        a, b, c = counters
        assert np.array_equal(a.merge(b).registers, b.merge(a).registers)
        assert np.array_equal(
            a.merge(b).merge(c).registers, a.merge(b.merge(c)).registers
        )
        assert np.array_equal(a.merge(a).registers, a.registers)

    def test_merge_matches_union(self):
        a = HllCounter(p=10, salt=5)
        b = HllCounter(p=10, salt=5)
        u = HllCounter(p=10, salt=5)
        a.add(np.arange(0, 3000))
        b.add(np.arange(2000, 6000))
        u.add(np.arange(0, 6000))
        assert np.array_equal(a.merge(b).registers, u.registers)

    def test_precision_mismatch(self):
        with pytest.raises(ValueError):
            HllCounter(p=8).merge(HllCounter(p=9))

    def test_register_monotone_growth_gives_monotone_estimate(self):
        c = HllCounter(p=10, salt=6)
        prev = 0.0
        for block in range(10):
            c.add(np.arange(block * 1000, (block + 1) * 1000))
            est = c.estimate()
            assert est >= prev
            prev = est


class TestFiniteFraction:
    def test_reachability_matches_oracle(self, pp_independent):
        seq = sample_iid_bidegree(pp_independent, 250, seed=13)
        g = pair_stubs(seq, seed=130)
        dists = oracle_distances(g)
        cond = condensation(g)
        from dcmlab.hopcount_engine import _reaches

        rng = np.random.default_rng(0)
        for _ in range(400):
            i, j = rng.integers(0, g.n, size=2)
            if i == j:
                continue
            expect = bool(np.isfinite(dists[i, j]))
            got = _reaches(cond, int(cond.labels[i]), int(cond.labels[j]))
            assert got == expect, (i, j)

    def test_sampled_fraction(self, pp_independent):
        seq = sample_iid_bidegree(pp_independent, 400, seed=14)
        g = pair_stubs(seq, seed=140)
        dists = oracle_distances(g)
        np.fill_diagonal(dists, np.inf)
        exact = np.isfinite(dists).mean() * g.n / (g.n - 1)
        M = 30_000
        frac = sample_finite_fraction(g, M, seed=15)
        sigma = math.sqrt(exact * (1 - exact) / M)
        assert abs(frac - exact) <= 3 * sigma


class TestHistogramContainer:
    def test_combine(self):
        a = HopcountHistogram(np.array([0.0, 2, 1]), 3, 6, "exact_all_pairs")
        b = HopcountHistogram(np.array([0.0, 1, 1, 2]), 4, 6, "exact_all_pairs")
        c = HopcountHistogram.combine([a, b])
        assert list(c.counts) == [0, 3, 2, 2]
        assert c.finite_pairs == 7
        assert c.total_pairs == 12

    def test_cdf(self):
        h = HopcountHistogram(np.array([0.0, 2, 2]), 4, 10, "sampled_pairs")
        assert h.cdf() == pytest.approx([0, 0.5, 1.0])

    def test_from_nf(self):
        h = histogram_from_nf(np.array([0.0, 2, 3]), 3, "exact_all_pairs")
        assert list(h.counts) == [0, 2, 1]
        assert h.finite_pairs == 3
        assert h.total_pairs == 6


class TestEstimatorInternals:
    def test_matrix_and_counter_agree(self):
        # one code path: a counter row must estimate like the matrix row
        c = HllCounter(p=10, salt=7)
        c.add(np.arange(5000))
        assert estimate_cardinality(c.registers[None, :])[0] == c.estimate()


class TestAtLeastView:
    def test_complementary_counts(self):
        h = HopcountHistogram(np.array([0.0, 4, 3, 1]), 8, 20, "exact_all_pairs")
        from dcmlab.hopcount_engine import pairs_at_least

        ge = pairs_at_least(h)
        # >= t over finite pairs: t=1 -> all 8, t=2 -> 4, t=3 -> 1
        assert list(ge) == [8, 8, 4, 1]

    def test_save_histogram_views(self, tmp_path):
        from dcmlab.hopcount_engine import save_histogram

        h = HopcountHistogram(np.array([0.0, 4, 3, 1]), 8, 20, "exact_all_pairs")
        save_histogram(h, tmp_path / "ex.csv", view="exactly")
        save_histogram(h, tmp_path / "ge.csv", view="atleast")
        ex = [r.split(",") for r in (tmp_path / "ex.csv").read_text().splitlines()[1:]]
        ge = [r.split(",") for r in (tmp_path / "ge.csv").read_text().splitlines()[1:]]
        assert [float(c) for _, c in ex] == [4, 3, 1]
        assert [float(c) for _, c in ge] == [8, 4, 1]
        import json

        meta = json.loads((tmp_path / "ge.json").read_text())
        assert meta["view"] == "atleast"
