"""Acceptance criteria, one test per criterion, one printed line each.

Desk scale by default (n = 1e5 where applicable, a few minutes total);
set DCMLAB_FULL_SCALE=1 for the n = 1e6 / 20-graph protocol of criteria
1-3 (roughly half an hour).
"""

import itertools
import math
import os

import numpy as np
import pytest
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra, floyd_warshall

import dcmlab as d
from dcmlab.branching import GWSpec
from dcmlab.hopcount_engine import HopcountHistogram, histogram_from_nf
from dcmlab.laws import DiscreteLaw, GeometricMarginal, PoissonMarginal
from dcmlab.rng import salt64
from dcmlab.theory_compare import theoretical_cdf_curve

FULL = os.environ.get("DCMLAB_FULL_SCALE", "") == "1"


def report(criterion: str, passed: bool, detail: str) -> None:
    print(f"\n[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")
    assert passed, f"{criterion}: {detail}"


def pooled_histogram(law, n, graphs, seed, p, t_max=128):
    hists = []
    for i in range(graphs):
        seq = d.sample_iid_bidegree(law, n, seed=salt64(seed, "seq", i))
        g = d.pair_stubs(seq, seed=salt64(seed, "pair", i))
        N = d.neighborhood_function(g, "hll", t_max=t_max, p=p,
                                    seed=salt64(seed, "nf", i))
        hists.append(histogram_from_nf(N, n, "hll_estimate"))
    return HopcountHistogram.combine(hists)


@pytest.fixture(scope="module")
def pp_law():
    return d.parse_law("pp-independent:1.5,1")


@pytest.fixture(scope="module")
def zipf_law():
    return d.parse_law("zipf-equal:3.5,1000")


def test_criterion_1_d_regular_reproduction():
    # closed-form limit vs counter-based measurement, 3-regular law
    n, graphs, bound = (10**6, 20, 5e-3) if FULL else (10**5, 10, 1e-2)
    law = d.JointDegreeLaw.d_regular(3)
    hist = pooled_histogram(law, n, graphs, seed=101, p=10)
    cdf_emp = hist.cdf()
    shift = d.floor_log(n, 3.0)
    ks = max(
        abs(cdf_emp[t] - d.d_regular_hopcount_cdf(3, n, t - shift))
        for t in range(1, cdf_emp.size)
    )
    report(
        "criterion 1 (d-regular vs closed form)",
        ks <= bound,
        f"n={n}, {graphs} graphs, precision p=10: KS={ks:.2e} <= {bound:.0e}",
    )


def test_criterion_2_poisson_pareto(pp_law):
    n, graphs = (10**6, 20) if FULL else (10**5, 10)
    hist = pooled_histogram(pp_law, n, graphs, seed=202, p=10)
    theory = d.build_theoretical_law(pp_law, n, pool_size=10**5,
                                     generations=30, seed=303)
    ks = d.ks_distance(hist, theory)
    if FULL:
        passed, band = 0.03 <= ks <= 0.09, "[0.03, 0.09]"
    else:
        passed, band = ks <= 0.12, "<= 0.12"
    report(
        "criterion 2 (independent Poisson-Pareto)",
        passed,
        f"n={n}, {graphs} graphs, pool 1e5 x 30: KS={ks:.4f} in {band}",
    )


def test_criterion_3_dependent_zipf(zipf_law):
    n, graphs = (10**6, 20) if FULL else (10**5, 10)
    hist = pooled_histogram(zipf_law, n, graphs, seed=404, p=10)
    theory = d.build_theoretical_law(zipf_law, n, pool_size=10**5,
                                     generations=30, seed=505)
    ks = d.ks_distance(hist, theory)
    if FULL:
        passed, band = 0.01 <= ks <= 0.07, "[0.01, 0.07]"
    else:
        passed, band = ks <= 0.12, "<= 0.12"
    report(
        "criterion 3 (dependent Zipf)",
        passed,
        f"n={n}, {graphs} graphs, pool 1e5 x 30: KS={ks:.4f} in {band}",
    )


def test_criterion_4_connectivity_probability(pp_law):
    # finite-pair fraction vs the product of survival probabilities
    n, graphs, pairs = 10**5, 10, 10**5
    spec_p = GWSpec.from_joint_law(pp_law, "+")
    spec_m = GWSpec.from_joint_law(pp_law, "-")
    s_plus = d.survival_probability(spec_p.g, d.extinction_probability(spec_p.f))
    s_minus = d.survival_probability(spec_m.g, d.extinction_probability(spec_m.f))
    target = d.prob_finite(s_plus, s_minus)
    fracs = []
    for i in range(graphs):
        seq = d.sample_iid_bidegree(pp_law, n, seed=salt64(606, "seq", i))
        g = d.pair_stubs(seq, seed=salt64(606, "pair", i))
        fracs.append(d.sample_finite_fraction(g, pairs, seed=salt64(606, "pp", i)))
    frac = float(np.mean(fracs))
    diff = abs(frac - target)
    report(
        "criterion 4 (connectivity probability)",
        diff <= 0.02,
        f"n={n}, {graphs} graphs x {pairs} pairs: finite fraction {frac:.4f} "
        f"vs s+s- = {target:.4f}, |diff| = {diff:.4f} <= 0.02",
    )


def test_criterion_5_coupling_regime(pp_law):
    # admissible window: delta = 0.5, gamma = 0.03 < min(delta*kappa, eps)
    # = min(0.2, 0.1), k = floor((1-delta) log_mu n)
    sizes = (10**3, 10**4, 10**5)
    freqs = []
    for n in sizes:
        rates = d.coupling_failure_rate(pp_law, n, delta=0.5, gamma=0.03,
                                        reps=500, seed=707)
        freqs.append(rates.freq_ratio_bound_fails)
    nonincreasing = all(a >= b for a, b in zip(freqs, freqs[1:]))
    passed = nonincreasing and freqs[-1] <= 0.05
    report(
        "criterion 5 (coupling sandwich failure rate)",
        passed,
        f"gamma=0.03, 500 reps: failures {[round(f, 3) for f in freqs]} "
        f"across n={list(sizes)}; nonincreasing={nonincreasing}, "
        f"final {freqs[-1]:.3f} <= 0.05",
    )


def test_criterion_6a_exact_nf_equals_floyd_warshall(pp_law):
    graphs, worst_n = 50, 200
    rng = np.random.default_rng(808)
    for i in range(graphs):
        n = int(rng.integers(40, worst_n + 1))
        seq = d.sample_iid_bidegree(pp_law, n, seed=salt64(809, "seq", i))
        g = d.pair_stubs(seq, seed=salt64(809, "pair", i))
        src, dst = g.edges()
        adj = csr_matrix((np.ones(g.m), (src, dst)), shape=(n, n))
        fw = floyd_warshall(adj, directed=True, unweighted=True)
        np.fill_diagonal(fw, np.inf)
        finite = fw[np.isfinite(fw)].astype(int)
        expect = np.cumsum(np.bincount(finite, minlength=2)[1:])
        N = d.neighborhood_function(g, "exact", t_max=128)
        assert np.array_equal(N[1:], expect), f"graph {i}"
    report(
        "criterion 6a (exact neighborhood function vs Floyd-Warshall)",
        True,
        f"{graphs} random graphs, n <= {worst_n}: exact match",
    )


def test_criterion_6b_tail_estimator_vs_bfs(pp_law):
    results = []
    for n, k, graphs, reps, pairs in ((50, 2, 300, 10_000, None),
                                      (1000, 3, 15, 4000, 1500)):
        seq = d.sample_iid_bidegree(pp_law, n, seed=salt64(810, "seq", n))
        per_graph = []
        for r in range(graphs):
            g = d.pair_stubs(seq, seed=salt64(810, "pair", n, r))
            if pairs is None:
                src, dst = g.edges()
                adj = csr_matrix((np.ones(g.m), (src, dst)), shape=(n, n))
                dist = dijkstra(adj, unweighted=True)
                np.fill_diagonal(dist, np.nan)
                flat = dist[~np.isnan(dist)]
                per_graph.append((flat > k).mean())
            else:
                hist = d.sample_hopcounts(g, pairs, seed=salt64(810, "hc", n, r))
                beyond = hist.total_pairs - hist.counts[: k + 1].sum()
                per_graph.append(beyond / hist.total_pairs)
        direct = float(np.mean(per_graph))
        direct_se = float(np.std(per_graph, ddof=1) / math.sqrt(graphs))
        est = d.exact_tail_smalln(seq, k=k, reps=reps, seed=salt64(810, "tail", n))
        sigma = math.sqrt(direct_se**2 + est.stderr**2)
        z = abs(est.value - direct) / sigma
        results.append((n, k, est.value, direct, z))
    passed = all(z <= 3 for *_, z in results)
    detail = "; ".join(
        f"n={n}, k={k}: estimator {e:.4f} vs BFS {o:.4f} (z={z:.2f})"
        for n, k, e, o, z in results
    )
    report("criterion 6b (tail estimator vs BFS oracle)", passed, detail)


def test_criterion_6c_hll_accuracy(pp_law):
    seq = d.sample_iid_bidegree(pp_law, 1000, seed=811)
    g = d.pair_stubs(seq, seed=812)
    exact = d.neighborhood_function(g, "exact", t_max=64).astype(float)
    est = d.neighborhood_function(g, "hll", t_max=64, p=12, seed=813)
    worst = 0.0
    for t in range(1, min(exact.size, est.size)):
        if exact[t] >= 10_000:
            worst = max(worst, abs(est[t] - exact[t]) / exact[t])
    report(
        "criterion 6c (counter accuracy at p=12)",
        worst < 0.05,
        f"n=1000: worst relative error {worst:.4f} < 0.05 over t with N(t) >= 1e4",
    )


class TestCriterion7InvariantSuites:
    """Named invariants, each printed as part of the criterion-7 line."""

    def test_degree_preservation(self, pp_law):
        for seed in range(5):
            seq = d.sample_iid_bidegree(pp_law, 2000, seed=seed)
            g = d.pair_stubs(seq, seed=seed + 7)
            assert np.array_equal(g.out_degrees, seq.d_plus)
            assert np.array_equal(g.in_degrees, seq.d_minus)
        report("criterion 7.1 (degree preservation)", True,
               "exact for every graph and seed")

    def test_sandwich_exact(self, pp_law):
        spec = GWSpec.from_joint_law(pp_law, "+")
        for rep in range(25):
            seq = d.sample_iid_bidegree(pp_law, 3000, seed=900 + rep)
            tr = d.coupled_exploration(seq, spec, "+", k_max=6, seed=950 + rep)
            assert np.all(tr.z_hat - tr.deficit_tree_only <= tr.z)
            assert np.all(tr.z <= tr.z_hat + tr.deficit_graph_only)
        report("criterion 7.2 (label-deficit sandwich)", True,
               "exact on every trace and generation")

    def test_martingale_mean(self):
        spec = GWSpec(
            g=DiscreteLaw(np.array([0.1, 0.3, 0.3, 0.3])),
            f=DiscreteLaw(np.array([0.3, 0.25, 0.25, 0.2])),
        )
        paths = d.simulate_delayed_gw_many(spec, 10, 20_000, seed=5)
        worst = 0.0
        for k in range(1, 11):
            w = paths[:, k] / (spec.nu * spec.mu ** (k - 1))
            se = w.std(ddof=1) / np.sqrt(w.size)
            worst = max(worst, abs(w.mean() - 1.0) / se)
            assert abs(w.mean() - 1.0) <= 3 * se
        report("criterion 7.3 (martingale mean)", True,
               f"E[W_k] = 1 within 3 SE for k <= 10 (worst z = {worst:.2f})")

    def test_d1_metric_axioms(self):
        laws = [
            DiscreteLaw.point_mass(0),
            DiscreteLaw.point_mass(4),
            DiscreteLaw(np.array([0.5, 0.5])),
            GeometricMarginal(0.3).law(),
            PoissonMarginal(2.5).law(),
        ]
        for a, b in itertools.product(laws, repeat=2):
            assert d.wasserstein1(a, b) == d.wasserstein1(b, a)
        for a in laws:
            assert d.wasserstein1(a, a) == 0.0
        for a, b, c in itertools.product(laws, repeat=3):
            assert d.wasserstein1(a, c) <= (
                d.wasserstein1(a, b) + d.wasserstein1(b, c) + 1e-12
            )
        report("criterion 7.4 (distance metric axioms)", True,
               "symmetry exact, identity zero, triangle within 1e-12")

    def test_mean_deviation_bound(self, pp_law, zipf_law):
        from dcmlab.laws import d1_truncation_error

        for law, seed in ((pp_law, 31), (zipf_law, 32)):
            seq = d.sample_iid_bidegree(law, 5000, seed=seed)
            emp = d.empirical_distributions(seq)
            _, g_plus = law.marginal_laws()
            f_plus, _ = law.size_biased()
            d1g = d.wasserstein1(emp.g_n_plus, g_plus) + d1_truncation_error(
                emp.g_n_plus, g_plus)
            d1f = d.wasserstein1(emp.f_n_plus, f_plus) + d1_truncation_error(
                emp.f_n_plus, f_plus)
            assert abs(emp.nu_n - law.nu) <= d1g + 1e-9
            assert abs(emp.mu_n - law.mu) <= d1f + 1e-9
        report("criterion 7.5 (mean deviation under d1)", True,
               "|nu_n - nu| <= d1(G_n, G) and |mu_n - mu| <= d1(F_n, F)")

    def test_tilted_normalization(self, pp_law):
        spec = GWSpec.from_joint_law(pp_law, "+")
        q = d.extinction_probability(spec.f)
        gt, ft = d.tilted_laws(spec.g, spec.f, q)
        ok = (abs(gt.pmf.sum() - 1.0) <= 1e-12 and abs(ft.pmf.sum() - 1.0) <= 1e-12)
        report("criterion 7.6 (tilted-law normalization)", ok,
               f"sums within 1e-12 of 1 at q = {q:.4f}")

    def test_pool_zero_fraction(self, pp_law):
        spec = GWSpec.from_joint_law(pp_law, "+")
        q = d.extinction_probability(spec.f)
        s = d.survival_probability(spec.g, q)
        pool = d.population_dynamics(spec, pool_size=10**5, generations=30,
                                     seed=17)
        se = math.sqrt(s * (1 - s) / pool.pool_size)
        diff = abs(pool.zero_fraction - (1 - s))
        report("criterion 7.7 (pool extinction mass)", diff <= 3 * se,
               f"zero fraction {pool.zero_fraction:.4f} vs 1-s = {1 - s:.4f} "
               f"(3 SE = {3 * se:.4f})")

    def test_erase_invariance(self, pp_law):
        graphs, n = 100, 1000
        for i in range(graphs):
            seq = d.sample_iid_bidegree(pp_law, n, seed=salt64(33, "seq", i))
            g = d.pair_stubs(seq, seed=salt64(33, "pair", i))
            src, dst = g.edges()
            adj = csr_matrix((np.ones(g.m), (src, dst)), shape=(n, n))
            simple = d.erase(g)
            src2, dst2 = simple.edges()
            adj2 = csr_matrix((np.ones(simple.m), (src2, dst2)), shape=(n, n))
            assert np.array_equal(
                dijkstra(adj, unweighted=True), dijkstra(adj2, unweighted=True)
            ), f"graph {i}"
        report("criterion 7.8 (hopcount invariance under erasing)", True,
               f"{graphs} random graphs at n = {n}: all-pairs distances equal")

    def test_d_regular_closed_form(self):
        from dcmlab.branching import WPool
        from dcmlab.theory_compare import TheoreticalHopcountLaw

        ones = WPool(samples=np.ones(64), generations=0, pool_size=64, seed=0)
        worst = 0.0
        for n in (10**3, 10**5, 10**6):
            law = TheoreticalHopcountLaw(n=n, nu=3.0, mu=3.0,
                                         w_plus=ones, w_minus=ones)
            xs = np.arange(-40, 41)
            got = theoretical_cdf_curve(law, xs)
            expect = np.array([d.d_regular_hopcount_cdf(3, n, x) for x in xs])
            worst = max(worst, float(np.abs(got - expect).max()))
        assert worst <= 1e-12
        report("criterion 7.9 (d-regular law collapse)", True,
               f"pool evaluation equals closed form (max gap {worst:.2e})")


def test_omega_event_frequency_heavy_tail(pp_law):
    # degree-regularity event frequency for the heavy-tailed law; the
    # 90% floor was confirmed by a 50-replicate pilot with K_kappa set to
    # four times the law's own joint moment
    n, reps = 10**5, 50
    holds = 0
    for r in range(reps):
        seq = d.sample_iid_bidegree(pp_law, n, seed=salt64(808, "rep", r))
        rep = d.check_assumption(seq, pp_law, eps=0.1, kappa=0.4)
        holds += int(rep.omega_n_holds)
    report(
        "regularity event frequency",
        holds / reps >= 0.90,
        f"n={n}, kappa=0.4, eps=0.1: holds in {holds}/{reps} replicates (>= 90%)",
    )
