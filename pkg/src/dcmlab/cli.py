"""Command-line front end.

Subcommands wire the library into reproducible experiments: ``gen``
writes degree sequences and graphs, ``hopcount`` measures distance
histograms, ``theory`` evaluates the limiting law, ``compare`` runs the
full generate/measure/compare pipeline, ``coupling`` measures coupling
failure rates, and ``check`` verifies the degree-regularity event.

All data goes to files; logs go to stderr.  Exit codes: 0 success,
2 parameter validation error, 3 runtime error.  Stochastic commands
require an explicit --seed and echo the resolved configuration into a
JSON sidecar, which is sufficient to re-run bit-identically.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .branching import save_wpool
from .coupling import coupling_failure_rate
from .dcm_graph import load_graph, pair_stubs, save_graph
from .degree_sequences import (
    bidegree_to_csv,
    check_assumption,
    sample_iid_bidegree,
    save_bidegree,
)
from .errors import DcmLabError, InvalidLaw, ParameterOutOfRange
from .hopcount_engine import (
    HopcountHistogram,
    histogram_from_nf,
    neighborhood_function,
    sample_hopcounts,
    save_histogram,
)
from .laws import law_from_json, parse_law
from .rng import salt64
from .theory_compare import (
    build_theoretical_law,
    ks_bootstrap_ci,
    save_comparison,
    theoretical_cdf_curve,
)

log = logging.getLogger("dcmlab")


def _resolve_law(args) -> "JointDegreeLaw":
    if getattr(args, "law", None):
        return parse_law(args.law)
    if getattr(args, "law_json", None):
        return law_from_json(json.loads(Path(args.law_json).read_text()))
    raise InvalidLaw("no law given: use --law or --law-json")


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _sidecar(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, default=str))


def _graph_for(law, n, seed, index, iid_delta=None):
    seq = sample_iid_bidegree(law, n, seed=salt64(seed, "seq", index),
                              delta=iid_delta)
    return seq, pair_stubs(seq, seed=salt64(seed, "pair", index))


def _measure_histogram(args, law, index) -> HopcountHistogram:
    _, g = _graph_for(law, args.n, args.seed, index)
    if args.mode == "sampled":
        return sample_hopcounts(g, args.pairs, seed=salt64(args.seed, "pairs", index))
    N = neighborhood_function(g, mode=args.mode, t_max=args.t_max, p=args.p,
                              seed=salt64(args.seed, "nf", index))
    mode = "exact_all_pairs" if args.mode == "exact" else "hll_estimate"
    return histogram_from_nf(N, g.n, mode)


def _pooled_histogram(args, law) -> HopcountHistogram:
    indices = range(args.graphs)
    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            hists = list(pool.map(lambda i: _measure_histogram(args, law, i), indices))
    else:
        hists = [_measure_histogram(args, law, i) for i in indices]
    return HopcountHistogram.combine(hists)


# -- subcommands -------------------------------------------------------------


def cmd_gen(args) -> int:
    law = _resolve_law(args)
    out = _outdir(args)
    produced = []
    for i in range(args.graphs):
        seq, g = _graph_for(law, args.n, args.seed, i, args.delta)
        stem = f"graph{i:03d}"
        save_bidegree(seq, out / f"{stem}.dcms")
        save_graph(g, out / f"{stem}.dcmg")
        if args.csv:
            bidegree_to_csv(seq, out / f"{stem}.csv")
        prov = seq.provenance
        produced.append({
            "stem": stem, "edges": g.m,
            "delta_n": prov.delta_n if prov else 0,
            "retries": prov.retries if prov else 0,
            "modified": int(prov.modified.size) if prov else 0,
        })
        log.info("wrote %s (n=%d, edges=%d, delta_n=%d)", stem, seq.n, g.m,
                 produced[-1]["delta_n"])
    _sidecar(out / "gen.json", {
        "command": "gen", "law": law.to_json(), "n": args.n,
        "graphs": args.graphs, "seed": args.seed, "delta": args.delta,
        "produced": produced, "version": __version__,
    })
    return 0


def cmd_hopcount(args) -> int:
    out = _outdir(args)
    if args.graph:
        g = load_graph(args.graph)
        if args.mode == "sampled":
            hist = sample_hopcounts(g, args.pairs, seed=salt64(args.seed, "pairs", 0))
        else:
            N = neighborhood_function(g, mode=args.mode, t_max=args.t_max,
                                      p=args.p, seed=salt64(args.seed, "nf", 0))
            hist = histogram_from_nf(
                N, g.n, "exact_all_pairs" if args.mode == "exact" else "hll_estimate")
    else:
        law = _resolve_law(args)
        hist = _pooled_histogram(args, law)
    save_histogram(hist, out / "hopcount.csv", view=args.view, meta={
        "command": "hopcount", "seed": args.seed,
        "p": args.p, "t_max": args.t_max, "graphs": args.graphs,
        "graph_file": args.graph, "version": __version__,
    })
    log.info("hopcount histogram: %d finite of %d pairs",
             int(hist.finite_pairs), int(hist.total_pairs))
    return 0


def cmd_theory(args) -> int:
    law = _resolve_law(args)
    if not law.is_supercritical:
        raise InvalidLaw("theory evaluation needs a supercritical law (mu > 1)")
    out = _outdir(args)
    theory = build_theoretical_law(law, args.n, pool_size=args.pool_size,
                                   generations=args.generations, seed=args.seed)
    save_wpool(theory.w_plus, out / "w_plus.csv")
    save_wpool(theory.w_minus, out / "w_minus.csv")
    xs = np.arange(-40, 41)
    cdf = theoretical_cdf_curve(theory, xs)
    with open(out / "theory_cdf.csv", "w") as fh:
        fh.write("x,cdf\n")
        for x, c in zip(xs, cdf):
            fh.write(f"{int(x)},{float(c)!r}\n")
    _sidecar(out / "theory.json", {
        "command": "theory", "law": law.to_json(), "n": args.n,
        "nu": law.nu, "mu": law.mu, "pool_size": args.pool_size,
        "generations": args.generations, "seed": args.seed,
        "version": __version__,
    })
    return 0


def cmd_compare(args) -> int:
    law = _resolve_law(args)
    if not law.is_supercritical:
        raise InvalidLaw("hopcount comparison needs a supercritical law (mu > 1)")
    out = _outdir(args)
    hist = _pooled_histogram(args, law)
    theory = build_theoretical_law(law, args.n, pool_size=args.pool_size,
                                   generations=args.generations,
                                   seed=salt64(args.seed, "theory"))
    meta = {
        "command": "compare", "law": law.to_json(), "graphs": args.graphs,
        "mode": args.mode, "p": args.p, "seed": args.seed,
        "version": __version__,
    }
    if args.bootstrap > 0:
        meta["ks_ci_95"] = ks_bootstrap_ci(
            hist, theory, resamples=args.bootstrap,
            seed=salt64(args.seed, "bootstrap"),
        )
    ks = save_comparison(hist, theory, out / "comparison.csv", meta=meta)
    log.info("KS distance: %.6g", ks)
    print(f"ks={ks!r}")
    return 0


def cmd_coupling(args) -> int:
    law = _resolve_law(args)
    out = _outdir(args)
    rates = coupling_failure_rate(
        law, args.n, delta=args.delta, gamma=args.gamma, reps=args.reps,
        seed=args.seed, k=args.k, eps=args.eps, kappa=args.kappa,
    )
    payload = {
        "command": "coupling", "law": law.to_json(), "n": args.n,
        "delta": args.delta, "gamma": args.gamma, "k": rates.k,
        "reps": args.reps, "seed": args.seed,
        "freq_any_deficit_exceeds": rates.freq_any_deficit_exceeds,
        "freq_ratio_bound_fails": rates.freq_ratio_bound_fails,
        "exhausted_runs": rates.exhausted_runs,
        "version": __version__,
    }
    _sidecar(out / "coupling.json", payload)
    log.info("coupling failure rates: deficit %s, sandwich %s",
             rates.freq_any_deficit_exceeds, rates.freq_ratio_bound_fails)
    return 0


def cmd_check(args) -> int:
    law = _resolve_law(args)
    out = _outdir(args)
    seq = sample_iid_bidegree(law, args.n, seed=salt64(args.seed, "seq", 0),
                              delta=args.delta)
    report = check_assumption(seq, law, eps=args.eps, kappa=args.kappa,
                              K_kappa=args.K_kappa)
    payload = {
        "command": "check", "law": law.to_json(), "n": args.n,
        "seed": args.seed, "version": __version__,
        **{k: getattr(report, k) for k in (
            "d1_g_plus", "d1_g_minus", "d1_f_plus", "d1_f_minus",
            "eps_threshold", "moment_sum", "moment_bound", "omega_n_holds",
            "eps", "kappa", "K_kappa")},
    }
    _sidecar(out / "check.json", payload)
    log.info("omega_n_holds=%s", report.omega_n_holds)
    print(f"omega_n_holds={report.omega_n_holds}")
    return 0


# -- argument plumbing -------------------------------------------------------


def _add_law_args(p):
    p.add_argument("--law", help="compact law spec, e.g. dregular:3, "
                   "zipf-equal:3.5,1000, pp-independent:1.5,1")
    p.add_argument("--law-json", help="path to a JSON law description")


def _add_common(p, stochastic=True):
    _add_law_args(p)
    p.add_argument("--n", type=int, help="number of nodes")
    p.add_argument("--out", default="out", help="output directory")
    if stochastic:
        p.add_argument("--seed", type=int, required=True, help="base RNG seed")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads for per-graph parallelism")
    p.add_argument("--deterministic", action="store_true",
                   help="fixed work partitioning (always on; flag kept for "
                        "config compatibility)")
    p.add_argument("--config", help="JSON config file; flags override it")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="dcmlab",
        description="random-digraph laboratory: generate, measure, compare",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate degree sequences and graphs")
    _add_common(p)
    p.add_argument("--graphs", type=int, default=1)
    p.add_argument("--delta", type=float, default=None,
                   help="imbalance exponent for the i.i.d. repair step")
    p.add_argument("--csv", action="store_true", help="also write CSV sequences")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("hopcount", help="measure a hopcount histogram")
    _add_common(p)
    p.add_argument("--graph", help="existing .dcmg file instead of generating")
    p.add_argument("--graphs", type=int, default=1)
    p.add_argument("--mode", choices=("exact", "hll", "sampled"), default="exact")
    p.add_argument("--p", type=int, default=10, help="counter precision (hll)")
    p.add_argument("--t-max", type=int, default=128)
    p.add_argument("--pairs", type=int, default=100_000,
                   help="pair count for sampled mode")
    p.add_argument("--view", choices=("exactly", "atleast"), default="exactly",
                   help="CSV counts: pairs at distance exactly t, or >= t")
    p.set_defaults(func=cmd_hopcount)

    p = sub.add_parser("theory", help="evaluate the limiting hopcount law")
    _add_common(p)
    p.add_argument("--pool-size", type=int, default=100_000)
    p.add_argument("--generations", type=int, default=30)
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("compare", help="generate, measure, and compare to theory")
    _add_common(p)
    p.add_argument("--graphs", type=int, default=10)
    p.add_argument("--mode", choices=("exact", "hll"), default="hll")
    p.add_argument("--p", type=int, default=10)
    p.add_argument("--t-max", type=int, default=128)
    p.add_argument("--pool-size", type=int, default=100_000)
    p.add_argument("--generations", type=int, default=30)
    p.add_argument("--bootstrap", type=int, default=100,
                   help="pool resamples for the KS confidence interval "
                        "(0 disables)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("coupling", help="measure coupling failure rates")
    _add_common(p)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--k", type=int, default=None,
                   help="generations (default: the admissible maximum)")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--kappa", type=float, default=None)
    p.set_defaults(func=cmd_coupling)

    p = sub.add_parser("check", help="verify the degree-regularity event")
    _add_common(p)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--K-kappa", dest="K_kappa", type=float, default=None)
    p.set_defaults(func=cmd_check)

    return ap


def _apply_config(args: argparse.Namespace, argv: list[str]) -> None:
    if not getattr(args, "config", None):
        return
    cfg = json.loads(Path(args.config).read_text())
    given = {a.split("=")[0].lstrip("-").replace("-", "_")
             for a in argv if a.startswith("--")}
    for key, val in cfg.items():
        attr = key.replace("-", "_")
        if attr in given or not hasattr(args, attr):
            continue
        setattr(args, attr, val)


def _validate(args) -> None:
    n = getattr(args, "n", None)
    if n is not None and n < 1:
        raise ParameterOutOfRange("--n must be >= 1")
    if getattr(args, "threads", 1) < 1:
        raise ParameterOutOfRange("--threads must be >= 1")
    for name in ("graphs", "reps", "pool_size", "generations", "pairs", "t_max"):
        v = getattr(args, name, None)
        if v is not None and v < 0:
            raise ParameterOutOfRange(f"--{name.replace('_', '-')} must be >= 0")
    p = getattr(args, "p", None)
    if p is not None and not 4 <= p <= 18:
        raise ParameterOutOfRange("--p must be between 4 and 18")
    delta = getattr(args, "delta", None)
    if delta is not None and not 0 < delta < 1:
        raise ParameterOutOfRange("--delta must be in (0, 1)")


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        _apply_config(args, argv)
        _validate(args)
        if args.command in ("hopcount", "compare") and getattr(args, "graph", None) is None:
            if args.n is None:
                raise ParameterOutOfRange("--n is required when generating graphs")
        return args.func(args)
    except (InvalidLaw, ParameterOutOfRange) as exc:
        log.error("invalid parameters: %s", exc)
        return 2
    except DcmLabError as exc:
        log.error("run failed: %s", exc)
        return 3
    except OSError as exc:
        log.error("i/o error: %s", exc)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
