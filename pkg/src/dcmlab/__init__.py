"""dcmlab: a laboratory for random digraphs with prescribed degrees.

Generate directed configuration-model graphs from joint in/out-degree
laws, measure hopcount (directed shortest-path) distributions exactly or
with probabilistic counters, and compare them against the limiting
branching-process theory, including an instrumented coupling between the
graph exploration and its limit tree.
"""

from .branching import (
    GWPath,
    GWSpec,
    WPool,
    extinction_probability,
    population_dynamics,
    simulate_delayed_gw,
    simulate_delayed_gw_many,
    survival_probability,
    tilted_laws,
)
from .coupling import (
    CoupledTrace,
    CouplingFailureRates,
    ExplorationState,
    GraphSideExplorer,
    coupled_exploration,
    coupling_failure_rate,
    dynamic_offspring_law,
    error_bound_E,
    pseudo_inverse_sample,
)
from .dcm_graph import Digraph, GraphStats, erase, graph_stats, pair_stubs
from .degree_sequences import (
    AssumptionReport,
    BiDegreeSequence,
    EmpiricalDegreeDistributions,
    check_assumption,
    empirical_distributions,
    sample_iid_bidegree,
)
from .hopcount_engine import (
    HllCounter,
    HopcountHistogram,
    bfs_distance,
    bfs_distances_from,
    hopcount_pmf_from_nf,
    neighborhood_function,
    sample_finite_fraction,
    sample_hopcounts,
)
from .laws import (
    DiscreteLaw,
    GeometricMarginal,
    JointDegreeLaw,
    PoissonMarginal,
    PoissonParetoMarginal,
    ZipfMarginal,
    law_from_json,
    parse_law,
    size_biased_law,
    wasserstein1,
)
from .theory_compare import (
    TheoreticalHopcountLaw,
    build_theoretical_law,
    d_regular_hopcount_cdf,
    exact_tail_smalln,
    floor_log,
    ks_distance,
    prob_finite,
    survival_product_p,
    theoretical_cdf,
)

__version__ = "0.1.0"
