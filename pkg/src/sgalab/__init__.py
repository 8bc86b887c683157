"""Simulation laboratory for the simple genetic algorithm.

Exact genetic operators with lineage tracking, the critical copy-rate
parameter, branching-process dominators, a monotone lower-bounding
Markov chain, regime experiments, and an adaptive parameter controller.
"""

__version__ = "0.1.0"

from .branching import (  # noqa: F401
    ReproductionLaw,
    explicit_law,
    gw_extinction_pgf,
    gw_simulate,
    gw_survival_decay,
    gw_threshold_hitting,
    poisson_mixture,
    scaled_poisson,
)
from .core import (  # noqa: F401
    Chromosome,
    GaConfig,
    GenerationInfo,
    Population,
    PopulationStats,
    crossover_pair,
    max_ones_non_descendants,
    mutate,
    next_generation,
    population_stats,
    select_parent,
)
from .experiments import (  # noqa: F401
    RegimeReport,
    ReplicaReport,
    StoppingTimes,
    disordered_pm,
    measure_tau2_and_d,
    pi_sweep,
    run_disordered,
    run_quasispecies,
    verify_nstar_domination,
    verify_one_step_dominance,
    verify_tn_domination,
)
from .landscapes import (  # noqa: F401
    LandscapeSpec,
    load_landscape,
    one_max_shifted,
    sharp_peak,
    table_landscape,
)
from .lowerchain import (  # noqa: F401
    LowerChainParams,
    coupled_trajectories,
    epsilon_m,
    geometric_growth_check,
    hitting_time_tau_star,
    params_from_pi,
    transition_matrix,
    transition_sample,
)
from .probability import (  # noqa: F401
    DiscreteLaw,
    binomial_poisson_condition,
    chernoff_sum_bound,
    cramer_binomial_vs_poisson,
    cramer_scaled_poisson,
    hoeffding_lower_tail,
    pi_parameter,
    poisson_tail_bound,
    stochastic_dominates,
)
from .streams import make_stream, substream  # noqa: F401
from .tuner import TunerPolicy, adapt_parameters, run_adaptive_ga  # noqa: F401
