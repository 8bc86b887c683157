"""Regime protocols and numerical dominance verification.

Runs instrumented populations of the generation cycle, records the
stopping times and event indicators of the two contrasting regimes
(copy rate below vs above one), and compares the instrumented counting
processes against their branching-process and lower-chain dominators via
tail tables with distribution-free statistical tolerances.

Every replica is reproducible from (config, master seed, replica index)
alone; parallel execution merges results in replica order, so output
never depends on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .branching import ReproductionLaw, poisson_mixture, scaled_poisson
from .core import GaConfig, Population, next_generation
from .errors import ConfigError, DomainError, PreconditionError
from .landscapes import LandscapeSpec, fitness_batch, sharp_peak
from .lowerchain import params_from_pi, transition_matrix
from .probability import dkw_epsilon
from .streams import substream

DKW_CONFIDENCE = 0.99
WILSON_Z = 1.959963984540054  # two-sided 95%


# --------------------------------------------------------------- reporting

@dataclass
class StoppingTimes:
    """First-passage generations; None when not hit within the horizon."""

    tau0: int | None = None      # master count reaches 0
    tau1: int | None = None      # descendant count exceeds m**(1/4)
    tau2: int | None = None      # a non-descendant reaches sqrt(ell) ones
    tau_bar: int | None = None   # mean fitness reaches sqrt(pi) * f0_bar
    tau_star: int | None = None  # lower-chain arrival (chain runs only)


@dataclass
class ReplicaReport:
    """Everything recorded about one replica."""

    replica_index: int
    f_star: np.ndarray        # per generation 0..H
    f_bar: np.ndarray
    n_master: np.ndarray
    n_descendants: np.ndarray
    d_max: np.ndarray         # max ones among non-descendants (0 if none)
    max_flips: np.ndarray     # per step 1..H: largest per-child flip count
    times: StoppingTimes = field(default_factory=StoppingTimes)
    event_disordered: bool = False
    event_quasispecies: bool = False
    d_recursion_ok: bool = True
    t_bound_ok: bool = True


@dataclass
class RegimeReport:
    """Aggregate of one protocol run."""

    config: dict
    replicas: int
    frequency: float
    ci_low: float
    ci_high: float
    mean_f_bar: np.ndarray
    sd_f_bar: np.ndarray
    mean_f_star: np.ndarray
    sd_f_star: np.ndarray
    reports: list[ReplicaReport]


@dataclass
class DominanceRow:
    level: int        # generation n, or conditioning state i
    k: int            # tail threshold
    dominated: float  # upper tail of the process that must stay below
    dominating: float
    tol: float
    ok: bool


@dataclass
class DominanceTable:
    rows: list[DominanceRow]
    meta: dict

    @property
    def all_ok(self) -> bool:
        return all(row.ok for row in self.rows)

    def failures(self) -> list[DominanceRow]:
        return [row for row in self.rows if not row.ok]


def wilson_interval(successes: int, n: int,
                    z: float = WILSON_Z) -> tuple[float, float]:
    """Wilson score interval for a binomial frequency."""
    if n <= 0:
        raise DomainError("interval needs at least one trial")
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


# ------------------------------------------------------------ the engine

@dataclass(frozen=True)
class TrajectoryTask:
    """Picklable description of one protocol; replicas differ by index only."""

    landscape: LandscapeSpec
    m: int
    ell: int
    p_c: float
    p_m: float
    pop0_bits: np.ndarray
    pop0_desc: np.ndarray
    horizon: int
    pi: float
    f0_star: float
    f0_bar: float
    master_seed: int


def simulate_replica(task: TrajectoryTask, index: int) -> ReplicaReport:
    """Run one instrumented replica; deterministic in (task, index)."""
    rng = substream(task.master_seed, index)
    config = GaConfig(ell=task.ell, m=task.m, p_c=task.p_c, p_m=task.p_m,
                      seed=task.master_seed)
    pop = Population(task.pop0_bits.copy(), task.pop0_desc.copy())
    horizon = task.horizon
    m = task.m

    f_star = np.empty(horizon + 1)
    f_bar = np.empty(horizon + 1)
    n_master = np.empty(horizon + 1, dtype=np.int64)
    n_desc = np.empty(horizon + 1, dtype=np.int64)
    d_max = np.empty(horizon + 1, dtype=np.int64)
    max_flips = np.zeros(horizon, dtype=np.int64)
    times = StoppingTimes()
    d_ok = True
    t_ok = True

    tau1_threshold = m ** 0.25
    tau2_threshold = math.sqrt(task.ell)
    tau_bar_threshold = math.sqrt(task.pi) * task.f0_bar

    def record(n: int, pop: Population) -> None:
        fitness = pop.fitness(task.landscape)
        ones = pop.bits.sum(axis=1)
        outside = ~pop.descendants
        f_star[n] = fitness.max()
        f_bar[n] = fitness.mean()
        n_master[n] = int((ones == task.ell).sum())
        n_desc[n] = int(pop.descendants.sum())
        d_max[n] = int(ones[outside].max()) if outside.any() else 0
        if n >= 1:
            if times.tau0 is None and n_master[n] == 0:
                times.tau0 = n
            if times.tau1 is None and n_desc[n] > tau1_threshold:
                times.tau1 = n
            if times.tau2 is None and outside.any() \
                    and d_max[n] >= tau2_threshold:
                times.tau2 = n
            if times.tau_bar is None and f_bar[n] >= tau_bar_threshold:
                times.tau_bar = n

    record(0, pop)
    had_outside = bool((~pop.descendants).any())
    for n in range(1, horizon + 1):
        pop, info = next_generation(pop, task.landscape, config, rng)
        record(n, pop)
        max_flips[n - 1] = info.max_mutation_flips
        if n_desc[n] > 2 * info.descendant_selections:
            t_ok = False
        outside_now = bool((~pop.descendants).any())
        if outside_now:
            if not had_outside:
                d_ok = False  # a non-descendant cannot appear from nowhere
            elif d_max[n] > 2 * d_max[n - 1] + info.max_mutation_flips:
                d_ok = False
        had_outside = outside_now

    stagnation = task.f0_bar * (1.0 + 1.0 / math.sqrt(m))
    event_dis = times.tau0 is not None and bool(np.all(f_bar <= stagnation))
    event_qua = bool(np.all(f_star >= task.f0_star)) \
        and times.tau_bar is not None

    return ReplicaReport(
        replica_index=index,
        f_star=f_star, f_bar=f_bar, n_master=n_master,
        n_descendants=n_desc, d_max=d_max, max_flips=max_flips,
        times=times, event_disordered=event_dis, event_quasispecies=event_qua,
        d_recursion_ok=d_ok, t_bound_ok=t_ok)


def _job(args: tuple[TrajectoryTask, int]) -> ReplicaReport:
    return simulate_replica(*args)


def run_replicas(task: TrajectoryTask, replicas: int,
                 workers: int = 1) -> list[ReplicaReport]:
    """All replicas of a task, merged in replica-index order."""
    if replicas < 1:
        raise DomainError("replicas must be positive")
    jobs = [(task, index) for index in range(replicas)]
    if workers <= 1:
        return [_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunk = max(1, replicas // (8 * workers))
        return list(pool.map(_job, jobs, chunksize=chunk))


# ----------------------------------------------------------- the protocols

def disordered_pm(pi: float, p_c: float, ell: int) -> float:
    """Mutation rate solving 2*(1-p_c)*(1-p_m)**ell = pi.

    Feasible whenever pi/(2*(1-p_c)) lies in (0, 1]; the solution is the
    unique p_m = 1 - (pi/(2*(1-p_c)))**(1/ell).
    """
    if ell < 2:
        raise ConfigError(f"ell must be >= 2, got {ell}")
    if not 0.0 <= p_c < 1.0:
        raise PreconditionError(f"p_c must lie in [0, 1), got {p_c}")
    base = pi / (2.0 * (1.0 - p_c))
    if not 0.0 < base <= 1.0:
        raise PreconditionError(
            f"pi={pi} infeasible with p_c={p_c}: needs pi < 2*(1-p_c) = "
            f"{2.0 * (1.0 - p_c)}")
    return 1.0 - base ** (1.0 / ell)


def peak_start(m: int, ell: int) -> tuple[np.ndarray, np.ndarray]:
    """One flagged all-ones founder plus m-1 all-zero chromosomes."""
    bits = np.zeros((m, ell), dtype=np.uint8)
    bits[0] = 1
    desc = np.zeros(m, dtype=bool)
    desc[0] = True
    return bits, desc


def _peak_task(pi: float, m: int, p_c: float, master_seed: int,
               kappa: float | None = None,
               horizon: int | None = None) -> TrajectoryTask:
    """Sharp-peak task with ell = m and the factor-2 rate constraint."""
    ell = m
    p_m = disordered_pm(pi, p_c, ell)
    bits, desc = peak_start(m, ell)
    if horizon is None:
        horizon = math.ceil(kappa * math.log(m))
    return TrajectoryTask(
        landscape=sharp_peak(ell), m=m, ell=ell, p_c=p_c, p_m=p_m,
        pop0_bits=bits, pop0_desc=desc, horizon=horizon, pi=pi,
        f0_star=2.0, f0_bar=(m + 1) / m, master_seed=master_seed)


def _aggregate(config: dict, reports: list[ReplicaReport],
               event: str) -> RegimeReport:
    hits = sum(getattr(r, event) for r in reports)
    n = len(reports)
    lo, hi = wilson_interval(hits, n)
    f_bar = np.stack([r.f_bar for r in reports])
    f_star = np.stack([r.f_star for r in reports])
    return RegimeReport(
        config=config, replicas=n, frequency=hits / n, ci_low=lo, ci_high=hi,
        mean_f_bar=f_bar.mean(axis=0), sd_f_bar=f_bar.std(axis=0, ddof=1) if n > 1 else np.zeros(f_bar.shape[1]),
        mean_f_star=f_star.mean(axis=0),
        sd_f_star=f_star.std(axis=0, ddof=1) if n > 1 else np.zeros(f_star.shape[1]),
        reports=reports)


def run_disordered(pi: float, m: int, p_c: float, kappa: float, replicas: int,
                   master_seed: int, workers: int = 1) -> RegimeReport:
    """Low copy-rate protocol on the sharp peak with ell = m.

    Starts from one founder copy of the peak and m-1 zero strings and
    records the joint event: the peak genotype disappears within the
    horizon while the mean fitness never exceeds f0_bar*(1 + 1/sqrt(m)).
    """
    if not 0.0 < pi < 1.0:
        raise PreconditionError(f"disordered protocol requires pi < 1, got {pi}")
    task = _peak_task(pi, m, p_c, master_seed, kappa=kappa)
    reports = run_replicas(task, replicas, workers)
    config = dict(protocol="disordered", pi=pi, m=m, ell=m, p_c=p_c,
                  p_m=task.p_m, kappa=kappa, horizon=task.horizon,
                  replicas=replicas, seed=master_seed)
    return _aggregate(config, reports, "event_disordered")


def run_quasispecies(pi: float, landscape: LandscapeSpec, pop0_bits: np.ndarray,
                     pop0_desc: np.ndarray, p_c: float, kappa: float,
                     replicas: int, master_seed: int,
                     workers: int = 1) -> RegimeReport:
    """High copy-rate protocol on an arbitrary landscape and start.

    The mutation rate is solved from the exact initial fitness ratio so
    that the copy rate equals ``pi``; the joint event is: the maximal
    fitness never drops below its initial value up to the horizon, and
    the mean fitness reaches sqrt(pi) times its initial value within it.
    """
    if pi <= 1.0:
        raise PreconditionError(f"quasispecies protocol requires pi > 1, got {pi}")
    fitness = fitness_batch(landscape, pop0_bits)
    f0_star = float(fitness.max())
    f0_bar = float(fitness.mean())
    if f0_star <= f0_bar:
        raise PreconditionError(
            "initial population has no fitness spread: max equals mean")
    ratio = f0_star / f0_bar
    base = pi / (ratio * (1.0 - p_c)) if p_c < 1.0 else math.inf
    if not 0.0 < base <= 1.0:
        raise PreconditionError(
            f"pi={pi} infeasible: needs pi <= ratio*(1-p_c) = {ratio * (1 - p_c)}")
    ell = pop0_bits.shape[1]
    m = pop0_bits.shape[0]
    p_m = 1.0 - base ** (1.0 / ell)
    horizon = math.ceil(kappa * math.log(m))
    task = TrajectoryTask(
        landscape=landscape, m=m, ell=ell, p_c=p_c, p_m=p_m,
        pop0_bits=np.asarray(pop0_bits, dtype=np.uint8),
        pop0_desc=np.asarray(pop0_desc, dtype=bool),
        horizon=horizon, pi=pi, f0_star=f0_star, f0_bar=f0_bar,
        master_seed=master_seed)
    reports = run_replicas(task, replicas, workers)
    config = dict(protocol="quasispecies", pi=pi, m=m, ell=ell, p_c=p_c,
                  p_m=p_m, kappa=kappa, horizon=horizon, replicas=replicas,
                  seed=master_seed, landscape=landscape.kind)
    return _aggregate(config, reports, "event_quasispecies")


def pi_sweep(pi_grid: list[float], m: int, p_c: float, kappa: float,
             replicas: int, master_seed: int, workers: int = 1) -> list[dict]:
    """Both regime-event frequencies across a copy-rate grid.

    Each grid point runs the sharp-peak protocol (ell = m, factor-2
    constraint) once and evaluates both event indicators on the same
    replicas.  Returns one row per pi value.
    """
    rows = []
    for offset, pi in enumerate(pi_grid):
        if not 0.0 < pi < 2.0 * (1.0 - p_c):
            raise PreconditionError(
                f"grid point pi={pi} infeasible for p_c={p_c}")
        task = _peak_task(pi, m, p_c, substream_seed(master_seed, offset),
                          kappa=kappa)
        reports = run_replicas(task, replicas, workers)
        n = len(reports)
        dis = sum(r.event_disordered for r in reports)
        qua = sum(r.event_quasispecies for r in reports)
        dlo, dhi = wilson_interval(dis, n)
        qlo, qhi = wilson_interval(qua, n)
        rows.append(dict(pi=pi, m=m, freq_disordered=dis / n, ci_lo=dlo,
                         ci_hi=dhi, freq_quasispecies=qua / n, qci_lo=qlo,
                         qci_hi=qhi))
    return rows


def substream_seed(master_seed: int, offset: int) -> int:
    """Derived 64-bit seed for a sub-experiment (documented mixing)."""
    mix = np.random.SeedSequence([master_seed, offset])
    return int(mix.generate_state(1, dtype=np.uint64)[0])


# ------------------------------------------------------ dominance tables

def _gw_series(law: ReproductionLaw, horizon: int, replicas: int,
               rng: np.random.Generator, cap: int = 10**9) -> np.ndarray:
    """Matrix of branching trajectories, one row per replica."""
    sizes = np.ones(replicas, dtype=np.int64)
    series = np.empty((replicas, horizon + 1), dtype=np.int64)
    series[:, 0] = 1
    for n in range(1, horizon + 1):
        alive = sizes > 0
        nxt = np.zeros_like(sizes)
        if alive.any():
            z = sizes[alive]
            if law.kind == "scaled_poisson":
                nxt[alive] = law.scale * rng.poisson(law.lam * z)
            elif law.kind == "poisson_mixture":
                nxt[alive] = rng.poisson(law.lam * z) \
                    + 2 * rng.poisson(law.lam2 * z)
            else:
                values = np.arange(law.pmf.size)
                nxt[alive] = [int(values @ rng.multinomial(int(v), law.pmf))
                              for v in z]
        sizes = np.minimum(nxt, cap)
        series[:, n] = sizes
    return series


def _tail_table(dominated: np.ndarray, dominating: np.ndarray, k_max: int,
                tol: float) -> list[DominanceRow]:
    """Per-generation upper-tail comparison of two sample matrices."""
    rows = []
    horizon = dominated.shape[1] - 1
    for n in range(horizon + 1):
        for k in range(k_max + 1):
            low = float((dominated[:, n] >= k).mean())
            high = float((dominating[:, n] >= k).mean())
            rows.append(DominanceRow(level=n, k=k, dominated=low,
                                     dominating=high, tol=tol,
                                     ok=low <= high + tol))
    return rows


def verify_tn_domination(pi: float, m: int, p_c: float, horizon: int,
                         replicas: int, master_seed: int,
                         workers: int = 1) -> DominanceTable:
    """Tails of the stopped descendant count vs the 2*Poisson(4) dominator.

    The descendant count is killed at the first generation it exceeds
    m**(1/4); its empirical upper tails must stay below the branching
    tails up to the combined DKW tolerance at 99%.
    """
    if not 0.0 < pi < 1.0:
        raise PreconditionError(f"requires the disordered regime pi < 1, got {pi}")
    task = _peak_task(pi, m, p_c, master_seed, horizon=horizon)
    reports = run_replicas(task, replicas, workers)
    stopped = np.zeros((replicas, horizon + 1), dtype=np.int64)
    for r, report in enumerate(reports):
        tau1 = report.times.tau1 if report.times.tau1 is not None \
            else horizon + 1
        for n in range(horizon + 1):
            stopped[r, n] = report.n_descendants[n] if tau1 >= n else 0
    gw = _gw_series(scaled_poisson(2, 4.0), horizon, replicas,
                    substream(master_seed, 1, 0))
    tol = dkw_epsilon(replicas, DKW_CONFIDENCE) * 2
    rows = _tail_table(stopped, gw, k_max=m + 1, tol=tol)
    return DominanceTable(rows, meta=dict(
        kind="descendants_vs_branching", pi=pi, m=m, p_c=p_c,
        horizon=horizon, replicas=replicas, tol=tol, seed=master_seed))


def verify_nstar_domination(pi: float, m: int, p_c: float, epsilon: float,
                            horizon: int, replicas: int, master_seed: int,
                            workers: int = 1) -> DominanceTable:
    """Tails of the stopped master count vs the mixture-law dominator.

    Requires pi*(1+5*epsilon) < 1; the dominating branching process has
    offspring Y' + 2*Y'' with Y' ~ Poisson(pi*(1+3*epsilon)) and
    Y'' ~ Poisson(epsilon).  The master count is killed at the first of:
    master extinction, descendant blow-up, or a strong mutant appearing.
    """
    if not 0.0 < pi < 1.0:
        raise PreconditionError(f"requires pi < 1, got {pi}")
    if epsilon <= 0.0 or pi * (1.0 + 5.0 * epsilon) >= 1.0:
        raise PreconditionError(
            f"epsilon={epsilon} infeasible: needs pi*(1+5*eps) < 1, got "
            f"{pi * (1.0 + 5.0 * epsilon)}")
    task = _peak_task(pi, m, p_c, master_seed, horizon=horizon)
    reports = run_replicas(task, replicas, workers)
    stopped = np.zeros((replicas, horizon + 1), dtype=np.int64)
    for r, report in enumerate(reports):
        taus = [t for t in (report.times.tau0, report.times.tau1,
                            report.times.tau2) if t is not None]
        tau = min(taus) if taus else horizon + 1
        for n in range(horizon + 1):
            stopped[r, n] = report.n_master[n] if tau >= n else 0
    law = poisson_mixture(pi * (1.0 + 3.0 * epsilon), epsilon)
    gw = _gw_series(law, horizon, replicas, substream(master_seed, 1, 1))
    tol = dkw_epsilon(replicas, DKW_CONFIDENCE) * 2
    rows = _tail_table(stopped, gw, k_max=m + 1, tol=tol)
    return DominanceTable(rows, meta=dict(
        kind="masters_vs_mixture", pi=pi, m=m, p_c=p_c, epsilon=epsilon,
        horizon=horizon, replicas=replicas, tol=tol, seed=master_seed))


# ------------------------------------------- one-step conditioned sampling

def one_step_level_counts(pop_bits: np.ndarray, landscape: LandscapeSpec,
                          p_c: float, p_m: float, reference_level: float,
                          reps: int, rng: np.random.Generator,
                          chunk: int = 200_000) -> np.ndarray:
    """Counts of next-generation chromosomes with fitness >= the level.

    Samples ``reps`` independent one-step transitions from the fixed
    population, exploiting that pair rounds are i.i.d. conditionally on
    the parent generation: all reps x m/2 rounds are drawn flat and
    reshaped.  Mutation uses dense per-bit uniforms (small ell only).
    """
    m, ell = pop_bits.shape
    pairs = m // 2
    fitness = fitness_batch(landscape, pop_bits)
    cdf = np.cumsum(fitness)
    out = np.empty(reps, dtype=np.int64)
    done = 0
    while done < reps:
        todo = min(reps - done, max(1, chunk // max(1, pairs)))
        rounds = todo * pairs
        u = rng.random((rounds, 2))
        idx = np.minimum(
            np.searchsorted(cdf, u * cdf[-1], side="right"), m - 1)
        a = pop_bits[idx[:, 0]]
        b = pop_bits[idx[:, 1]]
        crossed = rng.random(rounds) < p_c
        cuts = rng.integers(1, ell, size=rounds)
        suffix = np.arange(ell)[None, :] >= cuts[:, None]
        swap = crossed[:, None] & suffix
        child1 = np.where(swap, b, a)
        child2 = np.where(swap, a, b)
        child1 = child1 ^ (rng.random((rounds, ell)) < p_m)
        child2 = child2 ^ (rng.random((rounds, ell)) < p_m)
        hits = (fitness_batch(landscape, child1) >= reference_level).astype(np.int64) \
            + (fitness_batch(landscape, child2) >= reference_level)
        out[done:done + todo] = hits.reshape(todo, pairs).sum(axis=1)
        done += todo
    return out


def verify_one_step_dominance(m: int, ell: int, pi: float, p_c: float,
                              n0_masters: int, samples_per_state: int,
                              master_seed: int) -> DominanceTable:
    """GA one-step tails vs exact lower-chain rows, state by state.

    The initial sharp-peak population with ``n0_masters`` peak copies
    fixes the fitness ratio; for every conditioning state i compatible
    with the pre-arrival constraint (mean fitness still below
    sqrt(pi) * f0_bar), the GA transition is sampled from a population of
    i peak copies and m-i zeros, and its empirical tails must dominate
    the exact chain row up to the one-sided DKW tolerance.
    """
    if m > 20:
        raise PreconditionError(f"one-step verification is sized for m <= 20, got {m}")
    if pi <= 1.0:
        raise PreconditionError(f"requires pi > 1, got {pi}")
    if not 1 <= n0_masters < m:
        raise ConfigError(f"n0_masters must lie in 1..{m - 1}")
    f0_bar = (2.0 * n0_masters + (m - n0_masters)) / m
    ratio = 2.0 / f0_bar
    params = params_from_pi(m=m, pi=pi, ratio=ratio, p_c=p_c, ell=ell)
    matrix = transition_matrix(params)
    landscape = sharp_peak(ell)
    tol = dkw_epsilon(samples_per_state, DKW_CONFIDENCE)
    arrival = math.sqrt(pi) * f0_bar
    rows = []
    feasible = [i for i in range(m + 1) if (m + i) / m < arrival]
    for i in feasible:
        bits = np.zeros((m, ell), dtype=np.uint8)
        bits[:i] = 1
        rng = substream(master_seed, 2, i)
        counts = one_step_level_counts(bits, landscape, p_c, params.p_m, 2.0,
                                       samples_per_state, rng)
        ga_tails = np.array([(counts >= j).mean() for j in range(m + 1)])
        chain_tails = np.cumsum(matrix[i][::-1])[::-1]
        for j in range(m + 1):
            rows.append(DominanceRow(
                level=i, k=j, dominated=float(chain_tails[j]),
                dominating=float(ga_tails[j]), tol=tol,
                ok=chain_tails[j] <= ga_tails[j] + tol))
    return DominanceTable(rows, meta=dict(
        kind="chain_vs_ga_one_step", m=m, ell=ell, pi=pi, p_c=p_c,
        p_m=params.p_m, n0_masters=n0_masters, states=feasible,
        samples_per_state=samples_per_state, tol=tol, seed=master_seed))


# ----------------------------------------------------- mutant bookkeeping

@dataclass
class Tau2Report:
    tau2_values: list[int | None]
    d_max: np.ndarray             # replicas x (horizon+1)
    recursion_violations: int
    freq_tau2_beyond: float       # tau2 > ln(ell)/5, censored counted as beyond
    threshold: float
    meta: dict


def measure_tau2_and_d(pi: float, m: int, p_c: float, kappa: float,
                       replicas: int, master_seed: int,
                       workers: int = 1) -> Tau2Report:
    """Distribution of the strong-mutant time and the ones-count recursion.

    Tracks the maximum ones-count among non-descendants, asserts the
    per-step bound D_{n+1} <= 2*D_n + (max flips that step) in every
    replica, and reports how often the strong-mutant time exceeds
    ln(ell)/5.
    """
    if not 0.0 < pi < 1.0:
        raise PreconditionError(f"requires the disordered regime, got pi={pi}")
    task = _peak_task(pi, m, p_c, master_seed, kappa=kappa)
    reports = run_replicas(task, replicas, workers)
    tau2s = [r.times.tau2 for r in reports]
    threshold = math.log(task.ell) / 5.0
    beyond = sum(1 for t in tau2s if t is None or t > threshold)
    return Tau2Report(
        tau2_values=tau2s,
        d_max=np.stack([r.d_max for r in reports]),
        recursion_violations=sum(not r.d_recursion_ok for r in reports),
        freq_tau2_beyond=beyond / len(reports),
        threshold=threshold,
        meta=dict(pi=pi, m=m, ell=task.ell, p_c=p_c, kappa=kappa,
                  horizon=task.horizon, replicas=replicas, seed=master_seed))
