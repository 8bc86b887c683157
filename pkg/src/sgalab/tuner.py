"""Adaptive control of the crossover and mutation rates.

Retunes the operator probabilities before every generation so that the
expected number of exact copies of a best-fit chromosome,

    (f_star / f_bar) * (1 - p_c) * (1 - p_m)**ell,

stays at a target slightly above one.  The inversion is closed-form in
whichever probability the policy designates; when no in-bounds solution
exists the bounds are returned with the feasibility flag cleared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import GaConfig, Population, PopulationStats, next_generation
from .errors import ConfigError
from .landscapes import LandscapeSpec
from .probability import pi_parameter

ADJUST_MODES = ("p_m", "p_c", "both")


@dataclass(frozen=True)
class TunerPolicy:
    """What to aim for and which knob to move.

    With ``adjust="both"`` the crossover rate is held at its current
    value and the mutation rate absorbs the whole adjustment: the
    (1-p_m)**ell factor dominates and single-variable inversion is exact.
    """

    target_pi: float = 1.1
    adjust: str = "p_m"
    p_c_bounds: tuple[float, float] = (0.0, 1.0)
    p_m_bounds: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        if self.target_pi <= 1.0:
            raise ConfigError(f"target_pi must exceed 1, got {self.target_pi}")
        if self.adjust not in ADJUST_MODES:
            raise ConfigError(f"adjust must be one of {ADJUST_MODES}")
        for name in ("p_c_bounds", "p_m_bounds"):
            lo, hi = getattr(self, name)
            if not 0.0 <= lo <= hi <= 1.0:
                raise ConfigError(f"{name} must satisfy 0 <= lo <= hi <= 1")


@dataclass(frozen=True)
class TuneResult:
    p_c: float
    p_m: float
    feasible: bool


def _clamp(value: float, bounds: tuple[float, float]) -> float:
    return min(max(value, bounds[0]), bounds[1])


def adapt_parameters(stats: PopulationStats, current: tuple[float, float],
                     ell: int, policy: TunerPolicy) -> TuneResult:
    """Solve for the probabilities that realize the target copy rate.

    Returns in-bounds probabilities and feasible=True when the target is
    reachable; otherwise the nearest bound values with feasible=False.
    A feasible result always satisfies ell*p_m + p_c < ln(f_star/f_bar).
    """
    p_c, p_m = current
    ratio = stats.f_star / stats.f_bar
    if policy.adjust in ("p_m", "both"):
        held_c = _clamp(p_c, policy.p_c_bounds)
        base = policy.target_pi / (ratio * (1.0 - held_c)) if held_c < 1.0 \
            else math.inf
        if 0.0 < base <= 1.0:
            solved = 1.0 - base ** (1.0 / ell)
            clamped = _clamp(solved, policy.p_m_bounds)
            return TuneResult(held_c, clamped, feasible=clamped == solved
                              and held_c == p_c)
        return TuneResult(held_c, policy.p_m_bounds[0], feasible=False)
    held_m = _clamp(p_m, policy.p_m_bounds)
    shrink = (1.0 - held_m) ** ell
    target_keep = policy.target_pi / (ratio * shrink) if shrink > 0.0 \
        else math.inf
    if 0.0 < target_keep <= 1.0:
        solved = 1.0 - target_keep
        clamped = _clamp(solved, policy.p_c_bounds)
        return TuneResult(clamped, held_m, feasible=clamped == solved
                          and held_m == p_m)
    return TuneResult(policy.p_c_bounds[0], held_m, feasible=False)


@dataclass
class AdaptiveRow:
    """One telemetry record: the state seen and the rates used this step."""

    gen: int
    pi: float
    p_c: float
    p_m: float
    f_star: float
    f_bar: float
    feasible: bool


def run_adaptive_ga(landscape: LandscapeSpec, config: GaConfig,
                    policy: TunerPolicy | None, horizon: int,
                    rng: np.random.Generator,
                    pop0: Population | None = None,
                    ) -> tuple[list[AdaptiveRow], Population]:
    """Generation loop with per-step retuning.

    Before each generation the copy rate is recomputed from the current
    maximal and mean fitness and the designated parameter re-solved; a
    None policy freezes the configured rates (the run then reproduces the
    plain cycle bit for bit on the same stream).  Returns the telemetry
    rows and the final population.
    """
    if horizon < 1:
        raise ConfigError(f"horizon must be positive, got {horizon}")
    if pop0 is None:
        bits = rng.integers(0, 2, size=(config.m, config.ell)).astype(np.uint8)
        pop = Population(bits, np.zeros(config.m, dtype=bool))
    else:
        pop = pop0
    p_c, p_m = config.p_c, config.p_m
    rows: list[AdaptiveRow] = []
    for gen in range(horizon):
        fitness = pop.fitness(landscape)
        f_star = float(fitness.max())
        f_bar = float(fitness.mean())
        if policy is not None:
            stats = PopulationStats(f_star=f_star, f_bar=f_bar, n_master=0,
                                    n_descendants=0, n_at_least=0)
            tuned = adapt_parameters(stats, (p_c, p_m), config.ell, policy)
            p_c, p_m, feasible = tuned.p_c, tuned.p_m, tuned.feasible
        else:
            feasible = False
        rows.append(AdaptiveRow(
            gen=gen, pi=pi_parameter(f_star, f_bar, p_c, p_m, config.ell),
            p_c=p_c, p_m=p_m, f_star=f_star, f_bar=f_bar, feasible=feasible))
        step_config = GaConfig(ell=config.ell, m=config.m, p_c=p_c, p_m=p_m,
                               seed=config.seed)
        pop, _ = next_generation(pop, landscape, step_config, rng)
    return rows, pop
