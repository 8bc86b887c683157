"""Adaptive rate control: closed-form inversion, bounds, bit-exactness."""

import math

import numpy as np
import pytest

from sgalab.core import GaConfig, Population, PopulationStats, next_generation
from sgalab.errors import ConfigError
from sgalab.experiments import peak_start, run_replicas, _peak_task
from sgalab.landscapes import one_max_shifted, sharp_peak
from sgalab.probability import pi_parameter
from sgalab.streams import make_stream
from sgalab.tuner import TunerPolicy, adapt_parameters, run_adaptive_ga

from statutil import freq_ci_halfwidth


def stats_for(ratio: float) -> PopulationStats:
    return PopulationStats(f_star=2.0, f_bar=2.0 / ratio, n_master=0,
                           n_descendants=0, n_at_least=0)


def test_converged_population_is_infeasible():
    result = adapt_parameters(stats_for(1.0), (0.1, 0.05), 16, TunerPolicy())
    assert not result.feasible
    assert result.p_m == 0.0  # minimal bound
    assert 0.0 <= result.p_c <= 1.0


def test_closed_form_inversion_p_m():
    policy = TunerPolicy(target_pi=1.1, adjust="p_m")
    for ell in (8, 32, 128):
        result = adapt_parameters(stats_for(2.0), (0.1, 0.5), ell, policy)
        assert result.feasible
        assert result.p_m == pytest.approx(1 - (1.1 / 1.8) ** (1 / ell))
        realized = pi_parameter(2.0, 1.0, result.p_c, result.p_m, ell)
        assert realized == pytest.approx(1.1, abs=1e-9)


def test_closed_form_inversion_p_c():
    policy = TunerPolicy(target_pi=1.2, adjust="p_c")
    result = adapt_parameters(stats_for(2.0), (0.5, 0.001), 16, policy)
    assert result.feasible
    realized = pi_parameter(2.0, 1.0, result.p_c, result.p_m, 16)
    assert realized == pytest.approx(1.2, abs=1e-9)
    assert result.p_m == 0.001  # held fixed


def test_both_mode_moves_mutation_only():
    policy = TunerPolicy(target_pi=1.3, adjust="both")
    result = adapt_parameters(stats_for(2.0), (0.2, 0.01), 24, policy)
    assert result.feasible
    assert result.p_c == 0.2
    realized = pi_parameter(2.0, 1.0, result.p_c, result.p_m, 24)
    assert realized == pytest.approx(1.3, abs=1e-9)


def test_feasible_implies_log_inequality():
    # Feasibility forces ell*p_m + p_c < ln(f_star/f_bar).
    policy = TunerPolicy(target_pi=1.05, adjust="p_m")
    for ratio in (1.5, 2.0, 4.0):
        for p_c in (0.0, 0.1, 0.3):
            result = adapt_parameters(stats_for(ratio), (p_c, 0.2), 32, policy)
            if result.feasible:
                assert 32 * result.p_m + result.p_c < math.log(ratio)


def test_bounds_always_respected():
    policy = TunerPolicy(target_pi=1.5, adjust="p_m",
                         p_m_bounds=(0.001, 0.002))
    result = adapt_parameters(stats_for(8.0), (0.0, 0.01), 4, policy)
    assert 0.001 <= result.p_m <= 0.002
    assert not result.feasible  # the unconstrained solution is far larger


def test_policy_validation():
    with pytest.raises(ConfigError):
        TunerPolicy(target_pi=0.9)
    with pytest.raises(ConfigError):
        TunerPolicy(adjust="what")
    with pytest.raises(ConfigError):
        TunerPolicy(p_m_bounds=(0.5, 0.1))


def test_frozen_policy_reproduces_plain_run_bit_for_bit():
    m = ell = 16
    config = GaConfig(ell=ell, m=m, p_c=0.2, p_m=0.03, seed=5)
    land = sharp_peak(ell)
    bits, desc = peak_start(m, ell)
    pop0 = Population(bits.copy(), desc.copy())
    rows, adaptive_final = run_adaptive_ga(land, config, None, 10,
                                           make_stream(5), pop0=pop0)
    pop = Population(bits.copy(), desc.copy())
    rng = make_stream(5)
    for _ in range(10):
        pop, _ = next_generation(pop, land, config, rng)
    assert np.array_equal(pop.bits, adaptive_final.bits)
    assert np.array_equal(pop.descendants, adaptive_final.descendants)
    assert all(r.p_c == 0.2 and r.p_m == 0.03 for r in rows)


def test_telemetry_pi_is_consistent():
    config = GaConfig(ell=12, m=16, p_c=0.1, p_m=0.02, seed=9)
    rows, _ = run_adaptive_ga(one_max_shifted(12), config,
                              TunerPolicy(target_pi=1.2), 15, make_stream(9))
    assert len(rows) == 15
    for row in rows:
        assert row.pi == pytest.approx(
            pi_parameter(row.f_star, row.f_bar, row.p_c, row.p_m, 12),
            abs=1e-12)
        if row.feasible:
            assert row.pi == pytest.approx(1.2, abs=1e-9)
        assert 0.0 <= row.p_c <= 1.0
        assert 0.0 <= row.p_m <= 1.0


def test_adaptive_retains_master_more_often_than_low_pi():
    # Paired comparison on the sharp peak with one initial master: the
    # tuned run keeps the peak through the horizon more often than a
    # fixed low-copy-rate run with the same seeds.
    m = ell = 64
    horizon = math.ceil(2 * math.log(m))
    land = sharp_peak(ell)
    replicas = 200
    policy = TunerPolicy(target_pi=1.1, adjust="p_m")
    fixed_task = _peak_task(0.8, m, 0.1, master_seed=71, horizon=horizon)
    fixed_reports = run_replicas(fixed_task, replicas)
    fixed_kept = sum(bool(np.all(r.f_star >= 2.0)) for r in fixed_reports)

    adaptive_kept = 0
    bits, desc = peak_start(m, ell)
    for index in range(replicas):
        from sgalab.streams import substream
        config = GaConfig(ell=ell, m=m, p_c=0.1, p_m=fixed_task.p_m, seed=71)
        rows, final = run_adaptive_ga(land, config, policy, horizon,
                                      substream(71, index),
                                      pop0=Population(bits.copy(), desc.copy()))
        if all(row.f_star >= 2.0 for row in rows) \
                and final.fitness(land).max() >= 2.0:
            adaptive_kept += 1
    gap = freq_ci_halfwidth(fixed_kept / replicas, replicas) \
        + freq_ci_halfwidth(adaptive_kept / replicas, replicas)
    assert adaptive_kept / replicas > fixed_kept / replicas + gap
