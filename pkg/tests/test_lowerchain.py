"""Lower-bounding chain: exact matrix, coupling, hitting times."""

import math

import numpy as np
import pytest
from scipy.stats import binom, chi2_contingency

from sgalab.errors import (
    CapabilityError,
    ConfigError,
    DomainError,
    PreconditionError,
)
from sgalab.lowerchain import (
    LowerChainParams,
    coupled_trajectories,
    epsilon_m,
    export_matrix_text,
    geometric_growth_check,
    hitting_time_tau_star,
    params_from_pi,
    transition_matrix,
    transition_sample,
)
from sgalab.streams import make_stream

from statutil import brute_force_row, chi_square_pvalue, freq_ci_halfwidth


# -------------------------------------------------------------- parameters

def test_params_consistency_enforced():
    with pytest.raises(ConfigError):
        LowerChainParams(m=10, pi=1.5, ratio=2.0, p_c=0.1, p_m=0.0, ell=8)


def test_params_from_pi_solves_p_m():
    params = params_from_pi(m=10, pi=1.3, ratio=2.0, p_c=0.1, ell=8)
    implied = params.ratio * (1 - params.p_c) * (1 - params.p_m) ** params.ell
    assert implied == pytest.approx(params.pi, abs=1e-15)
    assert params.pi == pytest.approx(1.3, abs=1e-12)


def test_params_from_pi_rejects_unreachable():
    with pytest.raises(ConfigError):
        params_from_pi(m=10, pi=1.5, ratio=1.2, p_c=0.5, ell=8)


# ----------------------------------------------------------------- epsilon

def test_epsilon_zero_state():
    params = params_from_pi(m=10, pi=1.3, ratio=2.0, p_c=0.1, ell=8)
    assert epsilon_m(params, 0) == 0.0


def test_epsilon_identity_below_clamp():
    params = params_from_pi(m=100, pi=1.44, ratio=2.0, p_c=0.1, ell=16)
    for i in range(0, 60):
        eps = epsilon_m(params, i)
        if eps < 1.0:
            assert params.m * (1 - params.p_c) * eps == pytest.approx(
                i * math.sqrt(params.pi), rel=1e-12)


def test_epsilon_worked_example():
    # m=100, pi=1.44, p_c=0.2, i=10 -> 10 * 1.2 / (100 * 0.8) = 0.15.
    params = params_from_pi(m=100, pi=1.44, ratio=1.8, p_c=0.2, ell=12)
    assert epsilon_m(params, 10) == pytest.approx(0.15, abs=1e-12)


def test_epsilon_clamp_out_of_regime():
    # Small pi pushes the raw value past 1 for i near m.
    params = params_from_pi(m=6, pi=0.25, ratio=2.0, p_c=0.5, ell=4)
    assert epsilon_m(params, 6) == 1.0
    assert epsilon_m(params, params.m) == 1.0


def test_epsilon_rejects_bad_state():
    params = params_from_pi(m=10, pi=1.3, ratio=2.0, p_c=0.1, ell=8)
    with pytest.raises(DomainError):
        epsilon_m(params, -1)
    with pytest.raises(DomainError):
        epsilon_m(params, 11)


# ------------------------------------------------------------- transitions

def test_transition_from_zero_is_absorbing():
    params = params_from_pi(m=10, pi=1.3, ratio=2.0, p_c=0.1, ell=8)
    rng = make_stream(1)
    assert all(transition_sample(params, 0, rng) == 0 for _ in range(100))


def test_transition_resurrect_option():
    params = params_from_pi(m=10, pi=1.3, ratio=2.0, p_c=0.1, ell=8)
    rng = make_stream(2)
    assert transition_sample(params, 0, rng, resurrect=True) == 1


def test_transition_all_crossed_gives_zero():
    # p_c = 1 makes every pair indicator zero; pi degenerates to 0.
    params = LowerChainParams(m=10, pi=0.0, ratio=2.0, p_c=1.0, p_m=0.0, ell=8)
    rng = make_stream(3)
    assert all(transition_sample(params, i, rng) == 0 for i in range(11))


def test_transition_histogram_matches_matrix_row():
    params = params_from_pi(m=10, pi=1.3, ratio=2.0, p_c=0.1, ell=8)
    matrix = transition_matrix(params)
    rng = make_stream(4)
    draws = 100_000
    for i in (1, 3, 7):
        counts = np.bincount(
            [transition_sample(params, i, rng) for _ in range(draws)],
            minlength=params.m + 1)
        assert chi_square_pvalue(counts, matrix[i]) > 0.01


# ------------------------------------------------------------ exact matrix

def test_matrix_rows_sum_to_one():
    params = params_from_pi(m=12, pi=1.3, ratio=2.0, p_c=0.15, ell=8)
    matrix = transition_matrix(params)
    assert np.abs(matrix.sum(axis=1) - 1.0).max() < 1e-12
    assert np.all(matrix >= 0.0)


def test_matrix_row_zero_is_point_mass():
    params = params_from_pi(m=8, pi=1.3, ratio=2.0, p_c=0.1, ell=8)
    matrix = transition_matrix(params)
    assert matrix[0, 0] == 1.0
    assert np.all(matrix[0, 1:] == 0.0)


def test_matrix_resurrect_row_zero():
    params = params_from_pi(m=8, pi=1.3, ratio=2.0, p_c=0.1, ell=8)
    matrix = transition_matrix(params, resurrect=True)
    assert matrix[0, 1] == 1.0
    assert matrix[0].sum() == 1.0


def test_matrix_matches_brute_force_convolution_m6():
    params = params_from_pi(m=6, pi=1.3, ratio=4.0 / 3.0, p_c=0.02, ell=4)
    matrix = transition_matrix(params)
    for i in range(7):
        oracle = brute_force_row(params, i)
        assert np.abs(matrix[i] - oracle).max() < 1e-12


def test_matrix_capability_limit():
    params = params_from_pi(m=66, pi=1.3, ratio=2.0, p_c=0.1, ell=8)
    with pytest.raises(CapabilityError):
        transition_matrix(params)


def test_matrix_mean_identity():
    # Exact one-step mean from state i equals i*sqrt(pi) below the clamp.
    params = params_from_pi(m=64, pi=1.5, ratio=2.0, p_c=0.1, ell=16)
    matrix = transition_matrix(params)
    js = np.arange(65)
    for i in (1, 2, 5, 10, 20):
        assert matrix[i] @ js == pytest.approx(i * math.sqrt(1.5), rel=1e-10)


def test_matrix_export_format():
    params = params_from_pi(m=4, pi=1.3, ratio=2.0, p_c=0.1, ell=8)
    text = export_matrix_text(transition_matrix(params))
    lines = text.strip().split("\n")
    assert len(lines) == 5
    parsed = np.array([[float(v) for v in line.split()] for line in lines])
    assert np.abs(parsed - transition_matrix(params)).max() < 1e-16


# ---------------------------------------------------------------- coupling

def test_coupling_identical_states_identical_paths():
    params = params_from_pi(m=12, pi=1.3, ratio=2.0, p_c=0.1, ell=8)
    paths = coupled_trajectories(params, [4, 4], horizon=20, rng=make_stream(5))
    assert len(paths) == 1  # duplicate states collapse to one chain
    params2 = params_from_pi(m=12, pi=1.3, ratio=2.0, p_c=0.1, ell=8)
    a = coupled_trajectories(params2, [4], horizon=20, rng=make_stream(6))[4]
    b = coupled_trajectories(params2, [4], horizon=20, rng=make_stream(6))[4]
    assert np.array_equal(a, b)


def test_coupling_zero_state_constant():
    params = params_from_pi(m=12, pi=1.3, ratio=2.0, p_c=0.1, ell=8)
    paths = coupled_trajectories(params, [0], horizon=15, rng=make_stream(7))
    assert np.all(paths[0] == 0)


def test_coupling_preserves_order_every_step():
    params = params_from_pi(m=20, pi=1.3, ratio=2.0, p_c=0.1, ell=8)
    rng = make_stream(8)
    for _ in range(1_000):
        paths = coupled_trajectories(params, [1, 5, 10], horizon=10, rng=rng)
        assert np.all(paths[1] <= paths[5])
        assert np.all(paths[5] <= paths[10])


# ------------------------------------------------------------ hitting time

def test_hitting_trivial_when_threshold_below_start():
    # m/sqrt(pi) <= 1: started at 1 the chain has already arrived.
    params = params_from_pi(m=2, pi=4.0, ratio=5.0, p_c=0.2, ell=4)
    freq, hist = hitting_time_tau_star(params, horizon=5, replicas=500,
                                       rng=make_stream(9))
    assert freq == 1.0
    assert hist[0] == 500


def test_hitting_requires_supercritical_pi():
    params = params_from_pi(m=16, pi=0.8, ratio=2.0, p_c=0.1, ell=8)
    with pytest.raises(PreconditionError):
        hitting_time_tau_star(params, 10, 100, make_stream(10))


def test_hitting_rarely_succeeds_when_crossover_kills():
    # p_c near 1 forces nearly every pair indicator to zero; the chain
    # almost always dies at the first step.
    params = params_from_pi(m=6, pi=1.3, ratio=1300.0, p_c=0.999, ell=4)
    freq, _ = hitting_time_tau_star(params, horizon=10, replicas=2_000,
                                    rng=make_stream(11))
    assert freq < 0.05


def test_hitting_frequency_stable_across_m():
    # Stability needs the horizon factor to beat 1/ln(rho) for some
    # rho < sqrt(pi); at pi = 1.5 that floor is 1/ln(sqrt(1.5)) = 4.94,
    # so kappa = 6 gives m-independent frequencies (kappa = 4 still decays).
    rng = make_stream(12)
    freqs = {}
    for m in (64, 256, 1024):
        params = params_from_pi(m=m, pi=1.5, ratio=2.0, p_c=0.1, ell=m)
        horizon = math.ceil(6 * math.log(m))
        freqs[m], _ = hitting_time_tau_star(params, horizon, replicas=4_000,
                                            rng=rng)
    values = list(freqs.values())
    assert min(values) > 0.2
    for a, b in zip(values, values[1:]):
        assert abs(a - b) <= 4 * math.sqrt(
            freq_ci_halfwidth(a, 4_000) ** 2 + freq_ci_halfwidth(b, 4_000) ** 2
        ) / 1.96


def test_hitting_histogram_consistent():
    params = params_from_pi(m=32, pi=1.5, ratio=2.0, p_c=0.1, ell=16)
    freq, hist = hitting_time_tau_star(params, horizon=20, replicas=3_000,
                                       rng=make_stream(13))
    assert hist.sum() == pytest.approx(freq * 3_000)


# ------------------------------------------------------- geometric growth

def test_growth_trivial_at_zero():
    params = params_from_pi(m=32, pi=1.5, ratio=2.0, p_c=0.1, ell=16)
    freq = geometric_growth_check(params, 0, 1.1, 1_000, make_stream(14))
    assert freq == 1.0


def test_growth_failure_shrinks_in_i():
    params = params_from_pi(m=1024, pi=1.5, ratio=2.0, p_c=0.1, ell=32)
    rng = make_stream(15)
    f8 = geometric_growth_check(params, 8, 1.1, 100_000, rng)
    f32 = geometric_growth_check(params, 32, 1.1, 100_000, rng)
    assert f32 < f8 - 1.96 * math.sqrt(
        f8 * (1 - f8) / 100_000 + f32 * (1 - f32) / 100_000)


def test_growth_log_frequency_roughly_linear():
    params = params_from_pi(m=1024, pi=1.5, ratio=2.0, p_c=0.1, ell=32)
    rng = make_stream(16)
    states = np.array([4, 8, 12, 16, 20])
    freqs = np.array([
        geometric_growth_check(params, int(i), 1.1, 200_000, rng)
        for i in states])
    assert np.all(freqs > 0)
    slope, _ = np.polyfit(states, np.log(freqs), 1)
    assert slope < 0


def test_growth_mean_identity_via_samples():
    # E[N_1 | N_0 = i] = i*sqrt(pi) below the clamp (sampled check).
    params = params_from_pi(m=256, pi=1.44, ratio=2.0, p_c=0.1, ell=16)
    rng = make_stream(17)
    i = 10
    draws = np.array([transition_sample(params, i, rng) for _ in range(40_000)])
    expected = i * math.sqrt(1.44)
    se = draws.std() / math.sqrt(draws.size)
    assert abs(draws.mean() - expected) < 4 * se


def test_growth_validates_inputs():
    params = params_from_pi(m=32, pi=1.5, ratio=2.0, p_c=0.1, ell=16)
    with pytest.raises(DomainError):
        geometric_growth_check(params, 4, 2.0, 100, make_stream(18))  # rho too big
    subcritical = params_from_pi(m=32, pi=0.9, ratio=2.0, p_c=0.1, ell=16)
    with pytest.raises(PreconditionError):
        geometric_growth_check(subcritical, 4, 1.1, 100, make_stream(19))


# ------------------------------------------- first-visit successor lemma

def test_first_visit_successors_independent():
    # On the resurrected chain the values observed one step after the
    # first visits to distinct states are independent, each following its
    # own matrix row.  Every run continues until all targets are visited
    # (a.s. finite for the irreducible chain), so no selection bias enters;
    # pairwise independence is checked by contingency chi-square at m=12.
    params = params_from_pi(m=12, pi=1.1, ratio=2.0, p_c=0.3, ell=8)
    matrix = transition_matrix(params, resurrect=True)
    rng = make_stream(20)
    targets = (1, 2, 3)
    rows = []
    for _ in range(3_000):
        state = 1
        visit_next: dict[int, int] = {}
        pending = dict.fromkeys(targets)
        for _ in range(100_000):
            nxt = transition_sample(params, state, rng, resurrect=True)
            if state in pending and state not in visit_next:
                visit_next[state] = nxt
                if len(visit_next) == len(targets):
                    break
            state = nxt
        assert len(visit_next) == len(targets), "visit cap exceeded"
        rows.append([visit_next[s] for s in targets])
    rows = np.array(rows)
    # Marginals match the corresponding matrix rows.
    for col, state in enumerate(targets):
        counts = np.bincount(rows[:, col], minlength=params.m + 1)
        assert chi_square_pvalue(counts, matrix[state]) > 0.01
    # Pairwise independence.
    for a, b in ((0, 1), (0, 2), (1, 2)):
        x = np.minimum(rows[:, a], 4)  # bin the sparse upper range
        y = np.minimum(rows[:, b], 4)
        table = np.zeros((5, 5))
        for xi, yi in zip(x, y):
            table[xi, yi] += 1
        table = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
        _, pvalue, _, _ = chi2_contingency(table)
        assert pvalue > 0.01
