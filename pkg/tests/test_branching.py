"""Galton-Watson simulation, extinction fixed points, and hitting times."""

import math

import numpy as np
import pytest

from sgalab.branching import (
    GwTrajectory,
    explicit_law,
    gw_extinction_frequency,
    gw_extinction_pgf,
    gw_simulate,
    gw_survival_decay,
    gw_threshold_hitting,
    poisson_mixture,
    scaled_poisson,
)
from sgalab.errors import DomainError, PreconditionError
from sgalab.streams import make_stream

from statutil import freq_ci_halfwidth

# Fixed point of q = exp(4 (q^2 - 1)), computed by iteration beforehand.
TWO_POISSON4_EXTINCTION = 0.018340298547498


def test_point_mass_one_never_extinct():
    traj = gw_simulate(explicit_law([0.0, 1.0]), horizon=50, rng=make_stream(1))
    assert traj.extinct_at is None
    assert np.all(traj.sizes == 1)
    assert traj.sizes.size == 51


def test_point_mass_zero_dies_immediately():
    traj = gw_simulate(explicit_law([1.0]), horizon=10, rng=make_stream(2))
    assert traj.extinct_at == 1
    assert list(traj.sizes) == [1, 0]


def test_absorption_is_permanent():
    # A trajectory stops at its first zero, so zero is trivially permanent;
    # spot-check that no recorded trajectory resurrects.
    law = scaled_poisson(1, 0.8)
    rng = make_stream(3)
    for _ in range(200):
        traj = gw_simulate(law, horizon=30, rng=rng)
        if traj.extinct_at is not None:
            assert traj.sizes[traj.extinct_at] == 0
            assert traj.extinct_at == traj.sizes.size - 1


def test_two_poisson4_first_generation_mean():
    # Z_1 ~ 2 * Poisson(4): mean 8, var 4*4 = 16.
    law = scaled_poisson(2, 4.0)
    rng = make_stream(4)
    z1 = np.array([gw_simulate(law, 1, rng).sizes[1] for _ in range(20_000)])
    se = math.sqrt(16.0 / z1.size)
    assert abs(z1.mean() - 8.0) < 4 * se
    assert np.all(z1 % 2 == 0)  # support on even integers


def test_overflow_cap_flags_and_truncates():
    law = explicit_law([0.0] * 1000 + [1.0])  # every parent has 1000 children
    traj = gw_simulate(law, horizon=10, rng=make_stream(5), cap=10_000)
    assert traj.overflowed
    assert traj.sizes[-1] > 10_000 or traj.sizes[-1] == 10_000
    assert traj.sizes.size < 12


def test_extinction_pgf_values():
    assert gw_extinction_pgf(scaled_poisson(1, 0.5)) == 1.0
    assert gw_extinction_pgf(explicit_law([0.0, 0.0, 1.0])) == 0.0
    assert gw_extinction_pgf(explicit_law([0.0, 1.0])) == 0.0
    q = gw_extinction_pgf(scaled_poisson(2, 4.0))
    assert q == pytest.approx(TWO_POISSON4_EXTINCTION, abs=1e-10)
    assert q == pytest.approx(math.exp(4 * (q * q - 1)), abs=1e-10)


def test_extinction_pgf_subcritical_mixture():
    assert gw_extinction_pgf(poisson_mixture(0.86, 0.02)) == 1.0


def test_monte_carlo_extinction_matches_pgf():
    rng = make_stream(6)
    for law in (scaled_poisson(1, 0.5), scaled_poisson(1, 1.5),
                scaled_poisson(2, 4.0), poisson_mixture(0.86, 0.02)):
        q = gw_extinction_pgf(law)
        freq = gw_extinction_frequency(law, horizon=200, replicas=20_000, rng=rng)
        se = max(math.sqrt(freq * (1 - freq) / 20_000), 1e-4)
        assert abs(freq - q) <= 3 * se, (law.kind, law.mean(), freq, q)


def test_survival_decay_poisson_half():
    rng = make_stream(7)
    survival = gw_survival_decay(scaled_poisson(1, 0.5), horizon=12,
                                 replicas=50_000, rng=rng)
    assert survival[0] == 1.0
    # Strictly decreasing while well-resolved (CI-scale slack at the tail).
    for n in range(1, 9):
        assert survival[n + 1] <= survival[n] + freq_ci_halfwidth(survival[n], 50_000)
    # Log-frequencies roughly linear in n: fit on resolved entries.
    ns = np.arange(1, 10)
    logs = np.log(survival[1:10])
    slope, intercept = np.polyfit(ns, logs, 1)
    fitted = slope * ns + intercept
    ss_res = np.sum((logs - fitted) ** 2)
    ss_tot = np.sum((logs - logs.mean()) ** 2)
    assert slope < 0
    assert 1 - ss_res / ss_tot > 0.95


def test_survival_decay_point_mass_zero():
    survival = gw_survival_decay(explicit_law([1.0]), horizon=5,
                                 replicas=1000, rng=make_stream(8))
    assert survival[0] == 1.0
    assert np.all(survival[1:] == 0.0)


def test_survival_decay_rejects_supercritical():
    with pytest.raises(PreconditionError):
        gw_survival_decay(scaled_poisson(2, 4.0), 10, 100, make_stream(9))


def test_threshold_hitting_kappa_zero():
    freq = gw_threshold_hitting(scaled_poisson(2, 4.0), 0.25, n=100, kappa=0.0,
                                replicas=1000, rng=make_stream(10))
    assert freq == 0.0


def test_threshold_hitting_exponent_zero_is_first_step():
    # Threshold n^0 = 1 and 1 < kappa*ln(n) <= 2, so the event is Z_1 > 1,
    # which for 2*Poisson(4) leaves out only Y = 0: frequency 1 - e^{-4}.
    n, kappa = 5, 1.0  # kappa*ln(5) = 1.609...
    freq = gw_threshold_hitting(scaled_poisson(2, 4.0), 0.0, n=n, kappa=kappa,
                                replicas=100_000, rng=make_stream(11))
    exact = 1.0 - math.exp(-4.0)
    assert abs(freq - exact) < 4 * freq_ci_halfwidth(exact, 100_000) / 1.96


def test_threshold_hitting_decreases_in_n():
    # Small kappa keeps the step budget at one generation across the grid,
    # so the rising threshold n^(1/4) drives the frequency down in n.
    # (With kappa large the growing horizon floor(kappa*ln n) dominates at
    # desk scale and the asymptotic decay is invisible.)
    law = scaled_poisson(2, 4.0)
    rng = make_stream(12)
    freqs = [gw_threshold_hitting(law, 0.25, n=n, kappa=0.18,
                                  replicas=30_000, rng=rng)
             for n in (1_000, 3_000, 10_000)]
    for a, b in zip(freqs, freqs[1:]):
        assert b <= a + freq_ci_halfwidth(a, 30_000)
    assert freqs[-1] < freqs[0]  # strict overall decrease


def test_threshold_hitting_rejects_subcritical():
    with pytest.raises(PreconditionError):
        gw_threshold_hitting(scaled_poisson(1, 0.5), 0.25, 100, 1.0, 100,
                             make_stream(13))


def test_law_validation():
    with pytest.raises(DomainError):
        explicit_law([0.5, 0.4])
    with pytest.raises(DomainError):
        scaled_poisson(0, 4.0)
    with pytest.raises(DomainError):
        poisson_mixture(-1.0, 0.5)


def test_law_means():
    assert scaled_poisson(2, 4.0).mean() == 8.0
    assert poisson_mixture(0.8, 0.1).mean() == pytest.approx(1.0)
    assert explicit_law([0.25, 0.5, 0.25]).mean() == 1.0


def test_mixture_discrete_law_matches_convolution_oracle():
    # Law of Y' + 2Y'' assembled independently from Poisson pmfs.
    from scipy.stats import poisson as sp_poisson
    law = poisson_mixture(0.9, 0.3).to_discrete_law()
    ks = np.arange(law.pmf.size)
    direct = np.zeros_like(law.pmf)
    for yp in range(40):
        for ypp in range(25):
            k = yp + 2 * ypp
            if k < direct.size:
                direct[k] += sp_poisson.pmf(yp, 0.9) * sp_poisson.pmf(ypp, 0.3)
    assert np.allclose(law.pmf, direct, atol=1e-10)
    assert law.mean() == pytest.approx(1.5, abs=1e-9)
