"""The monotone counting chain that bounds exact-copy production from below.

State N_n lives on {0, ..., m}.  One step draws m/2 Bernoulli(1 - p_c)
pair indicators Z_k and m Bernoulli(eps(i)) copy indicators Y_k and moves
to sum_k Z_k * (Y_{2k-1} + Y_{2k}), where

    eps(i) = min(1, i * ratio * (1 - p_m)**ell / (m * sqrt(pi)))

with ratio the initial best-to-mean fitness quotient.  Below the clamp
the identity m * (1 - p_c) * eps(i) = i * sqrt(pi) holds exactly, so the
chain grows geometrically at rate sqrt(pi) while small.  State 0 is
absorbing; every operation accepts ``resurrect=True`` to replace the
absorbing state with a forced 0 -> 1 transition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom as _binom

from .errors import CapabilityError, ConfigError, DomainError, PreconditionError

MAX_EXACT_M = 64
CONSISTENCY_TOL = 1e-12


@dataclass(frozen=True)
class LowerChainParams:
    """Chain parameters; pi must equal ratio*(1-p_c)*(1-p_m)**ell exactly."""

    m: int
    pi: float
    ratio: float
    p_c: float
    p_m: float
    ell: int

    def __post_init__(self):
        if self.m <= 0 or self.m % 2 != 0:
            raise ConfigError(f"m must be positive and even, got {self.m}")
        # pi = 0 only arises in the degenerate corners p_c = 1 or p_m = 1,
        # kept constructible so those corners stay testable.
        if self.pi < 0.0:
            raise ConfigError(f"pi must be nonnegative, got {self.pi}")
        if self.ratio <= 1.0:
            raise ConfigError(f"fitness ratio must exceed 1, got {self.ratio}")
        for name in ("p_c", "p_m"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {value}")
        if self.ell < 1:
            raise ConfigError(f"ell must be positive, got {self.ell}")
        implied = self.ratio * (1.0 - self.p_c) * (1.0 - self.p_m) ** self.ell
        if abs(implied - self.pi) > CONSISTENCY_TOL * max(1.0, self.pi):
            raise ConfigError(
                f"inconsistent parameters: ratio*(1-p_c)*(1-p_m)**ell = {implied} "
                f"but pi = {self.pi}")


def params_from_pi(m: int, pi: float, ratio: float, p_c: float,
                   ell: int) -> LowerChainParams:
    """Build consistent parameters by solving (1-p_m)**ell for p_m."""
    base = pi / (ratio * (1.0 - p_c)) if p_c < 1.0 else math.inf
    if not 0.0 < base <= 1.0:
        raise ConfigError(
            f"pi={pi} is not reachable with ratio={ratio}, p_c={p_c}: "
            f"needs (1-p_m)**ell = {base}")
    p_m = 1.0 - base ** (1.0 / ell)
    # Recompute pi from the realized p_m so the consistency check is exact.
    realized = ratio * (1.0 - p_c) * (1.0 - p_m) ** ell
    return LowerChainParams(m, realized, ratio, p_c, p_m, ell)


def epsilon_m(params: LowerChainParams, i: int) -> float:
    """Copy indicator success probability from state i, clamped to [0, 1].

    The unclamped value satisfies m*(1-p_c)*eps(i) = i*sqrt(pi) exactly;
    the clamp can only trigger out of regime (i near m with small pi).
    """
    if not 0 <= i <= params.m:
        raise DomainError(f"state must lie in 0..{params.m}, got {i}")
    if i == 0:
        return 0.0
    if params.pi == 0.0:
        return 1.0  # limit of the clamp as pi -> 0
    raw = (i * params.ratio * (1.0 - params.p_m) ** params.ell
           / (params.m * math.sqrt(params.pi)))
    return min(1.0, raw)


def transition_sample(params: LowerChainParams, i: int,
                      rng: np.random.Generator, resurrect: bool = False) -> int:
    """One step from state i via the literal Z/Y construction."""
    if resurrect and i == 0:
        return 1
    eps = epsilon_m(params, i)
    half = params.m // 2
    z = rng.random(half) < (1.0 - params.p_c)
    y = rng.random(params.m) < eps
    pair_copies = y[0::2].astype(np.int64) + y[1::2]
    return int(min((z * pair_copies).sum(), params.m))


def transition_matrix(params: LowerChainParams,
                      resurrect: bool = False) -> np.ndarray:
    """Exact (m+1) x (m+1) row-stochastic transition matrix.

    Entry (i, j) sums over the number b of uncrossed pairs:
    C(m/2, b)(1-p_c)^b p_c^(m/2-b) C(2b, j) eps^j (1-eps)^(2b-j).
    Only available for m <= 64, where the combinatorics stay exact.
    """
    if params.m > MAX_EXACT_M:
        raise CapabilityError(
            f"exact transition matrix limited to m <= {MAX_EXACT_M}, got {params.m}")
    m, half = params.m, params.m // 2
    b = np.arange(half + 1)
    pair_weights = _binom.pmf(b, half, 1.0 - params.p_c)
    j = np.arange(m + 1)
    matrix = np.zeros((m + 1, m + 1))
    for i in range(m + 1):
        eps = epsilon_m(params, i)
        row = np.zeros(m + 1)
        for nb, weight in zip(b, pair_weights):
            row += weight * _binom.pmf(j, 2 * nb, eps)
        matrix[i] = row
    if resurrect:
        matrix[0] = 0.0
        matrix[0, 1] = 1.0
    return matrix


def export_matrix_text(matrix: np.ndarray) -> str:
    """Dense numeric text: one row per line, entries space-separated."""
    return "\n".join(
        " ".join(format(value, ".17g") for value in row) for row in matrix) + "\n"


def coupled_trajectories(params: LowerChainParams, initial_states: list[int],
                         horizon: int, rng: np.random.Generator,
                         resurrect: bool = False) -> dict[int, np.ndarray]:
    """Drive one chain per initial state with shared randomness.

    Every chain consumes the same pair indicators Z_k^n and uniforms
    U_1^n..U_m^n each step; a chain in state s turns U into copy
    indicators via the threshold eps(s).  Since eps is non-decreasing in
    the state, trajectories started lower never overtake trajectories
    started higher; the absorbing variant asserts this ordering at every
    step.
    """
    if horizon < 0:
        raise DomainError(f"horizon must be nonnegative, got {horizon}")
    states = sorted(set(int(i) for i in initial_states))
    for i in states:
        if not 0 <= i <= params.m:
            raise DomainError(f"initial state {i} outside 0..{params.m}")
    half = params.m // 2
    eps_table = np.array([epsilon_m(params, i) for i in range(params.m + 1)])
    paths = {i: np.empty(horizon + 1, dtype=np.int64) for i in states}
    current = {i: i for i in states}
    for i in states:
        paths[i][0] = i
    for step in range(1, horizon + 1):
        z = rng.random(half) < (1.0 - params.p_c)
        u = rng.random(params.m)
        u_odd, u_even = u[0::2], u[1::2]
        for i in states:
            state = current[i]
            if resurrect and state == 0:
                nxt = 1
            else:
                copies = (u_odd < eps_table[state]).astype(np.int64) \
                    + (u_even < eps_table[state])
                nxt = int((z * copies).sum())
            current[i] = nxt
            paths[i][step] = nxt
        if not resurrect:
            ordered = [current[i] for i in states]
            assert all(a <= b for a, b in zip(ordered, ordered[1:])), \
                "coupling lost monotonicity"
    return paths


def _batch_step(params: LowerChainParams, states: np.ndarray,
                rng: np.random.Generator, resurrect: bool = False) -> np.ndarray:
    """Advance many independent chains one step.

    Collapses the Z/Y construction into two stages with the same law:
    the number of uncrossed pairs B ~ Binomial(m/2, 1-p_c), then
    Binomial(2B, eps(i)) copies.
    """
    eps_table = np.array([epsilon_m(params, i) for i in range(params.m + 1)])
    b = rng.binomial(params.m // 2, 1.0 - params.p_c, size=states.size)
    out = rng.binomial(2 * b, eps_table[states])
    if resurrect:
        out = np.where(states == 0, 1, out)
    return out.astype(np.int64)


def hitting_time_tau_star(params: LowerChainParams, horizon: int, replicas: int,
                          rng: np.random.Generator, resurrect: bool = False,
                          ) -> tuple[float, np.ndarray]:
    """Frequency of reaching m/sqrt(pi) within ``horizon`` from state 1.

    The hitting time is the first n >= 0 with N_n >= m/sqrt(pi); returns
    the success frequency together with the hitting-time histogram of the
    successful runs (index = hitting time).  Requires pi > 1.
    """
    if params.pi <= 1.0:
        raise PreconditionError(f"hitting experiment requires pi > 1, got {params.pi}")
    if horizon < 0 or replicas < 1:
        raise DomainError("horizon must be >= 0 and replicas positive")
    threshold = params.m / math.sqrt(params.pi)
    hit_times = np.full(replicas, -1, dtype=np.int64)
    if 1 >= threshold:
        hit_times[:] = 0
    else:
        states = np.ones(replicas, dtype=np.int64)
        for step in range(1, horizon + 1):
            open_runs = hit_times < 0
            if not open_runs.any():
                break
            states[open_runs] = _batch_step(
                params, states[open_runs], rng, resurrect)
            reached = open_runs & (states >= threshold)
            hit_times[reached] = step
    successes = hit_times[hit_times >= 0]
    frequency = successes.size / replicas
    histogram = np.bincount(successes, minlength=horizon + 1) if successes.size \
        else np.zeros(horizon + 1, dtype=np.int64)
    return float(frequency), histogram


def geometric_growth_check(params: LowerChainParams, i: int, rho: float,
                           replicas: int, rng: np.random.Generator,
                           resurrect: bool = False) -> float:
    """One-step failure frequency P(N_1 <= rho*i | N_0 = i).

    For pi > 1 and states below m/sqrt(pi) the failure probability decays
    like exp(-c*i); the log-frequencies are roughly linear in i.
    """
    if params.pi <= 1.0:
        raise PreconditionError(f"growth check requires pi > 1, got {params.pi}")
    if not 0 <= i <= params.m:
        raise DomainError(f"state must lie in 0..{params.m}, got {i}")
    if not 1.0 < rho < math.sqrt(params.pi):
        raise DomainError(
            f"rho must lie in (1, sqrt(pi)) = (1, {math.sqrt(params.pi)}), got {rho}")
    if replicas < 1:
        raise DomainError("replicas must be positive")
    states = np.full(replicas, int(i), dtype=np.int64)
    nxt = _batch_step(params, states, rng, resurrect)
    return float((nxt <= rho * i).mean())
