"""Galton-Watson processes: simulation, extinction, and hitting times.

Reproduction laws come in three kinds:

* ``scaled_poisson(c, lam)``  -- law of c*Y with Y ~ Poisson(lam);
* ``poisson_mixture(lam1, lam2)`` -- law of Y' + 2*Y'' with independent
  Y' ~ Poisson(lam1), Y'' ~ Poisson(lam2);
* ``explicit(pmf)``           -- any finite-support law.

The first two have closed-form means and generating functions, which the
fixed-point extinction solver uses directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError, PreconditionError
from .probability import DiscreteLaw, convolve_laws, law_of_scaled, poisson_law

POPULATION_CAP = 10**9


@dataclass(frozen=True)
class ReproductionLaw:
    """Offspring distribution of one individual."""

    kind: str                      # scaled_poisson | poisson_mixture | explicit
    scale: int = 1                 # c for scaled_poisson
    lam: float = 0.0               # lam for scaled_poisson, lam1 for mixture
    lam2: float = 0.0              # lam2 for poisson_mixture
    pmf: np.ndarray | None = None  # explicit only

    def __post_init__(self):
        if self.kind == "scaled_poisson":
            if self.scale < 1 or self.lam < 0.0:
                raise DomainError(f"bad scaled Poisson ({self.scale}, {self.lam})")
        elif self.kind == "poisson_mixture":
            if self.lam < 0.0 or self.lam2 < 0.0:
                raise DomainError(f"bad Poisson mixture ({self.lam}, {self.lam2})")
        elif self.kind == "explicit":
            pmf = np.asarray(self.pmf, dtype=float)
            if pmf.ndim != 1 or pmf.size == 0 or np.any(pmf < 0.0):
                raise DomainError("explicit law needs a nonnegative pmf vector")
            if abs(pmf.sum() - 1.0) > 1e-12:
                raise DomainError(f"explicit pmf sums to {pmf.sum()}, not 1")
            object.__setattr__(self, "pmf", pmf)
        else:
            raise DomainError(f"unknown reproduction law kind {self.kind!r}")

    def mean(self) -> float:
        if self.kind == "scaled_poisson":
            return self.scale * self.lam
        if self.kind == "poisson_mixture":
            return self.lam + 2.0 * self.lam2
        return float(np.arange(self.pmf.size) @ self.pmf)

    def pgf(self, s: float) -> float:
        """Probability generating function E[s^Y]."""
        if self.kind == "scaled_poisson":
            return math.exp(self.lam * (s**self.scale - 1.0))
        if self.kind == "poisson_mixture":
            return math.exp(self.lam * (s - 1.0) + self.lam2 * (s * s - 1.0))
        return float((self.pmf * s ** np.arange(self.pmf.size)).sum())

    def to_discrete_law(self) -> DiscreteLaw:
        """Truncated law on the integers, for oracles and tail tables."""
        if self.kind == "scaled_poisson":
            return law_of_scaled(poisson_law(self.lam), self.scale)
        if self.kind == "poisson_mixture":
            return convolve_laws(poisson_law(self.lam),
                                 law_of_scaled(poisson_law(self.lam2), 2))
        return DiscreteLaw(self.pmf)

    def is_point_mass_at_one(self) -> bool:
        if self.kind == "explicit":
            return self.pmf.size >= 2 and self.pmf[1] == 1.0
        return False


def scaled_poisson(c: int, lam: float) -> ReproductionLaw:
    return ReproductionLaw("scaled_poisson", scale=c, lam=lam)


def poisson_mixture(lam1: float, lam2: float) -> ReproductionLaw:
    return ReproductionLaw("poisson_mixture", lam=lam1, lam2=lam2)


def explicit_law(pmf) -> ReproductionLaw:
    return ReproductionLaw("explicit", pmf=np.asarray(pmf, dtype=float))


@dataclass
class GwTrajectory:
    """One branching trajectory: sizes Z_0, ..., Z_H from Z_0 = 1.

    ``extinct_at`` is the first generation with size 0, if any; once zero
    the process stays zero.  ``overflowed`` records that the population
    cap was hit and the trajectory truncated there.
    """

    sizes: np.ndarray
    extinct_at: int | None
    overflowed: bool = False


def _offspring_total(law: ReproductionLaw, z: int,
                     rng: np.random.Generator) -> int:
    """Total children of z parents, drawn as one collapsed sample."""
    if law.kind == "scaled_poisson":
        return law.scale * int(rng.poisson(law.lam * z))
    if law.kind == "poisson_mixture":
        return int(rng.poisson(law.lam * z)) + 2 * int(rng.poisson(law.lam2 * z))
    counts = rng.multinomial(z, law.pmf)
    return int(np.arange(law.pmf.size) @ counts)


def gw_simulate(law: ReproductionLaw, horizon: int, rng: np.random.Generator,
                cap: int = POPULATION_CAP) -> GwTrajectory:
    """Simulate Z_0 = 1, Z_{n+1} = sum of Z_n i.i.d. offspring draws.

    Truncated at ``horizon`` generations, or earlier when the size
    exceeds ``cap`` (overflow recorded).
    """
    if horizon < 1:
        raise DomainError(f"horizon must be positive, got {horizon}")
    sizes = [1]
    extinct_at = None
    overflowed = False
    z = 1
    for _ in range(horizon):
        z = _offspring_total(law, z, rng)
        sizes.append(z)
        if z == 0:
            extinct_at = len(sizes) - 1
            break
        if z > cap:
            overflowed = True
            break
    return GwTrajectory(np.array(sizes, dtype=np.int64), extinct_at, overflowed)


def gw_extinction_pgf(law: ReproductionLaw, tol: float = 1e-12,
                      max_iter: int = 10**6) -> float:
    """Extinction probability: smallest fixed point of q = G(q) in [0, 1].

    Iterates q <- G(q) from 0, which converges monotonically to the
    minimal fixed point.  Laws with mean <= 1 go extinct almost surely
    (except the degenerate point mass at one child), so the exact value 1
    is returned directly there rather than waiting out a slow critical
    iteration.
    """
    if law.is_point_mass_at_one():
        return 0.0
    if law.mean() <= 1.0:
        return 1.0
    q = 0.0
    for _ in range(max_iter):
        q_next = law.pgf(q)
        if abs(q_next - q) <= tol:
            return float(q_next)
        q = q_next
    raise NumericalError(f"extinction fixed point did not converge within {max_iter} iterations")


def _step_batch(law: ReproductionLaw, sizes: np.ndarray,
                rng: np.random.Generator, cap: int) -> np.ndarray:
    """Advance a vector of populations one generation (0 stays 0)."""
    out = np.zeros_like(sizes)
    alive = np.flatnonzero(sizes > 0)
    if alive.size == 0:
        return out
    z = sizes[alive]
    if law.kind == "scaled_poisson":
        out[alive] = law.scale * rng.poisson(law.lam * z)
    elif law.kind == "poisson_mixture":
        out[alive] = rng.poisson(law.lam * z) + 2 * rng.poisson(law.lam2 * z)
    else:
        values = np.arange(law.pmf.size)
        for idx in alive:
            out[idx] = values @ rng.multinomial(int(sizes[idx]), law.pmf)
    return np.minimum(out, cap)


def gw_extinction_frequency(law: ReproductionLaw, horizon: int, replicas: int,
                            rng: np.random.Generator,
                            cap: int = POPULATION_CAP) -> float:
    """Monte Carlo frequency of extinction within ``horizon`` generations."""
    if horizon < 1 or replicas < 1:
        raise DomainError("horizon and replicas must be positive")
    sizes = np.ones(replicas, dtype=np.int64)
    for _ in range(horizon):
        if not sizes.any():
            break
        sizes = _step_batch(law, sizes, rng, cap)
    return float((sizes == 0).mean())


def gw_survival_series(law: ReproductionLaw, horizon: int, replicas: int,
                       rng: np.random.Generator,
                       cap: int = POPULATION_CAP) -> np.ndarray:
    """Empirical P(Z_n > 0) for n = 0 .. horizon, any reproduction law."""
    if horizon < 1 or replicas < 1:
        raise DomainError("horizon and replicas must be positive")
    sizes = np.ones(replicas, dtype=np.int64)
    survival = np.empty(horizon + 1)
    survival[0] = 1.0
    for n in range(1, horizon + 1):
        sizes = _step_batch(law, sizes, rng, cap)
        survival[n] = (sizes > 0).mean()
    return survival


def gw_survival_decay(law: ReproductionLaw, horizon: int, replicas: int,
                      rng: np.random.Generator,
                      cap: int = POPULATION_CAP) -> np.ndarray:
    """Empirical P(Z_n > 0) for n = 0 .. horizon, for a subcritical law.

    The survival log-frequencies decay roughly linearly in n, matching
    the exponential extinction of subcritical processes.
    """
    if law.mean() >= 1.0:
        raise PreconditionError(f"law mean {law.mean()} is not subcritical")
    return gw_survival_series(law, horizon, replicas, rng, cap)


def gw_threshold_hitting(law: ReproductionLaw, threshold_exponent: float,
                         n: int, kappa: float, replicas: int,
                         rng: np.random.Generator,
                         cap: int = POPULATION_CAP) -> float:
    """Frequency of hitting size > n**threshold_exponent before kappa*ln(n).

    The hitting time is the first generation k >= 1 with Z_k above the
    threshold; the event counts runs where it lands strictly before
    kappa*ln(n).  Requires a supercritical law.
    """
    if law.mean() <= 1.0:
        raise PreconditionError(f"law mean {law.mean()} is not supercritical")
    if n < 1 or replicas < 1:
        raise DomainError("n and replicas must be positive")
    if kappa < 0.0 or threshold_exponent < 0.0:
        raise DomainError("kappa and threshold_exponent must be nonnegative")
    limit = kappa * math.log(n)
    last = int(math.ceil(limit)) - 1 if float(limit).is_integer() else int(math.floor(limit))
    if last < 1:
        return 0.0
    threshold = float(n) ** threshold_exponent
    sizes = np.ones(replicas, dtype=np.int64)
    hit = np.zeros(replicas, dtype=bool)
    for _ in range(last):
        sizes = _step_batch(law, sizes, rng, cap)
        hit |= sizes > threshold
    return float(hit.mean())
