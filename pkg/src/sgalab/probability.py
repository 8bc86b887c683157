"""Discrete laws on the nonnegative integers and their tail machinery.

Provides the critical copy-rate parameter, the stochastic order on laws
over the nonnegative integers, Binomial-vs-Poisson dominance, explicit
tail bounds (Poisson, Hoeffding, exponential Chebyshev) and Cramer
transforms, each usable both as a bound evaluator and as a numerical
verifier against exact tails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp
from scipy.stats import binom as _binom
from scipy.stats import poisson as _poisson

from .errors import DomainError, NumericalError

TRUNCATION_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteLaw:
    """A probability law on {0, 1, 2, ...} with explicit truncation.

    ``pmf[k]`` is the mass at k for k up to the truncation point;
    ``tail_bound`` carries the residual mass beyond it (zero for laws of
    finite support), so tail comparisons can account for what was cut.
    """

    pmf: np.ndarray
    tail_bound: float = 0.0

    def __post_init__(self):
        pmf = np.asarray(self.pmf, dtype=float)
        object.__setattr__(self, "pmf", pmf)
        if pmf.ndim != 1 or pmf.size == 0:
            raise DomainError("pmf must be a nonempty vector")
        if np.any(pmf < 0.0) or self.tail_bound < 0.0:
            raise DomainError("probabilities must be nonnegative")
        total = pmf.sum() + self.tail_bound
        if abs(total - 1.0) > TRUNCATION_TOL:
            raise DomainError(f"total mass {total} is not 1 within tolerance")

    @property
    def support_max(self) -> int:
        return self.pmf.size - 1

    def mean(self) -> float:
        return float(np.arange(self.pmf.size) @ self.pmf)

    def upper_tails(self) -> np.ndarray:
        """P(X >= i) for i = 0 .. support_max, ignoring the truncated mass."""
        return np.cumsum(self.pmf[::-1])[::-1]


def point_mass(k: int) -> DiscreteLaw:
    pmf = np.zeros(k + 1)
    pmf[k] = 1.0
    return DiscreteLaw(pmf)


def binomial_law(n: int, p: float) -> DiscreteLaw:
    if n < 0 or not 0.0 <= p <= 1.0:
        raise DomainError(f"bad binomial parameters n={n}, p={p}")
    return DiscreteLaw(_binom.pmf(np.arange(n + 1), n, p))


def poisson_law(lam: float, tol: float = TRUNCATION_TOL) -> DiscreteLaw:
    """Poisson law truncated where the residual mass drops below ``tol``."""
    if lam < 0.0:
        raise DomainError(f"Poisson parameter must be nonnegative, got {lam}")
    if lam == 0.0:
        return point_mass(0)
    hi = int(_poisson.isf(tol, lam)) + 2
    pmf = _poisson.pmf(np.arange(hi + 1), lam)
    tail = float(max(_poisson.sf(hi, lam), 0.0))
    return DiscreteLaw(pmf, tail)


def empirical_law(samples: np.ndarray) -> DiscreteLaw:
    """Empirical law of integer samples (finite support, no truncation)."""
    samples = np.asarray(samples, dtype=np.int64)
    if samples.size == 0 or np.any(samples < 0):
        raise DomainError("samples must be nonnegative integers")
    counts = np.bincount(samples)
    return DiscreteLaw(counts / counts.sum())


def law_of_scaled(law: DiscreteLaw, c: int) -> DiscreteLaw:
    """Law of c*X for a nonnegative integer scale c."""
    if c < 1:
        raise DomainError(f"scale must be a positive integer, got {c}")
    pmf = np.zeros(c * law.support_max + 1)
    pmf[::c] = law.pmf
    return DiscreteLaw(pmf, law.tail_bound)


def convolve_laws(a: DiscreteLaw, b: DiscreteLaw) -> DiscreteLaw:
    """Law of X + Y for independent X ~ a, Y ~ b."""
    pmf = np.convolve(a.pmf, b.pmf)
    # Mass truncated in either factor stays unaccounted for in the sum.
    tail = a.tail_bound + b.tail_bound - a.tail_bound * b.tail_bound
    return DiscreteLaw(pmf * ((1.0 - tail) / pmf.sum()), tail)


def dkw_epsilon(n: int, confidence: float = 0.99) -> float:
    """Half-width of the DKW confidence band for an empirical CDF."""
    if n <= 0 or not 0.0 < confidence < 1.0:
        raise DomainError(f"bad DKW parameters n={n}, confidence={confidence}")
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * n))


def pi_parameter(f_star: float, f_bar: float, p_c: float, p_m: float,
                 ell: int) -> float:
    """Mean number of exact copies of a best-fit chromosome per generation.

    Equals (f_star / f_bar) * (1 - p_c) * (1 - p_m)**ell.
    """
    if f_bar <= 0.0 or f_star <= 0.0:
        raise DomainError("fitness values must be strictly positive")
    return (f_star / f_bar) * (1.0 - p_c) * (1.0 - p_m) ** ell


def stochastic_dominates(mu: DiscreteLaw, nu: DiscreteLaw,
                         tol: float = 0.0) -> bool:
    """Whether nu dominates mu: mu([i, inf)) <= nu([i, inf)) + tol for all i.

    Comparisons run over the joint effective support; the truncation
    bounds carried by both laws are added to ``tol`` since tails are only
    known up to that mass, and a fixed 1e-13 allowance absorbs
    double-precision representation error.  Use tol = 0 for exact finite
    laws and a DKW-style tolerance for empirical ones.
    """
    if tol < 0.0:
        raise DomainError(f"tolerance must be nonnegative, got {tol}")
    size = max(mu.pmf.size, nu.pmf.size)
    mu_tails = np.zeros(size)
    nu_tails = np.zeros(size)
    mu_tails[:mu.pmf.size] = mu.upper_tails()
    nu_tails[:nu.pmf.size] = nu.upper_tails()
    slack = tol + mu.tail_bound + nu.tail_bound + 1e-13
    return bool(np.all(mu_tails <= nu_tails + slack))


def binomial_poisson_condition(n: int, p: float, lam: float) -> bool:
    """Check (1-p)**n >= exp(-lam).

    When true, Binomial(n, p) is stochastically dominated by
    Poisson(lam).
    """
    if n < 1 or not 0.0 <= p <= 1.0 or lam <= 0.0:
        raise DomainError(f"bad parameters n={n}, p={p}, lam={lam}")
    return (1.0 - p) ** n >= math.exp(-lam)


def poisson_tail_bound(lam: float, t: float) -> float:
    """Upper bound (lam*e/t)**t on P(Y >= t) for Y ~ Poisson(lam), t >= lam."""
    if lam <= 0.0:
        raise DomainError(f"lam must be positive, got {lam}")
    if t < lam:
        raise DomainError(f"bound requires t >= lam, got t={t} < lam={lam}")
    return math.exp(t * (1.0 + math.log(lam) - math.log(t)))


def cramer_scaled_poisson(lam: float, alpha: float, x: float) -> float:
    """Cramer transform of alpha*Y at x, for Y ~ Poisson(lam).

    Closed form (x/alpha) * ln(x/(lam*alpha)) - x/alpha + lam, defined
    when x/(lam*alpha) > 0.
    """
    if lam <= 0.0 or alpha == 0.0:
        raise DomainError(f"need lam > 0 and alpha != 0, got lam={lam}, alpha={alpha}")
    ratio = x / (lam * alpha)
    if ratio <= 0.0:
        raise DomainError(f"x/(lam*alpha) must be positive, got {ratio}")
    return (x / alpha) * math.log(ratio) - x / alpha + lam


def hoeffding_lower_tail(n: int, p: float, t: float) -> float:
    """Hoeffding bound exp(-(2/n)(np - t)^2) on P(X < t), X ~ Binomial(n, p)."""
    if n < 1 or not 0.0 <= p <= 1.0:
        raise DomainError(f"bad parameters n={n}, p={p}")
    if t >= n * p:
        raise DomainError(f"bound requires t < np, got t={t} >= {n * p}")
    return math.exp(-2.0 / n * (n * p - t) ** 2)


def _log_laplace(values: np.ndarray, log_pmf: np.ndarray, t: float) -> float:
    return float(logsumexp(log_pmf + t * values))


def _tilted_mean(values: np.ndarray, log_pmf: np.ndarray, t: float) -> float:
    w = log_pmf + t * values
    w -= w.max()
    w = np.exp(w)
    return float((w @ values) / w.sum())


def cramer_transform_points(values: np.ndarray, pmf: np.ndarray, x: float,
                            tol: float = 1e-10) -> float:
    """sup_t (t*x - Lambda(t)) for a finite-support law, by bracketed search.

    ``values`` are the support points (any reals) and ``pmf`` their
    probabilities.  The supremum is located by solving
    Lambda'(t) = x with a bracketed root finder; the tilted mean is
    strictly increasing in t, so the bracket is grown geometrically until
    it straddles x.
    """
    values = np.asarray(values, dtype=float)
    pmf = np.asarray(pmf, dtype=float)
    keep = pmf > 0.0
    values, pmf = values[keep], pmf[keep]
    if values.size == 0:
        raise DomainError("law has no support")
    log_pmf = np.log(pmf)
    lo, hi = float(values.min()), float(values.max())
    if not lo < x < hi:
        if x == lo == hi:
            return 0.0
        if x == hi:
            return float(-log_pmf[np.argmax(values)])
        if x == lo:
            return float(-log_pmf[np.argmin(values)])
        raise DomainError(f"x={x} lies outside the support range [{lo}, {hi}]")
    t_lo, t_hi = -1.0, 1.0
    for _ in range(200):
        if _tilted_mean(values, log_pmf, t_lo) < x:
            break
        t_lo *= 2.0
    else:
        raise NumericalError(f"no lower bracket for x={x}")
    for _ in range(200):
        if _tilted_mean(values, log_pmf, t_hi) > x:
            break
        t_hi *= 2.0
    else:
        raise NumericalError(f"no upper bracket for x={x}")
    t_star = brentq(lambda t: _tilted_mean(values, log_pmf, t) - x,
                    t_lo, t_hi, xtol=tol, maxiter=500)
    return t_star * x - _log_laplace(values, log_pmf, t_star)


def cramer_transform(law: DiscreteLaw, x: float, tol: float = 1e-10) -> float:
    """Cramer transform of a law on the nonnegative integers at x."""
    return cramer_transform_points(np.arange(law.pmf.size), law.pmf, x, tol)


def chernoff_sum_bound(law: DiscreteLaw, n: int, x: float) -> float:
    """Exponential Chebyshev bound exp(-n * Lambda*(x)) on P(mean of n >= x).

    Requires x >= mean(law); the transform is computed numerically.
    """
    if n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    mean = law.mean()
    dust = 1e-12 * max(1.0, abs(mean))
    if x < mean - dust:
        raise DomainError(f"bound requires x >= mean, got x={x} < {mean}")
    if x <= mean + dust:
        return 1.0  # the transform vanishes at the mean
    return math.exp(-n * cramer_transform(law, x))


def cramer_binomial_vs_poisson(n: int, p: float, alpha: float,
                               x: float) -> tuple[float, float]:
    """Cramer transforms of alpha*X and alpha*Y at x, X ~ B(n, p), Y ~ P(np).

    Both are computed by numerical maximization; the first component is
    always >= the second.
    """
    if n < 1 or not 0.0 <= p <= 1.0 or alpha == 0.0:
        raise DomainError(f"bad parameters n={n}, p={p}, alpha={alpha}")
    binom_pmf = _binom.pmf(np.arange(n + 1), n, p)
    binom_value = cramer_transform_points(alpha * np.arange(n + 1), binom_pmf, x)
    pois = poisson_law(n * p, tol=1e-15)
    pois_value = cramer_transform_points(
        alpha * np.arange(pois.pmf.size), pois.pmf / pois.pmf.sum(), x)
    return binom_value, pois_value
