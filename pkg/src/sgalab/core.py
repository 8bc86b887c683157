"""Genetic operators and the generation cycle.

Implements fitness-proportional (roulette-wheel) selection with
replacement, single-point crossover, independent per-bit mutation, and
the pair-by-pair cycle that builds generation n+1 from generation n.
Chromosomes carry a lineage flag so that the progeny of a distinguished
founder can be counted during a run.

Draw order inside :func:`next_generation` is fixed and documented so that
runs are exactly reproducible from their stream:

1. m selection uniforms (one parent index each),
2. m/2 crossover coins, then m/2 cut sites,
3. m per-child mutation flip counts, then flip positions for the
   children with one flip (single batch) and for the children with two
   or more flips (ascending child index).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, LandscapeError
from .landscapes import LandscapeSpec, fitness_batch


@dataclass(frozen=True)
class GaConfig:
    """Full deterministic description of a run.

    Attributes:
        ell: chromosome length (>= 2 so crossover has a cut site).
        m: population size; must be even because the cycle fills pairs.
        p_c: crossover probability.
        p_m: per-bit mutation probability.
        seed: unsigned 64-bit master seed.
    """

    ell: int
    m: int
    p_c: float
    p_m: float
    seed: int

    def __post_init__(self):
        if self.ell < 2:
            raise ConfigError(f"chromosome length must be >= 2, got {self.ell}")
        if self.m <= 0 or self.m % 2 != 0:
            raise ConfigError(f"population size must be positive and even, got {self.m}")
        for name in ("p_c", "p_m"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {value}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


@dataclass
class Chromosome:
    """A fixed-length bit string with a lineage flag.

    ``descendant`` is True iff the genealogy of this chromosome contains
    the distinguished founder of the run.
    """

    bits: np.ndarray
    descendant: bool = False

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=np.uint8)
        if self.bits.ndim != 1:
            raise ConfigError("chromosome bits must be one-dimensional")
        if np.any(self.bits > 1):
            raise ConfigError("chromosome bits must be 0/1")

    @property
    def ell(self) -> int:
        return self.bits.size

    def copy(self) -> "Chromosome":
        return Chromosome(self.bits.copy(), self.descendant)


@dataclass
class Population:
    """Ordered population of m chromosomes, stored as dense arrays.

    ``bits`` has shape (m, ell); ``descendants`` is the per-member lineage
    flag.  The generation cycle works on pairs and therefore requires an
    even m, which :class:`GaConfig` enforces at configuration time.
    Fitness values are cached per (landscape, generation) and only
    recomputed when the genotypes change, i.e. on construction.
    """

    bits: np.ndarray
    descendants: np.ndarray
    generation_index: int = 0
    _fitness_cache: tuple[int, np.ndarray] | None = field(
        default=None, repr=False, compare=False)

    def __post_init__(self):
        self.bits = np.ascontiguousarray(self.bits, dtype=np.uint8)
        self.descendants = np.asarray(self.descendants, dtype=bool)
        if self.bits.ndim != 2:
            raise ConfigError("population bits must have shape (m, ell)")
        m = self.bits.shape[0]
        if m <= 0:
            raise ConfigError(f"population size must be positive, got {m}")
        if self.descendants.shape != (m,):
            raise ConfigError("descendant flags must have one entry per member")
        if self.generation_index < 0:
            raise ConfigError("generation index must be nonnegative")

    @property
    def m(self) -> int:
        return self.bits.shape[0]

    @property
    def ell(self) -> int:
        return self.bits.shape[1]

    @property
    def members(self) -> list[Chromosome]:
        return [Chromosome(self.bits[i].copy(), bool(self.descendants[i]))
                for i in range(self.m)]

    @classmethod
    def from_members(cls, members: list[Chromosome],
                     generation_index: int = 0) -> "Population":
        if not members:
            raise ConfigError("population cannot be empty")
        bits = np.stack([c.bits for c in members])
        flags = np.array([c.descendant for c in members], dtype=bool)
        return cls(bits, flags, generation_index)

    def fitness(self, landscape: LandscapeSpec) -> np.ndarray:
        """Cached fitness vector for this generation."""
        key = id(landscape)
        if self._fitness_cache is None or self._fitness_cache[0] != key:
            values = fitness_batch(landscape, self.bits)
            if np.any(values <= 0.0):
                raise LandscapeError("fitness values must be strictly positive")
            self._fitness_cache = (key, values)
        return self._fitness_cache[1]


@dataclass(frozen=True)
class PopulationStats:
    """Summary statistics of one generation, recomputed from scratch."""

    f_star: float        # maximal fitness
    f_bar: float         # mean fitness
    n_master: int        # exact all-ones chromosomes
    n_descendants: int   # lineage-flagged chromosomes
    n_at_least: int      # chromosomes with fitness >= the reference level


@dataclass(frozen=True)
class GenerationInfo:
    """Per-step instrumentation emitted by :func:`next_generation`.

    ``descendant_selections`` counts how many of the m parent selections
    (with multiplicity) carried the lineage flag; the number of flagged
    children never exceeds twice this count.  ``max_mutation_flips`` is
    the largest number of bit flips applied to any single child.
    """

    descendant_selections: int
    max_mutation_flips: int


def select_parent(pop: Population, fitnesses: np.ndarray,
                  rng: np.random.Generator) -> int:
    """Draw one parent index with probability proportional to fitness.

    Sampling is with replacement; the population is not modified.
    Raises LandscapeError when any fitness is nonpositive.
    """
    f = np.asarray(fitnesses, dtype=float)
    if f.shape != (pop.m,):
        raise ConfigError(f"expected {pop.m} fitness values, got shape {f.shape}")
    if np.any(f <= 0.0) or not np.isfinite(f).all():
        raise LandscapeError("selection requires strictly positive finite fitness values")
    cdf = np.cumsum(f)
    u = rng.random() * cdf[-1]
    return min(int(np.searchsorted(cdf, u, side="right")), pop.m - 1)


def crossover_pair(a: Chromosome, b: Chromosome, p_c: float,
                   rng: np.random.Generator) -> tuple[Chromosome, Chromosome]:
    """Single-point crossover of one parent pair.

    With probability 1 - p_c the parents are copied unchanged and each
    child keeps its own parent's lineage flag.  Otherwise a cut site is
    drawn uniformly among the ell - 1 internal positions and the suffixes
    are exchanged, so any one specific crossed outcome has probability
    p_c / (ell - 1); both children are then flagged iff either parent is.
    """
    ell = a.ell
    if ell < 2:
        raise ConfigError("crossover requires chromosomes of length >= 2")
    if b.ell != ell:
        raise ConfigError(f"parent lengths differ: {ell} vs {b.ell}")
    if rng.random() < p_c:
        cut = int(rng.integers(1, ell))
        child1 = np.concatenate([a.bits[:cut], b.bits[cut:]])
        child2 = np.concatenate([b.bits[:cut], a.bits[cut:]])
        flag = a.descendant or b.descendant
        return Chromosome(child1, flag), Chromosome(child2, flag)
    return a.copy(), b.copy()


def mutate(c: Chromosome, p_m: float, rng: np.random.Generator) -> Chromosome:
    """Flip every bit independently with probability p_m.

    The lineage flag is unchanged: mutation does not alter genealogy.
    """
    flips = rng.random(c.ell) < p_m
    return Chromosome(np.where(flips, 1 - c.bits, c.bits), c.descendant)


def next_generation(pop: Population, landscape: LandscapeSpec, config: GaConfig,
                    rng: np.random.Generator) -> tuple[Population, GenerationInfo]:
    """Run one fundamental cycle: m/2 rounds of select/crossover/mutate.

    Conditionally on the input population the m/2 output pairs are
    i.i.d.; the output always has exactly m members.  Returns the new
    population together with per-step instrumentation.
    """
    m, ell = pop.m, pop.ell
    if config.m != m or config.ell != ell:
        raise ConfigError("config does not match population dimensions")
    fitness = pop.fitness(landscape)

    # Selection: m independent roulette draws.
    cdf = np.cumsum(fitness)
    u = rng.random(m)
    parents = np.minimum(
        np.searchsorted(cdf, u * cdf[-1], side="right"), m - 1)
    descendant_selections = int(pop.descendants[parents].sum())

    first, second = parents[0::2], parents[1::2]
    child1 = pop.bits[first].copy()
    child2 = pop.bits[second].copy()
    flags1 = pop.descendants[first].copy()
    flags2 = pop.descendants[second].copy()

    # Crossover: coin per pair, cut site uniform on {1, ..., ell-1}.
    crossed = rng.random(m // 2) < config.p_c
    cuts = rng.integers(1, ell, size=m // 2)
    if crossed.any():
        suffix = np.arange(ell)[None, :] >= cuts[crossed, None]
        rows1, rows2 = child1[crossed], child2[crossed]
        child1[crossed] = np.where(suffix, rows2, rows1)
        child2[crossed] = np.where(suffix, rows1, rows2)
        either = flags1[crossed] | flags2[crossed]
        flags1[crossed] = either
        flags2[crossed] = either

    children = np.empty((m, ell), dtype=np.uint8)
    children[0::2] = child1
    children[1::2] = child2
    flags = np.empty(m, dtype=bool)
    flags[0::2] = flags1
    flags[1::2] = flags2

    # Mutation: per-child binomial flip count, then uniform distinct
    # positions; identical in law to independent per-bit flips.
    counts = rng.binomial(ell, config.p_m, size=m)
    single = np.flatnonzero(counts == 1)
    if single.size:
        children[single, rng.integers(0, ell, size=single.size)] ^= 1
    for child in np.flatnonzero(counts >= 2):
        positions = rng.choice(ell, size=int(counts[child]), replace=False)
        children[child, positions] ^= 1

    out = Population(children, flags, pop.generation_index + 1)
    assert out.m == m
    info = GenerationInfo(descendant_selections, int(counts.max(initial=0)))
    assert int(out.descendants.sum()) <= 2 * info.descendant_selections
    return out, info


def population_stats(pop: Population, landscape: LandscapeSpec,
                     reference_level: float) -> PopulationStats:
    """Recompute all summary statistics from scratch (no caches)."""
    fitness = fitness_batch(landscape, pop.bits)
    ones = pop.bits.sum(axis=1)
    return PopulationStats(
        f_star=float(fitness.max()),
        f_bar=float(fitness.mean()),
        n_master=int((ones == pop.ell).sum()),
        n_descendants=int(pop.descendants.sum()),
        n_at_least=int((fitness >= reference_level).sum()),
    )


def max_ones_non_descendants(pop: Population) -> int:
    """Largest ones-count among chromosomes outside the founder's progeny.

    Returns 0 when every chromosome is flagged.
    """
    outside = ~pop.descendants
    if not outside.any():
        return 0
    return int(pop.bits[outside].sum(axis=1).max())
