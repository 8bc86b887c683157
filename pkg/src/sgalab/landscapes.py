"""Fitness landscapes on fixed-length bit strings.

Every landscape maps {0,1}^ell into the strictly positive reals.  Three
kinds are supported:

* ``sharp_peak``       -- fitness 2 on the all-ones string, 1 elsewhere;
* ``one_max_shifted``  -- 1 + number of ones (a simple non-flat landscape);
* ``table``            -- explicit genotype -> fitness map for small ell.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, LandscapeError, ParseError

KINDS = ("sharp_peak", "one_max_shifted", "table")

# Dense tables get 2^ell entries; cap ell to bound memory.
MAX_TABLE_ELL = 20


@dataclass(frozen=True)
class LandscapeSpec:
    """Immutable landscape description.

    ``table`` is a dense vector of length 2**ell indexed by the genotype
    read as a big-endian integer; it is None for parametric kinds.
    """

    kind: str
    ell: int
    table: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise LandscapeError(f"unknown landscape kind {self.kind!r}")
        if self.ell < 2:
            raise ConfigError(f"chromosome length must be >= 2, got {self.ell}")
        if self.kind == "table":
            if self.ell > MAX_TABLE_ELL:
                raise LandscapeError(
                    f"table landscapes are limited to ell <= {MAX_TABLE_ELL}")
            if self.table is None or self.table.shape != (2**self.ell,):
                raise LandscapeError("table landscape requires 2**ell fitness entries")
            if not np.all(np.isfinite(self.table)) or np.any(self.table <= 0.0):
                raise LandscapeError("fitness values must be strictly positive and finite")
        elif self.table is not None:
            raise LandscapeError(f"kind {self.kind!r} does not take a table")


def sharp_peak(ell: int) -> LandscapeSpec:
    """Fitness 2 on the all-ones string and 1 everywhere else."""
    return LandscapeSpec("sharp_peak", ell)


def one_max_shifted(ell: int) -> LandscapeSpec:
    """Fitness 1 + (number of ones); the shift keeps values positive."""
    return LandscapeSpec("one_max_shifted", ell)


def table_landscape(ell: int, entries: dict[str, float]) -> LandscapeSpec:
    """Explicit landscape from a complete genotype -> fitness mapping.

    ``entries`` keys are bit strings of length ell; all 2**ell genotypes
    must be present.
    """
    if ell < 2:
        raise ConfigError(f"chromosome length must be >= 2, got {ell}")
    if ell > MAX_TABLE_ELL:
        raise LandscapeError(f"table landscapes are limited to ell <= {MAX_TABLE_ELL}")
    values = np.zeros(2**ell, dtype=float)
    seen = np.zeros(2**ell, dtype=bool)
    for genotype, fitness in entries.items():
        if len(genotype) != ell or set(genotype) - {"0", "1"}:
            raise LandscapeError(f"bad genotype key {genotype!r} for ell={ell}")
        idx = int(genotype, 2)
        if seen[idx]:
            raise LandscapeError(f"duplicate genotype {genotype!r}")
        seen[idx] = True
        values[idx] = fitness
    if not seen.all():
        raise LandscapeError(f"table covers {int(seen.sum())} of {2**ell} genotypes")
    return LandscapeSpec("table", ell, values)


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Read rows of a (n, ell) 0/1 array as big-endian integers."""
    bits = np.atleast_2d(bits)
    weights = 1 << np.arange(bits.shape[1] - 1, -1, -1, dtype=np.int64)
    return bits.astype(np.int64) @ weights


def fitness_batch(spec: LandscapeSpec, bits: np.ndarray) -> np.ndarray:
    """Evaluate the landscape on every row of a (n, ell) bit array."""
    bits = np.atleast_2d(np.asarray(bits))
    if bits.shape[1] != spec.ell:
        raise LandscapeError(
            f"genotype length {bits.shape[1]} does not match landscape ell={spec.ell}")
    if spec.kind == "sharp_peak":
        return np.where(bits.sum(axis=1) == spec.ell, 2.0, 1.0)
    if spec.kind == "one_max_shifted":
        return 1.0 + bits.sum(axis=1).astype(float)
    return spec.table[pack_bits(bits)]


def fitness_of(spec: LandscapeSpec, bits: np.ndarray) -> float:
    """Evaluate the landscape on a single genotype."""
    return float(fitness_batch(spec, np.asarray(bits).reshape(1, -1))[0])


def load_landscape(text: str) -> LandscapeSpec:
    """Parse a landscape document.

    The format is key-value structured text, one ``key = value`` pair per
    line, ``#`` starting a comment.  Required keys: ``kind`` and ``ell``.
    Table landscapes list one ``entry = <bits> <fitness>`` line per
    genotype.

    Example::

        kind = sharp_peak
        ell = 8
    """
    kind = None
    ell = None
    entries: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key == "kind":
            kind = value
        elif key == "ell":
            try:
                ell = int(value)
            except ValueError:
                raise ParseError(f"line {lineno}: ell must be an integer") from None
        elif key == "entry":
            parts = value.split()
            if len(parts) != 2:
                raise ParseError(f"line {lineno}: entry takes '<bits> <fitness>'")
            try:
                fit = float(parts[1])
            except ValueError:
                raise ParseError(f"line {lineno}: bad fitness {parts[1]!r}") from None
            if parts[0] in entries:
                raise ParseError(f"line {lineno}: duplicate entry for {parts[0]!r}")
            entries[parts[0]] = fit
        else:
            raise ParseError(f"line {lineno}: unknown key {key!r}")
    if kind is None or ell is None:
        raise ParseError("document must declare both 'kind' and 'ell'")
    if kind == "table":
        return table_landscape(ell, entries)
    if entries:
        raise ParseError(f"kind {kind!r} does not take entries")
    return LandscapeSpec(kind, ell)
