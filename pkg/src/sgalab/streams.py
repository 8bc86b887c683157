"""Reproducible random streams.

All stochastic code in this package draws from an explicitly passed
``numpy.random.Generator`` backed by PCG64.  Substreams are derived by
feeding ``(master_seed, *key)`` into ``numpy.random.SeedSequence``, whose
entropy-mixing hash is the documented 64-bit mixing function of the
package: the same (seed, key) always yields the same stream, and distinct
keys yield independent streams.  Replica i of an experiment uses key
``(i,)``, so results never depend on scheduling or worker count.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError

_MAX_SEED = 2**64


def _check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)) or not 0 <= seed < _MAX_SEED:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return int(seed)


def make_stream(seed: int) -> np.random.Generator:
    """Top-level stream for a master seed."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(_check_seed(seed))))


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent stream for (master seed, key); used per replica and per role.

    ``key`` components must be nonnegative integers.  Mixing goes through
    ``SeedSequence([seed, *key])``.
    """
    _check_seed(seed)
    if any(k < 0 for k in key):
        raise ConfigError(f"substream key components must be nonnegative, got {key}")
    seq = np.random.SeedSequence([int(seed), *[int(k) for k in key]])
    return np.random.Generator(np.random.PCG64(seq))
