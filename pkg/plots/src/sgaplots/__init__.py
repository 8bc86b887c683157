"""Regime figures rendered from experiment CSV files.

Batch renderers for the three figure kinds (copy-rate sweep, mean-fitness
trajectories, extinction-frequency-vs-population-size); deterministic
output, no live coupling to the simulator.
"""

__version__ = "0.1.0"

from .io import SchemaError, read_table  # noqa: F401
from .figures import (  # noqa: F401
    render_extinction,
    render_sweep,
    render_trajectories,
)
