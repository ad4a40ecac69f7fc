"""Global numerical tolerances.

The leakage tolerance can be overridden with the ``CVFOCK_LEAKAGE_TOL``
environment variable or at runtime with :func:`set_leakage_tolerance`.
"""
import os

_DEFAULT_LEAKAGE_TOL = 1e-6
PROBABILITY_FLOOR = 1e-12
MAX_SQUEEZING_WARN = 1.5

_override: float | None = None


def leakage_tolerance() -> float:
    if _override is not None:
        return _override
    env = os.environ.get("CVFOCK_LEAKAGE_TOL")
    if env:
        return float(env)
    return _DEFAULT_LEAKAGE_TOL


def set_leakage_tolerance(value: float | None) -> None:
    """Set a process-wide tolerance; ``None`` restores env/default lookup."""
    global _override
    if value is not None and value < 0:
        raise ValueError("tolerance must be non-negative")
    _override = value
