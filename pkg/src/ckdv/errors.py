"""Exception types shared across the package."""

from __future__ import annotations


class CkdvError(Exception):
    """Base class for package-specific failures."""


class ConfigError(CkdvError):
    """A run configuration failed validation before any computation started."""


class BlowUpError(CkdvError):
    """Time integration produced non-finite or absurdly large values."""

    def __init__(self, t: float, step: int | None = None):
        self.t = t
        self.step = step
        where = f" at t={t:.6g}" + (f" (step {step})" if step is not None else "")
        super().__init__(f"blow-up or instability detected{where}")
