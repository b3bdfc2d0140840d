"""One-dimensional periodic grid with spectral calculus.

The domain is [-L/2, L/2) with periodic identification.  It is meant to be
large enough that the fields of interest decay below round-off at the edges,
so that whole-line integrals and the running primitive anchored at -infinity
are faithfully represented by their periodic counterparts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class Grid1D:
    """Uniform periodic grid and its precomputed spectral quantities.

    Attributes
    ----------
    length : float
        Domain length L; nodes live on [-L/2, L/2).
    n : int
        Number of nodes, a power of two >= 16.
    """

    length: float
    n: int
    dx: float = field(init=False)
    x: np.ndarray = field(init=False)
    k: np.ndarray = field(init=False)
    dealias_mask: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        if not np.isfinite(self.length) or self.length <= 0:
            raise ValueError(f"domain length must be positive, got {self.length}")
        if not _is_power_of_two(self.n) or self.n < 16:
            raise ValueError(f"node count must be a power of two >= 16, got {self.n}")
        dx = self.length / self.n
        object.__setattr__(self, "dx", dx)
        object.__setattr__(
            self, "x", -0.5 * self.length + dx * np.arange(self.n, dtype=float)
        )
        k = 2.0 * np.pi * np.fft.fftfreq(self.n, d=dx)
        k.setflags(write=False)
        object.__setattr__(self, "k", k)
        cutoff = (2.0 / 3.0) * np.abs(k).max()
        mask = np.abs(k) <= cutoff
        mask.setflags(write=False)
        object.__setattr__(self, "dealias_mask", mask)
        self.x.setflags(write=False)

    @property
    def nyquist_index(self) -> int:
        return self.n // 2

    def compatible(self, other: "Grid1D") -> bool:
        return self.n == other.n and self.length == other.length


def make_grid(length: float, n: int) -> Grid1D:
    """Build a periodic grid on [-L/2, L/2) with n uniformly spaced nodes."""
    return Grid1D(length, n)


@dataclass(frozen=True, eq=False)
class RealField:
    """Node samples of a real-valued function on a Grid1D.

    Values are stored read-only; fields behave as immutable values and are
    safe to share between threads.
    """

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float, copy=True)
        if v.shape != (self.grid.n,):
            raise ValueError(
                f"field length {v.shape} does not match grid size ({self.grid.n},)"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __add__(self, other: "RealField") -> "RealField":
        self._check_same_grid(other)
        return RealField(self.grid, self.values + other.values)

    def __sub__(self, other: "RealField") -> "RealField":
        self._check_same_grid(other)
        return RealField(self.grid, self.values - other.values)

    def __mul__(self, a: float) -> "RealField":
        return RealField(self.grid, a * self.values)

    __rmul__ = __mul__

    def _check_same_grid(self, other: "RealField") -> None:
        if not self.grid.compatible(other.grid):
            raise ValueError("fields live on incompatible grids")


def zero_field(grid: Grid1D) -> RealField:
    return RealField(grid, np.zeros(grid.n))


# -- spectral kernels on raw arrays (shared by the field ops and integrator) --


def deriv_values(grid: Grid1D, values: np.ndarray, order: int) -> np.ndarray:
    """Spectral derivative of node samples; Nyquist zeroed for odd orders."""
    if order not in (1, 2, 3):
        raise ValueError(f"derivative order must be 1, 2 or 3, got {order}")
    vh = np.fft.fft(values)
    mult = (1j * grid.k) ** order
    if order % 2 == 1:
        mult = mult.copy()
        mult[grid.nyquist_index] = 0.0
    return np.fft.ifft(mult * vh).real


def dealias_values(grid: Grid1D, values: np.ndarray) -> np.ndarray:
    return np.fft.ifft(grid.dealias_mask * np.fft.fft(values)).real


def shift_values(grid: Grid1D, values: np.ndarray, s: float) -> np.ndarray:
    """Translate samples to the right by s (periodically, via spectral phase)."""
    vh = np.fft.fft(values)
    return np.fft.ifft(vh * np.exp(-1j * grid.k * s)).real


# -- public field operations --


def deriv(f: RealField, order: int = 1) -> RealField:
    """Spectral derivative of given order (1, 2 or 3)."""
    return RealField(f.grid, deriv_values(f.grid, f.values, order))


def integrate(f: RealField) -> float:
    """Periodic trapezoid rule: L times the mean of the samples."""
    return f.grid.length * float(f.values.mean())


def antiderivative(f: RealField, decay_tol: float = 1e-8) -> RealField:
    """Running primitive F with F' = f and F = 0 at the left domain edge.

    The left edge stands in for -infinity, which requires f to have decayed
    there.  The zero-mean part is inverted in transform space; the mean is
    integrated exactly as a linear-in-x ramp (the cumulative trapezoid of a
    constant), and the result is offset so F(x_0) = 0.
    """
    g = f.grid
    if abs(float(f.values[0])) > decay_tol:
        raise ValueError(
            "domain too small for line-integral proxy: "
            f"|f| = {abs(float(f.values[0])):.3g} at the left edge exceeds "
            f"decay tolerance {decay_tol:.3g}"
        )
    mean = float(f.values.mean())
    vh = np.fft.fft(f.values - mean)
    inv = np.zeros(g.n, dtype=complex)
    nonzero = np.abs(g.k) > 0
    inv[nonzero] = vh[nonzero] / (1j * g.k[nonzero])
    inv[g.nyquist_index] = 0.0
    primitive = np.fft.ifft(inv).real + mean * (g.x - g.x[0])
    primitive -= primitive[0]
    return RealField(g, primitive)


def dealias(f: RealField) -> RealField:
    """Zero all modes with |k| above two thirds of the maximum wavenumber."""
    return RealField(f.grid, dealias_values(f.grid, f.values))


def shift(f: RealField, s: float) -> RealField:
    """Periodic translation to the right by s, exact for band-limited fields."""
    return RealField(f.grid, shift_values(f.grid, f.values, s))
