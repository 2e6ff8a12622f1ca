"""Sampling lattice, field containers and the small set of norms shared by every module."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class SamplingGrid:
    """Uniform 1-D transverse lattice at a single wavelength.

    Coordinates are ``x[i] = (i - n_points/2) * dx`` so the lattice is
    symmetric about zero up to one sample.
    """

    n_points: int
    window: float
    wavelength: float

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 16 or self.n_points % 2:
            raise ValueError(f"n_points must be an even integer >= 16, got {self.n_points!r}")
        if not self.window > 0:
            raise ValueError(f"window must be positive, got {self.window!r}")
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength!r}")
        object.__setattr__(self, "n_points", int(self.n_points))
        object.__setattr__(self, "window", float(self.window))
        object.__setattr__(self, "wavelength", float(self.wavelength))

    @property
    def dx(self) -> float:
        return self.window / self.n_points

    @property
    def k(self) -> float:
        return 2 * np.pi / self.wavelength

    @cached_property
    def x(self) -> np.ndarray:
        x = (np.arange(self.n_points) - self.n_points // 2) * self.dx
        x.flags.writeable = False
        return x

    def index_of(self, position: float) -> int:
        """Nearest sample index; raises if ``position`` lies outside the window."""
        half = self.window / 2
        if not -half <= position <= half:
            raise ValueError(f"position {position!r} m lies outside the window [-{half}, {half}] m")
        i = int(round(position / self.dx)) + self.n_points // 2
        return min(max(i, 0), self.n_points - 1)

    def central_region(self, fraction: float = 0.6) -> slice:
        """Index slice covering the central ``fraction`` of the window."""
        if not 0 < fraction <= 1:
            raise ValueError("fraction must lie in (0, 1]")
        margin = int(round(self.n_points * (1 - fraction) / 2))
        return slice(margin, self.n_points - margin)


def make_grid(n_points: int = 2048, window: float = 8e-3, wavelength: float = 800e-9) -> SamplingGrid:
    return SamplingGrid(n_points, window, wavelength)


def _frozen(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ComplexField:
    grid: SamplingGrid
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(self.values, np.complex128)
        if values.shape != (self.grid.n_points,):
            raise ValueError(f"field has shape {values.shape}, grid expects ({self.grid.n_points},)")
        object.__setattr__(self, "values", values)

    @property
    def intensity(self) -> "RealProfile":
        return RealProfile(self.grid, np.abs(self.values) ** 2)


@dataclass(frozen=True, eq=False)
class RealProfile:
    """Real samples over a grid (detector readouts, coincidence slices).

    Interference parts are signed, so nonnegativity is checked only
    through :meth:`require_nonnegative` where a caller needs it.
    """

    grid: SamplingGrid
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(self.values, np.float64)
        if values.shape != (self.grid.n_points,):
            raise ValueError(f"profile has shape {values.shape}, grid expects ({self.grid.n_points},)")
        object.__setattr__(self, "values", values)

    def require_nonnegative(self) -> "RealProfile":
        if np.any(self.values < 0):
            raise ValueError("profile has negative entries but an intensity was required")
        return self


def energy(field: ComplexField) -> float:
    return float(np.sum(np.abs(field.values) ** 2) * field.grid.dx)


def _samples(obj):
    if isinstance(obj, (ComplexField, RealProfile)):
        return obj.grid, obj.values
    return None, np.asarray(obj)


def _norm(v: np.ndarray) -> float:
    # scaled so tiny differences do not underflow when squared
    peak = float(np.max(np.abs(v))) if v.size else 0.0
    if peak == 0 or not np.isfinite(peak):
        return peak
    return peak * float(np.linalg.norm(v / peak))


def relative_l2_distance(a, b, region: slice | None = None) -> float:
    """``||a - b|| / ||b||`` restricted to ``region`` (default: everything).

    Accepts fields, profiles or bare arrays; when both carry grids they
    must agree.
    """
    grid_a, va = _samples(a)
    grid_b, vb = _samples(b)
    if grid_a is not None and grid_b is not None and grid_a != grid_b:
        raise ValueError("relative_l2_distance: operands live on different grids")
    if va.shape != vb.shape:
        raise ValueError(f"relative_l2_distance: shape mismatch {va.shape} vs {vb.shape}")
    if region is not None:
        va, vb = va[region], vb[region]
    if va.size == 0:
        raise ValueError("relative_l2_distance: empty region")
    ref = _norm(vb)
    if ref == 0:
        raise ValueError("relative_l2_distance: reference has zero norm on the region")
    return _norm(va - vb) / ref


def peak_normalized(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values)
    peak = np.max(np.abs(values))
    if peak == 0:
        raise ValueError("cannot peak-normalize an identically zero profile")
    return values / peak


def normalized_distance(a, b, region: slice | None = None) -> float:
    """Relative L2 distance after peak-normalizing both operands on ``region``."""
    _, va = _samples(a)
    _, vb = _samples(b)
    if region is not None:
        va, vb = va[region], vb[region]
    return relative_l2_distance(peak_normalized(va), peak_normalized(vb))
