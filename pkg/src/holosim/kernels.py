"""Discretized paraxial impulse responses and transmissive objects.

Every kernel is a dense ``n_out x n_in`` matrix whose entries already
carry the ``dx`` quadrature weight, so propagation is ``K @ field`` and
chaining is ``K2 @ K1``.

Two boundary conventions are available:

``"open"``
    direct evaluation of the Fresnel impulse response on the window;
    space outside the window is empty. Used for point and spatially
    incoherent sources.
``"periodic"``
    the window is one cell of a periodic world (band-limited Fresnel
    propagator). Used for plane-wave illumination of periodic objects,
    which a finite window cannot otherwise hold.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import GridMismatchError, SamplingError
from .grid import ComplexField, SamplingGrid

BOUNDARIES = ("open", "periodic")

# closed slit edges, allowing for rounding in the caller's edge coordinate
_EDGE = 1 + 1e-12

# 1/sqrt(i) on the principal branch
_INV_SQRT_I = np.exp(-0.25j * np.pi)


@dataclass(frozen=True)
class ObjectMask:
    """Transmission function T(x) of a thin object.

    Build with the classmethods rather than the constructor. Point
    evaluation uses closed slit edges (``rect(+-1/2) = 1``); sampling onto
    a grid averages T over each cell, which keeps a sharp grating's
    harmonics from aliasing when the period is not a whole number of
    samples.
    """

    kind: str
    period: float | None = None
    slit_width: float | None = None
    center: float = 0.0
    table_x: tuple = ()
    table_values: tuple = ()

    def __post_init__(self):
        if self.kind == "grating":
            if self.period is None or self.slit_width is None:
                raise ValueError("grating needs period and slit_width")
            if not 0 < self.slit_width <= self.period:
                raise ValueError(f"grating requires 0 < b <= d, got b={self.slit_width}, d={self.period}")
        elif self.kind == "single_slit":
            if self.slit_width is None or not self.slit_width > 0:
                raise ValueError("single_slit needs a positive width")
        elif self.kind == "phase_mask":
            if len(self.table_x) < 2 or len(self.table_x) != len(self.table_values):
                raise ValueError("phase_mask needs matching coordinate and value tables (>= 2 entries)")
            if np.any(np.diff(self.table_x) <= 0):
                raise ValueError("phase_mask coordinates must be strictly increasing")
            if np.any(np.abs(np.asarray(self.table_values)) > 1 + 1e-12):
                raise ValueError("phase_mask values must satisfy |T| <= 1")
        elif self.kind != "unity":
            raise ValueError(f"unknown mask kind {self.kind!r}")

    @classmethod
    def grating(cls, period: float, slit_width: float, offset: float = 0.0) -> "ObjectMask":
        """Amplitude grating with slits centered at ``n*period + period/2 + offset``."""
        return cls("grating", period=float(period), slit_width=float(slit_width), center=float(offset))

    @classmethod
    def single_slit(cls, width: float, center: float = 0.0) -> "ObjectMask":
        return cls("single_slit", slit_width=float(width), center=float(center))

    @classmethod
    def phase_mask(cls, x, values) -> "ObjectMask":
        return cls("phase_mask", table_x=tuple(float(v) for v in x),
                   table_values=tuple(complex(v) for v in values))

    @classmethod
    def unity(cls) -> "ObjectMask":
        return cls("unity")

    def _reduced_offset(self) -> float:
        # whole periods dropped exactly, so a mask shifted by n*d samples identically
        d = self.period
        r = self.center - round(self.center / d) * d
        return 0.0 if abs(r) < 1e-9 * d else r

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "unity":
            return np.ones(x.shape, dtype=complex)
        if self.kind == "single_slit":
            return (np.abs(x - self.center) <= self.slit_width / 2 * _EDGE).astype(complex)
        if self.kind == "grating":
            d, b = self.period, self.slit_width
            u = x - self._reduced_offset() - d / 2
            r = u - np.round(u / d) * d
            return (np.abs(r) <= b / 2 * _EDGE).astype(complex)
        re = np.interp(x, self.table_x, np.real(self.table_values), left=0.0, right=0.0)
        im = np.interp(x, self.table_x, np.imag(self.table_values), left=0.0, right=0.0)
        return re + 1j * im

    def sample(self, grid: SamplingGrid) -> np.ndarray:
        """Cell-averaged transmission on ``grid`` (point samples for tabulated masks)."""
        x, dx = grid.x, grid.dx
        if self.kind == "unity":
            return np.ones(grid.n_points, dtype=complex)
        if self.kind == "phase_mask":
            return self.evaluate(x)
        if self.kind == "single_slit":
            lo = self.center - self.slit_width / 2
            hi = self.center + self.slit_width / 2
            cover = np.minimum(x + dx / 2, hi) - np.maximum(x - dx / 2, lo)
            return (np.clip(cover, 0.0, None) / dx).astype(complex)
        d, b = self.period, self.slit_width
        off = self._reduced_offset()

        def open_length(s):
            u = s - off
            q = np.floor(u / d)
            return q * b + np.clip(u - q * d - (d - b) / 2, 0.0, b)

        t = (open_length(x + dx / 2) - open_length(x - dx / 2)) / dx
        return np.clip(t, 0.0, 1.0).astype(complex)

    def translated(self, shift: float) -> "ObjectMask":
        if self.kind in ("grating", "single_slit"):
            return ObjectMask(self.kind, self.period, self.slit_width, self.center + shift)
        if self.kind == "phase_mask":
            return ObjectMask.phase_mask(np.asarray(self.table_x) + shift, self.table_values)
        return self


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    grid_in: SamplingGrid
    grid_out: SamplingGrid
    entries: np.ndarray
    z: float
    boundary: str
    masks: tuple = ()
    distances: tuple = ()

    def __post_init__(self):
        shape = (self.grid_out.n_points, self.grid_in.n_points)
        if self.entries.shape != shape:
            raise ValueError(f"kernel entries have shape {self.entries.shape}, expected {shape}")
        if self.entries.flags.writeable:
            self.entries.flags.writeable = False

    @property
    def embeds_object(self) -> bool:
        return bool(self.masks)

    def column(self, position: float) -> np.ndarray:
        """Response to a unit-weight delta at ``position`` in the input plane."""
        return self.entries[:, self.grid_in.index_of(position)]


def check_sampling(grid: SamplingGrid, z: float) -> None:
    """Reject grids whose spacing cannot carry the Fresnel chirp over the window."""
    limit = grid.wavelength * z / grid.window
    if grid.dx > limit * (1 + 1e-12):
        z_min = grid.dx * grid.window / grid.wavelength
        w_max = grid.wavelength * z / grid.dx
        raise SamplingError(
            f"undersampled Fresnel kernel: dx = {grid.dx:.4g} m exceeds lambda*z/window = {limit:.4g} m "
            f"for z = {z:.4g} m; use z >= {z_min:.4g} m, window <= {w_max:.4g} m, or more points"
        )


@lru_cache(maxsize=6)
def _fresnel_entries(grid: SamplingGrid, z: float, boundary: str) -> np.ndarray:
    n, dx, k = grid.n_points, grid.dx, grid.k
    if boundary == "open":
        lag = np.arange(-(n - 1), n) * dx
        taps = np.sqrt(k / (2 * np.pi * z)) * _INV_SQRT_I * np.exp(1j * k * z) * np.exp(0.5j * k * lag**2 / z) * dx
        idx = np.arange(n)[:, None] - np.arange(n)[None, :] + (n - 1)
    else:
        f = np.fft.fftfreq(n, dx)
        taps = np.fft.ifft(np.exp(-1j * np.pi * grid.wavelength * z * f**2)) * np.exp(1j * k * z)
        idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    entries = taps[idx]
    entries.flags.writeable = False
    return entries


def fresnel_kernel(grid: SamplingGrid, z: float, boundary: str = "open") -> KernelMatrix:
    """Free-space paraxial propagator over distance ``z``.

    ``h(x, x0) = sqrt(k / (i 2 pi z)) exp(ikz) exp(ik (x - x0)^2 / 2z) dx``
    (open boundary). The periodic variant is the same propagator acting on
    fields periodic with the window, i.e. its band-limited circulant form.
    """
    if not z > 0:
        raise ValueError(f"propagation distance must be positive, got {z!r}")
    if boundary not in BOUNDARIES:
        raise ValueError(f"boundary must be one of {BOUNDARIES}, got {boundary!r}")
    if boundary == "open":
        check_sampling(grid, z)
    entries = _fresnel_entries(grid, float(z), boundary)
    return KernelMatrix(grid, grid, entries, float(z), boundary, distances=(float(z),))


def transmit(kernel: KernelMatrix, mask: ObjectMask) -> KernelMatrix:
    """``kernel . diag(T)``: the object sits in the kernel's input plane."""
    t = mask.sample(kernel.grid_in)
    entries = kernel.entries * t[None, :]
    return KernelMatrix(kernel.grid_in, kernel.grid_out, entries, kernel.z, kernel.boundary,
                        masks=(mask,) + kernel.masks, distances=kernel.distances)


def _merge_boundary(a: str, b: str) -> str:
    return a if a == b else "mixed"


def compose(outer: KernelMatrix, inner: KernelMatrix) -> KernelMatrix:
    """Kernel for travelling through ``inner`` then ``outer``."""
    if inner.grid_out != outer.grid_in:
        raise GridMismatchError("compose: inner output grid differs from outer input grid")
    entries = outer.entries @ inner.entries
    return KernelMatrix(inner.grid_in, outer.grid_out, entries, outer.z + inner.z,
                        _merge_boundary(outer.boundary, inner.boundary),
                        masks=inner.masks + outer.masks,
                        distances=inner.distances + outer.distances)


def object_kernel(grid: SamplingGrid, mask: ObjectMask, z1: float, z2: float,
                  boundary: str = "open") -> KernelMatrix:
    """Source -> object (``z1``) -> recording plane (``z2``) through mask T."""
    first = fresnel_kernel(grid, z1, boundary)
    second = fresnel_kernel(grid, z2, boundary)
    return compose(transmit(second, mask), first)


def apply(kernel: KernelMatrix, field: ComplexField) -> ComplexField:
    if field.grid != kernel.grid_in:
        raise GridMismatchError("apply: field grid differs from kernel input grid")
    return ComplexField(kernel.grid_out, kernel.entries @ field.values)


def scaled(kernel: KernelMatrix, factor: complex) -> KernelMatrix:
    return KernelMatrix(kernel.grid_in, kernel.grid_out, kernel.entries * factor, kernel.z,
                        kernel.boundary, kernel.masks, kernel.distances)


def talbot_length(period: float, wavelength: float) -> float:
    """z_T = 2 d^2 / lambda, exact on the decimal inputs and rounded once."""
    d, lam = Fraction(repr(float(period))), Fraction(repr(float(wavelength)))
    return float(2 * d * d / lam)
