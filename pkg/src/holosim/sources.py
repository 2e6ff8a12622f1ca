"""Source correlation models and their propagation through kernels.

All delta correlations (thermal light, entangled pairs) become a single
sum over the shared source coordinate. The thermal term carries the
discrete delta as ``Kronecker / dx``; the pair amplitude is the plain
product of kernel entries. Every observable is reported normalized, so
these scale choices never reach an output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError
from .grid import SamplingGrid
from .kernels import KernelMatrix

SOURCE_KINDS = ("plane_coherent", "pinhole", "incoherent_thermal", "entangled_pair")

DEFAULT_EMITTING_FRACTION = 0.9
DEFAULT_TAPER_FRACTION = 0.05


def raised_cosine_aperture(x: np.ndarray, width: float, ramp: float) -> np.ndarray:
    """1 on ``|x| <= width/2 - ramp``, cosine roll-off to 0 at ``|x| = width/2``."""
    half = width / 2
    r = np.abs(x)
    if ramp <= 0:
        return (r <= half).astype(float)
    flat = half - ramp
    w = 0.5 * (1 + np.cos(np.pi * np.clip(r - flat, 0.0, ramp) / ramp))
    return np.where(r <= flat, 1.0, np.where(r >= half, 0.0, w))


@dataclass(frozen=True)
class SourceModel:
    """Spatial correlation model of the light leaving the source plane.

    ``emitting_width`` and ``taper`` (fraction of the window used by each
    cosine roll-off) describe the transverse extent of the delta-correlated
    kinds. ``None`` picks the default: 90% of the window, 5% roll-off.
    """

    kind: str
    amplitude: complex = 1.0
    position: float = 0.0
    width: float | None = None
    intensity: float = 1.0
    emitting_width: float | None = None
    taper: float = DEFAULT_TAPER_FRACTION
    strength: float = 1.0

    def __post_init__(self):
        if self.kind not in SOURCE_KINDS:
            raise ValueError(f"unknown source kind {self.kind!r}; expected one of {SOURCE_KINDS}")
        if self.kind == "pinhole" and (self.width is None or not self.width > 0):
            raise ValueError("pinhole source needs a positive width")
        if self.kind == "incoherent_thermal" and not self.intensity > 0:
            raise ValueError("incoherent_thermal intensity must be positive")
        if self.kind == "entangled_pair" and not self.strength > 0:
            raise ValueError("entangled_pair strength must be positive")
        if self.emitting_width is not None and not self.emitting_width > 0:
            raise ValueError("emitting_width must be positive")
        if not 0 <= self.taper < 0.5:
            raise ValueError("taper fraction must lie in [0, 0.5)")

    @classmethod
    def plane_coherent(cls, amplitude: complex = 1.0) -> "SourceModel":
        return cls("plane_coherent", amplitude=complex(amplitude))

    @classmethod
    def pinhole(cls, position: float = 0.0, width: float = 100e-6, amplitude: complex = 1.0) -> "SourceModel":
        return cls("pinhole", amplitude=complex(amplitude), position=float(position), width=float(width))

    @classmethod
    def incoherent_thermal(cls, intensity: float = 1.0, emitting_width: float | None = None,
                           taper: float = DEFAULT_TAPER_FRACTION) -> "SourceModel":
        return cls("incoherent_thermal", intensity=float(intensity), emitting_width=emitting_width, taper=taper)

    @classmethod
    def entangled_pair(cls, strength: float = 1.0, emitting_width: float | None = None,
                       taper: float = DEFAULT_TAPER_FRACTION) -> "SourceModel":
        return cls("entangled_pair", strength=float(strength), emitting_width=emitting_width, taper=taper)

    def emission_weights(self, grid: SamplingGrid) -> np.ndarray:
        """Diagonal of the source correlation on ``grid`` (delta-correlated kinds)."""
        width = self.emitting_width
        if width is None:
            width = DEFAULT_EMITTING_FRACTION * grid.window
        if width > grid.window * (1 + 1e-12):
            raise ValueError(f"emitting width {width} m exceeds the window {grid.window} m")
        scale = self.intensity if self.kind == "incoherent_thermal" else self.strength
        return scale * raised_cosine_aperture(grid.x, width, self.taper * grid.window)


@dataclass(frozen=True, eq=False)
class CorrelationProfile:
    """Complex first-order correlation <E_a*(x) E_b(x)> on one plane."""

    grid: SamplingGrid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.grid.n_points,):
            raise ValueError("correlation profile length differs from grid")


@dataclass(frozen=True, eq=False)
class TwoPhotonAmplitude:
    """A(x1, x2): rows follow the signal detector, columns the idler detector."""

    grid1: SamplingGrid
    grid2: SamplingGrid
    values: np.ndarray
    arm_label: str

    def __post_init__(self):
        if self.values.shape != (self.grid1.n_points, self.grid2.n_points):
            raise ValueError("two-photon amplitude shape differs from its grids")


def _check_pair(h_a: KernelMatrix, h_b: KernelMatrix) -> None:
    if h_a.grid_in != h_b.grid_in or h_a.grid_out != h_b.grid_out:
        raise GridMismatchError("kernels must share input and output grids")


def mutual_intensity(source: SourceModel, h_a: KernelMatrix, h_b: KernelMatrix) -> np.ndarray:
    """<E_a*(x) E_b(x)> for fields launched by ``source`` through ``h_a`` and ``h_b``."""
    _check_pair(h_a, h_b)
    grid = h_a.grid_in
    if source.kind == "plane_coherent":
        drive = np.full(grid.n_points, source.amplitude)
        return np.conj(h_a.entries @ drive) * (h_b.entries @ drive)
    if source.kind == "pinhole":
        if source.width < grid.dx * (1 - 1e-12):
            raise ValueError(f"pinhole width {source.width} m is narrower than dx = {grid.dx} m")
        i = grid.index_of(source.position)
        # E_j(x) = h_j(x, x0) * beta; kernel columns carry one factor dx
        e_a = h_a.entries[:, i] / grid.dx * source.amplitude
        e_b = h_b.entries[:, i] / grid.dx * source.amplitude
        return np.conj(e_a) * e_b
    if source.kind == "incoherent_thermal":
        w = source.emission_weights(grid)
        return (np.conj(h_a.entries) * h_b.entries) @ w / grid.dx
    raise ValueError("entangled_pair has no first-order correlation; use two_photon_amplitude")


def classical_interference_term(source: SourceModel, h_o: KernelMatrix, h_r: KernelMatrix,
                                theta: float = 0.0) -> CorrelationProfile:
    """Holographic cross term <E_r*(x) E_o(x)>.

    The longitudinal phase ``exp(ik(z_o - z_r))`` carried by the kernels is
    replaced by ``exp(i theta)``; transverse phases keep the nominal
    distances.
    """
    values = mutual_intensity(source, h_r, h_o)
    k = h_o.grid_in.k
    values = values * np.exp(1j * theta) * np.exp(-1j * k * (h_o.z - h_r.z))
    return CorrelationProfile(h_o.grid_out, values)


def two_photon_amplitude(h_signal: KernelMatrix, h_idler: KernelMatrix,
                         source: SourceModel | None = None) -> TwoPhotonAmplitude:
    """A(x1, x2) = sum_x0 h_signal(x1, x0) h_idler(x2, x0) C(x0).

    ``source`` (entangled_pair) sets the transverse extent of the pair
    emission; ``None`` means a uniform emitter over the whole window.
    """
    if h_signal.grid_in != h_idler.grid_in:
        raise GridMismatchError("signal and idler kernels must start on the same source grid")
    grid = h_signal.grid_in
    if source is None:
        weights = np.ones(grid.n_points)
    elif source.kind != "entangled_pair":
        raise ValueError(f"two-photon amplitude needs an entangled_pair source, got {source.kind!r}")
    else:
        weights = source.emission_weights(grid)
    # plain product of the weighted entries: for identical free arms this is
    # the entries of the doubled-distance kernel
    root = np.sqrt(weights)
    values = (h_signal.entries * root) @ (h_idler.entries * root).T
    label = "object" if h_signal.embeds_object else "reference"
    return TwoPhotonAmplitude(h_signal.grid_out, h_idler.grid_out, values, label)
