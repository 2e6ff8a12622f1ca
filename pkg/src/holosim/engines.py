"""Holographic observables: one-photon profiles, coincidence maps, detection.

The ``closed_form_*`` functions evaluate the analytic single-integral
results for the three classical sources directly by quadrature; they
share no code path with the kernel engines they are used to check.

Reference-phase convention: every cross term carries ``exp(i theta)`` in
place of the longitudinal phase ``exp(ik (z_object - z_reference))``,
so ``theta = 0`` gives the in-phase image and ``theta = pi`` the
out-of-phase one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DivergentEffectiveLength, GridMismatchError, UnsupportedGeometryError
from .grid import RealProfile, SamplingGrid
from .kernels import KernelMatrix, ObjectMask, check_sampling, fresnel_kernel, object_kernel, scaled
from .sources import CorrelationProfile, SourceModel, mutual_intensity, two_photon_amplitude

EQUAL_PATH_TOL = 1e-12  # meters
DEFAULT_ETA = 0.6
CENTRAL_FRACTION = 0.6


def _positive(**lengths):
    for name, value in lengths.items():
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value!r}")


def _exact(*values):
    # each length as the shortest decimal that round-trips to it, so the
    # algebra is exact on the values as written and rounded once at the end
    return [Fraction(repr(float(v))) for v in values]


def _check_eta(eta):
    if not 0 <= eta <= 1:
        raise ValueError(f"amplitude ratio eta must lie in [0, 1], got {eta!r}")


@dataclass(frozen=True)
class ClassicalGeometry:
    """One-photon in-line interferometer.

    ``z_o1``: source to object, ``z_o2``: object to recording plane,
    ``z_r``: source to recording plane along the reference arm.
    """

    z_o1: float
    z_o2: float
    z_r: float
    theta: float = 0.0
    eta: float = DEFAULT_ETA

    def __post_init__(self):
        _positive(z_o1=self.z_o1, z_o2=self.z_o2, z_r=self.z_r)
        _check_eta(self.eta)
        object.__setattr__(self, "theta", float(self.theta) % (2 * math.pi))

    @property
    def z_o(self) -> float:
        return self.z_o1 + self.z_o2

    @property
    def equal_path(self) -> bool:
        return abs(self.z_r - self.z_o) <= EQUAL_PATH_TOL

    @property
    def magnification(self) -> float:
        z_o1, z_o2 = _exact(self.z_o1, self.z_o2)
        return float(1 + z_o2 / z_o1)

    @property
    def point_source_length(self) -> float:
        """Z = z_o1 z_o2 / z_o."""
        z_o1, z_o2 = _exact(self.z_o1, self.z_o2)
        return float(z_o1 * z_o2 / (z_o1 + z_o2))

    @property
    def incoherent_length(self) -> float:
        """Z' = z_o2 (z_r - z_o1) / (z_r - z_o)."""
        if self.equal_path:
            raise DivergentEffectiveLength(
                "Z' -> infinity: z_r equals z_o, the incoherent-source hologram washes out")
        if self.z_r <= self.z_o1:
            raise UnsupportedGeometryError(
                f"incoherent source needs z_r > z_o1 (got z_r={self.z_r}, z_o1={self.z_o1}); "
                "the effective length changes sign there and is not modeled")
        z_o1, z_o2, z_r = _exact(self.z_o1, self.z_o2, self.z_r)
        return float(z_o2 * (z_r - z_o1) / (z_r - z_o1 - z_o2))


@dataclass(frozen=True)
class QuantumGeometry:
    """Two-photon layout.

    The signal photon crosses ``z_so2`` from the crystal to the object and
    ``z_so1`` from the object to detector D1; ``z_sr`` is the free
    reference path to D1 and ``z_i`` the idler path to D2.
    """

    z_so1: float
    z_so2: float
    z_sr: float
    z_i: float
    theta: float = 0.0
    eta: float = DEFAULT_ETA

    def __post_init__(self):
        _positive(z_so1=self.z_so1, z_so2=self.z_so2, z_sr=self.z_sr, z_i=self.z_i)
        _check_eta(self.eta)
        object.__setattr__(self, "theta", float(self.theta) % (2 * math.pi))

    @property
    def z_so(self) -> float:
        return self.z_so1 + self.z_so2

    @property
    def equal_path(self) -> bool:
        return abs(self.z_sr - self.z_so) <= EQUAL_PATH_TOL


HologramGeometry = ClassicalGeometry | QuantumGeometry

REGIMES = ("point", "coherent", "bucket")


@dataclass(frozen=True)
class DetectionRegime:
    kind: str
    x1: float = 0.0

    def __post_init__(self):
        if self.kind not in REGIMES:
            raise ValueError(f"unknown detection regime {self.kind!r}; expected one of {REGIMES}")


@dataclass(frozen=True)
class EquivalentGeometry:
    classical: ClassicalGeometry
    source_kind: str
    effective_length: float
    magnification: float


def equivalent_geometry(geometry: QuantumGeometry, regime: DetectionRegime | str) -> EquivalentGeometry:
    """One-photon layout in which detector D1 plays the source."""
    kind = regime.kind if isinstance(regime, DetectionRegime) else regime
    classical = ClassicalGeometry(
        z_o1=geometry.z_so1,
        z_o2=geometry.z_i + geometry.z_so2,
        z_r=geometry.z_i + geometry.z_sr,
        theta=geometry.theta,
        eta=geometry.eta,
    )
    if kind == "point":
        return EquivalentGeometry(classical, "pinhole", classical.point_source_length, classical.magnification)
    if kind == "bucket":
        return EquivalentGeometry(classical, "incoherent_thermal", classical.incoherent_length, 1.0)
    if kind == "coherent":
        return EquivalentGeometry(classical, "plane_coherent", classical.z_o2, 1.0)
    raise ValueError(f"unknown detection regime {kind!r}")


# closed-form oracles


def _fresnel_sum(grid: SamplingGrid, t: np.ndarray, centers: np.ndarray, length: float) -> np.ndarray:
    # sum_x' T(x') exp(ik (x' - c)^2 / 2L) dx for every output center c
    k = grid.k
    lag = grid.x[None, :] - centers[:, None]
    return np.exp(0.5j * k * lag**2 / length) @ t * grid.dx


def closed_form_coherent(geometry: ClassicalGeometry, mask: ObjectMask, grid: SamplingGrid,
                         amplitude: complex = 1.0, aperture: str = "periodic") -> CorrelationProfile:
    """Plane-wave hologram ``|a|^2 sqrt(k/(i2pi z_o2)) e^{i theta} int T(x') e^{ik(x-x')^2/2z_o2} dx'``.

    ``aperture="periodic"`` integrates over the periodic continuation of
    the window (what an infinite plane wave on a periodic object sees),
    term by term over the object's Fourier series; ``"window"`` integrates
    over the window only.
    """
    z = geometry.z_o2
    k = grid.k
    t = mask.sample(grid)
    pref = abs(amplitude) ** 2 * np.exp(1j * geometry.theta)
    if aperture == "window":
        check_sampling(grid, z)
        values = pref * np.sqrt(k / (2 * np.pi * z)) * np.exp(-0.25j * np.pi) * _fresnel_sum(grid, t, grid.x, z)
    elif aperture == "periodic":
        # Fourier coefficients of T over one window, then the exact Fresnel
        # integral of each harmonic: sqrt(k/(i2pi z)) int e^{i2pi f x'} e^{ik(x-x')^2/2z} dx'
        #                            = e^{i2pi f x} e^{-i pi lambda z f^2}
        n = grid.n_points
        f = (np.arange(n) - n // 2) / grid.window
        basis = np.exp(2j * np.pi * np.outer(grid.x, f))
        coeffs = basis.conj().T @ t / n
        values = pref * (basis @ (coeffs * np.exp(-1j * np.pi * grid.wavelength * z * f**2)))
    else:
        raise ValueError(f"aperture must be 'periodic' or 'window', got {aperture!r}")
    return CorrelationProfile(grid, values)


def closed_form_pinhole(geometry: ClassicalGeometry, mask: ObjectMask, grid: SamplingGrid,
                        amplitude: complex = 1.0) -> CorrelationProfile:
    """Point-source hologram: magnified image of T at effective length Z = z_o1 z_o2 / z_o."""
    g = geometry
    k = grid.k
    big_z = g.point_source_length
    check_sampling(grid, big_z)
    x = grid.x
    pref = ((k / (2 * np.pi)) ** 1.5 * abs(amplitude) ** 2 * np.exp(1j * g.theta)
            / (np.exp(0.25j * np.pi) * math.sqrt(g.z_r * g.z_o1 * g.z_o2)))
    chirp = np.exp(0.5j * k * (g.z_r - g.z_o) * x**2 / (g.z_r * g.z_o))
    values = pref * chirp * _fresnel_sum(grid, mask.sample(grid), x / g.magnification, big_z)
    return CorrelationProfile(grid, values)


def closed_form_incoherent(geometry: ClassicalGeometry, mask: ObjectMask, grid: SamplingGrid,
                           intensity: float = 1.0) -> CorrelationProfile:
    """Extended incoherent source: unmagnified image of T at Z' = z_o2 (z_r - z_o1)/(z_r - z_o)."""
    g = geometry
    z_eff = g.incoherent_length
    check_sampling(grid, abs(z_eff))
    k = grid.k
    pref = k * intensity * np.exp(1j * g.theta) / (2 * math.pi * math.sqrt(g.z_o2 * (g.z_r - g.z_o1)))
    values = pref * _fresnel_sum(grid, mask.sample(grid), grid.x, z_eff)
    return CorrelationProfile(grid, values)


# numerical engines


@dataclass(frozen=True, eq=False)
class HologramProfile:
    """One-photon recording-plane readout, jointly normalized.

    ``correlation`` is the complex cross term <E_r* E_o> on the same scale.
    """

    grid: SamplingGrid
    total: RealProfile
    intensity_object: RealProfile
    intensity_reference: RealProfile
    interference: RealProfile
    correlation: np.ndarray
    norm: float


def _joint_norm(intensity_only: np.ndarray) -> float:
    peak = float(np.max(intensity_only))
    if not peak > 0:
        raise ValueError("both interferometer arms are dark; nothing to normalize")
    return peak


def default_boundary(source: SourceModel) -> str:
    return "periodic" if source.kind == "plane_coherent" else "open"


def record_hologram(geometry: ClassicalGeometry, mask: ObjectMask, grid: SamplingGrid,
                    source: SourceModel, boundary: str | None = None,
                    reference: bool = True) -> HologramProfile:
    """Intensity at the recording plane of the one-photon interferometer.

    ``reference=False`` blocks the reference arm.
    """
    if source.kind == "entangled_pair":
        raise ValueError("entangled_pair sources belong to build_coincidence_map")
    boundary = boundary or default_boundary(source)
    g = geometry
    k = grid.k
    h_o = object_kernel(grid, mask, g.z_o1, g.z_o2, boundary)
    h_r = fresnel_kernel(grid, g.z_r, boundary)
    # reference factor c with conj(c) = e^{i theta} e^{-ik(z_o - z_r)}
    c = (np.exp(-1j * g.theta) * np.exp(1j * k * (g.z_o - g.z_r))) if reference else 0.0
    h_o = scaled(h_o, g.eta)
    h_r = scaled(h_r, c)
    i_obj = np.real(mutual_intensity(source, h_o, h_o))
    i_ref = np.real(mutual_intensity(source, h_r, h_r))
    cross = mutual_intensity(source, h_r, h_o)
    both = KernelMatrix(grid, grid, h_o.entries + h_r.entries, h_o.z, boundary, h_o.masks)
    total = np.real(mutual_intensity(source, both, both))
    norm = _joint_norm(i_obj + i_ref)
    return HologramProfile(
        grid=grid,
        total=RealProfile(grid, total / norm),
        intensity_object=RealProfile(grid, i_obj / norm),
        intensity_reference=RealProfile(grid, i_ref / norm),
        interference=RealProfile(grid, 2 * np.real(cross) / norm),
        correlation=cross / norm,
        norm=norm,
    )


@dataclass(frozen=True, eq=False)
class CoincidenceMap:
    """R(x1, x2) and its four-part split, jointly normalized.

    The normalization is the peak of the intensity-only part
    ``intensity_object + intensity_reference``, which does not depend on
    the reference phase. The (unnormalized) two-photon amplitudes are kept
    for amplitude-level detection.
    """

    grid1: SamplingGrid
    grid2: SamplingGrid
    total: np.ndarray
    intensity_object: np.ndarray
    intensity_reference: np.ndarray
    interference: np.ndarray
    norm: float
    amplitude_object: np.ndarray | None = None
    amplitude_reference: np.ndarray | None = None

    @property
    def has_amplitudes(self) -> bool:
        return self.amplitude_object is not None and self.amplitude_reference is not None

    def without_amplitudes(self) -> "CoincidenceMap":
        return replace(self, amplitude_object=None, amplitude_reference=None)


def signal_kernels(geometry: QuantumGeometry, mask: ObjectMask, grid: SamplingGrid, boundary: str = "open"):
    """(object arm, reference arm, idler) kernels from the crystal plane."""
    g = geometry
    h_so = object_kernel(grid, mask, g.z_so2, g.z_so1, boundary)
    h_sr = fresnel_kernel(grid, g.z_sr, boundary)
    h_i = fresnel_kernel(grid, g.z_i, boundary)
    return h_so, h_sr, h_i


def default_pair_source(grid: SamplingGrid, boundary: str) -> SourceModel:
    if boundary == "periodic":
        return SourceModel.entangled_pair(emitting_width=grid.window, taper=0.0)
    return SourceModel.entangled_pair()


@lru_cache(maxsize=2)
def _pair_amplitudes(z_so1, z_so2, z_sr, z_i, mask, grid, boundary, source):
    # theta and eta only rescale these, so sweeps over them reuse one build
    g = QuantumGeometry(z_so1, z_so2, z_sr, z_i)
    h_so, h_sr, h_i = signal_kernels(g, mask, grid, boundary)
    a_so = two_photon_amplitude(h_so, h_i, source).values
    a_sr = two_photon_amplitude(h_sr, h_i, source).values
    a_so.flags.writeable = False
    a_sr.flags.writeable = False
    return a_so, a_sr, h_so.z, h_sr.z


def build_coincidence_map(geometry: QuantumGeometry, mask: ObjectMask, grid: SamplingGrid,
                          eta: float | None = None, theta: float | None = None,
                          boundary: str = "open", source: SourceModel | None = None,
                          reference: bool = True) -> CoincidenceMap:
    """Coincidence map of the two-photon hologram.

    ``source`` defaults to an entangled pair emitting over 90% of the
    window with cosine edges (open boundary) or uniformly (periodic).
    """
    g = geometry
    eta = g.eta if eta is None else eta
    theta = g.theta if theta is None else theta
    _check_eta(eta)
    source = source or default_pair_source(grid, boundary)
    raw_so, raw_sr, z_so, z_sr = _pair_amplitudes(g.z_so1, g.z_so2, g.z_sr, g.z_i, mask, grid, boundary, source)
    a_so = raw_so * eta
    if reference:
        c = np.exp(-1j * theta) * np.exp(1j * grid.k * (z_so - z_sr))
        a_sr = raw_sr * c
    else:
        a_sr = np.zeros_like(a_so)
    i_obj = np.abs(a_so) ** 2
    i_ref = np.abs(a_sr) ** 2
    total = np.abs(a_so + a_sr) ** 2
    interference = 2 * np.real(np.conj(a_sr) * a_so)
    norm = _joint_norm(i_obj + i_ref)
    for part in (total, i_obj, i_ref, interference):
        part /= norm
    return CoincidenceMap(grid, grid, total, i_obj, i_ref, interference, norm, a_so, a_sr)


@dataclass(frozen=True, eq=False)
class DetectedProfile:
    """Idler-plane readout for one detection regime, with its parts."""

    grid: SamplingGrid
    total: RealProfile
    intensity_object: RealProfile
    intensity_reference: RealProfile
    interference: RealProfile
    correlation: np.ndarray | None


def detect_parts(cmap: CoincidenceMap, regime: DetectionRegime) -> DetectedProfile:
    g2 = cmap.grid2
    dx1 = cmap.grid1.dx
    if regime.kind == "point":
        i = cmap.grid1.index_of(regime.x1)
        parts = [cmap.total[i], cmap.intensity_object[i], cmap.intensity_reference[i], cmap.interference[i]]
        corr = None
        if cmap.has_amplitudes:
            corr = np.conj(cmap.amplitude_reference[i]) * cmap.amplitude_object[i] / cmap.norm
    elif regime.kind == "bucket":
        parts = [p.sum(axis=0) * dx1 for p in
                 (cmap.total, cmap.intensity_object, cmap.intensity_reference, cmap.interference)]
        corr = None
        if cmap.has_amplitudes:
            corr = np.sum(np.conj(cmap.amplitude_reference) * cmap.amplitude_object, axis=0) * dx1 / cmap.norm
    elif regime.kind == "coherent":
        if not cmap.has_amplitudes:
            raise ValueError("coherent detection integrates amplitudes; this map carries intensities only")
        # zero-transverse-momentum projection of the signal photon
        e_o = cmap.amplitude_object.sum(axis=0) * dx1
        e_r = cmap.amplitude_reference.sum(axis=0) * dx1
        norm = cmap.norm
        corr = np.conj(e_r) * e_o / norm
        parts = [np.abs(e_o + e_r) ** 2 / norm, np.abs(e_o) ** 2 / norm, np.abs(e_r) ** 2 / norm,
                 2 * np.real(corr)]
    else:
        raise ValueError(f"unknown detection regime {regime.kind!r}")
    total, i_obj, i_ref, inter = (RealProfile(g2, p) for p in parts)
    return DetectedProfile(g2, total, i_obj, i_ref, inter, corr)


def detect(cmap: CoincidenceMap, regime: DetectionRegime) -> RealProfile:
    return detect_parts(cmap, regime).total


# metrics


def _smooth(values: np.ndarray, dx: float, period: float) -> np.ndarray:
    # low-pass with resolution period/8: unit gain up to 4/period, cosine
    # roll-off to zero at 8/period, so the fringe fundamental is untouched
    f = np.fft.rfftfreq(values.size, dx)
    f_pass, f_stop = 4 / period, 8 / period
    u = np.clip((f - f_pass) / (f_stop - f_pass), 0.0, 1.0)
    gain = 0.5 * (1 + np.cos(np.pi * u))
    return np.fft.irfft(np.fft.rfft(values) * gain, values.size)


def visibility(profile: RealProfile, period_hint: float, fraction: float = CENTRAL_FRACTION) -> float:
    """Fringe contrast (max - min)/(max + min) over the central region.

    The profile is first low-passed to a resolution of ``period_hint / 8``
    so single-sample ripple does not count as a fringe. A dark profile
    reports 0.
    """
    grid = profile.grid
    if not period_hint > 2 * grid.dx:
        raise ValueError(f"period hint {period_hint} m must exceed two samples ({2 * grid.dx} m)")
    v = _smooth(profile.values, grid.dx, period_hint)[grid.central_region(fraction)]
    hi, lo = float(v.max()), float(v.min())
    if hi + lo <= 0:
        return 0.0
    return min(max((hi - lo) / (hi + lo), 0.0), 1.0)


def pattern_energy_ratio(interference: RealProfile, total: RealProfile,
                         fraction: float = CENTRAL_FRACTION) -> float:
    """||interference - mean||_1 / ||total||_1 on the central region.

    The mean is removed because a washed-out hologram still leaves a
    uniform cross term; only its spatial modulation carries an image.
    """
    if interference.grid != total.grid:
        raise GridMismatchError("interference and total live on different grids")
    region = total.grid.central_region(fraction)
    i = interference.values[region]
    denom = float(np.abs(total.values[region]).sum())
    if denom == 0:
        return 0.0
    return float(np.abs(i - i.mean()).sum() / denom)


def imaged_period(profile: RealProfile, period_hint: float | None = None,
                  fraction: float = CENTRAL_FRACTION) -> float:
    """Pattern period from the first autocorrelation peak (sub-sample refined).

    With ``period_hint`` the peak is searched within [0.5, 1.5] x hint.
    """
    grid = profile.grid
    v = profile.values[grid.central_region(fraction)]
    v = v - v.mean()
    n = v.size
    ac = np.correlate(v, v, mode="full")[n - 1:]
    ac = ac / np.arange(n, 0, -1)  # unbiased: each lag averages fewer products
    if period_hint is not None:
        lo = max(1, int(0.5 * period_hint / grid.dx))
        hi = min(n - 2, int(1.5 * period_hint / grid.dx) + 1)
    else:
        # first positive lobe after the first negative dip
        below = np.nonzero(ac < 0)[0]
        above = np.nonzero(ac[below[0]:] > 0)[0] if below.size else below
        if above.size == 0:
            raise ValueError("profile shows no periodic structure")
        lo = int(below[0] + above[0])
        after = np.nonzero(ac[lo:] < 0)[0]
        hi = lo + int(after[0]) if after.size else n - 2
    if hi <= lo:
        raise ValueError("search range for the period is empty")
    j = lo + int(np.argmax(ac[lo:hi + 1]))
    offset = 0.0
    if 0 < j < n - 1:
        a, b, c = ac[j - 1], ac[j], ac[j + 1]
        denom = a - 2 * b + c
        if b >= max(a, c) and denom < 0:
            offset = 0.5 * (a - c) / denom
    return float((j + offset) * grid.dx)
