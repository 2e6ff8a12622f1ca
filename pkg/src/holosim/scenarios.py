"""Named experiment configurations, their execution and optional shot noise."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .engines import (
    ClassicalGeometry,
    CoincidenceMap,
    DetectionRegime,
    HologramGeometry,
    QuantumGeometry,
    build_coincidence_map,
    closed_form_coherent,
    closed_form_incoherent,
    closed_form_pinhole,
    default_boundary,
    default_pair_source,
    detect_parts,
    equivalent_geometry,
    imaged_period,
    pattern_energy_ratio,
    record_hologram,
    visibility,
)
from .errors import DivergentEffectiveLength, TemporalCoherenceWarning
from .grid import RealProfile, SamplingGrid, make_grid, normalized_distance
from .kernels import BOUNDARIES, ObjectMask, talbot_length
from .sources import SourceModel

MODES = ("one_photon", "two_photon")
VARIANTS = ("blocked_reference", "open_in_phase", "open_out_of_phase", "no_pinhole", "bucket_swap")

GRATING_PERIOD = 400e-6
GRATING_SLIT = 200e-6
PINHOLE_WIDTH = 100e-6

THETA_STEPS = 16
BUCKET_PATH_OFFSETS = (0.0, 0.05, 0.10, 0.20)


@dataclass(frozen=True)
class NoiseSpec:
    total_counts: int
    seed: int

    def __post_init__(self):
        if int(self.total_counts) != self.total_counts or self.total_counts <= 0:
            raise ValueError(f"noise total_counts must be a positive integer, got {self.total_counts!r}")
        object.__setattr__(self, "total_counts", int(self.total_counts))
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete description of one simulated recording.

    The variant fixes which arms are open and, for ``no_pinhole`` and
    ``bucket_swap``, swaps the source or the detection regime; the
    reference phase itself always comes from ``geometry.theta``.
    ``boundary=None`` picks the engine default for the source.
    """

    name: str
    mode: str
    geometry: HologramGeometry
    source: SourceModel
    mask: ObjectMask
    variant: str
    grid: SamplingGrid = field(default_factory=make_grid)
    regime: DetectionRegime | None = None
    noise: NoiseSpec | None = None
    boundary: str | None = None

    def __post_init__(self):
        if not self.name or not self.name.replace("_", "").replace("-", "").isalnum():
            raise ValueError(f"scenario name must be an identifier, got {self.name!r}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.boundary is not None and self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        if self.mode == "one_photon":
            self._check_one_photon()
        else:
            self._check_two_photon()

    def _check_one_photon(self):
        if not isinstance(self.geometry, ClassicalGeometry):
            raise ValueError("one_photon scenarios need a ClassicalGeometry")
        if self.regime is not None:
            raise ValueError("one_photon scenarios have no detection regime")
        if self.variant == "bucket_swap":
            raise ValueError("bucket_swap applies to two_photon scenarios only")
        if self.variant == "no_pinhole" and self.source.kind != "incoherent_thermal":
            object.__setattr__(self, "source", SourceModel.incoherent_thermal(
                intensity=1.0, emitting_width=self.source.emitting_width, taper=self.source.taper))
        if self.source.kind == "entangled_pair":
            raise ValueError("one_photon scenarios cannot use an entangled_pair source")

    def _check_two_photon(self):
        if not isinstance(self.geometry, QuantumGeometry):
            raise ValueError("two_photon scenarios need a QuantumGeometry")
        if self.variant == "no_pinhole":
            raise ValueError("no_pinhole applies to one_photon scenarios only")
        if self.source.kind != "entangled_pair":
            raise ValueError("two_photon scenarios need an entangled_pair source")
        regime = self.regime or DetectionRegime("point")
        if self.variant == "bucket_swap" and regime.kind != "bucket":
            regime = DetectionRegime("bucket", regime.x1)
        self.grid.index_of(regime.x1)
        object.__setattr__(self, "regime", regime)

    @property
    def resolved_boundary(self) -> str:
        if self.boundary is not None:
            return self.boundary
        return default_boundary(self.source) if self.mode == "one_photon" else "open"

    @property
    def resolved_source(self) -> SourceModel:
        # a pair emitter on a periodic window covers the whole cell
        if self.mode == "two_photon" and self.resolved_boundary == "periodic" and self.source.emitting_width is None:
            return default_pair_source(self.grid, "periodic")
        return self.source

    @property
    def reference_open(self) -> bool:
        return self.variant != "blocked_reference"

    @property
    def equal_path(self) -> bool:
        return self.geometry.equal_path


@dataclass(frozen=True, eq=False)
class ScenarioResult:
    """Outcome of :func:`run`.

    ``parts`` holds the four-part split on the profile's scale (``None``
    after noise is applied); ``coincidence_map`` is kept for two-photon
    runs, without amplitudes.
    """

    config: ScenarioConfig
    profile: RealProfile
    parts: dict | None
    metrics: dict
    coincidence_map: CoincidenceMap | None = None
    oracle: RealProfile | None = None


def _grating() -> ObjectMask:
    return ObjectMask.grating(GRATING_PERIOD, GRATING_SLIT)


def _one_photon(name, variant, theta=0.0, source=None, z_r=None):
    geometry = ClassicalGeometry(0.40, 0.40, 0.80 if z_r is None else z_r, theta=theta)
    source = source or SourceModel.pinhole(0.0, PINHOLE_WIDTH)
    return ScenarioConfig(name, "one_photon", geometry, source, _grating(), variant)


def _two_photon(name, variant, theta=0.0, regime="point", z_sr=None, boundary=None):
    geometry = QuantumGeometry(0.40, 0.15, 0.55 if z_sr is None else z_sr, 0.25, theta=theta)
    return ScenarioConfig(name, "two_photon", geometry, SourceModel.entangled_pair(), _grating(),
                          variant, regime=DetectionRegime(regime), boundary=boundary)


def _figure_scenarios() -> list[ScenarioConfig]:
    incoherent = SourceModel.incoherent_thermal()
    return [
        _one_photon("fig3a", "blocked_reference"),
        _one_photon("fig3b", "open_in_phase"),
        _one_photon("fig3c", "open_out_of_phase", theta=math.pi),
        _one_photon("fig3d", "no_pinhole", source=incoherent),
        _one_photon("fig3e", "no_pinhole", theta=math.pi, source=incoherent),
        _two_photon("fig4a", "blocked_reference"),
        _two_photon("fig4b", "open_in_phase"),
        _two_photon("fig4c", "open_out_of_phase", theta=math.pi),
        _two_photon("fig4d", "bucket_swap", regime="bucket"),
        _two_photon("fig4e", "bucket_swap", theta=math.pi, regime="bucket"),
    ]


def _sweep_scenarios() -> dict[str, list[ScenarioConfig]]:
    theta = [_two_photon(f"theta_scan_{j:02d}", "open_in_phase", theta=2 * math.pi * j / THETA_STEPS)
             for j in range(THETA_STEPS)]
    bucket = [_two_photon(f"bucket_path_scan_{round(dz * 100):02d}cm", "bucket_swap", regime="bucket",
                          z_sr=0.55 + dz)
              for dz in BUCKET_PATH_OFFSETS]
    demo = [_two_photon("coherent_regime_demo", "open_in_phase", regime="coherent", boundary="periodic")]
    return {"theta_scan": theta, "bucket_path_scan": bucket, "coherent_regime_demo": demo}


def builtin_sweeps() -> dict[str, list[ScenarioConfig]]:
    """Sweep name -> member scenarios, in sweep order."""
    return _sweep_scenarios()


def builtin_scenarios() -> list[ScenarioConfig]:
    configs = _figure_scenarios()
    for members in _sweep_scenarios().values():
        configs.extend(members)
    return configs


def get_scenario(name: str) -> ScenarioConfig:
    for config in builtin_scenarios():
        if config.name == name:
            return config
    raise KeyError(f"no builtin scenario named {name!r}")


# execution


def _period_hint(config: ScenarioConfig) -> float | None:
    if config.mask.kind != "grating":
        return None
    if config.mode == "one_photon":
        magnified = config.source.kind == "pinhole"
        return config.mask.period * (config.geometry.magnification if magnified else 1.0)
    if config.regime.kind == "point":
        return config.mask.period * equivalent_geometry(config.geometry, "point").magnification
    return config.mask.period


def _oracle(config: ScenarioConfig) -> tuple[np.ndarray | None, dict]:
    """Complex closed-form cross term for the configuration, plus metadata."""
    info = {}
    if config.mode == "one_photon":
        geometry, kind = config.geometry, config.source.kind
    else:
        # every regime maps onto the same one-photon layout; only the source differs
        geometry = equivalent_geometry(config.geometry, "point").classical
        kind = {"point": "pinhole", "bucket": "incoherent_thermal", "coherent": "plane_coherent"}[config.regime.kind]
    grid, mask = config.grid, config.mask
    if kind == "pinhole":
        info["effective_length"] = geometry.point_source_length
        return closed_form_pinhole(geometry, mask, grid).values, info
    if kind == "plane_coherent":
        info["effective_length"] = geometry.z_o2
        aperture = "periodic" if config.resolved_boundary == "periodic" else "window"
        return closed_form_coherent(geometry, mask, grid, aperture=aperture).values, info
    try:
        info["effective_length"] = geometry.incoherent_length
    except DivergentEffectiveLength:
        info["effective_length"] = math.inf
        return None, info
    return closed_form_incoherent(geometry, mask, grid).values, info


def _engine_parts(config: ScenarioConfig):
    g = config.geometry
    if config.mode == "one_photon":
        holo = record_hologram(g, config.mask, config.grid, config.source,
                               boundary=config.resolved_boundary, reference=config.reference_open)
        return holo, None
    cmap = build_coincidence_map(g, config.mask, config.grid, boundary=config.resolved_boundary,
                                 source=config.resolved_source, reference=config.reference_open)
    return detect_parts(cmap, config.regime), cmap.without_amplitudes()


def compute_metrics(config: ScenarioConfig, profile: RealProfile, parts: dict | None,
                    oracle: RealProfile | None = None) -> dict:
    """Metrics that depend only on the profile, its parts and the oracle."""
    hint = _period_hint(config)
    metrics = {"visibility": None, "imaged_period": None, "oracle_l2": None,
               "pattern_energy_ratio": None}
    if config.mask.kind == "grating":
        metrics["talbot_length"] = talbot_length(config.mask.period, config.grid.wavelength)
    if hint is not None:
        metrics["visibility"] = visibility(profile, hint)
        try:
            metrics["imaged_period"] = imaged_period(profile, hint)
        except ValueError:
            pass
    if parts is not None:
        metrics["pattern_energy_ratio"] = pattern_energy_ratio(parts["interference"], parts["total"])
        if oracle is not None:
            region = config.grid.central_region()
            metrics["oracle_l2"] = normalized_distance(parts["interference"], oracle, region)
    return metrics


def run(config: ScenarioConfig) -> ScenarioResult:
    """Simulate ``config`` and fill its metrics.

    Unequal interferometer paths raise a :class:`TemporalCoherenceWarning`:
    the simulation is monochromatic, a real broadband source would lose the
    fringes once the path mismatch exceeds its coherence length.
    """
    if not config.equal_path:
        warnings.warn(f"{config.name}: unequal object and reference paths; fringes require a source "
                      "coherence length longer than the path mismatch", TemporalCoherenceWarning,
                      stacklevel=2)
    readout, cmap = _engine_parts(config)
    grid = config.grid
    parts = {
        "total": readout.total,
        "intensity_object": readout.intensity_object,
        "intensity_reference": readout.intensity_reference,
        "interference": readout.interference,
    }
    oracle = None
    extra = {}
    if config.reference_open:
        values, extra = _oracle(config)
        if values is not None:
            oracle = RealProfile(grid, 2 * np.real(values))
    metrics = compute_metrics(config, readout.total, parts, oracle)
    metrics.update(extra)
    result = ScenarioResult(config, readout.total, parts, metrics, cmap, oracle)
    if config.noise is not None:
        result = apply_shot_noise(result, config.noise.total_counts, config.noise.seed)
    return result


def apply_shot_noise(result: ScenarioResult, total_counts: int, seed: int) -> ScenarioResult:
    """Replace the profile by Poisson counts whose means sum to ``total_counts``."""
    if int(total_counts) != total_counts or total_counts <= 0:
        raise ValueError(f"total_counts must be a positive integer, got {total_counts!r}")
    values = result.profile.require_nonnegative().values
    s = float(values.sum())
    if s <= 0:
        raise ValueError("cannot draw counts from a profile that sums to zero")
    rng = np.random.default_rng(seed)
    counts = rng.poisson(values * (total_counts / s)).astype(float)
    profile = RealProfile(result.profile.grid, counts)
    metrics = compute_metrics(result.config, profile, None)
    metrics["oracle_l2"] = result.metrics.get("oracle_l2")
    for key in ("effective_length",):
        if key in result.metrics:
            metrics[key] = result.metrics[key]
    metrics["total_counts"] = int(total_counts)
    metrics["seed"] = int(seed)
    return replace(result, profile=profile, parts=None, metrics=metrics)
