"""INI scenario documents and flat ``key=value`` overrides.

Every length carries a unit suffix (``nm``, ``um``/``µm``, ``mm``, ``cm``,
``m``); values are stored in meters. Serialization writes meters with
``repr`` precision so a document reparses to an identical config.

Example::

    [scenario]
    name = fig4b
    mode = two_photon

    [grid]
    n_points = 2048
    window = 8mm
    wavelength = 800nm
    ...
"""

from __future__ import annotations

import configparser
import math
import re

from .engines import ClassicalGeometry, DetectionRegime, QuantumGeometry
from .errors import ConfigError
from .grid import SamplingGrid
from .kernels import ObjectMask
from .scenarios import NoiseSpec, ScenarioConfig
from .sources import SourceModel

REQUIRED_SECTIONS = ("grid", "geometry", "source", "object", "detection", "variant")

_UNIT_DIVISORS = {"nm": 1e9, "um": 1e6, "µm": 1e6, "mm": 1e3, "cm": 1e2, "m": 1.0}
_LENGTH = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(nm|um|µm|mm|cm|m)\s*$")

_CLASSICAL_FIELDS = ("z_o1", "z_o2", "z_r")
_QUANTUM_FIELDS = ("z_so1", "z_so2", "z_sr", "z_i")

# flat override aliases -> (section, option)
_ALIASES = {
    "theta": ("geometry", "theta"),
    "eta": ("geometry", "eta"),
    "regime.kind": ("detection", "regime"),
    "regime.x1": ("detection", "x1"),
    "variant": ("variant", "name"),
    "boundary": ("scenario", "boundary"),
    "name": ("scenario", "name"),
}
_ALWAYS_VALID = {
    "noise.total_counts": ("noise", "total_counts"),
    "noise.seed": ("noise", "seed"),
    "scenario.boundary": ("scenario", "boundary"),
    "detection.x1": ("detection", "x1"),
}


def parse_length(text: str, key: str) -> float:
    """Meters from a length with a unit suffix, e.g. ``"25cm"``."""
    m = _LENGTH.match(text)
    if not m:
        raise ConfigError(f"{key}: {text!r} is not a length with a unit suffix (nm, um, mm, cm, m)")
    return float(m.group(1)) / _UNIT_DIVISORS[m.group(2)]


def format_length(value: float) -> str:
    return f"{float(value)!r}m"


def _new_parser() -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    return parser


class _Section:
    """Typed reads from one INI section; every error names ``section.key``."""

    def __init__(self, parser, name):
        self.name = name
        self.items = dict(parser.items(name)) if parser.has_section(name) else {}
        self.used = set()

    def _raw(self, key, required):
        full = f"{self.name}.{key}"
        if key not in self.items:
            if required:
                raise ConfigError(f"{full}: missing required key")
            return None
        self.used.add(key)
        return self.items[key].strip()

    def length(self, key, required=True):
        raw = self._raw(key, required)
        return None if raw is None else parse_length(raw, f"{self.name}.{key}")

    def number(self, key, required=True, cast=float):
        raw = self._raw(key, required)
        if raw is None:
            return None
        try:
            value = cast(raw)
        except ValueError:
            raise ConfigError(f"{self.name}.{key}: {raw!r} is not a valid {cast.__name__}") from None
        if isinstance(value, float) and not math.isfinite(value):
            raise ConfigError(f"{self.name}.{key}: value must be finite")
        return value

    def text(self, key, required=True):
        return self._raw(key, required)

    def finish(self):
        extra = sorted(set(self.items) - self.used)
        if extra:
            raise ConfigError(f"[{self.name}]: unknown key(s) {', '.join(extra)}")


def _integer(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise ValueError(text)
    return int(value)


_integer.__name__ = "integer"


def _build(section: str, factory, *args, **kwargs):
    try:
        return factory(*args, **kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}]: {exc}") from exc


def _parse_grid(sec: _Section) -> SamplingGrid:
    n = sec.number("n_points", cast=_integer)
    window = sec.length("window")
    wavelength = sec.length("wavelength")
    sec.finish()
    return _build("grid", SamplingGrid, n, window, wavelength)


def _parse_geometry(sec: _Section, mode: str):
    fields = _CLASSICAL_FIELDS if mode == "one_photon" else _QUANTUM_FIELDS
    lengths = {f: sec.length(f) for f in fields}
    extra = {}
    theta = sec.number("theta", required=False)
    eta = sec.number("eta", required=False)
    if theta is not None:
        extra["theta"] = theta
    if eta is not None:
        extra["eta"] = eta
    sec.finish()
    cls = ClassicalGeometry if mode == "one_photon" else QuantumGeometry
    return _build("geometry", cls, **lengths, **extra)


def _parse_source(sec: _Section) -> SourceModel:
    kind = sec.text("kind")
    kwargs = {}
    amplitude = sec.text("amplitude", required=False)
    if amplitude is not None:
        try:
            kwargs["amplitude"] = complex(amplitude.replace(" ", ""))
        except ValueError:
            raise ConfigError(f"source.amplitude: {amplitude!r} is not a complex number") from None
    for key in ("position", "width", "emitting_width"):
        value = sec.length(key, required=False)
        if value is not None:
            kwargs[key] = value
    for key in ("intensity", "strength", "taper"):
        value = sec.number(key, required=False)
        if value is not None:
            kwargs[key] = value
    sec.finish()
    return _build("source", SourceModel, kind, **kwargs)


def _parse_lengths_list(text: str, key: str) -> list[float]:
    return [parse_length(item, key) for item in text.split(",") if item.strip()]


def _parse_object(sec: _Section) -> ObjectMask:
    kind = sec.text("kind")
    if kind == "grating":
        mask = _build("object", ObjectMask.grating, sec.length("period"), sec.length("slit_width"),
                      sec.length("offset", required=False) or 0.0)
    elif kind == "single_slit":
        mask = _build("object", ObjectMask.single_slit, sec.length("width"),
                      sec.length("center", required=False) or 0.0)
    elif kind == "phase_mask":
        xs = _parse_lengths_list(sec.text("x"), "object.x")
        try:
            values = [complex(v.strip().replace(" ", "")) for v in sec.text("values").split(",") if v.strip()]
        except ValueError:
            raise ConfigError("object.values: entries must be complex numbers") from None
        mask = _build("object", ObjectMask.phase_mask, xs, values)
    elif kind == "unity":
        mask = ObjectMask.unity()
    else:
        raise ConfigError(f"object.kind: unknown mask kind {kind!r}")
    sec.finish()
    return mask


def _parse_regime(sec: _Section, mode: str, grid: SamplingGrid):
    kind = sec.text("regime")
    x1 = sec.length("x1", required=False)
    sec.finish()
    if mode == "one_photon":
        if kind not in ("none", ""):
            raise ConfigError(f"detection.regime: one_photon scenarios use 'none', got {kind!r}")
        if x1 is not None:
            raise ConfigError("detection.x1: one_photon scenarios have no signal detector")
        return None
    x1 = 0.0 if x1 is None else x1
    if not -grid.window / 2 <= x1 <= grid.window / 2:
        raise ConfigError(f"detection.x1: {x1!r} m lies outside the window of half-width {grid.window / 2!r} m")
    return _build("detection", DetectionRegime, kind, x1)


def _parse_noise(sec: _Section):
    if not sec.items:
        return None
    counts = sec.number("total_counts", cast=_integer)
    seed = sec.number("seed", cast=_integer)
    sec.finish()
    return _build("noise", NoiseSpec, counts, seed)


def _from_parser(parser: configparser.ConfigParser, default_name: str) -> ScenarioConfig:
    missing = [name for name in REQUIRED_SECTIONS if not parser.has_section(name)]
    if missing:
        raise ConfigError(f"missing section(s): {', '.join('[' + m + ']' for m in missing)}")
    known = set(REQUIRED_SECTIONS) | {"scenario", "noise"}
    unknown = sorted(set(parser.sections()) - known)
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(unknown)}")
    scenario = _Section(parser, "scenario")
    name = scenario.text("name", required=False) or default_name
    boundary = scenario.text("boundary", required=False) or None
    variant_sec = _Section(parser, "variant")
    variant = variant_sec.text("name")
    variant_sec.finish()
    source = _parse_source(_Section(parser, "source"))
    mode = scenario.text("mode", required=False)
    if mode is None:
        mode = "two_photon" if source.kind == "entangled_pair" else "one_photon"
    scenario.finish()
    if mode not in ("one_photon", "two_photon"):
        raise ConfigError(f"scenario.mode: expected one_photon or two_photon, got {mode!r}")
    grid = _parse_grid(_Section(parser, "grid"))
    geometry = _parse_geometry(_Section(parser, "geometry"), mode)
    mask = _parse_object(_Section(parser, "object"))
    regime = _parse_regime(_Section(parser, "detection"), mode, grid)
    noise = _parse_noise(_Section(parser, "noise"))
    return _build("scenario", ScenarioConfig, name, mode, geometry, source, mask, variant,
                  grid=grid, regime=regime, noise=noise, boundary=boundary)


def _read(text: str) -> configparser.ConfigParser:
    parser = _new_parser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config document: {exc}") from exc
    return parser


def parse_config(text: str, default_name: str = "custom") -> ScenarioConfig:
    """Validated :class:`ScenarioConfig` from an INI document."""
    return _from_parser(_read(text), default_name)


def _to_parser(config: ScenarioConfig) -> configparser.ConfigParser:
    parser = _new_parser()
    scenario = {"name": config.name, "mode": config.mode}
    if config.boundary is not None:
        scenario["boundary"] = config.boundary
    parser["scenario"] = scenario
    g = config.grid
    parser["grid"] = {"n_points": str(g.n_points), "window": format_length(g.window),
                      "wavelength": format_length(g.wavelength)}
    fields = _CLASSICAL_FIELDS if config.mode == "one_photon" else _QUANTUM_FIELDS
    geometry = {f: format_length(getattr(config.geometry, f)) for f in fields}
    geometry["theta"] = repr(config.geometry.theta)
    geometry["eta"] = repr(config.geometry.eta)
    parser["geometry"] = geometry
    parser["source"] = _source_items(config.source)
    parser["object"] = _mask_items(config.mask)
    if config.regime is None:
        parser["detection"] = {"regime": "none"}
    else:
        parser["detection"] = {"regime": config.regime.kind, "x1": format_length(config.regime.x1)}
    parser["variant"] = {"name": config.variant}
    if config.noise is not None:
        parser["noise"] = {"total_counts": str(config.noise.total_counts), "seed": str(config.noise.seed)}
    return parser


def _source_items(source: SourceModel) -> dict:
    items = {"kind": source.kind}
    if source.kind in ("plane_coherent", "pinhole"):
        items["amplitude"] = repr(complex(source.amplitude))
    if source.kind == "pinhole":
        items["position"] = format_length(source.position)
        items["width"] = format_length(source.width)
    if source.kind == "incoherent_thermal":
        items["intensity"] = repr(source.intensity)
    if source.kind == "entangled_pair":
        items["strength"] = repr(source.strength)
    if source.kind in ("incoherent_thermal", "entangled_pair"):
        if source.emitting_width is not None:
            items["emitting_width"] = format_length(source.emitting_width)
        items["taper"] = repr(source.taper)
    return items


def _mask_items(mask: ObjectMask) -> dict:
    if mask.kind == "grating":
        return {"kind": "grating", "period": format_length(mask.period),
                "slit_width": format_length(mask.slit_width), "offset": format_length(mask.center)}
    if mask.kind == "single_slit":
        return {"kind": "single_slit", "width": format_length(mask.slit_width),
                "center": format_length(mask.center)}
    if mask.kind == "phase_mask":
        return {"kind": "phase_mask", "x": ", ".join(format_length(v) for v in mask.table_x),
                "values": ", ".join(repr(complex(v)) for v in mask.table_values)}
    return {"kind": "unity"}


def serialize_config(config: ScenarioConfig) -> str:
    """INI document that :func:`parse_config` maps back to ``config``."""
    lines = []
    for section, items in _to_parser(config).items():
        if section == configparser.DEFAULTSECT:
            continue
        lines.append(f"[{section}]")
        lines.extend(f"{key} = {value}" for key, value in items.items())
        lines.append("")
    return "\n".join(lines)


def override_keys(config: ScenarioConfig) -> list[str]:
    """Every key accepted by :func:`apply_overrides` for ``config``."""
    parser = _to_parser(config)
    keys = {f"{s}.{o}" for s in parser.sections() for o in parser[s]}
    keys |= set(_ALIASES) | set(_ALWAYS_VALID)
    if config.mode == "one_photon":
        keys -= {"regime.x1", "detection.x1"}
    return sorted(keys)


def _resolve_key(key: str, valid: list[str]) -> tuple[str, str]:
    if key not in valid:
        raise ConfigError(f"unknown override key {key!r}; valid keys: {', '.join(valid)}")
    if key in _ALIASES:
        return _ALIASES[key]
    if key in _ALWAYS_VALID:
        return _ALWAYS_VALID[key]
    section, option = key.split(".", 1)
    return section, option


def apply_overrides(config: ScenarioConfig, overrides: dict[str, str] | list[str]) -> ScenarioConfig:
    """Config with flat ``section.key=value`` (or alias) overrides applied.

    Values use the document syntax, so lengths need unit suffixes.
    """
    if isinstance(overrides, dict):
        pairs = list(overrides.items())
    else:
        pairs = []
        for item in overrides:
            if "=" not in item:
                raise ConfigError(f"override {item!r} is not of the form key=value")
            key, value = item.split("=", 1)
            pairs.append((key.strip(), value.strip()))
    if not pairs:
        return config
    parser = _to_parser(config)
    valid = override_keys(config)
    for key, value in pairs:
        section, option = _resolve_key(key, valid)
        if not parser.has_section(section):
            parser.add_section(section)
        parser[section][option] = value
    return _from_parser(parser, config.name)
