"""Plot-ready files: CSV profiles, 16-bit PGM coincidence maps, JSON metadata."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .engines import CoincidenceMap
from .scenarios import ScenarioResult

PART_COLUMNS = ("total", "intensity_object", "intensity_reference", "interference")
PGM_MAX = 65535
PGM_MIDSCALE = 32768
MAP_COMPONENTS = ("total", "interference")


def _fmt(value: float) -> str:
    text = f"{value:.9f}"
    return "0.000000000" if text == "-0.000000000" else text


def profile_csv_text(result: ScenarioResult) -> str:
    grid = result.profile.grid
    if result.parts is not None:
        columns = [result.parts[name].values for name in PART_COLUMNS]
        header = ("x_mm",) + PART_COLUMNS
    else:
        columns = [result.profile.values]
        header = ("x_mm", "total")
    lines = [",".join(header)]
    x_mm = grid.x * 1e3
    for i in range(grid.n_points):
        lines.append(",".join([_fmt(x_mm[i])] + [_fmt(col[i]) for col in columns]))
    return "\n".join(lines) + "\n"


def emit_profile_csv(result: ScenarioResult, path) -> Path:
    """Write one row per grid point; part columns only when the result has parts."""
    path = Path(path)
    with open(path, "w", newline="\n", encoding="ascii") as fh:
        fh.write(profile_csv_text(result))
    return path


def encode_pgm(values: np.ndarray, signed: bool = False) -> tuple[bytes, dict]:
    """16-bit P5 image bytes and the affine map ``value = offset + scale * pixel``.

    ``signed`` centers zero at midscale using the larger magnitude of the
    two extremes, so the sign of every pixel survives encoding.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 2:
        raise ValueError("PGM encoding needs a 2-D map")
    lo, hi = float(v.min()), float(v.max())
    meta = {"min": lo, "max": hi, "maxval": PGM_MAX, "degenerate": False}
    if signed:
        span = max(abs(lo), abs(hi))
        lo, hi = -span, span
    if hi == lo:
        pixels = np.full(v.shape, PGM_MIDSCALE, dtype=">u2")
        meta.update(degenerate=True, warning="constant map; every pixel set to midscale",
                    offset=float(v.flat[0]), scale=0.0)
    else:
        scale = (hi - lo) / PGM_MAX
        pixels = np.rint((v - lo) / scale).clip(0, PGM_MAX).astype(">u2")
        meta.update(offset=lo, scale=scale)
    rows, cols = v.shape
    header = f"P5 {cols} {rows} {PGM_MAX}\n".encode("ascii")
    return header + pixels.tobytes(), meta


def emit_map_pgm(cmap: CoincidenceMap, path, component: str = "total") -> tuple[Path, Path]:
    """PGM of one map component (rows x1, columns x2) plus a JSON sidecar."""
    if component not in MAP_COMPONENTS:
        raise ValueError(f"component must be one of {MAP_COMPONENTS}, got {component!r}")
    path = Path(path)
    data, meta = encode_pgm(getattr(cmap, component), signed=component == "interference")
    meta.update(component=component, rows="x1", columns="x2",
                x1_first_m=float(cmap.grid1.x[0]), x2_first_m=float(cmap.grid2.x[0]),
                dx1_m=cmap.grid1.dx, dx2_m=cmap.grid2.dx)
    path.write_bytes(data)
    sidecar = path.with_suffix(path.suffix + ".json")
    write_json(sidecar, meta)
    return path, sidecar


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else ("inf" if value > 0 else "-inf" if value < 0 else "nan")
    if isinstance(value, (np.integer, int)) and not isinstance(value, bool):
        return int(value)
    return value


def write_json(path, payload) -> Path:
    path = Path(path)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    return path


def metrics_payload(result: ScenarioResult) -> dict:
    c = result.config
    payload = {
        "scenario": c.name,
        "mode": c.mode,
        "variant": c.variant,
        "boundary": c.resolved_boundary,
        "theta": c.geometry.theta,
        "eta": c.geometry.eta,
        "equal_path": c.equal_path,
        "n_points": c.grid.n_points,
        "metrics": result.metrics,
    }
    if c.regime is not None:
        payload["regime"] = {"kind": c.regime.kind, "x1_m": c.regime.x1}
    if c.noise is not None:
        payload["noise"] = {"total_counts": c.noise.total_counts, "seed": c.noise.seed}
    return payload
