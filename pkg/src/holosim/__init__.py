"""Deterministic 1-D paraxial simulator for one- and two-photon in-line holography."""

from .engines import (
    ClassicalGeometry,
    CoincidenceMap,
    DetectionRegime,
    QuantumGeometry,
    build_coincidence_map,
    closed_form_coherent,
    closed_form_incoherent,
    closed_form_pinhole,
    detect,
    detect_parts,
    equivalent_geometry,
    imaged_period,
    pattern_energy_ratio,
    record_hologram,
    visibility,
)
from .errors import (
    ConfigError,
    DivergentEffectiveLength,
    GridMismatchError,
    HolosimError,
    SamplingError,
    TemporalCoherenceWarning,
    UnsupportedGeometryError,
)
from .grid import ComplexField, RealProfile, SamplingGrid, energy, make_grid, relative_l2_distance
from .kernels import KernelMatrix, ObjectMask, apply, compose, fresnel_kernel, object_kernel, talbot_length
from .sources import SourceModel, classical_interference_term, two_photon_amplitude

__version__ = "0.1.0"
