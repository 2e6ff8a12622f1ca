import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holosim.engines import (
    ClassicalGeometry,
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
from holosim.errors import DivergentEffectiveLength, UnsupportedGeometryError
from holosim.grid import RealProfile, make_grid, normalized_distance
from holosim.kernels import ObjectMask
from holosim.sources import SourceModel

ONE_PHOTON = ClassicalGeometry(0.40, 0.40, 0.80)
QUANTUM = QuantumGeometry(0.40, 0.15, 0.55, 0.25)
SLIT = ObjectMask.single_slit(200e-6)


def _inter(values, grid):
    return RealProfile(grid, 2 * np.real(values))


@pytest.fixture(scope="module")
def cmap(grid, grating):
    return build_coincidence_map(QUANTUM, grating, grid)


@pytest.fixture(scope="module")
def cmap_pi(grid, grating):
    return build_coincidence_map(QUANTUM, grating, grid, theta=math.pi)


# geometry algebra


def test_theta_stored_mod_two_pi():
    assert ClassicalGeometry(0.4, 0.4, 0.8, theta=2 * math.pi + 0.5).theta == pytest.approx(0.5)
    assert QuantumGeometry(0.4, 0.15, 0.55, 0.25, theta=-math.pi / 2).theta == pytest.approx(1.5 * math.pi)


@pytest.mark.parametrize("bad", [dict(z_o1=0.0), dict(z_o2=-0.1), dict(z_r=0.0), dict(eta=1.5), dict(eta=-0.1)])
def test_classical_geometry_validation(bad):
    kwargs = dict(z_o1=0.4, z_o2=0.4, z_r=0.8) | bad
    with pytest.raises(ValueError):
        ClassicalGeometry(**kwargs)


def test_equal_path_flags():
    assert ONE_PHOTON.equal_path and QUANTUM.equal_path
    assert not ClassicalGeometry(0.4, 0.4, 0.9).equal_path
    assert not QuantumGeometry(0.4, 0.15, 0.65, 0.25).equal_path


def test_incoherent_length_arithmetic():
    assert ClassicalGeometry(0.40, 0.40, 0.90).incoherent_length == 2.0


def test_incoherent_length_guards():
    with pytest.raises(DivergentEffectiveLength, match="Z'"):
        ONE_PHOTON.incoherent_length
    with pytest.raises(UnsupportedGeometryError):
        ClassicalGeometry(0.40, 0.40, 0.30).incoherent_length


def test_point_regime_equivalent_geometry_is_exact():
    eq = equivalent_geometry(QUANTUM, "point")
    assert eq.classical.z_o1 == 0.40
    assert eq.classical.z_o2 == 0.40
    assert eq.classical.z_r == 0.80
    assert eq.effective_length == 0.2
    assert eq.magnification == 2.0
    assert eq.source_kind == "pinhole"


def test_bucket_regime_equivalent_geometry():
    with pytest.raises(DivergentEffectiveLength):
        equivalent_geometry(QUANTUM, "bucket")
    eq = equivalent_geometry(QuantumGeometry(0.40, 0.15, 0.65, 0.25), DetectionRegime("bucket"))
    # (z_i + z_so2)(z_i + z_sr - z_so1)/(z_sr - z_so) = 0.4 * 0.5 / 0.1
    assert eq.effective_length == 2.0
    assert eq.source_kind == "incoherent_thermal"


def test_coherent_regime_equivalent_geometry():
    eq = equivalent_geometry(QUANTUM, "coherent")
    assert eq.effective_length == 0.40 and eq.source_kind == "plane_coherent"


def test_detection_regime_validation(grid, cmap):
    with pytest.raises(ValueError):
        DetectionRegime("pixel")
    with pytest.raises(ValueError):
        detect(cmap, DetectionRegime("point", x1=grid.window))


# closed-form oracles against the engines


def test_coherent_engine_matches_closed_form(grid, grating):
    holo = record_hologram(ONE_PHOTON, grating, grid, SourceModel.plane_coherent())
    oracle = closed_form_coherent(ONE_PHOTON, grating, grid)
    assert normalized_distance(holo.interference, _inter(oracle.values, grid), grid.central_region()) < 1e-2


def test_coherent_unity_mask_has_constant_modulus(grid):
    oracle = closed_form_coherent(ONE_PHOTON, ObjectMask.unity(), grid)
    np.testing.assert_allclose(np.abs(oracle.values), 1.0, rtol=1e-10)


def test_coherent_half_talbot_image_has_unit_magnification(grid, grating):
    geometry = ClassicalGeometry(0.4, 0.2, 0.6)
    oracle = closed_form_coherent(geometry, grating, grid)
    assert abs(imaged_period(_inter(oracle.values, grid), 400e-6) - 400e-6) <= 2 * grid.dx


def test_coherent_window_aperture_rejects_unknown(grid, grating):
    with pytest.raises(ValueError):
        closed_form_coherent(ONE_PHOTON, grating, grid, aperture="infinite")


def test_pinhole_engine_matches_closed_form(grid, grating):
    holo = record_hologram(ONE_PHOTON, grating, grid, SourceModel.pinhole())
    oracle = closed_form_pinhole(ONE_PHOTON, grating, grid)
    assert normalized_distance(holo.interference, _inter(oracle.values, grid), grid.central_region()) < 1e-2


def test_pinhole_image_period_is_800um(grid, grating):
    oracle = closed_form_pinhole(ONE_PHOTON, grating, grid)
    assert abs(imaged_period(_inter(oracle.values, grid), 800e-6) - 800e-6) <= 2 * grid.dx


def _far_pinhole_distance(grid, mask, ratio, z_o2=0.2):
    geometry = ClassicalGeometry(ratio * z_o2, z_o2, (ratio + 1) * z_o2)
    p = closed_form_pinhole(geometry, mask, grid).values
    c = closed_form_coherent(geometry, mask, grid, aperture="window").values
    return normalized_distance(_inter(p, grid), _inter(c, grid), grid.central_region())


def test_far_pinhole_reduces_to_plane_wave(grid, grating):
    assert _far_pinhole_distance(grid, grating, 100) < 5e-2


def test_far_pinhole_converges_to_plane_wave(grid, grating):
    errors = [_far_pinhole_distance(grid, grating, r) for r in (10, 100, 1000)]
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 5e-2


def test_incoherent_engine_matches_closed_form(grid):
    geometry = ClassicalGeometry(0.40, 0.40, 0.90)
    holo = record_hologram(geometry, SLIT, grid, SourceModel.incoherent_thermal())
    oracle = closed_form_incoherent(geometry, SLIT, grid)
    assert normalized_distance(holo.interference, _inter(oracle.values, grid), grid.central_region()) < 2e-2


def test_incoherent_closed_form_rejects_equal_path(grid, grating):
    with pytest.raises(DivergentEffectiveLength):
        closed_form_incoherent(ONE_PHOTON, grating, grid)


# one-photon recording


def test_hologram_decomposition_and_blocked_reference(grid, grating):
    holo = record_hologram(ONE_PHOTON, grating, grid, SourceModel.pinhole())
    resid = holo.total.values - (holo.intensity_object.values + holo.intensity_reference.values
                                 + holo.interference.values)
    assert np.max(np.abs(resid)) <= 1e-12
    assert np.max(holo.intensity_object.values + holo.intensity_reference.values) == pytest.approx(1.0)
    blocked = record_hologram(ONE_PHOTON, grating, grid, SourceModel.pinhole(), reference=False)
    assert not np.any(blocked.interference.values)
    assert not np.any(blocked.intensity_reference.values)


def test_hologram_rejects_pair_source(grid, grating):
    with pytest.raises(ValueError):
        record_hologram(ONE_PHOTON, grating, grid, SourceModel.entangled_pair())


# coincidence maps


def test_map_decomposition_identity(cmap):
    resid = cmap.total - (cmap.intensity_object + cmap.intensity_reference + cmap.interference)
    assert np.max(np.abs(resid)) <= 1e-12
    assert np.min(cmap.total) >= 0
    assert np.min(cmap.interference) < 0
    assert np.max(cmap.intensity_object + cmap.intensity_reference) == pytest.approx(1.0)


def test_eta_zero_removes_object_wave(grid, grating):
    m = build_coincidence_map(QUANTUM, grating, grid, eta=0.0)
    assert not np.any(m.interference)
    assert not np.any(m.intensity_object)
    np.testing.assert_array_equal(m.total, m.intensity_reference)


def test_half_turn_of_theta_flips_interference(cmap, cmap_pi):
    np.testing.assert_allclose(cmap_pi.interference, -cmap.interference, rtol=0,
                               atol=1e-12 * np.max(np.abs(cmap.interference)))
    np.testing.assert_allclose(cmap_pi.intensity_object, cmap.intensity_object, rtol=1e-12)
    np.testing.assert_allclose(cmap_pi.intensity_reference, cmap.intensity_reference, rtol=1e-12)


def test_point_interference_is_magnified_grating(grid, cmap):
    inter = detect_parts(cmap, DetectionRegime("point")).interference
    assert abs(imaged_period(inter, 800e-6) - 800e-6) <= 2 * grid.dx


def test_point_detection_is_row_slice(grid, cmap):
    x1 = 0.3e-3
    row = cmap.total[grid.index_of(x1)]
    np.testing.assert_array_equal(detect(cmap, DetectionRegime("point", x1)).values, row)


def test_bucket_detection_sums_rows(grid, cmap):
    np.testing.assert_allclose(detect(cmap, DetectionRegime("bucket")).values, cmap.total.sum(axis=0) * grid.dx,
                               rtol=1e-12)


def test_coherent_detection_needs_amplitudes(cmap):
    with pytest.raises(ValueError):
        detect(cmap.without_amplitudes(), DetectionRegime("coherent"))


def test_phase_complementarity(cmap, cmap_pi):
    regime = DetectionRegime("point")
    a, b = detect_parts(cmap, regime), detect_parts(cmap_pi, regime)
    twice = 2 * (a.intensity_object.values + a.intensity_reference.values)
    diff = np.abs(a.total.values + b.total.values - twice)
    assert np.max(diff) <= 1e-10 * np.max(np.abs(twice))


def test_point_regime_matches_classical_pinhole(grid, grating, cmap):
    quantum = detect_parts(cmap, DetectionRegime("point")).interference
    classical = equivalent_geometry(QUANTUM, "point").classical
    holo = record_hologram(classical, grating, grid, SourceModel.pinhole())
    assert normalized_distance(quantum, holo.interference, grid.central_region()) < 2e-2


def test_bucket_washout_versus_point_contrast(grid, cmap):
    bucket = detect_parts(cmap, DetectionRegime("bucket"))
    point = detect_parts(cmap, DetectionRegime("point"))
    assert pattern_energy_ratio(bucket.interference, bucket.total) < 0.05
    assert pattern_energy_ratio(point.interference, point.total) > 0.3
    assert visibility(bucket.total, 400e-6) < 0.05


def test_bucket_revival_off_equal_path(grid):
    geometry = QuantumGeometry(0.40, 0.15, 0.65, 0.25)
    m = build_coincidence_map(geometry, SLIT, grid)
    bucket = detect_parts(m, DetectionRegime("bucket")).interference
    oracle = closed_form_incoherent(equivalent_geometry(geometry, "bucket").classical, SLIT, grid)
    assert normalized_distance(bucket, _inter(oracle.values, grid), grid.central_region()) < 5e-2


def test_coherent_regime_matches_plane_wave_oracle(grid, grating):
    m = build_coincidence_map(QUANTUM, grating, grid, boundary="periodic")
    detected = detect_parts(m, DetectionRegime("coherent")).interference
    oracle = closed_form_coherent(equivalent_geometry(QUANTUM, "coherent").classical, grating, grid)
    assert normalized_distance(detected, _inter(oracle.values, grid), grid.central_region()) < 2e-2


def test_eta_scaling(grid, grating):
    a = build_coincidence_map(QUANTUM, grating, grid, eta=0.25)
    b = build_coincidence_map(QUANTUM, grating, grid, eta=0.5)
    inter_a, inter_b = a.interference * a.norm, b.interference * b.norm
    obj_a, obj_b = a.intensity_object * a.norm, b.intensity_object * b.norm
    assert np.max(np.abs(inter_b - 2 * inter_a)) <= 1e-12 * np.max(np.abs(inter_b))
    assert np.max(np.abs(obj_b - 4 * obj_a)) <= 1e-12 * np.max(np.abs(obj_b))


def test_eta_out_of_range_rejected(grid, grating):
    with pytest.raises(ValueError):
        build_coincidence_map(QUANTUM, grating, grid, eta=1.2)


# metrics


def test_visibility_of_constant_profile_is_zero(grid):
    assert visibility(RealProfile(grid, np.full(grid.n_points, 3.0)), 400e-6) == 0.0


def test_visibility_of_full_contrast_fringe_is_one(grid):
    p = RealProfile(grid, 1 + np.cos(2 * np.pi * grid.x / 400e-6))
    assert visibility(p, 400e-6) == pytest.approx(1.0, abs=1e-6)


def test_visibility_of_dark_profile_is_zero(grid):
    assert visibility(RealProfile(grid, np.zeros(grid.n_points)), 400e-6) == 0.0


def test_visibility_rejects_unresolved_hint(grid):
    with pytest.raises(ValueError):
        visibility(RealProfile(grid, np.ones(grid.n_points)), grid.dx)


@given(c=st.floats(0.0, 1.0), p=st.sampled_from([200e-6, 400e-6, 800e-6]))
@settings(max_examples=30, deadline=None)
def test_visibility_recovers_fringe_contrast(c, p):
    grid = make_grid()
    prof = RealProfile(grid, 1 + c * np.cos(2 * np.pi * grid.x / p))
    assert visibility(prof, p) == pytest.approx(c, abs=1e-6)


def test_energy_ratio_ignores_uniform_cross_term(grid):
    total = RealProfile(grid, np.full(grid.n_points, 2.0))
    assert pattern_energy_ratio(RealProfile(grid, np.full(grid.n_points, 0.5)), total) == 0.0
    fringe = RealProfile(grid, np.cos(2 * np.pi * grid.x / 400e-6))
    assert pattern_energy_ratio(fringe, total) == pytest.approx(1 / np.pi, rel=1e-2)


# at least five periods inside the central region
@given(p=st.floats(150e-6, 900e-6))
@settings(max_examples=30, deadline=None)
def test_imaged_period_recovers_sinusoid(p):
    grid = make_grid()
    prof = RealProfile(grid, 1 + np.cos(2 * np.pi * grid.x / p))
    assert abs(imaged_period(prof, p) - p) <= 2 * grid.dx
    assert abs(imaged_period(prof) - p) <= 2 * grid.dx


def test_imaged_period_needs_structure(grid):
    with pytest.raises(ValueError):
        imaged_period(RealProfile(grid, np.full(grid.n_points, 2.0)))
