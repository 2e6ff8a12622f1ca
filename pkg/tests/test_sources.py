import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holosim.engines import ClassicalGeometry, closed_form_pinhole, imaged_period, visibility
from holosim.errors import GridMismatchError
from holosim.grid import RealProfile, make_grid, normalized_distance
from holosim.kernels import ObjectMask, fresnel_kernel, object_kernel, scaled
from holosim.sources import (
    SourceModel,
    classical_interference_term,
    mutual_intensity,
    raised_cosine_aperture,
    two_photon_amplitude,
)

from conftest import rel_l2


def _central_block(grid, values):
    r = grid.central_region()
    return values[r, r]


def test_plane_coherent_identical_arms_give_constant_modulus(grid):
    alpha = 0.7 - 0.2j
    h = fresnel_kernel(grid, 0.4, "periodic")
    term = classical_interference_term(SourceModel.plane_coherent(alpha), h, h)
    region = grid.central_region()
    np.testing.assert_allclose(np.abs(term.values[region]), abs(alpha) ** 2, rtol=1e-10)


def test_incoherent_equal_path_term_washes_out(grid, grating):
    h_o = object_kernel(grid, grating, 0.4, 0.4)
    h_r = fresnel_kernel(grid, 0.8)
    term = classical_interference_term(SourceModel.incoherent_thermal(), h_o, h_r)
    pattern = RealProfile(grid, np.abs(term.values))
    assert visibility(pattern, 400e-6) < 0.05


def test_pinhole_term_is_magnified_grating_image(grid, grating):
    geometry = ClassicalGeometry(0.4, 0.4, 0.8)
    h_o = object_kernel(grid, grating, 0.4, 0.4)
    h_r = fresnel_kernel(grid, 0.8)
    term = classical_interference_term(SourceModel.pinhole(), h_o, h_r)
    oracle = closed_form_pinhole(geometry, grating, grid)
    assert normalized_distance(term.values, oracle.values, grid.central_region()) < 1e-2
    assert abs(imaged_period(RealProfile(grid, term.values.real), 800e-6) - 800e-6) <= 2 * grid.dx


def test_entangled_source_has_no_first_order_term(grid):
    h = fresnel_kernel(grid, 0.2)
    with pytest.raises(ValueError):
        classical_interference_term(SourceModel.entangled_pair(), h, h)


def test_pinhole_narrower_than_sample_rejected(grid):
    h = fresnel_kernel(grid, 0.2)
    with pytest.raises(ValueError):
        mutual_intensity(SourceModel.pinhole(0.0, grid.dx / 2), h, h)


def test_source_validation(grid):
    with pytest.raises(ValueError):
        SourceModel("laser")
    with pytest.raises(ValueError):
        SourceModel.incoherent_thermal(intensity=0.0)
    with pytest.raises(ValueError):
        SourceModel.entangled_pair(strength=-1.0)
    with pytest.raises(ValueError):
        SourceModel.incoherent_thermal(emitting_width=2 * grid.window).emission_weights(grid)


def test_default_emission_aperture(grid):
    w = SourceModel.incoherent_thermal().emission_weights(grid)
    x = np.abs(grid.x)
    assert np.all(w[x <= 0.4 * grid.window - 0.05 * grid.window] == 1.0)
    assert np.all(w[x >= 0.45 * grid.window] == 0.0)
    np.testing.assert_allclose(raised_cosine_aperture(np.array([0.0, 1.0, 0.75]), 2.0, 0.5), [1, 0, 0.5])


def test_kernels_must_share_grids(grid):
    other = make_grid(1024)
    with pytest.raises(GridMismatchError):
        classical_interference_term(SourceModel.pinhole(), fresnel_kernel(grid, 0.2), fresnel_kernel(other, 0.2))
    with pytest.raises(GridMismatchError):
        two_photon_amplitude(fresnel_kernel(grid, 0.2), fresnel_kernel(other, 0.2))


def test_identical_free_arms_reproduce_doubled_distance(grid):
    h = fresnel_kernel(grid, 0.2)
    amp = two_photon_amplitude(h, h, SourceModel.entangled_pair())
    assert amp.arm_label == "reference"
    full = fresnel_kernel(grid, 0.4).entries
    assert rel_l2(_central_block(grid, amp.values), _central_block(grid, full)) < 1e-2


# object-arm and reference-arm distances of every two-photon builtin layout
TWO_PHOTON_LAYOUTS = [(0.40, 0.15, 0.55 + dz, 0.25) for dz in (0.0, 0.05, 0.10, 0.20)]


@pytest.mark.parametrize("z_so1, z_so2, z_sr, z_i", TWO_PHOTON_LAYOUTS)
def test_equivalent_diagram_amplitudes(grid, grating, z_so1, z_so2, z_sr, z_i):
    source = SourceModel.entangled_pair()
    h_i = fresnel_kernel(grid, z_i)
    obj = two_photon_amplitude(object_kernel(grid, grating, z_so2, z_so1), h_i, source)
    ref = two_photon_amplitude(fresnel_kernel(grid, z_sr), h_i, source)
    assert obj.arm_label == "object" and ref.arm_label == "reference"
    # D1 as the source: z_so1 to the object, then z_so2 + z_i to D2 (rows x2, columns x1)
    classical_obj = object_kernel(grid, grating, z_so1, z_so2 + z_i).entries.T
    classical_ref = fresnel_kernel(grid, z_i + z_sr).entries.T
    assert rel_l2(_central_block(grid, obj.values), _central_block(grid, classical_obj)) < 1e-2
    assert rel_l2(_central_block(grid, ref.values), _central_block(grid, classical_ref)) < 1e-2


def test_two_photon_amplitude_exchange_symmetry(grid, grating):
    source = SourceModel.entangled_pair()
    h_a = object_kernel(grid, grating, 0.15, 0.40)
    h_b = fresnel_kernel(grid, 0.25)
    ab = two_photon_amplitude(h_a, h_b, source).values
    ba = two_photon_amplitude(h_b, h_a, source).values
    assert np.array_equal(ab, ba.T)


@given(a=st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False, allow_infinity=False),
       b=st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False, allow_infinity=False))
@settings(max_examples=10, deadline=None)
def test_two_photon_amplitude_is_linear_in_each_kernel(a, b):
    grid = make_grid(256, 1e-3, 800e-9)
    h1, h2, h3 = fresnel_kernel(grid, 0.2), fresnel_kernel(grid, 0.25), fresnel_kernel(grid, 0.4)
    combo = scaled(h1, a)
    combo = type(h1)(grid, grid, combo.entries + b * h2.entries, h1.z, h1.boundary)
    lhs = two_photon_amplitude(combo, h3).values
    rhs = a * two_photon_amplitude(h1, h3).values + b * two_photon_amplitude(h2, h3).values
    assert np.linalg.norm(lhs - rhs) <= 1e-12 * (abs(a) + abs(b)) * np.linalg.norm(two_photon_amplitude(h1, h3).values) * 10
    lhs2 = two_photon_amplitude(h3, combo).values
    rhs2 = a * two_photon_amplitude(h3, h1).values + b * two_photon_amplitude(h3, h2).values
    assert np.linalg.norm(lhs2 - rhs2) <= 1e-12 * (abs(a) + abs(b)) * np.linalg.norm(rhs2 / (abs(a) + abs(b))) * 10


def test_one_sample_emitter_converges_to_pinhole(grid, grating):
    h_o = object_kernel(grid, grating, 0.4, 0.4)
    h_r = fresnel_kernel(grid, 0.9)
    narrow = SourceModel.incoherent_thermal(emitting_width=grid.dx, taper=0.0)
    assert np.count_nonzero(narrow.emission_weights(grid)) == 1
    a = classical_interference_term(narrow, h_o, h_r).values
    b = classical_interference_term(SourceModel.pinhole(0.0, grid.dx), h_o, h_r).values
    assert normalized_distance(a, b, grid.central_region()) < 2e-2


def test_entangled_amplitude_needs_pair_source(grid):
    h = fresnel_kernel(grid, 0.2)
    with pytest.raises(ValueError):
        two_photon_amplitude(h, h, SourceModel.pinhole())
