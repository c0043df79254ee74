import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import tiny_scene_dict
from owc.errors import SceneConfigError
from owc.receivers import (
    ADRBranch,
    adr_effective_area,
    branch_normal,
    imr_effective_area,
    imr_pixel_map,
    receiver_from_dict,
    receiver_id,
    receiver_noise_sigma,
)

MM2 = 1e-6


def _towards_receiver(rx, source):
    """Direção de propagação de `source` até `rx`."""
    vec = np.asarray(rx, dtype=float) - np.asarray(source, dtype=float)
    return vec / np.linalg.norm(vec)


def test_branch_normal_uses_elevation_from_horizon():
    normal = branch_normal(45, 70)
    assert normal[2] == pytest.approx(math.sin(math.radians(70)))
    assert normal[0] == pytest.approx(normal[1])
    assert np.linalg.norm(normal) == pytest.approx(1.0)


def test_adr_zenith_ray_reaches_every_branch(reference_scene):
    adr = reference_scene.receiver("adr")
    areas = adr.collection_areas(np.array([[0.0, 0.0, -1.0]]))[0]
    assert areas == pytest.approx([20 * MM2 * math.cos(math.radians(20))] * 4)


def test_adr_branch_axis_is_seen_by_one_branch(reference_scene):
    adr = reference_scene.receiver("adr")
    direction = -branch_normal(45, 70)
    areas = adr.collection_areas(direction[None, :])[0]
    assert areas[0] == pytest.approx(20 * MM2)
    assert np.all(areas[1:] == 0.0)


def test_adr_fov_edge_is_accepted():
    branch = ADRBranch(azimuth_deg=0, elevation_deg=90, fov_deg=25, area=20 * MM2)
    edge = math.radians(25)
    direction = -np.array([math.sin(edge), 0.0, math.cos(edge)])
    assert adr_effective_area(branch, direction) == pytest.approx(20 * MM2 * math.cos(edge))
    outside = -np.array([math.sin(edge + 1e-6), 0.0, math.cos(edge + 1e-6)])
    assert adr_effective_area(branch, outside) is None


def test_adr_branch_choice_matches_geometry(reference_scene):
    # Usuário em (1,5; 6,5; 1) servido pelo AP em (3, 7, 3): só o ramo de 45° enxerga
    adr = reference_scene.receiver("adr")
    direction = _towards_receiver((1.5, 6.5, 1.0), (3.0, 7.0, 3.0))
    areas = adr.collection_areas(direction[None, :])[0]
    assert areas[0] > 0.0
    assert np.all(areas[1:] == 0.0)


def test_imr_zenith_ray_hits_centre_pixel(reference_scene):
    imr = reference_scene.receiver("imr")
    assert imr_pixel_map(imr, (0.0, 0.0, -1.0)) == 5
    assert imr_effective_area(imr, (0.0, 0.0, -1.0)) == pytest.approx(imr.optical_gain * 16 * MM2)


def test_imr_pixel_layout(reference_scene):
    imr = reference_scene.receiver("imr")
    # Raio invertido com tanθ·cosφ = −0,9 (linha −x) e componente y nula → pixel 2
    reversed_ray = np.array([-0.9, 0.0, 1.0])
    assert imr_pixel_map(imr, -reversed_ray / np.linalg.norm(reversed_ray)) == 2
    # AP em (1, 5, 3) visto de (0,5; 6,5; 1) → pixel 4
    assert imr_pixel_map(imr, _towards_receiver((0.5, 6.5, 1.0), (1.0, 5.0, 3.0))) == 4
    # AP em (1, 1, 3) visto de (0,5; 0,5; 1) → pixel 5
    assert imr_pixel_map(imr, _towards_receiver((0.5, 0.5, 1.0), (1.0, 1.0, 3.0))) == 5


def test_imr_lens_concentrator_gain(reference_scene, tiny_scene):
    imr = reference_scene.receiver("imr")
    assert imr.lens_index == 1.8
    assert imr.optical_gain == pytest.approx(1.8**2 / math.sin(math.radians(50)) ** 2)
    assert imr.optical_gain == pytest.approx(5.52, abs=0.01)

    bare = tiny_scene.receiver("imr")
    assert bare.lens_index is None
    assert bare.optical_gain == 1.0
    assert imr_effective_area(bare, (0.0, 0.0, -1.0)) == pytest.approx(16 * MM2)


def test_imr_lens_index_below_one_is_rejected():
    with pytest.raises(SceneConfigError, match="lens_index"):
        receiver_from_dict(
            {
                "kind": "imr",
                "fov_deg": 50,
                "area_mm2": 16,
                "lens_index": 0.5,
                "noise_density_pa_rthz": 10,
                "bandwidth_hz": 1e10,
            }
        )


def test_imr_rejects_outside_fov(reference_scene):
    imr = reference_scene.receiver("imr")
    theta = math.radians(60)
    direction = -np.array([math.sin(theta), 0.0, math.cos(theta)])
    assert imr_pixel_map(imr, direction) is None
    assert imr_effective_area(imr, direction) is None
    assert imr_pixel_map(imr, (0.0, 0.0, 1.0)) is None


@settings(max_examples=200, deadline=None)
@given(
    theta=st.floats(min_value=0.0, max_value=math.radians(89.0)),
    phi=st.floats(min_value=0.0, max_value=2 * math.pi),
)
def test_imr_accepted_direction_lands_in_one_pixel(reference_scene, theta, phi):
    imr = reference_scene.receiver("imr")
    direction = -np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])
    areas = imr.collection_areas(direction[None, :])[0]
    if theta <= math.radians(50.0) - 1e-9:
        assert np.count_nonzero(areas) == 1
        assert areas.sum() == pytest.approx(imr.optical_gain * 16 * MM2 * math.cos(theta))
    elif theta > math.radians(50.0) + 1e-9:
        assert np.count_nonzero(areas) == 0


def test_noise_sigma(reference_scene):
    assert receiver_noise_sigma(reference_scene.receiver("imr")) == pytest.approx(1e-6)
    assert receiver_noise_sigma(reference_scene.receiver("adr")) == pytest.approx(4.47e-12 * math.sqrt(5e9))


def test_receiver_id_is_stable(reference_scene, tiny_scene):
    imr = reference_scene.receiver("imr")
    with_lens = dict(tiny_scene_dict()["receivers"]["imr"], lens_index=1.8)
    assert receiver_id(imr) == receiver_id(receiver_from_dict(with_lens))
    assert receiver_id(imr) != receiver_id(tiny_scene.receiver("imr"))
    assert receiver_id(reference_scene.receiver("imr")).startswith("imr-")
    assert receiver_id(reference_scene.receiver("adr")) != receiver_id(reference_scene.receiver("imr"))
    assert receiver_id(reference_scene.receiver("adr")) != receiver_id(tiny_scene.receiver("pd"))


def test_unknown_receiver_kind():
    with pytest.raises(SceneConfigError, match="kind"):
        receiver_from_dict({"kind": "camera"})


def test_receiver_fov_must_be_below_90():
    with pytest.raises(SceneConfigError, match="fov_deg"):
        receiver_from_dict(
            {
                "kind": "imr",
                "fov_deg": 95,
                "area_mm2": 16,
                "noise_density_pa_rthz": 10,
                "bandwidth_hz": 1e10,
            }
        )


def test_unknown_receiver_name(reference_scene):
    with pytest.raises(SceneConfigError, match="pd"):
        reference_scene.receiver("pd")


def _reversed_rays(theta, phi):
    return np.stack(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=1
    )


def test_imr_source_tilted_towards_plus_x_lands_in_plus_x_row(reference_scene):
    imr = reference_scene.receiver("imr")
    theta = math.radians(40)
    # Fonte vista a 40° no sentido +x: última linha, coluna central
    direction = -np.array([math.sin(theta), 0.0, math.cos(theta)])
    assert imr_pixel_map(imr, direction) == 8
    direction = -np.array([0.0, -math.sin(theta), math.cos(theta)])
    assert imr_pixel_map(imr, direction) == 4


def test_imr_million_directions_partition_into_pixels(reference_scene):
    imr = reference_scene.receiver("imr")
    rng = np.random.default_rng(20)
    theta = rng.uniform(0.0, math.radians(89.0), 10**6)
    phi = rng.uniform(0.0, 2 * math.pi, 10**6)
    directions = -_reversed_rays(theta, phi)

    pixels = imr.pixel_indices(directions)
    inside = theta < math.radians(50.0) - 1e-9
    outside = theta > math.radians(50.0) + 1e-9
    assert np.all((pixels[inside] >= 1) & (pixels[inside] <= 9))
    assert np.all(pixels[outside] == 0)
    assert set(np.unique(pixels[inside])) == set(range(1, 10))

    areas = imr.collection_areas(directions[:100_000])
    hits = np.count_nonzero(areas, axis=1)
    assert np.all(hits[inside[:100_000]] == 1)
    assert np.all(hits[outside[:100_000]] == 0)


def test_imr_pixel_map_mirrors_with_the_room(reference_scene):
    imr = reference_scene.receiver("imr")
    rng = np.random.default_rng(3)
    theta = rng.uniform(0.0, math.radians(49.0), 50_000)
    phi = rng.uniform(0.0, 2 * math.pi, 50_000)
    rays = _reversed_rays(theta, phi)

    half_cell = math.tan(imr.fov) / imr.pixels_per_side
    focal = rays[:, :2] / rays[:, 2:3]
    clear = np.all(np.abs(np.abs(focal) - half_cell) > 1e-9, axis=1)
    rays = rays[clear]

    pixels = imr.pixel_indices(-rays)
    rows, cols = (pixels - 1) // 3, (pixels - 1) % 3

    mirrored_x = imr.pixel_indices(-rays * np.array([-1.0, 1.0, 1.0]))
    np.testing.assert_array_equal(mirrored_x, (2 - rows) * 3 + cols + 1)
    mirrored_y = imr.pixel_indices(-rays * np.array([1.0, -1.0, 1.0]))
    np.testing.assert_array_equal(mirrored_y, rows * 3 + (2 - cols) + 1)
