import copy
import json
from pathlib import Path

import pytest

from owc.scene import build_reference_scene, scene_from_dict


def _box(width, length, height, reflectance):
    w, l, h = width, length, height
    return [
        {"name": "floor", "corners": [[0, 0, 0], [w, 0, 0], [w, l, 0], [0, l, 0]], "reflectance": reflectance},
        {"name": "ceiling", "corners": [[0, 0, h], [w, 0, h], [w, l, h], [0, l, h]], "reflectance": reflectance},
        {"name": "wall_x0", "corners": [[0, 0, 0], [0, l, 0], [0, l, h], [0, 0, h]], "reflectance": reflectance},
        {"name": "wall_xw", "corners": [[w, 0, 0], [w, l, 0], [w, l, h], [w, 0, h]], "reflectance": reflectance},
        {"name": "wall_y0", "corners": [[0, 0, 0], [w, 0, 0], [w, 0, h], [0, 0, h]], "reflectance": reflectance},
        {"name": "wall_yl", "corners": [[0, l, 0], [w, l, 0], [w, l, h], [0, l, h]], "reflectance": reflectance},
    ]


def tiny_scene_dict(
    reflectance=0.8,
    positions=([0.5, 1.0, 2.0], [1.5, 1.0, 2.0]),
    first_order=0.5,
    second_order=1.0,
):
    """Sala 2×2×2 m com dois APs e os três tipos de receptor."""
    return {
        "room": {"width": 2.0, "length": 2.0, "height": 2.0},
        "surfaces": _box(2.0, 2.0, 2.0, reflectance),
        "element_size": {"first_order": first_order, "second_order": second_order},
        "wavelengths": {
            "red": {"ld_power_w": 0.8, "responsivity_a_per_w": 0.4},
            "yellow": {"ld_power_w": 0.5, "responsivity_a_per_w": 0.35},
            "green": {"ld_power_w": 0.3, "responsivity_a_per_w": 0.3},
            "blue": {"ld_power_w": 0.3, "responsivity_a_per_w": 0.2},
        },
        "access_points": {
            "semi_angle_deg": 60,
            "lds_per_unit": 12,
            "orientation": [0, 0, -1],
            "positions": [list(p) for p in positions],
        },
        "communication_floor": 0.5,
        "grid_spacing": 1.0,
        "receivers": {
            "pd": {
                "kind": "pd",
                "normal": [0, 0, 1],
                "fov_deg": 90,
                "area_mm2": 1,
                "noise_density_pa_rthz": 4.47,
                "bandwidth_hz": 5e9,
            },
            "adr": {
                "kind": "adr",
                "branches": [
                    {"azimuth_deg": az, "elevation_deg": 70, "fov_deg": 25, "area_mm2": 20}
                    for az in (45, 135, 225, 315)
                ],
                "noise_density_pa_rthz": 4.47,
                "bandwidth_hz": 5e9,
            },
            "imr": {
                "kind": "imr",
                "fov_deg": 50,
                "pixels_per_side": 3,
                "area_mm2": 16,
                "noise_density_pa_rthz": 10,
                "bandwidth_hz": 1e10,
            },
        },
    }


def write_json(path: Path, data) -> Path:
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


@pytest.fixture
def tiny_dict():
    return copy.deepcopy(tiny_scene_dict())


@pytest.fixture
def tiny_scene(tiny_dict):
    return scene_from_dict(tiny_dict)


@pytest.fixture
def tiny_scene_file(tmp_path, tiny_dict):
    return write_json(tmp_path / "tiny_scene.json", tiny_dict)


@pytest.fixture(scope="session")
def reference_scene():
    return build_reference_scene()
