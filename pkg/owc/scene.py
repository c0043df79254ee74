"""Cena da sala: superfícies, elementos refletores, pontos de acesso e comprimentos de onda.

Referencial: x ∈ [0, largura], y ∈ [0, comprimento], z ∈ [0, altura], z para cima.
A cena é imutável depois de construída e pode ser compartilhada entre threads.
"""

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np

from owc.errors import ChannelIOError, SceneConfigError
from owc.receivers import ReceiverSpec, receiver_from_dict

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
REFERENCE_SCENE_FILE = DATA_DIR / "reference_scene.json"

Vec3 = tuple[float, float, float]

_GEOMETRY_TOL = 1e-9


# ──────────────────────── Comprimentos de onda ────────────────────────


class Wavelength(str, Enum):
    """Cores RYGB, na ordem usada para desempate."""

    RED = "red"
    YELLOW = "yellow"
    GREEN = "green"
    BLUE = "blue"

    @property
    def index(self) -> int:
        return list(Wavelength).index(self)


@dataclass(frozen=True)
class WavelengthParams:
    """Potência de um módulo LD (W) e responsividade do receptor (A/W)."""

    wavelength: Wavelength
    ld_power: float
    responsivity: float


# ──────────────────────── Geometria ────────────────────────


@dataclass(frozen=True)
class Room:
    width: float
    length: float
    height: float

    @property
    def centre(self) -> np.ndarray:
        return np.array([self.width / 2, self.length / 2, self.height / 2])

    def contains(self, point) -> bool:
        x, y, z = point
        return (
            -_GEOMETRY_TOL <= x <= self.width + _GEOMETRY_TOL
            and -_GEOMETRY_TOL <= y <= self.length + _GEOMETRY_TOL
            and -_GEOMETRY_TOL <= z <= self.height + _GEOMETRY_TOL
        )


@dataclass(frozen=True)
class Surface:
    """Retângulo refletor: cantos em ordem (c0, c1, c2, c3), normal para dentro da sala."""

    name: str
    corners: tuple[Vec3, Vec3, Vec3, Vec3]
    normal: Vec3
    reflectance: float
    order: int

    @property
    def origin(self) -> np.ndarray:
        return np.asarray(self.corners[0], dtype=float)

    @property
    def u(self) -> np.ndarray:
        return np.asarray(self.corners[1], dtype=float) - self.origin

    @property
    def v(self) -> np.ndarray:
        return np.asarray(self.corners[3], dtype=float) - self.origin

    @property
    def area(self) -> float:
        return float(np.linalg.norm(self.u) * np.linalg.norm(self.v))


@dataclass(frozen=True)
class ReflectingElement:
    centre: Vec3
    normal: Vec3
    area: float
    surface_id: int
    reflectance: float


@dataclass(frozen=True)
class ElementGrid:
    """Elementos refletores em forma de arrays paralelos (um por elemento)."""

    centres: np.ndarray
    normals: np.ndarray
    areas: np.ndarray
    reflectance: np.ndarray
    order: np.ndarray
    surface_index: np.ndarray

    def __len__(self) -> int:
        return len(self.areas)

    def element(self, i: int) -> ReflectingElement:
        return ReflectingElement(
            centre=tuple(float(c) for c in self.centres[i]),
            normal=tuple(float(c) for c in self.normals[i]),
            area=float(self.areas[i]),
            surface_id=int(self.surface_index[i]),
            reflectance=float(self.reflectance[i]),
        )


def lambertian_order(semi_angle: float) -> float:
    """Ordem Lambertiana a partir do semi-ângulo de meia potência (rad)."""
    n = -math.log(2.0) / math.log(math.cos(semi_angle))
    # cos(60°) não é exato em ponto flutuante
    if abs(n - round(n)) < 1e-9:
        return float(round(n))
    return n


@dataclass(frozen=True)
class AccessPoint:
    """Luminária no teto: fonte pontual Lambertiana com N_LD módulos RYGB."""

    id: int
    position: Vec3
    orientation: Vec3
    order: float
    lds_per_unit: int

    def power(self, params: WavelengthParams) -> float:
        """Potência total do AP num comprimento de onda: N_LD × P_LD(λ)."""
        return self.lds_per_unit * params.ld_power


@dataclass(frozen=True)
class SceneConfig:
    room: Room
    surfaces: tuple[Surface, ...]
    first_order_element: float
    second_order_element: float
    access_points: tuple[AccessPoint, ...]
    wavelengths: tuple[WavelengthParams, ...]
    cf_height: float
    grid_spacing: float
    semi_angle_deg: float
    users: tuple[Vec3, ...] = ()
    receivers: dict[str, ReceiverSpec] = field(default_factory=dict)

    def wavelength(self, wavelength: Wavelength) -> WavelengthParams:
        for params in self.wavelengths:
            if params.wavelength == wavelength:
                return params
        raise KeyError(wavelength)

    def access_point(self, ap_id: int) -> AccessPoint:
        for ap in self.access_points:
            if ap.id == ap_id:
                return ap
        raise KeyError(ap_id)

    def receiver(self, name: str) -> ReceiverSpec:
        if name not in self.receivers:
            raise SceneConfigError(
                f"receptor {name!r} não definido na cena (disponíveis: {sorted(self.receivers)})"
            )
        return self.receivers[name]

    def user_locations(self) -> list[Vec3]:
        """Localizações declaradas na cena, ou a grade de teste quando não há nenhuma."""
        return list(self.users) if self.users else location_grid(self)


# ──────────────────────── Operações ────────────────────────


def build_reference_scene() -> SceneConfig:
    """Cena da tabela de parâmetros, lida do arquivo empacotado."""
    return load_scene(REFERENCE_SCENE_FILE)


def _edges(length: float, size: float) -> np.ndarray:
    """Bordas ancoradas no canto; a última faixa é cortada para caber."""
    count = math.ceil(length / size - 1e-9)
    return np.minimum(np.arange(count + 1) * size, length)


def discretize_surfaces(scene: SceneConfig, element_size: float) -> ElementGrid:
    """Divide as superfícies da sala em elementos de lado `element_size` (m)."""
    if not element_size > 0:
        raise SceneConfigError(f"element_size deve ser positivo ({element_size})")

    centres, normals, areas, rho, order, owner = [], [], [], [], [], []
    for index, surface in enumerate(scene.surfaces):
        len_u = float(np.linalg.norm(surface.u))
        len_v = float(np.linalg.norm(surface.v))
        eu = _edges(len_u, element_size)
        ev = _edges(len_v, element_size)
        mid_u = (eu[:-1] + eu[1:]) / 2 / len_u
        mid_v = (ev[:-1] + ev[1:]) / 2 / len_v
        su, sv = np.meshgrid(mid_u, mid_v, indexing="ij")
        pts = (
            surface.origin
            + su.reshape(-1, 1) * surface.u
            + sv.reshape(-1, 1) * surface.v
        )
        cell_areas = np.outer(np.diff(eu), np.diff(ev)).reshape(-1)

        count = len(cell_areas)
        centres.append(pts)
        normals.append(np.tile(np.asarray(surface.normal), (count, 1)))
        areas.append(cell_areas)
        rho.append(np.full(count, surface.reflectance))
        order.append(np.full(count, float(surface.order)))
        owner.append(np.full(count, index, dtype=np.int64))

    grid = ElementGrid(
        centres=np.concatenate(centres),
        normals=np.concatenate(normals),
        areas=np.concatenate(areas),
        reflectance=np.concatenate(rho),
        order=np.concatenate(order),
        surface_index=np.concatenate(owner),
    )
    logger.debug("Superfícies discretizadas: lado=%.3f m, elementos=%d", element_size, len(grid))
    return grid


def location_grid(scene: SceneConfig) -> list[Vec3]:
    """Centros das células da grade no plano de comunicação (x externo, y interno)."""
    half = scene.grid_spacing / 2
    xs = np.arange(half, scene.room.width, scene.grid_spacing)
    ys = np.arange(half, scene.room.length, scene.grid_spacing)
    return [(float(x), float(y), scene.cf_height) for x in xs for y in ys]


# ──────────────────────── Serialização ────────────────────────


def _require(data: dict[str, Any], key: str, where: str) -> Any:
    if not isinstance(data, dict) or key not in data:
        raise SceneConfigError(f"{where}.{key}: campo obrigatório ausente")
    return data[key]


def _positive(data: dict[str, Any], key: str, where: str) -> float:
    value = _require(data, key, where)
    if isinstance(value, bool) or not isinstance(value, (int, float)) or value <= 0:
        raise SceneConfigError(f"{where}.{key}: número positivo esperado, recebido {value!r}")
    return float(value)


def _vec3(value: Any, where: str) -> Vec3:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 3
        or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in value)
    ):
        raise SceneConfigError(f"{where}: esperado [x, y, z], recebido {value!r}")
    return (float(value[0]), float(value[1]), float(value[2]))


def _surface_from_dict(data: dict[str, Any], room: Room, where: str) -> Surface:
    raw_corners = _require(data, "corners", where)
    if not isinstance(raw_corners, list) or len(raw_corners) != 4:
        raise SceneConfigError(f"{where}.corners: exatamente 4 cantos esperados")
    corners = tuple(_vec3(c, f"{where}.corners[{i}]") for i, c in enumerate(raw_corners))
    c0, c1, c2, c3 = (np.asarray(c) for c in corners)
    u, v = c1 - c0, c3 - c0
    scale = max(np.linalg.norm(u), np.linalg.norm(v), 1.0)
    if np.linalg.norm(c0 + u + v - c2) > _GEOMETRY_TOL * scale:
        raise SceneConfigError(f"{where}.corners: cantos não formam um retângulo coplanar")
    if abs(u @ v) > _GEOMETRY_TOL * scale**2 or np.linalg.norm(np.cross(u, v)) == 0:
        raise SceneConfigError(f"{where}.corners: lados não são perpendiculares")

    normal = np.cross(u, v)
    normal /= np.linalg.norm(normal)
    if normal @ (room.centre - (c0 + c2) / 2) < 0:
        normal = -normal

    reflectance = _require(data, "reflectance", where)
    if not isinstance(reflectance, (int, float)) or not 0.0 <= reflectance <= 1.0:
        raise SceneConfigError(f"{where}.reflectance: deve estar em [0, 1] ({reflectance!r})")
    order = data.get("order", 1)
    if not isinstance(order, int) or order < 1:
        raise SceneConfigError(f"{where}.order: inteiro positivo esperado ({order!r})")

    return Surface(
        name=str(data.get("name", where)),
        corners=corners,
        normal=tuple(float(c) for c in normal),
        reflectance=float(reflectance),
        order=order,
    )


def scene_from_dict(data: dict[str, Any], source: str = "cena") -> SceneConfig:
    """Valida e constrói a cena; erros nomeiam o campo problemático."""
    if not isinstance(data, dict):
        raise SceneConfigError(f"{source}: objeto JSON esperado na raiz")

    raw_room = _require(data, "room", source)
    room = Room(
        width=_positive(raw_room, "width", f"{source}.room"),
        length=_positive(raw_room, "length", f"{source}.room"),
        height=_positive(raw_room, "height", f"{source}.room"),
    )

    raw_surfaces = _require(data, "surfaces", source)
    if not isinstance(raw_surfaces, list) or not raw_surfaces:
        raise SceneConfigError(f"{source}.surfaces: lista não vazia esperada")
    surfaces = tuple(
        _surface_from_dict(s, room, f"{source}.surfaces[{i}]") for i, s in enumerate(raw_surfaces)
    )

    sizes = _require(data, "element_size", source)
    first = _positive(sizes, "first_order", f"{source}.element_size")
    second = _positive(sizes, "second_order", f"{source}.element_size")

    raw_wl = _require(data, "wavelengths", source)
    wavelengths = []
    for wl in Wavelength:
        wwhere = f"{source}.wavelengths.{wl.value}"
        entry = _require(raw_wl, wl.value, f"{source}.wavelengths")
        wavelengths.append(
            WavelengthParams(
                wavelength=wl,
                ld_power=_positive(entry, "ld_power_w", wwhere),
                responsivity=_positive(entry, "responsivity_a_per_w", wwhere),
            )
        )

    raw_aps = _require(data, "access_points", source)
    awhere = f"{source}.access_points"
    semi_angle_deg = _positive(raw_aps, "semi_angle_deg", awhere)
    if semi_angle_deg >= 90.0:
        raise SceneConfigError(f"{awhere}.semi_angle_deg: deve ser menor que 90°")
    order = lambertian_order(math.radians(semi_angle_deg))
    lds = _require(raw_aps, "lds_per_unit", awhere)
    if not isinstance(lds, int) or lds < 1:
        raise SceneConfigError(f"{awhere}.lds_per_unit: inteiro positivo esperado ({lds!r})")
    orientation = np.asarray(_vec3(raw_aps.get("orientation", [0, 0, -1]), f"{awhere}.orientation"))
    if not np.linalg.norm(orientation) > 0:
        raise SceneConfigError(f"{awhere}.orientation: vetor não nulo esperado")
    orientation = tuple(float(c) for c in orientation / np.linalg.norm(orientation))
    positions = _require(raw_aps, "positions", awhere)
    if not isinstance(positions, list) or not positions:
        raise SceneConfigError(f"{awhere}.positions: lista não vazia esperada")
    access_points = []
    for i, raw in enumerate(positions):
        position = _vec3(raw, f"{awhere}.positions[{i}]")
        if not room.contains(position):
            raise SceneConfigError(f"{awhere}.positions[{i}]: fora da sala {position}")
        access_points.append(
            AccessPoint(
                id=i + 1,
                position=position,
                orientation=orientation,
                order=order,
                lds_per_unit=lds,
            )
        )

    cf_height = _positive(data, "communication_floor", source)
    if cf_height >= room.height:
        raise SceneConfigError(f"{source}.communication_floor: acima do teto ({cf_height})")
    grid_spacing = float(data.get("grid_spacing", 1.0))
    if grid_spacing <= 0:
        raise SceneConfigError(f"{source}.grid_spacing: deve ser positivo ({grid_spacing})")

    users = []
    for i, raw in enumerate(data.get("users", [])):
        location = _vec3(raw, f"{source}.users[{i}]")
        if abs(location[2] - cf_height) > _GEOMETRY_TOL:
            raise SceneConfigError(f"{source}.users[{i}]: z deve ser a altura do plano ({cf_height})")
        if not room.contains(location):
            raise SceneConfigError(f"{source}.users[{i}]: fora da sala {location}")
        users.append(location)

    raw_receivers = data.get("receivers", {})
    if not isinstance(raw_receivers, dict):
        raise SceneConfigError(f"{source}.receivers: objeto esperado")
    receivers = {
        name: receiver_from_dict(spec, f"{source}.receivers.{name}")
        for name, spec in sorted(raw_receivers.items())
    }

    return SceneConfig(
        room=room,
        surfaces=surfaces,
        first_order_element=first,
        second_order_element=second,
        access_points=tuple(access_points),
        wavelengths=tuple(wavelengths),
        cf_height=cf_height,
        grid_spacing=grid_spacing,
        semi_angle_deg=semi_angle_deg,
        users=tuple(users),
        receivers=receivers,
    )


def scene_to_dict(scene: SceneConfig) -> dict[str, Any]:
    """Forma canônica da cena (mesmo schema aceito por `scene_from_dict`)."""
    return {
        "room": {
            "width": scene.room.width,
            "length": scene.room.length,
            "height": scene.room.height,
        },
        "surfaces": [
            {
                "name": s.name,
                "corners": [list(c) for c in s.corners],
                "reflectance": s.reflectance,
                "order": s.order,
            }
            for s in scene.surfaces
        ],
        "element_size": {
            "first_order": scene.first_order_element,
            "second_order": scene.second_order_element,
        },
        "wavelengths": {
            p.wavelength.value: {
                "ld_power_w": p.ld_power,
                "responsivity_a_per_w": p.responsivity,
            }
            for p in scene.wavelengths
        },
        "access_points": {
            "semi_angle_deg": scene.semi_angle_deg,
            "lds_per_unit": scene.access_points[0].lds_per_unit,
            "orientation": list(scene.access_points[0].orientation),
            "positions": [list(ap.position) for ap in scene.access_points],
        },
        "communication_floor": scene.cf_height,
        "grid_spacing": scene.grid_spacing,
        "users": [list(u) for u in scene.users],
        "receivers": {name: spec.to_dict() for name, spec in sorted(scene.receivers.items())},
    }


def scene_hash(scene: SceneConfig) -> str:
    """SHA-256 do JSON canônico da cena."""
    canonical = json.dumps(scene_to_dict(scene), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_json(path: str | Path) -> Any:
    """Lê um JSON; erros de sintaxe trazem arquivo e linha."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ChannelIOError(f"{path}: não foi possível ler ({exc.strerror or exc})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneConfigError(f"{path}:{exc.lineno}: JSON inválido ({exc.msg})") from exc


def load_scene(path: str | Path) -> SceneConfig:
    """Carrega e valida uma cena a partir de um arquivo JSON."""
    scene = scene_from_dict(load_json(path), source=str(path))
    logger.info(
        "Cena carregada de %s: %d superfícies, %d APs, receptores=%s",
        path,
        len(scene.surfaces),
        len(scene.access_points),
        ",".join(scene.receivers) or "(nenhum)",
    )
    return scene
