"""Modelos de receptor: ADR (4 ramos fixos), ImR (lente + matriz 3×3) e fotodetector único.

Convenção de direções: `incoming_direction` é a direção de propagação do raio,
apontando PARA o receptor. O raio invertido (receptor → fonte) é o que se compara
com a normal de cada ramo ou com o zênite da lente.

Todos os receptores ficam no plano de comunicação voltados para cima (+z).
"""

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from owc.errors import SceneConfigError

# Folga no cosseno para aceitar direções exatamente na borda do FOV
_FOV_COS_TOL = 1e-12

_MM2 = 1e-6
_PA = 1e-12


# ──────────────────────── Ruído ────────────────────────


@dataclass(frozen=True)
class ReceiverNoise:
    """Densidade espectral de corrente de ruído (A/√Hz) e banda do receptor (Hz)."""

    density: float
    bandwidth: float

    @property
    def sigma(self) -> float:
        """σ_Rx = densidade × √B_rx."""
        return self.density * math.sqrt(self.bandwidth)


def receiver_noise_sigma(spec: "ReceiverSpec") -> float:
    """Corrente de ruído do receptor σ_Rx em A."""
    return spec.noise.sigma


# ──────────────────────── Fotodetector ────────────────────────


def branch_normal(azimuth_deg: float, elevation_deg: float) -> np.ndarray:
    """Normal unitária de um ramo: (cos E cos Az, cos E sin Az, sin E), z para cima.

    A elevação é medida a partir do plano horizontal.
    """
    az = math.radians(azimuth_deg)
    el = math.radians(elevation_deg)
    return np.array(
        [math.cos(el) * math.cos(az), math.cos(el) * math.sin(az), math.sin(el)]
    )


@dataclass(frozen=True)
class Photodetector:
    """Detector plano com normal, área (m²) e semi-ângulo de FOV (rad)."""

    normal: tuple[float, float, float]
    area: float
    fov: float

    def effective_areas(self, directions: np.ndarray) -> np.ndarray:
        """Área efetiva para cada direção de chegada (N×3); 0 quando rejeitada."""
        cos_angle = -(directions @ np.asarray(self.normal))
        accepted = (cos_angle > 0.0) & (cos_angle >= math.cos(self.fov) - _FOV_COS_TOL)
        return np.where(accepted, self.area * cos_angle, 0.0)


@dataclass(frozen=True)
class ADRBranch:
    """Um ramo do ADR, descrito como na tabela de parâmetros (graus e m²)."""

    azimuth_deg: float
    elevation_deg: float
    fov_deg: float
    area: float

    @property
    def detector(self) -> Photodetector:
        normal = branch_normal(self.azimuth_deg, self.elevation_deg)
        return Photodetector(
            normal=tuple(float(c) for c in normal),
            area=self.area,
            fov=math.radians(self.fov_deg),
        )


def adr_effective_area(branch: ADRBranch, incoming_direction) -> float | None:
    """Área efetiva de um ramo para uma direção, ou None se fora do FOV."""
    direction = np.asarray(incoming_direction, dtype=float).reshape(1, 3)
    area = float(branch.detector.effective_areas(direction)[0])
    return area if area > 0.0 else None


# ──────────────────────── Especificações ────────────────────────


@dataclass(frozen=True)
class PhotodetectorSpec:
    """Receptor de detector único (campo de visão amplo)."""

    detector: Photodetector
    noise: ReceiverNoise
    kind: str = "pd"

    @property
    def n_elements(self) -> int:
        return 1

    def collection_areas(self, directions: np.ndarray) -> np.ndarray:
        return self.detector.effective_areas(directions)[:, None]

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "normal": list(self.detector.normal),
            "fov_deg": math.degrees(self.detector.fov),
            "area_mm2": self.detector.area / _MM2,
            "noise_density_pa_rthz": self.noise.density / _PA,
            "bandwidth_hz": self.noise.bandwidth,
        }


@dataclass(frozen=True)
class ADRSpec:
    """Receptor de diversidade angular: ramos fixos, um elemento por ramo."""

    branches: tuple[ADRBranch, ...]
    noise: ReceiverNoise
    kind: str = "adr"

    @property
    def n_elements(self) -> int:
        return len(self.branches)

    def collection_areas(self, directions: np.ndarray) -> np.ndarray:
        return np.stack(
            [branch.detector.effective_areas(directions) for branch in self.branches],
            axis=1,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "branches": [
                {
                    "azimuth_deg": b.azimuth_deg,
                    "elevation_deg": b.elevation_deg,
                    "fov_deg": b.fov_deg,
                    "area_mm2": b.area / _MM2,
                }
                for b in self.branches
            ],
            "noise_density_pa_rthz": self.noise.density / _PA,
            "bandwidth_hz": self.noise.bandwidth,
        }


@dataclass(frozen=True)
class ImRSpec:
    """Receptor de imagem: uma abertura compartilhada e pixels em grade quadrada.

    Linhas da grade seguem o eixo x (linha 1 = −x) e colunas o eixo y
    (coluna 1 = −y), numeração linha a linha; com 3×3 o pixel 5 é o centro.

    Com `lens_index` a lente age como concentrador de ganho N²/sin²(FOV)
    sobre a abertura; sem ele a abertura coleta sem ganho.
    """

    fov: float
    pixels_per_side: int
    area: float
    noise: ReceiverNoise
    lens_index: float | None = None
    kind: str = "imr"

    @property
    def n_elements(self) -> int:
        return self.pixels_per_side**2

    @property
    def optical_gain(self) -> float:
        if self.lens_index is None:
            return 1.0
        return self.lens_index**2 / math.sin(self.fov) ** 2

    def pixel_indices(self, directions: np.ndarray) -> np.ndarray:
        """Pixel (1..n²) de cada direção de chegada; 0 quando fora do FOV da lente."""
        reversed_rays = -np.asarray(directions, dtype=float)
        cos_theta = reversed_rays[:, 2]
        accepted = (cos_theta > 0.0) & (cos_theta >= math.cos(self.fov) - _FOV_COS_TOL)
        safe_cos = np.where(accepted, cos_theta, 1.0)

        # Plano focal: (tanθ cosφ, tanθ sinφ); o disco do FOV inscreve o quadrado
        half = math.tan(self.fov)
        cell = 2.0 * half / self.pixels_per_side
        last = self.pixels_per_side - 1
        row = np.clip(np.ceil((reversed_rays[:, 0] / safe_cos + half) / cell) - 1, 0, last)
        col = np.clip(np.ceil((reversed_rays[:, 1] / safe_cos + half) / cell) - 1, 0, last)

        pixels = (row * self.pixels_per_side + col + 1).astype(np.int64)
        return np.where(accepted, pixels, 0)

    def collection_areas(self, directions: np.ndarray) -> np.ndarray:
        directions = np.asarray(directions, dtype=float)
        pixels = self.pixel_indices(directions)
        areas = np.zeros((len(directions), self.n_elements))
        hit = np.nonzero(pixels)[0]
        areas[hit, pixels[hit] - 1] = self.optical_gain * self.area * -directions[hit, 2]
        return areas

    def to_dict(self) -> dict[str, Any]:
        data = {
            "kind": self.kind,
            "fov_deg": math.degrees(self.fov),
            "pixels_per_side": self.pixels_per_side,
            "area_mm2": self.area / _MM2,
            "noise_density_pa_rthz": self.noise.density / _PA,
            "bandwidth_hz": self.noise.bandwidth,
        }
        if self.lens_index is not None:
            data["lens_index"] = self.lens_index
        return data


ReceiverSpec = PhotodetectorSpec | ADRSpec | ImRSpec


def imr_pixel_map(spec: ImRSpec, incoming_direction) -> int | None:
    """Pixel que recebe a direção, ou None se rejeitada pela lente."""
    direction = np.asarray(incoming_direction, dtype=float).reshape(1, 3)
    pixel = int(spec.pixel_indices(direction)[0])
    return pixel or None


def imr_effective_area(spec: ImRSpec, incoming_direction) -> float | None:
    """Área coletada (ganho × abertura × cosθ) no pixel mapeado, ou None se rejeitada."""
    direction = np.asarray(incoming_direction, dtype=float).reshape(1, 3)
    areas = spec.collection_areas(direction)[0]
    total = float(areas.sum())
    return total if total > 0.0 else None


def receiver_id(spec: ReceiverSpec) -> str:
    """Identificador estável: tipo + hash do spec serializado."""
    canonical = json.dumps(spec.to_dict(), sort_keys=True, separators=(",", ":"))
    return f"{spec.kind}-{hashlib.sha256(canonical.encode('utf-8')).hexdigest()[:12]}"


# ──────────────────────── Leitura do schema ────────────────────────


def _number(data: dict[str, Any], key: str, where: str, positive: bool = True) -> float:
    if key not in data:
        raise SceneConfigError(f"{where}.{key}: campo obrigatório ausente")
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SceneConfigError(f"{where}.{key}: esperado número, recebido {value!r}")
    if positive and value <= 0:
        raise SceneConfigError(f"{where}.{key}: deve ser positivo ({value})")
    return float(value)


def _fov(data: dict[str, Any], where: str, limit: float = 90.0) -> float:
    fov_deg = _number(data, "fov_deg", where)
    if fov_deg > limit:
        raise SceneConfigError(f"{where}.fov_deg: deve estar em (0°, {limit:g}°]")
    return fov_deg


def _noise(data: dict[str, Any], where: str) -> ReceiverNoise:
    return ReceiverNoise(
        density=_number(data, "noise_density_pa_rthz", where, positive=False) * _PA,
        bandwidth=_number(data, "bandwidth_hz", where),
    )


def receiver_from_dict(data: dict[str, Any], where: str = "receiver") -> ReceiverSpec:
    """Constrói um receptor a partir do schema JSON, validando cada campo."""
    if not isinstance(data, dict):
        raise SceneConfigError(f"{where}: esperado objeto")
    kind = data.get("kind")

    if kind == "adr":
        raw_branches = data.get("branches")
        if not isinstance(raw_branches, list) or not raw_branches:
            raise SceneConfigError(f"{where}.branches: lista de ramos obrigatória")
        branches = []
        for i, raw in enumerate(raw_branches):
            bwhere = f"{where}.branches[{i}]"
            elevation = _number(raw, "elevation_deg", bwhere, positive=False)
            if not 0.0 <= elevation <= 90.0:
                raise SceneConfigError(f"{bwhere}.elevation_deg: deve estar em [0°, 90°]")
            fov_deg = _fov(raw, bwhere)
            if fov_deg >= 90.0:
                raise SceneConfigError(f"{bwhere}.fov_deg: deve estar em (0°, 90°)")
            branches.append(
                ADRBranch(
                    azimuth_deg=_number(raw, "azimuth_deg", bwhere, positive=False),
                    elevation_deg=elevation,
                    fov_deg=fov_deg,
                    area=_number(raw, "area_mm2", bwhere) * _MM2,
                )
            )
        return ADRSpec(branches=tuple(branches), noise=_noise(data, where))

    if kind == "imr":
        fov_deg = _fov(data, where)
        if fov_deg >= 90.0:
            raise SceneConfigError(f"{where}.fov_deg: deve estar em (0°, 90°)")
        side = data.get("pixels_per_side", 3)
        if not isinstance(side, int) or side < 1:
            raise SceneConfigError(f"{where}.pixels_per_side: inteiro positivo esperado")
        lens_index = None
        if "lens_index" in data:
            lens_index = _number(data, "lens_index", where)
            if lens_index < 1.0:
                raise SceneConfigError(f"{where}.lens_index: deve ser ≥ 1 ({lens_index})")
        return ImRSpec(
            fov=math.radians(fov_deg),
            pixels_per_side=side,
            area=_number(data, "area_mm2", where) * _MM2,
            noise=_noise(data, where),
            lens_index=lens_index,
        )

    if kind == "pd":
        normal = np.asarray(data.get("normal", [0.0, 0.0, 1.0]), dtype=float)
        if normal.shape != (3,) or not np.linalg.norm(normal) > 0:
            raise SceneConfigError(f"{where}.normal: vetor 3D não nulo esperado")
        normal = normal / np.linalg.norm(normal)
        return PhotodetectorSpec(
            detector=Photodetector(
                normal=tuple(float(c) for c in normal),
                area=_number(data, "area_mm2", where) * _MM2,
                fov=math.radians(_fov(data, where)),
            ),
            noise=_noise(data, where),
        )

    raise SceneConfigError(f"{where}.kind: tipo de receptor desconhecido {kind!r}")
