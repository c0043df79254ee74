"""Traçado de raios determinístico até reflexões de 2ª ordem.

Cada superfície é discretizada em elementos que reemitem a potência recebida
como fontes Lambertianas secundárias. A 1ª ordem usa a malha fina
(`first_order_element`) e as duas reflexões da 2ª ordem usam a malha grossa
(`second_order_element`). A potência de cada caminho cai no bin do seu atraso
total; caminhos além de `ir_length` são descartados.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from owc.channeldb import ChannelDB, ChannelRecord, ImpulseResponse
from owc.errors import SceneConfigError
from owc.receivers import ReceiverSpec, receiver_id
from owc.scene import (
    AccessPoint,
    ElementGrid,
    SceneConfig,
    Vec3,
    discretize_surfaces,
    scene_hash,
    scene_to_dict,
)

logger = logging.getLogger(__name__)

SPEED_OF_LIGHT = 299_792_458.0

# Linhas da matriz elemento→elemento processadas por vez
_BLOCK_ROWS = 256


@dataclass(frozen=True)
class TracingSettings:
    dt: float = 1e-11
    ir_length: float = 6e-8
    max_order: int = 2

    def __post_init__(self) -> None:
        if self.max_order not in (0, 1, 2):
            raise SceneConfigError(f"max_order deve ser 0, 1 ou 2 ({self.max_order})")
        if not self.dt > 0 or not self.ir_length > self.dt:
            raise SceneConfigError(f"dt/ir_length inválidos ({self.dt}, {self.ir_length})")

    @property
    def n_bins(self) -> int:
        return int(round(self.ir_length / self.dt))


# ──────────────────────── Fórmulas fechadas ────────────────────────


def lambertian_intensity(order: float, psi: float) -> float:
    """Intensidade radiante normalizada (sr⁻¹): (n+1)/(2π)·cosⁿψ, zero a partir de 90°."""
    if psi >= math.pi / 2:
        return 0.0
    return (order + 1) / (2 * math.pi) * math.cos(psi) ** order


@dataclass(frozen=True)
class Transmitter:
    position: Vec3
    normal: Vec3
    order: float


@dataclass(frozen=True)
class Collector:
    position: Vec3
    normal: Vec3
    area: float


def los_gain(tx: Transmitter, rx: Collector, fov: float) -> float:
    """Ganho da linha de visada entre uma fonte Lambertiana e um detector plano."""
    vec = np.asarray(rx.position, dtype=float) - np.asarray(tx.position, dtype=float)
    d2 = float(vec @ vec)
    if d2 == 0.0:
        raise ValueError("transmissor e receptor na mesma posição")
    d = math.sqrt(d2)
    cos_emit = float(vec @ np.asarray(tx.normal)) / d
    cos_inc = -float(vec @ np.asarray(rx.normal)) / d
    if cos_emit <= 0.0 or cos_inc <= 0.0 or cos_inc < math.cos(fov) - 1e-12:
        return 0.0
    return (tx.order + 1) / (2 * math.pi) * cos_emit**tx.order * rx.area * cos_inc / d2


# ──────────────────────── Núcleos vetorizados ────────────────────────


def incident_power(
    position: np.ndarray, normal: np.ndarray, order: float, grid: ElementGrid
) -> tuple[np.ndarray, np.ndarray]:
    """Fração da potência da fonte que incide em cada elemento, e a distância até ele."""
    vec = grid.centres - position
    d2 = np.einsum("ij,ij->i", vec, vec)
    d = np.sqrt(d2)
    safe_d = np.where(d > 0.0, d, np.inf)
    cos_emit = (vec @ normal) / safe_d
    cos_inc = -np.einsum("ij,ij->i", vec, grid.normals) / safe_d
    lit = (cos_emit > 0.0) & (cos_inc > 0.0)
    safe_emit = np.where(lit, cos_emit, 0.0)
    safe_d2 = np.where(lit, d2, 1.0)
    gain = np.where(
        lit,
        (order + 1) / (2 * np.pi) * safe_emit**order * cos_inc * grid.areas / safe_d2,
        0.0,
    )
    return gain, d


def _collection(
    grid: ElementGrid, location: np.ndarray, receiver: ReceiverSpec
) -> tuple[np.ndarray, np.ndarray]:
    """Ganho de cada elemento (reemissor Lambertiano) para cada elemento do receptor."""
    vec = location - grid.centres
    d2 = np.einsum("ij,ij->i", vec, vec)
    d = np.sqrt(d2)
    directions = vec / d[:, None]
    cos_emit = np.einsum("ij,ij->i", directions, grid.normals)
    facing = cos_emit > 0.0
    safe_emit = np.where(facing, cos_emit, 0.0)
    emission = np.where(
        facing, (grid.order + 1) / (2 * np.pi) * safe_emit**grid.order / d2, 0.0
    )
    return emission[:, None] * receiver.collection_areas(directions), d


def transfer_kernel(grid: ElementGrid) -> tuple[np.ndarray, np.ndarray]:
    """Kernel geométrico elemento i → elemento j (sem refletância) e distâncias.

    K[i, j] = (n_i+1)/(2π)·cosⁿφ_ij·cosθ_ij·dA_j / d², zero quando os elementos
    não se enxergam (mesma superfície ou de costas).
    """
    n = len(grid)
    kernel = np.zeros((n, n))
    distances = np.zeros((n, n))
    for start in range(0, n, _BLOCK_ROWS):
        rows = slice(start, min(start + _BLOCK_ROWS, n))
        vec = grid.centres[None, :, :] - grid.centres[rows, None, :]
        d2 = np.einsum("bjk,bjk->bj", vec, vec)
        d = np.sqrt(d2)
        safe_d = np.where(d > 0.0, d, np.inf)
        cos_emit = np.einsum("bjk,bk->bj", vec, grid.normals[rows]) / safe_d
        cos_inc = -np.einsum("bjk,jk->bj", vec, grid.normals) / safe_d
        visible = (cos_emit > 0.0) & (cos_inc > 0.0)
        order = grid.order[rows, None]
        safe_emit = np.where(visible, cos_emit, 0.0)
        kernel[rows] = np.where(
            visible,
            (order + 1) / (2 * np.pi) * safe_emit**order * cos_inc * grid.areas[None, :]
            / np.where(visible, d2, 1.0),
            0.0,
        )
        distances[rows] = d
    return kernel, distances


def _binned(indices: np.ndarray, weights: np.ndarray, n_bins: int) -> np.ndarray:
    keep = indices < n_bins
    return np.bincount(indices[keep], weights=weights[keep], minlength=n_bins)[:n_bins]


def _bin_of(path_length: np.ndarray, dt: float) -> np.ndarray:
    return np.floor(path_length / SPEED_OF_LIGHT / dt).astype(np.int64)


# ──────────────────────── Contexto de traçado ────────────────────────


@dataclass(frozen=True)
class TracingContext:
    """Malhas e kernel da 2ª ordem, calculados uma vez por cena e reutilizados."""

    scene: SceneConfig
    settings: TracingSettings
    first_grid: ElementGrid | None
    second_grid: ElementGrid | None
    kernel: np.ndarray | None
    distances: np.ndarray | None


def prepare_tracing(scene: SceneConfig, settings: TracingSettings) -> TracingContext:
    """Discretiza a sala e pré-calcula o kernel da 2ª ordem quando necessário."""
    first_grid = second_grid = kernel = distances = None
    if settings.max_order >= 1:
        first_grid = discretize_surfaces(scene, scene.first_order_element)
    if settings.max_order >= 2:
        second_grid = discretize_surfaces(scene, scene.second_order_element)
        kernel, distances = transfer_kernel(second_grid)
    logger.info(
        "Traçado preparado: ordem=%d, elementos 1ª=%d, 2ª=%d, bins=%d",
        settings.max_order,
        len(first_grid) if first_grid is not None else 0,
        len(second_grid) if second_grid is not None else 0,
        settings.n_bins,
    )
    return TracingContext(scene, settings, first_grid, second_grid, kernel, distances)


def trace_pair(
    ctx: TracingContext, location: Vec3, ap: AccessPoint, receiver: ReceiverSpec
) -> np.ndarray:
    """Histogramas por ordem para todos os elementos do receptor.

    Retorna um array (3, E, n_bins): LOS, 1ª ordem, 2ª ordem.
    """
    n_bins = ctx.settings.n_bins
    dt = ctx.settings.dt
    n_el = receiver.n_elements
    hist = np.zeros((3, n_el, n_bins))

    rx = np.asarray(location, dtype=float)
    src = np.asarray(ap.position, dtype=float)
    src_normal = np.asarray(ap.orientation, dtype=float)

    # LOS
    vec = rx - src
    d = float(np.sqrt(vec @ vec))
    direction = vec / d
    cos_emit = float(direction @ src_normal)
    if cos_emit > 0.0:
        areas = receiver.collection_areas(direction[None, :])[0]
        gain = (ap.order + 1) / (2 * math.pi) * cos_emit**ap.order * areas / (d * d)
        k = int(_bin_of(np.array([d]), dt)[0])
        if k < n_bins:
            hist[0, :, k] += gain

    # 1ª ordem: AP → elemento → receptor
    if ctx.first_grid is not None:
        grid = ctx.first_grid
        g_in, d_in = incident_power(src, src_normal, ap.order, grid)
        g_out, d_out = _collection(grid, rx, receiver)
        weights = (g_in * grid.reflectance)[:, None] * g_out
        indices = _bin_of(d_in + d_out, dt)
        for e in range(n_el):
            hist[1, e] = _binned(indices, weights[:, e], n_bins)

    # 2ª ordem: AP → elemento i → elemento j → receptor
    if ctx.second_grid is not None:
        grid = ctx.second_grid
        g_in, d_in = incident_power(src, src_normal, ap.order, grid)
        g_out, d_out = _collection(grid, rx, receiver)
        first_hop = g_in * grid.reflectance
        last_hop = grid.reflectance[:, None] * g_out
        sources = np.flatnonzero(first_hop > 0.0)
        sinks = np.flatnonzero(last_hop.any(axis=1))
        if len(sources) and len(sinks):
            sink_gain = last_hop[sinks]
            for start in range(0, len(sources), _BLOCK_ROWS):
                rows = sources[start : start + _BLOCK_ROWS]
                path = np.ix_(rows, sinks)
                weights = first_hop[rows, None] * ctx.kernel[path]
                lengths = d_in[rows, None] + ctx.distances[path] + d_out[None, sinks]
                indices = _bin_of(lengths, dt)
                keep = (weights > 0.0) & (indices < n_bins)
                kept_idx = indices[keep]
                kept_w = weights[keep]
                cols = np.nonzero(keep)[1]
                for e in range(n_el):
                    hist[2, e] += np.bincount(
                        kept_idx, weights=kept_w * sink_gain[cols, e], minlength=n_bins
                    )[:n_bins]

    return hist


def trace_impulse_response(
    scene: SceneConfig,
    ap: AccessPoint,
    location: Vec3,
    receiver: ReceiverSpec,
    element_id: int = 1,
    settings: TracingSettings | None = None,
    context: TracingContext | None = None,
) -> ImpulseResponse:
    """Resposta ao impulso AP → elemento `element_id` do receptor em `location`."""
    if context is None:
        context = prepare_tracing(scene, settings or TracingSettings())
    hist = trace_pair(context, location, ap, receiver)
    return ImpulseResponse.from_histogram(context.settings.dt, hist[:, element_id - 1].sum(axis=0))


# ──────────────────────── DB de canal ────────────────────────


def build_channel_db(
    scene: SceneConfig,
    receiver_name: str,
    locations: list[Vec3],
    settings: TracingSettings | None = None,
    threads: int = 1,
) -> ChannelDB:
    """Traça todos os pares (localização, AP) e monta o DB.

    Pares rodam em paralelo sobre a cena somente leitura; os registros são
    montados na ordem fixa das chaves, então o resultado não depende de `threads`.
    """
    if not locations:
        raise SceneConfigError("lista de localizações vazia")
    settings = settings or TracingSettings()
    receiver = scene.receiver(receiver_name)
    ctx = prepare_tracing(scene, settings)

    pairs = [(li, ap) for li in range(len(locations)) for ap in scene.access_points]
    logger.info(
        "Construindo DB: receptor=%s, localizações=%d, APs=%d, pares=%d, threads=%d",
        receiver_name,
        len(locations),
        len(scene.access_points),
        len(pairs),
        threads,
    )

    db = ChannelDB(
        scene=scene_to_dict(scene),
        scene_hash=scene_hash(scene),
        receiver_name=receiver_name,
        receiver=receiver.to_dict(),
        receiver_id=receiver_id(receiver),
        dt=settings.dt,
        ir_length=settings.ir_length,
        max_order=settings.max_order,
        locations=[tuple(loc) for loc in locations],
        ap_ids=[ap.id for ap in scene.access_points],
        n_elements=receiver.n_elements,
    )

    step = max(1, len(pairs) // 10)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        traced = pool.map(lambda pair: trace_pair(ctx, locations[pair[0]], pair[1], receiver), pairs)
        for count, ((li, ap), hist) in enumerate(zip(pairs, traced), start=1):
            for e in range(receiver.n_elements):
                record = ChannelRecord(
                    location_id=li + 1,
                    ap_id=ap.id,
                    element_id=e + 1,
                    response=ImpulseResponse.from_histogram(settings.dt, hist[:, e].sum(axis=0)),
                    order_gains=tuple(float(h.sum()) for h in hist[:, e]),
                )
                db.records[record.key] = record
            if count % step == 0 or count == len(pairs):
                logger.info("Traçado %d/%d pares", count, len(pairs))

    logger.info("DB construído: %d registros", len(db))
    return db
