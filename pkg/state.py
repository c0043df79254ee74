"""Definição do estado do LangGraph para o pipeline de simulação."""

from typing import Any, TypedDict

from owc.allocation import AllocationReport
from owc.analysis import CdfCurve, RecordMetrics
from owc.channeldb import ChannelDB
from owc.manifest import RunManifest
from owc.scenario import Scenario
from owc.scene import SceneConfig


class PipelineState(TypedDict, total=False):
    """Estado compartilhado entre todos os nós do grafo."""

    # Comando e parâmetros resolvidos (flag > env > padrão)
    command: str
    scene_file: str
    receiver: str
    scenario_file: str
    db_file: str
    out_dir: str
    dt: float
    ir_length: float
    orders: int
    sinr_mode: str
    threads: int
    export_csv: bool

    # Entradas carregadas
    scene: SceneConfig
    scenario: Scenario

    # DB de canal
    db: ChannelDB

    # Análise
    metrics: list[RecordMetrics]
    cdf: CdfCurve

    # Alocação
    report: AllocationReport
    published_report: AllocationReport

    # Saídas
    manifest: RunManifest
    outputs: list[str]
    results: dict[str, Any]
