"""Nó de carregamento das entradas: cena e cenário."""

import asyncio
import logging

from owc.scenario import load_scenario
from owc.scene import load_scene
from state import PipelineState

logger = logging.getLogger(__name__)

# Comandos que traçam a cena; os demais partem de um DB pronto
TRACING_COMMANDS = {"build-db", "run"}


async def load_inputs(state: PipelineState) -> PipelineState:
    """Lê a cena (para o traçado) e o cenário de usuários, quando informado."""
    command = state["command"]
    update: PipelineState = {}

    if command in TRACING_COMMANDS:
        update["scene"] = await asyncio.to_thread(load_scene, state["scene_file"])

    scenario_file = state.get("scenario_file")
    if scenario_file:
        update["scenario"] = await asyncio.to_thread(load_scenario, scenario_file)

    logger.info(
        "Entradas prontas: comando=%s, cena=%s, cenário=%s",
        command,
        "sim" if "scene" in update else "não",
        update["scenario"].name if "scenario" in update else "(nenhum)",
    )
    return update
