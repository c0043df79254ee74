"""Roteamento do pipeline pelo comando pedido.

Cada função devolve o nome do próximo nó ou "__end__".
"""

import logging

from state import PipelineState

logger = logging.getLogger(__name__)


def route_command(state: PipelineState) -> str:
    """Entrada: `analyze` parte direto do DB; os demais leem cena/cenário antes."""
    command = state.get("command", "")
    mapping = {
        "build-db": "load_inputs",
        "analyze": "load_db",
        "optimize": "load_inputs",
        "run": "load_inputs",
    }
    route = mapping.get(command, "__end__")
    logger.info("Comando %s: rota selecionada: %s", command or "(vazio)", route)
    return route


def route_after_inputs(state: PipelineState) -> str:
    if state["command"] == "optimize":
        return "load_db"
    return "build_db"


def route_after_db(state: PipelineState) -> str:
    command = state["command"]
    if command in ("analyze", "run"):
        return "analyze"
    if command == "optimize":
        return "optimize"
    return "write_outputs"


def route_after_analysis(state: PipelineState) -> str:
    """No `run`, otimiza só quando há cenário."""
    if state["command"] == "run" and state.get("scenario") is not None:
        return "optimize"
    return "write_outputs"
