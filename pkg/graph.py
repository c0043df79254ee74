"""Definição do grafo LangGraph do pipeline de simulação.

Rotas por comando:
  build-db : load_inputs → build_db → write_outputs
  analyze  : load_db → analyze → write_outputs
  optimize : load_inputs → load_db → optimize → write_outputs
  run      : load_inputs → build_db → analyze → [optimize] → write_outputs
"""

import logging

from langgraph.graph import END, START, StateGraph

from nodes.analyzer import analyze
from nodes.db_builder import build_db, load_db_file
from nodes.optimizer import optimize_scenario
from nodes.report_writer import write_outputs
from nodes.router import (
    route_after_analysis,
    route_after_db,
    route_after_inputs,
    route_command,
)
from nodes.scene_loader import load_inputs
from state import PipelineState

logger = logging.getLogger(__name__)


def build_graph() -> StateGraph:
    """Constrói e retorna o grafo LangGraph do pipeline."""
    graph = StateGraph(PipelineState)

    # ─── Entradas e DB ───
    graph.add_node("load_inputs", load_inputs)
    graph.add_node("build_db", build_db)
    graph.add_node("load_db", load_db_file)

    # ─── Processamento ───
    graph.add_node("analyze", analyze)
    graph.add_node("optimize", optimize_scenario)

    # ─── Saídas ───
    graph.add_node("write_outputs", write_outputs)

    # ════════════════════════════════════
    #  ARESTAS
    # ════════════════════════════════════

    graph.add_conditional_edges(START, route_command)
    graph.add_conditional_edges("load_inputs", route_after_inputs)
    graph.add_conditional_edges("build_db", route_after_db)
    graph.add_conditional_edges("load_db", route_after_db)
    graph.add_conditional_edges("analyze", route_after_analysis)
    graph.add_edge("optimize", "write_outputs")
    graph.add_edge("write_outputs", END)

    return graph


def compile_graph():
    """Compila o grafo LangGraph e retorna o executor."""
    graph = build_graph()
    return graph.compile()
