"""Nós do workflow LangGraph do pipeline de simulação."""
