"""Biblioteca de domínio: cena, receptores, traçado de raios, análise e alocação."""

__version__ = "1.0.0"
