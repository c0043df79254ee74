"""Exceções do simulador.

Cada família tem uma categoria usada pelo CLI na linha de erro
(`erro [categoria]: mensagem`).
"""


class OwcError(Exception):
    """Erro base do simulador."""

    category = "owc"


class SceneConfigError(OwcError):
    """Arquivo de cena, receptor ou cenário inválido."""

    category = "config"


class ChannelIOError(OwcError):
    """Falha de leitura/gravação de arquivos."""

    category = "io"


class ChannelDBError(OwcError):
    """DB de canal ausente, corrompido ou incompatível."""

    category = "db"


class AnalysisError(OwcError):
    """Entrada inválida para a análise de canal."""

    category = "analysis"


class AllocationError(OwcError):
    """Atribuição inválida ou problema de alocação inviável."""

    category = "allocation"
