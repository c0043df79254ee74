"""Configurações do projeto carregadas de variáveis de ambiente.

Cada variável OWC_* espelha uma flag do CLI; a flag tem precedência.
"""

import os
from dotenv import load_dotenv

from owc.scene import REFERENCE_SCENE_FILE

load_dotenv()

# ──────────────────────── Entradas ────────────────────────
OWC_SCENE = os.getenv("OWC_SCENE", str(REFERENCE_SCENE_FILE))
OWC_RECEIVER = os.getenv("OWC_RECEIVER", "")
OWC_SCENARIO = os.getenv("OWC_SCENARIO", "")
OWC_DB = os.getenv("OWC_DB", "")

# ──────────────────────── Saídas ────────────────────────
OWC_OUT = os.getenv("OWC_OUT", "out")

# ──────────────────────── Traçado de raios ────────────────────────
# Texto cru; main.resolve_state converte e acusa valores inválidos.
OWC_DT = os.getenv("OWC_DT", "1e-11")
OWC_IR_LENGTH = os.getenv("OWC_IR_LENGTH", "6e-8")
OWC_ORDERS = os.getenv("OWC_ORDERS", "2")
OWC_THREADS = os.getenv("OWC_THREADS", str(os.cpu_count() or 1))

# ──────────────────────── Alocação ────────────────────────
OWC_SINR_MODE = os.getenv("OWC_SINR_MODE", "linear")

# ──────────────────────── Logging ────────────────────────
OWC_LOG_LEVEL = os.getenv("OWC_LOG_LEVEL", "INFO")
