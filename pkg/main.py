"""CLI do simulador de canal óptico indoor.

Comandos:
- build-db  → traça a cena e grava o DB de canal (OWCDB1)
- analyze   → banda de 3 dB por registro e CDF sobre as localizações
- optimize  → alocação ótima de (AP, λ, elemento) para um cenário
- run       → build-db → analyze → optimize

Cada flag tem uma variável de ambiente OWC_* equivalente (flag > env > padrão).
Saída 0 em sucesso, 2 em erro do simulador e 1 em erro inesperado.
"""

import argparse
import asyncio
import logging
import sys
from pathlib import Path
from typing import Any

import config
from graph import compile_graph
from owc.allocation import SinrMode
from owc.errors import OwcError, SceneConfigError

# ──────────────────────── Logging ────────────────────────

logging.basicConfig(
    level=getattr(logging, config.OWC_LOG_LEVEL.upper(), logging.INFO),
    format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S",
)
logger = logging.getLogger(__name__)

DEFAULT_RECEIVER = "imr"


# ──────────────────────── Argumentos ────────────────────────


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scene", help="arquivo JSON da cena (OWC_SCENE)")
    common.add_argument("--receiver", help="receptor definido na cena: adr | imr (OWC_RECEIVER)")
    common.add_argument("--scenario", help="arquivo JSON do cenário de usuários (OWC_SCENARIO)")
    common.add_argument("--db", help="arquivo OWCDB1 (OWC_DB)")
    common.add_argument("--out", help="diretório de saída (OWC_OUT)")
    common.add_argument("--dt", type=float, help="largura do bin da IR em segundos (OWC_DT)")
    common.add_argument("--ir-length", type=float, help="duração da IR em segundos (OWC_IR_LENGTH)")
    common.add_argument("--orders", type=int, choices=[0, 1, 2], help="ordem máxima de reflexão (OWC_ORDERS)")
    common.add_argument(
        "--sinr-mode",
        choices=[m.value for m in SinrMode],
        help="modelo de SINR (OWC_SINR_MODE)",
    )
    common.add_argument("--threads", type=int, help="threads do traçador (OWC_THREADS)")

    parser = argparse.ArgumentParser(
        prog="owc",
        description="Simulador de canal óptico indoor e alocação de recursos WDMA",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    build = sub.add_parser("build-db", parents=[common], help="traça a cena e grava o DB de canal")
    build.add_argument("--export-csv", action="store_true", help="exporta também o DB em CSV")
    sub.add_parser("analyze", parents=[common], help="banda de 3 dB e CDF a partir do DB")
    sub.add_parser("optimize", parents=[common], help="alocação ótima para um cenário")
    run = sub.add_parser("run", parents=[common], help="pipeline completo")
    run.add_argument("--export-csv", action="store_true", help="exporta também o DB em CSV")
    return parser


def _pick(flag: Any, env: Any) -> Any:
    return flag if flag not in (None, "") else env


def _number(flag: Any, env: Any, name: str, cast: type) -> Any:
    """Flag já vem convertida pelo argparse; a variável de ambiente chega como texto."""
    if flag not in (None, ""):
        return flag
    try:
        return cast(env)
    except (TypeError, ValueError) as exc:
        raise SceneConfigError(f"{name}: valor numérico inválido ({env!r})") from exc


def resolve_state(args: argparse.Namespace) -> dict[str, Any]:
    """Estado inicial do grafo com a precedência flag > env > padrão."""
    command = args.command

    out_dir = _pick(args.out, config.OWC_OUT)
    receiver = _pick(args.receiver, config.OWC_RECEIVER)
    if command in ("build-db", "run"):
        receiver = receiver or DEFAULT_RECEIVER

    db_file = _pick(args.db, config.OWC_DB)
    if not db_file:
        if command in ("analyze", "optimize"):
            raise SceneConfigError(f"{command}: informe o DB com --db ou OWC_DB")
        db_file = str(Path(out_dir) / f"channel-{receiver}.owcdb")

    scenario_file = _pick(args.scenario, config.OWC_SCENARIO)
    if command == "optimize" and not scenario_file:
        raise SceneConfigError("optimize: informe o cenário com --scenario ou OWC_SCENARIO")

    orders = _number(args.orders, config.OWC_ORDERS, "OWC_ORDERS", int)
    if orders not in (0, 1, 2):
        raise SceneConfigError(f"OWC_ORDERS: esperado 0, 1 ou 2 ({orders!r})")
    sinr_mode = _pick(args.sinr_mode, config.OWC_SINR_MODE)
    if sinr_mode not in [m.value for m in SinrMode]:
        raise SceneConfigError(f"OWC_SINR_MODE: esperado linear ou squared ({sinr_mode!r})")
    threads = _number(args.threads, config.OWC_THREADS, "OWC_THREADS", int)
    if threads < 1:
        raise SceneConfigError(f"--threads deve ser ≥ 1 ({threads})")

    return {
        "command": command,
        "scene_file": _pick(args.scene, config.OWC_SCENE),
        "receiver": receiver or None,
        "scenario_file": scenario_file or None,
        "db_file": db_file,
        "out_dir": out_dir,
        "dt": _number(args.dt, config.OWC_DT, "OWC_DT", float),
        "ir_length": _number(args.ir_length, config.OWC_IR_LENGTH, "OWC_IR_LENGTH", float),
        "orders": orders,
        "sinr_mode": sinr_mode,
        "threads": threads,
        "export_csv": bool(getattr(args, "export_csv", False)),
        "results": {},
    }


# ──────────────────────── Execução ────────────────────────


def run_pipeline(initial_state: dict[str, Any]) -> dict[str, Any]:
    """Executa o grafo LangGraph para um estado inicial já resolvido."""
    workflow = compile_graph()
    return asyncio.run(workflow.ainvoke(initial_state))


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        state = resolve_state(args)
        logger.info("Executando %s: saída em %s", state["command"], state["out_dir"])
        result = run_pipeline(state)
    except OwcError as exc:
        print(f"erro [{exc.category}]: {exc}", file=sys.stderr)
        return 2
    except Exception:
        logger.exception("Erro inesperado ao executar %s", args.command)
        return 1

    logger.info("Concluído: %d arquivos gravados", len(result.get("outputs", [])))
    return 0


if __name__ == "__main__":
    sys.exit(main())
