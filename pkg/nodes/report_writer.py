"""Nó final: grava DB, tabelas CSV e o manifesto da execução.

Nada é gravado antes deste nó, então uma falha no meio do pipeline não deixa
saídas parciais.
"""

import asyncio
import logging
from pathlib import Path

from owc.allocation import write_allocation_report
from owc.analysis import write_bandwidth_table, write_cdf_table
from owc.channeldb import export_csv, save_db
from owc.manifest import RunManifest, write_manifest
from state import PipelineState

logger = logging.getLogger(__name__)


def _planned_outputs(state: PipelineState) -> dict[str, Path]:
    out = Path(state["out_dir"])
    receiver = state["db"].receiver_name
    outputs: dict[str, Path] = {}
    if "scene" in state:
        outputs["db"] = Path(state["db_file"])
        if state.get("export_csv"):
            outputs["channel_csv"] = out / f"channel-{receiver}.csv"
    if "cdf" in state:
        outputs["bandwidth"] = out / f"bandwidth-{receiver}.csv"
        outputs["cdf"] = out / f"cdf-{receiver}.csv"
    if "report" in state:
        stem = f"{state['scenario'].name}-{receiver}"
        outputs["allocation"] = out / f"allocation-{stem}.csv"
        if "published_report" in state:
            outputs["published"] = out / f"published-{stem}.csv"
    return outputs


def build_manifest(state: PipelineState, outputs: dict[str, Path]) -> RunManifest:
    db = state["db"]
    scene = db.scene_config()
    return RunManifest(
        command=state["command"],
        scene_file=state.get("scene_file") if "scene" in state else None,
        scene_hash=db.scene_hash,
        receiver=db.receiver_name,
        receiver_id=db.receiver_id,
        scenario_file=state.get("scenario_file") or None,
        db_file=state.get("db_file"),
        output_dir=state["out_dir"],
        dt_s=db.dt,
        ir_length_s=db.ir_length,
        max_order=db.max_order,
        sinr_mode=state["sinr_mode"] if "report" in state else None,
        lds_per_unit=scene.access_points[0].lds_per_unit if scene.access_points else None,
        outputs=[str(path) for path in outputs.values()],
    )


def _write_all(state: PipelineState, outputs: dict[str, Path], manifest: RunManifest) -> None:
    ref = manifest.reference()
    if "db" in outputs:
        save_db(state["db"], outputs["db"])
    if "channel_csv" in outputs:
        export_csv(state["db"], outputs["channel_csv"], ref)
    if "bandwidth" in outputs:
        write_bandwidth_table(state["metrics"], outputs["bandwidth"], ref)
        write_cdf_table(state["cdf"], outputs["cdf"], ref)
    if "allocation" in outputs:
        write_allocation_report(state["report"], outputs["allocation"], ref)
    if "published" in outputs:
        write_allocation_report(state["published_report"], outputs["published"], ref)
    write_manifest(manifest, state["out_dir"])


async def write_outputs(state: PipelineState) -> PipelineState:
    """Grava DB, tabelas CSV e o manifesto que as referencia."""
    outputs = _planned_outputs(state)
    manifest = build_manifest(state, outputs)
    manifest.results = dict(state.get("results") or {})
    await asyncio.to_thread(_write_all, state, outputs, manifest)

    written = [*manifest.outputs, str(Path(state["out_dir"]) / manifest.file_name)]
    logger.info("Saídas gravadas: %s", ", ".join(written))
    return {"manifest": manifest, "outputs": written}
