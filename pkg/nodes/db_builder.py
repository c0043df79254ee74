"""Nós do DB de canal: construção por traçado de raios ou leitura de arquivo."""

import asyncio
import logging

from owc.channeldb import load_db
from owc.errors import ChannelDBError
from owc.propagation import TracingSettings, build_channel_db
from state import PipelineState

logger = logging.getLogger(__name__)


async def build_db(state: PipelineState) -> PipelineState:
    """Traça todas as localizações da cena para o receptor escolhido."""
    scene = state["scene"]
    settings = TracingSettings(
        dt=state["dt"],
        ir_length=state["ir_length"],
        max_order=state["orders"],
    )
    db = await asyncio.to_thread(
        build_channel_db,
        scene,
        state["receiver"],
        scene.user_locations(),
        settings,
        state.get("threads", 1),
    )
    logger.info("DB construído: %d registros", len(db))
    return {"db": db}


async def load_db_file(state: PipelineState) -> PipelineState:
    """Carrega o DB e confere o receptor, se um foi pedido explicitamente."""
    db = await asyncio.to_thread(load_db, state["db_file"])

    receiver = state.get("receiver")
    if receiver and receiver != db.receiver_name:
        raise ChannelDBError(
            f"{state['db_file']}: DB é do receptor {db.receiver_name!r}, pedido {receiver!r}"
        )
    return {"db": db, "receiver": db.receiver_name}
