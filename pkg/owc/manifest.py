"""Manifesto de execução: entradas e decisões de modelo que produziram cada saída.

Não contém carimbo de tempo nem contagem de threads, então execuções idênticas
geram manifestos (e saídas) byte a byte iguais.
"""

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from owc import __version__
from owc.errors import ChannelIOError

logger = logging.getLogger(__name__)

FOV_SEMANTICS = "semi-angle"


@dataclass
class RunManifest:
    command: str
    scene_file: str | None = None
    scene_hash: str | None = None
    receiver: str | None = None
    receiver_id: str | None = None
    scenario_file: str | None = None
    db_file: str | None = None
    output_dir: str | None = None
    dt_s: float | None = None
    ir_length_s: float | None = None
    max_order: int | None = None
    sinr_mode: str | None = None
    lds_per_unit: int | None = None
    fov_semantics: str = FOV_SEMANTICS
    tool_version: str = __version__
    outputs: list[str] = field(default_factory=list)
    results: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    @property
    def file_name(self) -> str:
        return f"manifest-{self.command}.json"

    @property
    def digest(self) -> str:
        """Hash das entradas; `results` fica de fora porque é gravado depois das saídas."""
        data = asdict(self)
        data.pop("results")
        canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    def reference(self) -> str:
        """Linha de comentário gravada no topo de cada CSV."""
        return f"manifest={self.file_name} id={self.digest}"


def write_manifest(manifest: RunManifest, out_dir: str | Path) -> Path:
    path = Path(out_dir) / manifest.file_name
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(manifest.to_json(), encoding="utf-8")
    except OSError as exc:
        raise ChannelIOError(f"{path}: falha ao gravar manifesto ({exc.strerror or exc})") from exc
    logger.info("Manifesto gravado em %s (id=%s)", path, manifest.digest)
    return path
