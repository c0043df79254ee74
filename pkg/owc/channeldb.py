"""Banco de dados de canal: respostas ao impulso por (localização, AP, elemento).

Formato binário OWCDB1:
  magic "OWCDB1" | uint32 tamanho do cabeçalho | cabeçalho JSON (UTF-8, chaves ordenadas)
  | registros na ordem das chaves, cada um:
    <IIIiI4d (location_id, ap_id, element_id, start_bin, n_bins, dc_gain, los, first, second)
    seguido de n_bins valores float64 little-endian.

As respostas não dependem do comprimento de onda (refletância única por superfície);
a potência por λ é aplicada depois, na alocação.
"""

import csv
import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from owc.errors import ChannelDBError, ChannelIOError
from owc.receivers import ReceiverSpec, receiver_from_dict
from owc.scene import SceneConfig, Vec3, scene_from_dict

logger = logging.getLogger(__name__)

MAGIC = b"OWCDB1"
_RECORD = struct.Struct("<IIIiI4d")
_LOCATION_TOL = 1e-6

CSV_COLUMNS = ["location_id", "ap_id", "element_id", "dc_gain", "bin_index", "bin_value"]

Key = tuple[int, int, int]


@dataclass(frozen=True)
class ImpulseResponse:
    """Histograma de potência: bin k cobre [ (start_bin + k)·dt, (start_bin + k + 1)·dt )."""

    dt: float
    start_bin: int
    bins: np.ndarray

    @property
    def t0(self) -> float:
        return self.start_bin * self.dt

    @property
    def dc_gain(self) -> float:
        return float(self.bins.sum())

    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self.bins)) * self.dt

    @classmethod
    def from_histogram(cls, dt: float, histogram: np.ndarray) -> "ImpulseResponse":
        """Recorta zeros nas pontas do histograma completo (bin 0 = atraso 0)."""
        nonzero = np.flatnonzero(histogram)
        if len(nonzero) == 0:
            return cls(dt=dt, start_bin=0, bins=np.zeros(0))
        first, last = int(nonzero[0]), int(nonzero[-1])
        return cls(dt=dt, start_bin=first, bins=np.array(histogram[first : last + 1], dtype=float))


@dataclass(frozen=True)
class ChannelRecord:
    location_id: int
    ap_id: int
    element_id: int
    response: ImpulseResponse
    order_gains: tuple[float, float, float]

    @property
    def key(self) -> Key:
        return (self.location_id, self.ap_id, self.element_id)

    @property
    def dc_gain(self) -> float:
        return self.response.dc_gain


@dataclass
class ChannelDB:
    """Registros de canal e os metadados que os produziram."""

    scene: dict[str, Any]
    scene_hash: str
    receiver_name: str
    receiver: dict[str, Any]
    receiver_id: str
    dt: float
    ir_length: float
    max_order: int
    locations: list[Vec3]
    ap_ids: list[int]
    n_elements: int
    records: dict[Key, ChannelRecord] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.records)

    def record(self, location_id: int, ap_id: int, element_id: int) -> ChannelRecord:
        try:
            return self.records[(location_id, ap_id, element_id)]
        except KeyError:
            raise ChannelDBError(
                f"registro ausente: localização={location_id}, AP={ap_id}, elemento={element_id}"
            ) from None

    def location_id(self, point) -> int:
        """Id (1-based) da localização que coincide com `point`."""
        target = np.asarray(point, dtype=float)
        for index, location in enumerate(self.locations, start=1):
            if np.max(np.abs(np.asarray(location) - target)) <= _LOCATION_TOL:
                return index
        raise ChannelDBError(f"localização {tuple(point)} não existe no DB")

    def dc_gain_tensor(self) -> np.ndarray:
        """Ganhos DC em uma matriz (localização × AP × elemento), na ordem dos ids."""
        gains = np.zeros((len(self.locations), len(self.ap_ids), self.n_elements))
        for li in range(len(self.locations)):
            for ai, ap_id in enumerate(self.ap_ids):
                for e in range(self.n_elements):
                    gains[li, ai, e] = self.record(li + 1, ap_id, e + 1).dc_gain
        return gains

    def scene_config(self) -> SceneConfig:
        return scene_from_dict(self.scene, source="db.scene")

    def receiver_spec(self) -> ReceiverSpec:
        return receiver_from_dict(self.receiver, where="db.receiver")

    def header(self) -> dict[str, Any]:
        return {
            "format": MAGIC.decode("ascii"),
            "scene_hash": self.scene_hash,
            "scene": self.scene,
            "receiver_name": self.receiver_name,
            "receiver_id": self.receiver_id,
            "receiver": self.receiver,
            "dt_s": self.dt,
            "ir_length_s": self.ir_length,
            "max_order": self.max_order,
            "wavelength_independent": True,
            "locations": [list(loc) for loc in self.locations],
            "ap_ids": self.ap_ids,
            "n_elements": self.n_elements,
            "n_records": len(self.records),
        }


# ──────────────────────── Binário ────────────────────────


def save_db(db: ChannelDB, path: str | Path) -> Path:
    """Grava o DB no formato OWCDB1."""
    path = Path(path)
    header = json.dumps(db.header(), sort_keys=True, separators=(",", ":")).encode("utf-8")
    chunks = [MAGIC, struct.pack("<I", len(header)), header]
    for key in sorted(db.records):
        rec = db.records[key]
        chunks.append(
            _RECORD.pack(
                rec.location_id,
                rec.ap_id,
                rec.element_id,
                rec.response.start_bin,
                len(rec.response.bins),
                rec.dc_gain,
                *rec.order_gains,
            )
        )
        chunks.append(np.asarray(rec.response.bins, dtype="<f8").tobytes())
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(b"".join(chunks))
    except OSError as exc:
        raise ChannelIOError(f"{path}: falha ao gravar o DB ({exc.strerror or exc})") from exc
    logger.info("DB gravado em %s: %d registros", path, len(db.records))
    return path


def load_db(path: str | Path) -> ChannelDB:
    """Lê um arquivo OWCDB1."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ChannelDBError(f"{path}: DB não encontrado ou ilegível ({exc.strerror or exc})") from exc

    if not data.startswith(MAGIC):
        raise ChannelDBError(f"{path}: não é um arquivo OWCDB1")
    offset = len(MAGIC)
    try:
        (header_len,) = struct.unpack_from("<I", data, offset)
        offset += 4
        header = json.loads(data[offset : offset + header_len].decode("utf-8"))
        offset += header_len

        db = ChannelDB(
            scene=header["scene"],
            scene_hash=header["scene_hash"],
            receiver_name=header["receiver_name"],
            receiver=header["receiver"],
            receiver_id=header["receiver_id"],
            dt=header["dt_s"],
            ir_length=header["ir_length_s"],
            max_order=header["max_order"],
            locations=[tuple(loc) for loc in header["locations"]],
            ap_ids=header["ap_ids"],
            n_elements=header["n_elements"],
        )
        for _ in range(header["n_records"]):
            loc, ap, el, start, n_bins, _dc, los, first, second = _RECORD.unpack_from(data, offset)
            offset += _RECORD.size
            bins = np.frombuffer(data, dtype="<f8", count=n_bins, offset=offset).astype(float)
            offset += 8 * n_bins
            db.records[(loc, ap, el)] = ChannelRecord(
                location_id=loc,
                ap_id=ap,
                element_id=el,
                response=ImpulseResponse(dt=db.dt, start_bin=start, bins=bins),
                order_gains=(los, first, second),
            )
    except (struct.error, ValueError, KeyError, UnicodeDecodeError) as exc:
        raise ChannelDBError(f"{path}: DB corrompido ({exc})") from exc

    if offset != len(data):
        raise ChannelDBError(f"{path}: DB corrompido (bytes sobrando após os registros)")
    logger.info("DB carregado de %s: %d registros, receptor=%s", path, len(db), db.receiver_name)
    return db


# ──────────────────────── CSV ────────────────────────


def export_csv(db: ChannelDB, path: str | Path, header_comment: str | None = None) -> Path:
    """Exporta os bins não nulos; floats em repr para não perder precisão.

    Registro sem potência vira uma linha com `bin_index` vazio, assim toda
    chave do DB aparece no CSV.
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for key in sorted(db.records):
                rec = db.records[key]
                if not np.any(rec.response.bins):
                    writer.writerow([*key, repr(rec.dc_gain), "", repr(0.0)])
                    continue
                for k, value in enumerate(rec.response.bins):
                    if value != 0.0:
                        writer.writerow(
                            [*key, repr(rec.dc_gain), rec.response.start_bin + k, repr(float(value))]
                        )
    except OSError as exc:
        raise ChannelIOError(f"{path}: falha ao gravar CSV ({exc.strerror or exc})") from exc
    logger.info("CSV do canal exportado para %s", path)
    return path


def import_csv(path: str | Path) -> dict[Key, dict[int, float]]:
    """Lê o CSV exportado de volta: chave → {bin absoluto: valor}."""
    histograms: dict[Key, dict[int, float]] = {}
    try:
        with Path(path).open(newline="", encoding="utf-8") as fh:
            rows = csv.DictReader(line for line in fh if not line.startswith("#"))
            for row in rows:
                key = (int(row["location_id"]), int(row["ap_id"]), int(row["element_id"]))
                bins = histograms.setdefault(key, {})
                if row["bin_index"]:
                    bins[int(row["bin_index"])] = float(row["bin_value"])
    except OSError as exc:
        raise ChannelIOError(f"{path}: falha ao ler CSV ({exc.strerror or exc})") from exc
    except (KeyError, ValueError) as exc:
        raise ChannelDBError(f"{path}: CSV de canal inválido ({exc})") from exc
    return histograms
