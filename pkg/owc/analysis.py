"""Métricas de frequência das respostas ao impulso e CDFs sobre a grade de localizações.

A banda de 3 dB é medida sobre o módulo da transformada da IR de potência óptica:
o primeiro f em que |H(f)|/|H(0)| ≤ 1/√2, interpolado linearmente entre amostras.

Com a LOS concentrada num único bin, |H(f)|/|H(0)| ≥ 1 − 2d, sendo d a fração
refletida do ganho DC. Abaixo de `NYQUIST_BOUND_SHARE` não há cruzamento e a banda
reportada é o limite de Nyquist 1/(2Δt).
"""

import csv
import logging
import math
from collections.abc import Callable, Iterable
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from owc.channeldb import ChannelDB, ChannelRecord, ImpulseResponse
from owc.errors import AnalysisError, ChannelIOError

logger = logging.getLogger(__name__)

MIN_FFT_SIZE = 2**16
_HALF_POWER = 1 / math.sqrt(2)
NYQUIST_BOUND_SHARE = (1 - _HALF_POWER) / 2

SelectionRule = Callable[[list[ChannelRecord]], ChannelRecord]


@dataclass(frozen=True)
class BandwidthResult:
    f_3db: float
    nyquist_cap: bool
    key: tuple[int, int, int] | None = None


@dataclass(frozen=True)
class CdfCurve:
    values: np.ndarray
    probabilities: np.ndarray


def _is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def _fft_size(length: int) -> int:
    return max(MIN_FFT_SIZE, 1 << max(0, length - 1).bit_length())


def frequency_response(ir: ImpulseResponse, n_fft: int) -> tuple[np.ndarray, np.ndarray]:
    """Espectro (frequências, H) da IR com zero-padding até `n_fft`; H(0) = ganho DC."""
    if not _is_power_of_two(n_fft) or n_fft < len(ir.bins):
        raise AnalysisError(f"n_fft={n_fft} deve ser potência de 2 e ≥ {len(ir.bins)} bins")
    spectrum = np.fft.rfft(ir.bins, n=n_fft)
    freqs = np.fft.rfftfreq(n_fft, d=ir.dt)
    return freqs, spectrum


def _require_energy(ir: ImpulseResponse) -> float:
    dc = ir.dc_gain
    if not dc > 0.0:
        raise AnalysisError("resposta ao impulso nula (ganho DC = 0)")
    return dc


def bandwidth_3db(ir: ImpulseResponse, key: tuple[int, int, int] | None = None) -> BandwidthResult:
    """Banda de 3 dB; sem cruzamento dentro da banda, reporta o limite de Nyquist."""
    _require_energy(ir)
    freqs, spectrum = frequency_response(ir, _fft_size(len(ir.bins)))
    ratio = np.abs(spectrum) / abs(spectrum[0])

    below = np.flatnonzero(ratio <= _HALF_POWER)
    if len(below) == 0:
        return BandwidthResult(f_3db=1 / (2 * ir.dt), nyquist_cap=True, key=key)

    k = int(below[0])
    if k == 0:
        return BandwidthResult(f_3db=float(freqs[0]), nyquist_cap=False, key=key)
    r0, r1 = ratio[k - 1], ratio[k]
    frac = (r0 - _HALF_POWER) / (r0 - r1)
    f_3db = float(freqs[k - 1] + frac * (freqs[k] - freqs[k - 1]))
    return BandwidthResult(f_3db=f_3db, nyquist_cap=False, key=key)


def rms_delay_spread(ir: ImpulseResponse) -> float:
    """Espalhamento de atraso RMS (s)."""
    dc = _require_energy(ir)
    t = ir.times()
    mean = float(ir.bins @ t) / dc
    second = float(ir.bins @ (t - mean) ** 2) / dc
    return math.sqrt(max(second, 0.0))


# ──────────────────────── CDF ────────────────────────


def max_dc_gain(records: list[ChannelRecord]) -> ChannelRecord:
    """Regra padrão: o registro de maior ganho DC (empate → menor chave)."""
    return max(records, key=lambda rec: (rec.dc_gain, tuple(-k for k in rec.key)))


def diffuse_share(record: ChannelRecord) -> float:
    """Fração do ganho DC que chega por reflexões."""
    dc = record.dc_gain
    if not dc > 0.0:
        raise AnalysisError(f"registro {record.key} sem potência recebida")
    return max(0.0, 1.0 - record.order_gains[0] / dc)


def empirical_cdf(samples: Iterable[float]) -> CdfCurve:
    values = np.sort(np.asarray(list(samples), dtype=float))
    if len(values) == 0:
        raise AnalysisError("sem amostras para a CDF")
    probabilities = np.arange(1, len(values) + 1) / len(values)
    return CdfCurve(values=values, probabilities=probabilities)


@dataclass(frozen=True)
class LocationBandwidth:
    location_id: int
    bandwidth: BandwidthResult
    diffuse_share: float


def location_bandwidths(db: ChannelDB, selection: SelectionRule = max_dc_gain) -> list[LocationBandwidth]:
    """Banda de cada localização, medida no registro escolhido pela regra."""
    if len(db) == 0:
        raise AnalysisError("DB vazio")
    by_location: dict[int, list[ChannelRecord]] = {}
    for key in sorted(db.records):
        by_location.setdefault(key[0], []).append(db.records[key])

    samples = []
    for location_id, records in by_location.items():
        chosen = selection(records)
        if chosen.dc_gain <= 0.0:
            logger.warning("Localização %d sem potência recebida: ignorada na CDF", location_id)
            continue
        samples.append(
            LocationBandwidth(
                location_id=location_id,
                bandwidth=bandwidth_3db(chosen.response, chosen.key),
                diffuse_share=diffuse_share(chosen),
            )
        )
    return samples


def bandwidth_cdf(db: ChannelDB, selection: SelectionRule = max_dc_gain) -> CdfCurve:
    """Uma amostra de banda por localização, do registro escolhido pela regra."""
    return empirical_cdf(sample.bandwidth.f_3db for sample in location_bandwidths(db, selection))


def dominates(upper: CdfCurve, lower: CdfCurve, quantiles: int = 101, strict: bool = True) -> bool:
    """True se `upper` fica ≥ `lower` em todos os quantis avaliados.

    Com `strict`, exige também um quantil estritamente maior; curvas iguais
    não se dominam.
    """
    qs = np.linspace(0.0, 1.0, quantiles)
    upper_q = np.quantile(upper.values, qs)
    lower_q = np.quantile(lower.values, qs)
    if not np.all(upper_q >= lower_q):
        return False
    return bool(np.any(upper_q > lower_q)) if strict else True


# ──────────────────────── Tabelas ────────────────────────


@dataclass(frozen=True)
class RecordMetrics:
    key: tuple[int, int, int]
    dc_gain: float
    bandwidth: BandwidthResult
    delay_spread: float


def analyze_records(db: ChannelDB) -> list[RecordMetrics]:
    """Banda, espalhamento e ganho DC de cada registro com potência recebida."""
    metrics = []
    for key in sorted(db.records):
        rec = db.records[key]
        if rec.dc_gain <= 0.0:
            continue
        metrics.append(
            RecordMetrics(
                key=key,
                dc_gain=rec.dc_gain,
                bandwidth=bandwidth_3db(rec.response, key),
                delay_spread=rms_delay_spread(rec.response),
            )
        )
    logger.info("Analisados %d registros com potência (de %d)", len(metrics), len(db))
    return metrics


def _open_csv(path: Path, header_comment: str | None):
    path.parent.mkdir(parents=True, exist_ok=True)
    fh = path.open("w", newline="", encoding="utf-8")
    if header_comment:
        fh.write(f"# {header_comment}\n")
    return fh


def write_bandwidth_table(
    metrics: list[RecordMetrics], path: str | Path, header_comment: str | None = None
) -> Path:
    path = Path(path)
    try:
        with _open_csv(path, header_comment) as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(
                ["location_id", "ap_id", "element_id", "f3db_hz", "nyquist_cap", "rms_delay_s", "dc_gain"]
            )
            for m in metrics:
                writer.writerow(
                    [
                        *m.key,
                        repr(m.bandwidth.f_3db),
                        int(m.bandwidth.nyquist_cap),
                        repr(m.delay_spread),
                        repr(m.dc_gain),
                    ]
                )
    except OSError as exc:
        raise ChannelIOError(f"{path}: falha ao gravar ({exc.strerror or exc})") from exc
    return path


def write_cdf_table(curve: CdfCurve, path: str | Path, header_comment: str | None = None) -> Path:
    path = Path(path)
    try:
        with _open_csv(path, header_comment) as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["value_hz", "probability"])
            for value, prob in zip(curve.values, curve.probabilities):
                writer.writerow([repr(float(value)), repr(float(prob))])
    except OSError as exc:
        raise ChannelIOError(f"{path}: falha ao gravar ({exc.strerror or exc})") from exc
    return path
