"""Nó de análise: banda de 3 dB por registro e CDF sobre as localizações."""

import asyncio
import logging

from owc.analysis import NYQUIST_BOUND_SHARE, analyze_records, empirical_cdf, location_bandwidths
from state import PipelineState

logger = logging.getLogger(__name__)


async def analyze(state: PipelineState) -> PipelineState:
    """Calcula as métricas de cada registro e a CDF de banda das localizações."""
    db = state["db"]
    metrics = await asyncio.to_thread(analyze_records, db)
    per_location = await asyncio.to_thread(location_bandwidths, db)
    cdf = empirical_cdf(sample.bandwidth.f_3db for sample in per_location)

    capped = sum(sample.bandwidth.nyquist_cap for sample in per_location)
    results = dict(state.get("results") or {})
    results["f3db_min_hz"] = float(cdf.values[0])
    results["f3db_max_hz"] = float(cdf.values[-1])
    results["bandwidth_convention"] = {
        "threshold": "|H(f)|/|H(0)| <= 1/sqrt(2), first crossing, linear interpolation",
        "selection": "max_dc_gain per location",
        "los": "single bin, point source",
        "nyquist_hz": 1 / (2 * db.dt),
    }
    results["f3db_nyquist_capped_locations"] = int(capped)
    results["max_diffuse_share"] = max(sample.diffuse_share for sample in per_location)
    results["nyquist_bound_share"] = NYQUIST_BOUND_SHARE
    logger.info(
        "CDF de banda (%s): %d localizações, mín=%.3f GHz, máx=%.3f GHz",
        db.receiver_name,
        len(cdf.values),
        cdf.values[0] / 1e9,
        cdf.values[-1] / 1e9,
    )
    if capped:
        logger.warning(
            "%d de %d localizações sem cruzamento de 3 dB: banda reportada no limite de Nyquist",
            capped,
            len(per_location),
        )
    return {"metrics": metrics, "cdf": cdf, "results": results}
