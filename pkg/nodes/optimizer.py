"""Nó de otimização: alocação ótima e comparação com a atribuição publicada."""

import asyncio
import logging

from owc.allocation import AllocationProblem, SinrMode, evaluate_assignment, optimize
from owc.errors import AllocationError
from state import PipelineState

logger = logging.getLogger(__name__)


async def optimize_scenario(state: PipelineState) -> PipelineState:
    """Resolve a alocação ótima do cenário e avalia a atribuição publicada no mesmo DB."""
    db = state["db"]
    scenario = state.get("scenario")
    if scenario is None:
        raise AllocationError("nenhum cenário informado (use --scenario)")

    problem = AllocationProblem.from_db(db, list(scenario.users), SinrMode(state["sinr_mode"]))
    report = await asyncio.to_thread(optimize, problem)
    update: PipelineState = {"report": report}

    results = dict(state.get("results") or {})
    results["objective"] = report.objective
    for user in report.users:
        logger.info(
            "Usuário %d → AP %d, %s, elemento %d: SINR %.2f dB, taxa %.1f Gbps",
            user.user_id,
            user.choice.ap_id,
            user.choice.wavelength.value,
            user.choice.element_id,
            user.breakdown.sinr_db,
            user.data_rate / 1e9,
        )

    published = scenario.published_for(db.receiver_name)
    if published is not None:
        published_report = evaluate_assignment(problem, published)
        mismatched = [
            user_id
            for user_id in problem.user_ids
            if published.choices[user_id] != report.assignment.choices[user_id]
        ]
        results["published_objective"] = published_report.objective
        results["published_mismatched_users"] = mismatched
        update["published_report"] = published_report
        if mismatched:
            logger.warning(
                "Atribuição difere da publicada nos usuários %s (objetivo %.6g vs publicado %.6g)",
                mismatched,
                report.objective,
                published_report.objective,
            )
        else:
            logger.info("Atribuição ótima coincide com a publicada")

    update["results"] = results
    return update
