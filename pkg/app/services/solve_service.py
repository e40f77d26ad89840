"""统一的求解入口：按名字分派到 exact / greedy / sa / remote 后端。实验参数全部显式传入，不读服务配置。"""
import asyncio
import logging

from app.core.errors import ConfigurationError
from app.models.problem import ConstrainedModel
from app.models.solution import SearchLimits, Solution
from app.schemas.jobs import JobParams
from app.services.anneal_service import default_schedule, solve_sa
from app.services.exact_service import solve_exact
from app.services.greedy_service import solve_greedy
from app.services.qubo_service import DEFAULT_RATE_QUANTUM, default_penalty_config, to_qubo
from app.services.remote_service import LOOPBACK, solve_remote

logger = logging.getLogger(__name__)

SOLVERS = ("exact", "greedy", "greedy-qos", "sa", "remote")


def run_solver(
    name: str,
    model: ConstrainedModel,
    *,
    seed: int = 0,
    time_limit: float | None = None,
    reads: int = 20,
    sweeps: int = 1000,
    endpoint: str = LOOPBACK,
    workers: int = 1,
    max_nodes: int | None = None,
    rate_quantum: float = DEFAULT_RATE_QUANTUM,
) -> Solution:
    if name == "exact":
        return solve_exact(model, SearchLimits(max_nodes=max_nodes, max_seconds=time_limit))
    if name == "greedy":
        return solve_greedy(model)
    if name == "greedy-qos":
        return solve_greedy(model, qos_first=True)
    if name == "sa":
        qubo = to_qubo(model, default_penalty_config(model, rate_quantum=rate_quantum))
        schedule = default_schedule(qubo, seed=seed, reads=reads, sweeps=sweeps)
        return solve_sa(qubo, schedule, workers=workers, time_limit=time_limit)
    if name == "remote":
        params = JobParams(
            time_limit_s=time_limit, seed=seed, reads=reads, sweeps=sweeps, rate_quantum_bps=rate_quantum
        )
        return asyncio.run(solve_remote(model, endpoint, params))
    raise ConfigurationError(f"未知求解器 {name!r}，可选: {', '.join(SOLVERS)}")
