"""
采样服务端的作业执行：线协议模型 → QUBO → 模拟退火。

作业跑在进程级线程池里，不属于任何调用方的事件循环：提交与轮询可以分处不同的 asyncio.run，
作业不会随提交方的事件循环关闭而被取消。
惩罚权重与退火调度取默认值，因此同一模型、同一 seed 的结果与本地直接调用 solve_sa 一致。
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache

from app.core.config import settings
from app.core.errors import RanSliceError
from app.models.job import Job
from app.models.solution import Solution
from app.repositories.job_repository import JobTable, create_job, mark_done, mark_failed, mark_running
from app.schemas.jobs import JobParams, JobSubmitRequest, WireModel, WireSolution
from app.services.anneal_service import default_schedule, solve_sa
from app.services.problem_service import model_from_wire
from app.services.qubo_service import default_penalty_config, to_qubo

logger = logging.getLogger(__name__)


@lru_cache(maxsize=1)
def job_executor() -> ThreadPoolExecutor:
    return ThreadPoolExecutor(max_workers=settings.job_workers, thread_name_prefix="sampler-job")


def run_sampler(wire: WireModel, params: JobParams) -> Solution:
    model = model_from_wire(wire)
    quantum = params.rate_quantum_bps or settings.rate_quantum_bps
    qubo = to_qubo(model, default_penalty_config(model, rate_quantum=quantum))
    schedule = default_schedule(
        qubo,
        seed=params.seed,
        reads=params.reads or settings.default_reads,
        sweeps=params.sweeps or settings.default_sweeps,
    )
    return solve_sa(qubo, schedule, time_limit=params.time_limit_s)


def to_wire_solution(solution: Solution, wall_time_s: float) -> WireSolution:
    # assignment 的键序即线协议里的变量顺序
    return WireSolution(
        assignments=[i for i, x in enumerate(solution.assignment.values()) if x],
        objective=solution.objective_value,
        wall_time_s=wall_time_s,
        energy=solution.solver_stats.get("best_energy"),
        status=solution.status.value,
    )


def run_job(table: JobTable, job: Job, request: JobSubmitRequest) -> None:
    mark_running(table, job.id)
    try:
        solution = run_sampler(request.model, request.params)
    except RanSliceError as exc:
        logger.warning("[jobs] 作业 %s 失败: %s", job.id, exc)
        mark_failed(table, job.id, str(exc))
        return
    except Exception as exc:
        logger.exception("[jobs] 作业 %s 异常", job.id)
        mark_failed(table, job.id, f"{type(exc).__name__}: {exc}")
        return
    except BaseException as exc:
        # 线程被中断时也不能让作业永远停在 running
        mark_failed(table, job.id, f"作业被中断: {type(exc).__name__}")
        raise
    wall = time.perf_counter() - job.submitted_at
    mark_done(table, job.id, to_wire_solution(solution, wall).model_dump())
    logger.info("[jobs] 作业 %s 完成 目标=%.6g 耗时=%.3fs", job.id, solution.objective_value, wall)


def submit_job(table: JobTable, request: JobSubmitRequest) -> Job:
    """登记作业并交给进程级线程池执行，立即返回。"""
    job = create_job(table)
    job_executor().submit(run_job, table, job, request)
    logger.info(
        "[jobs] 提交作业 %s 变量=%d 约束=%d seed=%d",
        job.id,
        len(request.model.variables),
        len(request.model.constraints),
        request.params.seed,
    )
    return job
