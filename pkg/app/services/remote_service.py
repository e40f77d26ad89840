"""
远端采样客户端：提交（POST {endpoint}/jobs）后轮询（GET {endpoint}/jobs/{id}），直到作业结束。

endpoint 为带 API 前缀的基地址，如 http://127.0.0.1:8000/v1；
取值 "loopback" 时走进程内的 FastAPI 应用（httpx.ASGITransport），不经过网络。
"""
import asyncio
import logging
import time
from contextlib import asynccontextmanager
from functools import lru_cache
from typing import AsyncIterator

import httpx
from fastapi import FastAPI
from pydantic import ValidationError

from app.core.config import settings
from app.core.errors import JobNotFoundError, ProtocolError, RemoteError, TransportError
from app.models.problem import ConstrainedModel
from app.models.solution import Solution, SolveStatus
from app.schemas.jobs import JobCreatedResponse, JobParams, JobStatusResponse, JobSubmitRequest
from app.services.problem_service import model_to_wire

logger = logging.getLogger(__name__)

LOOPBACK = "loopback"


class Pending:
    """作业尚未结束。"""

    def __init__(self, status: str = "queued") -> None:
        self.status = status

    def __repr__(self) -> str:
        return f"Pending({self.status!r})"


@lru_cache(maxsize=1)
def loopback_app() -> FastAPI:
    """进程内共享的采样服务，提交与轮询必须落在同一张作业表上。"""
    from app.main import create_app

    return create_app()


@asynccontextmanager
async def _client(endpoint: str, client: httpx.AsyncClient | None) -> AsyncIterator[tuple[httpx.AsyncClient, str]]:
    if client is not None:
        yield client, endpoint.rstrip("/")
        return
    if endpoint == LOOPBACK:
        transport = httpx.ASGITransport(app=loopback_app())
        async with httpx.AsyncClient(transport=transport, base_url="http://loopback") as c:
            yield c, f"http://loopback{settings.api_prefix}"
        return
    async with httpx.AsyncClient(timeout=30.0) as c:
        yield c, endpoint.rstrip("/")


async def _request(client: httpx.AsyncClient, method: str, url: str, **kwargs) -> httpx.Response:
    try:
        response = await client.request(method, url, **kwargs)
    except httpx.TransportError as exc:
        raise TransportError(f"{method} {url} 失败: {exc}") from exc
    if response.status_code >= 500:
        raise TransportError(f"{method} {url} 返回 {response.status_code}")
    return response


def _parse(schema, response: httpx.Response):
    try:
        return schema.model_validate_json(response.content)
    except ValidationError as exc:
        raise ProtocolError(f"响应格式不符合线协议: {exc}") from exc


async def submit_remote(
    model: ConstrainedModel,
    endpoint: str = LOOPBACK,
    params: JobParams | None = None,
    client: httpx.AsyncClient | None = None,
) -> str:
    body = JobSubmitRequest(model=model_to_wire(model), params=params or JobParams())
    async with _client(endpoint, client) as (c, base):
        response = await _request(
            c,
            "POST",
            f"{base}/jobs",
            content=body.model_dump_json(),
            headers={"Content-Type": "application/json"},
        )
        if response.status_code >= 400:
            raise ProtocolError(f"提交被拒绝 {response.status_code}: {response.text}")
        created = _parse(JobCreatedResponse, response)
    logger.info("[submit_remote] endpoint=%s job=%s", endpoint, created.job_id)
    return created.job_id


async def poll_remote(
    job_id: str,
    model: ConstrainedModel,
    endpoint: str = LOOPBACK,
    client: httpx.AsyncClient | None = None,
) -> Solution | Pending:
    """作业未结束返回 Pending；结束后按模型变量顺序解码为 Solution。"""
    async with _client(endpoint, client) as (c, base):
        response = await _request(c, "GET", f"{base}/jobs/{job_id}")
        if response.status_code == 404:
            raise JobNotFoundError(f"作业 {job_id} 不存在")
        if response.status_code >= 400:
            raise ProtocolError(f"轮询失败 {response.status_code}: {response.text}")
        body = _parse(JobStatusResponse, response)

    if body.status in ("queued", "running"):
        return Pending(body.status)
    if body.status == "failed":
        raise RemoteError(f"作业 {job_id} 失败: {body.error}")
    if body.solution is None:
        raise ProtocolError(f"作业 {job_id} 已完成但没有 solution")
    wire = body.solution
    chosen = set(wire.assignments)
    if any(not 0 <= i < model.num_variables for i in chosen):
        raise ProtocolError("assignments 下标越界")
    return Solution(
        assignment={var: int(i in chosen) for i, var in enumerate(model.variables)},
        objective_value=wire.objective,
        status=SolveStatus(wire.status),
        solver_name="remote",
        wall_time=wire.wall_time_s,
        solver_stats={"job_id": job_id, "best_energy": wire.energy, "endpoint": endpoint},
    )


async def solve_remote(
    model: ConstrainedModel,
    endpoint: str = LOOPBACK,
    params: JobParams | None = None,
    poll_interval: float = 0.05,
    timeout: float | None = None,
) -> Solution:
    """submit + 轮询直到完成；timeout（秒）到期仍未完成抛 TransportError。"""
    t0 = time.perf_counter()
    async with _client(endpoint, None) as (c, base):
        job_id = await submit_remote(model, base, params, client=c)
        while True:
            result = await poll_remote(job_id, model, base, client=c)
            if isinstance(result, Solution):
                return result
            if timeout is not None and time.perf_counter() - t0 > timeout:
                raise TransportError(f"作业 {job_id} 在 {timeout}s 内未完成")
            await asyncio.sleep(poll_interval)
