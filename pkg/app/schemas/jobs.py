"""远端采样服务的线协议：POST /jobs 提交，GET /jobs/{id} 轮询。"""
from typing import Literal

from pydantic import BaseModel, Field


class WireConstraint(BaseModel):
    family: str = Field(..., description="约束族标签，如 C1")
    terms: list[tuple[int, float]] = Field(default_factory=list, description="[变量下标, 系数]")
    sense: Literal["<=", ">=", "=="]
    rhs: float
    label: str | None = Field(None, description="可读标签，可省略")


class WireModel(BaseModel):
    variables: list[str] = Field(..., description="变量标签，形如 x[rb,gnb,user]")
    objective: list[tuple[int, float]] = Field(default_factory=list, description="[变量下标, 系数]，最大化")
    constraints: list[WireConstraint] = Field(default_factory=list)


class JobParams(BaseModel):
    time_limit_s: float | None = Field(None, gt=0, description="退火时间上限（秒）")
    seed: int = 0
    reads: int | None = Field(None, ge=1, description="重启次数，缺省取服务端配置")
    sweeps: int | None = Field(None, ge=1, description="每次重启的扫描轮数，缺省取服务端配置")
    rate_quantum_bps: float | None = Field(None, gt=0, description="C4/C5 系数量化步长（bits/s），缺省取服务端配置")


class JobSubmitRequest(BaseModel):
    model: WireModel
    params: JobParams = Field(default_factory=JobParams)


class JobCreatedResponse(BaseModel):
    job_id: str


class WireSolution(BaseModel):
    assignments: list[int] = Field(default_factory=list, description="取 1 的变量下标")
    objective: float
    wall_time_s: float = Field(..., description="从提交到完成的时间，含排队")
    energy: float | None = Field(None, description="最优样本的 QUBO 能量")
    status: Literal["optimal", "feasible", "infeasible", "unknown"] = "unknown"


class JobStatusResponse(BaseModel):
    job_id: str
    status: Literal["queued", "running", "done", "failed"]
    solution: WireSolution | None = None
    error: str | None = None
