"""文件文档与 API 请求/响应 Pydantic 模型。按模块组织，调用方从本包或子模块导入。"""
from app.schemas.health import HealthResponse
from app.schemas.jobs import (
    JobCreatedResponse,
    JobParams,
    JobStatusResponse,
    JobSubmitRequest,
    WireConstraint,
    WireModel,
    WireSolution,
)
from app.schemas.scenario import GnbDoc, ScenarioDocument, SliceQos, SlicesDoc, UserDoc
from app.schemas.solution import SolutionDocument

__all__ = [
    "HealthResponse",
    "JobCreatedResponse",
    "JobParams",
    "JobStatusResponse",
    "JobSubmitRequest",
    "WireConstraint",
    "WireModel",
    "WireSolution",
    "GnbDoc",
    "ScenarioDocument",
    "SliceQos",
    "SlicesDoc",
    "UserDoc",
    "SolutionDocument",
]
