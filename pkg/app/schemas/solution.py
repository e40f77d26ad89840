"""求解结果文件（JSON，version 1）。"""
from typing import Any, Literal

from pydantic import BaseModel, Field


class SolutionDocument(BaseModel):
    version: Literal[1] = 1
    solver: str = Field(..., description="求解后端名称")
    status: Literal["optimal", "feasible", "infeasible", "unknown"]
    objective_bps: float = Field(..., description="求解器给出的目标值（总速率）")
    wall_ms: float = Field(..., description="只计后端调用的墙钟时间（毫秒）")
    assignment: list[tuple[int, int, int]] = Field(
        default_factory=list, description="取 1 的变量，每项为 [rb_id, gnb_id, user_id]"
    )
    stats: dict[str, Any] = Field(default_factory=dict, description="后端统计信息")
    report: dict[str, Any] | None = Field(None, description="校验报告")
