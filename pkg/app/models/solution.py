"""求解结果、退火调度与分配。"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping

from app.models.problem import VarLabel


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Allocation:
    """x_kmn 的 0/1 取值；未出现的变量视为 0。"""

    assignment: Mapping[VarLabel, int]

    @property
    def selected(self) -> list[VarLabel]:
        return sorted((v for v, x in self.assignment.items() if x), key=lambda v: v.sort_key)

    def __len__(self) -> int:
        return sum(1 for x in self.assignment.values() if x)


@dataclass(frozen=True)
class Solution:
    assignment: Mapping[VarLabel, int]
    objective_value: float  # bits/s
    status: SolveStatus
    solver_name: str
    wall_time: float  # 秒
    solver_stats: Mapping[str, Any] = field(default_factory=dict)

    @property
    def allocation(self) -> Allocation:
        return Allocation(self.assignment)


@dataclass(frozen=True)
class AnnealSchedule:
    initial_temperature: float
    final_temperature: float
    sweeps: int = 1000
    reads: int = 20
    seed: int = 0
    # marginal：只翻转决策位，松弛位取闭式最优；flip：在全部 QUBO 位上单比特翻转
    slack_mode: str = "marginal"

    def __post_init__(self) -> None:
        if not self.initial_temperature > self.final_temperature > 0:
            raise ValueError("需要 initial_temperature > final_temperature > 0")
        if self.sweeps < 1 or self.reads < 1:
            raise ValueError("sweeps 与 reads 必须 ≥ 1")
        if self.slack_mode not in ("marginal", "flip"):
            raise ValueError(f"未知 slack_mode: {self.slack_mode}")


@dataclass(frozen=True)
class SearchLimits:
    """分支定界的搜索上限；None 表示不限。"""

    max_nodes: int | None = None
    max_seconds: float | None = None

    def __post_init__(self) -> None:
        if self.max_nodes is not None and self.max_nodes < 1:
            raise ValueError("max_nodes 必须 ≥ 1")
        if self.max_seconds is not None and not self.max_seconds > 0:
            raise ValueError("max_seconds 必须 > 0")
