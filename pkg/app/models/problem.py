"""约束二值优化模型（CQM 风格）：变量 x_kmn、线性目标、线性不等式约束。"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import TYPE_CHECKING, Iterable, Mapping

if TYPE_CHECKING:
    from app.models.scenario import Scenario


@dataclass(frozen=True)
class VarLabel:
    rb_id: int
    gnb_id: int  # 服务 gNodeB，即用户的归属 gNodeB
    user_id: int

    @property
    def sort_key(self) -> tuple[int, int]:
        """全局确定性排序 / 平局裁决键：(rb_id, user_id)。"""
        return (self.rb_id, self.user_id)

    def __str__(self) -> str:
        return f"x[{self.rb_id},{self.gnb_id},{self.user_id}]"


class Sense(str, Enum):
    LE = "<="
    GE = ">="
    EQ = "=="


# 约束族标签
C1, C2, C3, C4, C5 = "C1", "C2", "C3", "C4", "C5"
FAMILIES = (C1, C2, C3, C4, C5)


@dataclass(frozen=True)
class LinearConstraint:
    family: str
    label: str  # 例如 "C1[user=3]"，用于逐项列出违反
    terms: tuple[tuple[VarLabel, float], ...]
    sense: Sense
    rhs: float

    def __post_init__(self) -> None:
        labels = [v for v, _ in self.terms]
        if len(set(labels)) != len(labels):
            raise ValueError(f"{self.label}: 约束内变量重复")

    def lhs(self, assignment: Mapping[VarLabel, int]) -> float:
        return sum(coef * assignment.get(var, 0) for var, coef in self.terms)

    def is_satisfied(self, assignment: Mapping[VarLabel, int], tol: float = 1e-9) -> bool:
        value = self.lhs(assignment)
        slack = tol * max(1.0, abs(self.rhs))
        if self.sense is Sense.LE:
            return value <= self.rhs + slack
        if self.sense is Sense.GE:
            return value >= self.rhs - slack
        return abs(value - self.rhs) <= slack


@dataclass(frozen=True)
class ModelMetadata:
    scenario: "Scenario | None" = None
    # r_kmn 全精度表，(rb_id, user_id) → bits/s
    rate_table: Mapping[tuple[int, int], float] = field(default_factory=dict)


@dataclass(frozen=True)
class ConstrainedModel:
    """最大化问题。objective 与 variables 一一对应；quadratic 为 {(i, j): coef}（i < j），本构建器不使用。"""

    variables: tuple[VarLabel, ...]
    objective: tuple[float, ...]
    constraints: tuple[LinearConstraint, ...]
    quadratic: Mapping[tuple[int, int], float] = field(default_factory=dict)
    metadata: ModelMetadata = field(default_factory=ModelMetadata)

    def __post_init__(self) -> None:
        if len(self.objective) != len(self.variables):
            raise ValueError("objective 长度与 variables 不一致")
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("变量重复声明")
        declared = set(self.variables)
        for con in self.constraints:
            for var, _ in con.terms:
                if var not in declared:
                    raise ValueError(f"{con.label}: 引用了未声明变量 {var}")
        n = len(self.variables)
        for i, j in self.quadratic:
            if not 0 <= i < j < n:
                raise ValueError(f"二次项下标非法: ({i}, {j})")

    @cached_property
    def index_of(self) -> dict[VarLabel, int]:
        return {v: i for i, v in enumerate(self.variables)}

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    def objective_value(self, assignment: Mapping[VarLabel, int]) -> float:
        value = sum(c * assignment.get(v, 0) for v, c in zip(self.variables, self.objective))
        for (i, j), q in self.quadratic.items():
            value += q * assignment.get(self.variables[i], 0) * assignment.get(self.variables[j], 0)
        return value

    def violations(self, assignment: Mapping[VarLabel, int]) -> list[LinearConstraint]:
        return [c for c in self.constraints if not c.is_satisfied(assignment)]

    def is_feasible(self, assignment: Mapping[VarLabel, int]) -> bool:
        if any(value not in (0, 1) for value in assignment.values()):
            return False
        return all(c.is_satisfied(assignment) for c in self.constraints)

    def family_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for c in self.constraints:
            counts[c.family] = counts.get(c.family, 0) + 1
        return counts

    def restricted(self, families: Iterable[str]) -> "ConstrainedModel":
        """保留变量与目标，只留下指定约束族。"""
        keep = set(families)
        return ConstrainedModel(
            variables=self.variables,
            objective=self.objective,
            constraints=tuple(c for c in self.constraints if c.family in keep),
            quadratic=self.quadratic,
            metadata=self.metadata,
        )
