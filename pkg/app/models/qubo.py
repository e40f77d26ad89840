"""QUBO 模型：上三角系数 + 常数偏移，记录松弛位登记以便解码。"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

import numpy as np
from scipy import sparse

from app.models.problem import VarLabel


@dataclass(frozen=True)
class PenaltyConfig:
    penalty_weight: float  # λ_pen
    rate_quantum: float = 1000.0  # bits/s，C4/C5 系数量化步长

    def __post_init__(self) -> None:
        if not self.penalty_weight > 0:
            raise ValueError("penalty_weight 必须 > 0")
        if not self.rate_quantum > 0:
            raise ValueError("rate_quantum 必须 > 0")


def slack_weights(slack_range: int) -> tuple[int, ...]:
    """覆盖 [0, slack_range] 的二进制展开：1, 2, 4, …，最后一位取残差权重使总和恰为 slack_range。"""
    if slack_range <= 0:
        return ()
    n_bits = math.ceil(math.log2(slack_range + 1))
    # log2 的浮点误差兜底
    while (1 << n_bits) - 1 < slack_range:
        n_bits += 1
    while n_bits > 1 and (1 << (n_bits - 1)) - 1 >= slack_range:
        n_bits -= 1
    head = tuple(1 << j for j in range(n_bits - 1))
    return head + (slack_range - sum(head),)


def encode_slack(value: int, weights: tuple[int, ...]) -> tuple[int, ...]:
    """把 [0, sum(weights)] 内的整数写成 weights 上的 0/1 组合。"""
    if not weights:
        return ()
    total = sum(weights)
    value = min(max(value, 0), total)
    last = 0
    if value > (1 << (len(weights) - 1)) - 1:
        last = 1
        value -= weights[-1]
    head = tuple((value >> j) & 1 for j in range(len(weights) - 1))
    return head + (last,)


@dataclass(frozen=True, eq=False)
class PenaltyBlock:
    """一条约束降阶后的记录：Σ a_i x_i + Σ w_j s_j − rhs 的平方惩罚（单位为量化步长）。"""

    label: str
    family: str
    bits: np.ndarray  # 决策位下标
    coefs: np.ndarray  # 整数单位系数（float 存储）
    rhs: int
    step: float
    slack_bits: tuple[int, ...]
    slack_weights: tuple[int, ...]

    @property
    def slack_range(self) -> int:
        return sum(self.slack_weights)

    def lhs(self, decision: np.ndarray) -> float:
        return float(self.coefs @ decision[self.bits]) if self.bits.size else 0.0


@dataclass(frozen=True, eq=False)
class QuboModel:
    num_bits: int
    coefficients: sparse.csr_matrix  # 上三角（i ≤ j）
    offset: float
    variables: tuple[VarLabel, ...]  # decision_map：第 i 位 ↔ variables[i]
    objective: tuple[float, ...]
    penalty_weight: float
    blocks: tuple[PenaltyBlock, ...] = ()
    objective_quadratic: Mapping[tuple[int, int], float] = field(default_factory=dict)

    @property
    def num_decision(self) -> int:
        return len(self.variables)

    @cached_property
    def decision_map(self) -> dict[VarLabel, int]:
        return {v: i for i, v in enumerate(self.variables)}

    @cached_property
    def slack_registry(self) -> dict[str, list[tuple[int, int]]]:
        return {b.label: list(zip(b.slack_bits, b.slack_weights)) for b in self.blocks}

    @cached_property
    def symmetric(self) -> sparse.csr_matrix:
        """对称化后的非对角部分（供局部场计算），对角线单独取 diagonal。"""
        upper = sparse.triu(self.coefficients, k=1)
        return (upper + upper.T).tocsr()

    def energy(self, bits: np.ndarray) -> float:
        x = np.asarray(bits, dtype=np.float64)
        if x.shape != (self.num_bits,):
            raise ValueError(f"bit 向量长度应为 {self.num_bits}，实际 {x.shape}")
        return float(x @ (self.coefficients @ x)) + self.offset

    def objective_value(self, decision: np.ndarray) -> float:
        x = np.asarray(decision[: self.num_decision], dtype=np.float64)
        value = float(np.dot(self.objective, x)) if self.num_decision else 0.0
        for (i, j), q in self.objective_quadratic.items():
            value += q * x[i] * x[j]
        return value

    def penalty_units(self, decision: np.ndarray) -> float:
        """松弛位取最优时的总惩罚（未乘 λ）。"""
        total = 0.0
        for b in self.blocks:
            excess = b.lhs(decision) - b.rhs
            if excess > 0:
                total += excess * excess
            elif -excess > b.slack_range:
                total += (-excess - b.slack_range) ** 2
        return total

    def with_optimal_slack(self, decision: np.ndarray) -> np.ndarray:
        """保留决策位，把每个约束的松弛位设成使惩罚最小的值。"""
        bits = np.zeros(self.num_bits, dtype=np.int8)
        bits[: self.num_decision] = np.asarray(decision[: self.num_decision], dtype=np.int8)
        for b in self.blocks:
            if not b.slack_bits:
                continue
            gap = int(round(b.rhs - b.lhs(bits)))
            for idx, bit in zip(b.slack_bits, encode_slack(gap, b.slack_weights)):
                bits[idx] = bit
        return bits
