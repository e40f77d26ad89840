"""把约束模型降阶为 QUBO：目标取负，线性不等式约束变成带二进制松弛位的平方惩罚。"""
import logging
import math
import time
from typing import Mapping

import numpy as np
from scipy import sparse

from app.core.errors import ModelError
from app.models.problem import ConstrainedModel, Sense, VarLabel
from app.models.qubo import PenaltyBlock, PenaltyConfig, QuboModel, slack_weights
from app.models.solution import Allocation

logger = logging.getLogger(__name__)

# C4/C5 系数量化步长（bits/s）
DEFAULT_RATE_QUANTUM = 1000.0


def min_penalty_bound(model: ConstrainedModel) -> float:
    """U + 1，U 为目标可达上界。任何一个单位的约束违反都比整个目标更贵。"""
    upper = sum(max(0.0, c) for c in model.objective)
    upper += sum(max(0.0, q) for q in model.quadratic.values())
    return upper + 1.0


def default_penalty_config(model: ConstrainedModel, rate_quantum: float = DEFAULT_RATE_QUANTUM) -> PenaltyConfig:
    return PenaltyConfig(penalty_weight=min_penalty_bound(model), rate_quantum=rate_quantum)


def _is_integral(values: np.ndarray) -> bool:
    return bool(np.all(np.equal(np.mod(values, 1.0), 0.0)))


def _quantize(coefs: np.ndarray, rhs: float, step: float) -> tuple[np.ndarray, int]:
    """≤ 形式下保守量化：系数向上取整、右端向下取整，量化后可行 ⇒ 原约束可行。"""
    return np.ceil(coefs / step), int(math.floor(rhs / step))


def to_qubo(model: ConstrainedModel, cfg: PenaltyConfig) -> QuboModel:
    t0 = time.perf_counter()
    bound = min_penalty_bound(model)
    if cfg.penalty_weight < bound:
        raise ModelError(f"penalty_weight={cfg.penalty_weight} 低于下界 {bound}")
    lam = cfg.penalty_weight
    n = model.num_variables

    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    offset = 0.0

    # 退火器做最小化，目标取负
    if n:
        diag = np.arange(n)
        rows.append(diag)
        cols.append(diag)
        vals.append(-np.asarray(model.objective, dtype=np.float64))
    for (i, j), q in model.quadratic.items():
        rows.append(np.array([i]))
        cols.append(np.array([j]))
        vals.append(np.array([-q]))

    blocks: list[PenaltyBlock] = []
    next_bit = n
    for con in model.constraints:
        if con.sense is Sense.EQ:
            raise ModelError(f"{con.label}: 不支持等式约束")
        idx = np.array([model.index_of[var] for var, _ in con.terms], dtype=np.int64)
        coefs = np.array([coef for _, coef in con.terms], dtype=np.float64)
        rhs = float(con.rhs)
        if not (np.all(np.isfinite(coefs)) and math.isfinite(rhs)):
            raise ModelError(f"{con.label}: 系数或右端非有限值，松弛范围无界")
        if con.sense is Sense.GE:
            coefs, rhs = -coefs, -rhs
        if _is_integral(coefs) and float(rhs).is_integer():
            step = 1.0
            units, rhs_units = coefs, int(rhs)
        else:
            step = cfg.rate_quantum
            units, rhs_units = _quantize(coefs, rhs, step)
        keep = units != 0
        idx, units = idx[keep], units[keep]

        slack_range = rhs_units - int(np.minimum(units, 0).sum())
        if slack_range < 0:
            logger.warning("[to_qubo] %s 在任何取值下都不可满足，惩罚项将恒为正", con.label)
        weights = slack_weights(slack_range)
        slack_ids = np.arange(next_bit, next_bit + len(weights), dtype=np.int64)
        next_bit += len(weights)
        blocks.append(
            PenaltyBlock(
                label=con.label,
                family=con.family,
                bits=idx,
                coefs=units,
                rhs=rhs_units,
                step=step,
                slack_bits=tuple(int(s) for s in slack_ids),
                slack_weights=weights,
            )
        )

        # λ(v·y − b)² = λ[Σ v_i² y_i − 2b Σ v_i y_i + 2 Σ_{i<j} v_i v_j y_i y_j + b²]
        v = np.concatenate([units, np.asarray(weights, dtype=np.float64)])
        ids = np.concatenate([idx, slack_ids])
        if v.size:
            rows.append(ids)
            cols.append(ids)
            vals.append(lam * (v * v - 2.0 * rhs_units * v))
            iu, ju = np.triu_indices(v.size, k=1)
            a, b = ids[iu], ids[ju]
            rows.append(np.minimum(a, b))
            cols.append(np.maximum(a, b))
            vals.append(lam * 2.0 * v[iu] * v[ju])
        offset += lam * float(rhs_units) ** 2

    size = next_bit
    if rows:
        coo = sparse.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(size, size)
        )
        coefficients = coo.tocsr()
        coefficients.eliminate_zeros()
    else:
        coefficients = sparse.csr_matrix((size, size))

    qubo = QuboModel(
        num_bits=size,
        coefficients=coefficients,
        offset=offset,
        variables=model.variables,
        objective=model.objective,
        penalty_weight=lam,
        blocks=tuple(blocks),
        objective_quadratic=dict(model.quadratic),
    )
    logger.info(
        "[to_qubo] 决策位=%d 松弛位=%d 非零系数=%d 耗时=%.3fs",
        n,
        size - n,
        coefficients.nnz,
        time.perf_counter() - t0,
    )
    return qubo


def decode_sample(bits: np.ndarray, qubo: QuboModel) -> Allocation:
    """只取决策位、丢弃松弛位；不对可行性做任何判断。"""
    arr = np.asarray(bits)
    if arr.shape != (qubo.num_bits,):
        raise ModelError(f"bit 向量长度应为 {qubo.num_bits}，实际 {arr.shape}")
    return Allocation({var: int(arr[i]) for i, var in enumerate(qubo.variables)})


def encode_assignment(assignment: Mapping[VarLabel, int], qubo: QuboModel) -> np.ndarray:
    """decode_sample 的逆：决策位取自分配，松弛位取使惩罚最小的值。"""
    decision = np.zeros(qubo.num_decision, dtype=np.int8)
    for var, value in assignment.items():
        if var not in qubo.decision_map:
            raise ModelError(f"未知变量 {var}")
        decision[qubo.decision_map[var]] = value
    return qubo.with_optimal_slack(decision)


def qubo_to_text(qubo: QuboModel) -> str:
    """扁平系数列表：头部给出 num_bits 与 offset，之后每行 `i j value`。"""
    coo = qubo.coefficients.tocoo()
    order = np.lexsort((coo.col, coo.row))
    lines = [f"# num_bits {qubo.num_bits}", f"# offset {qubo.offset!r}"]
    lines.extend(f"{coo.row[k]} {coo.col[k]} {float(coo.data[k])!r}" for k in order)
    return "\n".join(lines) + "\n"
