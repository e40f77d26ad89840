"""把场景翻译成约束二值优化模型：总速率目标、约束 C1–C5，以及只保留 C1、C2 的 0/1 背包松弛。"""
import logging
import re
import time

from app.core.errors import DomainError, ModelError
from app.models.problem import (
    C1,
    C2,
    C3,
    C4,
    C5,
    ConstrainedModel,
    LinearConstraint,
    ModelMetadata,
    Sense,
    VarLabel,
)
from app.models.scenario import Scenario, SliceKind, SliceParams
from app.schemas.jobs import WireConstraint, WireModel
from app.services.net_model_service import rate_table

logger = logging.getLogger(__name__)


def qos_rate_floor(slice_params: SliceParams) -> float:
    """
    切片的速率下限（bits/s）。
    URLLC：M/M/1 时延 d = 1/(r/δ − λ) ≤ D_max 等价于 r ≥ δ(λ + 1/D_max)；D_max → ∞ 时退化为 δλ。
    eMBB：直接取 R_min。
    """
    if slice_params.kind is SliceKind.EMBB:
        return float(slice_params.rate_floor)
    d_max = slice_params.delay_cap
    if d_max is None or not d_max > 0:
        raise DomainError(f"D_max 必须 > 0，实际 {d_max}")
    return slice_params.packet_len * (slice_params.packet_rate + 1.0 / d_max)


def _variables(scenario: Scenario) -> list[VarLabel]:
    users = sorted(scenario.users, key=lambda u: u.id)
    return [VarLabel(rb, u.home_gnb, u.id) for rb in scenario.rb_ids for u in users]


def build_model(scenario: Scenario) -> ConstrainedModel:
    """
    变量集为 K × U（服务站由用户隐含）。约束全部按硬约束生成：
    即使某个 QoS 下限在 K_max 个最好 RB 下也达不到，也照常输出，由求解器给出不可行结论。
    """
    t0 = time.perf_counter()
    rates = rate_table(scenario)
    variables = _variables(scenario)
    objective = tuple(rates[(v.rb_id, v.user_id)] for v in variables)
    users = sorted(scenario.users, key=lambda u: u.id)
    constraints: list[LinearConstraint] = []

    # C1：每用户 RB 数 ≤ K_max
    for u in users:
        terms = tuple((VarLabel(rb, u.home_gnb, u.id), 1.0) for rb in scenario.rb_ids)
        constraints.append(LinearConstraint(C1, f"C1[user={u.id}]", terms, Sense.LE, float(scenario.k_max)))

    # C2：每个 RB 至多分给一个用户
    for rb in scenario.rb_ids:
        terms = tuple((VarLabel(rb, u.home_gnb, u.id), 1.0) for u in users)
        constraints.append(LinearConstraint(C2, f"C2[rb={rb}]", terms, Sense.LE, 1.0))

    # C3：x_{k'mn}·|K_m| − Σ_{n'∈U_m} Σ_{k∈K_m} x_{kmn'} ≤ 0，逐字转写借用前提
    for g in scenario.gnbs:
        own = scenario.users_by_gnb[g.id]
        native = set(g.rb_ids)
        pool_size = float(len(g.rb_ids))
        native_terms = tuple(
            (VarLabel(k, g.id, other.id), -1.0) for other in own for k in sorted(native)
        )
        foreign = [rb for rb in scenario.rb_ids if rb not in native]
        for u in own:
            for rb in foreign:
                terms = ((VarLabel(rb, g.id, u.id), pool_size),) + native_terms
                constraints.append(
                    LinearConstraint(C3, f"C3[rb={rb},user={u.id}]", terms, Sense.LE, 0.0)
                )

    # C4（eMBB 速率下限）与 C5（URLLC 时延上限的线性化形式）
    for u in users:
        params = scenario.slice_params[u.slice]
        family = C4 if u.slice is SliceKind.EMBB else C5
        terms = tuple(
            (VarLabel(rb, u.home_gnb, u.id), rates[(rb, u.id)]) for rb in scenario.rb_ids
        )
        constraints.append(
            LinearConstraint(family, f"{family}[user={u.id}]", terms, Sense.GE, qos_rate_floor(params))
        )

    model = ConstrainedModel(
        variables=tuple(variables),
        objective=objective,
        constraints=tuple(constraints),
        metadata=ModelMetadata(scenario=scenario, rate_table=rates),
    )
    logger.info(
        "[build_model] 变量=%d 约束=%s 耗时=%.3fs",
        model.num_variables,
        model.family_counts(),
        time.perf_counter() - t0,
    )
    return model


def relaxed_knapsack_model(scenario: Scenario) -> ConstrainedModel:
    """去掉 C3、C4、C5 后的 0/1 背包松弛，只保留 C1、C2（C6 为变量的二值域）。"""
    return build_model(scenario).restricted((C1, C2))


def model_to_text(model: ConstrainedModel) -> str:
    """调试用的可读文本导出。"""
    lines = [f"# variables {model.num_variables}"]
    for i, (var, coef) in enumerate(zip(model.variables, model.objective)):
        lines.append(f"v {i} {var} obj={coef!r}")
    for (i, j), q in sorted(model.quadratic.items()):
        lines.append(f"q {i} {j} {q!r}")
    lines.append(f"# constraints {len(model.constraints)}")
    for con in model.constraints:
        body = " ".join(f"{coef!r}*{model.index_of[var]}" for var, coef in con.terms)
        lines.append(f"c {con.family} {con.label}: {body} {con.sense.value} {con.rhs!r}")
    return "\n".join(lines) + "\n"


_LABEL = re.compile(r"^x\[(-?\d+),(-?\d+),(-?\d+)\]$")


def parse_var_label(text: str) -> VarLabel:
    match = _LABEL.match(text.strip())
    if match is None:
        raise ModelError(f"无法解析变量标签: {text!r}")
    return VarLabel(*(int(g) for g in match.groups()))


def model_to_wire(model: ConstrainedModel) -> WireModel:
    """线协议里的 model 对象；只携带线性部分，场景与速率表不上传。"""
    index = model.index_of
    return WireModel(
        variables=[str(v) for v in model.variables],
        objective=[(i, c) for i, c in enumerate(model.objective) if c != 0],
        constraints=[
            WireConstraint(
                family=con.family,
                label=con.label,
                terms=[(index[var], coef) for var, coef in con.terms],
                sense=con.sense.value,
                rhs=con.rhs,
            )
            for con in model.constraints
        ],
    )


def model_from_wire(wire: WireModel) -> ConstrainedModel:
    variables = tuple(parse_var_label(text) for text in wire.variables)
    n = len(variables)
    objective = [0.0] * n
    for i, coef in wire.objective:
        if not 0 <= i < n:
            raise ModelError(f"目标项下标越界: {i}")
        objective[i] += coef
    constraints = []
    for k, con in enumerate(wire.constraints):
        for i, _ in con.terms:
            if not 0 <= i < n:
                raise ModelError(f"约束 {k} 下标越界: {i}")
        try:
            constraints.append(
                LinearConstraint(
                    family=con.family,
                    label=con.label or f"{con.family}[{k}]",
                    terms=tuple((variables[i], coef) for i, coef in con.terms),
                    sense=Sense(con.sense),
                    rhs=con.rhs,
                )
            )
        except ValueError as exc:
            raise ModelError(str(exc)) from exc
    try:
        return ConstrainedModel(variables=variables, objective=tuple(objective), constraints=tuple(constraints))
    except ValueError as exc:
        raise ModelError(str(exc)) from exc
