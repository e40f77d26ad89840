"""
独立校验：只凭场景几何与原始分配重算速率、时延与 C1–C6，不读取模型里的速率表。
"""
import logging
from typing import Mapping

from app.core.errors import VerificationError
from app.models.problem import C1, C2, C3, C4, C5, VarLabel
from app.models.report import (
    ALL_FAMILIES,
    C6,
    FamilyResult,
    GnbMetrics,
    UserMetrics,
    VerificationReport,
    Violation,
)
from app.models.scenario import Scenario, SliceKind, SliceParams, UserEquipment
from app.services.net_model_service import channel_gain_fspl, dbm_to_watts, per_rb_rate

logger = logging.getLogger(__name__)


def _rb_rate(scenario: Scenario, user: UserEquipment) -> float:
    # 借用 RB 同样由归属站发射，增益只取决于到归属站的距离
    home = scenario.gnb_by_id[user.home_gnb]
    gain = channel_gain_fspl(scenario.distance(user), scenario.carrier_freq)
    return per_rb_rate(scenario.rb_bandwidth, dbm_to_watts(home.tx_dbm), gain, dbm_to_watts(scenario.noise_dbm))


def user_rate(assignment: Mapping[VarLabel, int], scenario: Scenario, user: UserEquipment) -> float:
    """r_mn = Σ_k x_kmn · r_kmn。"""
    picked = [x for var, x in assignment.items() if var.user_id == user.id and x]
    if not picked:
        return 0.0
    r = _rb_rate(scenario, user)
    return sum(x * r for x in picked)


def user_delay(rate: float, slice_params: SliceParams) -> float | None:
    """M/M/1 时延 d = 1 / (r/δ − λ)；r/δ ≤ λ 时队列发散，返回 None（Unstable）。"""
    service = rate / slice_params.packet_len
    if service <= slice_params.packet_rate:
        return None
    return 1.0 / (service - slice_params.packet_rate)


def _check_ids(assignment: Mapping[VarLabel, int], scenario: Scenario) -> None:
    for var in assignment:
        if var.rb_id not in scenario.rb_owner:
            raise VerificationError(f"{var}: 未知 RB {var.rb_id}")
        user = scenario.user_by_id.get(var.user_id)
        if user is None:
            raise VerificationError(f"{var}: 未知用户 {var.user_id}")
        if var.gnb_id != user.home_gnb:
            raise VerificationError(f"{var}: 服务站 {var.gnb_id} 不是用户的归属站 {user.home_gnb}")


def verify_allocation(assignment: Mapping[VarLabel, int], scenario: Scenario) -> VerificationReport:
    """未出现的变量视为 0。C5 直接用时延公式判断，不走线性化下限。"""
    _check_ids(assignment, scenario)
    violations: dict[str, list[Violation]] = {f: [] for f in ALL_FAMILIES}

    for var, x in sorted(assignment.items(), key=lambda item: item[0].sort_key):
        if x not in (0, 1):
            violations[C6].append(Violation(C6, f"rb={var.rb_id},user={var.user_id}", f"x={x!r} 不在 {{0,1}}"))

    active = {var: x for var, x in assignment.items() if x}
    per_user: dict[int, list[VarLabel]] = {u.id: [] for u in scenario.users}
    per_rb: dict[int, list[VarLabel]] = {}
    for var in active:
        per_user[var.user_id].append(var)
        per_rb.setdefault(var.rb_id, []).append(var)

    # C1
    for uid, vars_ in sorted(per_user.items()):
        count = sum(active[v] for v in vars_)
        if count > scenario.k_max:
            violations[C1].append(Violation(C1, f"user={uid}", f"{count} 个 RB > K_max={scenario.k_max}"))

    # C2
    for rb, vars_ in sorted(per_rb.items()):
        load = sum(active[v] for v in vars_)
        if load > 1:
            users = ",".join(str(v.user_id) for v in sorted(vars_, key=lambda v: v.user_id))
            violations[C2].append(Violation(C2, f"rb={rb}", f"同时分给用户 {users}"))

    # C3：x·|K_m| − Σ_{n'∈U_m} Σ_{k∈K_m} x_{kmn'} ≤ 0
    native_own: dict[int, float] = {g.id: 0.0 for g in scenario.gnbs}
    for var, x in active.items():
        if scenario.rb_owner[var.rb_id] == var.gnb_id:
            native_own[var.gnb_id] += x
    for var, x in sorted(active.items(), key=lambda item: item[0].sort_key):
        if scenario.rb_owner[var.rb_id] == var.gnb_id:
            continue
        pool = len(scenario.gnb_by_id[var.gnb_id].rb_ids)
        if x * pool - native_own[var.gnb_id] > 0:
            violations[C3].append(
                Violation(
                    C3,
                    f"rb={var.rb_id},user={var.user_id}",
                    f"gNodeB {var.gnb_id} 原生池只分出 {native_own[var.gnb_id]:g}/{pool} 就借用了外站 RB",
                )
            )

    users: list[UserMetrics] = []
    for user in sorted(scenario.users, key=lambda u: u.id):
        params = scenario.slice_params[user.slice]
        rate = user_rate(active, scenario, user)
        delay = user_delay(rate, params)
        mine = per_user[user.id]
        borrowed = sum(1 for v in mine if scenario.rb_owner[v.rb_id] != user.home_gnb)
        users.append(
            UserMetrics(
                user_id=user.id,
                gnb_id=user.home_gnb,
                slice=user.slice.value,
                achieved_rate=rate,
                delay=delay,
                rbs_assigned=len(mine),
                borrowed_rbs=borrowed,
            )
        )
        if user.slice is SliceKind.EMBB:
            if rate < params.rate_floor:
                violations[C4].append(
                    Violation(C4, f"user={user.id}", f"速率 {rate:.6g} bps < R_min={params.rate_floor:g}")
                )
        elif delay is None:
            violations[C5].append(Violation(C5, f"user={user.id}", f"速率 {rate:.6g} bps 下队列不稳定"))
        elif delay > params.delay_cap:
            violations[C5].append(
                Violation(C5, f"user={user.id}", f"时延 {delay:.6g} s > D_max={params.delay_cap:g}")
            )

    gnbs: list[GnbMetrics] = []
    for g in scenario.gnbs:
        own_users = scenario.users_by_gnb[g.id]
        native = set(g.rb_ids)
        gnbs.append(
            GnbMetrics(
                gnb_id=g.id,
                n_rbs=len(g.rb_ids),
                served_users=sum(1 for u in own_users if per_user[u.id]),
                native_served_users=sum(1 for u in own_users if any(v.rb_id in native for v in per_user[u.id])),
                rbs_used=sum(1 for rb in g.rb_ids if rb in per_rb),
                rbs_lent=sum(1 for rb in g.rb_ids if any(v.gnb_id != g.id for v in per_rb.get(rb, ()))),
                rbs_borrowed=sum(1 for u in own_users for v in per_user[u.id] if v.rb_id not in native),
            )
        )

    report = VerificationReport(
        families={f: FamilyResult(f, tuple(violations[f])) for f in ALL_FAMILIES},
        users=tuple(users),
        gnbs=tuple(gnbs),
        objective_bps=sum(u.achieved_rate for u in users),
    )
    logger.info("[verify_allocation] %s 目标=%.6g bps", report.summary(), report.objective_bps)
    return report
