"""
贪心基线：先在各站原生 RB 与本站用户之间按速率降序分配，再按速率降序处理借用对，全程不违反 C1–C3。
原生池因此先分给本站用户，不会被外站高速率用户提前借走。

速率相同时按 (rb_id, user_id) 升序裁决。C3 暂时挡住的借用对被挂起，
等对应 gNodeB 的原生池全部分给本站用户后再放回候选堆。
qos_first=True 时先给每个用户凑够 QoS 下限（原生 RB 优先），再做速率贪心。
"""
import heapq
import logging
import time

from app.core.errors import ModelError
from app.models.problem import ConstrainedModel, VarLabel
from app.models.scenario import Scenario
from app.models.solution import Solution, SolveStatus
from app.services.problem_service import qos_rate_floor

logger = logging.getLogger(__name__)


class _GreedyState:
    def __init__(self, scenario: Scenario, rates: dict[tuple[int, int], float]) -> None:
        self.scenario = scenario
        self.rates = rates
        self.rb_user: dict[int, int] = {}
        self.count: dict[int, int] = {u.id: 0 for u in scenario.users}
        # 每站原生 RB 中分给本站用户的个数
        self.native_own: dict[int, int] = {g.id: 0 for g in scenario.gnbs}
        self.selected: list[VarLabel] = []

    def is_borrow(self, rb: int, gnb_id: int) -> bool:
        return self.scenario.rb_owner[rb] != gnb_id

    def pool_full(self, gnb_id: int) -> bool:
        return self.native_own[gnb_id] == len(self.scenario.gnb_by_id[gnb_id].rb_ids)

    def blocked_for_good(self, var: VarLabel) -> bool:
        return var.rb_id in self.rb_user or self.count[var.user_id] >= self.scenario.k_max

    def allowed(self, var: VarLabel) -> bool:
        if self.blocked_for_good(var):
            return False
        return not self.is_borrow(var.rb_id, var.gnb_id) or self.pool_full(var.gnb_id)

    def take(self, var: VarLabel) -> bool:
        """分配一对；返回 True 表示这次分配让该站原生池刚好填满。"""
        self.rb_user[var.rb_id] = var.user_id
        self.count[var.user_id] += 1
        self.selected.append(var)
        if not self.is_borrow(var.rb_id, var.gnb_id):
            self.native_own[var.gnb_id] += 1
            return self.pool_full(var.gnb_id)
        return False

    def release(self, var: VarLabel) -> None:
        del self.rb_user[var.rb_id]
        self.count[var.user_id] -= 1
        self.selected.remove(var)
        if not self.is_borrow(var.rb_id, var.gnb_id):
            self.native_own[var.gnb_id] -= 1


def _qos_pass(state: _GreedyState) -> None:
    """按用户 id 依次凑 QoS 下限：原生 RB 按 id 升序，借用 RB 按速率降序；凑不够则撤回该用户的本轮分配。"""
    scenario = state.scenario
    for user in sorted(scenario.users, key=lambda u: u.id):
        floor = qos_rate_floor(scenario.slice_params[user.slice])
        native = scenario.gnb_by_id[user.home_gnb].rb_ids
        foreign = sorted(
            (rb for rb in scenario.rb_ids if scenario.rb_owner[rb] != user.home_gnb),
            key=lambda rb: (-state.rates[(rb, user.id)], rb),
        )
        taken: list[VarLabel] = []
        achieved = 0.0
        for rb in list(native) + foreign:
            if achieved >= floor:
                break
            var = VarLabel(rb, user.home_gnb, user.id)
            if state.allowed(var):
                state.take(var)
                taken.append(var)
                achieved += state.rates[(rb, user.id)]
        if achieved < floor:
            for var in reversed(taken):
                state.release(var)
            logger.info("[solve_greedy] 用户 %d 无法满足 QoS 下限 %.6g bps", user.id, floor)


def _rate_pass(state: _GreedyState, variables: tuple[VarLabel, ...]) -> None:
    # 原生对整体排在借用对之前，各自内部按速率降序
    heap = [
        (state.is_borrow(v.rb_id, v.gnb_id), -state.rates[(v.rb_id, v.user_id)], v.rb_id, v.user_id, v)
        for v in variables
    ]
    heapq.heapify(heap)
    parked: dict[int, list[tuple]] = {}
    while heap:
        entry = heapq.heappop(heap)
        var = entry[-1]
        if state.blocked_for_good(var):
            continue
        if not state.allowed(var):
            # 只剩 C3 挡着：原生池填满前挂起
            parked.setdefault(var.gnb_id, []).append(entry)
            continue
        if state.take(var):
            for item in parked.pop(var.gnb_id, []):
                heapq.heappush(heap, item)


def solve_greedy(model: ConstrainedModel, qos_first: bool = False) -> Solution:
    scenario = model.metadata.scenario
    if scenario is None:
        raise ModelError("贪心求解需要由 build_model 生成、携带场景的模型")
    t0 = time.perf_counter()
    state = _GreedyState(scenario, dict(model.metadata.rate_table))
    if qos_first:
        _qos_pass(state)
    _rate_pass(state, model.variables)
    wall = time.perf_counter() - t0

    chosen = set(state.selected)
    assignment = {var: int(var in chosen) for var in model.variables}
    violations = model.violations(assignment)
    status = SolveStatus.FEASIBLE if not violations else SolveStatus.UNKNOWN
    logger.info(
        "[solve_greedy] qos_first=%s 分配=%d 违反=%d 耗时=%.3fs",
        qos_first,
        len(chosen),
        len(violations),
        wall,
    )
    return Solution(
        assignment=assignment,
        objective_value=model.objective_value(assignment),
        status=status,
        solver_name="greedy-qos" if qos_first else "greedy",
        wall_time=wall,
        solver_stats={
            "qos_first": qos_first,
            "assigned": len(chosen),
            "violated": [c.label for c in violations],
        },
    )
