"""
精确求解：0/1 线性规划上的深度优先分支定界。

变量按目标系数降序、(rb_id, user_id) 升序分支，先试 1，使第一次下潜与贪心结果一致。
每个节点先对 ≤ 约束做单位传播，再用组合上界剪枝（不解 LP）：
- 基数型约束族（系数全 1、支撑集互不相交，如 C1、C2）各自给出 top-cap 界；
- 两个覆盖同一变量集的基数族同时存在时，按 b-匹配（匈牙利算法）求两侧容量共同约束下的精确最大值，
  支撑集落在某一行内的 ≥ 约束折算成该行的最少选取个数 ⌈缺口 / 最大剩余系数⌉。
"""
import heapq
import logging
import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from app.core.errors import ModelError
from app.models.problem import ConstrainedModel, Sense
from app.models.solution import SearchLimits, Solution, SolveStatus
from app.services.greedy_service import solve_greedy

logger = logging.getLogger(__name__)

_EPS = 1e-9


@dataclass
class _Row:
    """≤ 形式的一条约束：Σ a_i x_i ≤ rhs。"""

    terms: list[tuple[int, float]]
    rhs: float
    tol: float
    max_abs: float
    lhs_fixed: float = 0.0
    min_free: float = 0.0  # 自由变量能贡献的最小值（负系数之和）


class _LimitReached(Exception):
    pass


class _PairBound:
    """行族 A（如每 RB 至多 1 次）× 列族 B（如每用户至多 K_max 次）上的 b-匹配上界。"""

    def __init__(self, rows: list[_Row], fam_a: list[int], fam_b: list[int], need_rows: list[tuple[int, int]]):
        self.rows = rows
        self.fam_a = fam_a
        self.fam_b = fam_b
        self.need_rows = need_rows  # (B 内行号, ≥ 约束的 ≤ 形式行号)
        self.pos: dict[int, tuple[int, int]] = {}
        col_of = {i: ib for ib, r in enumerate(fam_b) for i, _ in rows[r].terms}
        for ia, r in enumerate(fam_a):
            for i, _ in rows[r].terms:
                self.pos[i] = (ia, col_of[i])

    def bound(self, value: list[int], gain: list[float]) -> float | None:
        """自由变量部分的最大增益；None 表示该节点不可行。"""
        n_a, n_b = len(self.fam_a), len(self.fam_b)
        weights = np.full((n_a, n_b), np.nan)
        free_a = np.zeros(n_a, dtype=np.int64)
        free_b = np.zeros(n_b, dtype=np.int64)
        scale = 1.0
        for i, (ia, ib) in self.pos.items():
            if value[i] == -1:
                weights[ia, ib] = gain[i]
                free_a[ia] += 1
                free_b[ib] += 1
                scale += abs(gain[i])

        cap_a = np.array([int(self.rows[r].rhs + self.rows[r].tol - self.rows[r].lhs_fixed) for r in self.fam_a])
        cap_b = np.array([int(self.rows[r].rhs + self.rows[r].tol - self.rows[r].lhs_fixed) for r in self.fam_b])
        copies_a = np.clip(np.minimum(cap_a, free_a), 0, None)
        copies_b = np.clip(np.minimum(cap_b, free_b), 0, None)

        need = np.zeros(n_b, dtype=np.int64)
        for ib, r in self.need_rows:
            row = self.rows[r]
            deficit = row.lhs_fixed - row.rhs
            if deficit <= row.tol:
                continue
            amax = max((-a for j, a in row.terms if value[j] == -1), default=0.0)
            if amax <= 0:
                return None
            need[ib] = max(need[ib], math.ceil(deficit / amax - _EPS))
        if np.any(need > copies_b):
            return None
        total_forced = int(need.sum())
        if not copies_a.sum():
            return None if total_forced else 0.0

        row_ids = np.repeat(np.arange(n_a), copies_a)
        col_ids = np.repeat(np.arange(n_b), copies_b)
        # 每列的前 need[ib] 个副本为「必须匹配」副本
        start = np.concatenate([[0], np.cumsum(copies_b)[:-1]]) if n_b else np.zeros(0, dtype=np.int64)
        forced = (np.arange(col_ids.size) - start[col_ids]) < need[col_ids]

        big = scale * (total_forced + 1)
        w = weights[np.ix_(row_ids, col_ids)]
        real = ~np.isnan(w)
        w = np.where(real, w + big * forced[None, :], -4.0 * big)
        # 每个行副本都可以落到一个零收益的哑列上，即不选
        w = np.hstack([w, np.zeros((row_ids.size, row_ids.size))])
        ri, ci = linear_sum_assignment(w, maximize=True)
        chosen = ci < col_ids.size
        matched_forced = int(np.count_nonzero(forced[ci[chosen]] & real[ri[chosen], ci[chosen]]))
        if matched_forced < total_forced:
            return None
        return float(w[ri, ci].sum()) - big * total_forced


class _BranchAndBound:
    def __init__(self, model: ConstrainedModel, limits: SearchLimits) -> None:
        self.model = model
        self.limits = limits
        n = model.num_variables
        self.gain = list(model.objective)
        self.value = [-1] * n  # -1 表示自由
        self.rows: list[_Row] = []
        self.var_rows: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        row_family = self._build_rows()
        self.card_families = self._cardinality_families(row_family)
        self.pair = self._pair_bound()
        self.order = sorted(range(n), key=lambda i: (-self.gain[i], model.variables[i].sort_key))

        self.trail: list[int] = []
        self.current = 0.0
        self.best = float("-inf")
        self.best_values: list[int] | None = None
        self.nodes = 0
        self.history: list[dict] = []
        self.t_start = time.perf_counter()

    def _build_rows(self) -> list[str]:
        index = self.model.index_of
        row_family: list[str] = []
        for con in self.model.constraints:
            terms = [(index[var], float(coef)) for var, coef in con.terms if coef != 0]
            forms = []
            if con.sense in (Sense.LE, Sense.EQ):
                forms.append((terms, float(con.rhs)))
            if con.sense in (Sense.GE, Sense.EQ):
                forms.append(([(i, -a) for i, a in terms], -float(con.rhs)))
            for row_terms, rhs in forms:
                row = _Row(
                    terms=row_terms,
                    rhs=rhs,
                    tol=_EPS * max(1.0, abs(rhs)),
                    max_abs=max((abs(a) for _, a in row_terms), default=0.0),
                    min_free=sum(a for _, a in row_terms if a < 0),
                )
                r = len(self.rows)
                self.rows.append(row)
                row_family.append(con.family)
                for i, a in row_terms:
                    self.var_rows[i].append((r, a))
        return row_family

    def _cardinality_families(self, row_family: list[str]) -> list[tuple[list[int], set[int]]]:
        """族内全部为「系数全 1、右端 ≥ 0、支撑集互不相交」的约束时，该族可用于组合上界。"""
        by_family: dict[str, list[int]] = {}
        for r, family in enumerate(row_family):
            by_family.setdefault(family, []).append(r)
        families = []
        for rows in by_family.values():
            covered: set[int] = set()
            usable = True
            for r in rows:
                row = self.rows[r]
                support = {i for i, _ in row.terms}
                if row.rhs < 0 or any(a != 1.0 for _, a in row.terms) or covered & support:
                    usable = False
                    break
                covered |= support
            if usable:
                families.append((rows, covered))
        return families

    def _need_rows(self, fam: list[int]) -> list[tuple[int, int]]:
        """≥ 约束（≤ 形式下系数全负、右端为负）且支撑集落在 fam 某一行内时，记为该行的最少选取要求。"""
        row_of: dict[int, int] = {}
        for k, r in enumerate(fam):
            for i, _ in self.rows[r].terms:
                row_of[i] = k
        result = []
        for r, row in enumerate(self.rows):
            if not row.terms or row.rhs >= 0 or any(a >= 0 for _, a in row.terms):
                continue
            owners = {row_of.get(i) for i, _ in row.terms}
            if len(owners) == 1 and None not in owners:
                result.append((owners.pop(), r))
        return result

    def _pair_bound(self) -> _PairBound | None:
        for x in range(len(self.card_families)):
            for y in range(x + 1, len(self.card_families)):
                (rows_x, cov_x), (rows_y, cov_y) = self.card_families[x], self.card_families[y]
                if cov_x != cov_y or not cov_x:
                    continue
                pairs = set()
                row_y = {i: k for k, r in enumerate(rows_y) for i, _ in self.rows[r].terms}
                unique = True
                for k, r in enumerate(rows_x):
                    for i, _ in self.rows[r].terms:
                        if (k, row_y[i]) in pairs:
                            unique = False
                        pairs.add((k, row_y[i]))
                if not unique:
                    continue
                need_x, need_y = self._need_rows(rows_x), self._need_rows(rows_y)
                if len(need_x) > len(need_y):
                    return _PairBound(self.rows, rows_y, rows_x, need_x)
                return _PairBound(self.rows, rows_x, rows_y, need_y)
        return None

    def _set(self, i: int, v: int, queue: list[int]) -> bool:
        self.value[i] = v
        self.trail.append(i)
        if v:
            self.current += self.gain[i]
        ok = True
        for r, a in self.var_rows[i]:
            row = self.rows[r]
            if a < 0:
                row.min_free -= a
            row.lhs_fixed += a * v
            if row.lhs_fixed + row.min_free > row.rhs + row.tol:
                ok = False
            queue.append(r)
        return ok

    def _undo(self, mark: int) -> None:
        while len(self.trail) > mark:
            i = self.trail.pop()
            v = self.value[i]
            if v:
                self.current -= self.gain[i]
            for r, a in self.var_rows[i]:
                row = self.rows[r]
                if a < 0:
                    row.min_free += a
                row.lhs_fixed -= a * v
            self.value[i] = -1

    def assign(self, i: int, v: int) -> bool:
        """赋值并传播到不动点；返回 False 表示出现冲突（状态仍可用 _undo 回滚）。"""
        queue: list[int] = []
        if not self._set(i, v, queue):
            return False
        return self._propagate(queue)

    def _propagate(self, queue: list[int]) -> bool:
        # 强制赋值不改变所在行的 slack
        while queue:
            row = self.rows[queue.pop()]
            slack = row.rhs + row.tol - row.lhs_fixed - row.min_free
            if slack < 0:
                return False
            if slack >= row.max_abs:
                continue
            for j, a in row.terms:
                if self.value[j] != -1 or abs(a) <= slack:
                    continue
                # a > 0 时取 1 会超限；a < 0 时取 0 会超限
                if not self._set(j, 0 if a > 0 else 1, queue):
                    return False
        return True

    def check_root(self) -> bool:
        return self._propagate(list(range(len(self.rows))))

    def upper_bound(self) -> float | None:
        free_gain = [g if (self.value[i] == -1 and g > 0) else 0.0 for i, g in enumerate(self.gain)]
        best = sum(free_gain)
        for family, covered in self.card_families:
            total = sum(g for i, g in enumerate(free_gain) if g > 0 and i not in covered)
            for r in family:
                row = self.rows[r]
                cap = int(row.rhs + row.tol - row.lhs_fixed)
                if cap <= 0:
                    continue
                gains = [free_gain[i] for i, _ in row.terms if free_gain[i] > 0]
                if gains:
                    total += sum(heapq.nlargest(cap, gains))
            best = min(best, total)
        if self.pair is not None:
            matched = self.pair.bound(self.value, self.gain)
            if matched is None:
                return None
            outside = sum(g for i, g in enumerate(free_gain) if g > 0 and i not in self.pair.pos)
            best = min(best, matched + outside)
        return self.current + best

    def _tick(self) -> None:
        self.nodes += 1
        if self.limits.max_nodes is not None and self.nodes > self.limits.max_nodes:
            raise _LimitReached
        if self.limits.max_seconds is not None and time.perf_counter() - self.t_start > self.limits.max_seconds:
            raise _LimitReached

    def _next_free(self) -> int | None:
        for i in self.order:
            if self.value[i] == -1:
                return i
        return None

    def _prunable(self, bound: float) -> bool:
        if self.best_values is None:
            return False
        # 只容忍浮点噪声，否则会剪掉目标差几 bps 的真实最优
        return bound <= self.best + _EPS * max(1.0, abs(self.best))

    def seed_incumbent(self, values: list[int], objective: float, source: str) -> None:
        """用外部给出的可行解作为初始 incumbent。"""
        if self.best_values is not None and objective <= self.best + _EPS * max(1.0, abs(self.best)):
            return
        self.best = objective
        self.best_values = list(values)
        self.history.append(
            {"node": 0, "elapsed_s": time.perf_counter() - self.t_start, "objective": objective, "source": source}
        )

    def _record(self) -> None:
        if self.best_values is None or self.current > self.best + _EPS * max(1.0, abs(self.best)):
            self.best = self.current
            self.best_values = list(self.value)
            self.history.append(
                {
                    "node": self.nodes,
                    "elapsed_s": time.perf_counter() - self.t_start,
                    "objective": self.current,
                }
            )

    def _explore(self) -> bool:
        """处理当前节点；返回 True 表示需要继续分支。"""
        self._tick()
        if self._next_free() is None:
            self._record()
            return False
        bound = self.upper_bound()
        return bound is not None and not self._prunable(bound)

    def run(self) -> bool:
        """返回 True 表示搜索完整结束（最优性已证明）。"""
        if not self.check_root():
            return True
        stack: list[tuple[int, int, int | None]] = []
        ok = True
        try:
            while True:
                if ok and self._explore():
                    var = self._next_free()
                    mark = len(self.trail)
                    stack.append((mark, var, 0))
                    ok = self.assign(var, 1)
                    continue
                while stack:
                    mark, var, alt = stack.pop()
                    self._undo(mark)
                    if alt is not None:
                        stack.append((mark, var, None))
                        ok = self.assign(var, alt)
                        break
                else:
                    return True
        except _LimitReached:
            return False


def _warm_start(bb: _BranchAndBound, model: ConstrainedModel) -> None:
    """携带场景的模型先跑两种贪心，可行的结果作为初始 incumbent；QoS 下限收紧时首次下潜往往走不到可行叶子。"""
    if model.metadata.scenario is None:
        return
    for qos_first in (True, False):
        greedy = solve_greedy(model, qos_first=qos_first)
        if greedy.status is not SolveStatus.FEASIBLE:
            continue
        values = [greedy.assignment[var] for var in model.variables]
        bb.seed_incumbent(values, greedy.objective_value, greedy.solver_name)


def solve_exact(model: ConstrainedModel, limits: SearchLimits | None = None) -> Solution:
    """
    限额内搜索完毕则返回 Optimal（无可行解时 Infeasible）；
    触达 max_nodes / max_seconds 时返回当前 incumbent（Feasible），一个都没有则 Unknown。
    """
    if model.quadratic:
        raise ModelError("精确求解器只支持线性目标")
    limits = limits or SearchLimits()
    t0 = time.perf_counter()
    bb = _BranchAndBound(model, limits)
    _warm_start(bb, model)
    complete = bb.run()
    wall = time.perf_counter() - t0

    if bb.best_values is not None:
        assignment = {var: int(bb.best_values[i] == 1) for i, var in enumerate(model.variables)}
        status = SolveStatus.OPTIMAL if complete else SolveStatus.FEASIBLE
        objective = model.objective_value(assignment)
    else:
        assignment = {var: 0 for var in model.variables}
        status = SolveStatus.INFEASIBLE if complete else SolveStatus.UNKNOWN
        objective = 0.0

    logger.info(
        "[solve_exact] 变量=%d 节点=%d 状态=%s 目标=%.6g 耗时=%.3fs",
        model.num_variables,
        bb.nodes,
        status.value,
        objective,
        wall,
    )
    return Solution(
        assignment=assignment,
        objective_value=objective,
        status=status,
        solver_name="exact",
        wall_time=wall,
        solver_stats={
            "nodes": bb.nodes,
            "complete": complete,
            "incumbents": bb.history,
            "max_nodes": limits.max_nodes,
            "max_seconds": limits.max_seconds,
        },
    )
