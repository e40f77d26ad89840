"""
QUBO 上的模拟退火：量子退火器在桌面规模上的经典替身。

每次重启（read）执行 `sweeps` 轮单比特翻转 Metropolis 扫描，温度按几何阶梯从初温降到终温。
重启 r 的随机数流只由 (seed, r) 决定，胜者按 (energy, read 序号) 字典序选出，
因此结果与重启是否并行执行无关。
"""
from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy import sparse

from app.models.qubo import QuboModel
from app.models.solution import AnnealSchedule, Solution, SolveStatus
from app.services.qubo_service import decode_sample

logger = logging.getLogger(__name__)


@njit(cache=True, nogil=True)
def _block_penalty(lhs, rhs, srange):
    if lhs > rhs:
        return (lhs - rhs) * (lhs - rhs)
    low = rhs - srange
    if lhs < low:
        return (low - lhs) * (low - lhs)
    return 0.0


@njit(cache=True, nogil=True)
def _anneal_marginal(
    lin, oq_indptr, oq_indices, oq_data, vb_indptr, vb_block, vb_coef, rhs, srange, lam, temps, x0, rand
):
    """只翻转决策位；每个约束的松弛位视为已取最优，惩罚为 λ·dist(lhs, [rhs−R, rhs])²。"""
    n = lin.shape[0]
    n_blocks = rhs.shape[0]
    x = x0.copy()
    lhs = np.zeros(n_blocks)
    for i in range(n):
        if x[i]:
            for p in range(vb_indptr[i], vb_indptr[i + 1]):
                lhs[vb_block[p]] += vb_coef[p]
    energy = 0.0
    for i in range(n):
        if x[i]:
            energy += lin[i]
            for p in range(oq_indptr[i], oq_indptr[i + 1]):
                j = oq_indices[p]
                if j > i and x[j]:
                    energy += oq_data[p]
    for b in range(n_blocks):
        energy += lam * _block_penalty(lhs[b], rhs[b], srange[b])

    best_x = x.copy()
    best = energy
    sweeps = temps.shape[0]
    trace = np.empty(sweeps)
    for s in range(sweeps):
        t = temps[s]
        for i in range(n):
            d = 1.0 - 2.0 * x[i]
            delta = lin[i] * d
            for p in range(oq_indptr[i], oq_indptr[i + 1]):
                if x[oq_indices[p]]:
                    delta += oq_data[p] * d
            for p in range(vb_indptr[i], vb_indptr[i + 1]):
                b = vb_block[p]
                old = _block_penalty(lhs[b], rhs[b], srange[b])
                new = _block_penalty(lhs[b] + vb_coef[p] * d, rhs[b], srange[b])
                delta += lam * (new - old)
            if delta <= 0.0 or rand[s, i] < math.exp(-delta / t):
                x[i] = 1 - x[i]
                energy += delta
                for p in range(vb_indptr[i], vb_indptr[i + 1]):
                    lhs[vb_block[p]] += vb_coef[p] * d
        if energy < best:
            best = energy
            best_x[:] = x
        trace[s] = best
    return best_x, best, trace


@njit(cache=True, nogil=True)
def _anneal_flip(diag, indptr, indices, data, temps, x0, rand):
    """在全部 QUBO 位（决策 + 松弛）上做单比特翻转，用局部场 h_i = Σ_j Q^sym_ij x_j 增量更新。"""
    n = diag.shape[0]
    x = x0.copy()
    h = np.zeros(n)
    energy = 0.0
    for i in range(n):
        if x[i]:
            energy += diag[i]
            for p in range(indptr[i], indptr[i + 1]):
                h[indices[p]] += data[p]
    for i in range(n):
        if x[i]:
            energy += 0.5 * h[i]

    best_x = x.copy()
    best = energy
    sweeps = temps.shape[0]
    trace = np.empty(sweeps)
    for s in range(sweeps):
        t = temps[s]
        for i in range(n):
            d = 1.0 - 2.0 * x[i]
            delta = d * (diag[i] + h[i])
            if delta <= 0.0 or rand[s, i] < math.exp(-delta / t):
                x[i] = 1 - x[i]
                energy += delta
                for p in range(indptr[i], indptr[i + 1]):
                    h[indices[p]] += data[p] * d
        if energy < best:
            best = energy
            best_x[:] = x
        trace[s] = best
    return best_x, best, trace


@dataclass(frozen=True)
class AnnealResult:
    bits: np.ndarray  # 最优样本（含松弛位）
    energy: float  # QUBO 能量（含 offset）
    read_index: int
    read_energies: tuple[float, ...]
    traces: tuple[np.ndarray, ...]  # 每次重启逐 sweep 的 best-so-far 能量（含 offset），单调不增
    wall_time: float


def default_schedule(
    qubo: QuboModel,
    seed: int = 0,
    reads: int = 20,
    sweeps: int = 1000,
    slack_mode: str = "marginal",
) -> AnnealSchedule:
    """初温 = λ_pen，终温 = 1e-3 × 最小非零 |目标系数|。"""
    t0 = qubo.penalty_weight
    nonzero = [abs(c) for c in qubo.objective if c != 0]
    t1 = 1e-3 * min(nonzero) if nonzero else 1e-3 * t0
    if not t1 < t0:
        t1 = 1e-3 * t0
    return AnnealSchedule(t0, t1, sweeps=sweeps, reads=reads, seed=seed, slack_mode=slack_mode)


def read_rng(seed: int, read_index: int) -> np.random.Generator:
    """重启 r 的随机数生成器，是 (seed, r) 的纯函数。"""
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, int(read_index)]))


def _marginal_arrays(qubo: QuboModel):
    n = qubo.num_decision
    lin = -np.asarray(qubo.objective, dtype=np.float64) if n else np.zeros(0)
    if qubo.objective_quadratic:
        keys = list(qubo.objective_quadratic)
        r = np.array([i for i, _ in keys])
        c = np.array([j for _, j in keys])
        v = -np.array([qubo.objective_quadratic[k] for k in keys], dtype=np.float64)
        oq = sparse.coo_matrix((np.r_[v, v], (np.r_[r, c], np.r_[c, r])), shape=(n, n)).tocsr()
    else:
        oq = sparse.csr_matrix((n, n))
    rows, cols, coefs = [], [], []
    for b_idx, block in enumerate(qubo.blocks):
        rows.append(block.bits)
        cols.append(np.full(block.bits.size, b_idx, dtype=np.int64))
        coefs.append(block.coefs)
    n_blocks = len(qubo.blocks)
    if rows:
        vb = sparse.coo_matrix(
            (np.concatenate(coefs), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n_blocks)
        ).tocsr()
    else:
        vb = sparse.csr_matrix((n, n_blocks))
    rhs = np.array([b.rhs for b in qubo.blocks], dtype=np.float64)
    srange = np.array([b.slack_range for b in qubo.blocks], dtype=np.float64)
    return (
        lin,
        oq.indptr.astype(np.int64),
        oq.indices.astype(np.int64),
        oq.data.astype(np.float64),
        vb.indptr.astype(np.int64),
        vb.indices.astype(np.int64),
        vb.data.astype(np.float64),
        rhs,
        srange,
    )


def _marginal_energy(qubo: QuboModel, bits: np.ndarray) -> float:
    """松弛位取最优时的 QUBO 能量：−objective + λ·penalty（与展开后的 Q 在数学上相等，但不经大数相消）。"""
    return -qubo.objective_value(bits) + qubo.penalty_weight * qubo.penalty_units(bits)


def sample_qubo(
    qubo: QuboModel,
    schedule: AnnealSchedule,
    workers: int = 1,
    time_limit: float | None = None,
) -> AnnealResult:
    """time_limit（秒）到期后不再启动新的重启，已启动的跑完；至少完成第 0 次。"""
    t_start = time.perf_counter()
    temps = np.geomspace(schedule.initial_temperature, schedule.final_temperature, schedule.sweeps)
    n_dec = qubo.num_decision

    if schedule.slack_mode == "marginal":
        arrays = _marginal_arrays(qubo)
        lam = float(qubo.penalty_weight)

        def run(read_index: int):
            rng = read_rng(schedule.seed, read_index)
            x0 = rng.integers(0, 2, size=n_dec).astype(np.int8)
            rand = rng.random((schedule.sweeps, n_dec))
            best_x, _, trace = _anneal_marginal(*arrays, lam, temps, x0, rand)
            bits = qubo.with_optimal_slack(best_x)
            return bits, _marginal_energy(qubo, bits), trace

    else:
        diag = qubo.coefficients.diagonal().astype(np.float64)
        sym = qubo.symmetric
        indptr = sym.indptr.astype(np.int64)
        indices = sym.indices.astype(np.int64)
        data = sym.data.astype(np.float64)

        def run(read_index: int):
            rng = read_rng(schedule.seed, read_index)
            x0 = rng.integers(0, 2, size=qubo.num_bits).astype(np.int8)
            rand = rng.random((schedule.sweeps, qubo.num_bits))
            best_x, _, trace = _anneal_flip(diag, indptr, indices, data, temps, x0, rand)
            bits = best_x.astype(np.int8)
            return bits, qubo.energy(bits), trace + qubo.offset

    def timed_run(read_index: int):
        if time_limit is not None and read_index > 0 and time.perf_counter() - t_start >= time_limit:
            return None
        return run(read_index)

    if workers > 1 and schedule.reads > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(timed_run, range(schedule.reads)))
    else:
        outcomes = [timed_run(r) for r in range(schedule.reads)]
    results = [o for o in outcomes if o is not None]

    energies = tuple(float(e) for _, e, _ in results)
    winner = min(range(len(results)), key=lambda r: (energies[r], r))
    wall = time.perf_counter() - t_start
    logger.info(
        "[sample_qubo] bits=%d reads=%d sweeps=%d mode=%s 最优能量=%.6g (read %d) 耗时=%.3fs",
        qubo.num_bits,
        schedule.reads,
        schedule.sweeps,
        schedule.slack_mode,
        energies[winner],
        winner,
        wall,
    )
    return AnnealResult(
        bits=results[winner][0],
        energy=energies[winner],
        read_index=winner,
        read_energies=energies,
        traces=tuple(t for _, _, t in results),
        wall_time=wall,
    )


def solve_sa(
    qubo: QuboModel,
    schedule: AnnealSchedule,
    workers: int = 1,
    time_limit: float | None = None,
) -> Solution:
    result = sample_qubo(qubo, schedule, workers=workers, time_limit=time_limit)
    allocation = decode_sample(result.bits, qubo)
    penalty = qubo.penalty_units(result.bits)
    # 退火不给出最优性证明；量化约束全满足时记为 feasible，否则交给校验器定论
    status = SolveStatus.FEASIBLE if penalty == 0 else SolveStatus.UNKNOWN
    return Solution(
        assignment=dict(allocation.assignment),
        objective_value=qubo.objective_value(result.bits),
        status=status,
        solver_name="sa",
        wall_time=result.wall_time,
        solver_stats={
            "reads": len(result.read_energies),
            "sweeps": schedule.sweeps,
            "slack_mode": schedule.slack_mode,
            "seed": schedule.seed,
            "best_read": result.read_index,
            "best_energy": result.energy,
            "penalty_units": penalty,
            "num_bits": qubo.num_bits,
        },
    )