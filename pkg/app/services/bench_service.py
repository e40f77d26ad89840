"""
基准扫描：按 (seed, 实例序号) 确定性地生成实例，逐个求解器、逐 trial 计时并校验，输出 BenchRecord。
gap_pct 只在同一实例的 exact 求解给出 Optimal 时填写。
"""
import csv
import logging
import statistics
import time
from collections import defaultdict
from pathlib import Path

import numpy as np

from app.core.errors import ConfigurationError
from app.core.storage import ensure_parent_dir
from app.models.report import BenchRecord
from app.models.scenario import FOUR_CELL_CONFIG, ORU550_CONFIG, ScenarioConfig
from app.models.solution import SolveStatus
from app.services.net_model_service import generate_scenario
from app.services.problem_service import build_model
from app.services.qubo_service import DEFAULT_RATE_QUANTUM
from app.services.solve_service import SOLVERS, run_solver
from app.services.verify_service import verify_allocation

logger = logging.getLogger(__name__)

BENCH_PRESETS: dict[str, tuple[ScenarioConfig, ...]] = {
    "four-cell": (FOUR_CELL_CONFIG,),
    "oru550": (ORU550_CONFIG,),
    # 变量数约 100 → 4800
    "scaling": tuple(
        ScenarioConfig.uniform(g, r, u)
        for g, r, u in ((2, 10, 10), (2, 20, 15), (3, 30, 20), (4, 40, 30), (4, 60, 40), (5, 80, 60))
    ),
}


def parse_sizes(text: str) -> list[ScenarioConfig]:
    """"G:R:U,G:R:U" → 每项 G 个 gNodeB、共 R 个 RB、共 U 个用户（均分）。"""
    configs = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        if len(parts) != 3:
            raise ConfigurationError(f"尺寸格式应为 G:R:U，实际 {item!r}")
        try:
            g, r, u = (int(p) for p in parts)
        except ValueError as exc:
            raise ConfigurationError(f"尺寸必须是整数: {item!r}") from exc
        configs.append(ScenarioConfig.uniform(g, r, u))
    if not configs:
        raise ConfigurationError("至少需要一个实例尺寸")
    return configs


def derive_seed(*keys: int) -> int:
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])


def run_bench(
    configs: list[ScenarioConfig],
    solvers: list[str],
    trials: int = 1,
    seed: int = 0,
    time_limit: float | None = None,
    reads: int = 20,
    sweeps: int = 1000,
    rate_quantum: float = DEFAULT_RATE_QUANTUM,
) -> list[BenchRecord]:
    unknown = [s for s in solvers if s not in SOLVERS]
    if unknown:
        raise ConfigurationError(f"未知求解器: {', '.join(unknown)}")
    if trials < 1:
        raise ConfigurationError("trials 必须 ≥ 1")
    # exact 先跑，给同一实例的其它求解器提供 gap 分母
    ordered = sorted(solvers, key=lambda s: s != "exact")
    records: list[BenchRecord] = []
    for idx, config in enumerate(configs):
        scenario = generate_scenario(config, derive_seed(seed, idx))
        model = build_model(scenario)
        for trial in range(trials):
            trial_seed = derive_seed(seed, idx, trial)
            exact_optimum: float | None = None
            for name in ordered:
                t0 = time.perf_counter()
                try:
                    solution = run_solver(
                        name,
                        model,
                        seed=trial_seed,
                        time_limit=time_limit,
                        reads=reads,
                        sweeps=sweeps,
                        rate_quantum=rate_quantum,
                    )
                    wall_ms = (time.perf_counter() - t0) * 1000.0
                    feasible = verify_allocation(solution.assignment, scenario).feasible
                    objective = solution.objective_value
                except Exception:
                    wall_ms = (time.perf_counter() - t0) * 1000.0
                    logger.exception("[bench] 实例 %d 求解器 %s 失败", idx, name)
                    solution, feasible, objective = None, False, 0.0
                if name == "exact" and solution is not None and solution.status is SolveStatus.OPTIMAL:
                    exact_optimum = objective
                gap = None
                if exact_optimum is not None and exact_optimum > 0 and solution is not None:
                    gap = 100.0 * (exact_optimum - objective) / exact_optimum
                records.append(
                    BenchRecord(
                        instance_id=idx,
                        n_gnbs=len(scenario.gnbs),
                        n_rbs=scenario.n_rbs,
                        n_users=scenario.n_users,
                        n_vars=model.num_variables,
                        solver=name,
                        seed=trial_seed,
                        wall_ms=wall_ms,
                        objective_bps=objective,
                        feasible=feasible,
                        gap_pct=gap,
                    )
                )
                logger.info(
                    "[bench] 实例 %d trial %d %s 变量=%d 耗时=%.1fms 可行=%s",
                    idx,
                    trial,
                    name,
                    model.num_variables,
                    wall_ms,
                    feasible,
                )
    return records


def write_bench_csv(path: str | Path, records: list[BenchRecord]) -> Path:
    target = ensure_parent_dir(path)
    with target.open("w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=BenchRecord.columns())
        writer.writeheader()
        for record in records:
            row = {name: getattr(record, name) for name in BenchRecord.columns()}
            row["gap_pct"] = "" if record.gap_pct is None else record.gap_pct
            writer.writerow(row)
    return target


def summarize_csv(path: str | Path) -> list[dict]:
    """按 (n_vars, solver) 聚合：中位耗时、中位目标值、可行比例、中位 gap。"""
    try:
        with Path(path).open(newline="", encoding="utf-8") as f:
            rows = list(csv.DictReader(f))
    except OSError as exc:
        raise ConfigurationError(f"无法读取 CSV {path}: {exc}") from exc
    groups: dict[tuple[int, str], list[dict]] = defaultdict(list)
    for row in rows:
        groups[(int(row["n_vars"]), row["solver"])].append(row)
    summary = []
    for (n_vars, solver), items in sorted(groups.items()):
        gaps = [float(r["gap_pct"]) for r in items if r["gap_pct"] not in ("", None)]
        summary.append(
            {
                "n_vars": n_vars,
                "solver": solver,
                "runs": len(items),
                "median_wall_ms": statistics.median(float(r["wall_ms"]) for r in items),
                "median_objective_bps": statistics.median(float(r["objective_bps"]) for r in items),
                "feasible_rate": sum(r["feasible"] == "True" for r in items) / len(items),
                "median_gap_pct": statistics.median(gaps) if gaps else None,
            }
        )
    return summary
