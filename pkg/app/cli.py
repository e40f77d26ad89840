"""命令行入口：生成场景、求解、校验、报表、基准与采样服务。
使用方式（在项目根目录）：
  python -m app.cli gen --preset four-cell --seed 1 --out data/four_cell.json
  python -m app.cli solve --scenario data/four_cell.json --solver sa --seed 7 --out data/four_cell_sa.json
  python -m app.cli verify --scenario data/four_cell.json --solution data/four_cell_sa.json
  python -m app.cli bench --preset scaling --solvers greedy,sa --csv data/bench.csv
  python -m app.cli serve --port 8000
退出码：0 成功 / 可行，1 结果不可行或未知，2 输入错误。
实验参数只来自命令行，不读环境变量。
"""
import argparse
import dataclasses
import io
import logging
import sys
import time

from app.core.errors import ConfigurationError, DomainError, ModelError, RanSliceError, VerificationError
from app.models.scenario import FOUR_CELL_CONFIG, ORU550_CONFIG, ScenarioConfig
from app.services.bench_service import BENCH_PRESETS, parse_sizes, run_bench, summarize_csv, write_bench_csv
from app.services.net_model_service import generate_scenario
from app.services.problem_service import build_model
from app.services.qubo_service import DEFAULT_RATE_QUANTUM
from app.services.remote_service import LOOPBACK
from app.services.solve_service import SOLVERS, run_solver
from app.services.storage_service import (
    assignment_from_document,
    read_scenario,
    read_solution,
    solution_to_document,
    write_scenario,
    write_solution,
)
from app.services.verify_service import verify_allocation

logger = logging.getLogger(__name__)

# 避免 Windows 终端中文乱码
if sys.platform == "win32" and hasattr(sys.stdout, "reconfigure"):
    sys.stdout = io.TextIOWrapper(sys.stdout.buffer, encoding="utf-8", errors="replace")
    sys.stderr = io.TextIOWrapper(sys.stderr.buffer, encoding="utf-8", errors="replace")

EXIT_OK, EXIT_INFEASIBLE, EXIT_INPUT = 0, 1, 2

GEN_PRESETS = {"four-cell": FOUR_CELL_CONFIG, "oru550": ORU550_CONFIG}
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _int_list(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"应为逗号分隔的整数: {text!r}") from exc


def _per_gnb(values: list[int], n_gnbs: int, name: str) -> tuple[int, ...]:
    """长度等于 gNodeB 数时逐站给出；只有一个数时视为总数，均分到各站。"""
    if len(values) == n_gnbs:
        return tuple(values)
    if len(values) == 1:
        base, rem = divmod(values[0], n_gnbs)
        return tuple(base + (1 if i < rem else 0) for i in range(n_gnbs))
    raise ConfigurationError(f"--{name} 需要 1 个或 {n_gnbs} 个数，实际 {len(values)} 个")


def cmd_gen(args: argparse.Namespace) -> int:
    if args.preset:
        config = dataclasses.replace(GEN_PRESETS[args.preset], urllc_fraction=args.urllc_frac, k_max=args.kmax)
    else:
        if args.gnbs < 1:
            raise ConfigurationError("--gnbs 必须 ≥ 1")
        config = ScenarioConfig(
            rbs_per_gnb=_per_gnb(_int_list(args.rbs), args.gnbs, "rbs"),
            users_per_gnb=_per_gnb(_int_list(args.users), args.gnbs, "users"),
            urllc_fraction=args.urllc_frac,
            k_max=args.kmax,
        )
    scenario = generate_scenario(config, args.seed)
    write_scenario(args.out, scenario)
    print(
        f"gNodeB={len(scenario.gnbs)} RB={scenario.n_rbs} 用户={scenario.n_users} "
        f"变量={scenario.n_rbs * scenario.n_users} -> {args.out}"
    )
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    scenario = read_scenario(args.scenario)
    model = build_model(scenario)
    solver = "greedy-qos" if args.solver == "greedy" and args.greedy_qos_first else args.solver
    t0 = time.perf_counter()
    solution = run_solver(
        solver,
        model,
        seed=args.seed,
        time_limit=args.time_limit,
        reads=args.reads,
        sweeps=args.sweeps,
        endpoint=args.endpoint,
        workers=args.workers,
        max_nodes=args.max_nodes,
        rate_quantum=args.rate_quantum,
    )
    solution = dataclasses.replace(solution, wall_time=time.perf_counter() - t0)
    report = verify_allocation(solution.assignment, scenario)
    if args.out:
        write_solution(args.out, solution_to_document(solution, report))
    print(
        f"solver={solution.solver_name} status={solution.status.value} "
        f"objective={solution.objective_value:.6g} bps wall={solution.wall_time * 1000:.1f} ms"
    )
    print(report.summary())
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def cmd_verify(args: argparse.Namespace) -> int:
    scenario = read_scenario(args.scenario)
    doc = read_solution(args.solution)
    report = verify_allocation(assignment_from_document(doc), scenario)
    print(report.summary())
    for family in report.failed_families():
        for v in report.families[family].violations:
            print(f"  {v.family} {v.subject}: {v.detail}")
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def _print_table(headers: list[str], rows: list[list]) -> None:
    cells = [[str(h) for h in headers]] + [["-" if c is None else str(c) for c in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    for r in cells:
        print("  ".join(c.rjust(w) for c, w in zip(r, widths)))


def cmd_report(args: argparse.Namespace) -> int:
    if args.csv:
        rows = summarize_csv(args.csv)
        _print_table(
            ["n_vars", "solver", "runs", "wall_ms", "objective_bps", "feasible", "gap_pct"],
            [
                [
                    r["n_vars"],
                    r["solver"],
                    r["runs"],
                    f"{r['median_wall_ms']:.1f}",
                    f"{r['median_objective_bps']:.6g}",
                    f"{r['feasible_rate']:.2f}",
                    None if r["median_gap_pct"] is None else f"{r['median_gap_pct']:.2f}",
                ]
                for r in rows
            ],
        )
        return EXIT_OK
    if not (args.scenario and args.solution):
        raise ConfigurationError("report 需要 --csv，或同时给出 --scenario 与 --solution")
    scenario = read_scenario(args.scenario)
    report = verify_allocation(assignment_from_document(read_solution(args.solution)), scenario)
    _print_table(
        ["gnb", "rbs", "users", "served", "native_served", "used", "lent", "borrowed", "util"],
        [
            [
                g.gnb_id,
                g.n_rbs,
                len(scenario.users_by_gnb[g.gnb_id]),
                g.served_users,
                g.native_served_users,
                g.rbs_used,
                g.rbs_lent,
                g.rbs_borrowed,
                f"{g.utilization:.2f}",
            ]
            for g in report.gnbs
        ],
    )
    print(report.summary())
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    if args.preset:
        configs = list(BENCH_PRESETS[args.preset])
    elif args.sizes:
        configs = parse_sizes(args.sizes)
    else:
        raise ConfigurationError("bench 需要 --sizes 或 --preset")
    solvers = [s.strip() for s in args.solvers.split(",") if s.strip()]
    records = run_bench(
        configs,
        solvers,
        trials=args.trials,
        seed=args.seed,
        time_limit=args.time_limit,
        reads=args.reads,
        sweeps=args.sweeps,
        rate_quantum=args.rate_quantum,
    )
    write_bench_csv(args.csv, records)
    print(f"{len(records)} 条记录 -> {args.csv}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("app.main:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="python -m app.cli", description="多切片 O-RAN RB 分配：建模、求解与校验")
    parser.add_argument("--log-level", default="INFO", help="日志级别（默认 INFO）")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="生成场景文件")
    p.add_argument("--preset", choices=sorted(GEN_PRESETS), help="使用命名配置，忽略 --gnbs/--rbs/--users")
    p.add_argument("--gnbs", type=int, default=4, help="gNodeB 数（默认 4）")
    p.add_argument("--rbs", default="9,12,11,10", help="每站 RB 数列表，或总数（均分）")
    p.add_argument("--users", default="8,7,6,7", help="每站用户数列表，或总数（均分）")
    p.add_argument("--urllc-frac", type=float, default=0.5, help="URLLC 用户比例（默认 0.5）")
    p.add_argument("--kmax", type=int, default=3, help="每用户 RB 上限 K_max（默认 3）")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="输出场景文件路径")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="求解并校验")
    p.add_argument("--scenario", required=True)
    p.add_argument("--solver", choices=[s for s in SOLVERS if s != "greedy-qos"], default="sa")
    p.add_argument("--greedy-qos-first", action="store_true", help="贪心先满足每个用户的 QoS 下限")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--time-limit", type=float, default=None, help="求解时间上限（秒）")
    p.add_argument("--max-nodes", type=int, default=None, help="exact 的节点上限")
    p.add_argument("--reads", type=int, default=20, help="sa/remote 重启次数（默认 20）")
    p.add_argument("--sweeps", type=int, default=1000, help="sa/remote 每次重启的扫描轮数（默认 1000）")
    p.add_argument("--workers", type=int, default=1, help="sa 并行重启的线程数")
    p.add_argument("--endpoint", default=LOOPBACK, help="remote 的服务地址（含 API 前缀），loopback 为进程内")
    p.add_argument(
        "--rate-quantum", type=float, default=DEFAULT_RATE_QUANTUM, help="sa/remote 的 C4/C5 系数量化步长 bps（默认 1000）"
    )
    p.add_argument("--out", default=None, help="输出结果文件路径")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="重新校验已保存的结果")
    p.add_argument("--scenario", required=True)
    p.add_argument("--solution", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="打印基准汇总或每站分配表")
    p.add_argument("--csv", default=None, help="bench 输出的 CSV")
    p.add_argument("--scenario", default=None)
    p.add_argument("--solution", default=None)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("bench", help="基准扫描，输出 CSV")
    p.add_argument("--sizes", default=None, help='实例尺寸列表，如 "2:10:10,4:40:30"（G:R:U）')
    p.add_argument("--preset", choices=sorted(BENCH_PRESETS), default=None)
    p.add_argument("--solvers", default="greedy,sa", help=f"逗号分隔，可选 {','.join(SOLVERS)}")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--reads", type=int, default=20)
    p.add_argument("--sweeps", type=int, default=1000)
    p.add_argument("--rate-quantum", type=float, default=DEFAULT_RATE_QUANTUM, help="C4/C5 系数量化步长 bps")
    p.add_argument("--csv", required=True, help="输出 CSV 路径")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", help="启动采样服务（loopback 线协议）")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = args.log_level.upper()
    if level not in LOG_LEVELS:
        print(f"未知日志级别 {args.log_level!r}，可选: {', '.join(LOG_LEVELS)}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigurationError, DomainError, ModelError, VerificationError) as exc:
        logger.error("[cli] %s", exc)
        return EXIT_INPUT
    except RanSliceError as exc:
        logger.error("[cli] %s", exc)
        return EXIT_INFEASIBLE
    except OSError as exc:
        logger.error("[cli] 文件读写失败: %s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
