"""四站基准拓扑上对比各求解器：总速率、可行性，以及每个 gNodeB 的服务用户数与借出/借入 RB。
使用方式（在项目根目录）：
  python scripts/compare_four_cell.py
  python scripts/compare_four_cell.py --seed 3 --solvers greedy,greedy-qos,sa
  python scripts/compare_four_cell.py --solvers exact,sa --time-limit 30   # exact 限时 30 秒
"""
import argparse
import io
import os
import sys

# 避免 Windows 终端中文乱码
if sys.platform == "win32" and hasattr(sys.stdout, "reconfigure"):
    sys.stdout = io.TextIOWrapper(sys.stdout.buffer, encoding="utf-8", errors="replace")
    sys.stderr = io.TextIOWrapper(sys.stderr.buffer, encoding="utf-8", errors="replace")

_project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, _project_root)

from app.models.scenario import FOUR_CELL_CONFIG
from app.services.net_model_service import generate_scenario
from app.services.problem_service import build_model
from app.services.solve_service import SOLVERS, run_solver
from app.services.verify_service import verify_allocation


def run_compare(seed: int, solvers: list[str], time_limit: float | None, reads: int, sweeps: int) -> None:
    scenario = generate_scenario(FOUR_CELL_CONFIG, seed)
    model = build_model(scenario)
    print(f"场景 seed={seed}：gNodeB={len(scenario.gnbs)} RB={scenario.n_rbs} 用户={scenario.n_users} 变量={model.num_variables}")
    for name in solvers:
        solution = run_solver(name, model, seed=seed, time_limit=time_limit, reads=reads, sweeps=sweeps)
        report = verify_allocation(solution.assignment, scenario)
        served = sum(g.served_users for g in report.gnbs)
        print(
            f"\n[{solution.solver_name}] status={solution.status.value} 总速率={report.objective_bps / 1e6:.3f} Mbps "
            f"服务用户={served}/{scenario.n_users} 可行={report.feasible} 耗时={solution.wall_time:.3f}s"
        )
        for g in report.gnbs:
            n_users = len(scenario.users_by_gnb[g.gnb_id])
            print(
                f"  gNodeB {g.gnb_id}: 用户 {g.served_users}/{n_users}（本站 RB 服务 {g.native_served_users}）"
                f" RB 占用 {g.rbs_used}/{g.n_rbs} 借出 {g.rbs_lent} 借入 {g.rbs_borrowed}"
            )
        if not report.feasible:
            print("  违反约束族:", ", ".join(report.failed_families()))


def main():
    parser = argparse.ArgumentParser(description="四站基准拓扑上的求解器对比")
    parser.add_argument("--seed", type=int, default=1, help="场景与求解种子（默认 1）")
    parser.add_argument(
        "--solvers",
        default="greedy,greedy-qos,sa",
        help=f"逗号分隔，可选 {','.join(SOLVERS)}（默认 greedy,greedy-qos,sa）",
    )
    parser.add_argument("--time-limit", type=float, default=None, help="每个求解器的时间上限（秒）")
    parser.add_argument("--reads", type=int, default=20, help="sa 重启次数（默认 20）")
    parser.add_argument("--sweeps", type=int, default=1000, help="sa 每次重启扫描轮数（默认 1000）")
    args = parser.parse_args()
    solvers = [s.strip() for s in args.solvers.split(",") if s.strip()]
    run_compare(args.seed, solvers, args.time_limit, args.reads, args.sweeps)


if __name__ == "__main__":
    main()
