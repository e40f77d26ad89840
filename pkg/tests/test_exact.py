import numpy as np
import pytest

from app.core.errors import ModelError
from app.models.problem import C1, C2, C4, ConstrainedModel, LinearConstraint, Sense, VarLabel
from app.models.scenario import SliceKind
from app.models.solution import SearchLimits, SolveStatus
from app.services.exact_service import solve_exact
from app.services.greedy_service import solve_greedy
from app.services.problem_service import build_model, relaxed_knapsack_model


def _generic_model(rng: np.random.Generator) -> ConstrainedModel:
    n = int(rng.integers(1, 15))
    variables = tuple(VarLabel(i, 0, 0) for i in range(n))
    constraints = []
    for k in range(int(rng.integers(0, 6))):
        support = rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False)
        terms = tuple((variables[i], float(rng.integers(-2, 5))) for i in sorted(support))
        sense = Sense.LE if rng.random() < 0.7 else Sense.GE
        constraints.append(LinearConstraint(f"G{k}", f"g{k}", terms, sense, float(rng.integers(-1, 6))))
    objective = tuple(float(v) for v in rng.integers(-3, 10, size=n))
    return ConstrainedModel(variables=variables, objective=objective, constraints=tuple(constraints))


def _grid_model(rng: np.random.Generator) -> ConstrainedModel:
    """RB × 用户网格：每行至多 1、每列至多 k，部分列带加权下限，结构与分配问题相同。"""
    n_rows, n_cols = int(rng.integers(2, 5)), int(rng.integers(2, 5))
    k = int(rng.integers(1, 3))
    variables = tuple(VarLabel(r, 0, u) for r in range(n_rows) for u in range(n_cols))
    constraints = []
    for u in range(n_cols):
        terms = tuple((VarLabel(r, 0, u), 1.0) for r in range(n_rows))
        constraints.append(LinearConstraint(C1, f"C1[user={u}]", terms, Sense.LE, float(k)))
    for r in range(n_rows):
        terms = tuple((VarLabel(r, 0, u), 1.0) for u in range(n_cols))
        constraints.append(LinearConstraint(C2, f"C2[rb={r}]", terms, Sense.LE, 1.0))
    for u in range(n_cols):
        if rng.random() < 0.5:
            terms = tuple((VarLabel(r, 0, u), float(rng.integers(1, 6))) for r in range(n_rows))
            constraints.append(LinearConstraint(C4, f"C4[user={u}]", terms, Sense.GE, float(rng.integers(0, 9))))
    objective = tuple(float(v) for v in rng.integers(0, 20, size=len(variables)))
    return ConstrainedModel(variables=variables, objective=objective, constraints=tuple(constraints))


@pytest.mark.parametrize("seed", range(25))
def test_matches_brute_force_on_generic_models(seed, brute_force):
    model = _generic_model(np.random.default_rng(seed))
    expected = brute_force(model)
    solution = solve_exact(model)
    if expected is None:
        assert solution.status is SolveStatus.INFEASIBLE
    else:
        assert solution.status is SolveStatus.OPTIMAL
        assert model.is_feasible(solution.assignment)
        assert solution.objective_value == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize("seed", range(25))
def test_matches_brute_force_on_grid_models(seed, brute_force):
    model = _grid_model(np.random.default_rng(1000 + seed))
    expected = brute_force(model)
    solution = solve_exact(model)
    if expected is None:
        assert solution.status is SolveStatus.INFEASIBLE
    else:
        assert solution.status is SolveStatus.OPTIMAL
        assert model.is_feasible(solution.assignment)
        assert solution.objective_value == pytest.approx(expected, abs=1e-9)


def test_scenario_optimum_matches_brute_force(two_cell_scenario, brute_force):
    model = build_model(two_cell_scenario)
    solution = solve_exact(model)
    assert solution.status is SolveStatus.OPTIMAL
    assert solution.objective_value == pytest.approx(brute_force(model), rel=1e-12)
    assert model.is_feasible(solution.assignment)


def test_infeasible_scenario(crowded_scenario, brute_force):
    model = build_model(crowded_scenario)
    assert brute_force(model) is None
    solution = solve_exact(model)
    assert solution.status is SolveStatus.INFEASIBLE
    assert not any(solution.assignment.values())


def test_zero_variable_model_is_trivially_optimal():
    solution = solve_exact(ConstrainedModel(variables=(), objective=(), constraints=()))
    assert solution.status is SolveStatus.OPTIMAL
    assert solution.objective_value == 0.0
    assert solution.assignment == {}


def test_relaxation_dominates(two_cell_scenario, crowded_scenario):
    for scenario in (two_cell_scenario, crowded_scenario):
        full = solve_exact(build_model(scenario))
        relaxed = solve_exact(relaxed_knapsack_model(scenario))
        assert relaxed.status is SolveStatus.OPTIMAL
        if full.status is SolveStatus.OPTIMAL:
            assert relaxed.objective_value >= full.objective_value - 1e-6


def test_not_worse_than_greedy(two_cell_scenario):
    model = build_model(two_cell_scenario)
    exact = solve_exact(model)
    for qos_first in (False, True):
        greedy = solve_greedy(model, qos_first=qos_first)
        if greedy.status is SolveStatus.FEASIBLE:
            assert exact.objective_value >= greedy.objective_value - 1e-6


def test_node_limit_returns_incumbent_without_proof(four_cell_model):
    solution = solve_exact(four_cell_model, SearchLimits(max_nodes=20))
    assert solution.status in (SolveStatus.FEASIBLE, SolveStatus.UNKNOWN)
    assert solution.solver_stats["complete"] is False
    if solution.status is SolveStatus.FEASIBLE:
        assert four_cell_model.is_feasible(solution.assignment)


def test_incumbent_history_is_increasing():
    model = _grid_model(np.random.default_rng(3))
    history = solve_exact(model).solver_stats["incumbents"]
    objectives = [h["objective"] for h in history]
    assert objectives == sorted(objectives)
    assert all(h["elapsed_s"] >= 0 for h in history)


def test_quadratic_objective_rejected():
    a, b = VarLabel(0, 0, 0), VarLabel(1, 0, 0)
    model = ConstrainedModel(variables=(a, b), objective=(1.0, 1.0), constraints=(), quadratic={(0, 1): 2.0})
    with pytest.raises(ModelError):
        solve_exact(model)


def test_search_limits_validation():
    with pytest.raises(ValueError):
        SearchLimits(max_nodes=0)
    with pytest.raises(ValueError):
        SearchLimits(max_seconds=-1.0)


def test_near_tie_is_not_pruned(brute_force):
    # a 单独最好，但 b + c 比 a 多 3 bps
    a, b, c = (VarLabel(i, 0, 0) for i in range(3))
    model = ConstrainedModel(
        variables=(a, b, c),
        objective=(1e7 + 5.0, 5e6 + 4.0, 5e6 + 4.0),
        constraints=(
            LinearConstraint(C2, "ab", ((a, 1.0), (b, 1.0)), Sense.LE, 1.0),
            LinearConstraint(C2, "ac", ((a, 1.0), (c, 1.0)), Sense.LE, 1.0),
        ),
    )
    solution = solve_exact(model)
    assert solution.status is SolveStatus.OPTIMAL
    assert solution.objective_value == brute_force(model) == 1e7 + 8.0
    assert solution.assignment == {a: 0, b: 1, c: 1}


def test_relaxation_is_strictly_better_when_qos_floor_binds(make_scenario):
    # 单站 2 个 RB：松弛后近处用户独占两个 RB；完整模型必须分 1 个给远处用户
    scenario = make_scenario(
        gnbs=[(0.0, 0.0, (0, 1))],
        users=[(20.0, 0.0, SliceKind.EMBB, 0), (290.0, 0.0, SliceKind.EMBB, 0)],
        k_max=2,
    )
    full = solve_exact(build_model(scenario))
    relaxed = solve_exact(relaxed_knapsack_model(scenario))
    assert full.status is SolveStatus.OPTIMAL and relaxed.status is SolveStatus.OPTIMAL
    assert relaxed.objective_value > full.objective_value * (1 + 1e-6)
    assert sum(x for v, x in full.assignment.items() if v.user_id == 1) == 1


def test_greedy_incumbent_seeds_the_search(four_cell_model):
    solution = solve_exact(four_cell_model, SearchLimits(max_nodes=1))
    greedy_best = max(
        (s.objective_value for s in (solve_greedy(four_cell_model, qos_first=q) for q in (True, False))
         if s.status is SolveStatus.FEASIBLE),
        default=None,
    )
    if greedy_best is None:
        pytest.skip("两种贪心在该场景上都不可行")
    assert solution.status is SolveStatus.FEASIBLE
    assert four_cell_model.is_feasible(solution.assignment)
    assert solution.objective_value >= greedy_best - 1e-6
    first = solution.solver_stats["incumbents"][0]
    assert first["node"] == 0 and first["source"] in ("greedy", "greedy-qos")
