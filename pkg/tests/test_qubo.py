import itertools

import numpy as np
import pytest

from app.core.errors import ModelError
from app.models.problem import C1, C2, C4, ConstrainedModel, LinearConstraint, Sense, VarLabel
from app.models.qubo import PenaltyConfig, encode_slack, slack_weights
from app.services.problem_service import build_model
from app.services.qubo_service import (
    decode_sample,
    default_penalty_config,
    encode_assignment,
    min_penalty_bound,
    qubo_to_text,
    to_qubo,
)


def _var(i: int) -> VarLabel:
    return VarLabel(i, 0, 0)


def _random_model(rng: np.random.Generator, n: int) -> ConstrainedModel:
    variables = tuple(_var(i) for i in range(n))
    constraints = []
    for k in range(int(rng.integers(1, 4))):
        support = rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False)
        terms = tuple((variables[i], float(rng.integers(-2, 4))) for i in sorted(support))
        sense = Sense.LE if rng.random() < 0.6 else Sense.GE
        rhs = float(rng.integers(0, 4))
        constraints.append(LinearConstraint(C2, f"r{k}", terms, sense, rhs))
    objective = tuple(float(v) for v in rng.integers(0, 10, size=n))
    return ConstrainedModel(variables=variables, objective=objective, constraints=tuple(constraints))


def _all_bits(n: int) -> np.ndarray:
    return ((np.arange(2**n)[:, None] >> np.arange(n)) & 1).astype(np.int8)


def test_min_penalty_bound():
    a, b = _var(0), _var(1)
    model = ConstrainedModel(variables=(a, b), objective=(1.0, 2.0), constraints=())
    assert min_penalty_bound(model) == 4.0
    assert min_penalty_bound(ConstrainedModel(variables=(), objective=(), constraints=())) == 1.0


def test_bound_on_scenario_is_rate_sum_plus_one(four_cell_model):
    rates = four_cell_model.metadata.rate_table
    expected = sum(rates.values()) + 1.0
    assert min_penalty_bound(four_cell_model) == pytest.approx(expected, rel=1e-12)


def test_rejects_weight_below_bound():
    a = _var(0)
    model = ConstrainedModel(variables=(a,), objective=(5.0,), constraints=())
    with pytest.raises(ModelError):
        to_qubo(model, PenaltyConfig(penalty_weight=1.0))


def test_rejects_equality():
    a = _var(0)
    model = ConstrainedModel(
        variables=(a,),
        objective=(1.0,),
        constraints=(LinearConstraint(C1, "eq", ((a, 1.0),), Sense.EQ, 1.0),),
    )
    with pytest.raises(ModelError):
        to_qubo(model, default_penalty_config(model))


def test_slack_weights_cover_range():
    for rng in range(0, 40):
        weights = slack_weights(rng)
        assert sum(weights) == rng
        reachable = {sum(w for w, b in zip(weights, bits) if b) for bits in itertools.product((0, 1), repeat=len(weights))}
        assert reachable == set(range(rng + 1))
        for value in range(rng + 1):
            assert sum(w * b for w, b in zip(weights, encode_slack(value, weights))) == value


def test_one_unit_violation_costs_more_than_any_feasible():
    a, b, c = _var(0), _var(1), _var(2)
    model = ConstrainedModel(
        variables=(a, b, c),
        objective=(3.0, 2.0, 1.0),
        constraints=(LinearConstraint(C2, "C2[rb=0]", ((a, 1.0), (b, 1.0)), Sense.LE, 1.0),),
    )
    qubo = to_qubo(model, default_penalty_config(model))
    violating = qubo.energy(encode_assignment({a: 1, b: 1, c: 1}, qubo))
    for bits in _all_bits(3):
        assignment = dict(zip(model.variables, bits.tolist()))
        if model.is_feasible(assignment):
            assert violating > qubo.energy(encode_assignment(assignment, qubo))


def test_feasible_energy_is_negative_objective_and_ground_state_is_optimal():
    rng = np.random.default_rng(2024)
    checked = 0
    while checked < 30:
        n = int(rng.integers(2, 6))
        model = _random_model(rng, n)
        qubo = to_qubo(model, default_penalty_config(model))
        if qubo.num_bits > 12:
            continue
        checked += 1
        best_feasible = None
        for bits in _all_bits(n):
            assignment = dict(zip(model.variables, bits.tolist()))
            energy = qubo.energy(encode_assignment(assignment, qubo))
            if model.is_feasible(assignment):
                objective = model.objective_value(assignment)
                assert energy == pytest.approx(-objective, rel=1e-9, abs=1e-9)
                best_feasible = objective if best_feasible is None else max(best_feasible, objective)
        all_bits = _all_bits(qubo.num_bits)
        energies = [qubo.energy(b) for b in all_bits]
        ground = all_bits[int(np.argmin(energies))]
        decoded = decode_sample(ground, qubo).assignment
        if best_feasible is not None:
            assert model.is_feasible(decoded)
            assert model.objective_value(decoded) == pytest.approx(best_feasible)


def test_penalty_separation_exhaustive():
    rng = np.random.default_rng(7)
    for _ in range(20):
        model = _random_model(rng, int(rng.integers(2, 6)))
        qubo = to_qubo(model, default_penalty_config(model))
        feasible, infeasible = [], []
        for bits in _all_bits(model.num_variables):
            assignment = dict(zip(model.variables, bits.tolist()))
            energy = qubo.energy(encode_assignment(assignment, qubo))
            (feasible if model.is_feasible(assignment) else infeasible).append(energy)
        if feasible and infeasible:
            assert min(infeasible) > max(feasible)


def test_optimal_slack_minimizes_energy():
    rng = np.random.default_rng(11)
    model = _random_model(rng, 4)
    qubo = to_qubo(model, default_penalty_config(model))
    n_slack = qubo.num_bits - qubo.num_decision
    for decision in _all_bits(qubo.num_decision):
        best = min(
            qubo.energy(np.concatenate([decision, slack])) for slack in _all_bits(n_slack)
        ) if n_slack else qubo.energy(decision)
        assert qubo.energy(qubo.with_optimal_slack(decision)) == pytest.approx(best, abs=1e-9)


def test_real_valued_rows_are_quantized_conservatively(two_cell_scenario):
    model = build_model(two_cell_scenario)
    qubo = to_qubo(model, default_penalty_config(model))
    rng = np.random.default_rng(5)
    for _ in range(200):
        decision = (rng.random(qubo.num_decision) < 0.3).astype(np.int8)
        if qubo.penalty_units(decision) == 0:
            assert model.is_feasible(decode_sample(qubo.with_optimal_slack(decision), qubo).assignment)
    qos_blocks = [b for b in qubo.blocks if b.family == C4]
    assert qos_blocks and all(b.step == 1000.0 for b in qos_blocks)


def test_four_cell_qubo_registry(four_cell_model):
    qubo = to_qubo(four_cell_model, default_penalty_config(four_cell_model))
    assert qubo.num_decision == 1176
    assert len(qubo.blocks) == len(four_cell_model.constraints)
    assert set(qubo.slack_registry) == {c.label for c in four_cell_model.constraints}
    assert qubo.num_bits == 1176 + sum(len(b.slack_bits) for b in qubo.blocks)


def test_decode_rejects_wrong_length(two_cell_scenario):
    model = build_model(two_cell_scenario)
    qubo = to_qubo(model, default_penalty_config(model))
    with pytest.raises(ModelError):
        decode_sample(np.zeros(qubo.num_bits + 1, dtype=np.int8), qubo)


def test_encode_decode_inverse(two_cell_scenario):
    model = build_model(two_cell_scenario)
    qubo = to_qubo(model, default_penalty_config(model))
    assignment = {var: int(var.rb_id == var.user_id) for var in model.variables}
    assert decode_sample(encode_assignment(assignment, qubo), qubo).assignment == assignment


def test_zero_variable_qubo():
    model = ConstrainedModel(variables=(), objective=(), constraints=())
    qubo = to_qubo(model, default_penalty_config(model))
    assert qubo.num_bits == 0
    assert qubo.energy(np.zeros(0)) == 0.0


def test_text_export_header():
    a, b = _var(0), _var(1)
    model = ConstrainedModel(
        variables=(a, b),
        objective=(1.0, 2.0),
        constraints=(LinearConstraint(C1, "C1", ((a, 1.0), (b, 1.0)), Sense.LE, 1.0),),
    )
    text = qubo_to_text(to_qubo(model, default_penalty_config(model)))
    lines = text.splitlines()
    assert lines[0] == "# num_bits 3"
    assert lines[1].startswith("# offset ")
    assert all(len(line.split()) == 3 for line in lines[2:])


def test_two_var_example_has_unique_ground_state():
    a, b = _var(0), _var(1)
    model = ConstrainedModel(
        variables=(a, b),
        objective=(1.0, 2.0),
        constraints=(LinearConstraint(C2, "C2[rb=0]", ((a, 1.0), (b, 1.0)), Sense.LE, 1.0),),
    )
    qubo = to_qubo(model, default_penalty_config(model))
    assert qubo.num_bits == 3
    bits = _all_bits(3)
    energies = np.array([qubo.energy(x) for x in bits])
    ground = np.flatnonzero(energies == energies.min())
    assert len(ground) == 1
    assert decode_sample(bits[ground[0]], qubo).assignment == {a: 0, b: 1}
    assert energies.min() == pytest.approx(-2.0)


@pytest.mark.parametrize("seed", range(10))
def test_quantized_zero_penalty_implies_feasible(seed):
    rng = np.random.default_rng(300 + seed)
    n = int(rng.integers(3, 9))
    variables = tuple(_var(i) for i in range(n))
    constraints = []
    for k in range(int(rng.integers(1, 4))):
        support = sorted(rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False))
        terms = tuple((variables[i], float(rng.uniform(1e4, 3e5))) for i in support)
        sense = Sense.GE if rng.random() < 0.5 else Sense.LE
        rhs = float(rng.uniform(0.0, 0.6)) * sum(c for _, c in terms)
        constraints.append(LinearConstraint(C4, f"q{k}", terms, sense, rhs))
    model = ConstrainedModel(
        variables=variables,
        objective=tuple(float(v) for v in rng.uniform(1e5, 4e6, size=n)),
        constraints=tuple(constraints),
    )
    qubo = to_qubo(model, default_penalty_config(model))
    for decision in _all_bits(n):
        if qubo.penalty_units(decision) == 0:
            assert model.is_feasible(dict(zip(variables, decision.tolist())))
