import numpy as np
import pytest

from app.models.problem import ConstrainedModel, Sense
from app.models.scenario import (
    DEFAULT_EMBB,
    DEFAULT_URLLC,
    FOUR_CELL_CONFIG,
    GNodeB,
    Scenario,
    SliceKind,
    UserEquipment,
)
from app.services.net_model_service import generate_scenario
from app.services.problem_service import build_model


def _make_scenario(gnbs, users, k_max=3, urllc=DEFAULT_URLLC, embb=DEFAULT_EMBB, radius=300.0):
    """gnbs: [(x, y, rb_ids)]；users: [(x, y, SliceKind, home_gnb)]。id 按顺序编号。"""
    return Scenario(
        gnbs=tuple(
            GNodeB(id=i, x=x, y=y, rb_ids=tuple(rbs), coverage_radius=radius) for i, (x, y, rbs) in enumerate(gnbs)
        ),
        users=tuple(
            UserEquipment(id=i, x=x, y=y, slice=kind, home_gnb=home) for i, (x, y, kind, home) in enumerate(users)
        ),
        carrier_freq=3.7e9,
        rb_bandwidth=180e3,
        noise_dbm=-117.0,
        slice_params={SliceKind.URLLC: urllc, SliceKind.EMBB: embb},
        k_max=k_max,
    )


def _brute_force(model: ConstrainedModel) -> float | None:
    """穷举全部 0/1 取值，返回最优目标值；无可行解返回 None。"""
    n = model.num_variables
    grid = ((np.arange(2**n)[:, None] >> np.arange(n)) & 1).astype(np.float64)
    ok = np.ones(grid.shape[0], dtype=bool)
    for con in model.constraints:
        coefs = np.zeros(n)
        for var, coef in con.terms:
            coefs[model.index_of[var]] = coef
        lhs = grid @ coefs
        tol = 1e-9 * max(1.0, abs(con.rhs))
        if con.sense is Sense.LE:
            ok &= lhs <= con.rhs + tol
        elif con.sense is Sense.GE:
            ok &= lhs >= con.rhs - tol
        else:
            ok &= np.abs(lhs - con.rhs) <= tol
    if not ok.any():
        return None
    return float((grid[ok] @ np.asarray(model.objective, dtype=np.float64)).max())


@pytest.fixture
def make_scenario():
    return _make_scenario


@pytest.fixture
def brute_force():
    return _brute_force


@pytest.fixture(scope="session")
def four_cell_scenario():
    return generate_scenario(FOUR_CELL_CONFIG, seed=1)


@pytest.fixture(scope="session")
def four_cell_model(four_cell_scenario):
    return build_model(four_cell_scenario)


@pytest.fixture
def two_cell_scenario():
    """两站各 2 个 RB、各 2 个用户，共 16 个变量；每个用户 1 个 RB 即满足 QoS。"""
    return _make_scenario(
        gnbs=[(0.0, 0.0, (0, 1)), (1000.0, 0.0, (2, 3))],
        users=[
            (100.0, 0.0, SliceKind.EMBB, 0),
            (0.0, 200.0, SliceKind.URLLC, 0),
            (1100.0, 0.0, SliceKind.EMBB, 1),
            (1000.0, 250.0, SliceKind.URLLC, 1),
        ],
        k_max=2,
    )


@pytest.fixture
def crowded_scenario():
    """3 个 RB、4 个用户：每个用户至少要 1 个 RB，必然不可行。"""
    return _make_scenario(
        gnbs=[(0.0, 0.0, (0,)), (1000.0, 0.0, (1, 2))],
        users=[
            (100.0, 0.0, SliceKind.EMBB, 0),
            (0.0, 150.0, SliceKind.URLLC, 0),
            (1100.0, 0.0, SliceKind.EMBB, 1),
            (1000.0, 120.0, SliceKind.URLLC, 1),
        ],
        k_max=2,
    )
