import math

import numpy as np
import pytest

from app.core.errors import ConfigurationError, DomainError
from app.models.scenario import FOUR_CELL_CONFIG, ScenarioConfig, SliceKind
from app.services.net_model_service import (
    channel_gain_fspl,
    dbm_to_watts,
    generate_scenario,
    per_rb_rate,
    rate_table,
    user_rb_rate,
)
from app.services.storage_service import scenario_to_document


def test_dbm_to_watts():
    assert dbm_to_watts(30.0) == pytest.approx(1.0)
    assert dbm_to_watts(-117.0) == pytest.approx(1.995e-15, rel=1e-3)


def test_fspl_gain():
    assert channel_gain_fspl(100.0, 3.7e9) == pytest.approx(4.163e-9, rel=1e-3)
    assert channel_gain_fspl(300.0, 3.7e9) == pytest.approx(4.626e-10, rel=1e-3)


def test_fspl_rejects_zero_distance():
    with pytest.raises(DomainError):
        channel_gain_fspl(0.0, 3.7e9)
    with pytest.raises(DomainError):
        channel_gain_fspl(100.0, 0.0)


def test_per_rb_rate_at_100m():
    rate = per_rb_rate(180e3, 1.0, channel_gain_fspl(100.0, 3.7e9), dbm_to_watts(-117.0))
    assert rate == pytest.approx(3.779e6, rel=2e-3)


def test_per_rb_rate_zero_gain_and_bad_args():
    assert per_rb_rate(180e3, 1.0, 0.0, 1e-15) == 0.0
    with pytest.raises(DomainError):
        per_rb_rate(0.0, 1.0, 1e-9, 1e-15)
    with pytest.raises(DomainError):
        per_rb_rate(180e3, -1.0, 1e-9, 1e-15)


def test_rate_decreases_with_distance(make_scenario):
    scenario = make_scenario(
        gnbs=[(0.0, 0.0, (0, 1))],
        users=[(50.0, 0.0, SliceKind.EMBB, 0), (250.0, 0.0, SliceKind.EMBB, 0)],
    )
    near, far = scenario.users
    assert user_rb_rate(scenario, near) > user_rb_rate(scenario, far)


def test_rate_table_is_flat_across_rbs(four_cell_scenario):
    table = rate_table(four_cell_scenario)
    assert len(table) == 42 * 28
    for user in four_cell_scenario.users:
        values = {table[(rb, user.id)] for rb in four_cell_scenario.rb_ids}
        assert len(values) == 1


def test_four_cell_layout(four_cell_scenario):
    scenario = four_cell_scenario
    assert [len(g.rb_ids) for g in scenario.gnbs] == [9, 12, 11, 10]
    assert [len(scenario.users_by_gnb[g.id]) for g in scenario.gnbs] == [8, 7, 6, 7]
    for g in scenario.gnbs:
        assert 300.0 - 1e-9 <= g.x <= 700.0 + 1e-9
        assert 300.0 - 1e-9 <= g.y <= 700.0 + 1e-9
    for u in scenario.users:
        assert 0 < scenario.distance(u) <= 300.0 + 1e-6


def test_generate_is_deterministic():
    a = scenario_to_document(generate_scenario(FOUR_CELL_CONFIG, seed=7))
    b = scenario_to_document(generate_scenario(FOUR_CELL_CONFIG, seed=7))
    c = scenario_to_document(generate_scenario(FOUR_CELL_CONFIG, seed=8))
    assert a == b
    assert a != c


def test_generate_slice_mix():
    scenario = generate_scenario(ScenarioConfig(rbs_per_gnb=(4,), users_per_gnb=(10,), urllc_fraction=0.3), seed=0)
    kinds = [u.slice for u in scenario.users]
    assert kinds.count(SliceKind.URLLC) == 3
    assert kinds.count(SliceKind.EMBB) == 7


def test_generate_zero_users_and_rbs():
    scenario = generate_scenario(ScenarioConfig(rbs_per_gnb=(5,), users_per_gnb=(0,)), seed=0)
    assert scenario.n_users == 0
    assert scenario.n_rbs == 5


def test_generate_rejects_small_area():
    config = ScenarioConfig(rbs_per_gnb=(2,), users_per_gnb=(1,), area_m=500.0)
    with pytest.raises(ConfigurationError):
        generate_scenario(config, seed=0)


def test_config_validation():
    with pytest.raises(ConfigurationError):
        ScenarioConfig(rbs_per_gnb=(2, 3), users_per_gnb=(1,))
    with pytest.raises(ConfigurationError):
        ScenarioConfig(rbs_per_gnb=(2,), users_per_gnb=(1,), urllc_fraction=1.5)
    with pytest.raises(ConfigurationError):
        ScenarioConfig(rbs_per_gnb=(), users_per_gnb=())


def test_uniform_split():
    config = ScenarioConfig.uniform(3, 10, 7)
    assert config.rbs_per_gnb == (4, 3, 3)
    assert config.users_per_gnb == (3, 2, 2)


def test_scenario_rejects_overlapping_pools(make_scenario):
    with pytest.raises(ConfigurationError):
        make_scenario(gnbs=[(0.0, 0.0, (0, 1)), (1000.0, 0.0, (1, 2))], users=[])


def test_scenario_rejects_user_outside_coverage(make_scenario):
    with pytest.raises(ConfigurationError):
        make_scenario(gnbs=[(0.0, 0.0, (0,))], users=[(400.0, 0.0, SliceKind.EMBB, 0)])


def test_scenario_rejects_unknown_home(make_scenario):
    with pytest.raises(ConfigurationError):
        make_scenario(gnbs=[(0.0, 0.0, (0,))], users=[(10.0, 0.0, SliceKind.EMBB, 3)])


def test_noise_power_matches_dbm(four_cell_scenario):
    assert math.isclose(four_cell_scenario.noise_power, dbm_to_watts(-117.0))


def test_fspl_follows_inverse_square():
    reference = channel_gain_fspl(1.0, 3.7e9)
    for d in np.logspace(0.0, 4.0, 60):
        assert channel_gain_fspl(float(d), 3.7e9) * d * d == pytest.approx(reference, rel=1e-12)


def test_rate_is_increasing_in_gain():
    noise = dbm_to_watts(-117.0)
    rates = [per_rb_rate(180e3, 1.0, float(g), noise) for g in np.logspace(-14, -6, 40)]
    assert all(b > a for a, b in zip(rates, rates[1:]))


def test_generated_users_stay_inside_coverage():
    config = ScenarioConfig(rbs_per_gnb=(1, 1, 1, 1), users_per_gnb=(2500, 2500, 2500, 2500))
    scenario = generate_scenario(config, seed=11)
    assert scenario.n_users == 10_000
    distances = np.array([scenario.distance(u) for u in scenario.users])
    assert distances.min() >= config.min_distance_m - 1e-9
    assert distances.max() <= config.coverage_radius_m + 1e-9
