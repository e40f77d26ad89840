"""物理层与拓扑模型：单位换算、FSPL 信道增益、单 RB 速率、场景生成。"""
import logging
import math

import numpy as np

from app.core.errors import ConfigurationError, DomainError
from app.models.scenario import GNodeB, Scenario, ScenarioConfig, SliceKind, UserEquipment

logger = logging.getLogger(__name__)

# 取 3×10⁸ m/s 整数值而非 CODATA 值，与模型推导数值保持一致
SPEED_OF_LIGHT = 3.0e8


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def channel_gain_fspl(distance: float, freq: float) -> float:
    """自由空间路径损耗增益 G = (λ / 4πd)²，λ = c / f。"""
    if not distance > 0:
        raise DomainError(f"distance 必须 > 0，实际 {distance}")
    if not freq > 0:
        raise DomainError(f"freq 必须 > 0，实际 {freq}")
    return (SPEED_OF_LIGHT / (freq * 4.0 * math.pi * distance)) ** 2


def per_rb_rate(bandwidth: float, tx_power: float, gain: float, noise: float) -> float:
    """r = W · log2(1 + P·G / P_noise)。功率或增益为 0 时速率为 0。"""
    if not bandwidth > 0:
        raise DomainError("bandwidth 必须 > 0")
    if not noise > 0:
        raise DomainError("noise 必须 > 0")
    if tx_power < 0 or gain < 0:
        raise DomainError("tx_power 与 gain 不能为负")
    return bandwidth * math.log2(1.0 + tx_power * gain / noise)


def user_rb_rate(scenario: Scenario, user: UserEquipment) -> float:
    """用户经归属 gNodeB 在任一 RB 上获得的速率。FSPL 与频率无关，借用 RB 同样由归属站发射。"""
    home = scenario.gnb_by_id[user.home_gnb]
    gain = channel_gain_fspl(scenario.distance(user), scenario.carrier_freq)
    return per_rb_rate(scenario.rb_bandwidth, home.tx_power_per_rb, gain, scenario.noise_power)


def rate_table(scenario: Scenario) -> dict[tuple[int, int], float]:
    """(rb_id, user_id) → r_kmn。"""
    table: dict[tuple[int, int], float] = {}
    for user in sorted(scenario.users, key=lambda u: u.id):
        rate = user_rb_rate(scenario, user)
        for rb in scenario.rb_ids:
            table[(rb, user.id)] = rate
    return table


def _jittered_grid(config: ScenarioConfig, rng: np.random.Generator) -> list[tuple[float, float]]:
    """在可放置区域 [R, area−R]² 内按网格放站，每站在格内随机抖动。"""
    m = config.n_gnbs
    radius = config.coverage_radius_m
    span = config.area_m - 2.0 * radius
    cols = math.ceil(math.sqrt(m))
    rows = math.ceil(m / cols)
    cell_w, cell_h = span / cols, span / rows
    positions = []
    for idx in range(m):
        r, c = divmod(idx, cols)
        jx, jy = rng.uniform(-0.25, 0.25, size=2)
        x = radius + (c + 0.5 + jx) * cell_w
        y = radius + (r + 0.5 + jy) * cell_h
        positions.append((float(x), float(y)))
    return positions


def _sample_in_disc(
    rng: np.random.Generator, cx: float, cy: float, r_min: float, r_max: float
) -> tuple[float, float]:
    """圆环 [r_min, r_max] 内面积均匀采样。"""
    r = math.sqrt(rng.uniform(r_min * r_min, r_max * r_max))
    theta = rng.uniform(0.0, 2.0 * math.pi)
    return cx + r * math.cos(theta), cy + r * math.sin(theta)


def generate_scenario(config: ScenarioConfig, seed: int) -> Scenario:
    """
    生成场景：gNodeB 覆盖圆完全落在 area × area 区域内，用户在归属站覆盖圆内均匀分布。
    相同 (config, seed) 产生逐位相同的场景。
    """
    radius = config.coverage_radius_m
    if config.area_m < 2.0 * radius:
        raise ConfigurationError(
            f"覆盖半径 {radius} m 的圆无法放入 {config.area_m} m × {config.area_m} m 区域"
        )
    rng = np.random.default_rng(seed)
    positions = list(config.gnb_positions) if config.gnb_positions else _jittered_grid(config, rng)
    lo, hi = radius, config.area_m - radius
    for idx, (x, y) in enumerate(positions):
        if not (lo - 1e-9 <= x <= hi + 1e-9 and lo - 1e-9 <= y <= hi + 1e-9):
            raise ConfigurationError(f"gNodeB {idx} 位置 ({x}, {y}) 使覆盖圆越出区域")

    gnbs: list[GNodeB] = []
    users: list[UserEquipment] = []
    next_rb = 0
    next_user = 0
    for gid, ((x, y), n_rbs, n_users) in enumerate(zip(positions, config.rbs_per_gnb, config.users_per_gnb)):
        gnbs.append(
            GNodeB(
                id=gid,
                x=float(x),
                y=float(y),
                rb_ids=tuple(range(next_rb, next_rb + n_rbs)),
                coverage_radius=radius,
                tx_dbm=config.tx_dbm,
            )
        )
        next_rb += n_rbs
        n_urllc = int(math.floor(config.urllc_fraction * n_users + 0.5))
        kinds = [SliceKind.URLLC] * n_urllc + [SliceKind.EMBB] * (n_users - n_urllc)
        kinds = [kinds[i] for i in rng.permutation(n_users)]
        for kind in kinds:
            ux, uy = _sample_in_disc(rng, x, y, config.min_distance_m, radius)
            users.append(UserEquipment(id=next_user, x=ux, y=uy, slice=kind, home_gnb=gid))
            next_user += 1

    scenario = Scenario(
        gnbs=tuple(gnbs),
        users=tuple(users),
        carrier_freq=config.carrier_freq_hz,
        rb_bandwidth=config.rb_bandwidth_hz,
        noise_dbm=config.noise_dbm,
        slice_params={SliceKind.URLLC: config.urllc, SliceKind.EMBB: config.embb},
        k_max=config.k_max,
        seed=seed,
    )
    logger.info(
        "[generate_scenario] seed=%d gNodeB=%d RB=%d 用户=%d", seed, len(gnbs), next_rb, len(users)
    )
    return scenario
