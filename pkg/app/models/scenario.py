"""物理网络场景：gNodeB、用户、切片 QoS 参数。构造后不可变，可在并发 worker 间只读共享。"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Mapping

from app.core.errors import ConfigurationError


class SliceKind(str, Enum):
    URLLC = "urllc"
    EMBB = "embb"


@dataclass(frozen=True)
class SliceParams:
    kind: SliceKind
    packet_rate: float  # λ_s，packets/s
    packet_len: float  # δ_s，bits
    rate_floor: float | None = None  # R_min，仅 eMBB
    delay_cap: float | None = None  # D_max，仅 URLLC

    def __post_init__(self) -> None:
        if not self.packet_rate > 0:
            raise ConfigurationError(f"{self.kind.value}: packet_rate 必须 > 0")
        if not self.packet_len > 0:
            raise ConfigurationError(f"{self.kind.value}: packet_len 必须 > 0")
        if self.kind is SliceKind.URLLC:
            if self.delay_cap is None or self.rate_floor is not None:
                raise ConfigurationError("URLLC 切片只能且必须设置 delay_cap")
        elif self.rate_floor is None or self.delay_cap is not None:
            raise ConfigurationError("eMBB 切片只能且必须设置 rate_floor")


# 默认切片 QoS 参数
DEFAULT_URLLC = SliceParams(SliceKind.URLLC, packet_rate=100.0, packet_len=120.0, delay_cap=0.010)
DEFAULT_EMBB = SliceParams(SliceKind.EMBB, packet_rate=100.0, packet_len=400.0, rate_floor=100_000.0)


@dataclass(frozen=True)
class GNodeB:
    id: int
    x: float
    y: float
    rb_ids: tuple[int, ...]
    coverage_radius: float
    tx_dbm: float = 30.0

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)

    @property
    def tx_power_per_rb(self) -> float:
        from app.services.net_model_service import dbm_to_watts

        return dbm_to_watts(self.tx_dbm)


@dataclass(frozen=True)
class UserEquipment:
    id: int
    x: float
    y: float
    slice: SliceKind
    home_gnb: int

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class Scenario:
    gnbs: tuple[GNodeB, ...]
    users: tuple[UserEquipment, ...]
    carrier_freq: float
    rb_bandwidth: float
    noise_dbm: float
    slice_params: Mapping[SliceKind, SliceParams]
    k_max: int
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.rb_bandwidth > 0:
            raise ConfigurationError("rb_bandwidth 必须 > 0")
        if not self.carrier_freq > 0:
            raise ConfigurationError("carrier_freq 必须 > 0")
        if not math.isfinite(self.noise_dbm):
            raise ConfigurationError("noise_dbm 必须是有限值")
        if self.k_max < 1:
            raise ConfigurationError("k_max 必须 ≥ 1")
        for kind in SliceKind:
            if kind not in self.slice_params:
                raise ConfigurationError(f"缺少切片参数: {kind.value}")
        gnb_ids = [g.id for g in self.gnbs]
        if len(set(gnb_ids)) != len(gnb_ids):
            raise ConfigurationError("gNodeB id 重复")
        seen_rbs: set[int] = set()
        for g in self.gnbs:
            if not g.coverage_radius > 0:
                raise ConfigurationError(f"gNodeB {g.id}: coverage_radius 必须 > 0")
            if not math.isfinite(g.tx_dbm):
                raise ConfigurationError(f"gNodeB {g.id}: tx_dbm 必须是有限值")
            if len(set(g.rb_ids)) != len(g.rb_ids) or seen_rbs.intersection(g.rb_ids):
                raise ConfigurationError(f"gNodeB {g.id}: RB 池与其它 gNodeB 重叠或内部重复")
            seen_rbs.update(g.rb_ids)
        user_ids = [u.id for u in self.users]
        if len(set(user_ids)) != len(user_ids):
            raise ConfigurationError("用户 id 重复")
        by_id = {g.id: g for g in self.gnbs}
        for u in self.users:
            home = by_id.get(u.home_gnb)
            if home is None:
                raise ConfigurationError(f"用户 {u.id}: home_gnb={u.home_gnb} 不存在")
            d = math.hypot(u.x - home.x, u.y - home.y)
            if d > home.coverage_radius * (1 + 1e-9):
                raise ConfigurationError(f"用户 {u.id}: 距离 {d:.3f} m 超出 gNodeB {home.id} 覆盖半径")

    @property
    def noise_power(self) -> float:
        from app.services.net_model_service import dbm_to_watts

        return dbm_to_watts(self.noise_dbm)

    @cached_property
    def gnb_by_id(self) -> dict[int, GNodeB]:
        return {g.id: g for g in self.gnbs}

    @cached_property
    def user_by_id(self) -> dict[int, UserEquipment]:
        return {u.id: u for u in self.users}

    @cached_property
    def rb_owner(self) -> dict[int, int]:
        """RB id → 所属 gNodeB id。"""
        return {rb: g.id for g in self.gnbs for rb in g.rb_ids}

    @cached_property
    def rb_ids(self) -> tuple[int, ...]:
        """全局 RB 集合 K，升序。"""
        return tuple(sorted(self.rb_owner))

    @cached_property
    def users_by_gnb(self) -> dict[int, tuple[UserEquipment, ...]]:
        out: dict[int, list[UserEquipment]] = {g.id: [] for g in self.gnbs}
        for u in self.users:
            out[u.home_gnb].append(u)
        return {gid: tuple(sorted(us, key=lambda u: u.id)) for gid, us in out.items()}

    @property
    def n_rbs(self) -> int:
        return len(self.rb_owner)

    @property
    def n_users(self) -> int:
        return len(self.users)

    def distance(self, user: UserEquipment) -> float:
        """用户到其归属 gNodeB 的距离（m）。"""
        home = self.gnb_by_id[user.home_gnb]
        return math.hypot(user.x - home.x, user.y - home.y)


@dataclass(frozen=True)
class ScenarioConfig:
    """场景生成参数，默认值即标准仿真设置。"""

    rbs_per_gnb: tuple[int, ...]
    users_per_gnb: tuple[int, ...]
    urllc_fraction: float = 0.5
    area_m: float = 1000.0
    coverage_radius_m: float = 300.0
    carrier_freq_hz: float = 3.7e9
    rb_bandwidth_hz: float = 180e3
    noise_dbm: float = -117.0
    tx_dbm: float = 30.0
    k_max: int = 3
    min_distance_m: float = 1.0
    gnb_positions: tuple[tuple[float, float], ...] | None = None
    urllc: SliceParams = field(default=DEFAULT_URLLC)
    embb: SliceParams = field(default=DEFAULT_EMBB)

    def __post_init__(self) -> None:
        if not self.rbs_per_gnb:
            raise ConfigurationError("至少需要 1 个 gNodeB")
        if len(self.users_per_gnb) != len(self.rbs_per_gnb):
            raise ConfigurationError("rbs_per_gnb 与 users_per_gnb 长度不一致")
        if any(k < 0 for k in self.rbs_per_gnb) or any(n < 0 for n in self.users_per_gnb):
            raise ConfigurationError("RB 数与用户数不能为负")
        if not 0.0 <= self.urllc_fraction <= 1.0:
            raise ConfigurationError("urllc_fraction 必须在 [0, 1]")
        if self.gnb_positions is not None and len(self.gnb_positions) != len(self.rbs_per_gnb):
            raise ConfigurationError("gnb_positions 数量与 gNodeB 数不一致")
        if not 0 < self.min_distance_m < self.coverage_radius_m:
            raise ConfigurationError("min_distance_m 必须在 (0, coverage_radius_m) 内")

    @property
    def n_gnbs(self) -> int:
        return len(self.rbs_per_gnb)

    @classmethod
    def uniform(cls, n_gnbs: int, total_rbs: int, total_users: int, **kwargs) -> "ScenarioConfig":
        """按总数均分到各 gNodeB，余数分给编号靠前的 gNodeB。"""
        if n_gnbs < 1:
            raise ConfigurationError("至少需要 1 个 gNodeB")
        return cls(
            rbs_per_gnb=_split(total_rbs, n_gnbs),
            users_per_gnb=_split(total_users, n_gnbs),
            **kwargs,
        )


def _split(total: int, parts: int) -> tuple[int, ...]:
    base, rem = divmod(total, parts)
    return tuple(base + (1 if i < rem else 0) for i in range(parts))


# 4 个 gNodeB 的基准拓扑，(RB, 用户) = (9,8), (12,7), (11,6), (10,7)
FOUR_CELL_CONFIG = ScenarioConfig(rbs_per_gnb=(9, 12, 11, 10), users_per_gnb=(8, 7, 6, 7))
# 单个 100 MHz O-RU 约 550 个物理 RB
ORU550_CONFIG = ScenarioConfig(rbs_per_gnb=(550,), users_per_gnb=(10,))
