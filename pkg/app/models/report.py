"""校验报告与基准记录。"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields

from app.models.problem import FAMILIES

C6 = "C6"
ALL_FAMILIES = FAMILIES + (C6,)


@dataclass(frozen=True)
class Violation:
    family: str
    subject: str  # 例如 "rb=5" / "user=3" / "rb=7,user=2"
    detail: str


@dataclass(frozen=True)
class FamilyResult:
    family: str
    violations: tuple[Violation, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class UserMetrics:
    user_id: int
    gnb_id: int
    slice: str
    achieved_rate: float  # r_mn，bits/s
    delay: float | None  # d_mn，秒；None 表示 Unstable
    rbs_assigned: int
    borrowed_rbs: int

    @property
    def unstable(self) -> bool:
        return self.delay is None


@dataclass(frozen=True)
class GnbMetrics:
    gnb_id: int
    n_rbs: int
    served_users: int  # 至少分到 1 个 RB 的本站用户数
    native_served_users: int  # 至少分到 1 个本站 RB 的本站用户数
    rbs_used: int  # 本站 RB 被任意用户占用的数量
    rbs_lent: int  # 本站 RB 借给其它站用户的数量
    rbs_borrowed: int  # 本站用户占用的外站 RB 数

    @property
    def utilization(self) -> float:
        return self.rbs_used / self.n_rbs if self.n_rbs else 0.0


@dataclass(frozen=True)
class VerificationReport:
    families: dict[str, FamilyResult]
    users: tuple[UserMetrics, ...]
    gnbs: tuple[GnbMetrics, ...]
    objective_bps: float

    @property
    def feasible(self) -> bool:
        return all(r.passed for r in self.families.values())

    def failed_families(self) -> list[str]:
        return [f for f in ALL_FAMILIES if f in self.families and not self.families[f].passed]

    def summary(self) -> str:
        parts = [f"{f}={'ok' if r.passed else f'FAIL({len(r.violations)})'}" for f, r in self.families.items()]
        return f"feasible={self.feasible} " + " ".join(parts)

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "objective_bps": self.objective_bps,
            "families": {
                f: {"passed": r.passed, "violations": [asdict(v) for v in r.violations]}
                for f, r in self.families.items()
            },
            "users": [asdict(u) | {"unstable": u.unstable} for u in self.users],
            "gnbs": [asdict(g) | {"utilization": g.utilization} for g in self.gnbs],
        }


@dataclass(frozen=True)
class BenchRecord:
    instance_id: int
    n_gnbs: int
    n_rbs: int
    n_users: int
    n_vars: int
    solver: str
    seed: int
    wall_ms: float
    objective_bps: float
    feasible: bool
    gap_pct: float | None = None

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]
