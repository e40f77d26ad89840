"""场景文件（JSON，version 1）。"""
from typing import Literal

from pydantic import BaseModel, Field


class SliceQos(BaseModel):
    lambda_pps: float = Field(..., gt=0, description="包到达率 λ_s（packets/s）")
    delta_bits: float = Field(..., gt=0, description="包长 δ_s（bits）")
    dmax_s: float | None = Field(None, gt=0, description="时延上限 D_max（秒），仅 URLLC")
    rmin_bps: float | None = Field(None, gt=0, description="速率下限 R_min（bits/s），仅 eMBB")


class SlicesDoc(BaseModel):
    urllc: SliceQos
    embb: SliceQos


class GnbDoc(BaseModel):
    id: int
    x_m: float
    y_m: float
    radius_m: float = Field(..., gt=0, description="覆盖半径（m）")
    tx_dbm: float = Field(30.0, description="每 RB 发射功率（dBm）")
    rb_ids: list[int] = Field(default_factory=list, description="原生 RB 池")


class UserDoc(BaseModel):
    id: int
    x_m: float
    y_m: float
    slice: Literal["urllc", "embb"]
    home_gnb: int


class ScenarioDocument(BaseModel):
    version: Literal[1] = 1
    seed: int = Field(0, description="生成场景所用的种子")
    carrier_freq_hz: float
    rb_bandwidth_hz: float
    noise_dbm: float
    k_max: int = Field(..., ge=1, description="每用户 RB 上限 K_max")
    slices: SlicesDoc
    gnbs: list[GnbDoc]
    users: list[UserDoc] = Field(default_factory=list)
