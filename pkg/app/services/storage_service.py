"""场景文件与求解结果文件的读写。JSON 由 pydantic 生成，相同输入得到逐字节相同的文件。"""
import json
import logging
from pathlib import Path

from pydantic import ValidationError

from app.core.errors import ConfigurationError
from app.core.storage import ensure_parent_dir
from app.models.problem import VarLabel
from app.models.report import VerificationReport
from app.models.scenario import GNodeB, Scenario, SliceKind, SliceParams, UserEquipment
from app.models.solution import Solution
from app.schemas.scenario import GnbDoc, ScenarioDocument, SliceQos, SlicesDoc, UserDoc
from app.schemas.solution import SolutionDocument

logger = logging.getLogger(__name__)


def _slice_to_doc(params: SliceParams) -> SliceQos:
    return SliceQos(
        lambda_pps=params.packet_rate,
        delta_bits=params.packet_len,
        dmax_s=params.delay_cap,
        rmin_bps=params.rate_floor,
    )


def _slice_from_doc(kind: SliceKind, doc: SliceQos) -> SliceParams:
    return SliceParams(
        kind=kind,
        packet_rate=doc.lambda_pps,
        packet_len=doc.delta_bits,
        rate_floor=doc.rmin_bps,
        delay_cap=doc.dmax_s,
    )


def scenario_to_document(scenario: Scenario) -> ScenarioDocument:
    return ScenarioDocument(
        seed=scenario.seed,
        carrier_freq_hz=scenario.carrier_freq,
        rb_bandwidth_hz=scenario.rb_bandwidth,
        noise_dbm=scenario.noise_dbm,
        k_max=scenario.k_max,
        slices=SlicesDoc(
            urllc=_slice_to_doc(scenario.slice_params[SliceKind.URLLC]),
            embb=_slice_to_doc(scenario.slice_params[SliceKind.EMBB]),
        ),
        gnbs=[
            GnbDoc(id=g.id, x_m=g.x, y_m=g.y, radius_m=g.coverage_radius, tx_dbm=g.tx_dbm, rb_ids=list(g.rb_ids))
            for g in scenario.gnbs
        ],
        users=[
            UserDoc(id=u.id, x_m=u.x, y_m=u.y, slice=u.slice.value, home_gnb=u.home_gnb)
            for u in scenario.users
        ],
    )


def scenario_from_document(doc: ScenarioDocument) -> Scenario:
    """构造 Scenario 时重新校验全部不变量，失败抛 ConfigurationError。"""
    return Scenario(
        gnbs=tuple(
            GNodeB(id=g.id, x=g.x_m, y=g.y_m, rb_ids=tuple(g.rb_ids), coverage_radius=g.radius_m, tx_dbm=g.tx_dbm)
            for g in doc.gnbs
        ),
        users=tuple(
            UserEquipment(id=u.id, x=u.x_m, y=u.y_m, slice=SliceKind(u.slice), home_gnb=u.home_gnb)
            for u in doc.users
        ),
        carrier_freq=doc.carrier_freq_hz,
        rb_bandwidth=doc.rb_bandwidth_hz,
        noise_dbm=doc.noise_dbm,
        slice_params={
            SliceKind.URLLC: _slice_from_doc(SliceKind.URLLC, doc.slices.urllc),
            SliceKind.EMBB: _slice_from_doc(SliceKind.EMBB, doc.slices.embb),
        },
        k_max=doc.k_max,
        seed=doc.seed,
    )


def write_scenario(path: str | Path, scenario: Scenario) -> Path:
    target = ensure_parent_dir(path)
    target.write_text(scenario_to_document(scenario).model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info("[storage] 写入场景 %s", target)
    return target


def read_scenario(path: str | Path) -> Scenario:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"无法读取场景文件 {path}: {exc}") from exc
    try:
        doc = ScenarioDocument.model_validate_json(raw)
    except ValidationError as exc:
        raise ConfigurationError(f"场景文件 {path} 格式错误: {exc}") from exc
    return scenario_from_document(doc)


def solution_to_document(solution: Solution, report: VerificationReport | None = None) -> SolutionDocument:
    selected = solution.allocation.selected
    return SolutionDocument(
        solver=solution.solver_name,
        status=solution.status.value,
        objective_bps=solution.objective_value,
        wall_ms=solution.wall_time * 1000.0,
        assignment=[(v.rb_id, v.gnb_id, v.user_id) for v in selected],
        # 统计信息里可能混有 numpy 标量，先过一遍 json 统一成内置类型
        stats=json.loads(json.dumps(dict(solution.solver_stats), default=_plain)),
        report=report.to_dict() if report is not None else None,
    )


def _plain(value):
    if hasattr(value, "tolist"):
        return value.tolist()
    return str(value)


def write_solution(path: str | Path, doc: SolutionDocument) -> Path:
    target = ensure_parent_dir(path)
    target.write_text(doc.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info("[storage] 写入结果 %s", target)
    return target


def read_solution(path: str | Path) -> SolutionDocument:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"无法读取结果文件 {path}: {exc}") from exc
    try:
        return SolutionDocument.model_validate_json(raw)
    except ValidationError as exc:
        raise ConfigurationError(f"结果文件 {path} 格式错误: {exc}") from exc


def assignment_from_document(doc: SolutionDocument) -> dict[VarLabel, int]:
    return {VarLabel(rb, gnb, user): 1 for rb, gnb, user in doc.assignment}
