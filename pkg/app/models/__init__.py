from app.models.problem import ConstrainedModel, LinearConstraint, ModelMetadata, Sense, VarLabel
from app.models.qubo import PenaltyBlock, PenaltyConfig, QuboModel
from app.models.report import BenchRecord, FamilyResult, GnbMetrics, UserMetrics, VerificationReport, Violation
from app.models.scenario import GNodeB, Scenario, ScenarioConfig, SliceKind, SliceParams, UserEquipment
from app.models.solution import Allocation, AnnealSchedule, SearchLimits, Solution, SolveStatus

__all__ = [
    "ConstrainedModel",
    "LinearConstraint",
    "ModelMetadata",
    "Sense",
    "VarLabel",
    "PenaltyBlock",
    "PenaltyConfig",
    "QuboModel",
    "BenchRecord",
    "FamilyResult",
    "GnbMetrics",
    "UserMetrics",
    "VerificationReport",
    "Violation",
    "GNodeB",
    "Scenario",
    "ScenarioConfig",
    "SliceKind",
    "SliceParams",
    "UserEquipment",
    "Allocation",
    "AnnealSchedule",
    "SearchLimits",
    "Solution",
    "SolveStatus",
]
