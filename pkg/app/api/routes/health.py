from fastapi import APIRouter, Depends

from app.api.deps import get_job_table
from app.repositories.job_repository import JobTable
from app.schemas.health import HealthResponse

router = APIRouter()


@router.get("/health", response_model=HealthResponse)
def health_check(table: JobTable = Depends(get_job_table)) -> HealthResponse:
    return HealthResponse(status="ok", jobs=len(table))
