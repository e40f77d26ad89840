from fastapi import APIRouter, Depends, HTTPException

from app.api.deps import get_job_table
from app.core.errors import ModelError
from app.models.job import JobStatus
from app.models.problem import Sense
from app.repositories.job_repository import JobTable, get_job
from app.schemas.jobs import JobCreatedResponse, JobStatusResponse, JobSubmitRequest, WireSolution
from app.services.job_service import submit_job
from app.services.problem_service import model_from_wire

router = APIRouter()


@router.post("/jobs", response_model=JobCreatedResponse, status_code=202)
async def create_job(body: JobSubmitRequest, table: JobTable = Depends(get_job_table)):
    """提交约束模型，立即返回 job_id；求解在后台进行。"""
    try:
        model = model_from_wire(body.model)
    except ModelError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    if any(con.sense is Sense.EQ for con in model.constraints):
        raise HTTPException(status_code=422, detail="QUBO 降阶不支持等式约束")
    job = submit_job(table, body)
    return JobCreatedResponse(job_id=job.id)


@router.get("/jobs/{job_id}", response_model=JobStatusResponse)
async def get_job_status(job_id: str, table: JobTable = Depends(get_job_table)):
    job = get_job(table, job_id)
    if not job:
        raise HTTPException(status_code=404, detail="作业不存在")
    solution = WireSolution(**job.result) if job.status is JobStatus.DONE and job.result else None
    return JobStatusResponse(job_id=job.id, status=job.status.value, solution=solution, error=job.error)
