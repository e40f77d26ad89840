"""API 依赖项：作业表。"""
from fastapi import Request

from app.repositories.job_repository import JobTable


def get_job_table(request: Request) -> JobTable:
    """应用级作业表，在 create_app 中创建。"""
    return request.app.state.job_table
