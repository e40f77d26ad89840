"""作业（Job）数据访问层：进程内作业表，所有读写在同一把锁下进行。"""
import threading
import time
import uuid
from collections import OrderedDict
from dataclasses import replace

from app.models.job import Job, JobStatus


class JobTable:
    """按提交顺序保存作业；已结束作业超过 retention 个时淘汰最早的。"""

    def __init__(self, retention: int = 256) -> None:
        self.retention = retention
        self._jobs: OrderedDict[str, Job] = OrderedDict()
        self._lock = threading.Lock()

    def __len__(self) -> int:
        with self._lock:
            return len(self._jobs)

    def _evict(self) -> None:
        finished = [jid for jid, job in self._jobs.items() if job.finished]
        for jid in finished[: max(0, len(finished) - self.retention)]:
            del self._jobs[jid]


def create_job(table: JobTable) -> Job:
    """登记新作业，状态为 queued。返回快照。"""
    job = Job(id=uuid.uuid4().hex, submitted_at=time.perf_counter())
    with table._lock:
        table._jobs[job.id] = job
        return replace(job)


def get_job(table: JobTable, job_id: str) -> Job | None:
    """按 ID 查询作业快照，不存在返回 None。"""
    with table._lock:
        job = table._jobs.get(job_id)
        return replace(job) if job else None


def mark_running(table: JobTable, job_id: str) -> None:
    with table._lock:
        job = table._jobs.get(job_id)
        if job is not None:
            job.status = JobStatus.RUNNING
            job.started_at = time.perf_counter()


def mark_done(table: JobTable, job_id: str, result: dict) -> None:
    with table._lock:
        job = table._jobs.get(job_id)
        if job is not None:
            job.status = JobStatus.DONE
            job.finished_at = time.perf_counter()
            job.result = result
            table._evict()


def mark_failed(table: JobTable, job_id: str, error: str) -> None:
    with table._lock:
        job = table._jobs.get(job_id)
        if job is not None:
            job.status = JobStatus.FAILED
            job.finished_at = time.perf_counter()
            job.error = error
            table._evict()
