from app.models.job import JobStatus
from app.repositories.job_repository import JobTable, create_job, get_job, mark_done, mark_failed, mark_running


def test_job_lifecycle():
    table = JobTable()
    job = create_job(table)
    assert get_job(table, job.id).status is JobStatus.QUEUED
    mark_running(table, job.id)
    assert get_job(table, job.id).status is JobStatus.RUNNING
    mark_done(table, job.id, {"objective": 1.0})
    done = get_job(table, job.id)
    assert done.status is JobStatus.DONE
    assert done.result == {"objective": 1.0}
    assert done.finished_at >= done.submitted_at


def test_snapshot_is_detached():
    table = JobTable()
    job = create_job(table)
    snapshot = get_job(table, job.id)
    mark_failed(table, job.id, "boom")
    assert snapshot.status is JobStatus.QUEUED
    assert get_job(table, job.id).error == "boom"


def test_finished_jobs_are_evicted_oldest_first():
    table = JobTable(retention=2)
    ids = [create_job(table).id for _ in range(4)]
    pending = create_job(table).id
    for jid in ids:
        mark_done(table, jid, {})
    assert get_job(table, ids[0]) is None
    assert get_job(table, ids[1]) is None
    assert get_job(table, ids[3]) is not None
    assert get_job(table, pending) is not None
    assert len(table) == 3


def test_unknown_job():
    assert get_job(JobTable(), "missing") is None
