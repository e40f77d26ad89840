import os
from dataclasses import dataclass


@dataclass(frozen=True)
class Settings:
    # 仅作用于采样服务（app.main）；CLI 的实验参数只来自命令行 flag，保证可复现
    api_prefix: str = os.getenv("API_PREFIX", "/v1")
    log_level: str = os.getenv("LOG_LEVEL", "INFO")
    # 内存作业表最多保留的已结束作业数，超出后按提交顺序淘汰
    job_retention: int = int(os.getenv("JOB_RETENTION", "256"))
    # 请求体未给出 reads / sweeps 时的默认退火参数
    default_reads: int = int(os.getenv("DEFAULT_READS", "10"))
    default_sweeps: int = int(os.getenv("DEFAULT_SWEEPS", "500"))
    # 执行作业的线程数
    job_workers: int = int(os.getenv("JOB_WORKERS", "2"))
    # 请求未给出 rate_quantum_bps 时的 C4/C5 系数量化步长（bits/s）
    rate_quantum_bps: float = float(os.getenv("RATE_QUANTUM_BPS", "1000"))


settings = Settings()
