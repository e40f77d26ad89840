from pathlib import Path


def ensure_parent_dir(path: str | Path) -> Path:
    """确保输出文件所在目录存在，返回 Path。"""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    return target
