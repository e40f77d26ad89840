"""领域异常。API 层与 CLI 层按类型映射为 HTTP 状态码 / 退出码。"""


class RanSliceError(Exception):
    """所有领域异常的基类。"""


class ConfigurationError(RanSliceError):
    """场景配置、几何布局或场景文件不合法。"""


class DomainError(RanSliceError, ValueError):
    """数学定义域错误，如距离为 0、D_max 非正。"""


class ModelError(RanSliceError):
    """约束模型无法降阶为 QUBO，或样本与模型不匹配。"""


class VerificationError(RanSliceError):
    """待校验的分配引用了场景中不存在的 id。"""


class RemoteError(RanSliceError):
    """远端采样服务相关错误的基类。"""


class TransportError(RemoteError):
    """网络层失败，可重试。"""


class ProtocolError(RemoteError):
    """远端响应格式不符合线协议。"""


class JobNotFoundError(RemoteError):
    """作业 id 不存在。"""
