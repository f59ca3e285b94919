class QuenchToolError(Exception):
    """
    oai_quench_tool 的基础异常
    """


class ProtocolError(QuenchToolError, ValueError):
    """
    调度参数非法，或求值时间超出 [t_i, t_f] 窗口
    """


class DegenerateModeError(QuenchToolError, ValueError):
    """
    (g, q) 恰好位于能隙闭合点，本征问题简并
    """


class IntegrationError(QuenchToolError, RuntimeError):
    """
    积分过程中范数、迹或正定性漂移超出容限

    Attributes
    ----------
    q : float or None
        出错的动量
    t : float or None
        出错时刻
    step : float or None
        当时的步长
    """

    def __init__(self, message, q=None, t=None, step=None):
        super().__init__(message)
        self.q = q
        self.t = t
        self.step = step


class FitError(QuenchToolError, ValueError):
    """
    拟合输入不足或不满足前置条件
    """


class ConfigError(QuenchToolError, ValueError):
    """
    运行配置校验失败
    """


class ZetaRegimeWarning(UserWarning):
    """
    (ζ/τ_Q)^{1/(1+zν)} 不够小, OAI 的绝热条件只是近似成立
    """


class ModeGridError(QuenchToolError, ValueError):
    """
    格点数 N 不是 >= 4 的偶数
    """
