"""
淬火调度 (quench schedule)

LQ / NLQ / OAI / NLOAI 四种调度均以闭式给出:

    ε(t) = (g(t) - g_c) / g_c,    g(t) = g_c (1 + ε(t))

OAI 的形式 (p = 1/zν, a = (ζ / zνθ)^p):

    ε(t) = -sgn(t) a [ (θ / (θ - |t|))^p - 1 ],  θ = (ζ^p τ_Q)^{zν/(1+zν)} / zν

NLOAI 对 OAI 的模取 r 次方, NLQ 对线性调度取 r 次方:

    ε(t) = -sgn(t) |ε_OAI(t)|^r,     ε(t) = -sgn(t) |t / τ_Q|^r

端点一律由闭式求得, 不做求根.
"""
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import pandas as pd

from oai_quench_tool.exceptions import ProtocolError, ZetaRegimeWarning

# (ζ/τ_Q)^{1/(1+zν)} 超过此值时给出警告
ZETA_SMALLNESS_THRESHOLD = 0.1


class ProtocolKind(str, Enum):
    LQ = 'LQ'
    NLQ = 'NLQ'
    OAI = 'OAI'
    NLOAI = 'NLOAI'

    @property
    def is_linear(self):
        return self in (ProtocolKind.LQ, ProtocolKind.NLQ)

    def with_nonlinearity(self, r):
        """
        同一族 (线性或 OAI) 中与 r 相符的类型: r = 1 为 LQ/OAI, 否则为 NLQ/NLOAI
        """
        if self.is_linear:
            return ProtocolKind.LQ if r == 1 else ProtocolKind.NLQ
        return ProtocolKind.OAI if r == 1 else ProtocolKind.NLOAI


@dataclass(frozen=True)
class CriticalData:
    """
    临界数据

    Attributes
    ----------
    z : float
        动力学指数
    nu : float
        关联长度指数
    d : int
        空间维数
    g_c : float
        临界耦合
    """
    z: float = 1.0
    nu: float = 1.0
    d: int = 1
    g_c: float = 1.0

    def __post_init__(self):
        if not (self.z > 0 and self.nu > 0):
            raise ProtocolError(f'critical exponents must be positive, got z={self.z}, nu={self.nu}')
        if int(self.d) != self.d or self.d < 1:
            raise ProtocolError(f'spatial dimension must be an integer >= 1, got d={self.d}')
        if not self.g_c > 0:
            raise ProtocolError(f'critical coupling must be positive, got g_c={self.g_c}')

    @property
    def z_nu(self):
        return self.z * self.nu


# 横场 Ising 链: z = ν = d = 1, g_c = 1
ISING = CriticalData()


@dataclass(frozen=True)
class AlphaPolicy:
    """
    ζ = c τ_Q^α

    alpha = 0 且 c 较大即为噪声场下的固定 ζ 模式
    """
    alpha: float
    c: float = 1.0

    def __post_init__(self):
        if self.alpha < 0:
            raise ProtocolError(f'alpha must be >= 0, got {self.alpha}')
        if not self.c > 0:
            raise ProtocolError(f'prefactor c must be positive, got {self.c}')

    @property
    def is_kz_faithful(self):
        return 0.25 <= self.alpha < 1

    def zeta_for(self, tau_Q):
        return self.c * tau_Q ** self.alpha


@dataclass(frozen=True)
class QuenchProtocol:
    """
    闭式淬火调度, 构造后不可变

    用 make_linear / make_oai / make_nloai 构造, 不要直接实例化
    """
    kind: ProtocolKind
    tau_Q: float
    g_i: float
    g_f: float
    t_i: float
    t_f: float
    crit: CriticalData = field(default=ISING)
    zeta: float = None
    r: float = 1.0
    theta: float = None

    @property
    def amplitude(self):
        """
        a = |ε₁(0)| = (ζ / zνθ)^{1/zν}, 仅对 OAI/NLOAI 有意义
        """
        z_nu = self.crit.z_nu
        return (self.zeta / (z_nu * self.theta)) ** (1.0 / z_nu)

    def descriptor(self):
        """
        Returns
        -------
        dict
            写入 runs.csv / 数据库的调度描述
        """
        return {'protocol': self.kind.value,
                'tau_Q': self.tau_Q,
                'zeta': self.zeta,
                'r': self.r,
                'g_i': self.g_i,
                'g_f': self.g_f}


def _check_couplings(g_i, g_f, crit):
    if not (math.isfinite(g_i) and math.isfinite(g_f)):
        raise ProtocolError(f'couplings must be finite, got g_i={g_i}, g_f={g_f}')
    if g_i <= g_f:
        raise ProtocolError(f'non-monotone window: g_i={g_i} must exceed g_f={g_f}')
    if not (g_i > crit.g_c > g_f >= 0):
        raise ProtocolError(f'the ramp must cross the critical point: '
                            f'need g_i > g_c > g_f >= 0, got g_i={g_i}, g_c={crit.g_c}, g_f={g_f}')


def _check_tau(tau_Q):
    if not (math.isfinite(tau_Q) and tau_Q > 0):
        raise ProtocolError(f'tau_Q must be positive and finite, got {tau_Q}')


def _check_r(r):
    if not (math.isfinite(r) and r >= 1):
        raise ProtocolError(f'nonlinearity exponent r must be >= 1, got {r}')


def _check_zeta(zeta, tau_Q, crit, kz_mode):
    if not (math.isfinite(zeta) and zeta > 0):
        raise ProtocolError(f'zeta must be positive and finite, got {zeta}')
    if kz_mode and zeta >= tau_Q:
        raise ProtocolError(f'zeta={zeta} >= tau_Q={tau_Q} breaks the adiabatic-stage premise zeta << tau_Q; '
                            f'pass kz_mode=False to allow it')
    smallness = (zeta / tau_Q) ** (1.0 / (1.0 + crit.z_nu))
    if smallness > ZETA_SMALLNESS_THRESHOLD:
        warnings.warn(f'(zeta/tau_Q)^(1/(1+z nu)) = {smallness:.3g} > {ZETA_SMALLNESS_THRESHOLD}: '
                      f'epsilon_1(0) offset is not small for zeta={zeta}, tau_Q={tau_Q}',
                      ZetaRegimeWarning,
                      stacklevel=3)


def _reduced_distances(g_i, g_f, crit):
    eps_i = (g_i - crit.g_c) / crit.g_c
    eps_f = (g_f - crit.g_c) / crit.g_c
    return eps_i, eps_f


def _theta(zeta, tau_Q, crit):
    z_nu = crit.z_nu
    return (zeta ** (1.0 / z_nu) * tau_Q) ** (z_nu / (1.0 + z_nu)) / z_nu


def make_linear(tau_Q, g_i=2.0, g_f=0.0, crit=ISING, r=1.0):
    """
    线性调度 ε(t) = -t/τ_Q; r > 1 时为非线性参考调度 ε(t) = -sgn(t)|t/τ_Q|^r

    Parameters
    ----------
    tau_Q : float
    g_i : float
    g_f : float
    crit : CriticalData
    r : float, default = 1.0

    Returns
    -------
    QuenchProtocol
    """
    _check_tau(tau_Q)
    _check_couplings(g_i, g_f, crit)
    _check_r(r)

    eps_i, eps_f = _reduced_distances(g_i, g_f, crit)
    t_i = -tau_Q * eps_i ** (1.0 / r)
    t_f = tau_Q * (-eps_f) ** (1.0 / r)

    return QuenchProtocol(kind=ProtocolKind.LQ.with_nonlinearity(r),
                          tau_Q=float(tau_Q),
                          g_i=float(g_i),
                          g_f=float(g_f),
                          t_i=t_i,
                          t_f=t_f,
                          crit=crit,
                          r=float(r))


def make_oai(tau_Q, zeta, g_i=2.0, g_f=0.0, crit=ISING, kz_mode=True):
    """
    OAI 调度

    Parameters
    ----------
    tau_Q : float
    zeta : float
        绝热系数
    g_i : float
    g_f : float
    crit : CriticalData
    kz_mode : bool, default = True
        为 True 时 ζ >= τ_Q 直接报错; 为 False 时允许 (α > 1 区, ζ→∞ 极限)

    Returns
    -------
    QuenchProtocol
    """
    return make_nloai(tau_Q, zeta, 1.0, g_i=g_i, g_f=g_f, crit=crit, kz_mode=kz_mode)


def make_nloai(tau_Q, zeta, r, g_i=5.0, g_f=0.0, crit=ISING, kz_mode=True):
    """
    NLOAI 调度, r = 1 时与 OAI 完全相同

    Parameters
    ----------
    tau_Q : float
    zeta : float
    r : float
        非线性指数, r >= 1
    g_i : float
    g_f : float
    crit : CriticalData
    kz_mode : bool, default = True

    Returns
    -------
    QuenchProtocol
    """
    _check_tau(tau_Q)
    _check_r(r)
    _check_couplings(g_i, g_f, crit)
    _check_zeta(zeta, tau_Q, crit, kz_mode)

    z_nu = crit.z_nu
    theta = _theta(zeta, tau_Q, crit)
    amplitude = (zeta / (z_nu * theta)) ** (1.0 / z_nu)

    eps_i, eps_f = _reduced_distances(g_i, g_f, crit)
    magnitude_i = eps_i ** (1.0 / r)
    magnitude_f = (-eps_f) ** (1.0 / r)

    # t = ∓θ [1 - (1 + |ε|/a)^{-zν}]
    t_i = theta * math.expm1(-z_nu * math.log1p(magnitude_i / amplitude))
    t_f = -theta * math.expm1(-z_nu * math.log1p(magnitude_f / amplitude))

    return QuenchProtocol(kind=ProtocolKind.OAI.with_nonlinearity(r),
                          tau_Q=float(tau_Q),
                          g_i=float(g_i),
                          g_f=float(g_f),
                          t_i=t_i,
                          t_f=t_f,
                          crit=crit,
                          zeta=float(zeta),
                          r=float(r),
                          theta=theta)


def _prepare_time(p, t):
    t_array = np.asarray(t, dtype=float)
    slack = 1e-12 * max(1.0, abs(p.t_i), abs(p.t_f))
    if np.any(~np.isfinite(t_array)) or np.any(t_array < p.t_i - slack) or np.any(t_array > p.t_f + slack):
        raise ProtocolError(f'time outside the schedule window [{p.t_i}, {p.t_f}]: {t}')
    return np.clip(t_array, p.t_i, p.t_f)


def _output(value, t):
    return float(value) if np.ndim(t) == 0 else value


def _base_magnitude(p, abs_t):
    """
    |ε| 的 r = 1 部分及其对 |t| 的导数
    """
    if p.kind.is_linear:
        return abs_t / p.tau_Q, np.full_like(abs_t, 1.0 / p.tau_Q)

    power = 1.0 / p.crit.z_nu
    remaining = p.theta - abs_t
    # (θ/(θ-|t|))^p - 1, 小 |t| 时不损失精度
    magnitude = p.amplitude * np.expm1(-power * np.log1p(-abs_t / p.theta))
    derivative = p.amplitude * power * (p.theta / remaining) ** power / remaining
    return magnitude, derivative


def epsilon(p, t):
    """
    ε(t), 单调递减, ε(0) = 0, sgn ε = -sgn t

    Parameters
    ----------
    p : QuenchProtocol
    t : float or np.ndarray

    Returns
    -------
    float or np.ndarray
    """
    t_array = _prepare_time(p, t)
    magnitude, _ = _base_magnitude(p, np.abs(t_array))
    # + 0.0 把 -0.0 变成 0.0
    return _output(-np.sign(t_array) * magnitude ** p.r + 0.0, t)


def g_of_t(p, t):
    """
    g(t) = g_c (1 + ε(t))
    """
    return _output(p.crit.g_c * (1.0 + np.asarray(epsilon(p, t))), t)


def epsilon_dot(p, t):
    """
    dε/dt 的解析式, 处处 <= 0; OAI 在 t = 0 处为 -1/τ_Q, r > 1 时为 0
    """
    t_array = _prepare_time(p, t)
    magnitude, derivative = _base_magnitude(p, np.abs(t_array))
    if p.r == 1:
        rate = -derivative
    else:
        rate = -p.r * magnitude ** (p.r - 1.0) * derivative
    return _output(rate, t)


def auxiliary_epsilon(p, t):
    """
    辅助量 ε₁(t) = -Θ'(t) a (θ/(θ-|t|))^{1/zν}, 满足 |ε₁/ε̇₁| = ζ|ε₁|^{-zν}
    """
    if p.kind.is_linear:
        raise ProtocolError(f'auxiliary epsilon_1 is only defined for OAI/NLOAI, not {p.kind.value}')
    t_array = _prepare_time(p, t)
    step = np.where(t_array >= 0, 1.0, -1.0)
    power = 1.0 / p.crit.z_nu
    return _output(-step * p.amplitude * (p.theta / (p.theta - np.abs(t_array))) ** power, t)


def timescales(p, t, auxiliary=False):
    """
    AIA 的两个时间尺度: 驱动时间 |ε/ε̇| 与弛豫时间 |ε|^{-zν}

    t = 0 时弛豫时间发散, 返回 (0.0, inf)

    Parameters
    ----------
    p : QuenchProtocol
    t : float or np.ndarray
    auxiliary : bool, default = False
        为 True 时用辅助量 ε₁ 代替 ε, 此时 drive / relax 恒等于 ζ

    Returns
    -------
    tuple
        (drive, relax)
    """
    t_array = _prepare_time(p, t)
    z_nu = p.crit.z_nu

    if auxiliary:
        eps = np.asarray(auxiliary_epsilon(p, t_array))
        _, derivative = _base_magnitude(p, np.abs(t_array))
        drive = np.abs(eps) / derivative
        relax = np.abs(eps) ** (-z_nu)
        return _output(drive, t), _output(relax, t)

    eps = np.asarray(epsilon(p, t_array))
    rate = np.asarray(epsilon_dot(p, t_array))
    at_crossing = t_array == 0
    with np.errstate(divide='ignore', invalid='ignore'):
        drive = np.where(at_crossing, 0.0, np.abs(eps / rate))
        relax = np.where(at_crossing, np.inf, np.abs(eps) ** (-z_nu))
    return _output(drive, t), _output(relax, t)


def total_time(p):
    """
    T = t_f - t_i
    """
    return p.t_f - p.t_i


def time_bound(p):
    """
    OAI/NLOAI 的总时长上界 2θ; 线性调度没有有限上界
    """
    if p.kind.is_linear:
        return math.inf
    return 2.0 * p.theta


def sample_times(p, samples=2000):
    """
    [t_i, t_f] 上的等距采样, 总是包含 t = 0
    """
    if samples < 2:
        raise ProtocolError(f'need at least 2 schedule samples, got {samples}')
    grid = np.linspace(p.t_i, p.t_f, int(samples))
    return np.unique(np.concatenate([grid, [0.0]]))


def schedule_frame(p, samples=2000, auxiliary=False):
    """
    调度的采样表, 列为 t, epsilon, g, drive_timescale, relax_timescale

    Returns
    -------
    pd.DataFrame
    """
    times = sample_times(p, samples)
    drive, relax = timescales(p, times, auxiliary=auxiliary)
    return pd.DataFrame({'t': times,
                         'epsilon': epsilon(p, times),
                         'g': g_of_t(p, times),
                         'drive_timescale': drive,
                         'relax_timescale': relax})
