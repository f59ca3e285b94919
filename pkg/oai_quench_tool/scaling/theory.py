"""
缺陷密度与最优淬火时间的理论标度律

除特别说明外, 常数均针对横场 Ising 链 (z = ν = d = 1, g_c = 1).
"""
import math
from dataclasses import asdict, dataclass

from oai_quench_tool.exceptions import ProtocolError
from oai_quench_tool.protocols.schedules import ISING


@dataclass(frozen=True)
class ZetaCollapse:
    """
    ζ 交叉区的数据塌缩 n/n_KZ - 1 = x (τ_Q^{-1/4} ζ)^{-y}
    """
    x: float
    y: float

    def excess(self, scaling_variable):
        return self.x * scaling_variable ** (-self.y)


# g_i = 2 时的参考拟合值
COLLAPSE_REFERENCE = ZetaCollapse(x=0.113, y=1.732)


@dataclass(frozen=True)
class AkzModel:
    """
    噪声下的两项幂律模型 n = a τ_Q^{-β} + b W² τ_Q^{α'}

    zν = 1 时 b W² τ_Q^{α'} 即 b (W^{4/(1+α)} τ_Q)^{(1+α)/2}

    Attributes
    ----------
    a : float
        KZ 项前因子
    b : float
        噪声项前因子
    beta : float
        KZ 指数
    alpha_prime : float
        (α + zν) / (1 + zν)
    """
    a: float
    b: float
    beta: float
    alpha_prime: float

    def density(self, tau_Q, W):
        return self.a * tau_Q ** (-self.beta) + self.b * W * W * tau_Q ** self.alpha_prime

    def optimal_tau(self, W):
        """
        dn/dτ_Q = 0 的解析极小点
        """
        if W <= 0:
            return math.inf
        ratio = self.a * self.beta / (self.b * self.alpha_prime * W * W)
        return ratio ** (1.0 / (self.beta + self.alpha_prime))

    @property
    def optimal_exponent(self):
        """
        τ̃_Q ∝ W^{-s} 中的 s
        """
        return 2.0 / (self.beta + self.alpha_prime)


@dataclass(frozen=True)
class TheoryExponents:
    s_oai: float
    s_lq: float
    s_nlq: float
    s_nloai: float
    beta_kz: float
    beta_nlkz: float
    T_exponent: float
    s_oai_generic: float
    beta_nlkz_generic: float
    kz_in_total_time: float

    def to_dict(self):
        return asdict(self)


def kz_reference(tau_Q):
    """
    线性淬火的 KZ 缺陷密度 n_KZ = 1 / (2π sqrt(2 τ_Q))
    """
    if not tau_Q > 0:
        raise ProtocolError(f'tau_Q must be positive, got {tau_Q}')
    return 1.0 / (2.0 * math.pi * math.sqrt(2.0 * tau_Q))


def sudden_density(g_i):
    """
    从 g_i 突变到 g_f = 0 的近似缺陷密度 1/2 - 1/(4 g_i)
    """
    if g_i < 1:
        raise ProtocolError(f'sudden-quench estimate needs a paramagnetic start g_i >= 1, got {g_i}')
    return 0.5 - 0.25 / g_i


def theory_exponents(alpha=0.0, r=1.0, crit=ISING):
    """
    Parameters
    ----------
    alpha : float, default = 0.0
        ζ = c τ_Q^α 中的 α
    r : float, default = 1.0
        非线性指数
    crit : CriticalData

    Returns
    -------
    TheoryExponents
    """
    if alpha < 0:
        raise ProtocolError(f'alpha must be >= 0, got {alpha}')
    if r < 1:
        raise ProtocolError(f'nonlinearity r must be >= 1, got {r}')

    z_nu = crit.z * crit.nu
    d_nu = crit.d * crit.nu

    return TheoryExponents(s_oai=4.0 / (2.0 + alpha),
                           s_lq=4.0 / 3.0,
                           s_nlq=2.0 * (1.0 + r * z_nu) / (1.0 + r * z_nu + crit.d * r * crit.nu),
                           s_nloai=4.0 * (1.0 + r) / (1.0 + 3.0 * r),
                           beta_kz=z_nu / (1.0 + z_nu),
                           beta_nlkz=crit.d * r * crit.nu / (1.0 + r * z_nu),
                           T_exponent=(alpha + z_nu) / (1.0 + z_nu),
                           s_oai_generic=2.0 * (1.0 + z_nu) / ((crit.d + crit.z) * crit.nu + alpha),
                           beta_nlkz_generic=r * d_nu / (1.0 + r * d_nu),
                           kz_in_total_time=d_nu / (alpha + z_nu))


def defect_model(zeta, tau_Q, collapse=COLLAPSE_REFERENCE, g_i=2.0):
    """
    按 ζ 分段预测 OAI 的缺陷密度

    * ζ = 0: 突变淬火 1/2 - 1/(4 g_i)
    * τ_Q^{-1/4} ζ > 1: n_KZ
    * 其余: min(n_KZ (1 + x s^{-y}), 突变值), s = τ_Q^{-1/4} ζ

    s = 1 归入交叉区.

    Parameters
    ----------
    zeta : float
    tau_Q : float
    collapse : ZetaCollapse, default = COLLAPSE_REFERENCE
    g_i : float, default = 2.0

    Returns
    -------
    float
    """
    if zeta < 0:
        raise ProtocolError(f'zeta must be >= 0, got {zeta}')

    n_sudden = sudden_density(g_i)
    if zeta == 0:
        return n_sudden

    n_kz = kz_reference(tau_Q)
    scaling_variable = tau_Q ** -0.25 * zeta
    if scaling_variable > 1.0:
        return n_kz
    return min(n_kz * (1.0 + collapse.excess(scaling_variable)), n_sudden)


def adiabatic_time_for_size(L, epsilon_target, alpha=0.0, crit=ISING):
    """
    有限尺寸 L 的链达到激发概率 epsilon_target 所需总时间的标度估计, 前因子取 1

    T ~ ε^{-(1+α)/2} L^{(1+zν)(1+α)/(2ν)}
    """
    if L < 2:
        raise ProtocolError(f'chain length L must be >= 2, got {L}')
    if not 0 < epsilon_target < 1:
        raise ProtocolError(f'epsilon_target must lie in (0, 1), got {epsilon_target}')

    z_nu = crit.z * crit.nu
    return epsilon_target ** (-(1.0 + alpha) / 2.0) * L ** ((1.0 + z_nu) * (1.0 + alpha) / (2.0 * crit.nu))
