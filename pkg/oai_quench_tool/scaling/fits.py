"""
log-log 最小二乘拟合: KZ 指数, ζ 交叉区塌缩, 最优淬火时间与 AKZ 模型
"""
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import stats

from oai_quench_tool.exceptions import FitError
from oai_quench_tool.protocols.schedules import ISING
from oai_quench_tool.scaling.theory import AkzModel, ZetaCollapse, kz_reference, theory_exponents

MIN_FIT_POINTS = 3
MIN_CURVE_POINTS = 5

# τ_Q^{-1/4} ζ 的塌缩窗口与 n/n_KZ - 1 的下限
COLLAPSE_WINDOW = (0.2, 1.0)
COLLAPSE_MIN_EXCESS = 0.05

# n/n_KZ - 1 穿过此值时的 ζ 记为交叉点
CROSSOVER_LEVEL = 2.0

# 区分不同 n(τ_Q) 曲线的列
CURVE_KEYS = ('protocol', 'g_i', 'r', 'zeta', 'alpha', 'W')


@dataclass(frozen=True)
class PowerLawFit:
    """
    y = exp(log_prefactor) x^exponent
    """
    exponent: float
    log_prefactor: float
    r_squared: float
    n_points: int

    @property
    def prefactor(self):
        return math.exp(self.log_prefactor)

    def predict(self, x):
        return self.prefactor * np.asarray(x, dtype=float) ** self.exponent


@dataclass(frozen=True)
class OptimalTau:
    """
    噪声下缺陷密度曲线的极小点
    """
    tau_tilde: float
    n_min: float
    grid_index: int


def _as_frame(rows, columns):
    if isinstance(rows, pd.DataFrame):
        missing = [c for c in columns if c not in rows.columns]
        if missing:
            raise FitError(f'input table lacks columns {missing}')
        return rows.loc[:, list(columns)].astype(float).reset_index(drop=True)
    return pd.DataFrame(list(rows), columns=list(columns), dtype=float)


def fit_power_law(points):
    """
    在 (log x, log y) 上做普通最小二乘

    Parameters
    ----------
    points : iterable of (x, y)
        至少 3 个点, x, y 全部为正

    Returns
    -------
    PowerLawFit
    """
    frame = _as_frame(points, ('x', 'y'))
    if len(frame) < MIN_FIT_POINTS:
        raise FitError(f'power-law fit needs at least {MIN_FIT_POINTS} points, got {len(frame)}')
    if not (np.all(frame['x'] > 0) and np.all(frame['y'] > 0)):
        raise FitError('power-law fit needs strictly positive x and y')

    log_x = np.log(frame['x'].to_numpy())
    log_y = np.log(frame['y'].to_numpy())
    if np.ptp(log_x) == 0:
        raise FitError('power-law fit needs at least two distinct x values')

    result = stats.linregress(log_x, log_y)
    residual = log_y - (result.intercept + result.slope * log_x)
    ss_tot = float(np.sum((log_y - log_y.mean()) ** 2))
    # 常数数据完全由零斜率解释
    r_squared = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(residual ** 2)) / ss_tot

    return PowerLawFit(exponent=float(result.slope),
                       log_prefactor=float(result.intercept),
                       r_squared=min(1.0, max(0.0, r_squared)),
                       n_points=len(frame))


def collapse_table(rows):
    """
    给每行加上 scaling_variable = τ_Q^{-1/4} ζ 与 excess = n/n_KZ - 1
    """
    frame = _as_frame(rows, ('tau_Q', 'zeta', 'n'))
    frame['scaling_variable'] = frame['tau_Q'] ** -0.25 * frame['zeta']
    frame['excess'] = frame['n'] / frame['tau_Q'].map(kz_reference) - 1.0
    return frame


def fit_zeta_collapse(rows):
    """
    拟合 n/n_KZ - 1 = x (τ_Q^{-1/4} ζ)^{-y}

    只保留 0.2 <= τ_Q^{-1/4} ζ <= 1 且 n/n_KZ - 1 >= 0.05 的行

    Parameters
    ----------
    rows : pd.DataFrame or iterable of (tau_Q, zeta, n)

    Returns
    -------
    tuple[ZetaCollapse, PowerLawFit]
    """
    frame = collapse_table(rows)
    low, high = COLLAPSE_WINDOW
    window = frame[(frame['scaling_variable'] >= low)
                   & (frame['scaling_variable'] <= high)
                   & (frame['excess'] >= COLLAPSE_MIN_EXCESS)]
    if window.empty:
        raise FitError(f'collapse window is empty: no row has {low} <= tau_Q^(-1/4) zeta <= {high} '
                       f'and n/n_KZ - 1 >= {COLLAPSE_MIN_EXCESS}')

    fit = fit_power_law(window[['scaling_variable', 'excess']].itertuples(index=False, name=None))
    collapse = ZetaCollapse(x=fit.prefactor, y=-fit.exponent)
    if not (collapse.x > 0 and collapse.y > 0):
        raise FitError(f'collapse fit is not decreasing: x={collapse.x}, y={collapse.y}')
    return collapse, fit


def crossover_zeta(curve, tau_Q, level=CROSSOVER_LEVEL):
    """
    固定 τ_Q 时 n/n_KZ - 1 穿过 level 的 ζ, 在 log-log 中线性插值

    Parameters
    ----------
    curve : pd.DataFrame or iterable of (zeta, n)
    tau_Q : float
    level : float, default = 2.0

    Returns
    -------
    float
    """
    frame = _as_frame(curve, ('zeta', 'n')).sort_values('zeta', kind='mergesort').reset_index(drop=True)
    frame = frame[frame['zeta'] > 0]
    excess = (frame['n'] / kz_reference(tau_Q) - 1.0).to_numpy()
    zetas = frame['zeta'].to_numpy()

    for k in range(len(zetas) - 1):
        upper, lower = excess[k], excess[k + 1]
        if upper >= level >= lower and upper > 0 and lower > 0:
            if upper == lower:
                return float(zetas[k])
            weight = (math.log(upper) - math.log(level)) / (math.log(upper) - math.log(lower))
            return float(math.exp(math.log(zetas[k]) + weight * (math.log(zetas[k + 1]) - math.log(zetas[k]))))

    raise FitError(f'n/n_KZ - 1 never crosses {level} at tau_Q={tau_Q}')


def fit_crossover_zeta(rows, level=CROSSOVER_LEVEL):
    """
    对每个 τ_Q 求 crossover_zeta, 再拟合 ζ* ∝ τ_Q^κ

    Returns
    -------
    PowerLawFit
    """
    frame = _as_frame(rows, ('tau_Q', 'zeta', 'n'))
    points = [(tau_Q, crossover_zeta(group[['zeta', 'n']], tau_Q, level))
              for tau_Q, group in frame.groupby('tau_Q', sort=True)]
    return fit_power_law(points)


def _parabola_vertex(x, y):
    """
    过三点抛物线的顶点; 非凸时返回 None
    """
    (x0, x1, x2), (y0, y1, y2) = x, y
    numerator = (x1 - x0) ** 2 * (y1 - y2) - (x1 - x2) ** 2 * (y1 - y0)
    denominator = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0)
    # 二阶差商 > 0 即开口向上
    curvature = ((y2 - y1) / (x2 - x1) - (y1 - y0) / (x1 - x0)) / (x2 - x0)
    if denominator == 0 or curvature <= 0:
        return None
    vertex = x1 - 0.5 * numerator / denominator
    vertex = min(max(vertex, x0), x2)
    value = (y0 * (vertex - x1) * (vertex - x2) / ((x0 - x1) * (x0 - x2))
             + y1 * (vertex - x0) * (vertex - x2) / ((x1 - x0) * (x1 - x2))
             + y2 * (vertex - x0) * (vertex - x1) / ((x2 - x0) * (x2 - x1)))
    return vertex, value


def optimal_tau(curve):
    """
    缺陷密度曲线 n(τ_Q) 的极小点

    先取离散最小值 (并列时取较小的 τ_Q), 再用 (log τ_Q, log n) 上过相邻三点的抛物线细化.

    Parameters
    ----------
    curve : pd.DataFrame or iterable of (tau_Q, n)
        至少 5 行, 极小点须在内部

    Returns
    -------
    OptimalTau
    """
    frame = _as_frame(curve, ('tau_Q', 'n')).sort_values('tau_Q', kind='mergesort').reset_index(drop=True)
    if len(frame) < MIN_CURVE_POINTS:
        raise FitError(f'optimal tau needs at least {MIN_CURVE_POINTS} rows, got {len(frame)}')
    repeated = frame['tau_Q'][frame['tau_Q'].duplicated()].unique()
    if len(repeated):
        raise FitError(f'optimal tau needs one row per tau_Q, repeated: {sorted(repeated)}')
    if not (np.all(frame['tau_Q'] > 0) and np.all(frame['n'] > 0)):
        raise FitError('optimal tau needs strictly positive tau_Q and n')

    tau = frame['tau_Q'].to_numpy()
    density = frame['n'].to_numpy()
    best = int(np.argmin(density))
    if best == 0:
        raise FitError(f'no interior minimum: n increases monotonically from tau_Q={tau[0]} '
                       f'(minimum at the smallest tau_Q)')
    if best == len(frame) - 1:
        raise FitError(f'no interior minimum: n decreases monotonically up to tau_Q={tau[-1]} '
                       f'(minimum at the largest tau_Q)')

    bracket = slice(best - 1, best + 2)
    refined = _parabola_vertex(np.log(tau[bracket]), np.log(density[bracket]))
    if refined is None:
        return OptimalTau(tau_tilde=float(tau[best]), n_min=float(density[best]), grid_index=best)

    log_tau, log_n = refined
    return OptimalTau(tau_tilde=math.exp(log_tau), n_min=math.exp(log_n), grid_index=best)


def curve_keys(rows):
    """
    rows 中出现的 CURVE_KEYS, 以及 ζ 按幂律随 τ_Q 变化的行的 ζ 置空后的副本

    Returns
    -------
    tuple[list[str], pd.DataFrame]
    """
    keys = [key for key in CURVE_KEYS if key in rows.columns]
    if 'W' not in keys:
        raise FitError('optimal tau table needs a W column')
    frame = rows.copy()
    if 'zeta' in keys and 'alpha' in keys:
        # ζ = c τ_Q^α 沿曲线变化, 曲线由 α 区分
        frame.loc[frame['alpha'].fillna(0.0) > 0, 'zeta'] = math.nan
    return keys, frame


def optimal_tau_table(rows):
    """
    逐条 n(τ_Q) 曲线求最优淬火时间

    曲线按 rows 中出现的 protocol, g_i, r, zeta, alpha, W 分组

    Parameters
    ----------
    rows : pd.DataFrame
        至少含 W, tau_Q, n 列

    Returns
    -------
    pd.DataFrame
        分组列加上 tau_tilde, n_min, status; 没有内部极小点的曲线记录 status 而不抛出
    """
    keys, frame = curve_keys(rows)
    records = []
    for name, group in frame.groupby(keys, sort=False, dropna=False):
        record = dict(zip(keys, name if isinstance(name, tuple) else (name,)))
        try:
            found = optimal_tau(group[['tau_Q', 'n']])
        except FitError as e:
            record.update(tau_tilde=math.nan, n_min=math.nan, status=f'error: {e}')
        else:
            record.update(tau_tilde=found.tau_tilde, n_min=found.n_min, status='ok')
        records.append(record)
    return pd.DataFrame(records, columns=keys + ['tau_tilde', 'n_min', 'status'])


def fit_akz_model(rows, alpha=0.0, crit=ISING, beta=None):
    """
    对 n = a τ_Q^{-β} + b W² τ_Q^{α'} 的 (a, b) 做线性最小二乘

    Parameters
    ----------
    rows : pd.DataFrame or iterable of (tau_Q, W, n)
    alpha : float, default = 0.0
        ζ = c τ_Q^α 的 α; LQ 对应 α = 1
    crit : CriticalData
    beta : float, optional
        KZ 指数, 默认取 theory_exponents 的 beta_kz

    Returns
    -------
    AkzModel
    """
    frame = _as_frame(rows, ('tau_Q', 'W', 'n'))
    if len(frame) < MIN_FIT_POINTS:
        raise FitError(f'AKZ fit needs at least {MIN_FIT_POINTS} rows, got {len(frame)}')

    exponents = theory_exponents(alpha=alpha, crit=crit)
    beta = exponents.beta_kz if beta is None else beta
    alpha_prime = exponents.T_exponent

    tau = frame['tau_Q'].to_numpy()
    design = np.column_stack((tau ** -beta, frame['W'].to_numpy() ** 2 * tau ** alpha_prime))
    (a, b), *_ = np.linalg.lstsq(design, frame['n'].to_numpy(), rcond=None)
    if not (a > 0 and b > 0):
        raise FitError(f'AKZ fit gave non-positive coefficients a={a}, b={b}')

    return AkzModel(a=float(a), b=float(b), beta=float(beta), alpha_prime=float(alpha_prime))
