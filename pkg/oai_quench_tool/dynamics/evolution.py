"""
单动量模的时间演化与缺陷密度

* 纯态: 含时 BdG 方程 i d/dt (u, v) = H_q(g(t)) (u, v)
* 噪声场: 每个 q 子空间的 Lindblad 方程

      dρ_q/dt = -i[H_q(g(t)), ρ_q] - κ W²/2 [σ_z, [σ_z, ρ_q]]

  κ 为 noise_rate_scale, 默认 1

所有 q 模放在一个数组里同时积分, 求和按 q 升序进行.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from oai_quench_tool.dynamics.integrator import StepPolicy, StepStatistics, rk4_integrate, step_count
from oai_quench_tool.exceptions import IntegrationError, ProtocolError
from oai_quench_tool.ising.modes import (ModeState, excited_state, ground_state,
                                         mode_grid, transverse_field)
from oai_quench_tool.protocols.schedules import g_of_t, time_bound, total_time

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-6
TRACE_TOLERANCE = 1e-6
POSITIVITY_TOLERANCE = 1e-8

# 2θ < SUDDEN_WINDOW_STEPS * dt 时直接走突变淬火的闭式解
SUDDEN_WINDOW_STEPS = 10


@dataclass(frozen=True)
class FrozenSchedule:
    """
    g 恒定的调度, 只用于冒烟测试与弛豫检查
    """
    g: float
    duration: float
    t_i: float = 0.0

    @property
    def t_f(self):
        return self.t_i + self.duration

    @property
    def g_i(self):
        return self.g

    @property
    def g_f(self):
        return self.g

    def descriptor(self):
        return {'protocol': 'FROZEN', 'tau_Q': None, 'zeta': None, 'r': None, 'g_i': self.g, 'g_f': self.g}


def frozen_schedule(g, duration):
    if not duration > 0:
        raise ProtocolError(f'frozen schedule needs a positive duration, got {duration}')
    return FrozenSchedule(g=float(g), duration=float(duration))


@dataclass(frozen=True)
class ModeDensity:
    """
    按 q 排列的 2x2 密度矩阵, 形状 (M, 2, 2)
    """
    rho: np.ndarray

    @property
    def trace(self):
        return np.real(self.rho[:, 0, 0] + self.rho[:, 1, 1])

    @property
    def hermiticity_error(self):
        return np.max(np.abs(self.rho - np.conj(np.transpose(self.rho, (0, 2, 1)))), axis=(1, 2))

    @property
    def min_eigenvalue(self):
        return _min_eigenvalue(self.rho)

    @property
    def coherence(self):
        """
        |ρ_01|, σ_z 本征基下的非对角元
        """
        return np.abs(self.rho[:, 0, 1])

    @classmethod
    def from_state(cls, state):
        u = np.atleast_1d(state.u)
        v = np.atleast_1d(state.v)
        rho = np.empty((len(u), 2, 2), dtype=complex)
        rho[:, 0, 0] = np.abs(u) ** 2
        rho[:, 0, 1] = u * np.conj(v)
        rho[:, 1, 0] = v * np.conj(u)
        rho[:, 1, 1] = np.abs(v) ** 2
        return cls(rho=rho)


@dataclass
class QuenchResult:
    """
    一次淬火的结果

    n 恒等于 (2/N) Σ p_q (q 升序求和)
    """
    descriptor: dict
    N: int
    W: float
    eta: float
    q: np.ndarray
    p: np.ndarray
    n: float
    T: float
    method: str
    stats: StepStatistics = field(default=None)

    def modes_frame(self):
        return pd.DataFrame({'q': self.q, 'p_q': self.p})

    def summary(self, alpha=None):
        """
        runs.csv 的一行
        """
        return {'protocol': self.descriptor['protocol'],
                'tau_Q': self.descriptor['tau_Q'],
                'zeta': self.descriptor['zeta'],
                'alpha': alpha,
                'r': self.descriptor['r'],
                'W': self.W,
                'N': self.N,
                'g_i': self.descriptor['g_i'],
                'g_f': self.descriptor['g_f'],
                'T_total': self.T,
                'n': self.n,
                'dt_eta': self.eta}


def _min_eigenvalue(rho):
    a = np.real(rho[:, 0, 0])
    d = np.real(rho[:, 1, 1])
    return 0.5 * (a + d) - np.sqrt(0.25 * (a - d) ** 2 + np.abs(rho[:, 0, 1]) ** 2)


def _control(schedule):
    if isinstance(schedule, FrozenSchedule):
        return lambda times: np.full(np.shape(times), schedule.g)
    return lambda times: g_of_t(schedule, np.clip(times, schedule.t_i, schedule.t_f))


def _step_size(schedule, W, step_policy):
    return step_policy.step_size(max(abs(schedule.g_i), abs(schedule.g_f)), W)


def _bdg_rhs(q):
    cos_q = np.cos(q)
    h_x = transverse_field(q)

    def rhs(y, g):
        h_z = 2.0 * (g - cos_q)
        u, v = y
        return -1j * np.stack((h_z * u + h_x * v, h_x * u - h_z * v))

    return rhs


def _lindblad_rhs(q, dephasing):
    cos_q = np.cos(q)
    h_x = transverse_field(q)

    def rhs(rho, g):
        h_z = 2.0 * (g - cos_q)
        a = rho[:, 0, 0]
        b = rho[:, 0, 1]
        c = rho[:, 1, 0]
        d = rho[:, 1, 1]
        out = np.empty_like(rho)
        # -i[H, ρ], H = [[h_z, h_x], [h_x, -h_z]]
        out[:, 0, 0] = -1j * h_x * (c - b)
        out[:, 0, 1] = -1j * (2.0 * h_z * b + h_x * (d - a)) - dephasing * b
        out[:, 1, 0] = -1j * (h_x * (a - d) - 2.0 * h_z * c) - dephasing * c
        out[:, 1, 1] = -1j * h_x * (b - c)
        return out

    return rhs


def _hermitize(rho):
    return 0.5 * (rho + np.conj(np.transpose(rho, (0, 2, 1))))


def _norm_check(q):
    def check(y, t, step):
        drift = np.abs(np.abs(y[0]) ** 2 + np.abs(y[1]) ** 2 - 1.0)
        worst = int(np.argmax(drift))
        if drift[worst] > NORM_TOLERANCE:
            raise IntegrationError(f'norm drift {drift[worst]:.3e} at q={q[worst]}, t={t}, dt={step}; '
                                   f'reduce the step factor eta',
                                   q=float(q[worst]), t=t, step=step)

    return check


def _density_check(q):
    def check(rho, t, step):
        trace_drift = np.abs(np.real(rho[:, 0, 0] + rho[:, 1, 1]) - 1.0)
        worst = int(np.argmax(trace_drift))
        if trace_drift[worst] > TRACE_TOLERANCE:
            raise IntegrationError(f'trace drift {trace_drift[worst]:.3e} at q={q[worst]}, t={t}, dt={step}; '
                                   f'reduce the step factor eta',
                                   q=float(q[worst]), t=t, step=step)
        lowest = _min_eigenvalue(rho)
        worst = int(np.argmin(lowest))
        if lowest[worst] < -POSITIVITY_TOLERANCE:
            raise IntegrationError(f'density matrix lost positivity (eigenvalue {lowest[worst]:.3e}) '
                                   f'at q={q[worst]}, t={t}, dt={step}; reduce the step factor eta',
                                   q=float(q[worst]), t=t, step=step)

    return check


def _integrate_pure(schedule, q, step_policy, initial=None, reverse=False, **observer):
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if initial is None:
        if reverse:
            raise ProtocolError('backward integration needs an explicit initial state')
        initial = ground_state(schedule.g_i, q)

    y0 = np.stack((np.broadcast_to(initial.u, q.shape), np.broadcast_to(initial.v, q.shape))).astype(complex)
    t_start, t_stop = (schedule.t_f, schedule.t_i) if reverse else (schedule.t_i, schedule.t_f)

    y, stats = rk4_integrate(_bdg_rhs(q),
                             y0,
                             t_start,
                             t_stop,
                             _control(schedule),
                             _step_size(schedule, 0.0, step_policy),
                             check=_norm_check(q),
                             check_every=step_policy.check_every,
                             **observer)
    return ModeState(u=y[0], v=y[1]), stats


def _integrate_lindblad(schedule, q, W, step_policy, noise_rate_scale=1.0, **observer):
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if W < 0:
        raise ProtocolError(f'noise strength W must be >= 0, got {W}')

    rho0 = ModeDensity.from_state(ground_state(schedule.g_i, q)).rho
    dephasing = 2.0 * noise_rate_scale * W * W

    rho, stats = rk4_integrate(_lindblad_rhs(q, dephasing),
                               rho0,
                               schedule.t_i,
                               schedule.t_f,
                               _control(schedule),
                               _step_size(schedule, W, step_policy),
                               check=_density_check(q),
                               check_every=step_policy.check_every,
                               after_step=_hermitize,
                               **observer)
    return ModeDensity(rho=rho), stats


def evolve_pure(schedule, q, step_policy=StepPolicy(), initial=None, reverse=False):
    """
    从 g_i 的基态出发积分含时 BdG 方程到 t_f

    Parameters
    ----------
    schedule : QuenchProtocol or FrozenSchedule
    q : float or np.ndarray
    step_policy : StepPolicy
    initial : ModeState, optional
        初态, 默认为 ground_state(g_i, q)
    reverse : bool, default = False
        为 True 时从 t_f 反向积分到 t_i, 此时必须给出 initial

    Returns
    -------
    ModeState
    """
    state, _ = _integrate_pure(schedule, q, step_policy, initial=initial, reverse=reverse)
    return state


def evolve_lindblad(schedule, q, W, step_policy=StepPolicy(), noise_rate_scale=1.0):
    """
    从 |gs(g_i)⟩⟨gs(g_i)| 出发积分单模 Lindblad 方程到 t_f

    Parameters
    ----------
    schedule : QuenchProtocol or FrozenSchedule
    q : float or np.ndarray
    W : float
        噪声强度
    step_policy : StepPolicy
    noise_rate_scale : float, default = 1.0
        退相位速率 W²/2 的额外倍数

    Returns
    -------
    ModeDensity
    """
    density, _ = _integrate_lindblad(schedule, q, W, step_policy, noise_rate_scale)
    return density


def excitation_probability(final, q, g_f):
    """
    末态在 g_f 激发态上的布居

    Parameters
    ----------
    final : ModeState or ModeDensity
    q : float or np.ndarray
    g_f : float

    Returns
    -------
    float or np.ndarray
    """
    excited = excited_state(g_f, q)
    if isinstance(final, ModeDensity):
        e0 = np.real(np.atleast_1d(excited.u))
        e1 = np.real(np.atleast_1d(excited.v))
        rho = final.rho
        p = np.real(e0 * e0 * rho[:, 0, 0] + e0 * e1 * (rho[:, 0, 1] + rho[:, 1, 0]) + e1 * e1 * rho[:, 1, 1])
    else:
        p = np.abs(excited.overlap(final)) ** 2

    return float(p[0]) if np.ndim(q) == 0 and np.ndim(p) == 1 else (float(p) if np.ndim(p) == 0 else p)


def _aggregate(p, N):
    return 2.0 * math.fsum(p) / N


def sudden_quench(g_i, g_f, N):
    """
    突变淬火的闭式解 p_q = |⟨ex(g_f, q)|gs(g_i, q)⟩|², 不做时间积分

    Returns
    -------
    QuenchResult
    """
    if g_i < g_f:
        raise ProtocolError(f'sudden quench expects g_i >= g_f, got g_i={g_i}, g_f={g_f}')

    grid = mode_grid(N)
    p = np.abs(excited_state(g_f, grid.q).overlap(ground_state(g_i, grid.q))) ** 2

    return QuenchResult(descriptor={'protocol': 'SUDDEN', 'tau_Q': None, 'zeta': None, 'r': None,
                                    'g_i': float(g_i), 'g_f': float(g_f)},
                        N=grid.N,
                        W=0.0,
                        eta=None,
                        q=grid.q,
                        p=p,
                        n=_aggregate(p, grid.N),
                        T=0.0,
                        method='sudden')


def defect_density(schedule, N=2000, W=0.0, step_policy=StepPolicy(), noise_rate_scale=1.0):
    """
    对全部 N/2 个模积分并求缺陷密度 n = (2/N) Σ_{q>0} p_q

    W = 0 时积分纯态 BdG 方程, 否则积分 Lindblad 方程.
    OAI/NLOAI 的窗口 2θ 小于 10 个步长时改用 sudden_quench.

    Parameters
    ----------
    schedule : QuenchProtocol or FrozenSchedule
    N : int, default = 2000
    W : float, default = 0.0
    step_policy : StepPolicy
    noise_rate_scale : float, default = 1.0

    Returns
    -------
    QuenchResult
    """
    grid = mode_grid(N)
    dt = _step_size(schedule, W, step_policy)
    descriptor = schedule.descriptor()

    if getattr(schedule, 'theta', None) is not None and time_bound(schedule) < SUDDEN_WINDOW_STEPS * dt:
        logger.warning('window 2*theta=%g is shorter than %d steps of %g, using the sudden-quench oracle',
                       time_bound(schedule), SUDDEN_WINDOW_STEPS, dt)
        result = sudden_quench(schedule.g_i, schedule.g_f, N)
        result.descriptor = descriptor
        result.eta = step_policy.eta
        return result

    if W == 0:
        final, stats = _integrate_pure(schedule, grid.q, step_policy)
        method = 'bdg'
    else:
        final, stats = _integrate_lindblad(schedule, grid.q, W, step_policy, noise_rate_scale)
        method = 'lindblad'

    p = excitation_probability(final, grid.q, schedule.g_f)
    duration = schedule.duration if isinstance(schedule, FrozenSchedule) else total_time(schedule)

    return QuenchResult(descriptor=descriptor,
                        N=grid.N,
                        W=float(W),
                        eta=step_policy.eta,
                        q=grid.q,
                        p=p,
                        n=_aggregate(p, grid.N),
                        T=duration,
                        method=method,
                        stats=stats)


def defect_density_trace(schedule, N=2000, W=0.0, samples=201, step_policy=StepPolicy(), noise_rate_scale=1.0):
    """
    积分过程中的瞬时缺陷密度 n(t) = (2/N) Σ_{q>0} p_q(t)

    p_q(t) 为 t 时刻在瞬时哈密顿量 H_q(g(t)) 激发态上的布居. 步长网格与 defect_density 相同,
    因此最后一行等于 defect_density 的 n.

    Parameters
    ----------
    schedule : QuenchProtocol or FrozenSchedule
    N : int, default = 2000
    W : float, default = 0.0
    samples : int, default = 201
        大致的采样点数 (含两端), 至少为 2
    step_policy : StepPolicy
    noise_rate_scale : float, default = 1.0

    Returns
    -------
    pd.DataFrame
        列为 t, g, n
    """
    if int(samples) != samples or samples < 2:
        raise ProtocolError(f'trace needs an integer number of samples >= 2, got {samples}')

    grid = mode_grid(N)
    control = _control(schedule)
    n_steps = step_count(schedule.t_f - schedule.t_i, _step_size(schedule, W, step_policy))
    records = []

    def observe(y, t):
        g = float(control(np.array([t]))[0])
        state = ModeState(u=y[0], v=y[1]) if W == 0 else ModeDensity(rho=y)
        records.append({'t': float(t), 'g': g, 'n': _aggregate(excitation_probability(state, grid.q, g), grid.N)})

    observer = {'observe': observe, 'observe_every': max(1, n_steps // (int(samples) - 1))}
    if W == 0:
        _integrate_pure(schedule, grid.q, step_policy, **observer)
    else:
        _integrate_lindblad(schedule, grid.q, W, step_policy, noise_rate_scale, **observer)

    return pd.DataFrame(records, columns=['t', 'g', 'n'])
