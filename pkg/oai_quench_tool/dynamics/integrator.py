"""
定步长经典四阶 Runge-Kutta

不用自适应步长: 同样的输入与步长策略给出逐位相同的结果, 步长减半即可自检误差.
"""
import math
from dataclasses import dataclass, replace

import numpy as np

# 每次预先计算驱动量的步数
_DRIVE_CHUNK = 65536


@dataclass(frozen=True)
class StepPolicy:
    """
    dt = eta / max(ω_max, W², 1),  ω_max = 2(1 + max|g|)

    Attributes
    ----------
    eta : float
        步长因子
    check_every : int
        每隔多少步检查一次范数/迹/正定性
    """
    eta: float = 0.02
    check_every: int = 100

    def __post_init__(self):
        if not (math.isfinite(self.eta) and self.eta > 0):
            raise ValueError(f'step factor eta must be positive, got {self.eta}')
        if int(self.check_every) != self.check_every or self.check_every < 1:
            raise ValueError(f'check_every must be a positive integer, got {self.check_every}')

    def halved(self):
        return replace(self, eta=self.eta / 2.0)

    def step_size(self, g_max, W=0.0):
        omega_max = 2.0 * (1.0 + abs(g_max))
        return self.eta / max(omega_max, W * W, 1.0)


@dataclass(frozen=True)
class StepStatistics:
    """
    一次积分的步数统计
    """
    n_steps: int
    dt: float
    checks: int


def step_count(span, max_step):
    """
    覆盖时长 |span| 所需的步数, 步长不超过 max_step
    """
    return max(1, math.ceil(abs(span) / max_step))


def rk4_integrate(rhs, y0, t_start, t_stop, drive, max_step, check=None, check_every=100, after_step=None,
                  observe=None, observe_every=1):
    """
    对 dy/dt = rhs(y, drive(t)) 做定步长 RK4 积分, 允许 t_stop < t_start (反向积分)

    Parameters
    ----------
    rhs : callable
        rhs(y, control) -> dy/dt
    y0 : np.ndarray
    t_start : float
    t_stop : float
    drive : callable
        向量化的控制量 drive(times) -> np.ndarray
    max_step : float
        步长上限, 实际步长为 |t_stop - t_start| / ceil(|t_stop - t_start| / max_step)
    check : callable, optional
        check(y, t, step) 在每 check_every 步及终点调用, 发现漂移时应抛出异常
    check_every : int, default = 100
    after_step : callable, optional
        每步之后对状态的修正 (例如厄米化)
    observe : callable, optional
        observe(y, t) 在起点、每 observe_every 步及终点调用, 只读状态
    observe_every : int, default = 1

    Returns
    -------
    tuple[np.ndarray, StepStatistics]
    """
    span = t_stop - t_start
    n_steps = step_count(span, max_step)
    h = span / n_steps

    y = np.array(y0, copy=True)
    checks = 0
    if observe is not None:
        observe(y, t_start)

    for chunk_start in range(0, n_steps, _DRIVE_CHUNK):
        chunk_stop = min(chunk_start + _DRIVE_CHUNK, n_steps)
        # 半步网格上的控制量: 下标 2j 对应 t_j, 2j+1 对应 t_j + h/2
        half_steps = np.arange(2 * chunk_start, 2 * chunk_stop + 1)
        control = drive(t_start + 0.5 * h * half_steps)

        for local, step_index in enumerate(range(chunk_start, chunk_stop)):
            c0 = control[2 * local]
            c_half = control[2 * local + 1]
            c1 = control[2 * local + 2]

            k1 = rhs(y, c0)
            k2 = rhs(y + (0.5 * h) * k1, c_half)
            k3 = rhs(y + (0.5 * h) * k2, c_half)
            k4 = rhs(y + h * k3, c1)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

            if after_step is not None:
                y = after_step(y)

            done = step_index + 1
            if check is not None and (done % check_every == 0 or done == n_steps):
                check(y, t_start + done * h, abs(h))
                checks += 1
            if observe is not None and (done % observe_every == 0 or done == n_steps):
                observe(y, t_start + done * h)

    return y, StepStatistics(n_steps=n_steps, dt=abs(h), checks=checks)
