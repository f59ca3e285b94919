"""
横场 Ising 链在 Jordan-Wigner / Bogoliubov 变换后的单动量模

每个 q ∈ (0, π) 对应一个 2x2 BdG 矩阵

    H_q(g) = [[ε_q, Δ_q], [Δ_q, -ε_q]],   ε_q = 2(g - cos q),  Δ_q = 2 sin q

本征值 ±ω_q, ω_q = 2 sqrt(1 + g² - 2g cos q).
记 φ = atan2(Δ_q, ε_q) ∈ [0, π], 则

    基态 (sin φ/2, -cos φ/2),  激发态 (cos φ/2, sin φ/2)

两者第一个非零分量均为非负实数.
"""
import math
from dataclasses import dataclass

import numpy as np

from oai_quench_tool.exceptions import DegenerateModeError, ModeGridError

# ω_q 低于此值视为能隙闭合
GAP_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ModeState:
    """
    Bogoliubov 振幅 (u, v), 标量或按 q 排列的数组
    """
    u: np.ndarray
    v: np.ndarray

    @property
    def norm(self):
        return np.sqrt(np.abs(self.u) ** 2 + np.abs(self.v) ** 2)

    def overlap(self, other):
        """
        ⟨self|other⟩
        """
        return np.conj(self.u) * other.u + np.conj(self.v) * other.v


@dataclass(frozen=True)
class ModeGrid:
    """
    反周期 (偶宇称) 动量 q_m = π(2m - 1)/N, m = 1 … N/2
    """
    N: int
    q: np.ndarray

    @property
    def spacing(self):
        return 2.0 * math.pi / self.N

    def __len__(self):
        return len(self.q)


def longitudinal_field(g, q):
    """
    h_z = ε_q = 2(g - cos q)
    """
    return 2.0 * (g - np.cos(q))


def transverse_field(q):
    """
    h_x = Δ_q = 2 sin q
    """
    return 2.0 * np.sin(q)


def bdg_matrix(g, q):
    """
    单个 (g, q) 的 2x2 BdG 矩阵
    """
    h_z = float(longitudinal_field(g, q))
    h_x = float(transverse_field(q))
    return np.array([[h_z, h_x], [h_x, -h_z]])


def dispersion(g, q):
    """
    ω_q = 2 sqrt(1 + g² - 2g cos q)
    """
    return 2.0 * np.sqrt(1.0 + g * g - 2.0 * g * np.cos(q))


def _mixing_angle(g, q):
    h_z = longitudinal_field(g, q)
    h_x = transverse_field(q)
    gap = np.hypot(h_z, h_x)
    if np.any(gap < GAP_TOLERANCE):
        closing = np.atleast_1d(q)[np.atleast_1d(gap < GAP_TOLERANCE)]
        raise DegenerateModeError(f'gap closes at g={g}, q={closing.tolist()}: eigenvectors are undefined')
    return np.arctan2(h_x, h_z)


def ground_state(g, q):
    """
    瞬时基态 (本征值 -ω_q)

    Parameters
    ----------
    g : float
    q : float or np.ndarray

    Returns
    -------
    ModeState
    """
    half = 0.5 * _mixing_angle(g, q)
    return ModeState(u=np.sin(half) + 0j, v=-np.cos(half) + 0j)


def excited_state(g, q):
    """
    瞬时激发态 (本征值 +ω_q)

    Parameters
    ----------
    g : float
    q : float or np.ndarray

    Returns
    -------
    ModeState
    """
    half = 0.5 * _mixing_angle(g, q)
    return ModeState(u=np.cos(half) + 0j, v=np.sin(half) + 0j)


def mode_grid(N):
    """
    Parameters
    ----------
    N : int
        格点数, 偶数且 >= 4

    Returns
    -------
    ModeGrid
    """
    if int(N) != N or N < 4 or N % 2:
        raise ModeGridError(f'N must be an even integer >= 4, got {N}')
    N = int(N)
    m = np.arange(1, N // 2 + 1)
    return ModeGrid(N=N, q=np.pi * (2 * m - 1) / N)
