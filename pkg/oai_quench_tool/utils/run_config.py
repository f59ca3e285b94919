"""
运行配置: 由配置文件与命令行参数合成 (命令行优先), 在任何积分开始前完成校验
"""
import math
import os
import warnings
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from oai_quench_tool.dynamics.integrator import StepPolicy
from oai_quench_tool.exceptions import ConfigError, QuenchToolError, ZetaRegimeWarning
from oai_quench_tool.ising.modes import mode_grid
from oai_quench_tool.protocols.schedules import (AlphaPolicy, ProtocolKind, make_linear, make_nloai)

MIN_POINTS_PER_DECADE = 2


@dataclass(frozen=True)
class ZetaPolicy:
    """
    fixed: 依次使用 values 中的 ζ
    power: ζ = prefactor * τ_Q^alpha
    """
    policy: str = 'fixed'
    values: tuple = (32.0,)
    alpha: float = 0.25
    prefactor: float = 1.0

    def __post_init__(self):
        if self.policy not in ('fixed', 'power'):
            raise ConfigError(f"zeta policy must be 'fixed' or 'power', got {self.policy!r}")
        if self.policy == 'fixed' and not self.values:
            raise ConfigError('fixed zeta policy needs at least one value')

    @property
    def recorded_alpha(self):
        """
        写入 runs.csv 的 α; 固定 ζ 记为 0
        """
        return float(self.alpha) if self.policy == 'power' else 0.0

    def zetas_for(self, tau_Q):
        if self.policy == 'power':
            try:
                return [AlphaPolicy(self.alpha, self.prefactor).zeta_for(tau_Q)]
            except QuenchToolError as e:
                raise ConfigError(str(e))
        return [float(v) for v in self.values]


@dataclass(frozen=True)
class WorkItem:
    """
    一次淬火的全部参数
    """
    kind: str
    tau_Q: float
    zeta: float
    alpha: float
    r: float
    W: float
    g_i: float
    g_f: float
    strict_kz: bool = True

    def build_protocol(self):
        if ProtocolKind(self.kind).is_linear:
            return make_linear(self.tau_Q, g_i=self.g_i, g_f=self.g_f, r=self.r)
        return make_nloai(self.tau_Q, self.zeta, self.r, g_i=self.g_i, g_f=self.g_f, kz_mode=self.strict_kz)

    def descriptor(self):
        return {'protocol': self.kind,
                'tau_Q': self.tau_Q,
                'zeta': self.zeta,
                'r': self.r,
                'g_i': self.g_i,
                'g_f': self.g_f}


@dataclass(frozen=True)
class RunConfig:
    kind: str
    g_i: tuple
    g_f: float
    r: tuple
    tau_grid: tuple
    zeta: ZetaPolicy
    W: tuple
    N: int = 2000
    eta: float = 0.02
    check_every: int = 100
    noise_rate_scale: float = 1.0
    samples: int = 2000
    strict_kz: bool = True
    out_dir: Path = field(default=Path('./result'))
    workers: int = 1

    @property
    def step_policy(self):
        return StepPolicy(eta=self.eta, check_every=self.check_every)

    def work_items(self):
        """
        按 W, g_i, r, ζ, τ_Q 的嵌套顺序展开; 输出行序即此顺序

        kind 按 r 归到同族的线性或非线性类型, 成功与失败的行记录同一类型
        """
        is_linear = ProtocolKind(self.kind).is_linear
        items = []
        for W in self.W:
            for g_i in self.g_i:
                for r in self.r:
                    zeta_slots = 1 if (is_linear or self.zeta.policy == 'power') else len(self.zeta.values)
                    for slot in range(zeta_slots):
                        for tau_Q in self.tau_grid:
                            zeta = None if is_linear else self.zeta.zetas_for(tau_Q)[slot]
                            items.append(WorkItem(kind=ProtocolKind(self.kind).with_nonlinearity(r).value,
                                                  tau_Q=float(tau_Q),
                                                  zeta=zeta,
                                                  alpha=None if is_linear else self.zeta.recorded_alpha,
                                                  r=float(r),
                                                  W=float(W),
                                                  g_i=float(g_i),
                                                  g_f=float(self.g_f),
                                                  strict_kz=self.strict_kz))
        return items

    def validate(self):
        """
        校验全部前置条件, 失败时抛出 ConfigError

        Returns
        -------
        RunConfig
        """
        if not self.tau_grid:
            raise ConfigError('tau_Q grid is empty')
        if not self.W:
            raise ConfigError('noise grid W is empty')
        if any(not (math.isfinite(w) and w >= 0) for w in self.W):
            raise ConfigError(f'noise strengths must be finite and >= 0, got {list(self.W)}')
        if not self.noise_rate_scale > 0:
            raise ConfigError(f'noise_rate_scale must be positive, got {self.noise_rate_scale}')
        if int(self.workers) != self.workers or self.workers < 1:
            raise ConfigError(f'workers must be a positive integer, got {self.workers}')
        if int(self.samples) != self.samples or self.samples < 2:
            raise ConfigError(f'schedule samples must be an integer >= 2, got {self.samples}')

        try:
            mode_grid(self.N)
            StepPolicy(eta=self.eta, check_every=self.check_every)
            with warnings.catch_warnings():
                warnings.simplefilter('ignore', ZetaRegimeWarning)
                for item in self.work_items():
                    item.build_protocol()
        except (QuenchToolError, ValueError) as e:
            raise ConfigError(str(e))

        _check_writable(self.out_dir)
        return self

    def to_dict(self):
        resolved = asdict(self)
        resolved['out_dir'] = str(self.out_dir)
        return resolved


def _check_writable(out_dir):
    try:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigError(f'output directory {out_dir} cannot be created: {e}')
    if not os.access(out_dir, os.W_OK):
        raise ConfigError(f'output directory {out_dir} is not writable')


def log_grid(tau_min, tau_max, points_per_decade):
    """
    [tau_min, tau_max] 上的对数等距网格, 每十倍程至少 2 个点

    Returns
    -------
    tuple[float]
    """
    if not (0 < tau_min < tau_max):
        raise ConfigError(f'log grid needs 0 < tau_min < tau_max, got {tau_min}, {tau_max}')
    if points_per_decade < MIN_POINTS_PER_DECADE:
        raise ConfigError(f'log grid needs at least {MIN_POINTS_PER_DECADE} points per decade, '
                          f'got {points_per_decade}')
    decades = math.log10(tau_max / tau_min)
    count = max(2, int(math.ceil(decades * points_per_decade - 1e-9)) + 1)
    return tuple(float(x) for x in np.logspace(math.log10(tau_min), math.log10(tau_max), count))


def _as_tuple(value):
    if value is None:
        return ()
    if isinstance(value, (list, tuple)):
        return tuple(float(v) for v in value)
    return (float(value),)


def from_config(config, **overrides):
    """
    由 Config 生成 RunConfig; overrides 中值为 None 的项被忽略

    Parameters
    ----------
    config : Config
    overrides : dict
        out_dir, workers, eta, N 等命令行参数

    Returns
    -------
    RunConfig
    """
    try:
        kind = ProtocolKind(str(config.get_protocol_conf('kind', 'OAI')).upper()).value
    except ValueError:
        raise ConfigError(f"unknown protocol kind {config.get_protocol_conf('kind')!r}")

    zeta_conf = config.get_zeta_conf()
    grid_conf = config.get_conf('grid')
    noise_conf = config.get_conf('noise')

    try:
        zeta = ZetaPolicy(policy=zeta_conf.get('policy', 'fixed'),
                          values=_as_tuple(zeta_conf.get('values', [32.0])),
                          alpha=float(zeta_conf.get('alpha', 0.25)),
                          prefactor=float(zeta_conf.get('prefactor', 1.0)))

        tau_grid = _as_tuple(grid_conf.get('tau_Q'))
        if not tau_grid and 'tau_min' in grid_conf:
            tau_grid = log_grid(float(grid_conf['tau_min']),
                                float(grid_conf['tau_max']),
                                grid_conf.get('points_per_decade', 4))

        run_config = RunConfig(kind=kind,
                               g_i=_as_tuple(config.get_protocol_conf('g_i', 2.0)),
                               g_f=float(config.get_protocol_conf('g_f', 0.0)),
                               r=_as_tuple(config.get_protocol_conf('r', 1.0)),
                               tau_grid=tau_grid,
                               zeta=zeta,
                               W=_as_tuple(noise_conf.get('W', [0.0])),
                               N=int(config.get_numerics_conf('modes', 2000)),
                               eta=float(config.get_numerics_conf('eta', 0.02)),
                               check_every=int(config.get_numerics_conf('check_every', 100)),
                               noise_rate_scale=float(noise_conf.get('noise_rate_scale', 1.0)),
                               samples=int(config.get_conf('schedule').get('samples', 2000)),
                               strict_kz=bool(config.get_protocol_conf('strict_kz', True)),
                               out_dir=config.get_file_path('result_file_path'),
                               workers=int(config.get_conf('run').get('workers', 1)))
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(f'malformed configuration value: {e}')

    applied = {key: value for key, value in overrides.items() if value is not None}
    if 'out_dir' in applied:
        applied['out_dir'] = Path(applied['out_dir'])
    if 'kind' in applied:
        try:
            applied['kind'] = ProtocolKind(str(applied['kind']).upper()).value
        except ValueError:
            raise ConfigError(f"unknown protocol kind {applied['kind']!r}")
    for key in ('g_i', 'r', 'tau_grid', 'W'):
        if key in applied:
            applied[key] = _as_tuple(applied[key])
    return replace(run_config, **applied)
