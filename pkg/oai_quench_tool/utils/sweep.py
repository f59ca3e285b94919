"""
参数扫描: 每个 WorkItem 独立积分, 结果按输入顺序汇总

workers > 1 时用进程池并行; 每次淬火本身是确定的, 因此输出与 workers 无关.
"""
import logging
import math
import time
from dataclasses import dataclass
from multiprocessing import Pool

import pandas as pd

from oai_quench_tool.dynamics.evolution import defect_density
from oai_quench_tool.exceptions import QuenchToolError
from oai_quench_tool.utils.formatter import write_csv

logger = logging.getLogger(__name__)

RUN_COLUMNS = ['protocol', 'tau_Q', 'zeta', 'alpha', 'r', 'W', 'N', 'g_i', 'g_f', 'T_total', 'n', 'dt_eta', 'status']
MODES_DIR = 'modes'


@dataclass
class RunOutcome:
    """
    一个 WorkItem 的结果; 失败时 modes 为 None, status 记录原因
    """
    index: int
    row: dict
    modes: pd.DataFrame
    seconds: float

    @property
    def ok(self):
        return self.row['status'] == 'ok'


def run_id(index):
    return f'run_{index:04d}'


def _run_one(job):
    index, item, N, step_policy, noise_rate_scale = job
    started = time.perf_counter()
    try:
        result = defect_density(item.build_protocol(), N=N, W=item.W,
                                step_policy=step_policy, noise_rate_scale=noise_rate_scale)
    except QuenchToolError as e:
        row = dict(item.descriptor(), alpha=item.alpha, W=item.W, N=N, T_total=math.nan, n=math.nan,
                   dt_eta=step_policy.eta, status=f'error: {type(e).__name__}: {e}')
        return RunOutcome(index=index, row=row, modes=None, seconds=time.perf_counter() - started)

    row = dict(result.summary(alpha=item.alpha), status='ok')
    return RunOutcome(index=index, row=row, modes=result.modes_frame(), seconds=time.perf_counter() - started)


def run_items(items, N, step_policy, noise_rate_scale=1.0, workers=1):
    """
    Parameters
    ----------
    items : list[WorkItem]
    N : int
    step_policy : StepPolicy
    noise_rate_scale : float
    workers : int

    Returns
    -------
    list[RunOutcome]
        与 items 顺序一致
    """
    jobs = [(index, item, N, step_policy, noise_rate_scale) for index, item in enumerate(items)]

    if workers == 1 or len(jobs) <= 1:
        outcomes = []
        for job in jobs:
            outcomes.append(_run_one(job))
            _log_outcome(outcomes[-1], len(jobs))
        return outcomes

    outcomes = []
    with Pool(processes=min(workers, len(jobs))) as pool:
        # imap 保持输入顺序
        for outcome in pool.imap(_run_one, jobs):
            outcomes.append(outcome)
            _log_outcome(outcome, len(jobs))
    return outcomes


def _log_outcome(outcome, total):
    row = outcome.row
    if outcome.ok:
        logger.info('[%d/%d] %s tau_Q=%s zeta=%s W=%s: n=%.6g (%.1fs)', outcome.index + 1, total,
                    row['protocol'], row['tau_Q'], row['zeta'], row['W'], row['n'], outcome.seconds)
    else:
        logger.warning('[%d/%d] %s tau_Q=%s failed: %s', outcome.index + 1, total,
                       row['protocol'], row['tau_Q'], row['status'])


def runs_frame(outcomes):
    return pd.DataFrame([outcome.row for outcome in outcomes], columns=RUN_COLUMNS)


def write_outcomes(outcomes, out_dir, manifest=None):
    """
    写出 runs.csv 与 modes/run_XXXX.csv

    Returns
    -------
    pd.DataFrame
        runs 表
    """
    frame = runs_frame(outcomes)
    runs_path = write_csv(frame, out_dir.joinpath('runs.csv'))
    if manifest is not None:
        manifest.add_file(runs_path, out_dir)

    for outcome in outcomes:
        if manifest is not None:
            manifest.timings[run_id(outcome.index)] = round(outcome.seconds, 3)
        if outcome.modes is None:
            continue
        modes_path = write_csv(outcome.modes, out_dir.joinpath(MODES_DIR, f'{run_id(outcome.index)}.csv'))
        if manifest is not None:
            manifest.add_file(modes_path, out_dir)

    return frame
