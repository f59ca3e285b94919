import pandas as pd
from sqlalchemy import select

from oai_quench_tool.db.base import Session
from oai_quench_tool.db.db_model import ModeProbability, Run
from oai_quench_tool.exceptions import QuenchToolError

RUN_FIELDS = ['run_key', 'protocol', 'tau_Q', 'zeta', 'alpha', 'r', 'W', 'N', 'g_i', 'g_f',
              'T_total', 'n', 'dt_eta', 'status', 'source']


def fetch_runs(protocols='all'):
    """
    从 run table 读取淬火记录

    Parameters
    ----------
    protocols : str or list[str], default = 'all'
        调度类型, 例如 'OAI' 或 ['LQ', 'OAI']

    Returns
    -------
    pd.DataFrame
    """
    stmt = select(*(getattr(Run, name) for name in RUN_FIELDS)).order_by(Run.id)
    if protocols != 'all':
        if isinstance(protocols, str):
            protocols = [protocols]
        stmt = stmt.where(Run.protocol.in_([p.upper() for p in protocols]))

    with Session() as session:
        runs = pd.DataFrame(session.execute(stmt).all(), columns=RUN_FIELDS)

    return runs


def fetch_mode_probabilities(run_key):
    """
    读取一次淬火的 p_q, 按 q 升序

    Parameters
    ----------
    run_key : str

    Returns
    -------
    pd.DataFrame
        列为 q, p_q
    """
    stmt = (select(ModeProbability.q, ModeProbability.p_q)
            .join(Run, Run.id == ModeProbability.run_id)
            .where(Run.run_key == run_key)
            .order_by(ModeProbability.q))

    with Session() as session:
        modes = pd.DataFrame(session.execute(stmt).all(), columns=['q', 'p_q'])

    if modes.empty:
        raise QuenchToolError(f"run {run_key} doesn't exist or has no mode data")
    return modes
