import hashlib
import logging
import math
from pathlib import Path

from sqlalchemy import select

from oai_quench_tool.db.base import Session
from oai_quench_tool.db.db_model import ModeProbability, Run
from oai_quench_tool.db.db_utils import delete_from_table, upsert
from oai_quench_tool.exceptions import ConfigError
from oai_quench_tool.utils.formatter import format_value, read_csv
from oai_quench_tool.utils.sweep import MODES_DIR, RUN_COLUMNS, run_id

logger = logging.getLogger(__name__)

# 这些列共同决定一次淬火
_KEY_COLUMNS = ['protocol', 'tau_Q', 'zeta', 'alpha', 'r', 'W', 'N', 'g_i', 'g_f', 'dt_eta']


def run_key(row):
    """
    由输入参数生成的稳定键

    Parameters
    ----------
    row : dict or pd.Series

    Returns
    -------
    str
    """
    text = '|'.join(format_value(row[column]) for column in _KEY_COLUMNS)
    return hashlib.sha1(text.encode('utf-8')).hexdigest()


def _clean(value):
    if hasattr(value, 'item'):
        value = value.item()
    # NaN 入库为 NULL
    return None if isinstance(value, float) and math.isnan(value) else value


def populate_database(out_dir):
    """
    将 out_dir 下 runs.csv 与 modes/*.csv 的数据填入数据库, 已存在的 run 跳过

    Parameters
    ----------
    out_dir : Path or str

    Returns
    -------
    tuple[int, int]
        (新存入的 run 数, 跳过的 run 数)
    """
    out_dir = Path(out_dir)
    runs_path = out_dir.joinpath('runs.csv')
    if not runs_path.is_file():
        raise ConfigError(f"{runs_path} doesn't exist")

    runs = read_csv(runs_path)
    missing = [c for c in RUN_COLUMNS if c not in runs.columns]
    if missing:
        raise ConfigError(f'{runs_path} lacks columns {missing}')

    stored, skipped = 0, 0
    with Session() as session:
        for index, row in runs.iterrows():
            key = run_key(row)
            if session.execute(select(Run.id).where(Run.run_key == key)).scalar_one_or_none() is not None:
                skipped += 1
                continue

            record = {column: _clean(row[column]) for column in RUN_COLUMNS}
            record.update(run_key=key, source=str(out_dir))
            session.execute(upsert(Run, [record], update_field=['run_key'], engine=session.bind))
            stored_id = session.execute(select(Run.id).where(Run.run_key == key)).scalar_one()

            modes_path = out_dir.joinpath(MODES_DIR, f'{run_id(index)}.csv')
            if modes_path.is_file():
                modes = read_csv(modes_path)
                modes.insert(0, 'run_id', stored_id)
                session.execute(ModeProbability.__table__.insert(), modes.to_dict(orient='records'))
            elif row['status'] == 'ok':
                logger.warning('mode file %s is missing, storing the run summary only', modes_path)

            session.commit()
            stored += 1

    return stored, skipped


def purge_runs(protocols='all'):
    """
    删除已存入的 run 及其 p_q

    Parameters
    ----------
    protocols : str or list[str], default = 'all'

    Returns
    -------
    int
        删除的 run 数
    """
    if protocols == 'all':
        delete_from_table(ModeProbability)
        return delete_from_table(Run)

    if isinstance(protocols, str):
        protocols = [protocols]
    chosen = Run.protocol.in_([p.upper() for p in protocols])
    delete_from_table(ModeProbability, ModeProbability.run_id.in_(select(Run.id).where(chosen)))
    return delete_from_table(Run, chosen)
