import pytest

from oai_quench_tool.db.base import configure_db
from oai_quench_tool.db.db_utils import init_db


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False,
                     help='run the multi-minute acceptance sweeps')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip_slow = pytest.mark.skip(reason='needs --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def sqlite_db(tmp_path):
    """
    绑定到临时 sqlite 文件的空数据库
    """
    engine = configure_db('sqlite', path=tmp_path.joinpath('runs.sqlite'))
    init_db()
    yield engine
    engine.dispose()
