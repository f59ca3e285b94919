from sqlalchemy import create_engine
from sqlalchemy.orm import registry
from sqlalchemy.orm import sessionmaker

from oai_quench_tool.exceptions import ConfigError
from oai_quench_tool.utils.configlib import config


def _chosen_db(db_type=None, path=None, debug=False):
    """
    选择数据库（目前支持 Mysql, Postgresql, sqlite），生成对应的engine

    Parameters
    ----------
    db_type : str, optional
        数据库类型, 默认读取配置文件中的 chosen_db
    path : str, optional
        sqlite 文件路径, 覆盖配置文件
    debug : bool, default False
        是否开启echo

    Returns
    -------
    Engine
    """
    db_config = config.get_database_config()

    if db_type is None:
        db_type = db_config.get('chosen_db', 'sqlite')
    elif db_type not in db_config:
        db_type = 'sqlite'

    backend = db_config.get(db_type, {})
    user = backend.get('user')
    password = backend.get('password')
    url = backend.get('url')
    port = backend.get('port')
    db_name = backend.get('dbname')
    # sqlite
    path = path if path is not None else backend.get('path', './oai_runs.sqlite')

    if db_type == 'sqlite':
        connector_string = f'sqlite:///{path}'
    elif db_type == 'mysql':
        connector_string = f'mysql+mysqlconnector://{user}:{password}@{url}:{port}/{db_name}?charset=utf8mb4'
    elif db_type == 'postgresql':
        connector_string = f'postgresql+psycopg2://{user}:{password}@{url}:{port}/{db_name}?client_encoding=utf8'
    else:
        raise ConfigError(f"can't support {db_type} now")

    return create_engine(connector_string, future=True, echo=debug)


def configure_db(db_type=None, path=None, debug=False):
    """
    (重新) 绑定 Session 到选定的数据库

    Returns
    -------
    Engine
    """
    global engine
    engine = _chosen_db(db_type=db_type, path=path, debug=debug)
    Session.configure(bind=engine)
    return engine


mapper_registry = registry()
Base = mapper_registry.generate_base()
Session = sessionmaker(future=True)
engine = None
