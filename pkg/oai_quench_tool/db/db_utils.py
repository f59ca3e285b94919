from sqlalchemy import insert, delete
from sqlalchemy.dialects.mysql import insert as mysql_insert
from sqlalchemy.dialects.postgresql import insert as postgres_insert

from oai_quench_tool.db.base import Session, Base
from oai_quench_tool.exceptions import ConfigError


def init_db():
    """
    初始化数据库 (删除并重建全部表)
    """
    with Session() as session:
        Base.metadata.drop_all(session.bind)
        Base.metadata.create_all(session.bind)


def ensure_tables():
    """
    缺失的表才创建
    """
    with Session() as session:
        Base.metadata.create_all(session.bind)


def delete_from_table(model, *criteria):
    """
    删除某表中满足 criteria 的records, 不给条件时删除全部

    Returns
    -------
    int
        删除的行数
    """
    stmt = delete(model).execution_options(synchronize_session=False)
    if criteria:
        stmt = stmt.where(*criteria)
    with Session() as session:
        deleted = session.execute(stmt).rowcount
        session.commit()
    return deleted


def upsert(model, data, update_field, engine):
    """
    upsert实现
    依据engine.dialect得到当前数据库类型
    然后生成对应的upsert语句，当前支持mysql，postgresql，sqlite三种数据库
    on_duplicate_key_update for mysql
    on_conflict_do_nothing for postgresql
    insert or ignore for sqlite

    Parameters
    ----------
    model : Base
        orm model
    data : list[dict]
    update_field : list[str]
        第一个字段须为唯一键
    engine
        _engine.Engine instance

    Returns
    -------
    insert
        insert statement
    """

    if engine.dialect.name == 'mysql':
        stmt = mysql_insert(model).values(data)
        d = {f: getattr(stmt.inserted, f) for f in update_field}
        return stmt.on_duplicate_key_update(**d)
    elif engine.dialect.name == 'postgresql':
        stmt = postgres_insert(model).values(data)
        return stmt.on_conflict_do_nothing(index_elements=[update_field[0]])
    elif engine.dialect.name == 'sqlite':
        return insert(model).values(data).prefix_with('OR IGNORE')
    else:
        raise ConfigError(f"can't support {engine.dialect.name} dialect")
