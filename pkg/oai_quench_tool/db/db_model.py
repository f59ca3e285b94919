"""
Database model

    ┌───────┐ one          many ┌────────────────────┐
    │  run  ├──────────────────►│  mode_probability  │
    └───────┘                   └────────────────────┘

run_key 由一次淬火的全部输入参数生成, 同一组参数只存一次
"""

from sqlalchemy import Column, Float, ForeignKey, Integer, String
from sqlalchemy.orm import relationship

from oai_quench_tool.db.base import Base


class Run(Base):
    __tablename__ = 'run'
    id = Column(Integer, primary_key=True, autoincrement=True)
    run_key = Column(String(64), unique=True, nullable=False)
    protocol = Column(String(8), nullable=False)
    tau_Q = Column(Float, nullable=False)
    zeta = Column(Float)
    alpha = Column(Float)
    r = Column(Float, nullable=False)
    W = Column(Float, nullable=False)
    N = Column(Integer, nullable=False)
    g_i = Column(Float, nullable=False)
    g_f = Column(Float, nullable=False)
    T_total = Column(Float)
    n = Column(Float)
    dt_eta = Column(Float)
    status = Column(String(255), nullable=False)
    source = Column(String(255))

    modes = relationship('ModeProbability', back_populates='run', cascade='all, delete-orphan')


class ModeProbability(Base):
    __tablename__ = 'mode_probability'
    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(Integer, ForeignKey('run.id'), nullable=False)
    q = Column(Float, nullable=False)
    p_q = Column(Float, nullable=False)

    run = relationship('Run', back_populates='modes')
