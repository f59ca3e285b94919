"""
CSV 输出格式: 浮点数一律写成最短可回读的十进制 (repr)
"""
import math
import numbers
from pathlib import Path

import pandas as pd


def format_value(value):
    """
    Parameters
    ----------
    value : Any

    Returns
    -------
    str
    """
    if value is None:
        return ''
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, numbers.Integral):
        return str(int(value))
    if isinstance(value, numbers.Real):
        value = float(value)
        return '' if math.isnan(value) else repr(value)
    return str(value)


def format_frame(frame):
    """
    把 DataFrame 的每个单元格转成字符串
    """
    return frame.apply(lambda column: column.map(format_value)).astype(str)


def write_csv(frame, path):
    """
    写出 CSV, 带表头, 不写索引

    Parameters
    ----------
    frame : pd.DataFrame
    path : Path or str

    Returns
    -------
    Path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if frame.empty:
        pd.DataFrame(columns=frame.columns).to_csv(path, index=False, lineterminator='\n')
    else:
        format_frame(frame).to_csv(path, index=False, lineterminator='\n')
    return path


def read_csv(path):
    """
    读回 write_csv 写出的表, 空单元格为 NaN
    """
    return pd.read_csv(path, float_precision='round_trip')
