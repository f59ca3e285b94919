from pathlib import Path

import pandas as pd
from openpyxl import load_workbook
from openpyxl.utils import get_column_letter

# 列宽上限 (字符)
_MAX_COLUMN_WIDTH = 60


def _fit_column_widths(file_path):
    """
    按每列最长内容调整列宽
    """
    wb = load_workbook(file_path)
    for sheet in wb.worksheets:
        for index, column in enumerate(sheet.iter_cols(values_only=True), start=1):
            width = max((len(str(value)) for value in column if value is not None), default=8)
            sheet.column_dimensions[get_column_letter(index)].width = min(width + 2, _MAX_COLUMN_WIDTH)
    wb.save(file_path)


def save_to_excel(dict_df, file_name, dir_path):
    """
    保存结果至xlsx文件
    keys of dict 为 sheet name
    values of dict 为 worksheet table

    Parameters
    ----------
    dict_df : dict[str, pd.DataFrame]
    file_name : str
    dir_path : Path or str

    Returns
    -------
    Path
    """

    dir_path = Path(dir_path)
    dir_path.mkdir(parents=True, exist_ok=True)
    file_path = dir_path.joinpath(file_name)

    with pd.ExcelWriter(file_path, engine='openpyxl') as writer:
        for key in dict_df:
            dict_df[key].to_excel(writer, sheet_name=key, index=False)

    _fit_column_widths(file_path)
    return file_path
