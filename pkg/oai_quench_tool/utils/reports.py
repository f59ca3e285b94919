"""
对 runs.csv 做标度拟合并与理论值比较
"""
import math

import pandas as pd

from oai_quench_tool.exceptions import ConfigError, FitError
from oai_quench_tool.protocols.schedules import ProtocolKind
from oai_quench_tool.scaling.fits import CURVE_KEYS, fit_power_law, fit_zeta_collapse, optimal_tau_table
from oai_quench_tool.scaling.theory import COLLAPSE_REFERENCE, theory_exponents
from oai_quench_tool.utils.formatter import format_value, write_csv

FIT_MODELS = ('kz', 'zeta_collapse', 'akz_optimal', 'nlkz')
REPORT_FIELDS = ['model', 'exponent', 'log_prefactor', 'prefactor', 'r_squared', 'n_points',
                 'theory', 'relative_deviation']

_REQUIRED_COLUMNS = {'kz': ('tau_Q', 'n', 'status'),
                     'nlkz': ('tau_Q', 'n', 'r', 'status'),
                     'zeta_collapse': ('tau_Q', 'zeta', 'n', 'status'),
                     'akz_optimal': ('protocol', 'tau_Q', 'W', 'n', 'alpha', 'r', 'status')}


def _successful_rows(runs, model):
    missing = [c for c in _REQUIRED_COLUMNS[model] if c not in runs.columns]
    if missing:
        raise ConfigError(f'runs table does not match the {model} schema: missing columns {missing}')
    ok = runs[runs['status'] == 'ok']
    if ok.empty:
        raise FitError(f'no successful runs to fit with the {model} model')
    return ok


def _single_value(rows, column):
    values = rows[column].dropna().unique()
    if len(values) != 1:
        raise FitError(f'{column} must take a single value for this fit, found {sorted(values)}')
    return float(values[0])


def _report(model, fit, theory):
    deviation = math.nan if theory == 0 else abs(fit.exponent - theory) / abs(theory)
    return {'model': model,
            'exponent': fit.exponent,
            'log_prefactor': fit.log_prefactor,
            'prefactor': fit.prefactor,
            'r_squared': fit.r_squared,
            'n_points': fit.n_points,
            'theory': theory,
            'relative_deviation': deviation}


def optimal_exponent_fit(table):
    """
    由 optimal_tau 表拟合 τ̃_Q ∝ W^{-s}

    表中只能有一族曲线 (除 W 外各分组列取值相同), 否则抛出 FitError

    Returns
    -------
    PowerLawFit or None
        有效 W 不足 3 个时为 None
    """
    usable = table[table['status'] == 'ok']
    family = [key for key in CURVE_KEYS if key in usable.columns and key != 'W']
    if family and len(usable[family].drop_duplicates()) > 1:
        raise FitError(f'tau_tilde ~ W^-s needs one curve per W, found '
                       f'{len(usable[family].drop_duplicates())} parameter sets over {family}')
    if len(usable) < 3:
        return None
    return fit_power_law(usable[['W', 'tau_tilde']].itertuples(index=False, name=None))


def akz_optimal_exponent(runs):
    """
    逐条 n(τ_Q) 曲线求最优 τ̃_Q, 再拟合 τ̃_Q ∝ W^{-s}

    Returns
    -------
    tuple[pd.DataFrame, PowerLawFit or None]
        optimal_tau 表; 有效 W 不足 3 个时拟合为 None
    """
    table = optimal_tau_table(runs[runs['W'] > 0])
    return table, optimal_exponent_fit(table)


def _akz_theory(rows):
    kind = ProtocolKind(rows['protocol'].iloc[0])
    r = _single_value(rows, 'r')
    if kind is ProtocolKind.NLQ:
        return -theory_exponents(r=r).s_nlq
    if kind is ProtocolKind.LQ:
        return -theory_exponents().s_lq
    if kind is ProtocolKind.NLOAI:
        return -theory_exponents(r=r).s_nloai
    alpha = _single_value(rows, 'alpha') if rows['alpha'].notna().any() else 0.0
    return -theory_exponents(alpha=alpha).s_oai


def fit_report(runs, model):
    """
    Parameters
    ----------
    runs : pd.DataFrame
        runs.csv 的内容
    model : str
        kz, zeta_collapse, akz_optimal, nlkz

    Returns
    -------
    dict
        REPORT_FIELDS 中的各项
    """
    if model not in FIT_MODELS:
        raise ConfigError(f'unknown fit model {model!r}, expected one of {FIT_MODELS}')

    rows = _successful_rows(runs, model)

    if model == 'kz':
        fit = fit_power_law(rows[['tau_Q', 'n']].itertuples(index=False, name=None))
        return _report(model, fit, -theory_exponents().beta_kz)

    if model == 'nlkz':
        fit = fit_power_law(rows[['tau_Q', 'n']].itertuples(index=False, name=None))
        return _report(model, fit, -theory_exponents(r=_single_value(rows, 'r')).beta_nlkz)

    if model == 'zeta_collapse':
        _, fit = fit_zeta_collapse(rows[['tau_Q', 'zeta', 'n']])
        return _report(model, fit, -COLLAPSE_REFERENCE.y)

    if rows['protocol'].nunique() != 1:
        raise FitError(f"akz_optimal needs a single protocol, found {sorted(rows['protocol'].unique())}")
    _, fit = akz_optimal_exponent(rows)
    if fit is None:
        raise FitError('akz_optimal needs at least 3 noise strengths with an interior minimum')
    return _report(model, fit, _akz_theory(rows))


def write_report(report, out_dir):
    """
    写出 fit_<model>.txt (key = value) 与 fit_<model>.csv

    Returns
    -------
    list[Path]
    """
    model = report['model']
    text_path = out_dir.joinpath(f'fit_{model}.txt')
    text_path.parent.mkdir(parents=True, exist_ok=True)
    text_path.write_text(''.join(f'{key} = {format_value(report[key])}\n' for key in REPORT_FIELDS),
                         encoding='utf-8')
    csv_path = write_csv(pd.DataFrame([report], columns=REPORT_FIELDS), out_dir.joinpath(f'fit_{model}.csv'))
    return [text_path, csv_path]
