import functools
import logging
import sys
import warnings
from pathlib import Path

import click

from oai_quench_tool import __version__
from oai_quench_tool.db.base import configure_db
from oai_quench_tool.db.db_utils import ensure_tables, init_db
from oai_quench_tool.db.fetch_data import fetch_runs
from oai_quench_tool.dynamics.evolution import defect_density, defect_density_trace
from oai_quench_tool.exceptions import ConfigError, FitError, QuenchToolError
from oai_quench_tool.protocols.schedules import ProtocolKind, schedule_frame
from oai_quench_tool.scaling.fits import optimal_tau_table
from oai_quench_tool.scaling.theory import kz_reference
from oai_quench_tool.utils.configlib import Config, config
from oai_quench_tool.utils.fill_db import populate_database, purge_runs
from oai_quench_tool.utils.formatter import read_csv, write_csv
from oai_quench_tool.utils.manifest import RunManifest
from oai_quench_tool.utils.reports import FIT_MODELS, fit_report, optimal_exponent_fit, write_report
from oai_quench_tool.utils.run_config import ZetaPolicy, from_config
from oai_quench_tool.utils.sweep import RunOutcome, run_items, write_outcomes
from oai_quench_tool.utils.workbook import save_to_excel

EXIT_RUN_FAILURE = 1
EXIT_CONFIG_ERROR = 2

logger = logging.getLogger(__name__)


def _exit_codes(command):
    """
    ConfigError -> 2, 其他 QuenchToolError -> 1
    """

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except ConfigError as e:
            click.echo(f'config error: {e}', err=True)
            sys.exit(EXIT_CONFIG_ERROR)
        except QuenchToolError as e:
            click.echo(f'error: {e}', err=True)
            sys.exit(EXIT_RUN_FAILURE)

    return wrapper


def _resolve(ctx, **overrides):
    """
    配置文件 + 全局参数 + 子命令参数 -> 校验后的 RunConfig
    """
    options = ctx.obj
    conf = Config(options['config_path']) if options['config_path'] else config
    return from_config(conf,
                       out_dir=options['out'],
                       workers=options['workers'],
                       eta=options['eta'],
                       N=options['modes'],
                       **overrides).validate()


def _zeta_override(zeta):
    return None if not zeta else ZetaPolicy(policy='fixed', values=tuple(zeta))


@click.group()
@click.version_option(__version__)
@click.option('--config', 'config_path', default=None, type=click.Path(dir_okay=False),
              help='配置文件路径，默认读取当前目录或包内的 config.toml')
@click.option('--out', 'out', default=None, type=click.Path(file_okay=False),
              help='输出目录，默认读取配置文件中的 result_file_path')
@click.option('--workers', 'workers', default=None, type=click.IntRange(min=1),
              help='并行进程数')
@click.option('--eta', 'eta', default=None, type=click.FLOAT,
              help='步长因子 dt = eta / max(2(1+|g|), W^2, 1)')
@click.option('--modes', 'modes', default=None, type=click.INT,
              help='格点数 N (积分 N/2 个动量模)')
@click.option('--verbose', '-v', 'verbose', is_flag=True, default=False,
              help='输出调试日志')
@click.pass_context
def main_cli(ctx, config_path, out, workers, eta, modes, verbose):
    """
    OAI / NLOAI 淬火模拟命令行
    """
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
                        force=True)
    logging.captureWarnings(True)
    ctx.ensure_object(dict)
    ctx.obj.update(config_path=config_path, out=out, workers=workers, eta=eta, modes=modes)


@main_cli.command()
@click.option('--kind', '-k', 'kind', default=None,
              type=click.Choice([k.value for k in ProtocolKind], case_sensitive=False),
              help='调度类型，默认读取配置文件')
@click.option('--tau_Q', '-t', 'tau_Q', default=None, type=click.FLOAT,
              help='淬火时间，默认取配置网格的第一个值')
@click.option('--zeta', '-z', 'zeta', default=None, type=click.FLOAT,
              help='绝热系数，默认取配置文件')
@click.option('--samples', '-s', 'samples', default=None, type=click.INT,
              help='采样点数，默认 2000')
@click.option('--auxiliary', '-aux', 'auxiliary', is_flag=True, default=False,
              help='用辅助量 epsilon_1 计算时间尺度')
@click.pass_context
@_exit_codes
def schedule(ctx, kind, tau_Q, zeta, samples, auxiliary):
    """
    输出调度采样表 schedule.csv
    """
    run_config = _resolve(ctx,
                          kind=kind,
                          tau_grid=None if tau_Q is None else [tau_Q],
                          zeta=_zeta_override([zeta] if zeta is not None else None),
                          samples=samples)
    protocol = run_config.work_items()[0].build_protocol()
    if auxiliary and protocol.kind.is_linear:
        raise ConfigError(f'--auxiliary needs an OAI/NLOAI schedule, got {protocol.kind.value}')

    path = write_csv(schedule_frame(protocol, run_config.samples, auxiliary=auxiliary),
                     run_config.out_dir.joinpath('schedule.csv'))
    click.echo(f'{protocol.kind.value}: t_i={protocol.t_i!r}, t_f={protocol.t_f!r}')
    click.echo(f'written: {path}')


@main_cli.command()
@click.option('--kind', '-k', 'kind', default=None,
              type=click.Choice([k.value for k in ProtocolKind], case_sensitive=False),
              help='调度类型，默认读取配置文件')
@click.option('--tau_Q', '-t', 'tau_Q', default=None, type=click.FLOAT,
              help='淬火时间，默认取配置网格的第一个值')
@click.option('--zeta', '-z', 'zeta', default=None, type=click.FLOAT,
              help='绝热系数，默认取配置文件')
@click.option('--W', '-w', 'W', default=None, type=click.FLOAT,
              help='噪声强度，默认取配置文件')
@click.option('--trace', '-tr', 'trace', default=None, type=click.IntRange(min=2),
              help='另行输出约 TRACE 个采样点的瞬时缺陷密度 trace.csv')
@click.pass_context
@_exit_codes
def quench(ctx, kind, tau_Q, zeta, W, trace):
    """
    单次淬火，输出 runs.csv 与 modes/run_0000.csv；给出 --trace 时另输出 trace.csv
    """
    run_config = _resolve(ctx,
                          kind=kind,
                          tau_grid=None if tau_Q is None else [tau_Q],
                          zeta=_zeta_override([zeta] if zeta is not None else None),
                          W=W)
    item = run_config.work_items()[0]
    result = defect_density(item.build_protocol(), N=run_config.N, W=item.W,
                            step_policy=run_config.step_policy,
                            noise_rate_scale=run_config.noise_rate_scale)

    outcome = RunOutcome(index=0, row=dict(result.summary(alpha=item.alpha), status='ok'),
                         modes=result.modes_frame(), seconds=0.0)
    write_outcomes([outcome], run_config.out_dir)

    click.echo(f'{item.kind} tau_Q={item.tau_Q!r} zeta={item.zeta!r} W={item.W!r}: '
               f'n={result.n!r} (n_KZ={kz_reference(item.tau_Q)!r}, method={result.method})')

    if trace is not None:
        frame = defect_density_trace(item.build_protocol(), N=run_config.N, W=item.W, samples=trace,
                                     step_policy=run_config.step_policy,
                                     noise_rate_scale=run_config.noise_rate_scale)
        click.echo(f'written: {write_csv(frame, run_config.out_dir.joinpath("trace.csv"))}')


def _run_grid(run_config):
    manifest = RunManifest(config=run_config.to_dict())
    outcomes = run_items(run_config.work_items(),
                         run_config.N,
                         run_config.step_policy,
                         noise_rate_scale=run_config.noise_rate_scale,
                         workers=run_config.workers)
    runs = write_outcomes(outcomes, run_config.out_dir, manifest)
    failed = sum(not outcome.ok for outcome in outcomes)
    return runs, manifest, failed


@main_cli.command()
@click.option('--kind', '-k', 'kind', default=None,
              type=click.Choice([k.value for k in ProtocolKind], case_sensitive=False),
              help='调度类型，默认读取配置文件')
@click.option('--tau_Q', '-t', 'tau_Q', default=None, type=click.FLOAT, multiple=True,
              help='淬火时间，可重复，默认读取配置网格')
@click.option('--zeta', '-z', 'zeta', default=None, type=click.FLOAT, multiple=True,
              help='固定绝热系数，可重复')
@click.option('--r', '-r', 'r', default=None, type=click.FLOAT, multiple=True,
              help='非线性指数，可重复')
@click.option('--g_i', 'g_i', default=None, type=click.FLOAT, multiple=True,
              help='初始耦合，可重复')
@click.pass_context
@_exit_codes
def sweep(ctx, kind, tau_Q, zeta, r, g_i):
    """
    对 tau_Q 网格 (以及 zeta, r, g_i, W) 批量淬火，输出 runs.csv、modes/ 与 manifest.json
    """
    run_config = _resolve(ctx,
                          kind=kind,
                          tau_grid=list(tau_Q) or None,
                          zeta=_zeta_override(zeta),
                          r=list(r) or None,
                          g_i=list(g_i) or None)
    runs, manifest, failed = _run_grid(run_config)
    manifest.write(run_config.out_dir)

    click.echo(f'{len(runs)} runs written to {run_config.out_dir}, {failed} failed')
    if failed:
        sys.exit(EXIT_RUN_FAILURE)


@main_cli.command('noise-sweep')
@click.option('--kind', '-k', 'kind', default=None,
              type=click.Choice([k.value for k in ProtocolKind], case_sensitive=False),
              help='调度类型，默认读取配置文件')
@click.option('--W', '-w', 'W', default=None, type=click.FLOAT, multiple=True,
              help='噪声强度，可重复，默认读取配置文件')
@click.pass_context
@_exit_codes
def noise_sweep(ctx, kind, W):
    """
    (W x tau_Q) 网格淬火，逐 W 求最优淬火时间并拟合 tau_tilde ~ W^-s
    """
    run_config = _resolve(ctx, kind=kind, W=list(W) or None)
    runs, manifest, failed = _run_grid(run_config)

    ok = runs[runs['status'] == 'ok']
    table = optimal_tau_table(ok[ok['W'] > 0])
    manifest.add_file(write_csv(table, run_config.out_dir.joinpath('optimal_tau.csv')), run_config.out_dir)
    for _, row in table[table['status'] != 'ok'].iterrows():
        curve = ', '.join(f'{key}={row[key]!r}' for key in table.columns[:-3])
        click.echo(f"{curve}: {row['status']}", err=True)

    try:
        fit = optimal_exponent_fit(table)
    except FitError as e:
        fit = None
        click.echo(f'exponent not fitted: {e}', err=True)
    else:
        if fit is None:
            click.echo('fewer than 3 noise strengths with an interior minimum: exponent not fitted', err=True)

    if fit is not None:
        report = fit_report(runs, 'akz_optimal')
        for path in write_report(report, run_config.out_dir):
            manifest.add_file(path, run_config.out_dir)
        click.echo(f"tau_tilde ~ W^{report['exponent']:.4f} "
                   f"(theory {report['theory']:.4f}, deviation {report['relative_deviation']:.2%})")

    manifest.write(run_config.out_dir)
    click.echo(f'{len(runs)} runs written to {run_config.out_dir}, {failed} failed')
    if failed:
        sys.exit(EXIT_RUN_FAILURE)


@main_cli.command()
@click.argument('runs_csv', type=click.Path(exists=True, dir_okay=False))
@click.option('--model', '-m', 'model', default='kz',
              type=click.Choice(FIT_MODELS),
              help='拟合模型，默认 kz')
@click.pass_context
@_exit_codes
def fit(ctx, runs_csv, model):
    """
    对 runs.csv 做标度拟合，输出 fit_<model>.txt 与 fit_<model>.csv
    """
    report = fit_report(read_csv(runs_csv), model)
    out_dir = Path(ctx.obj['out']) if ctx.obj['out'] else Path(runs_csv).parent
    write_report(report, out_dir)

    for key, value in report.items():
        click.echo(f'{key} = {value!r}' if isinstance(value, float) else f'{key} = {value}')


@main_cli.command()
@click.argument('out_dir', type=click.Path(exists=True, file_okay=False))
@click.option('--initiation', '-init', 'initiation', is_flag=True, default=False,
              help='初始化数据库')
@_exit_codes
def store(out_dir, initiation):
    """
    将输出目录中的 runs.csv 与 modes/ 填充进数据库
    """
    configure_db()
    if initiation is True:
        init_db()
    else:
        ensure_tables()

    stored, skipped = populate_database(out_dir)
    click.echo(f'{out_dir}: stored {stored}, skipped {skipped} already present')


@main_cli.command()
@click.option('--protocol', '-p', 'protocols', default=None,
              type=click.Choice([k.value for k in ProtocolKind], case_sensitive=False),
              multiple=True,
              help='调度类型，默认全部')
@click.option('--result_path', '-rp', 'result_path',
              default=config.get_file_path('result_file_path'),
              type=click.Path(),
              help='输出文件路径，默认读取配置文件中的路径')
@_exit_codes
def export(protocols, result_path):
    """
    从数据库导出淬火记录到工作簿 runs.xlsx，每种调度一个 sheet
    """
    configure_db()
    ensure_tables()
    runs = fetch_runs(list(protocols) if protocols else 'all')
    if runs.empty:
        raise QuenchToolError('no stored runs match the selection')

    sheets = {kind: group.reset_index(drop=True) for kind, group in runs.groupby('protocol', sort=True)}
    path = save_to_excel(sheets, 'runs.xlsx', result_path)
    click.echo(f'{len(runs)} runs exported to {path}')


@main_cli.command()
@click.option('--protocol', '-p', 'protocols', default=None,
              type=click.Choice([k.value for k in ProtocolKind], case_sensitive=False),
              multiple=True,
              help='调度类型，默认全部')
@_exit_codes
def purge(protocols):
    """
    从数据库删除已存入的淬火记录及其 p_q
    """
    configure_db()
    ensure_tables()
    deleted = purge_runs(list(protocols) if protocols else 'all')
    click.echo(f'{deleted} runs deleted')


def main():
    warnings.simplefilter('default')
    main_cli(prog_name='oaitool')


if __name__ == '__main__':
    main()
