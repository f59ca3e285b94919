import math
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from oai_quench_tool.exceptions import ConfigError
from oai_quench_tool.utils.configlib import Config
from oai_quench_tool.utils.formatter import format_value, read_csv, write_csv
from oai_quench_tool.utils.manifest import MANIFEST_NAME, RunManifest, sha256_of
from oai_quench_tool.utils.run_config import ZetaPolicy, from_config, log_grid

CONFIG_TEXT = """
[protocol]
kind = "OAI"
g_i = [2.0, 3.0]
g_f = 0.0
r = 1.0

[protocol.zeta]
policy = "fixed"
values = [8.0, 16.0]

[grid]
tau_Q = [100.0, 200.0]

[noise]
W = [0.0, 0.01]

[numerics]
eta = 0.01
modes = 64

[run]
workers = 2
"""


@pytest.fixture
def config(tmp_path):
    path = tmp_path.joinpath('config.toml')
    path.write_text(CONFIG_TEXT, encoding='utf-8')
    return Config(path)


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="doesn't exist"):
        Config(tmp_path.joinpath('missing.toml'))
    broken = tmp_path.joinpath('broken.toml')
    broken.write_text('[protocol\nkind = ', encoding='utf-8')
    with pytest.raises(ConfigError, match='not valid TOML'):
        Config(broken)


def test_config_getters(config):
    assert config.get_protocol_conf('kind') == 'OAI'
    assert config.get_protocol_conf('strict_kz', True) is True
    assert config.get_zeta_conf()['values'] == [8.0, 16.0]
    assert config.get_numerics_conf('modes') == 64
    assert config.get_conf('database') == {}
    assert config.get_file_path('result_file_path') == Path('.')


def test_from_config(config, tmp_path):
    run_config = from_config(config, out_dir=str(tmp_path.joinpath('out')), eta=None)
    assert run_config.kind == 'OAI'
    assert run_config.g_i == (2.0, 3.0)
    assert run_config.tau_grid == (100.0, 200.0)
    assert run_config.W == (0.0, 0.01)
    assert run_config.N == 64
    assert run_config.eta == 0.01
    assert run_config.workers == 2
    assert run_config.out_dir == tmp_path.joinpath('out')
    assert run_config.step_policy.eta == 0.01
    assert run_config.validate() is run_config
    assert run_config.to_dict()['out_dir'] == str(tmp_path.joinpath('out'))


def test_overrides_take_precedence(config, tmp_path):
    run_config = from_config(config, kind='lq', tau_grid=[50.0], W=0.02, out_dir=tmp_path)
    assert run_config.kind == 'LQ'
    assert run_config.tau_grid == (50.0,)
    assert run_config.W == (0.02,)
    with pytest.raises(ConfigError, match='unknown protocol kind'):
        from_config(config, kind='cubic')


def test_work_item_order(config, tmp_path):
    items = from_config(config, out_dir=tmp_path).work_items()
    assert len(items) == 16
    keys = [(item.W, item.g_i, item.zeta, item.tau_Q) for item in items]
    assert keys[:5] == [(0.0, 2.0, 8.0, 100.0),
                        (0.0, 2.0, 8.0, 200.0),
                        (0.0, 2.0, 16.0, 100.0),
                        (0.0, 2.0, 16.0, 200.0),
                        (0.0, 3.0, 8.0, 100.0)]
    assert keys[-1] == (0.01, 3.0, 16.0, 200.0)
    assert all(item.alpha == 0.0 for item in items)


def test_linear_items_carry_no_zeta(config, tmp_path):
    items = from_config(config, kind='LQ', out_dir=tmp_path).work_items()
    assert len(items) == 8
    assert all(item.zeta is None and item.alpha is None for item in items)
    assert items[0].build_protocol().t_i == pytest.approx(-100.0)


@pytest.mark.parametrize('kind, r, expected', [
    ('NLOAI', 1.0, 'OAI'),
    ('OAI', 2.0, 'NLOAI'),
    ('NLQ', 1.0, 'LQ'),
    ('LQ', 3.0, 'NLQ'),
])
def test_item_kind_follows_nonlinearity(config, tmp_path, kind, r, expected):
    items = from_config(config, kind=kind, r=r, W=0.0, out_dir=tmp_path).work_items()
    assert {item.kind for item in items} == {expected}
    assert {item.descriptor()['protocol'] for item in items} == {expected}
    assert {item.build_protocol().kind.value for item in items} == {expected}


def test_mixed_nonlinearity_splits_kinds(config, tmp_path):
    items = from_config(config, kind='NLOAI', r=[1.0, 2.0], W=0.0, g_i=2.0, out_dir=tmp_path).work_items()
    assert [(item.r, item.kind) for item in items][::4] == [(1.0, 'OAI'), (2.0, 'NLOAI')]


def test_power_zeta_policy(config, tmp_path):
    policy = ZetaPolicy(policy='power', alpha=0.25, prefactor=2.0)
    items = from_config(config, zeta=policy, W=0.0, g_i=2.0, out_dir=tmp_path).work_items()
    assert [item.zeta for item in items] == pytest.approx([2.0 * 100 ** 0.25, 2.0 * 200 ** 0.25])
    assert all(item.alpha == 0.25 for item in items)


def test_zeta_policy_validation():
    with pytest.raises(ConfigError):
        ZetaPolicy(policy='random')
    with pytest.raises(ConfigError):
        ZetaPolicy(policy='fixed', values=())


@pytest.mark.parametrize('overrides, message', [
    ({'tau_grid': []}, 'grid is empty'),
    ({'W': [-0.1]}, 'noise strengths'),
    ({'workers': 0}, 'workers'),
    ({'N': 7}, 'even integer'),
    ({'eta': -1.0}, 'eta'),
    ({'tau_grid': [10.0]}, 'zeta'),
])
def test_validation_errors(config, tmp_path, overrides, message):
    with pytest.raises(ConfigError, match=message):
        from_config(config, out_dir=tmp_path, **overrides).validate()


def test_non_strict_mode_allows_large_zeta(config, tmp_path):
    from_config(config, tau_grid=[10.0], strict_kz=False, out_dir=tmp_path).validate()


def test_log_grid():
    grid = log_grid(50, 3200, 4)
    assert len(grid) == 9
    assert grid[0] == pytest.approx(50)
    assert grid[-1] == pytest.approx(3200)
    assert np.allclose(np.diff(np.log(grid)), math.log(64) / 8)
    assert len(log_grid(100, 1e5, 12)) == 37


def test_log_grid_errors():
    with pytest.raises(ConfigError):
        log_grid(100, 1000, 1)
    with pytest.raises(ConfigError):
        log_grid(1000, 100, 4)


@pytest.mark.parametrize('value, expected', [
    (None, ''),
    (math.nan, ''),
    (0.1, '0.1'),
    (1.0 / 3.0, '0.3333333333333333'),
    (3, '3'),
    (np.int64(4), '4'),
    (np.float64(2.5), '2.5'),
    (True, 'True'),
    ('ok', 'ok'),
])
def test_format_value(value, expected):
    assert format_value(value) == expected


def test_csv_round_trip(tmp_path):
    frame = pd.DataFrame({'q': [math.pi / 7, 0.5], 'p_q': [1.0 / 3.0, math.nan], 'status': ['ok', 'ok']})
    path = write_csv(frame, tmp_path.joinpath('nested', 'modes.csv'))
    assert path.read_text(encoding='utf-8').splitlines()[0] == 'q,p_q,status'
    back = read_csv(path)
    assert back.loc[0, 'q'] == math.pi / 7
    assert back.loc[0, 'p_q'] == 1.0 / 3.0
    assert math.isnan(back.loc[1, 'p_q'])


def test_manifest(tmp_path):
    first = write_csv(pd.DataFrame({'a': [1.0]}), tmp_path.joinpath('runs.csv'))
    second = write_csv(pd.DataFrame({'b': [2.0]}), tmp_path.joinpath('modes', 'run_0000.csv'))
    manifest = RunManifest(config={'kind': 'OAI'})
    manifest.add_file(first, tmp_path)
    manifest.add_file(second, tmp_path)
    manifest.timings['run_0000'] = 0.5
    assert manifest.write(tmp_path).name == MANIFEST_NAME

    loaded = RunManifest.load(tmp_path)
    assert loaded.checksums == {'runs.csv': sha256_of(first), 'modes/run_0000.csv': sha256_of(second)}
    assert loaded.timings == {'run_0000': 0.5}
    assert loaded.verify(tmp_path) == []

    second.write_text('b\n3.0\n', encoding='utf-8')
    assert loaded.verify(tmp_path) == ['modes/run_0000.csv']
