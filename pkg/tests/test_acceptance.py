"""
桌面规模的完整扫描, 默认跳过, 用 pytest --runslow 运行
"""
import itertools

import numpy as np
import pytest

from oai_quench_tool.dynamics.evolution import evolve_pure, excitation_probability
from oai_quench_tool.dynamics.integrator import StepPolicy
from oai_quench_tool.protocols.schedules import epsilon, make_linear, make_nloai
from oai_quench_tool.scaling.fits import fit_power_law, fit_zeta_collapse
from oai_quench_tool.scaling.theory import kz_reference
from oai_quench_tool.utils.reports import akz_optimal_exponent
from oai_quench_tool.utils.run_config import WorkItem, log_grid
from oai_quench_tool.utils.sweep import run_items, runs_frame

pytestmark = pytest.mark.slow

WORKERS = 8
NOISE_GRID = [0.004, 0.008, 0.012, 0.016, 0.02]


def _sweep(items, N=2000):
    outcomes = run_items(items, N, StepPolicy(), workers=WORKERS)
    assert all(outcome.ok for outcome in outcomes)
    return runs_frame(outcomes)


def _oai(tau_Q, zeta, g_i=2.0, W=0.0, r=1.0, alpha=0.0):
    return WorkItem(kind='OAI' if r == 1 else 'NLOAI', tau_Q=tau_Q, zeta=zeta, alpha=alpha, r=r, W=W,
                    g_i=g_i, g_f=0.0)


def _linear(tau_Q, g_i=2.0, W=0.0, r=1.0):
    return WorkItem(kind='LQ' if r == 1 else 'NLQ', tau_Q=tau_Q, zeta=None, alpha=None, r=r, W=W,
                    g_i=g_i, g_f=0.0)


def test_kz_scaling():
    runs = _sweep([_oai(tau, 32.0) for tau in (50, 100, 200, 400, 800)])
    fit = fit_power_law(runs[['tau_Q', 'n']].itertuples(index=False, name=None))
    assert fit.exponent == pytest.approx(-0.5, abs=0.05)
    assert 0.9 <= runs['n'].iloc[-1] / kz_reference(800) <= 1.1


def test_initial_coupling_independence():
    runs = _sweep([_oai(200, 32.0, g_i=g_i) for g_i in (1.5, 2.0, 3.0, 5.0)])
    for a, b in itertools.combinations(runs['n'], 2):
        assert a == pytest.approx(b, rel=0.05)


def test_zeta_crossover_collapse():
    items = [_oai(tau, zeta) for tau in (500, 1000, 2000) for zeta in np.linspace(0.5, 3.0, 6)]
    collapse, _ = fit_zeta_collapse(_sweep(items)[['tau_Q', 'zeta', 'n']])
    assert 1.55 <= collapse.y <= 1.90
    assert 0.08 <= collapse.x <= 0.15


def _noise_exponent(items):
    _, fit = akz_optimal_exponent(_sweep(items, N=1000))
    assert fit is not None
    return -fit.exponent


def test_akz_exponent_oai():
    taus = log_grid(50, 5000, 8)
    items = [_oai(tau, tau ** 0.25, W=W, alpha=0.25) for W in NOISE_GRID for tau in taus]
    assert _noise_exponent(items) == pytest.approx(16.0 / 9.0, rel=0.1)


def test_akz_exponent_linear():
    taus = log_grid(100, 20000, 8)
    items = [_linear(tau, W=W) for W in NOISE_GRID for tau in taus]
    assert _noise_exponent(items) == pytest.approx(4.0 / 3.0, rel=0.05)


@pytest.mark.parametrize('r, exponent', [(2.0, -2.0 / 3.0), (3.0, -0.75)])
def test_nonlinear_kz_exponents(r, exponent):
    taus = [500, 1000, 2000, 4000]
    runs = _sweep([_oai(tau, 320.0, g_i=5.0, r=r) for tau in taus])
    fit = fit_power_law(runs[['tau_Q', 'n']].itertuples(index=False, name=None))
    assert fit.exponent == pytest.approx(exponent, abs=0.05)


def test_nloai_approaches_nonlinear_reference():
    tau = 2000
    reference = _sweep([_linear(tau, g_i=5.0, r=2.0)])['n'].iloc[0]
    densities = _sweep([_oai(tau, zeta, g_i=5.0, r=2.0) for zeta in (20.0, 80.0, 320.0)])['n'].tolist()
    assert densities[0] > densities[1] > densities[2] > reference


def test_nloai_beats_nonlinear_reference_under_noise():
    taus = [2000, 4000, 8000]
    linear = _sweep([_linear(tau, g_i=5.0, W=0.008, r=2.0) for tau in taus], N=1000)
    oai = _sweep([_oai(tau, 80.0, g_i=5.0, W=0.008, r=2.0) for tau in taus], N=1000)
    assert np.all(oai['n'].to_numpy() < linear['n'].to_numpy())


def test_landau_zener_modes():
    q = np.linspace(0.005, 0.05, 10)
    for tau in (100, 200):
        p = make_linear(tau)
        probabilities = excitation_probability(evolve_pure(p, q), q, p.g_f)
        np.testing.assert_allclose(probabilities, np.exp(-2.0 * np.pi * tau * q ** 2), atol=0.02)


def test_oai_tends_to_linear_at_huge_zeta():
    linear = make_linear(200)
    oai = make_nloai(200, 1e8, 1.0, g_i=2.0, kz_mode=False)
    t = np.linspace(-100, 100, 201)
    assert np.max(np.abs(epsilon(oai, t) - epsilon(linear, t))) < 1e-3
