import math

import numpy as np
import pandas as pd
import pytest

from oai_quench_tool.exceptions import FitError
from oai_quench_tool.scaling.fits import (collapse_table, crossover_zeta, fit_akz_model, fit_crossover_zeta,
                                          fit_power_law, fit_zeta_collapse, optimal_tau, optimal_tau_table)
from oai_quench_tool.scaling.theory import AkzModel, ZetaCollapse, kz_reference
from oai_quench_tool.utils.reports import akz_optimal_exponent, fit_report
from oai_quench_tool.utils.run_config import log_grid


def test_power_law_exact():
    xs = [1.0, 2.0, 4.0, 8.0, 16.0]
    fit = fit_power_law([(x, 2.0 * x ** 1.5) for x in xs])
    assert fit.exponent == pytest.approx(1.5, abs=1e-12)
    assert fit.prefactor == pytest.approx(2.0)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.n_points == 5
    np.testing.assert_allclose(fit.predict([3.0]), [2.0 * 3.0 ** 1.5])


@pytest.mark.parametrize('scale', [1e-3, 0.5, 7.3, 1e4])
def test_power_law_scale_equivariance(scale):
    xs = [50.0, 100.0, 200.0, 400.0, 800.0, 1600.0]
    wobble = [1.03, 0.98, 1.01, 0.97, 1.02, 0.99]
    points = [(x, w * x ** -0.5) for x, w in zip(xs, wobble)]
    base = fit_power_law(points)
    scaled = fit_power_law([(x, scale * y) for x, y in points])
    assert scaled.exponent == pytest.approx(base.exponent, abs=1e-12)
    assert scaled.log_prefactor == pytest.approx(base.log_prefactor + math.log(scale), abs=1e-12)
    assert scaled.r_squared == pytest.approx(base.r_squared, abs=1e-12)


def test_power_law_constant_data():
    fit = fit_power_law([(x, 0.25) for x in (10, 20, 40)])
    assert fit.exponent == pytest.approx(0.0, abs=1e-12)
    assert fit.r_squared == 1.0


def test_power_law_accepts_frames():
    frame = pd.DataFrame({'x': [1, 10, 100], 'y': [3, 0.3, 0.03]})
    assert fit_power_law(frame).exponent == pytest.approx(-1.0)


@pytest.mark.parametrize('points', [
    [(1, 1), (2, 2)],
    [(1, 1), (2, -2), (3, 3)],
    [(0, 1), (2, 2), (3, 3)],
    [(2, 1), (2, 2), (2, 3)],
])
def test_power_law_rejects_bad_input(points):
    with pytest.raises(FitError):
        fit_power_law(points)


def _collapse_rows(collapse, taus, scaling_variables):
    rows = []
    for tau in taus:
        for s in scaling_variables:
            rows.append((tau, s * tau ** 0.25, kz_reference(tau) * (1.0 + collapse.excess(s))))
    return rows


def test_zeta_collapse_round_trip():
    truth = ZetaCollapse(x=0.113, y=1.732)
    rows = _collapse_rows(truth, [500, 1000, 2000], np.linspace(0.25, 0.95, 5))
    collapse, fit = fit_zeta_collapse(rows)
    assert collapse.x == pytest.approx(0.113, abs=1e-10)
    assert collapse.y == pytest.approx(1.732, abs=1e-10)
    assert fit.n_points == 15


def test_zeta_collapse_drops_rows_outside_window():
    truth = ZetaCollapse(x=0.113, y=1.732)
    rows = _collapse_rows(truth, [500, 1000], [0.05, 0.3, 0.5, 0.8, 3.0])
    frame = collapse_table(rows)
    assert list(frame.columns) == ['tau_Q', 'zeta', 'n', 'scaling_variable', 'excess']
    _, fit = fit_zeta_collapse(rows)
    assert fit.n_points == 6


def test_zeta_collapse_empty_window():
    rows = [(tau, 2.0 * tau ** 0.25, kz_reference(tau)) for tau in (100, 1000, 10000)]
    with pytest.raises(FitError, match='empty'):
        fit_zeta_collapse(rows)


def test_crossover_zeta_scaling():
    truth = ZetaCollapse(x=0.113, y=1.732)
    rows = _collapse_rows(truth, [100, 1000, 10000], np.geomspace(0.01, 1.0, 9))
    fit = fit_crossover_zeta(rows)
    assert fit.exponent == pytest.approx(0.25, abs=1e-9)
    assert fit.prefactor == pytest.approx((0.113 / 2.0) ** (1.0 / 1.732), rel=1e-9)


def test_crossover_zeta_needs_a_crossing():
    curve = [(zeta, kz_reference(100)) for zeta in (1.0, 2.0, 3.0)]
    with pytest.raises(FitError, match='never crosses'):
        crossover_zeta(curve, 100)


def _synthetic_noise_curve(taus):
    return [(tau, tau ** -0.5 + 1e-4 * tau ** 0.625) for tau in taus]


def test_optimal_tau_on_synthetic_curve():
    found = optimal_tau(_synthetic_noise_curve(log_grid(100, 1e5, 12)))
    analytic = 8000.0 ** (1.0 / 1.125)
    assert found.tau_tilde == pytest.approx(analytic, rel=0.02)
    assert found.n_min == pytest.approx(analytic ** -0.5 + 1e-4 * analytic ** 0.625, rel=1e-3)


def test_optimal_tau_symmetric_curve():
    curve = [(10, 3.0), (100, 2.0), (1000, 1.0), (10000, 2.0), (100000, 3.0)]
    found = optimal_tau(curve)
    assert found.tau_tilde == pytest.approx(1000.0)
    assert found.grid_index == 2


def test_optimal_tau_invariances():
    curve = _synthetic_noise_curve(log_grid(100, 1e5, 12))
    reference = optimal_tau(curve).tau_tilde
    scaled = [(tau, 7.0 * n) for tau, n in curve]
    assert optimal_tau(scaled).tau_tilde == pytest.approx(reference, rel=1e-9)
    assert optimal_tau(list(reversed(curve))).tau_tilde == pytest.approx(reference, rel=1e-9)


def test_optimal_tau_endpoint_minimum():
    taus = [100, 200, 400, 800, 1600]
    with pytest.raises(FitError, match='increases monotonically'):
        optimal_tau([(tau, tau ** 0.5) for tau in taus])
    with pytest.raises(FitError, match='decreases monotonically'):
        optimal_tau([(tau, tau ** -0.5) for tau in taus])


def test_optimal_tau_needs_enough_rows():
    with pytest.raises(FitError):
        optimal_tau([(10, 2.0), (100, 1.0), (1000, 2.0)])


def _akz_rows(model, Ws, taus):
    return pd.DataFrame([{'W': W, 'tau_Q': tau, 'n': model.density(tau, W)} for W in Ws for tau in taus])


def test_akz_round_trip():
    model = AkzModel(a=0.1125, b=0.05, beta=0.5, alpha_prime=0.625)
    rows = _akz_rows(model, [0.004, 0.008, 0.012, 0.016, 0.02], log_grid(100, 1e6, 24))

    table, fit = akz_optimal_exponent(rows)
    assert list(table['status']) == ['ok'] * 5
    for W, tau_tilde in zip(table['W'], table['tau_tilde']):
        assert tau_tilde == pytest.approx(model.optimal_tau(W), rel=0.01)
    assert -fit.exponent == pytest.approx(model.optimal_exponent, rel=0.01)

    fitted = fit_akz_model(rows[['tau_Q', 'W', 'n']], alpha=0.25)
    assert fitted.a == pytest.approx(0.1125, rel=1e-8)
    assert fitted.b == pytest.approx(0.05, rel=1e-8)
    assert fitted.alpha_prime == pytest.approx(0.625)


def test_optimal_tau_table_records_failures():
    taus = [100, 200, 400, 800, 1600]
    rows = pd.DataFrame([{'W': 0.01, 'tau_Q': tau, 'n': tau ** -0.5} for tau in taus])
    table = optimal_tau_table(rows)
    assert table.loc[0, 'status'].startswith('error')
    assert math.isnan(table.loc[0, 'tau_tilde'])


def test_optimal_tau_rejects_repeated_tau():
    taus = [100, 200, 200, 400, 800, 1600]
    with pytest.raises(FitError, match='repeated'):
        optimal_tau([(tau, tau ** -0.5 + 1e-4 * tau ** 0.625) for tau in taus])


def test_optimal_tau_table_keeps_curves_apart():
    taus = [100, 200, 400, 800, 1600, 3200]
    weak = AkzModel(a=0.1, b=0.3, beta=0.5, alpha_prime=0.625)
    strong = AkzModel(a=0.1, b=1.0, beta=0.5, alpha_prime=0.625)
    rows = pd.DataFrame([{'protocol': 'OAI', 'g_i': g_i, 'r': 1.0, 'zeta': 8.0, 'alpha': 0.0, 'W': 0.01,
                          'tau_Q': tau, 'n': model.density(tau, 0.01)}
                         for g_i, model in ((2.0, weak), (5.0, strong)) for tau in taus])

    table = optimal_tau_table(rows)
    assert list(table.columns) == ['protocol', 'g_i', 'r', 'zeta', 'alpha', 'W', 'tau_tilde', 'n_min', 'status']
    assert list(table['g_i']) == [2.0, 5.0]
    assert list(table['status']) == ['ok', 'ok']
    assert np.all(np.isfinite(table['n_min']))
    assert table.loc[0, 'tau_tilde'] > table.loc[1, 'tau_tilde']
    with pytest.raises(FitError, match='one curve per W'):
        akz_optimal_exponent(rows)


def test_optimal_tau_table_follows_power_law_zeta():
    model = AkzModel(a=0.1125, b=0.05, beta=0.5, alpha_prime=0.625)
    taus = log_grid(100, 1e6, 6)
    rows = pd.DataFrame([{'protocol': 'OAI', 'zeta': tau ** 0.25, 'alpha': 0.25, 'W': W, 'tau_Q': tau,
                          'n': model.density(tau, W)} for W in (0.004, 0.01) for tau in taus])
    table = optimal_tau_table(rows)
    assert len(table) == 2
    assert list(table['status']) == ['ok', 'ok']
    assert table['zeta'].isna().all()


def test_akz_fit_rejects_negative_noise_term():
    rows = [(tau, 0.01, tau ** -0.5 - 1e-6 * 1e-4 * tau ** 0.625) for tau in (100, 300, 1000, 3000)]
    with pytest.raises(FitError):
        fit_akz_model(rows, alpha=0.25)


def test_akz_report_uses_nonlinear_ramp_exponent():
    model = AkzModel(a=0.1, b=0.05, beta=2.0 / 3.0, alpha_prime=1.0)
    runs = _akz_rows(model, [0.004, 0.008, 0.012, 0.016, 0.02], log_grid(10, 1e5, 24))
    runs = runs.assign(protocol='NLQ', r=2.0, alpha=math.nan, status='ok')

    report = fit_report(runs, 'akz_optimal')
    assert report['theory'] == pytest.approx(-1.2)
    assert report['exponent'] == pytest.approx(-1.2, rel=0.01)
    assert report['relative_deviation'] < 0.01
