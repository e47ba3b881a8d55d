import warnings
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from etpa_lab.model import ExperimentGeometry, ModelBreakdownWarning, SampleSpec, absorption_fraction
from etpa_lab.source import (
    ConfigurationError,
    SourceConfig,
    expected_rates,
    pair_flux_density,
    pair_rate_from_pump,
    run_experiment,
    simulate_series,
)

GEO = ExperimentGeometry.standard()
SOLVENT = SampleSpec("toluene")
ZNTPP = SampleSpec("ZnTPP-63uM", 63e-6, 5.1e-18)


def test_pair_rate_from_pump():
    assert pair_rate_from_pump(0, 2.5e5) == 0
    assert pair_rate_from_pump(10, 2.5e5) == 2 * pair_rate_from_pump(5, 2.5e5)
    with pytest.raises(ValueError):
        pair_rate_from_pump(-1, 1)


def test_pair_flux_density():
    assert pair_flux_density(SourceConfig(), GEO, 20.0) == pytest.approx(5e6 / 2e-4, rel=1e-15)
    assert pair_flux_density(SourceConfig(), GEO, 0.0) == 0


def test_default_singles_at_max_power():
    rates = expected_rates(SourceConfig(), SOLVENT, GEO, 20.0)
    assert rates.singles_total == pytest.approx(5e5, rel=0.2)


def test_ideal_detection_only_loses_to_splitter():
    cfg = SourceConfig(detector_efficiency=1, coupling_efficiency=1, solvent_transmission=1)
    rates = expected_rates(cfg, SOLVENT, GEO, 7.0)
    assert rates.true_coincidences == pytest.approx(cfg.pairs_per_mw * 7.0 / 2, rel=1e-15)


def test_accidentals_formula():
    # default config gives 2.5e5 singles per detector at 20 mW
    rates = expected_rates(SourceConfig(), SOLVENT, GEO, 20.0)
    assert rates.singles1 == pytest.approx(2.5e5, rel=1e-12)
    assert rates.accidentals == pytest.approx(2.5e5 * 2.5e5 * 9e-9, rel=1e-12)
    assert rates.accidentals == pytest.approx(562.5, rel=1e-12)


def test_sample_to_solvent_ratio():
    cfg = SourceConfig()
    solv = expected_rates(cfg, SOLVENT, GEO, 10.0)
    samp = expected_rates(cfg, ZNTPP, GEO, 10.0)
    assert samp.true_coincidences / solv.true_coincidences == pytest.approx(1 - 0.1935, rel=1e-3)
    # with a vanishing window the measured coincidences follow the same ratio
    tiny = replace(cfg, coincidence_window_s=1e-15)
    ratio = expected_rates(tiny, ZNTPP, GEO, 10.0).coincidences / expected_rates(tiny, SOLVENT, GEO, 10.0).coincidences
    assert ratio == pytest.approx(1 - absorption_fraction(63e-6, GEO, 5.1e-18), rel=1e-9)


def test_breakdown_flag_propagates():
    rhb = SampleSpec("RhB-110mM", 110e-3, 0.017e-18)
    with pytest.warns(ModelBreakdownWarning):
        rates = expected_rates(SourceConfig(), rhb, GEO, 10.0)
    assert rates.breakdown
    assert rates.true_coincidences == 0


@settings(max_examples=50, deadline=None)
@given(
    st.floats(min_value=0, max_value=1e-3),
    st.floats(min_value=0, max_value=1e-17),
    st.floats(min_value=0.5, max_value=20),
)
def test_expected_means_monotone(c, sigma, power):
    cfg = SourceConfig()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ModelBreakdownWarning)
        base = expected_rates(cfg, SampleSpec("s", c, sigma), GEO, power).coincidences
        more_c = expected_rates(cfg, SampleSpec("s", c * 1.5, sigma), GEO, power).coincidences
        more_sigma = expected_rates(cfg, SampleSpec("s", c, sigma * 1.5), GEO, power).coincidences
        more_p = expected_rates(cfg, SampleSpec("s", c, sigma), GEO, power * 1.5).coincidences
    assert more_c <= base
    assert more_sigma <= base
    assert more_p >= base


def test_accidentals_vanish_linearly_in_window():
    accs = [expected_rates(SourceConfig(coincidence_window_s=t), SOLVENT, GEO, 10.0) for t in (1e-9, 2e-9, 4e-9)]
    assert accs[1].accidentals == pytest.approx(2 * accs[0].accidentals, rel=1e-12)
    assert accs[2].accidentals == pytest.approx(4 * accs[0].accidentals, rel=1e-12)
    small = expected_rates(SourceConfig(coincidence_window_s=1e-18), SOLVENT, GEO, 10.0)
    assert small.coincidences == pytest.approx(small.true_coincidences, rel=1e-9)


def test_zero_source_gives_zero_counts():
    series = simulate_series(SourceConfig(pairs_per_mw=0), SOLVENT, GEO)
    assert all((s.counts == 0).all() for s in series)


def test_same_seed_same_bins():
    a = run_experiment(SourceConfig(seed=11), [SOLVENT, ZNTPP], GEO)
    b = run_experiment(SourceConfig(seed=11), [SOLVENT, ZNTPP], GEO)
    c = run_experiment(SourceConfig(seed=12), [SOLVENT, ZNTPP], GEO)
    assert all(np.array_equal(x.counts, y.counts) for x, y in zip(a.series, b.series))
    assert not all(np.array_equal(x.counts, y.counts) for x, y in zip(a.series, c.series))


def test_points_do_not_depend_on_other_points():
    cfg = SourceConfig(seed=5)
    full = run_experiment(cfg, [SOLVENT, ZNTPP], GEO)
    alone = simulate_series(cfg, ZNTPP, GEO, sample_index=1)
    assert np.array_equal(full.for_label("ZnTPP-63uM")[4].counts, alone[4].counts)


def test_mean_converges_to_expected_rate():
    """Monte Carlo oracle: 60-bin means fall within 4 std/sqrt(60) of the truth."""
    cfg = SourceConfig(pump_powers_mw=(5.0,))
    rates = expected_rates(cfg, ZNTPP, GEO, 5.0)
    truth = {"singles1": rates.singles1, "singles2": rates.singles2, "coincidences": rates.coincidences}
    hits = {k: 0 for k in truth}
    n_seeds = 1000
    for seed in range(n_seeds):
        (s,) = simulate_series(replace(cfg, seed=seed), ZNTPP, GEO)
        for ch, mu in truth.items():
            mean = s.rates(ch).mean()
            # Poisson: per-bin std is sqrt(mean count)
            if abs(mean - mu) <= 4 * np.sqrt(mu) / np.sqrt(s.n_bins):
                hits[ch] += 1
    for ch, h in hits.items():
        assert h >= 0.99 * n_seeds, ch


@settings(max_examples=40, deadline=None)
@given(
    st.floats(min_value=0, max_value=1e6),
    st.floats(min_value=0, max_value=1),
    st.floats(min_value=0, max_value=1),
    st.floats(min_value=1e-9, max_value=1e-4),
    st.integers(min_value=0, max_value=2**32),
)
def test_coincidences_never_exceed_singles(k, eta, eta_c, tau, seed):
    cfg = SourceConfig(pump_powers_mw=(0.01, 1.0), pairs_per_mw=k, detector_efficiency=eta,
                       coupling_efficiency=eta_c, coincidence_window_s=tau, bins_per_point=20, seed=seed)
    for s in simulate_series(cfg, SOLVENT, GEO):
        assert (s.coincidences <= np.minimum(s.singles1, s.singles2)).all()
        assert (s.counts >= 0).all()


def test_overflowing_rates_rejected():
    with pytest.raises(ConfigurationError):
        simulate_series(SourceConfig(pairs_per_mw=1e30), SOLVENT, GEO)


def test_summary_recomputable_from_bins():
    (s,) = simulate_series(SourceConfig(pump_powers_mw=(3.0,)), SOLVENT, GEO)
    mean, std = s.summary["coincidences"]
    assert mean == s.coincidences.mean()
    assert std == pytest.approx(np.std(s.coincidences, ddof=1), rel=1e-15)


def test_run_experiment_cardinality_and_reference():
    ds = run_experiment(SourceConfig(), [SOLVENT], GEO)
    assert len(ds.series) == 20
    assert ds.reference_label == "toluene"
    ds = run_experiment(SourceConfig(), [ZNTPP, SOLVENT], GEO)
    assert ds.labels == ["toluene", "ZnTPP-63uM"]  # reference written first
    assert ds.sample_labels == ["ZnTPP-63uM"]


def test_run_experiment_needs_solvent():
    with pytest.raises(ConfigurationError):
        run_experiment(SourceConfig(), [ZNTPP], GEO)
    with pytest.raises(ConfigurationError):
        run_experiment(SourceConfig(), [SOLVENT, SOLVENT], GEO)


def test_rates_increase_linearly_with_power():
    ds = run_experiment(SourceConfig(), [SOLVENT, ZNTPP], GEO)
    for label in ds.labels:
        p = np.array([s.pump_power_mw for s in ds.for_label(label)])
        r = np.array([s.rates("coincidences").mean() for s in ds.for_label(label)])
        assert (np.diff(r) > 0).all()
        assert np.corrcoef(p, r)[0, 1] > 0.999
    # sample sits below the solvent at every power
    r_solv = [s.rates("coincidences").mean() for s in ds.for_label("toluene")]
    r_samp = [s.rates("coincidences").mean() for s in ds.for_label("ZnTPP-63uM")]
    assert all(a > b for a, b in zip(r_solv, r_samp))


def test_zero_concentration_sample_matches_solvent():
    """Monte Carlo oracle: a c = 0 sample is indistinguishable from the reference."""
    blank = SampleSpec("blank", 0.0, 5.1e-18)
    rejections = 0
    for seed in range(100):
        ds = run_experiment(SourceConfig(seed=seed), [SOLVENT, blank], GEO)
        chi2 = 0.0
        for a, b in zip(ds.for_label("toluene"), ds.for_label("blank")):
            ra, rb = a.rates("coincidences"), b.rates("coincidences")
            chi2 += (ra.mean() - rb.mean()) ** 2 / (ra.var(ddof=1) / len(ra) + rb.var(ddof=1) / len(rb))
        if stats.chi2.sf(chi2, df=len(ds.for_label("toluene"))) < 0.01:
            rejections += 1
    # expected ~1 rejection at alpha = 0.01; 5 or more has probability ~0.3%
    assert rejections < 5


def test_config_validation():
    with pytest.raises(ConfigurationError):
        SourceConfig(detector_efficiency=1.5)
    with pytest.raises(ConfigurationError):
        SourceConfig(solvent_transmission=0)
    with pytest.raises(ConfigurationError):
        SourceConfig(bins_per_point=0)
    with pytest.raises(ConfigurationError):
        SourceConfig(coincidence_window_s=0)
    with pytest.raises(ConfigurationError):
        SourceConfig(seed=-1)
    with pytest.raises(ConfigurationError):
        SourceConfig(pump_powers_mw=())
