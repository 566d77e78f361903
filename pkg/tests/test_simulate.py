import json
import math

import numpy as np
import pytest
from scipy import stats

from macrobell.basis import FourModeBasis
from macrobell.measures import fedorov_ratio
from macrobell.simulate import (
    BLOCK_PULSES,
    CANONICAL_SETTINGS,
    PAIRING_TABLE,
    FedorovEstimate,
    MeasurementSetting,
    SimConfig,
    _jackknife_series,
    _sample_series_counts,
    analyzer_distribution,
    efficiency_sweep,
    estimate_fedorov,
    estimate_witness,
    matched_witness,
    pairing_distribution,
    sample_analyzer_counts,
    sample_pulse,
    witness_under_loss,
)
from macrobell.states import BellLabel, build_bell_state, mean_photons_per_mode, schmidt_spectrum
from macrobell.witnesses import WitnessKind


# -- configuration and settings -------------------------------------------------------


def test_sim_config_validation():
    cfg = SimConfig(label="psi-minus", gamma=0.5)
    assert cfg.label is BellLabel.PSI_MINUS
    assert cfg.eta == 1.0 and cfg.pulses == 100_000
    for bad in ({"eta": 0.0}, {"eta": 1.2}, {"pulses": 0}, {"bin_width": 0}):
        with pytest.raises(ValueError):
            SimConfig(label="psi-minus", gamma=0.5, **bad)


def test_measurement_setting_components():
    assert MeasurementSetting(0.0, 0.0).component == 1
    assert MeasurementSetting(22.5, 45.0).component == 2
    assert MeasurementSetting(0.0, 45.0).component == 3
    assert MeasurementSetting(10.0, 0.0).component is None
    for comp, (h, q) in CANONICAL_SETTINGS.items():
        j = MeasurementSetting(h, q).jones()
        assert np.allclose(j @ j.conj().T, np.eye(2), atol=1e-14)


def test_pairing_table_shape():
    assert set(PAIRING_TABLE) == set(BellLabel)
    for pairings in PAIRING_TABLE.values():
        assert len(pairings) == 3
        assert set(pairings) <= {"cross", "parallel"}


# -- single pulses ---------------------------------------------------------------------


def test_sample_pulse_cross_correlations():
    rng = np.random.default_rng(12)
    setting = MeasurementSetting(0.0, 0.0)
    for _ in range(50):
        rec = sample_pulse(BellLabel.PSI_MINUS, 1.0, setting, 1.0, rng)
        x_a, y_a, x_b, y_b = rec.counts
        assert (x_a, y_a) == (y_b, x_b)
        assert rec.readout_a + rec.readout_b == 0
        assert rec.total == 2 * (x_a + y_a)


def test_sample_pulse_parallel_correlations():
    rng = np.random.default_rng(13)
    setting = MeasurementSetting(0.0, 0.0)  # phi-plus pairs S_1 in parallel
    for _ in range(50):
        rec = sample_pulse("phi-plus", 1.0, setting, 1.0, rng)
        x_a, y_a, x_b, y_b = rec.counts
        assert (x_a, y_a) == (x_b, y_b)
        assert rec.readout_a == rec.readout_b


def test_sample_pulse_validation():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        sample_pulse(BellLabel.PSI_MINUS, 0.5, MeasurementSetting(10.0, 0.0), 1.0, rng)
    with pytest.raises(ValueError):
        sample_pulse(BellLabel.PSI_MINUS, 0.5, MeasurementSetting(0.0, 0.0), 0.0, rng)
    with pytest.raises(ValueError):
        sample_pulse(BellLabel.PSI_MINUS, 0.5, MeasurementSetting(0.0, 0.0), 1.5, rng)


# -- witness estimation ------------------------------------------------------------


def test_matched_witness_map():
    assert matched_witness(BellLabel.PSI_MINUS) is WitnessKind.W_S
    assert matched_witness(BellLabel.PSI_PLUS) is WitnessKind.W_T1
    assert matched_witness(BellLabel.PHI_PLUS) is WitnessKind.W_T2
    assert matched_witness(BellLabel.PHI_MINUS) is WitnessKind.W_T3


def test_matched_run_has_exactly_zero_variance_terms():
    # perfect pairing at unit efficiency cancels every readout pulse by pulse
    cfg = SimConfig(label="psi-minus", gamma=1.0, pulses=20_000, seed=5)
    rep = estimate_witness(cfg)
    assert rep.kind is WitnessKind.W_S
    assert rep.variance_terms == (0.0, 0.0, 0.0)
    assert rep.value < 0.0
    assert rep.value == pytest.approx(rep.recomputed_value(), rel=1e-12)
    assert rep.meta["source"] == "simulation"
    assert rep.meta["label"] == "psi-minus"


def test_vacuum_run_is_degenerate():
    cfg = SimConfig(label="psi-minus", gamma=0.0, pulses=100, seed=3)
    rep = estimate_witness(cfg)
    assert rep.value == 0.0
    assert rep.value_error == 0.0
    assert rep.meta["degenerate_series"] == [1, 2, 3]


def test_determinism_same_seed_and_worker_count_invariance():
    base = dict(label="psi-plus", gamma=0.8, eta=0.7, pulses=10_000, seed=21)
    a = estimate_witness(SimConfig(**base))
    b = estimate_witness(SimConfig(**base))
    assert a.value == b.value and a.variance_terms == b.variance_terms
    # 10_000 pulses span three RNG blocks; threading must not change the stream
    assert 2 * BLOCK_PULSES < base["pulses"] <= 3 * BLOCK_PULSES
    c = estimate_witness(SimConfig(**base, workers=3))
    assert c.value == a.value
    assert c.variance_terms == a.variance_terms
    assert c.value_error == a.value_error


def test_jackknife_matches_explicit_delete_one():
    rng = np.random.default_rng(17)
    x = rng.integers(-5, 6, 200).astype(np.float64)
    t = rng.integers(0, 20, 200).astype(np.float64)
    var, mean, theta, s_theta, s_var = _jackknife_series(x, t)
    assert var == pytest.approx(np.var(x, ddof=1), rel=1e-12)
    assert mean == pytest.approx(t.mean(), rel=1e-12)
    assert theta == pytest.approx(var - (2.0 / 3.0) * mean, rel=1e-12)
    n = x.size
    theta_del = np.array([
        np.var(np.delete(x, i), ddof=1) - (2.0 / 3.0) * np.mean(np.delete(t, i))
        for i in range(n)
    ])
    var_del = np.array([np.var(np.delete(x, i), ddof=1) for i in range(n)])
    want_s_theta = math.sqrt((n - 1) / n * np.sum((theta_del - theta_del.mean()) ** 2))
    want_s_var = math.sqrt((n - 1) / n * np.sum((var_del - var_del.mean()) ** 2))
    assert s_theta == pytest.approx(want_s_theta, rel=1e-10)
    assert s_var == pytest.approx(want_s_var, rel=1e-10)


def test_jackknife_tiny_series():
    var, mean, theta, s_theta, s_var = _jackknife_series(
        np.array([1.0, 2.0]), np.array([3.0, 4.0]))
    assert math.isinf(s_theta) and math.isinf(s_var)


def test_sampled_marginal_photon_law():
    # chi-square of the sampled n marginal against (1-q) q^n, tail-lumped
    # so every bin keeps an expected count of at least five
    cfg = SimConfig(label="psi-plus", gamma=1.0, pulses=100_000, seed=42)
    counts = _sample_series_counts(cfg, "cross", series=0, run=0)
    n_samples = counts[:, 0]
    q = math.tanh(1.0) ** 2
    kmax = 0
    while cfg.pulses * q ** (kmax + 2) >= 5.0:
        kmax += 1
    probs = (1.0 - q) * q ** np.arange(kmax)
    probs = np.append(probs, q ** kmax)  # lumped tail
    observed = np.bincount(np.minimum(n_samples, kmax), minlength=kmax + 1)
    result = stats.chisquare(observed, cfg.pulses * probs)
    assert result.pvalue > 0.01


def test_empirical_joint_law_converges():
    # total-variation distance to the exact joint law shrinks with pulses
    lam = schmidt_spectrum(0.8, 60)
    exact = np.outer(lam, lam) / lam.sum() ** 2

    def tv(pulses):
        cfg = SimConfig(label="psi-minus", gamma=0.8, pulses=pulses, seed=9)
        counts = _sample_series_counts(cfg, "cross", series=0, run=0)
        emp = {}
        for n, m in zip(counts[:, 0], counts[:, 1]):
            emp[(n, m)] = emp.get((n, m), 0) + 1.0 / pulses
        dist = 0.0
        for n in range(61):
            for m in range(61):
                dist += abs(emp.pop((n, m), 0.0) - exact[n, m])
        dist += sum(emp.values())  # samples beyond the exact table, if any
        return 0.5 * dist

    tv_small, tv_big = tv(10_000), tv(1_000_000)
    assert tv_big < tv_small / 3.0
    # expected TV ~ 0.5 sqrt(2/(pi N)) sum sqrt(p_nm) ~ 2e-3 at 1e6 pulses
    assert tv_big < 3e-3


def test_sim_agrees_with_loss_formula():
    cfg = SimConfig(label="psi-minus", gamma=0.7, eta=0.8, pulses=50_000, seed=2)
    rep = estimate_witness(cfg)
    exact = witness_under_loss(0.7, 0.8)
    assert abs(rep.value - exact) <= 5.0 * rep.value_error
    assert rep.value_error > 0.0


def test_witness_under_loss_formula():
    n0 = mean_photons_per_mode(0.9)
    assert witness_under_loss(0.9, 1.0) == pytest.approx(-8.0 * n0, rel=1e-14)
    assert witness_under_loss(0.9, 1.0 / 3.0) == pytest.approx(0.0, abs=1e-15)
    assert witness_under_loss(0.9, 0.2) > 0.0  # certification lost below 1/3


def test_pulse_log_format(tmp_path):
    cfg = SimConfig(label="psi-plus", gamma=0.5, pulses=50, seed=7)
    path = tmp_path / "pulses.ndjson"
    estimate_witness(cfg, pulse_log=str(path))
    lines = path.read_text().splitlines()
    assert len(lines) == 3 * cfg.pulses
    for i, line in enumerate(lines):
        rec = json.loads(line)
        assert rec["pulse_id"] == i
        series = i // cfg.pulses
        comp = rec["setting"]["component"]
        assert comp == series + 1
        h, qw = CANONICAL_SETTINGS[comp]
        assert rec["setting"]["hwp_deg"] == h
        assert rec["setting"]["qwp_deg"] == qw
        assert len(rec["counts"]) == 4
        assert all(isinstance(c, int) and c >= 0 for c in rec["counts"])


# -- exact distributions and the generic analyzer route ------------------------------


def test_pairing_distribution_support():
    support, probs = pairing_distribution(BellLabel.PSI_MINUS, 1, 0.5, 8)
    assert probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(support[:, 0] == support[:, 3])  # x_a = y_b
    assert np.all(support[:, 1] == support[:, 2])  # y_a = x_b
    support_p, _ = pairing_distribution(BellLabel.PHI_PLUS, 1, 0.5, 8)
    assert np.all(support_p[:, 0] == support_p[:, 2])
    assert np.all(support_p[:, 1] == support_p[:, 3])


def test_analyzer_route_reproduces_pairing_law():
    # the wave-plate transform route must agree with the closed-form table
    # for every state and every canonical setting
    gamma, n_max = 0.25, 10
    for label in BellLabel:
        state = build_bell_state(label, gamma, n_max)
        for comp in (1, 2, 3):
            support, probs = pairing_distribution(label, comp, gamma, n_max)
            table = {tuple(row): p for row, p in zip(support, probs)}
            occ, aprobs = analyzer_distribution(state, MeasurementSetting(*CANONICAL_SETTINGS[comp]))
            tv = 0.0
            for row, p in zip(occ, aprobs):
                tv += abs(p - table.pop(tuple(row), 0.0))
            tv += sum(table.values())
            assert 0.5 * tv <= 1e-10, (label, comp)


def test_sample_analyzer_counts_identities_and_thinning():
    state = build_bell_state(BellLabel.PSI_MINUS, 0.25, 10)
    setting = MeasurementSetting(0.0, 0.0)
    counts = sample_analyzer_counts(state, setting, 200, np.random.default_rng(3))
    assert np.all(counts[:, 0] == counts[:, 3])
    assert np.all(counts[:, 1] == counts[:, 2])
    full = sample_analyzer_counts(state, setting, 5000, np.random.default_rng(4))
    thin = sample_analyzer_counts(state, setting, 5000, np.random.default_rng(4), eta=0.5)
    assert np.all(thin >= 0)
    assert thin.sum() < full.sum()


# -- photon-number correlation estimate ------------------------------------------


def test_estimate_fedorov_matches_analytic():
    cfg = SimConfig(label="psi-minus", gamma=1.2, pulses=100_000, seed=6, bin_width=1)
    est = estimate_fedorov(cfg)
    assert isinstance(est, FedorovEstimate)
    exact_pair = fedorov_ratio(1.2, four_mode=False)
    assert est.ratio_h == pytest.approx(exact_pair, rel=0.03)
    assert est.ratio_v == pytest.approx(exact_pair, rel=0.03)
    assert est.conditional_width_h == 1.0  # perfect correlation, floored
    assert est.conditional_width_v == 1.0
    assert est.ratio == est.ratio_h * est.ratio_v
    assert est.convention == "sqrt2-stddev"
    assert est.meta["bin_width"] == 1 and est.meta["seed"] == 6


def test_estimate_fedorov_coarse_bins_degrade_ratio():
    fine = estimate_fedorov(SimConfig(label="psi-minus", gamma=1.2, pulses=50_000,
                                      seed=6, bin_width=1))
    coarse = estimate_fedorov(SimConfig(label="psi-minus", gamma=1.2, pulses=50_000,
                                        seed=6, bin_width=200))
    assert coarse.conditional_width_h > 1.0
    assert coarse.ratio < fine.ratio


# -- efficiency sweep -----------------------------------------------------------------


def test_efficiency_sweep_threshold_and_crossing():
    cfg = SimConfig(label="psi-minus", gamma=0.8, pulses=30_000, seed=11)
    grid = np.linspace(0.15, 0.95, 9)
    res = efficiency_sweep(cfg, grid)
    assert [p.eta for p in res.points] == [pytest.approx(e) for e in grid]
    for p in res.points:
        assert p.exact == witness_under_loss(0.8, p.eta)
        assert p.certifies == (p.value + 3.0 * p.sigma < 0.0)
    assert res.certification_threshold == pytest.approx(0.35)
    assert res.zero_crossing == pytest.approx(1.0 / 3.0, abs=0.03)


def test_efficiency_sweep_grid_validation():
    cfg = SimConfig(label="psi-minus", gamma=0.8, pulses=100, seed=0)
    with pytest.raises(ValueError):
        efficiency_sweep(cfg, [0.5, 1.2])
    with pytest.raises(ValueError):
        efficiency_sweep(cfg, [0.0, 0.5])
