import math

import numpy as np
import pytest
from scipy.stats import unitary_group

from macrobell.measures import (
    DistributionKind,
    PhotonNumberDistribution,
    WidthConvention,
    cutoff_for_spectrum_tail,
    distribution_width,
    effective_schmidt_number,
    fedorov_ratio,
    fedorov_ratio_from_spectrum,
    four_mode_negativity,
    gain_scan,
    gamma_for_mean_photons,
    kbar,
    kbar_analytic,
    log_negativity,
    measure_report,
    negativity_asymptote,
    negativity_numeric,
    pair_marginal_distribution,
    pair_negativity,
    photon_number_distributions,
    pt_spectrum_dense,
    pt_spectrum_from_schmidt,
    pt_spectrum_structured,
)
from macrobell.states import mean_photons_per_mode, schmidt_spectrum


# -- effective mode number ---------------------------------------------------------


def test_schmidt_number_uniform_and_squaring():
    p = np.full(8, 0.125)
    assert effective_schmidt_number(p) == pytest.approx(8.0, rel=1e-13)
    assert effective_schmidt_number(p, four_mode=True) == pytest.approx(64.0, rel=1e-13)
    # unnormalized input is renormalized
    assert effective_schmidt_number(3.0 * p) == pytest.approx(8.0, rel=1e-13)


def test_schmidt_number_validation():
    with pytest.raises(ValueError):
        effective_schmidt_number(np.array([0.5, -0.1]))
    with pytest.raises(ValueError):
        effective_schmidt_number(np.zeros(4))


def test_kbar_closed_form():
    for gamma in (0.2, 0.5, 1.0):
        n0 = mean_photons_per_mode(gamma)
        assert kbar_analytic(gamma, four_mode=False) == pytest.approx(1 + 2 * n0, rel=1e-14)
        assert kbar_analytic(gamma) == pytest.approx((1 + 2 * n0) ** 2, rel=1e-14)
        n_max = cutoff_for_spectrum_tail(gamma)
        assert kbar(gamma, n_max=n_max) == pytest.approx(kbar_analytic(gamma), rel=1e-6)


def test_kbar_nine_at_unit_mean_photons():
    g = gamma_for_mean_photons(1.0)
    assert kbar_analytic(g) == pytest.approx(9.0, rel=1e-12)
    assert kbar(g, n_max=cutoff_for_spectrum_tail(g)) == pytest.approx(9.0, rel=1e-6)


def test_purity_from_reduced_state_is_inverse_kbar():
    # partial trace over a unitarily-rotated partner mode must leave the
    # purity at sum(p^2): the Schmidt count is basis independent
    lam = schmidt_spectrum(0.8, 30)
    p = lam / lam.sum()
    u = unitary_group.rvs(31, random_state=np.random.default_rng(5))
    amp = np.diag(np.sqrt(p)) @ u.T
    rho = amp @ amp.conj().T
    purity = float(np.trace(rho @ rho).real)
    assert 1.0 / purity == pytest.approx(effective_schmidt_number(lam), rel=1e-10)


# -- partial transpose --------------------------------------------------------------


def test_pt_spectrum_two_coefficient_case():
    c = np.array([math.cos(0.3), math.sin(0.3)])
    eig = pt_spectrum_from_schmidt(c)
    want = np.sort([c[0] ** 2, c[1] ** 2, c[0] * c[1], -c[0] * c[1]])
    assert np.allclose(eig, want, atol=1e-15)
    assert eig.sum() == pytest.approx(1.0, abs=1e-14)


def test_pt_structured_matches_dense():
    gamma, n_max = 0.4, 20
    structured = pt_spectrum_structured(gamma, n_max)
    lam = schmidt_spectrum(gamma, n_max)
    dense = pt_spectrum_dense(np.diag(np.sqrt(lam / lam.sum())))
    assert np.allclose(np.sort(structured), np.sort(dense), atol=1e-12)


def test_pt_dense_guard():
    with pytest.raises(ValueError):
        pt_spectrum_dense(np.zeros((60, 60)))


def test_pair_negativity_both_methods():
    gamma = 0.5
    a = pair_negativity(gamma, n_max=40, method="structured")
    b = pair_negativity(gamma, n_max=40, method="dense")
    assert a.trace_norm == pytest.approx(b.trace_norm, rel=1e-10)
    assert a.trace_norm == pytest.approx(math.exp(2 * gamma), rel=1e-8)
    assert a.negativity == a.trace_norm - 1.0
    assert a.min_eigenvalue == pytest.approx(b.min_eigenvalue, rel=1e-8)
    assert a.log_negativity == pytest.approx(2 * gamma / math.log(2), rel=1e-8)


def test_four_mode_negativity_both_methods():
    gamma = 0.5
    a = four_mode_negativity(gamma, n_max=30, method="structured")
    b = four_mode_negativity(gamma, n_max=30, method="dense")
    assert a.trace_norm == pytest.approx(b.trace_norm, rel=1e-10)
    assert a.min_eigenvalue == pytest.approx(b.min_eigenvalue, rel=1e-8)
    assert a.negativity == pytest.approx(negativity_asymptote(gamma), rel=1e-8)
    with pytest.raises(ValueError):
        four_mode_negativity(gamma, n_max=60, method="dense")  # product spectrum too big


def test_negativity_numeric_routes_and_guard():
    lam = schmidt_spectrum(0.5, 40)
    tn_a, neg_a = negativity_numeric(lam, method="dense")
    tn_b, neg_b = negativity_numeric(lam, method="structured")
    assert tn_a == pytest.approx(tn_b, rel=1e-10)
    assert neg_a == pytest.approx(math.exp(4 * 0.5) - 1.0, rel=1e-7)
    assert neg_a == pytest.approx(tn_a * tn_a - 1.0, rel=1e-14)
    with pytest.raises(ValueError):
        negativity_numeric(schmidt_spectrum(1.0, 10))  # tail mass 2.4e-3
    with pytest.raises(ValueError):
        negativity_numeric(lam, method="bogus")


def test_log_negativity_linear_in_gain():
    for gamma in (0.25, 0.5, 1.0):
        assert log_negativity(gamma) == pytest.approx(4 * gamma / math.log(2), rel=1e-14)
        assert log_negativity(gamma, copies=1) == pytest.approx(2 * gamma / math.log(2), rel=1e-14)
        # sum(sqrt(lambda)) truncates like sqrt(tail), so ask for a tiny tail
        n_max = cutoff_for_spectrum_tail(gamma, tail=1e-24)
        assert log_negativity(gamma, n_max=n_max) == pytest.approx(
            log_negativity(gamma), rel=1e-9)


# -- photon-number distributions ------------------------------------------------------


def test_photon_number_distributions():
    lam = schmidt_spectrum(0.7, 25)
    marginal, conditional = photon_number_distributions(lam)
    assert marginal.kind is DistributionKind.MARGINAL
    assert marginal.conditioned_on is None
    assert np.allclose(marginal.probabilities, lam / lam.sum(), atol=1e-15)
    n0_trunc = float(np.sum(np.arange(26) * lam) / lam.sum())
    assert marginal.mean == pytest.approx(n0_trunc, rel=1e-13)
    cond = conditional(3)
    assert cond.kind is DistributionKind.CONDITIONAL
    assert cond.conditioned_on == 3
    assert cond.probabilities[3] == 1.0
    assert cond.mean == 3.0
    with pytest.raises(ValueError):
        conditional(26)
    with pytest.raises(ValueError):
        conditional(-1)


def test_distribution_validation():
    with pytest.raises(ValueError):
        PhotonNumberDistribution(np.array([-0.1, 1.1]), DistributionKind.MARGINAL)
    with pytest.raises(ValueError):
        PhotonNumberDistribution(np.zeros(3), DistributionKind.MARGINAL)


def test_distribution_width_conventions():
    # geometric law: stddev = sqrt(N0 (N0 + 1)), mean = N0
    gamma = 0.9
    n0 = mean_photons_per_mode(gamma)
    probs = pair_marginal_distribution(gamma, cutoff_for_spectrum_tail(gamma))
    assert distribution_width(probs, WidthConvention.STDDEV) == pytest.approx(
        math.sqrt(n0 * (n0 + 1.0)), rel=1e-9)
    assert distribution_width(probs, WidthConvention.SQRT2_STDDEV) == pytest.approx(
        math.sqrt(2.0) * n0, rel=1e-9)


def test_fedorov_ratio_conventions_and_asymptotes():
    gamma = 1.0
    n0 = mean_photons_per_mode(gamma)
    n_max = cutoff_for_spectrum_tail(gamma)
    assert fedorov_ratio(gamma, four_mode=False) == pytest.approx(math.sqrt(2) * n0, rel=1e-14)
    assert fedorov_ratio(gamma) == pytest.approx(2.0 * n0 * n0, rel=1e-14)
    assert fedorov_ratio(gamma, convention="stddev", four_mode=False) == pytest.approx(
        math.sqrt(n0 * (n0 + 1.0)), rel=1e-14)
    # truncated route converges to the closed form
    assert fedorov_ratio(gamma, n_max=n_max) == pytest.approx(fedorov_ratio(gamma), rel=1e-8)
    # spectrum route is the same computation up to one renormalization pass
    lam = schmidt_spectrum(gamma, n_max)
    assert fedorov_ratio_from_spectrum(lam) == pytest.approx(
        fedorov_ratio(gamma, n_max=n_max), rel=1e-13)


def test_measure_report_consistency():
    rep = measure_report(0.5)
    assert rep.n0 == pytest.approx(mean_photons_per_mode(0.5), rel=1e-14)
    assert rep.kbar_numeric == pytest.approx(rep.kbar_analytic, rel=1e-6)
    assert rep.negativity_numeric == pytest.approx(rep.negativity_analytic, rel=1e-6)
    assert rep.log_negativity == pytest.approx(2.0 / math.log(2), rel=1e-12)
    assert rep.width_convention is WidthConvention.SQRT2_STDDEV
    rep2 = measure_report(0.5, convention="stddev")
    assert rep2.width_convention is WidthConvention.STDDEV
    assert rep2.fedorov_ratio != rep.fedorov_ratio


def test_gain_scan_ordering_and_norms():
    rows = gain_scan([1.0, 2.0, 5.0, 20.0])
    for r in rows:
        assert r["negativity"] > r["kbar"] > r["fedorov"]
        for key in ("negativity_norm", "kbar_norm", "fedorov_norm"):
            assert math.isfinite(r[key])
    # the normalized curves approach 1 from above as the gain grows
    norms = [r["negativity_norm"] for r in rows]
    assert all(a > b for a, b in zip(norms, norms[1:]))
    assert norms[-1] == pytest.approx(1.0, rel=0.15)
    # small gain does not trip the ordering guard
    low = gain_scan([0.05])
    assert len(low) == 1


def test_gamma_inversion_round_trip():
    for n0 in (0.0, 0.5, 3.0, 100.0):
        assert mean_photons_per_mode(gamma_for_mean_photons(n0)) == pytest.approx(
            n0, rel=1e-12, abs=1e-15)
    with pytest.raises(ValueError):
        gamma_for_mean_photons(-1.0)


def test_cutoff_for_spectrum_tail_property():
    for gamma in (0.3, 0.8, 1.5):
        q = math.tanh(gamma) ** 2
        n = cutoff_for_spectrum_tail(gamma, tail=1e-12)
        assert q ** (n + 1) < 1e-12
    assert cutoff_for_spectrum_tail(0.0) == 8  # floor
