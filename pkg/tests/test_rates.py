import math

import numpy as np
import pytest

from qkdsim.rates import (CHAU_THRESHOLD_BB84, CHAU_THRESHOLD_SIX_STATE,
                          DecoyEstimate, JointDistribution, binary_entropy,
                          bound_beamsplit, bound_pns,
                          conditional_mutual_information, csiszar_korner,
                          decoy_estimate, detection_prob, evaluate_rates,
                          gain_Qmu, gllp_pulse_rate, intrinsic_information,
                          multiphoton_fraction, multiphoton_prob,
                          mutual_information, optimize_mu, rate_gllp,
                          rate_mayers, rate_shor_preskill, rate_six_state,
                          shannon_entropy, shor_preskill_cutoff,
                          usd_threshold, yield_Yn)


# ---------------------------------------------------------------------------
# entropies and information measures
# ---------------------------------------------------------------------------

def test_binary_entropy_values():
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == pytest.approx(1.0)
    assert binary_entropy(0.03) == pytest.approx(0.1943918578315762)
    assert binary_entropy(0.11) == pytest.approx(0.499915958164528)
    with pytest.raises(ValueError):
        binary_entropy(1.2)


def test_binary_entropy_vectorized():
    out = binary_entropy(np.array([0.0, 0.5, 1.0]))
    assert np.allclose(out, [0.0, 1.0, 0.0])


def test_shannon_entropy_uniform():
    assert shannon_entropy(np.full(8, 1 / 8)) == pytest.approx(3.0)


def test_mutual_information_cases():
    perfect = np.array([[0.5, 0.0], [0.0, 0.5]])
    assert mutual_information(perfect) == pytest.approx(1.0)
    independent = np.full((2, 2), 0.25)
    assert mutual_information(independent) == pytest.approx(0.0, abs=1e-12)
    # binary symmetric channel with crossover 0.25
    eps = 0.25
    bsc = 0.5 * np.array([[1 - eps, eps], [eps, 1 - eps]])
    assert mutual_information(bsc) == pytest.approx(1 - binary_entropy(eps))


def test_joint_distribution_validation():
    with pytest.raises(ValueError):
        JointDistribution(np.full((2, 2), 0.25))
    with pytest.raises(ValueError):
        JointDistribution(np.full((2, 2, 2), 0.25))


def _abe(eps_b, eve_knows):
    """P(a,b,e): uniform a, BSC(eps_b) to b; e copies a with prob
    eve_knows, else an independent coin."""
    p = np.zeros((2, 2, 2))
    for a in range(2):
        for b in range(2):
            pb = (1 - eps_b) if a == b else eps_b
            for e in range(2):
                pe = eve_knows * (e == a) + (1 - eve_knows) * 0.5
                p[a, b, e] = 0.5 * pb * pe
    return p


def test_csiszar_korner_eve_blind():
    p = _abe(0.1, 0.0)
    assert csiszar_korner(p) == pytest.approx(1 - binary_entropy(0.1))


def test_csiszar_korner_eve_full_copy():
    p = _abe(0.1, 1.0)
    assert csiszar_korner(p) <= 0.0


def test_intrinsic_bounded_by_conditional_mi():
    for knows in (0.0, 0.5, 1.0):
        p = _abe(0.2, knows)
        assert intrinsic_information(p) <= \
            conditional_mutual_information(p) + 1e-9


def test_intrinsic_eve_blind_equals_mi():
    p = _abe(0.1, 0.0)
    assert intrinsic_information(p) == pytest.approx(
        1 - binary_entropy(0.1), abs=1e-6)


def test_intrinsic_eve_copy_is_zero():
    p = _abe(0.0, 1.0)
    assert intrinsic_information(p) == pytest.approx(0.0, abs=1e-9)


def test_intrinsic_rejects_large_alphabets():
    with pytest.raises(ValueError):
        intrinsic_information(np.full((5, 5, 5), 1 / 125))


# ---------------------------------------------------------------------------
# single-photon rate formulas
# ---------------------------------------------------------------------------

def test_rate_mayers():
    assert rate_mayers(0.0) == pytest.approx(1.0)
    assert rate_mayers(0.05) == pytest.approx(0.24460744929476252)
    with pytest.raises(ValueError):
        rate_mayers(0.3)


def test_rate_shor_preskill():
    assert rate_shor_preskill(0.0) == pytest.approx(1.0)
    assert rate_shor_preskill(0.05) == pytest.approx(0.4272060857680875)


def test_rate_six_state_beats_shor_preskill():
    for eps in (0.02, 0.05, 0.1):
        assert rate_six_state(eps) > rate_shor_preskill(eps)
    assert rate_six_state(0.05) == pytest.approx(0.4968162683194162)


def test_shor_preskill_cutoff_near_eleven_percent():
    cutoff = shor_preskill_cutoff()
    assert 0.105 < cutoff < 0.115
    assert rate_shor_preskill(cutoff) == pytest.approx(0.0, abs=1e-9)


def test_six_state_cutoff_higher_than_bb84():
    # root of the six-state rate sits near 12.6%
    from scipy.optimize import brentq
    root = brentq(rate_six_state, 0.05, 0.3)
    assert root == pytest.approx(0.1261930832768212, abs=1e-6)
    assert root > shor_preskill_cutoff()


def test_chau_constants():
    assert CHAU_THRESHOLD_BB84 == 0.20
    assert CHAU_THRESHOLD_SIX_STATE == 0.276


# ---------------------------------------------------------------------------
# weak-pulse (multi-photon-penalized) rates
# ---------------------------------------------------------------------------

def test_detection_and_multiphoton_probs():
    assert detection_prob(0.1, 0.1, 0.0) == pytest.approx(1 - math.exp(-0.01))
    assert multiphoton_prob(0.1) == pytest.approx(
        1 - math.exp(-0.1) * 1.1)
    frac = multiphoton_fraction(0.1, 0.1, 1e-5)
    assert frac == pytest.approx(0.46929343805787727, rel=1e-6)


def test_rate_gllp_oracle_point():
    delta = multiphoton_fraction(0.1, 0.1, 1e-5)
    assert rate_gllp(0.01, delta) == pytest.approx(0.3783248347735704,
                                                   rel=1e-9)
    assert rate_gllp(0.0, 0.0) == pytest.approx(1.0)


def test_gllp_pulse_rate_eta_squared_scaling():
    r1 = gllp_pulse_rate(1e-3, 1e-3, 0.0, 0.0)
    r2 = gllp_pulse_rate(1e-2, 1e-2, 0.0, 0.0)
    slope = (math.log(r2) - math.log(r1)) / (math.log(1e-2) - math.log(1e-3))
    assert slope == pytest.approx(2.0, abs=0.1)


def test_optimize_mu_tracks_eta():
    for eta in (1e-3, 1e-2, 1e-1):
        res = optimize_mu(eta, 0.0, 0.0)
        assert res.positive
        assert eta / 2 < res.mu < eta * 2


def test_optimize_mu_reports_no_positive_rate_above_cutoff():
    res = optimize_mu(1e-3, 1e-5, 0.12)
    assert not res.positive


# ---------------------------------------------------------------------------
# attack bounds
# ---------------------------------------------------------------------------

def test_bound_beamsplit_value():
    assert bound_beamsplit(0.5, 0.1) == pytest.approx(0.01767308359014612)


def test_bound_pns_sign_flip():
    assert bound_pns(0.5, 0.1) == pytest.approx(-0.04143343493176388)
    assert bound_pns(0.05, 0.9) > 0.0


def test_usd_threshold_exact():
    assert usd_threshold(2 ** -0.5) == 1.0 - 2 ** -0.5
    assert usd_threshold(0.0) == 1.0
    with pytest.raises(ValueError):
        usd_threshold(1.5)


# ---------------------------------------------------------------------------
# decoy yields
# ---------------------------------------------------------------------------

def test_yield_formula():
    assert yield_Yn(0, 0.1, 1e-5) == pytest.approx(1e-5)
    assert yield_Yn(1, 0.1, 0.0) == pytest.approx(0.1)
    assert yield_Yn(2, 0.1, 0.0) == pytest.approx(1 - 0.81)


def test_gain_matches_closed_form_without_dark_counts():
    # sum_n e^-mu mu^n/n! [1-(1-eta)^n] = 1 - e^{-mu eta}
    for mu, eta in ((0.1, 0.1), (0.5, 0.3), (1.0, 0.05)):
        assert gain_Qmu(mu, eta, 0.0) == pytest.approx(
            1 - math.exp(-mu * eta), rel=1e-9)


def test_decoy_estimate_recovers_honest_yields():
    mu_s, mu_d, eta, p_dark = 0.5, 0.05, 0.1, 1e-5
    est = decoy_estimate(gain_Qmu(mu_s, eta, p_dark),
                         gain_Qmu(mu_d, eta, p_dark), mu_s, mu_d, p_dark)
    assert est.consistent
    assert est.Y0 == pytest.approx(p_dark)
    assert est.Y1 == pytest.approx(yield_Yn(1, eta, p_dark), rel=0.05)


def test_decoy_estimate_swaps_misordered_intensities():
    a = decoy_estimate(0.05, 0.005, 0.5, 0.05, 1e-5)
    b = decoy_estimate(0.005, 0.05, 0.05, 0.5, 1e-5)
    assert a.Y1 == pytest.approx(b.Y1)


def test_decoy_estimate_flags_nonsense():
    est = decoy_estimate(0.9, 0.001, 0.5, 0.05, 0.0)
    assert isinstance(est, DecoyEstimate)
    assert not est.consistent


# ---------------------------------------------------------------------------
# consolidated report
# ---------------------------------------------------------------------------

def test_evaluate_rates_zero_error_ideal():
    report = evaluate_rates(epsilon=0.0, mu=None, eta=None)
    assert report.values["r_mayers"] == pytest.approx(1.0)
    assert report.values["r_shor_preskill"] == pytest.approx(1.0)
    assert report.values["r_six_state"] == pytest.approx(1.0)


def test_evaluate_rates_flags_no_secure_key():
    report = evaluate_rates(mu=0.5, eta=0.1)
    assert report.values["bound_pns"] < 0.0
    assert report.clamped["bound_pns"] == 0.0
    assert "[no secure key]" in report.to_text()


def test_csv_row_carries_raw_and_clamped():
    report = evaluate_rates(epsilon=0.05, mu=0.5, eta=0.1)
    row = report.csv_row()
    assert len(row) == 2 * len(report.CSV_COLUMNS)
    i = report.CSV_COLUMNS.index("bound_pns")
    assert float(row[2 * i]) < 0.0 and float(row[2 * i + 1]) == 0.0
