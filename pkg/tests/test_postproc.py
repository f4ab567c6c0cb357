import itertools
import math

import numpy as np
import pytest

from qkdsim.bits import BitString, random_bits
from qkdsim.postproc import (AuthConfig, NoSecureKey, OtpPoolExhausted,
                             PipelineParams, PublicChannelLog, advantage_distill,
                             authenticate, bbbss_correct, estimate_qber,
                             eve_information_per_bit, parity_knowledge,
                             privacy_amplify, remove_positions,
                             run_pipeline_on_keys, toeplitz_hash, verify)
from qkdsim.rng import make_rng


def flip_fraction(bits, eps, rng):
    flips = (rng.random(len(bits)) < eps).astype(np.uint8)
    return BitString.from_array(bits.to_array() ^ flips)


# ---------------------------------------------------------------------------
# error estimation
# ---------------------------------------------------------------------------

def test_estimate_identical_strings():
    rng = make_rng(1)
    a = random_bits(1000, rng)
    eps, pos = estimate_qber(a, a, 0.2, rng)
    assert eps == 0.0
    assert len(pos) == 200


def test_estimate_quarter_flips():
    rng = make_rng(2)
    n = 100000
    a = random_bits(n, rng)
    b_arr = a.to_array().copy()
    b_arr[::4] ^= 1
    eps, _ = estimate_qber(a, BitString.from_array(b_arr), 0.5, rng)
    assert eps == pytest.approx(0.25, abs=0.01)


def test_estimate_full_census_exact():
    rng = make_rng(3)
    a = random_bits(1000, rng)
    b = flip_fraction(a, 0.1, rng)
    true_eps = a.hamming_distance(b) / 1000
    eps, pos = estimate_qber(a, b, 1.0, rng)
    assert eps == pytest.approx(true_eps)
    assert len(pos) == 1000


def test_estimate_validations():
    rng = make_rng(4)
    with pytest.raises(ValueError):
        estimate_qber(BitString([1]), BitString([1, 0]), 0.5, rng)
    with pytest.raises(ValueError):
        estimate_qber(BitString([1]), BitString([1]), 0.0, rng)


def test_remove_positions():
    a = BitString([1, 0, 1, 1, 0])
    out = remove_positions(a, np.array([0, 3]))
    assert out.to_array().tolist() == [0, 1, 0]


# ---------------------------------------------------------------------------
# reconciliation
# ---------------------------------------------------------------------------

def test_bbbss_zero_errors_is_identity():
    rng = make_rng(5)
    a = random_bits(2000, rng)
    rec = bbbss_correct(a, a, 0.03, rng)
    assert rec.corrected_alice == a and rec.corrected_bob == a
    assert rec.success
    assert rec.leaked_bits > 0      # verification parities still disclosed


def test_bbbss_corrects_three_percent():
    rng = make_rng(6)
    a = random_bits(10000, rng)
    b = flip_fraction(a, 0.03, rng)
    rec = bbbss_correct(a, b, 0.03, rng)
    assert rec.success
    assert rec.corrected_alice == rec.corrected_bob
    assert rec.corrected_alice == a        # Bob is corrected toward Alice


def test_bbbss_even_error_block_caught_by_later_pass():
    # two errors inside what pass 1 sees as one block cancel in its parity;
    # the later permuted passes and the subset phase must still catch them
    rng = make_rng(7)
    n = 400
    a = BitString.zeros(n)
    b_arr = a.to_array().copy()
    b_arr[10] ^= 1
    b_arr[11] ^= 1
    rec = bbbss_correct(a, BitString.from_array(b_arr), 0.05, rng,
                        initial_block=100)
    assert rec.success
    assert rec.corrected_alice == rec.corrected_bob


def test_bbbss_counts_every_parity_in_log():
    rng = make_rng(8)
    a = random_bits(3000, rng)
    b = flip_fraction(a, 0.02, rng)
    log = PublicChannelLog()
    rec = bbbss_correct(a, b, 0.02, rng, log=log)
    assert log.leaked_parity_count == len(log.messages)
    assert rec.leaked_bits >= log.leaked_parity_count


def test_bbbss_validations():
    rng = make_rng(9)
    with pytest.raises(ValueError):
        bbbss_correct(BitString([1]), BitString([1, 0]), 0.03, rng)
    with pytest.raises(ValueError):
        bbbss_correct(BitString([1, 0]), BitString([1, 0]), 0.7, rng)


# ---------------------------------------------------------------------------
# privacy amplification
# ---------------------------------------------------------------------------

def test_toeplitz_matches_explicit_matrix():
    rng = make_rng(10)
    n, r = 40, 12
    key = rng.integers(0, 2, n)
    seed = rng.integers(0, 2, n + r - 1)
    out = toeplitz_hash(key, seed, r)
    T = np.empty((r, n), dtype=np.int64)
    for i in range(r):
        for j in range(n):
            T[i, j] = seed[i + n - 1 - j]
    assert np.array_equal(out, (T @ key) % 2)


def test_toeplitz_seed_length_validation():
    with pytest.raises(ValueError):
        toeplitz_hash(np.zeros(10), np.zeros(10), 5)


def test_privacy_amplify_identical_inputs_agree():
    rng = make_rng(11)
    key = random_bits(5000, rng)
    out, seed = privacy_amplify(key, 2000, 30, rng)
    assert len(out) == 5000 - 2000 - 30
    again = toeplitz_hash(key.to_array(), seed.to_array(), len(out))
    assert np.array_equal(out.to_array(), again)


def test_privacy_amplify_decorrelates_single_bit_difference():
    rng = make_rng(12)
    n, r = 200, 50
    key_a = random_bits(n, rng)
    arr_b = key_a.to_array().copy()
    arr_b[77] ^= 1
    agree = 0
    trials = 1000
    for _ in range(trials):
        seed = random_bits(n + r - 1, rng)
        out_a = toeplitz_hash(key_a.to_array(), seed.to_array(), r)
        out_b = toeplitz_hash(arr_b, seed.to_array(), r)
        agree += (out_a == out_b).mean()
    assert agree / trials == pytest.approx(0.5, abs=0.05)


def test_privacy_amplify_aborts_when_nothing_left():
    rng = make_rng(13)
    key = random_bits(100, rng)
    with pytest.raises(NoSecureKey):
        privacy_amplify(key, 90, 30, rng)


def test_parity_knowledge_enumeration():
    # enumerate every right/wrong pattern of per-bit guesses and sum the
    # probability of the patterns with an even number of wrong guesses
    for eps in (0.2, 0.5):
        p = (1 + eps) / 2
        for n in (2, 3, 5):
            total = 0.0
            for pattern in itertools.product((0, 1), repeat=n):
                wrong = sum(pattern)
                if wrong % 2 == 0:
                    total += (1 - p) ** wrong * p ** (n - wrong)
            assert parity_knowledge(p, n) == pytest.approx(total, abs=1e-12)
            assert parity_knowledge(p, n) == pytest.approx(
                (1 + eps ** n) / 2, abs=1e-12)
    assert parity_knowledge(0.75, 2) == pytest.approx(0.625)


# ---------------------------------------------------------------------------
# advantage distillation
# ---------------------------------------------------------------------------

def test_distill_error_free_accepts_everything():
    rng = make_rng(14)
    a = random_bits(999, rng)
    new_a, new_b, accepted = advantage_distill(a, a, 3, rng)
    assert accepted.all()
    assert new_a == new_b
    assert len(new_a) == 333


def test_distill_matches_enumeration():
    rng = make_rng(15)
    eps, N = 0.25, 3
    nblocks = 100000
    a = random_bits(nblocks * N, rng)
    b = flip_fraction(a, eps, rng)
    new_a, new_b, accepted = advantage_distill(a, b, N, rng)
    p_acc = eps ** N + (1 - eps) ** N
    cond_err = eps ** N / p_acc
    assert accepted.mean() == pytest.approx(p_acc, abs=0.01)
    errs = (new_a.to_array() != new_b.to_array()).mean()
    assert errs == pytest.approx(cond_err, abs=0.01)


def test_distill_validations():
    rng = make_rng(16)
    with pytest.raises(ValueError):
        advantage_distill(BitString([1, 0]), BitString([1, 0]), 1, rng)


# ---------------------------------------------------------------------------
# authentication
# ---------------------------------------------------------------------------

def test_authenticate_roundtrip():
    rng = make_rng(17)
    cfg = AuthConfig.fresh(rng)
    for _ in range(20):
        m = random_bits(300, rng)
        assert verify(m, authenticate(m, cfg), cfg)


def test_tampered_message_rejected():
    rng = make_rng(18)
    rejected = 0
    trials = 2000
    for _ in range(trials):
        cfg = AuthConfig.fresh(rng)
        m = random_bits(120, rng)
        tag = authenticate(m, cfg)
        arr = m.to_array().copy()
        arr[int(rng.integers(0, len(arr)))] ^= 1
        if not verify(BitString.from_array(arr), tag, cfg):
            rejected += 1
    assert rejected == trials     # 2^61 - 1 makes collisions unobservable


def test_forged_tags_accept_at_inverse_prime():
    from qkdsim.postproc import AuthTag
    rng = make_rng(19)
    p = 251
    trials = 100000
    accepts = 0
    cfg = AuthConfig.fresh(rng, prime=p, degree=8, pool_tags=1)
    m = random_bits(40, rng)
    real = authenticate(m, cfg)
    for _ in range(trials):
        forged = AuthTag(value=int(rng.integers(0, p)), segment=real.segment)
        accepts += verify(m, forged, cfg)
    expect = 1.0 / p
    sigma = math.sqrt(expect * (1 - expect) / trials)
    assert accepts / trials <= expect + 3 * sigma


def test_otp_pool_exhaustion_signals_refill():
    rng = make_rng(20)
    cfg = AuthConfig.fresh(rng, pool_tags=2)
    m = random_bits(64, rng)
    authenticate(m, cfg)
    authenticate(m, cfg)
    with pytest.raises(OtpPoolExhausted):
        authenticate(m, cfg)


def test_message_cardinality_bound_enforced():
    rng = make_rng(21)
    cfg = AuthConfig.fresh(rng, degree=2)
    with pytest.raises(ValueError):
        authenticate(random_bits(200, rng), cfg)


def test_deception_probability_field():
    rng = make_rng(22)
    assert AuthConfig.fresh(rng, prime=251).deception_probability == \
        pytest.approx(1 / 251)


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------

def test_pipeline_distills_key_at_two_percent():
    rng = make_rng(23)
    n = 100000
    a = random_bits(n, rng)
    b = flip_fraction(a, 0.02, rng)
    res = run_pipeline_on_keys(a, b, PipelineParams(), rng)
    assert not res.aborted
    assert res.final_length > 0
    assert res.final_key is not None


def test_pipeline_aborts_at_high_qber():
    rng = make_rng(24)
    n = 20000
    a = random_bits(n, rng)
    b = flip_fraction(a, 0.25, rng)
    res = run_pipeline_on_keys(a, b, PipelineParams(), rng)
    assert res.aborted and res.abort_stage == "estimation"
    assert res.final_key is None
    assert res.qber_estimate == pytest.approx(0.25, abs=0.02)


def test_pipeline_aborts_when_eve_bound_eats_key():
    rng = make_rng(25)
    n = 600
    a = random_bits(n, rng)
    b = flip_fraction(a, 0.10, rng)
    res = run_pipeline_on_keys(a, b, PipelineParams(), rng)
    assert res.aborted
    assert res.abort_stage in ("privacy_amplification", "reconciliation")


def test_eve_bound_models():
    assert eve_information_per_bit(0.1, "two_epsilon") == pytest.approx(0.2)
    assert eve_information_per_bit(0.1, "entropy") == pytest.approx(
        -(0.1 * math.log2(0.1)) - 0.9 * math.log2(0.9))
    with pytest.raises(ValueError):
        eve_information_per_bit(0.1, "optimism")
