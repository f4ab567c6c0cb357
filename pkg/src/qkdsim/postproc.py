"""Classical post-processing over an authenticated public channel:
error-rate estimation, interactive parity reconciliation, privacy
amplification, advantage distillation, and message authentication.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.signal import fftconvolve

from .bits import BitString, random_bits
from .rates import binary_entropy


class NoSecureKey(Exception):
    """Privacy amplification target length is not positive."""


class OtpPoolExhausted(Exception):
    """The tag-encryption pad ran out; refill it from distilled key."""


@dataclass
class PublicChannelLog:
    """Ordered record of everything sent in the clear."""

    messages: list = field(default_factory=list)
    leaked_parity_count: int = 0

    def post(self, direction: str, purpose: str, payload) -> None:
        self.messages.append({"direction": direction, "purpose": purpose,
                              "payload": payload})
        if purpose == "parity":
            self.leaked_parity_count += 1


# ---------------------------------------------------------------------------
# error-rate estimation
# ---------------------------------------------------------------------------

def estimate_qber(alice: BitString, bob: BitString, sample_fraction: float,
                  rng: np.random.Generator) -> tuple[float, np.ndarray]:
    """Publicly compare a random sample of positions.

    Returns the sample mismatch rate and the disclosed positions, which the
    caller must drop from both keys.
    """
    if len(alice) != len(bob):
        raise ValueError("keys must have equal length")
    if not 0.0 < sample_fraction <= 1.0:
        raise ValueError("sample_fraction must lie in (0, 1]")
    n = len(alice)
    m = math.ceil(sample_fraction * n)
    if m == 0 or n == 0:
        raise ValueError("sample is empty")
    positions = rng.choice(n, size=m, replace=False)
    a = alice.to_array()[positions]
    b = bob.to_array()[positions]
    return float((a != b).mean()), np.sort(positions)


def remove_positions(key: BitString, positions: np.ndarray) -> BitString:
    keep = np.ones(len(key), dtype=bool)
    keep[positions] = False
    return BitString.from_array(key.to_array()[keep])


# ---------------------------------------------------------------------------
# interactive parity reconciliation
# ---------------------------------------------------------------------------

@dataclass
class ReconciliationResult:
    corrected_alice: BitString
    corrected_bob: BitString
    leaked_bits: int
    rounds: int
    residual_error_estimate: float
    success: bool


def _bisect_correct(pa: np.ndarray, pb: np.ndarray, lo: int, hi: int,
                    log: Optional[PublicChannelLog]) -> int:
    """Binary parity search for one error inside pb[lo:hi); flips it and
    returns the number of parities disclosed."""
    leaked = 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        leaked += 1
        if log is not None:
            log.post("alice->bob", "parity", {"range": (lo, mid)})
        if (int(pa[lo:mid].sum()) & 1) != (int(pb[lo:mid].sum()) & 1):
            hi = mid
        else:
            lo = mid
    pb[lo] ^= 1
    return leaked


def bbbss_correct(alice: BitString, bob: BitString, eps_est: float,
                  rng: np.random.Generator, max_passes: int = 4,
                  initial_block: Optional[int] = None,
                  subset_clean_target: int = 20,
                  log: Optional[PublicChannelLog] = None) -> ReconciliationResult:
    """Multi-pass block-parity reconciliation.

    Each pass permutes the strings, compares block parities (block size
    starting near 0.73/eps and doubling per pass), and bisects mismatched
    blocks.  A final phase compares parities of random half-size subsets
    until `subset_clean_target` consecutive subsets agree.  Every disclosed
    parity is counted in leaked_bits.
    """
    if len(alice) != len(bob):
        raise ValueError("keys must have equal length")
    n = len(alice)
    if n == 0:
        raise ValueError("cannot reconcile empty keys")
    if not 0.0 <= eps_est < 0.5:
        raise ValueError("eps_est must lie in [0, 0.5)")
    a = alice.to_array().astype(np.int64)
    b = bob.to_array().astype(np.int64)
    leaked = 0
    rounds = 0

    if initial_block is None:
        k = max(2, int(0.73 / eps_est)) if eps_est > 0 else max(2, n // 4)
    else:
        k = initial_block
    k = min(k, max(2, n // 2))

    for _ in range(max_passes):
        rounds += 1
        perm = rng.permutation(n)
        pa, pb = a[perm], b[perm]
        starts = np.arange(0, n, k)
        par_a = np.add.reduceat(pa, starts) & 1
        par_b = np.add.reduceat(pb, starts) & 1
        leaked += starts.size
        if log is not None:
            log.post("alice->bob", "parity",
                     {"pass_block_parities": int(starts.size)})
        for blk in np.flatnonzero(par_a != par_b):
            lo = int(starts[blk])
            hi = int(starts[blk + 1]) if blk + 1 < starts.size else n
            leaked += _bisect_correct(pa, pb, lo, hi, log)
        b[perm] = pb
        k = min(2 * k, max(2, n // 2))

    # random-subset verification phase
    clean = 0
    subset_rounds = 0
    limit = 50 * subset_clean_target + 200
    while clean < subset_clean_target and subset_rounds < limit:
        subset_rounds += 1
        rounds += 1
        mask = rng.random(n) < 0.5
        leaked += 1
        if log is not None:
            log.post("alice->bob", "parity", {"subset_size": int(mask.sum())})
        if (int(a[mask].sum()) & 1) == (int(b[mask].sum()) & 1):
            clean += 1
            continue
        clean = 0
        idxs = np.flatnonzero(mask)
        rng.shuffle(idxs)
        pa, pb = a[idxs], b[idxs]
        leaked += _bisect_correct(pa, pb, 0, idxs.size, log)
        b[idxs] = pb

    success = clean >= subset_clean_target
    return ReconciliationResult(
        corrected_alice=BitString.from_array(a.astype(np.uint8)),
        corrected_bob=BitString.from_array(b.astype(np.uint8)),
        leaked_bits=leaked, rounds=rounds,
        residual_error_estimate=2.0 ** (-subset_clean_target),
        success=success)


# ---------------------------------------------------------------------------
# privacy amplification (Toeplitz universal hashing)
# ---------------------------------------------------------------------------

def toeplitz_hash(key: np.ndarray, seed: np.ndarray, r: int) -> np.ndarray:
    """Multiply the r x n binary Toeplitz matrix defined by the
    (n + r - 1)-bit seed with the key vector, mod 2.

    T[i, j] = seed[i + n - 1 - j], so row i of the product is entry
    i + n - 1 of the full binary convolution seed * key.
    """
    key = np.asarray(key, dtype=np.float64)
    seed = np.asarray(seed, dtype=np.float64)
    n = key.size
    if seed.size != n + r - 1:
        raise ValueError("seed must have n + r - 1 bits")
    if n * r <= 1 << 16:
        conv = np.convolve(seed, key)
    else:
        conv = fftconvolve(seed, key)
    out = np.rint(conv[n - 1: n - 1 + r]).astype(np.int64) & 1
    return out.astype(np.uint8)


def privacy_amplify(key: BitString, eve_known_bits: int, safety: int,
                    rng: np.random.Generator,
                    log: Optional[PublicChannelLog] = None,
                    ) -> tuple[BitString, BitString]:
    """Compress an n-bit reconciled key to r = n - k - s bits with a
    randomly seeded Toeplitz hash.  The seed is public; returns
    (final_key, seed).  Raises NoSecureKey when r <= 0.
    """
    n = len(key)
    r = n - eve_known_bits - safety
    if r <= 0:
        raise NoSecureKey(
            f"no secure key extractable: n={n}, k={eve_known_bits}, s={safety}")
    seed = random_bits(n + r - 1, rng)
    if log is not None:
        log.post("alice->bob", "pa_seed", {"seed_hex": seed.to_hex()})
    out = toeplitz_hash(key.to_array(), seed.to_array(), r)
    return BitString.from_array(out), seed


# ---------------------------------------------------------------------------
# advantage distillation
# ---------------------------------------------------------------------------

def advantage_distill(alice: BitString, bob: BitString, block: int,
                      rng: np.random.Generator,
                      ) -> tuple[BitString, BitString, np.ndarray]:
    """Two-way repeat-code filtering.

    Alice XORs each length-N block with a fresh random bit C and announces
    the result; Bob accepts a block only when the announcement XORed with
    his block is constant, in which case that constant becomes his new bit.
    Returns (alice_new, bob_new, accepted_mask over blocks); trailing bits
    that do not fill a block are dropped.
    """
    if block < 2:
        raise ValueError("block length must be >= 2")
    if len(alice) != len(bob):
        raise ValueError("keys must have equal length")
    nblocks = len(alice) // block
    a = alice.to_array()[: nblocks * block].reshape(nblocks, block)
    b = bob.to_array()[: nblocks * block].reshape(nblocks, block)
    c = rng.integers(0, 2, size=nblocks, dtype=np.uint8)
    announced = a ^ c[:, None]
    residue = announced ^ b
    accepted = (residue == residue[:, :1]).all(axis=1)
    new_alice = c[accepted]
    new_bob = residue[accepted, 0]
    return (BitString.from_array(new_alice),
            BitString.from_array(new_bob), accepted)


# ---------------------------------------------------------------------------
# authentication (polynomial hash over GF(p), one-time-padded tag)
# ---------------------------------------------------------------------------

PRODUCTION_PRIME = (1 << 61) - 1


@dataclass
class AuthConfig:
    """Shared authentication material.

    The password keys a polynomial hash over GF(p): tag(m) = y + sum m_i x^i
    for message digits m_i (base-2^(bitlen(p)-1) chunks, at most degree - 1
    of them).  Each emitted tag is one-time-pad encrypted with a fresh
    segment of otp_pool; segments are never reused.
    """

    prime: int
    degree: int
    shared_password: BitString
    otp_pool: BitString
    next_segment: int = 0

    def __post_init__(self):
        if self.degree < 2:
            raise ValueError("degree must be >= 2")
        if len(self.shared_password) < 2 * self.tag_bits:
            raise ValueError("password must hold at least two field elements")

    @property
    def tag_bits(self) -> int:
        return self.prime.bit_length()

    @property
    def deception_probability(self) -> float:
        return 1.0 / self.prime

    def _field_elements(self) -> tuple[int, int]:
        bits = self.shared_password.to_array()
        w = self.tag_bits
        x = int("".join(map(str, bits[:w])), 2) % self.prime
        y = int("".join(map(str, bits[w: 2 * w])), 2) % self.prime
        return x, y

    def _pad_value(self, segment: int) -> int:
        start = segment * self.tag_bits
        stop = start + self.tag_bits
        if stop > len(self.otp_pool):
            raise OtpPoolExhausted(
                "one-time-pad pool exhausted: refill from the distilled key")
        chunk = self.otp_pool.to_array()[start:stop]
        return int("".join(map(str, chunk)), 2) % self.prime

    @classmethod
    def fresh(cls, rng: np.random.Generator, prime: int = PRODUCTION_PRIME,
              degree: int = 64, pool_tags: int = 32) -> "AuthConfig":
        w = prime.bit_length()
        return cls(prime=prime, degree=degree,
                   shared_password=random_bits(2 * w, rng),
                   otp_pool=random_bits(pool_tags * w, rng))


def _message_digits(message: BitString, cfg: AuthConfig) -> list[int]:
    w = cfg.tag_bits - 1  # chunks strictly below the prime
    bits = message.to_array()
    digits = []
    for i in range(0, len(bits), w):
        chunk = bits[i: i + w]
        digits.append(int("".join(map(str, chunk)), 2))
    if len(digits) > cfg.degree - 1:
        raise ValueError(
            f"message too long: {len(digits)} digits exceeds degree-1 = "
            f"{cfg.degree - 1}")
    return digits


@dataclass(frozen=True)
class AuthTag:
    value: int
    segment: int


def authenticate(message: BitString, cfg: AuthConfig) -> AuthTag:
    """Tag the message and consume one one-time-pad segment."""
    x, y = cfg._field_elements()
    p = cfg.prime
    acc = 0
    for digit in reversed(_message_digits(message, cfg)):  # Horner, m_i x^i
        acc = (acc + digit) * x % p
    tag = (y + acc) % p
    segment = cfg.next_segment
    enc = (tag + cfg._pad_value(segment)) % p
    cfg.next_segment += 1
    return AuthTag(value=enc, segment=segment)


def verify(message: BitString, tag: AuthTag, cfg: AuthConfig) -> bool:
    x, y = cfg._field_elements()
    p = cfg.prime
    acc = 0
    for digit in reversed(_message_digits(message, cfg)):
        acc = (acc + digit) * x % p
    expected = ((y + acc) + cfg._pad_value(tag.segment)) % p
    return expected == tag.value


# ---------------------------------------------------------------------------
# end-to-end pipeline
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PipelineParams:
    sample_fraction: float = 0.1
    qber_abort_threshold: float = 0.11
    safety_bits: int = 30
    eve_bound: str = "two_epsilon"     # or "entropy"
    max_passes: int = 4
    subset_clean_target: int = 20
    auth_prime: int = PRODUCTION_PRIME

    def __post_init__(self):
        if self.eve_bound not in ("two_epsilon", "entropy"):
            raise ValueError("eve_bound must be 'two_epsilon' or 'entropy'")


@dataclass
class FinalKeyResult:
    final_key: Optional[BitString]
    final_length: int
    qber_estimate: float
    leaked_bits: int
    eve_bound_bits: int
    abort_stage: Optional[str]
    abort_reason: Optional[str]
    log: PublicChannelLog

    @property
    def aborted(self) -> bool:
        return self.abort_stage is not None


def eve_information_per_bit(epsilon: float, model: str) -> float:
    """Eve's assumed information per sifted bit as a function of the error
    rate: 2*eps for the simulated individual attacks, h(eps) for the
    entropy-based accounting."""
    if model == "two_epsilon":
        return min(1.0, 2.0 * epsilon)
    if model == "entropy":
        return binary_entropy(min(0.5, epsilon))
    raise ValueError(f"unknown eve bound model {model!r}")


def parity_knowledge(p: float, n: int) -> float:
    """Probability of knowing the XOR of n independent bits when each bit
    is known with probability p.  Equals (1 + eps^n) / 2 for eps = 2p - 1:
    the guess is right iff an even number of the n bits is wrong.
    """
    if not 0.5 <= p <= 1.0:
        raise ValueError("per-bit knowledge must lie in [0.5, 1]")
    if n < 1:
        raise ValueError("n must be positive")
    eps = 2.0 * p - 1.0
    return 0.5 * (1.0 + eps ** n)


def run_pipeline(transcript, params: PipelineParams,
                 rng: np.random.Generator) -> FinalKeyResult:
    """Estimation -> abort check -> reconciliation -> privacy amplification
    on a session transcript, with every public message authenticated."""
    return run_pipeline_on_keys(transcript.sifted_alice,
                                transcript.sifted_bob, params, rng)


def run_pipeline_on_keys(sifted_alice: BitString, sifted_bob: BitString,
                         params: PipelineParams,
                         rng: np.random.Generator) -> FinalKeyResult:
    log = PublicChannelLog()
    n0 = len(sifted_alice)
    auth = AuthConfig.fresh(rng, prime=params.auth_prime,
                            degree=max(64, n0 // 32), pool_tags=64)

    def send(direction, purpose, payload_bits: BitString, payload):
        tag = authenticate(payload_bits, auth)
        assert verify(payload_bits, tag, auth)
        log.post(direction, purpose, payload)

    if n0 == 0:
        return FinalKeyResult(None, 0, 0.0, 0, 0, "estimation",
                              "empty sifted key", log)

    eps, positions = estimate_qber(sifted_alice, sifted_bob,
                                   params.sample_fraction, rng)
    disclosed = BitString.from_array(sifted_alice.to_array()[positions])
    send("both", "qber_sample", disclosed, {"positions": len(positions),
                                            "epsilon": eps})
    alice = remove_positions(sifted_alice, positions)
    bob = remove_positions(sifted_bob, positions)

    if eps > params.qber_abort_threshold:
        return FinalKeyResult(None, 0, eps, 0, 0, "estimation",
                              f"error rate {eps:.4f} above threshold "
                              f"{params.qber_abort_threshold}", log)
    if len(alice) == 0:
        return FinalKeyResult(None, 0, eps, 0, 0, "estimation",
                              "nothing left after sampling", log)

    eps_work = max(eps, 1.0 / max(2, len(alice)))
    rec = bbbss_correct(alice, bob, eps_work, rng,
                        max_passes=params.max_passes,
                        subset_clean_target=params.subset_clean_target,
                        log=log)
    send("alice->bob", "reconciliation_summary",
         BitString.from_array(np.zeros(8, dtype=np.uint8)),
         {"leaked_bits": rec.leaked_bits, "rounds": rec.rounds})
    if not rec.success:
        return FinalKeyResult(None, 0, eps, rec.leaked_bits, 0,
                              "reconciliation",
                              "reconciliation did not converge", log)

    n = len(rec.corrected_alice)
    k = math.ceil(n * eve_information_per_bit(eps, params.eve_bound))
    k += rec.leaked_bits
    try:
        final_a, seed = privacy_amplify(rec.corrected_alice, k,
                                        params.safety_bits, rng, log=log)
    except NoSecureKey as exc:
        return FinalKeyResult(None, 0, eps, rec.leaked_bits, k,
                              "privacy_amplification", str(exc), log)
    final_b = BitString.from_array(
        toeplitz_hash(rec.corrected_bob.to_array(), seed.to_array(),
                      len(final_a)))
    send("alice->bob", "final_key_digest",
         BitString.from_array(final_a.to_array()[:32]),
         {"final_length": len(final_a)})
    if final_a != final_b:
        return FinalKeyResult(None, 0, eps, rec.leaked_bits, k,
                              "verification", "final keys differ", log)
    return FinalKeyResult(final_a, len(final_a), eps, rec.leaked_bits, k,
                          None, None, log)
