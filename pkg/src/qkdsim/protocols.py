"""Protocol sessions: BB84, B92, six-state, SARG04, decoy-intensity BB84,
and the entanglement-based BBM92 and E91 schemes.

Each runner is deterministic given its generator and returns a
``SessionTranscript``.  Pulse streams are processed as whole numpy arrays;
the per-pulse semantics are those of the scalar operations in
``quantum`` and ``adversary``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import adversary
from .adversary import EveRecord, EveStrategy
from .bits import BitString
from .quantum import (ALL_BASES, DIAGONAL, NO_CLICK, RECTILINEAR, Basis,
                      ChannelModel, DetectorModel, SignalState, SourceModel,
                      measure_batch, sample_photon_number)

PROTOCOLS = ("bb84", "b92", "six_state", "sarg", "decoy_bb84", "bbm92", "e91")


@dataclass(frozen=True)
class ProtocolConfig:
    protocol: str
    num_pulses: int
    basis_bias: Optional[float] = None      # prob of the primary basis
    b92_overlap: float = 2 ** -0.5          # |<phi0|phi1>|
    signal_mu: float = 0.8
    decoy_mu: float = 0.12
    decoy_fraction: float = 0.12

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if self.num_pulses < 0:
            raise ValueError("num_pulses must be >= 0")
        if self.basis_bias is not None and not 0.0 < self.basis_bias < 1.0:
            raise ValueError("basis_bias must lie in (0,1)")
        if self.protocol == "b92" and not 0.0 < self.b92_overlap < 1.0:
            raise ValueError("b92 overlap must lie in (0,1)")
        if self.protocol == "decoy_bb84":
            if not 0.0 < self.decoy_fraction < 1.0:
                raise ValueError("decoy_fraction must lie in (0,1)")
            if self.signal_mu == self.decoy_mu:
                raise ValueError("signal_mu and decoy_mu must differ")


@dataclass
class SessionTranscript:
    """Full classical record of one protocol session."""

    protocol: str
    pulse_count: int
    detection_count: int
    alice_bits: np.ndarray
    alice_bases: np.ndarray
    bob_bases: np.ndarray
    bob_outcomes: np.ndarray            # -1 = no click / inconclusive
    sift_mask: np.ndarray
    sifted_alice: BitString
    sifted_bob: BitString
    alice_intensities: Optional[np.ndarray] = None
    intensity_stats: Optional[dict] = None
    eve_record: Optional[EveRecord] = None
    eve_known_mask: Optional[np.ndarray] = None
    chsh_samples: Optional[dict] = None

    @property
    def sifted_fraction(self) -> float:
        return len(self.sifted_alice) / self.pulse_count if self.pulse_count else 0.0

    @property
    def qber(self) -> float:
        n = len(self.sifted_alice)
        if n == 0:
            return 0.0
        return self.sifted_alice.hamming_distance(self.sifted_bob) / n

    @property
    def eve_known_fraction(self) -> float:
        """Fraction of the sifted key Eve knows deterministically."""
        if self.eve_known_mask is None or not self.sift_mask.any():
            return 0.0
        return float(self.eve_known_mask[self.sift_mask].mean())

    def to_dict(self) -> dict:
        """JSON-serializable record (schema documented in the README)."""
        out = {
            "protocol": self.protocol,
            "pulse_count": int(self.pulse_count),
            "detection_count": int(self.detection_count),
            "alice_bits": self.alice_bits.tolist(),
            "alice_bases": self.alice_bases.tolist(),
            "bob_bases": self.bob_bases.tolist(),
            "bob_outcomes": self.bob_outcomes.tolist(),
            "sift_mask": self.sift_mask.astype(int).tolist(),
            "sifted_alice_hex": self.sifted_alice.to_hex(),
            "sifted_bob_hex": self.sifted_bob.to_hex(),
            "sifted_length": len(self.sifted_alice),
        }
        if self.alice_intensities is not None:
            out["alice_intensities"] = self.alice_intensities.tolist()
        if self.intensity_stats is not None:
            out["intensity_stats"] = self.intensity_stats
        if self.eve_known_mask is not None:
            out["eve_known_mask"] = self.eve_known_mask.astype(int).tolist()
        if self.chsh_samples is not None:
            out["chsh_samples"] = {"|".join(k): v.tolist()
                                   for k, v in self.chsh_samples.items()}
        return out

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)


# ---------------------------------------------------------------------------
# state tables (vectorized encoding bookkeeping)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StateTable:
    """Finite set of signal states and measurement bases for one session.

    p_one[k, m]  = probability of outcome 1 measuring state k in basis m.
    flip[k]      = index of the state orthogonal to state k (misalignment
                   target), -1 if absent from the table.
    eigen_idx[m, o] = table index of basis m's outcome-o eigenstate.
    bit[k], prep_basis[k] = classical labels of state k.
    """

    states: tuple
    bases: tuple
    bit: np.ndarray
    prep_basis: np.ndarray
    p_one: np.ndarray
    flip: np.ndarray
    eigen_idx: np.ndarray

    @classmethod
    def build(cls, states, bases, bit, prep_basis) -> "StateTable":
        K, M = len(states), len(bases)
        p_one = np.empty((K, M))
        for k, st in enumerate(states):
            for m, ba in enumerate(bases):
                p_one[k, m] = ba.prob_outcome_one(st)
        flip = np.full(K, -1, dtype=np.int64)
        for k, st in enumerate(states):
            for j, other in enumerate(states):
                if abs(st.overlap(other)) < 1e-9:
                    flip[k] = j
                    break
        eigen_idx = np.full((M, 2), -1, dtype=np.int64)
        for m, ba in enumerate(bases):
            for o in (0, 1):
                eig = ba.eigenstate(o)
                for k, st in enumerate(states):
                    if abs(abs(st.overlap(eig)) - 1.0) < 1e-9:
                        eigen_idx[m, o] = k
                        break
        return cls(tuple(states), tuple(bases), np.asarray(bit, dtype=np.int8),
                   np.asarray(prep_basis, dtype=np.int8), p_one, flip, eigen_idx)


def bb84_table() -> StateTable:
    # index = 2*basis + bit: H, V, A, D
    b = [RECTILINEAR, DIAGONAL]
    states = [b[0].v0, b[0].v1, b[1].v0, b[1].v1]
    return StateTable.build(states, b, bit=[0, 1, 0, 1], prep_basis=[0, 0, 1, 1])


def six_state_table() -> StateTable:
    b = list(ALL_BASES)
    states = [v for ba in b for v in (ba.v0, ba.v1)]
    return StateTable.build(states, b, bit=[0, 1, 0, 1, 0, 1],
                            prep_basis=[0, 0, 1, 1, 2, 2])


def b92_states(overlap: float) -> tuple[SignalState, SignalState]:
    """Two real linear-polarization states with <phi0|phi1> = overlap."""
    alpha = 0.5 * math.acos(overlap)
    phi0 = SignalState(math.cos(alpha), math.sin(alpha))
    phi1 = SignalState(math.cos(alpha), -math.sin(alpha))
    return phi0, phi1


def b92_table(overlap: float) -> StateTable:
    phi0, phi1 = b92_states(overlap)
    # Bob's test-for-bit-c basis projects onto the complement of the *other*
    # state; outcome 0 on basis c is the conclusive result for bit c.
    basis0 = Basis("test_bit0", phi1.orthogonal(), phi1)
    basis1 = Basis("test_bit1", phi0.orthogonal(), phi0)
    states = [phi0, phi1, phi0.orthogonal(), phi1.orthogonal()]
    return StateTable.build(states, [basis0, basis1],
                            bit=[0, 1, -1, -1], prep_basis=[0, 1, -1, -1])


# SARG announcement chain: H->A, A->V, V->D, D->H (table order H,V,A,D)
_SARG_PARTNER = np.array([2, 3, 0, 1])


# ---------------------------------------------------------------------------
# shared engine pieces
# ---------------------------------------------------------------------------

def _biased_choice(rng, n, num_options, primary_prob):
    """Index array: option 0 with primary_prob, the rest uniform."""
    if primary_prob is None:
        return rng.integers(0, num_options, size=n, dtype=np.int8)
    u = rng.random(n)
    out = np.zeros(n, dtype=np.int8)
    rest = u >= primary_prob
    if num_options == 2:
        out[rest] = 1
    else:
        out[rest] = 1 + rng.integers(0, num_options - 1, size=int(rest.sum()),
                                     dtype=np.int8)
    return out


def _deliver_and_detect(n, state_idx, table, ch, det, bob_basis,
                        channel_consumed, rng):
    """Channel loss (unless Eve already replaced the line), receiver
    misalignment flip, then detection."""
    if not channel_consumed and ch.transmittance < 1.0:
        n = rng.binomial(n, ch.transmittance)
    if ch.misalignment_error_prob > 0.0:
        flipped = (n > 0) & (rng.random(n.shape[0]) < ch.misalignment_error_prob)
        state_idx = np.where(flipped & (table.flip[state_idx] >= 0),
                             table.flip[state_idx], state_idx)
    p1 = table.p_one[state_idx, bob_basis]
    outcomes = measure_batch(n, p1, det, rng)
    return outcomes


def _attack(eve, n, state_idx, table, ch, rng, signal_basis_count,
            b92_pair=None):
    return adversary.attack_batch(
        eve, n, state_idx, table.p_one, table.eigen_idx,
        signal_basis_count, ch, rng, b92_states=b92_pair)


# ---------------------------------------------------------------------------
# prepare-and-measure protocols
# ---------------------------------------------------------------------------

def run_bb84(cfg: ProtocolConfig, src: SourceModel, ch: ChannelModel,
             det: DetectorModel, eve: EveStrategy,
             rng: np.random.Generator) -> SessionTranscript:
    table = bb84_table()
    N = cfg.num_pulses
    bits = rng.integers(0, 2, size=N, dtype=np.int8)
    a_bases = _biased_choice(rng, N, 2, cfg.basis_bias)
    b_bases = _biased_choice(rng, N, 2, cfg.basis_bias)
    state_idx = (2 * a_bases + bits).astype(np.int64)
    n = sample_photon_number(src, rng, size=N)

    atk = _attack(eve, n, state_idx, table, ch, rng, signal_basis_count=2)
    outcomes = _deliver_and_detect(atk.n, atk.state_idx, table, ch, det,
                                   b_bases, atk.channel_consumed, rng)
    sift = (outcomes != NO_CLICK) & (b_bases == a_bases)
    known = adversary.resolve_known_bits(eve, atk.record, a_bases, bits,
                                         "basis", rng)
    return SessionTranscript(
        protocol="bb84", pulse_count=N,
        detection_count=int((outcomes != NO_CLICK).sum()),
        alice_bits=bits, alice_bases=a_bases, bob_bases=b_bases,
        bob_outcomes=outcomes, sift_mask=sift,
        sifted_alice=BitString.from_array(bits[sift]),
        sifted_bob=BitString.from_array(outcomes[sift].astype(np.uint8)),
        eve_record=atk.record, eve_known_mask=known)


def run_six_state(cfg: ProtocolConfig, src: SourceModel, ch: ChannelModel,
                  det: DetectorModel, eve: EveStrategy,
                  rng: np.random.Generator) -> SessionTranscript:
    table = six_state_table()
    N = cfg.num_pulses
    bits = rng.integers(0, 2, size=N, dtype=np.int8)
    a_bases = _biased_choice(rng, N, 3, cfg.basis_bias)
    b_bases = _biased_choice(rng, N, 3, cfg.basis_bias)
    state_idx = (2 * a_bases + bits).astype(np.int64)
    n = sample_photon_number(src, rng, size=N)

    atk = _attack(eve, n, state_idx, table, ch, rng, signal_basis_count=3)
    outcomes = _deliver_and_detect(atk.n, atk.state_idx, table, ch, det,
                                   b_bases, atk.channel_consumed, rng)
    sift = (outcomes != NO_CLICK) & (b_bases == a_bases)
    known = adversary.resolve_known_bits(eve, atk.record, a_bases, bits,
                                         "basis", rng)
    return SessionTranscript(
        protocol="six_state", pulse_count=N,
        detection_count=int((outcomes != NO_CLICK).sum()),
        alice_bits=bits, alice_bases=a_bases, bob_bases=b_bases,
        bob_outcomes=outcomes, sift_mask=sift,
        sifted_alice=BitString.from_array(bits[sift]),
        sifted_bob=BitString.from_array(outcomes[sift].astype(np.uint8)),
        eve_record=atk.record, eve_known_mask=known)


def run_b92(cfg: ProtocolConfig, src: SourceModel, ch: ChannelModel,
            det: DetectorModel, eve: EveStrategy,
            rng: np.random.Generator) -> SessionTranscript:
    table = b92_table(cfg.b92_overlap)
    pair = (table.states[0], table.states[1])
    N = cfg.num_pulses
    bits = rng.integers(0, 2, size=N, dtype=np.int8)
    state_idx = bits.astype(np.int64)            # state k encodes bit k
    # Bob picks which bit value to test; outcome 0 on test basis c is the
    # conclusive detection of bit c (projection orthogonal to the other state)
    b_choice = rng.integers(0, 2, size=N, dtype=np.int8)
    n = sample_photon_number(src, rng, size=N)

    atk = _attack(eve, n, state_idx, table, ch, rng, signal_basis_count=2,
                  b92_pair=pair)
    outcomes = _deliver_and_detect(atk.n, atk.state_idx, table, ch, det,
                                   b_choice, atk.channel_consumed, rng)
    sift = outcomes == 0
    known = adversary.resolve_known_bits(eve, atk.record,
                                         np.zeros(N, dtype=np.int8), bits,
                                         "basis", rng)
    return SessionTranscript(
        protocol="b92", pulse_count=N,
        detection_count=int((outcomes != NO_CLICK).sum()),
        alice_bits=bits, alice_bases=np.zeros(N, dtype=np.int8),
        bob_bases=b_choice, bob_outcomes=outcomes, sift_mask=sift,
        sifted_alice=BitString.from_array(bits[sift]),
        sifted_bob=BitString.from_array(b_choice[sift].astype(np.uint8)),
        eve_record=atk.record, eve_known_mask=known)


def run_sarg(cfg: ProtocolConfig, src: SourceModel, ch: ChannelModel,
             det: DetectorModel, eve: EveStrategy,
             rng: np.random.Generator) -> SessionTranscript:
    """BB84 hardware with pair-announcement sifting: Alice announces the
    non-orthogonal pair (sent state, fixed partner); Bob is conclusive when
    his measured eigenstate is orthogonal to one announced state, which
    identifies the other as Alice's."""
    table = bb84_table()
    N = cfg.num_pulses
    bits = rng.integers(0, 2, size=N, dtype=np.int8)
    a_bases = _biased_choice(rng, N, 2, cfg.basis_bias)
    b_bases = _biased_choice(rng, N, 2, cfg.basis_bias)
    state_idx = (2 * a_bases + bits).astype(np.int64)
    n = sample_photon_number(src, rng, size=N)

    atk = _attack(eve, n, state_idx, table, ch, rng, signal_basis_count=2)
    outcomes = _deliver_and_detect(atk.n, atk.state_idx, table, ch, det,
                                   b_bases, atk.channel_consumed, rng)
    clicked = outcomes != NO_CLICK
    measured_state = table.eigen_idx[b_bases, np.maximum(outcomes, 0)]
    partner = _SARG_PARTNER[state_idx]
    orth_to_sent = measured_state == table.flip[state_idx]
    orth_to_partner = measured_state == table.flip[partner]
    sift = clicked & (orth_to_sent | orth_to_partner)
    inferred = np.where(orth_to_sent, partner, state_idx)
    bob_bits = table.bit[inferred]
    known = adversary.resolve_known_bits(eve, atk.record, a_bases, bits,
                                         "pair", rng)
    return SessionTranscript(
        protocol="sarg", pulse_count=N,
        detection_count=int(clicked.sum()),
        alice_bits=bits, alice_bases=a_bases, bob_bases=b_bases,
        bob_outcomes=np.where(sift, bob_bits, NO_CLICK).astype(np.int8),
        sift_mask=sift,
        sifted_alice=BitString.from_array(bits[sift]),
        sifted_bob=BitString.from_array(bob_bits[sift].astype(np.uint8)),
        eve_record=atk.record, eve_known_mask=known)


def run_decoy_bb84(cfg: ProtocolConfig, src: SourceModel, ch: ChannelModel,
                   det: DetectorModel, eve: EveStrategy,
                   rng: np.random.Generator) -> SessionTranscript:
    """BB84 with randomly interleaved decoy-intensity pulses.  The source
    argument fixes the emitter family; photon numbers are drawn per pulse
    from the tagged mean photon number (signal_mu / decoy_mu)."""
    if src.kind != "attenuated_laser":
        raise ValueError("decoy_bb84 requires an attenuated_laser source")
    table = bb84_table()
    N = cfg.num_pulses
    bits = rng.integers(0, 2, size=N, dtype=np.int8)
    a_bases = _biased_choice(rng, N, 2, cfg.basis_bias)
    b_bases = _biased_choice(rng, N, 2, cfg.basis_bias)
    state_idx = (2 * a_bases + bits).astype(np.int64)
    decoy = rng.random(N) < cfg.decoy_fraction
    mu = np.where(decoy, cfg.decoy_mu, cfg.signal_mu)
    n = rng.poisson(mu)

    atk = _attack(eve, n, state_idx, table, ch, rng, signal_basis_count=2)
    outcomes = _deliver_and_detect(atk.n, atk.state_idx, table, ch, det,
                                   b_bases, atk.channel_consumed, rng)
    clicked = outcomes != NO_CLICK
    sift = clicked & (b_bases == a_bases)
    stats = {
        "signal": {"mu": cfg.signal_mu,
                   "sent": int((~decoy).sum()),
                   "detected": int(clicked[~decoy].sum())},
        "decoy": {"mu": cfg.decoy_mu,
                  "sent": int(decoy.sum()),
                  "detected": int(clicked[decoy].sum())},
    }
    for entry in stats.values():
        entry["gain"] = entry["detected"] / entry["sent"] if entry["sent"] else 0.0
    known = adversary.resolve_known_bits(eve, atk.record, a_bases, bits,
                                         "basis", rng)
    return SessionTranscript(
        protocol="decoy_bb84", pulse_count=N,
        detection_count=int(clicked.sum()),
        alice_bits=bits, alice_bases=a_bases, bob_bases=b_bases,
        bob_outcomes=outcomes, sift_mask=sift,
        sifted_alice=BitString.from_array(bits[sift]),
        sifted_bob=BitString.from_array(outcomes[sift].astype(np.uint8)),
        alice_intensities=decoy.astype(np.int8), intensity_stats=stats,
        eve_record=atk.record, eve_known_mask=known)


# ---------------------------------------------------------------------------
# entanglement-based protocols
# ---------------------------------------------------------------------------

def _pair_outcomes(theta_a, theta_b, eve: EveStrategy, eve_angles,
                   rng) -> tuple[np.ndarray, np.ndarray]:
    """Sample +/-1 outcome pairs per measurement-angle arrays (degrees).

    Honest pairs follow the singlet law E[a b] = -cos(theta_a - theta_b).
    Under intercept_resend Eve measures the particle flying to Bob at an
    angle drawn uniformly from eve_angles and resends the corresponding
    eigenstate, which Bob then projects."""
    m = theta_a.shape[0]
    a = np.where(rng.random(m) < 0.5, 1, -1).astype(np.int8)
    if eve.kind == "none":
        cos_ab = np.cos(np.radians(theta_a - theta_b))
        p_opp = (1.0 + cos_ab) / 2.0
        b = np.where(rng.random(m) < p_opp, -a, a).astype(np.int8)
        return a, b
    if eve.kind == "intercept_resend":
        phi = rng.choice(np.asarray(eve_angles, dtype=float), size=m)
        cos_ae = np.cos(np.radians(theta_a - phi))
        p_opp = (1.0 + cos_ae) / 2.0
        e = np.where(rng.random(m) < p_opp, -a, a).astype(np.int8)
        # Bob projects the resent eigenstate |phi, e>
        p_same = np.cos(np.radians(theta_b - phi) / 2.0) ** 2
        b = np.where(rng.random(m) < p_same, e, -e).astype(np.int8)
        return a, b
    raise ValueError(f"pair protocols support eve kinds none/intercept_resend,"
                     f" got {eve.kind!r}")


def _pair_reception(b, ch: ChannelModel, det: DetectorModel, rng):
    """Bob-side loss, misalignment flip, and dark counts for pair protocols.
    Returns (detected_mask, possibly flipped outcomes)."""
    m = b.shape[0]
    eta = ch.transmittance * det.efficiency
    detected = rng.random(m) < eta
    if ch.misalignment_error_prob > 0.0:
        flip = rng.random(m) < ch.misalignment_error_prob
        b = np.where(flip, -b, b).astype(np.int8)
    if det.dark_prob > 0.0:
        dark = ~detected & (rng.random(m) < 1.0 - (1.0 - det.dark_prob) ** 2)
        if dark.any():
            b = b.copy()
            b[dark] = np.where(rng.random(int(dark.sum())) < 0.5, 1, -1)
            detected = detected | dark
    return detected, b


_BBM92_ANGLES = np.array([0.0, 90.0])       # two conjugate bases
_E91_ALICE_ANGLES = np.array([0.0, 45.0, 90.0])
_E91_BOB_ANGLES = np.array([45.0, 90.0, 135.0])

# CHSH settings inside the E91 geometry: n1=90deg, n1'=0deg (Alice),
# n2=45deg, n2'=135deg (Bob); every unprimed/mixed pair is 45deg apart and
# the doubly primed pair 135deg apart.
E91_CHSH_SETTINGS = {
    ("n1", "n2"): (2, 0),
    ("n1p", "n2"): (0, 0),
    ("n1", "n2p"): (2, 2),
    ("n1p", "n2p"): (0, 2),
}


def run_bbm92(cfg: ProtocolConfig, ch: ChannelModel, det: DetectorModel,
              eve: EveStrategy, rng: np.random.Generator) -> SessionTranscript:
    """Entangled-pair BB84 variant: both parties measure in one of two
    conjugate bases; matching bases give perfectly anti-correlated singlet
    outcomes, so Bob flips his bit to align the keys."""
    N = cfg.num_pulses
    a_idx = _biased_choice(rng, N, 2, cfg.basis_bias)
    b_idx = _biased_choice(rng, N, 2, cfg.basis_bias)
    a, b = _pair_outcomes(_BBM92_ANGLES[a_idx], _BBM92_ANGLES[b_idx],
                          eve, _BBM92_ANGLES, rng)
    detected, b = _pair_reception(b, ch, det, rng)
    a_bits = ((1 - a) // 2).astype(np.int8)
    b_bits = ((1 + b) // 2).astype(np.int8)  # flip converts anti-correlation
    sift = detected & (a_idx == b_idx)
    outcomes = np.where(detected, b_bits, NO_CLICK).astype(np.int8)
    return SessionTranscript(
        protocol="bbm92", pulse_count=N, detection_count=int(detected.sum()),
        alice_bits=a_bits, alice_bases=a_idx, bob_bases=b_idx,
        bob_outcomes=outcomes, sift_mask=sift,
        sifted_alice=BitString.from_array(a_bits[sift]),
        sifted_bob=BitString.from_array(b_bits[sift].astype(np.uint8)))


def run_e91(cfg: ProtocolConfig, ch: ChannelModel, det: DetectorModel,
            eve: EveStrategy, rng: np.random.Generator) -> SessionTranscript:
    """Three-angle entangled protocol.  Matching angles give key bits;
    the four CHSH setting combinations are collected as +/-1 product
    samples for the Bell-estimation module."""
    N = cfg.num_pulses
    a_idx = rng.integers(0, 3, size=N, dtype=np.int8)
    b_idx = rng.integers(0, 3, size=N, dtype=np.int8)
    theta_a = _E91_ALICE_ANGLES[a_idx]
    theta_b = _E91_BOB_ANGLES[b_idx]
    a, b = _pair_outcomes(theta_a, theta_b, eve, _E91_BOB_ANGLES, rng)
    detected, b = _pair_reception(b, ch, det, rng)

    matched = detected & (theta_a == theta_b)
    a_bits = ((1 - a) // 2).astype(np.int8)
    b_bits = ((1 + b) // 2).astype(np.int8)
    chsh = {}
    for label, (ai, bi) in E91_CHSH_SETTINGS.items():
        mask = detected & (a_idx == ai) & (b_idx == bi)
        chsh[label] = (a[mask] * b[mask]).astype(np.int8)
    outcomes = np.where(detected, b_bits, NO_CLICK).astype(np.int8)
    return SessionTranscript(
        protocol="e91", pulse_count=N, detection_count=int(detected.sum()),
        alice_bits=a_bits, alice_bases=a_idx, bob_bases=b_idx,
        bob_outcomes=outcomes, sift_mask=matched,
        sifted_alice=BitString.from_array(a_bits[matched]),
        sifted_bob=BitString.from_array(b_bits[matched].astype(np.uint8)),
        chsh_samples=chsh)


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def run_session(cfg: ProtocolConfig, src: SourceModel, ch: ChannelModel,
                det: DetectorModel, eve: EveStrategy,
                rng: np.random.Generator) -> SessionTranscript:
    if cfg.protocol == "bb84":
        return run_bb84(cfg, src, ch, det, eve, rng)
    if cfg.protocol == "b92":
        return run_b92(cfg, src, ch, det, eve, rng)
    if cfg.protocol == "six_state":
        return run_six_state(cfg, src, ch, det, eve, rng)
    if cfg.protocol == "sarg":
        return run_sarg(cfg, src, ch, det, eve, rng)
    if cfg.protocol == "decoy_bb84":
        return run_decoy_bb84(cfg, src, ch, det, eve, rng)
    if cfg.protocol == "bbm92":
        return run_bbm92(cfg, ch, det, eve, rng)
    if cfg.protocol == "e91":
        return run_e91(cfg, ch, det, eve, rng)
    raise ValueError(f"unknown protocol {cfg.protocol!r}")
