"""Eavesdropper strategies.

Each strategy transforms pulses in flight and leaves a classical record
from which Eve's post-disclosure knowledge is resolved after the sifting
announcement.  Eve's own optics are noiseless and lossless (worst-case
convention: all imperfections belong to the legitimate hardware, all
information to Eve).

Scalar ``attack_*`` functions define the per-pulse semantics; the
``*_batch`` variants are the vectorized forms consumed by the protocol
engines and are exact array translations of the scalar ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .quantum import (NO_CLICK, Basis, ChannelModel, PhotonPulse, SignalState,
                      VACUUM)

KINDS = ("none", "intercept_resend", "beam_split", "pns", "usd_b92")


@dataclass(frozen=True)
class EveStrategy:
    """Strategy selector plus parameters.

    intercept_resend: basis_policy 'uniform_signal_bases' draws Eve's
        measurement basis uniformly from the protocol's signal bases;
        'fixed_basis' always uses `fixed_basis`.
    beam_split: tap_ratio in (0,1); None means tap exactly the channel
        loss (1 - transmittance) and forward the rest losslessly.
    pns: block_single_prob in [0,1] is the probability of suppressing a
        single-photon pulse; multi-photon pulses always lose one photon
        to Eve and continue losslessly.
    usd_b92: unambiguous discrimination of the two B92 states; successes
        are forwarded as perfect copies, throttled to mimic the honest
        channel's detection rate.
    """

    kind: str = "none"
    basis_policy: str = "uniform_signal_bases"
    fixed_basis: int = 0
    tap_ratio: Optional[float] = None
    block_single_prob: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if self.basis_policy not in ("uniform_signal_bases", "fixed_basis"):
            raise ValueError(f"unknown basis_policy {self.basis_policy!r}")
        if self.tap_ratio is not None and not 0.0 < self.tap_ratio < 1.0:
            raise ValueError("tap_ratio must lie in (0,1)")
        if not 0.0 <= self.block_single_prob <= 1.0:
            raise ValueError("block_single_prob must lie in [0,1]")


NO_EVE = EveStrategy("none")


@dataclass
class EveRecord:
    """Per-pulse classical record.  Arrays are pulse_count long; -1 marks
    'not applicable' in the integer fields."""

    pulse_count: int
    measured_basis: Optional[np.ndarray] = None   # int8
    measured_bit: Optional[np.ndarray] = None     # int8
    stored_photon: Optional[np.ndarray] = None    # bool
    conclusive: Optional[np.ndarray] = None       # bool
    known_bit: Optional[np.ndarray] = None        # int8, set after disclosure

    def summary(self) -> dict:
        out = {"pulse_count": self.pulse_count}
        if self.stored_photon is not None:
            out["stored_photons"] = int(self.stored_photon.sum())
        if self.conclusive is not None:
            out["conclusive"] = int(self.conclusive.sum())
        return out


@dataclass
class BatchAttack:
    """Result of attacking one session's pulse stream."""

    n: np.ndarray                # forwarded photon counts
    state_idx: np.ndarray        # forwarded state table indices
    channel_consumed: bool       # True when Eve replaced the lossy line
    record: EveRecord


# ---------------------------------------------------------------------------
# scalar per-pulse operations
# ---------------------------------------------------------------------------

def attack_intercept_resend(pulse: PhotonPulse, strategy: EveStrategy,
                            rng: np.random.Generator,
                            bases: Sequence[Basis]) -> tuple[PhotonPulse, dict]:
    """Eve measures the pulse with an ideal detector in a basis chosen by
    her policy and resends a fresh single photon in the observed
    eigenstate."""
    if strategy.kind != "intercept_resend":
        raise ValueError("strategy kind must be intercept_resend")
    if strategy.basis_policy == "fixed_basis":
        b_idx = strategy.fixed_basis
    else:
        b_idx = int(rng.integers(0, len(bases)))
    basis = bases[b_idx]
    if pulse.n == 0:
        return VACUUM, {"measured_basis": b_idx, "measured_bit": -1}
    k1 = int(rng.binomial(pulse.n, basis.prob_outcome_one(pulse.state)))
    k0 = pulse.n - k1
    if k0 and k1:  # conflicting projections: double click, random bit
        bit = int(rng.integers(0, 2))
    else:
        bit = 1 if k1 else 0
    return PhotonPulse(1, basis.eigenstate(bit)), {
        "measured_basis": b_idx, "measured_bit": bit}


def attack_beam_split(pulse: PhotonPulse, strategy: EveStrategy,
                      ch: ChannelModel,
                      rng: np.random.Generator) -> tuple[PhotonPulse, dict]:
    """Divert each photon to Eve with the tap probability; the remainder
    continues over a line whose loss is reduced so the total transmittance
    seen by Bob is unchanged.  Eve stores her photons and measures them in
    the announced basis after sifting."""
    if strategy.kind != "beam_split":
        raise ValueError("strategy kind must be beam_split")
    eta = ch.transmittance
    tap = strategy.tap_ratio if strategy.tap_ratio is not None else 1.0 - eta
    if tap > 1.0 - eta + 1e-12:
        raise ValueError(
            f"tap_ratio {tap} exceeds the channel loss 1 - eta = {1 - eta}")
    k_eve = int(rng.binomial(pulse.n, tap)) if pulse.n else 0
    remainder = pulse.n - k_eve
    eta_fwd = eta / (1.0 - tap) if tap < 1.0 else 1.0
    k_bob = int(rng.binomial(remainder, min(1.0, eta_fwd))) if remainder else 0
    fwd = PhotonPulse(k_bob, pulse.state) if k_bob else VACUUM
    return fwd, {"stored_photon": k_eve >= 1}


def attack_pns(pulse: PhotonPulse, strategy: EveStrategy,
               rng: np.random.Generator) -> tuple[PhotonPulse, dict]:
    """Non-demolition photon-number measurement: keep exactly one photon
    of every multi-photon pulse and forward the rest losslessly; block a
    single photon with block_single_prob, else forward it untouched."""
    if strategy.kind != "pns":
        raise ValueError("strategy kind must be pns")
    if pulse.n >= 2:
        return PhotonPulse(pulse.n - 1, pulse.state), {"stored_photon": True}
    if pulse.n == 1:
        if rng.random() < strategy.block_single_prob:
            return VACUUM, {"stored_photon": False, "blocked": True}
        return pulse, {"stored_photon": False}
    return VACUUM, {"stored_photon": False}


def usd_success_prob(phi0: SignalState, phi1: SignalState) -> float:
    """Success probability of unambiguous discrimination between two pure
    states: 1 - |<phi0|phi1>|."""
    return 1.0 - abs(phi0.overlap(phi1))


def attack_usd_b92(pulse: PhotonPulse, strategy: EveStrategy,
                   phi0: SignalState, phi1: SignalState,
                   ch: ChannelModel,
                   rng: np.random.Generator) -> tuple[PhotonPulse, dict]:
    """Unambiguous state discrimination on a B92 pulse.  On success Eve
    knows the bit exactly and forwards a perfect copy over a lossless
    line; failures are converted to vacuum.  Successful copies are
    throttled so Bob's detection rate matches the honest lossy channel
    (possible whenever transmittance < 1 - overlap)."""
    if strategy.kind != "usd_b92":
        raise ValueError("strategy kind must be usd_b92")
    if pulse.n == 0:
        return VACUUM, {"conclusive": False, "measured_bit": -1}
    ov0 = abs(phi0.overlap(pulse.state))
    ov1 = abs(phi1.overlap(pulse.state))
    if min(1.0 - ov0, 1.0 - ov1) > 1e-9:
        raise ValueError("usd_b92 applied to a pulse outside the B92 state pair")
    bit = 0 if ov0 > ov1 else 1
    p_succ = usd_success_prob(phi0, phi1)
    if rng.random() >= p_succ:
        return VACUUM, {"conclusive": False, "measured_bit": -1}
    forward_prob = min(1.0, ch.transmittance / p_succ)
    if rng.random() < forward_prob:
        fwd = PhotonPulse(1, phi0 if bit == 0 else phi1)
    else:
        fwd = VACUUM
    return fwd, {"conclusive": True, "measured_bit": bit}


# ---------------------------------------------------------------------------
# vectorized session-level transforms
# ---------------------------------------------------------------------------

def attack_batch(strategy: EveStrategy, n: np.ndarray, state_idx: np.ndarray,
                 p_one: np.ndarray, eigen_idx: np.ndarray,
                 signal_basis_count: int, ch: ChannelModel,
                 rng: np.random.Generator,
                 b92_states: Optional[tuple[SignalState, SignalState]] = None,
                 ) -> BatchAttack:
    """Apply a strategy to a whole pulse stream.

    n, state_idx:  per-pulse photon counts and state-table indices.
    p_one:         (K, M) projection probabilities onto outcome 1 for
                   table state k measured in basis m.
    eigen_idx:     (M, 2) table index of each basis eigenstate.
    """
    npulses = n.shape[0]
    rec = EveRecord(pulse_count=npulses)

    if strategy.kind == "none":
        return BatchAttack(n, state_idx, False, rec)

    if strategy.kind == "intercept_resend":
        if strategy.basis_policy == "fixed_basis":
            eb = np.full(npulses, strategy.fixed_basis, dtype=np.int8)
        else:
            eb = rng.integers(0, signal_basis_count, size=npulses, dtype=np.int8)
        probs = p_one[state_idx, eb]
        k1 = rng.binomial(n, probs)
        k0 = n - k1
        bit = np.where(k1 > 0, 1, 0).astype(np.int8)
        both = (k0 > 0) & (k1 > 0)
        if both.any():
            bit[both] = rng.integers(0, 2, size=int(both.sum()), dtype=np.int8)
        bit[n == 0] = -1
        n_out = np.where(n > 0, 1, 0)
        s_out = np.where(n > 0, eigen_idx[eb, np.maximum(bit, 0)], state_idx)
        rec.measured_basis = eb
        rec.measured_bit = bit
        return BatchAttack(n_out.astype(n.dtype), s_out.astype(state_idx.dtype),
                           False, rec)

    if strategy.kind == "beam_split":
        eta = ch.transmittance
        tap = strategy.tap_ratio if strategy.tap_ratio is not None else 1.0 - eta
        if tap > 1.0 - eta + 1e-12:
            raise ValueError(
                f"tap_ratio {tap} exceeds the channel loss 1 - eta = {1 - eta}")
        k_eve = rng.binomial(n, tap)
        eta_fwd = min(1.0, eta / (1.0 - tap)) if tap < 1.0 else 1.0
        n_out = rng.binomial(n - k_eve, eta_fwd)
        rec.stored_photon = k_eve >= 1
        return BatchAttack(n_out, state_idx, True, rec)

    if strategy.kind == "pns":
        multi = n >= 2
        single = n == 1
        n_out = n.copy()
        n_out[multi] -= 1
        if strategy.block_single_prob > 0 and single.any():
            blocked = single & (rng.random(npulses) < strategy.block_single_prob)
            n_out[blocked] = 0
        rec.stored_photon = multi.copy()
        return BatchAttack(n_out, state_idx, True, rec)

    if strategy.kind == "usd_b92":
        if b92_states is None:
            raise ValueError("usd_b92 requires the B92 state pair")
        p_succ = usd_success_prob(*b92_states)
        success = (n > 0) & (rng.random(npulses) < p_succ)
        forward_prob = min(1.0, ch.transmittance / p_succ)
        forwarded = success & (rng.random(npulses) < forward_prob)
        n_out = np.where(forwarded, 1, 0).astype(n.dtype)
        rec.conclusive = success
        bit = np.full(npulses, -1, dtype=np.int8)
        # B92 table convention: state 0 encodes bit 0, state 1 encodes bit 1
        bit[success] = state_idx[success].astype(np.int8)
        rec.measured_bit = bit
        return BatchAttack(n_out, state_idx, True, rec)

    raise ValueError(f"unknown strategy kind {strategy.kind!r}")


def resolve_known_bits(strategy: EveStrategy, record: EveRecord,
                       alice_basis: np.ndarray, alice_bits: np.ndarray,
                       announcement: str, rng: np.random.Generator,
                       pair_overlap: float = 2 ** -0.5) -> np.ndarray:
    """Post-disclosure resolution: boolean mask of pulses whose key bit Eve
    knows deterministically.

    announcement 'basis' (BB84-style): a stored photon measured in the
    announced basis, or an intercept measurement made in the right basis,
    yields the bit exactly.  announcement 'pair' (SARG-style): a stored
    photon only identifies the bit when unambiguous discrimination of the
    two announced non-orthogonal states succeeds.
    """
    npulses = record.pulse_count
    known = np.zeros(npulses, dtype=bool)
    if strategy.kind == "none":
        pass
    elif strategy.kind == "intercept_resend":
        known = record.measured_basis == alice_basis
        record.known_bit = np.where(known, alice_bits, -1).astype(np.int8)
    elif strategy.kind in ("beam_split", "pns"):
        held = record.stored_photon
        if announcement == "basis":
            known = held.copy()
        elif announcement == "pair":
            succ = rng.random(npulses) < (1.0 - pair_overlap)
            known = held & succ
        else:
            raise ValueError(f"unknown announcement type {announcement!r}")
        record.known_bit = np.where(known, alice_bits, -1).astype(np.int8)
    elif strategy.kind == "usd_b92":
        known = record.conclusive.copy()
        record.known_bit = np.where(known, alice_bits, -1).astype(np.int8)
    return known
