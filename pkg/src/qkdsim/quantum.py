"""Physical layer: qubit polarization states, photon sources, lossy
channels, threshold detectors, and singlet-pair sampling.

All parameter records are immutable dataclasses; every sampling function
takes an explicit ``numpy.random.Generator``.  Scalar operations carry the
model semantics; the ``*_batch`` helpers are the vectorized equivalents
used by the protocol engines.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Optional

import numpy as np

NO_CLICK = -1  # detection outcome: neither logical detector fired

_NORM_TOL = 1e-12


# ---------------------------------------------------------------------------
# states and bases
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SignalState:
    """Pure polarization qubit: amplitudes of |H> and |V>."""

    amp_h: complex
    amp_v: complex

    def __post_init__(self):
        norm = abs(self.amp_h) ** 2 + abs(self.amp_v) ** 2
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"state not normalized: |amp|^2 = {norm}")

    def overlap(self, other: "SignalState") -> complex:
        """Inner product <self|other>."""
        return (np.conj(self.amp_h) * other.amp_h
                + np.conj(self.amp_v) * other.amp_v)

    def orthogonal(self) -> "SignalState":
        """The unique (up to phase) state orthogonal to this one."""
        return SignalState(-np.conj(self.amp_v), np.conj(self.amp_h))

    def as_vector(self) -> np.ndarray:
        return np.array([self.amp_h, self.amp_v], dtype=complex)


_S2 = 1.0 / math.sqrt(2.0)

STATE_H = SignalState(1.0, 0.0)
STATE_V = SignalState(0.0, 1.0)
STATE_A = SignalState(_S2, _S2)    # 45 deg linear
STATE_D = SignalState(_S2, -_S2)   # 135 deg linear
STATE_L = SignalState(_S2, _S2 * 1j)
STATE_R = SignalState(_S2, -_S2 * 1j)


@dataclass(frozen=True)
class Basis:
    """Orthonormal measurement basis; vector order fixes the bit labels
    (v0 -> bit 0, v1 -> bit 1)."""

    name: str
    v0: SignalState
    v1: SignalState

    def __post_init__(self):
        if abs(self.v0.overlap(self.v1)) > _NORM_TOL:
            raise ValueError(f"basis {self.name!r} vectors are not orthogonal")

    def prob_outcome_one(self, state: SignalState) -> float:
        """Projection probability onto v1 for a single photon in `state`."""
        return float(abs(self.v1.overlap(state)) ** 2)

    def eigenstate(self, bit: int) -> SignalState:
        return self.v1 if bit else self.v0


RECTILINEAR = Basis("rectilinear", STATE_H, STATE_V)
DIAGONAL = Basis("diagonal", STATE_A, STATE_D)
CIRCULAR = Basis("circular", STATE_L, STATE_R)

SIGNAL_BASES = (RECTILINEAR, DIAGONAL)
ALL_BASES = (RECTILINEAR, DIAGONAL, CIRCULAR)


@dataclass(frozen=True)
class PhotonPulse:
    """n identically polarized photons; n = 0 is the vacuum."""

    n: int
    state: Optional[SignalState] = None

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("photon count must be >= 0")
        if self.n >= 1 and self.state is None:
            raise ValueError("non-vacuum pulse needs a polarization state")


VACUUM = PhotonPulse(0, None)


# ---------------------------------------------------------------------------
# device models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SourceModel:
    """Photon-number statistics of the emitter.

    kinds:
      ideal_single_photon -- exactly one photon per pulse
      attenuated_laser    -- Poisson(mu) photons per pulse
      heralded_pdc        -- vacuum with prob 1 - herald_efficiency,
                             two photons with prob multi_pair_prob,
                             one photon otherwise
    """

    kind: str
    mu: float = 0.0
    herald_efficiency: float = 0.0
    multi_pair_prob: float = 0.0

    def __post_init__(self):
        if self.kind == "attenuated_laser":
            if self.mu <= 0:
                raise ValueError("attenuated_laser requires mu > 0")
        elif self.kind == "heralded_pdc":
            if not 0.0 <= self.herald_efficiency <= 1.0:
                raise ValueError("herald_efficiency must lie in [0,1]")
            if not 0.0 <= self.multi_pair_prob <= self.herald_efficiency:
                raise ValueError("multi_pair_prob must lie in [0, herald_efficiency]")
        elif self.kind != "ideal_single_photon":
            raise ValueError(f"unknown source kind {self.kind!r}")

    @classmethod
    def ideal(cls) -> "SourceModel":
        return cls("ideal_single_photon")

    @classmethod
    def laser(cls, mu: float) -> "SourceModel":
        return cls("attenuated_laser", mu=mu)

    @classmethod
    def heralded(cls, herald_efficiency: float, multi_pair_prob: float) -> "SourceModel":
        return cls("heralded_pdc", herald_efficiency=herald_efficiency,
                   multi_pair_prob=multi_pair_prob)

    def pmf(self, n: int) -> float:
        """Exact photon-number probability p(n)."""
        if n < 0:
            return 0.0
        if self.kind == "ideal_single_photon":
            return 1.0 if n == 1 else 0.0
        if self.kind == "attenuated_laser":
            return float(math.exp(-self.mu) * self.mu ** n / math.factorial(n))
        # heralded_pdc
        if n == 0:
            return 1.0 - self.herald_efficiency
        if n == 1:
            return self.herald_efficiency - self.multi_pair_prob
        if n == 2:
            return self.multi_pair_prob
        return 0.0


def sample_photon_number(src: SourceModel, rng: np.random.Generator,
                         size: int | None = None):
    """Draw photon counts from the source model (scalar or array)."""
    if src.kind == "ideal_single_photon":
        return 1 if size is None else np.ones(size, dtype=np.int64)
    if src.kind == "attenuated_laser":
        out = rng.poisson(src.mu, size=size)
        return int(out) if size is None else out
    # heralded_pdc
    u = rng.random(size=size)
    p0 = 1.0 - src.herald_efficiency
    p01 = 1.0 - src.multi_pair_prob
    out = np.where(u < p0, 0, np.where(u < p01, 1, 2))
    return int(out) if size is None else out.astype(np.int64)


def g2(src: SourceModel) -> float:
    """Second-order autocorrelation <n(n-1)> / <n>^2 of the source.

    Equals 1 for any Poissonian source and reduces to the familiar
    approximation 2 p(2) / p(1)^2 when p(1) dominates the distribution.
    """
    if src.kind == "attenuated_laser":
        return 1.0
    mean = first_fact = 0.0
    for n in range(0, 3):
        mean += n * src.pmf(n)
        first_fact += n * (n - 1) * src.pmf(n)
    if mean == 0.0:
        raise ValueError("g2 undefined: source emits no photons")
    return first_fact / mean ** 2


@dataclass(frozen=True)
class ChannelModel:
    """Lossy, slightly misaligned transmission line."""

    length_km: float = 0.0
    attenuation_db_per_km: float = 0.0
    misalignment_error_prob: float = 0.0

    def __post_init__(self):
        if self.length_km < 0 or self.attenuation_db_per_km < 0:
            raise ValueError("channel length and attenuation must be >= 0")
        if not 0.0 <= self.misalignment_error_prob <= 0.5:
            raise ValueError("misalignment_error_prob must lie in [0, 0.5]")

    @property
    def transmittance(self) -> float:
        return 10.0 ** (-self.attenuation_db_per_km * self.length_km / 10.0)


IDENTITY_CHANNEL = ChannelModel()


@dataclass(frozen=True)
class DetectorModel:
    """Pair of threshold detectors behind a basis analyzer.

    dark_prob is per gate per logical detector.  When both detectors fire
    the double_click_policy 'assign_random_bit' emits a uniform bit.
    """

    efficiency: float = 1.0
    dark_prob: float = 0.0
    double_click_policy: str = "assign_random_bit"

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError("efficiency must lie in [0,1]")
        if not 0.0 <= self.dark_prob < 1.0:
            raise ValueError("dark_prob must lie in [0,1)")
        if self.double_click_policy != "assign_random_bit":
            raise ValueError("unsupported double_click_policy")


IDEAL_DETECTOR = DetectorModel()


def load_presets() -> dict:
    """Hardware presets bundled with the package (see data/presets.json)."""
    text = resources.files("qkdsim.data").joinpath("presets.json").read_text()
    return json.loads(text)


def detector_preset(name: str, **overrides) -> DetectorModel:
    presets = load_presets()["detectors"]
    if name not in presets:
        raise KeyError(f"unknown detector preset {name!r}; have {sorted(presets)}")
    params = dict(presets[name])
    params.update(overrides)
    return DetectorModel(**params)


def channel_preset(name: str, length_km: float = 0.0,
                   misalignment_error_prob: float = 0.0, **overrides) -> ChannelModel:
    presets = load_presets()["channels"]
    if name not in presets:
        raise KeyError(f"unknown channel preset {name!r}; have {sorted(presets)}")
    params = dict(presets[name])
    params.update(overrides)
    return ChannelModel(length_km=length_km,
                        misalignment_error_prob=misalignment_error_prob,
                        **params)


# ---------------------------------------------------------------------------
# scalar channel / detection operations
# ---------------------------------------------------------------------------

def transmit(pulse: PhotonPulse, ch: ChannelModel,
             rng: np.random.Generator) -> PhotonPulse:
    """Thin each photon independently with the channel transmittance, then
    flip the surviving pulse to the orthogonal state with the misalignment
    probability (one flip per pulse, not per photon)."""
    if pulse.n == 0:
        return pulse
    survivors = int(rng.binomial(pulse.n, ch.transmittance))
    if survivors == 0:
        return VACUUM
    state = pulse.state
    if ch.misalignment_error_prob > 0 and rng.random() < ch.misalignment_error_prob:
        state = state.orthogonal()
    return PhotonPulse(survivors, state)


def measure(pulse: PhotonPulse, basis: Basis, det: DetectorModel,
            rng: np.random.Generator) -> int:
    """Project a pulse in the given basis.

    Returns 0 or 1 on a single click, NO_CLICK when neither detector fires.
    Each photon is thinned by the detector efficiency and then projects
    independently; dark counts fire each logical detector independently.
    """
    detected = int(rng.binomial(pulse.n, det.efficiency)) if pulse.n else 0
    k1 = int(rng.binomial(detected, basis.prob_outcome_one(pulse.state))) if detected else 0
    k0 = detected - k1
    fire0 = k0 > 0 or rng.random() < det.dark_prob
    fire1 = k1 > 0 or rng.random() < det.dark_prob
    if fire0 and fire1:
        return int(rng.integers(0, 2))
    if fire1:
        return 1
    if fire0:
        return 0
    return NO_CLICK


def measure_batch(n_photons: np.ndarray, p_one: np.ndarray,
                  det: DetectorModel, rng: np.random.Generator) -> np.ndarray:
    """Vectorized `measure`: per-pulse photon counts and projection
    probabilities in, outcomes {NO_CLICK, 0, 1} out."""
    detected = rng.binomial(n_photons, det.efficiency)
    k1 = rng.binomial(detected, p_one)
    k0 = detected - k1
    npulses = n_photons.shape[0]
    fire0 = (k0 > 0) | (rng.random(npulses) < det.dark_prob)
    fire1 = (k1 > 0) | (rng.random(npulses) < det.dark_prob)
    out = np.full(npulses, NO_CLICK, dtype=np.int8)
    out[fire0 & ~fire1] = 0
    out[fire1 & ~fire0] = 1
    both = fire0 & fire1
    if both.any():
        out[both] = rng.integers(0, 2, size=int(both.sum()), dtype=np.int8)
    return out


# ---------------------------------------------------------------------------
# singlet pairs
# ---------------------------------------------------------------------------

def bloch_vector(angle_deg: float) -> np.ndarray:
    """Unit vector at the given angle on the measurement great circle."""
    a = math.radians(angle_deg)
    return np.array([math.sin(a), 0.0, math.cos(a)])


def _check_unit(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError("measurement direction must be a 3-vector")
    if abs(v @ v - 1.0) > 1e-9:
        raise ValueError("measurement direction must be a unit vector")
    return v


def sample_singlet(n1: np.ndarray, n2: np.ndarray, rng: np.random.Generator,
                   size: int | None = None):
    """Sample +/-1 outcome pairs for spin measurements along n1, n2 on a
    shared singlet.  Marginals are uniform and E[a*b] = -n1.n2, i.e. the
    joint law P(a,b) = (1 - a b n1.n2) / 4."""
    n1 = _check_unit(n1)
    n2 = _check_unit(n2)
    c = float(n1 @ n2)
    return sample_singlet_cos(c, rng, size=size)


def sample_singlet_cos(cos_angle: float, rng: np.random.Generator,
                       size: int | None = None):
    """Singlet outcome pairs given the cosine of the angle between the two
    measurement directions."""
    scalar = size is None
    m = 1 if scalar else size
    a = np.where(rng.random(m) < 0.5, 1, -1).astype(np.int8)
    p_opposite = (1.0 + cos_angle) / 2.0
    b = np.where(rng.random(m) < p_opposite, -a, a).astype(np.int8)
    if scalar:
        return int(a[0]), int(b[0])
    return a, b
