"""Run every protocol over a clean line and print the headline statistics.

Expected shapes: BB84 and BBM92 sift about half the pulses, six-state and
E91 about a third and 2/9, B92 and SARG about a quarter; every honest
session has zero error rate.
"""

from qkdsim.adversary import NO_EVE
from qkdsim.protocols import PROTOCOLS, ProtocolConfig, run_session
from qkdsim.quantum import ChannelModel, DetectorModel, SourceModel
from qkdsim.rng import derive_rng

SEED = 2024
PULSES = 100000


def main():
    src = SourceModel.ideal()
    laser = SourceModel.laser(0.5)
    ch = ChannelModel()
    det = DetectorModel()
    print(f"{'protocol':<12} {'sifted':>8} {'fraction':>9} {'QBER':>7}")
    for i, protocol in enumerate(PROTOCOLS):
        cfg = ProtocolConfig(protocol, PULSES)
        source = laser if protocol == "decoy_bb84" else src
        t = run_session(cfg, source, ch, det, NO_EVE, derive_rng(SEED, i))
        print(f"{protocol:<12} {len(t.sifted_alice):>8} "
              f"{t.sifted_fraction:>9.4f} {t.qber:>7.4f}")


if __name__ == "__main__":
    main()
