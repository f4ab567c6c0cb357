"""Seeded random-number plumbing.

Every stochastic function in this package takes an explicit
``numpy.random.Generator``.  Generators are built on the counter-based
Philox engine so that independent streams can be derived from one master
seed without overlap: a sweep point, a trial index, or a protocol session
each get their own child stream via :func:`derive_rng`.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    """Return the master generator for a given integer seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def derive_rng(seed: int, *indices: int) -> np.random.Generator:
    """Return an independent child stream for (seed, index path).

    Equal arguments always produce bit-identical streams; distinct index
    paths produce statistically independent ones.
    """
    seq = np.random.SeedSequence([int(seed), *[int(i) for i in indices]])
    return np.random.Generator(np.random.Philox(seq))
