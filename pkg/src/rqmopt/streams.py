"""Named random streams.

All randomness comes from numpy's PCG64 bit generator seeded through a
``SeedSequence``. Data generation and solver trials draw from disjoint
spawn keys, so a trial stream never overlaps the data stream even when the
integer seeds coincide:

* data generation: ``SeedSequence(seed, spawn_key=(0,))``
* trial ``t`` of an experiment seeded with ``seed``:
  ``SeedSequence(seed + t, spawn_key=(1,))``
"""

import numpy as np

RNG_ALGORITHM = "numpy.PCG64/SeedSequence"

_DATA_KEY = 0
_TRIAL_KEY = 1
_CHECK_KEY = 2


def _stream(entropy, key):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy, spawn_key=(key,))))


def data_stream(seed: int) -> np.random.Generator:
    return _stream(int(seed), _DATA_KEY)


def trial_stream(seed: int, trial: int = 0) -> np.random.Generator:
    return _stream(int(seed) + int(trial), _TRIAL_KEY)


def check_stream(seed: int) -> np.random.Generator:
    """Stream for randomized verification instances (prox checks, reference points)."""
    return _stream(int(seed), _CHECK_KEY)
