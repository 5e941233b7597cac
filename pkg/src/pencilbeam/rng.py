"""Named, counter-based random streams.

Every random draw in a simulation comes from a stream keyed by
``(seed, run, purpose, index)``.  Streams are independent Philox generators,
so the draws for one sector or one run never depend on how many other
streams were consumed before it, or in which order.
"""

import numpy as np

PURPOSES = {
    "spots": 1,
    "ue": 2,
    "shadow": 3,
}


def stream(seed: int, run: int, purpose: str, index: int = 0) -> np.random.Generator:
    try:
        tag = PURPOSES[purpose]
    except KeyError:
        raise ValueError(f"unknown stream purpose {purpose!r}") from None
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(run), tag, int(index)))
    return np.random.Generator(np.random.Philox(seq))
