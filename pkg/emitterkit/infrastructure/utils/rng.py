"""A module deriving independent random sub-streams from one master seed."""

import numpy as np

SUBSTREAMS = {
    "kinetics": 0,
    "emission": 1,
    "routing": 2,
    "thinning": 3,
    "jitter": 4,
    "darks": 5,
    "excitation": 6,
    "bootstrap": 7,
    "series": 8,
}


def substream(seed: int, name: str, *index: int) -> np.random.Generator:
    """A function returning the generator of a named sub-stream.

    The same (seed, name, index) always yields the same draws, and
    different names never share state.

    Args:
        seed (int): The master seed.
        name (str): Sub-stream label, one of `SUBSTREAMS`.
        *index (int): Optional further keys (channel, sample number).

    Returns:
        np.random.Generator: A PCG64 generator.
    """

    sequence = np.random.SeedSequence(
        entropy=int(seed),
        spawn_key=(SUBSTREAMS[name], *index),
    )
    return np.random.Generator(np.random.PCG64(sequence))


def derive_seed(seed: int, name: str, *index: int) -> int:
    """A function deriving a child master seed.

    Args:
        seed (int): The master seed.
        name (str): Sub-stream label.
        *index (int): Further keys.

    Returns:
        int: A 63-bit seed.
    """

    sequence = np.random.SeedSequence(
        entropy=int(seed),
        spawn_key=(SUBSTREAMS[name], *index),
    )
    return int(sequence.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
