"""
Seed Substreams
All randomness flows from one root seed through named substreams
"""

import zlib

import numpy as np

SPLIT = "split"
MC_PAIRS = "mc_pairs"
MC_ASSIGN = "mc_assign"
SYNTHETIC = "synthetic"


def derive_seed(root_seed: int, name: str) -> int:
    """
    Derive a stable 64-bit seed for a named stage

    Args:
        root_seed: Root seed of the run
        name: Substream name

    Returns:
        Non-negative integer seed
    """
    sequence = np.random.SeedSequence([int(root_seed) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(name.encode("utf-8"))])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def pair_rng(seed: int, *indices: int) -> np.random.Generator:
    """Generator keyed on (seed, indices); independent of evaluation order"""
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, *[int(i) for i in indices]])

