"""
Free Gibbs Transport - Random Streams

Counter-based generator streams. A stream is addressed by (seed, key, step);
the key selects a chain or path batch, the step is carried in the Philox
counter so any step can be replayed without touching the others.
"""

import numpy as np

# Philox keys are two 64-bit words
_MASK64 = (1 << 64) - 1


def stream(seed: int, key: int = 0, step: int = 0, lane: int = 0) -> np.random.Generator:
    """Return the generator for one (seed, key, step) address.

    Args:
        seed: Run seed
        key: Chain, sample or batch index
        step: Step index, stored in the counter
        lane: Extra counter word for independent draws within one step

    Returns:
        A fresh numpy Generator positioned at the addressed counter
    """
    bitgen = np.random.Philox(
        key=np.array([seed & _MASK64, key & _MASK64], dtype=np.uint64),
        counter=np.array([0, step & _MASK64, lane & _MASK64, 0], dtype=np.uint64),
    )
    return np.random.Generator(bitgen)


def derive_seed(seed: int, *labels: int) -> int:
    """Mix integer labels into a seed (used to separate α-steps and stages)."""
    ss = np.random.SeedSequence([seed & _MASK64, *[lab & _MASK64 for lab in labels]])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
