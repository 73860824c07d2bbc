"""Seeded, splittable random streams.

Stream ``index`` of master seed ``seed`` is PCG64 fed by
``SeedSequence(seed, spawn_key=(index,))``, so trajectory ``i`` draws the same
numbers whether it runs alone, in a batch, or on another worker.
"""
import numpy as np


def stream(seed: int, index: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(index),))))


def uniforms(seed: int, n_streams: int, n_draws: int, start: int = 0) -> np.ndarray:
    """``(n_streams, n_draws)`` array of uniforms; row ``k`` is stream ``start + k``."""
    out = np.empty((n_streams, n_draws))
    for k in range(n_streams):
        out[k] = stream(seed, start + k).random(n_draws)
    return out
