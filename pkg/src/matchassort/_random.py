"""Seed derivation and counter-based per-trial random streams."""

from __future__ import annotations

import numpy as np


def derive_seed(*keys: int) -> int:
    """Deterministic 64-bit seed from a tuple of nonnegative integers."""
    ss = np.random.SeedSequence([int(k) & 0xFFFFFFFFFFFFFFFF for k in keys])
    return int(ss.generate_state(1, np.uint64)[0])


def rng(*keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(k) & 0xFFFFFFFFFFFFFFFF for k in keys]))


def padded_width(width: int) -> int:
    """Philox emits blocks of four 64-bit words; rows are padded to whole blocks."""
    return max(4, -(-width // 4) * 4)


def trial_uniforms(seed: int, start: int, stop: int, width: int) -> np.ndarray:
    """Uniforms for trials ``start..stop-1``, one row of ``width`` values per trial.

    Row ``t`` depends only on ``(seed, t)``: trial ``t`` owns a fixed counter
    range of a Philox stream keyed by ``seed``, so any chunking or ordering of
    trials yields identical values.
    """
    w = padded_width(width)
    key = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF).generate_state(2, np.uint64)
    bitgen = np.random.Philox(key=key)
    bitgen.advance(start * (w // 4))
    out = np.random.Generator(bitgen).random((stop - start, w))
    return out[:, :width]
