"""Deterministic seed derivation: every random stream is keyed by integers, never by scheduling order."""

import hashlib
from typing import Union

import numpy as np


def derive_seed(*keys: int) -> int:
    """64-bit seed for the stream identified by `keys`."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1, dtype=np.uint64)[0])


def philox(seed: Union[int, np.random.SeedSequence]) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def array_sha256(arr: np.ndarray) -> str:
    """Content hash of a float matrix (shape and bytes)."""
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    digest = hashlib.sha256()
    digest.update(str(arr.shape).encode("utf-8"))
    digest.update(arr.tobytes())
    return digest.hexdigest()
