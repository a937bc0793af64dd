"""Deterministic named RNG streams derived from a single master seed.

Every randomized stage of the pipeline (partition, split, root sampling, proxy
generation, per-client work) pulls its own stream so that adding or removing a
stage never perturbs the others.  Stream identity is (seed, *names) and is
stable across processes and platforms: names are hashed with blake2b, never
with Python's salted hash().
"""

from __future__ import annotations

import hashlib

import numpy as np


def stream(seed: int, *names: object) -> np.random.Generator:
    """Independent generator for the given master seed and stream name parts."""
    tag = "/".join(str(part) for part in names)
    digest = hashlib.blake2b(tag.encode("utf-8"), digest_size=4).digest()
    key = int.from_bytes(digest, "big")
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(key,)))
