"""Deterministic, splittable random streams.

Every random draw in the package flows from an integer seed through a
named stream.  A stream is a counter-based Philox generator keyed by the
pair ``(seed, hash(labels))``, so any module can open its own stream
without coordinating draw order with anyone else: identical
``(seed, labels)`` always reproduces the same sequence, and distinct
labels give statistically independent sequences.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def stream_key(*labels: object) -> int:
    """Map a label path to a stable 64-bit key.

    Labels are joined with "/" and hashed with SHA-256; the first eight
    bytes form the key.  Stable across processes and platforms.
    """
    path = "/".join(str(label) for label in labels)
    digest = hashlib.sha256(path.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def stream(seed: int, *labels: object) -> np.random.Generator:
    """Return the named random stream for ``seed``.

    Parameters
    ----------
    seed : int
        Campaign- or run-level seed.  Negative seeds are folded into the
        unsigned 64-bit range.
    *labels
        Path of names identifying the consumer, e.g.
        ``stream(3, "phases", "SS-2")``.
    """
    key = np.array([seed & _MASK64, stream_key(*labels)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
