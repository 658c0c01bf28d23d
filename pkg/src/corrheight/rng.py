"""Counter-based random draws.

Every draw is a pure function of an integer key tuple, so results do not
depend on the order in which samples or subtrees are processed.
"""

import hashlib


def uniform_bits(key):
    """64 pseudo-random bits determined by the tuple of integers ``key``."""
    payload = ",".join(str(int(k)) for k in key).encode()
    digest = hashlib.blake2b(payload, digest_size=8, person=b"corrheight-rng").digest()
    return int.from_bytes(digest, "big")


def weighted_index(key, weights):
    """Index ``i`` drawn with probability ``weights[i] / sum(weights)``.

    Uses exact integer arithmetic: the 64-bit draw is scaled to
    ``[0, total)`` and matched against the cumulative weights.
    """
    total = sum(weights)
    target = (uniform_bits(key) * total) >> 64
    acc = 0
    for i, w in enumerate(weights):
        acc += w
        if target < acc:
            return i
    return len(weights) - 1
