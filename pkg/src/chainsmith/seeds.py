"""Seed derivation tree.

Every random stream is ``derive_seed(master, *path)``, e.g.
``derive_seed(master, "cell", instance_id, strategy, c, srt_index)``.
Seeds depend only on the path, never on execution order or worker count.
"""

import hashlib

import numpy as np


def derive_seed(master: int, *path) -> int:
    key = "/".join([str(int(master))] + [_token(p) for p in path])
    digest = hashlib.blake2b(key.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little") >> 1


def _token(p) -> str:
    if isinstance(p, float):
        return repr(round(p, 12))
    return str(p)


def rng(master: int, *path) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, *path))
