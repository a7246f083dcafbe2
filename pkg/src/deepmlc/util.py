"""Small shared helpers: stable seed derivation, sigmoid, worker pools."""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def derive_seed(master_seed: int, *parts) -> int:
    """Derive a child seed from a master seed and a component path.

    Uses SHA-256 over a canonical string, so the value is stable across
    processes and Python versions (unlike builtin hash). Every piece of
    randomness in the package flows through this, which is what makes
    --jobs N independent of the results.
    """
    key = repr((int(master_seed),) + parts).encode("utf-8")
    digest = hashlib.sha256(key).digest()
    return int.from_bytes(digest[:8], "little") % (2**63)


def sigmoid(x):
    """Numerically stable logistic function, elementwise."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def parallel_map(fn, items, jobs=1):
    """Apply fn over items, optionally on a thread pool.

    Results are collected by input index, so the output is identical for
    any worker count as long as the tasks themselves are independent.
    """
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))
