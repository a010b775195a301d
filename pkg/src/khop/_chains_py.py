"""Pure numpy lens-chain counter, used when the compiled module is missing."""
from __future__ import annotations

import numpy as np

_SHIFT = 50


def count_chains(keys, offsets, n_samples: int) -> np.ndarray:
    """Count increasing cross-lens chains for every sample of a batch.

    Same contract as the compiled version: ``keys[j]`` holds the integer
    positions (``0 <= key < 2**50``) of lens ``j`` grouped by sample, and
    ``offsets[j]`` delimits the groups. Sample and position are packed into a
    single sortable integer so one ``searchsorted`` per lens pair does the
    work of a per-sample merge.
    """
    m = len(keys)
    out = np.zeros(n_samples, dtype=np.int64)
    if m == 0:
        return out
    if n_samples >= (1 << (63 - _SHIFT)):
        raise ValueError("batch too large for packed keys")
    packed, owners, offs = [], [], []
    for k, o in zip(keys, offsets):
        o = np.asarray(o, dtype=np.int64)
        sizes = np.diff(o)
        owner = np.repeat(np.arange(n_samples, dtype=np.int64), sizes)
        packed.append(np.sort((owner << _SHIFT) | np.asarray(k, dtype=np.int64)))
        owners.append(owner)
        offs.append(o)
    cnt = np.ones(len(packed[0]), dtype=np.int64)
    for j in range(1, m):
        csum = np.concatenate(([0], np.cumsum(cnt)))
        idx = np.searchsorted(packed[j - 1], packed[j], side="left")
        start = offs[j - 1][owners[j]]
        cnt = csum[idx] - csum[start]
    np.add.at(out, owners[m - 1], cnt)
    return out
