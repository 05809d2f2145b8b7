"""
Classical hard-combining rules: OR, AND and majority vote
"""
import numpy as np

from csslearn.errors import NoActiveDetectorsError


def _active_bits(bits, active):
    bits = np.asarray(bits)
    mask = np.ones(bits.shape, dtype=bool) if active is None else np.asarray(active, dtype=bool)
    if not mask.any():
        raise NoActiveDetectorsError()
    live = bits[mask]
    if not np.all((live == 0) | (live == 1)):
        raise ValueError("baseline rules take hard (0/1) observations")
    return live


def or_fuse(bits, active=None) -> int:
    return int(np.any(_active_bits(bits, active) == 1))


def and_fuse(bits, active=None) -> int:
    return int(np.all(_active_bits(bits, active) == 1))


def majority_fuse(bits, active=None) -> int:
    """Busy when at least half of the active bits are 1"""
    live = _active_bits(bits, active)
    return int(2 * int(np.sum(live == 1)) >= live.size)


RULES = {
    "or": or_fuse,
    "and": and_fuse,
    "majority": majority_fuse,
}


def fuse_matrix(rule: str, bits: np.ndarray, active: np.ndarray) -> np.ndarray:
    """Apply a rule per channel; channels without active detectors are declared busy."""
    fuse = RULES[rule]
    bits = np.asarray(bits)
    active = np.asarray(active, dtype=bool)
    final = np.ones(bits.shape[0], dtype=np.int8)
    for j in np.nonzero(active.any(axis=1))[0]:
        final[j] = fuse(bits[j], active[j])
    return final
