"""
Weight normalisation and the per-expert loss
"""
import numpy as np

from csslearn.errors import NoActiveDetectorsError


def normalize_weights(row, active=None, channel=None) -> np.ndarray:
    """Normalised weights p_i = w_i / sum of active w; inactive entries are 0."""
    row = np.asarray(row, dtype=float)
    mask = np.ones(row.shape, dtype=bool) if active is None else np.asarray(active, dtype=bool)
    if not mask.any():
        raise NoActiveDetectorsError(channel)
    live = row[mask]
    if np.any(~(live > 0.0)):
        raise ValueError("active weights must be positive")
    out = np.zeros_like(row)
    out[mask] = live / live.sum()
    return out


def expert_loss(decision, truth):
    """|decision - truth| for binary decisions; works elementwise on arrays."""
    decision = np.asarray(decision)
    truth = np.asarray(truth)
    for name, value in (("decision", decision), ("truth", truth)):
        if not np.all((value == 0) | (value == 1)):
            raise ValueError(f"{name} must be 0 or 1")
    loss = np.abs(decision.astype(np.int8) - truth.astype(np.int8))
    if loss.ndim == 0:
        return int(loss)
    return loss
