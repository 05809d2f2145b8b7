"""
Selective deactivation of poor detectors and per-SU sensing energy accounting
"""
from dataclasses import dataclass, replace
from typing import Optional
import logging

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EnergyLedger:
    """Remaining energy units per SU"""
    budget: np.ndarray
    cost_per_sense: int = 1

    def __post_init__(self):
        budget = np.asarray(self.budget, dtype=np.int64)
        if np.any(budget < 0):
            raise ValueError("energy budget cannot be negative")
        if self.cost_per_sense < 1:
            raise ValueError("cost_per_sense must be a positive integer")
        object.__setattr__(self, "budget", budget)

    @classmethod
    def full(cls, num_sus: int, budget: int, cost_per_sense: int = 1) -> "EnergyLedger":
        return cls(np.full(num_sus, int(budget), dtype=np.int64), cost_per_sense)

    @property
    def alive(self) -> np.ndarray:
        return self.budget > 0


def deactivation_mask(p_matrix, mu: float, current, alive: Optional[np.ndarray] = None) -> np.ndarray:
    """Drop active pairs whose normalised weight fell below mu.

    Each channel keeps at least one detector: if the rule would empty a
    channel, its highest-weight candidate stays. When `alive` is given and a
    channel has no alive active detector left while some SU is alive, the
    highest-weight alive SU is enabled again for that channel.
    """
    p_matrix = np.asarray(p_matrix, dtype=float)
    current = np.asarray(current, dtype=bool)
    if p_matrix.shape != current.shape:
        raise ValueError(f"weights {p_matrix.shape} and mask {current.shape} differ in shape")
    if not 0.0 <= mu < 1.0:
        raise ValueError(f"mu must lie in [0, 1), got {mu}")

    alive_row = np.ones(current.shape[1], dtype=bool) if alive is None else np.asarray(alive, dtype=bool)
    usable = current & alive_row[None, :]
    keep = usable & ~(p_matrix < mu)
    for j in range(current.shape[0]):
        if keep[j].any():
            continue
        candidates = usable[j] if usable[j].any() else alive_row
        if not candidates.any():
            continue
        best = int(np.argmax(np.where(candidates, p_matrix[j], -np.inf)))
        keep[j, best] = True
        if not usable[j].any():
            logger.debug(f"channel {j}: re-enabled SU {best}, no alive detector was left")

    dropped = int(np.sum(usable & ~keep))
    if dropped:
        logger.debug(f"deactivated {dropped} detector-channel pair(s) below mu={mu}")
    # Dead SUs stay in the mask; sensing uses mask & alive
    return keep | (current & ~alive_row[None, :])


def energy_step(ledger: EnergyLedger, sense_counts) -> EnergyLedger:
    """Charge each SU for the channels it sensed this step (floored at 0)."""
    counts = np.asarray(sense_counts, dtype=np.int64)
    if counts.shape != ledger.budget.shape:
        raise ValueError(f"sense_counts {counts.shape} do not match {ledger.budget.shape} SUs")
    if not counts.any():
        return ledger
    budget = np.maximum(ledger.budget - ledger.cost_per_sense * counts, 0)
    died = int(np.sum(ledger.alive & (budget == 0)))
    if died:
        logger.debug(f"{died} SU(s) ran out of energy")
    return replace(ledger, budget=budget)


def alive_fraction(ledger: EnergyLedger) -> float:
    if ledger.budget.size == 0:
        return 0.0
    return float(np.mean(ledger.alive))
