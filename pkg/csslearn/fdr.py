"""
p-values, the Benjamini-Hochberg step-up rule, FWER and the Switch-BH policy
"""
from dataclasses import dataclass, field, replace
from typing import FrozenSet, Optional, Tuple
import enum
import logging

import numpy as np

from csslearn.detector import gamma_tail
from csslearn.models import DecisionVector, FdrPolicy, MomentMatchedGamma

logger = logging.getLogger(__name__)


class SwitchMode(str, enum.Enum):
    BH = "bh"
    PLAIN = "plain"


@dataclass(frozen=True)
class BhInput:
    p_values: np.ndarray
    alpha: float

    def __post_init__(self):
        p = np.asarray(self.p_values, dtype=float)
        if p.ndim != 1:
            raise ValueError("p_values must be a vector")
        if not np.all(np.isfinite(p)) or np.any((p < 0.0) | (p > 1.0)):
            raise ValueError("p_values must be finite and within [0, 1]")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        object.__setattr__(self, "p_values", p)


def p_value(f_tilde: float, g: MomentMatchedGamma) -> float:
    """Tail probability of the combined statistic under the matched H0 gamma."""
    return gamma_tail(g.k, g.theta, f_tilde)


def empirical_p_value(statistic: float, sorted_sample: np.ndarray) -> float:
    """Fraction of an ascending H0 sample at or above `statistic`."""
    n = sorted_sample.size
    below = np.searchsorted(sorted_sample, statistic, side="left")
    return float(n - below) / n


def bh_select(bh_input: BhInput) -> FrozenSet[int]:
    """Indices rejected (declared busy) by the BH step-up rule.

    Every index whose p-value is <= the k-th smallest p-value is rejected,
    so ties at the cut are rejected together.
    """
    p = bh_input.p_values
    m = p.size
    if m == 0:
        return frozenset()
    order = np.argsort(p, kind="stable")
    ranked = p[order]
    critical = np.arange(1, m + 1) / m * bh_input.alpha
    passing = np.nonzero(ranked <= critical)[0]
    if passing.size == 0:
        return frozenset()
    cut = ranked[passing[-1]]
    return frozenset(int(i) for i in np.nonzero(p <= cut)[0])


def fwer(pfa: float, num_tests: int) -> float:
    """Probability of at least one false alarm among independent tests."""
    if not 0.0 < pfa < 1.0:
        raise ValueError(f"pfa must lie in (0, 1), got {pfa}")
    if num_tests < 1:
        raise ValueError("num_tests must be >= 1")
    return float(-np.expm1(num_tests * np.log1p(-pfa)))


@dataclass(frozen=True)
class SwitchState:
    """Running collision bookkeeping that selects BH or plain thresholding"""
    mode: SwitchMode = SwitchMode.BH
    collision_events: int = 0
    transmission_attempts: int = 0
    tau: float = 0.02
    latch: bool = False
    window: Optional[int] = None
    history: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        if not 0.0 < self.tau < 1.0:
            raise ValueError(f"tau must lie in (0, 1), got {self.tau}")
        if self.collision_events > self.transmission_attempts:
            raise ValueError("collision_events cannot exceed transmission_attempts")

    @property
    def collision_fraction(self) -> float:
        if self.transmission_attempts == 0:
            return 0.0
        return self.collision_events / self.transmission_attempts


def switch_update(state: SwitchState, step_collided, step_attempted) -> SwitchState:
    """Advance the counters by one step and pick the next mode.

    Booleans count as one event; integers allow several probes per step.
    With a window only the last `window` steps are counted; with `latch`
    the policy never returns to BH once it went plain.
    """
    collided = int(step_collided)
    attempted = int(step_attempted)
    if collided > attempted:
        raise ValueError("a step cannot collide more often than it transmits")

    history = state.history
    collisions = state.collision_events + collided
    attempts = state.transmission_attempts + attempted
    if state.window is not None:
        history = (history + ((collided, attempted),))[-state.window:]
        collisions = sum(c for c, _ in history)
        attempts = sum(a for _, a in history)

    over = attempts > 0 and collisions / attempts > state.tau
    if state.latch and state.mode == SwitchMode.PLAIN:
        mode = SwitchMode.PLAIN
    else:
        mode = SwitchMode.PLAIN if over else SwitchMode.BH

    if mode != state.mode:
        logger.debug(f"Switch-BH: {state.mode.value} -> {mode.value} at {collisions}/{attempts}")
    return replace(state, mode=mode, collision_events=collisions,
                   transmission_attempts=attempts, history=history)


@dataclass
class FdrGate:
    """Applies BH (always, or while the switch says so) to soft FC decisions"""
    policy: FdrPolicy
    alpha: float
    switch: SwitchState = field(default_factory=SwitchState)

    @classmethod
    def build(cls, policy: FdrPolicy, alpha: float, tau: float,
              latch: bool = False, window: Optional[int] = None) -> Optional["FdrGate"]:
        if policy == FdrPolicy.NONE:
            return None
        return cls(policy, alpha, SwitchState(tau=tau, latch=latch, window=window))

    @property
    def bh_active(self) -> bool:
        if self.policy == FdrPolicy.BH:
            return True
        return self.switch.mode == SwitchMode.BH

    @property
    def mode_label(self) -> str:
        if self.policy == FdrPolicy.BH:
            return SwitchMode.BH.value
        return self.switch.mode.value

    def apply(self, decision: DecisionVector, p_values: np.ndarray,
              eligible: Optional[np.ndarray] = None) -> DecisionVector:
        """Replace threshold decisions by BH rejections on eligible channels."""
        if not self.bh_active:
            return decision
        p_values = np.asarray(p_values, dtype=float)
        eligible = np.ones(p_values.shape, dtype=bool) if eligible is None else np.asarray(eligible, dtype=bool)
        final = decision.final.copy()
        index = np.nonzero(eligible)[0]
        if index.size:
            rejected = bh_select(BhInput(p_values[index], self.alpha))
            final[index] = 0
            for r in rejected:
                final[index[r]] = 1
        return DecisionVector(decision.soft, final, decision.thresholds)

    def record(self, collisions: int, attempts: int) -> None:
        if self.policy == FdrPolicy.SWITCH:
            self.switch = switch_update(self.switch, collisions, attempts)
