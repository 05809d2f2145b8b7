"""
Hyper-exponential ON/OFF primary-user traffic
"""
from dataclasses import dataclass
from typing import List
import enum
import logging
import math

import numpy as np

logger = logging.getLogger(__name__)

# Seconds per simulation step; rates are drawn per second
DEFAULT_SLOT_DURATION = 1e-3


class Phase(enum.IntEnum):
    OFF = 0
    ON = 1


@dataclass(frozen=True)
class TrafficModel:
    """Mixture of exponentials: component k picked with probability p_k, rate lambda_k per step"""
    weights: tuple
    rates: tuple

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        rates = np.asarray(self.rates, dtype=float)
        if weights.ndim != 1 or weights.size == 0 or weights.shape != rates.shape:
            raise ValueError("traffic model needs matching non-empty weight and rate vectors")
        if np.any(weights < 0.0) or not math.isclose(float(weights.sum()), 1.0, abs_tol=1e-9):
            raise ValueError("mixture weights must be nonnegative and sum to 1")
        if np.any(~(rates > 0.0)):
            raise ValueError("exponential rates must be positive")
        object.__setattr__(self, "weights", tuple(float(w) for w in weights))
        object.__setattr__(self, "rates", tuple(float(r) for r in rates))

    @property
    def mean(self) -> float:
        """Mean of the continuous mixture, sum p_k / lambda_k"""
        return float(sum(p / r for p, r in zip(self.weights, self.rates)))

    @property
    def step_mean(self) -> float:
        """Mean of the rounded-up duration sample_hed returns.

        ceil of an exponential with rate r is geometric on {1, 2, ...} with
        mean 1 / (1 - exp(-r)).
        """
        return float(sum(p / -math.expm1(-r) for p, r in zip(self.weights, self.rates)))

    @classmethod
    def random(cls, components: int, lambda_max: float, rng: np.random.Generator,
               slot_duration: float = 1.0) -> "TrafficModel":
        """Draw mixture weights from a flat Dirichlet and rates uniformly from (0, lambda_max].

        `lambda_max` is per time unit and a step lasts `slot_duration` units,
        so the per-step rates are the drawn rates times `slot_duration`.
        """
        if not slot_duration > 0.0:
            raise ValueError(f"slot_duration must be positive, got {slot_duration}")
        weights = rng.dirichlet(np.ones(components))
        rates = (lambda_max - rng.uniform(0.0, lambda_max, size=components)) * slot_duration
        rates = np.maximum(rates, np.finfo(float).tiny)
        return cls(tuple(weights), tuple(rates))


def sample_hed(model: TrafficModel, rng: np.random.Generator) -> int:
    """One ON or OFF duration in whole steps (rounded up, at least 1)."""
    k = rng.choice(len(model.weights), p=model.weights)
    duration = rng.exponential(1.0 / model.rates[k])
    return max(1, int(math.ceil(duration)))


@dataclass
class ChannelTraffic:
    """Current phase and remaining steps of one PU, with its ON and OFF models"""
    on_model: TrafficModel
    off_model: TrafficModel
    phase: Phase
    remaining: int

    @classmethod
    def start(cls, on_model: TrafficModel, off_model: TrafficModel,
              rng: np.random.Generator) -> "ChannelTraffic":
        # Start in ON with the long-run ON probability of the stepped process
        share = on_model.step_mean / (on_model.step_mean + off_model.step_mean)
        phase = Phase.ON if rng.random() < share else Phase.OFF
        model = on_model if phase == Phase.ON else off_model
        return cls(on_model, off_model, phase, sample_hed(model, rng))

    @property
    def busy(self) -> bool:
        return self.phase == Phase.ON


def traffic_step(states: List[ChannelTraffic], rng: np.random.Generator) -> np.ndarray:
    """Advance every channel one step and report busy (1) / idle (0)."""
    busy = np.zeros(len(states), dtype=np.int8)
    for j, state in enumerate(states):
        state.remaining -= 1
        if state.remaining <= 0:
            state.phase = Phase.OFF if state.phase == Phase.ON else Phase.ON
            model = state.on_model if state.phase == Phase.ON else state.off_model
            state.remaining = sample_hed(model, rng)
        busy[j] = int(state.busy)
    return busy


def build_channels(num_channels: int, components: int, lambda_max: float,
                   rng: np.random.Generator,
                   slot_duration: float = DEFAULT_SLOT_DURATION) -> List[ChannelTraffic]:
    """Per-channel ON/OFF models drawn once at scenario setup."""
    channels = []
    for j in range(num_channels):
        on_model = TrafficModel.random(components, lambda_max, rng, slot_duration)
        off_model = TrafficModel.random(components, lambda_max, rng, slot_duration)
        channels.append(ChannelTraffic.start(on_model, off_model, rng))
        logger.debug(f"channel {j}: mean ON {on_model.step_mean:.4g}, mean OFF {off_model.step_mean:.4g} steps")
    return channels
