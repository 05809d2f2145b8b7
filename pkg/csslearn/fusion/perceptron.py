"""
Modified perceptron fusion for soft reports, with Monte Carlo thresholds and dPerceptron
"""
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple
import logging

import numpy as np

from csslearn.errors import DegenerateThresholdError, DimensionError, UpdateOnCorrectDecisionError
from csslearn.fdr import FdrGate, empirical_p_value
from csslearn.models import (
    ChannelState,
    ChannelTruth,
    CombiningMode,
    DecisionVector,
    LearnerParams,
    WeightMatrix,
)

logger = logging.getLogger(__name__)

MIN_MC_SAMPLES = 1000
DEFAULT_EPSILON_W = 1e-6


def draw_h0_sample(num_detectors: int, sigma2: float, num_samples: int, M: int,
                   rng: np.random.Generator) -> np.ndarray:
    """M x S independent idle energies sigma2 * chi2_N, drawn as Gamma(N/2, 2 sigma2)."""
    if M < MIN_MC_SAMPLES:
        raise ValueError(f"Monte Carlo sample count must be >= {MIN_MC_SAMPLES}, got {M}")
    return rng.gamma(num_samples / 2.0, 2.0 * sigma2, size=(M, num_detectors))


def weighted_h0(w_row, h0_sample: np.ndarray) -> np.ndarray:
    """Ascending H0 sample of sum_i w_i G_i"""
    w_row = np.asarray(w_row, dtype=float)
    if not np.any(w_row != 0.0):
        raise DegenerateThresholdError()
    return np.sort(h0_sample @ w_row)


def empirical_threshold(sorted_sums: np.ndarray, pfa: float) -> float:
    """Empirical (1 - pfa) quantile of an H0 sample"""
    if not 0.0 < pfa < 1.0:
        raise ValueError(f"pfa must lie in (0, 1), got {pfa}")
    return float(np.quantile(sorted_sums, 1.0 - pfa))


def perceptron_threshold(w_row, sigma2: float, num_samples: int, pfa: float, M: int,
                         rng: np.random.Generator) -> float:
    """gamma_j^p: (1 - pfa) quantile of sum_i w_i G_i with G_i ~ Gamma(N/2, 2 sigma2)."""
    w_row = np.asarray(w_row, dtype=float)
    if not np.any(w_row != 0.0):
        raise DegenerateThresholdError()
    sample = draw_h0_sample(w_row.size, sigma2, num_samples, M, rng)
    return empirical_threshold(weighted_h0(w_row, sample), pfa)


def fold_bias(obs, w, gamma_p: float, num_experts: int,
              epsilon_w: float = DEFAULT_EPSILON_W) -> Tuple[np.ndarray, np.ndarray]:
    """o' = o - gamma_p / (S w).

    Weights with |w| < epsilon_w are replaced by sign(w) * epsilon_w in the
    denominator (a zero weight counts as positive). Returns the folded
    observations and the mask of guarded entries.
    """
    obs = np.asarray(obs, dtype=float)
    w = np.asarray(w, dtype=float)
    guarded = np.abs(w) < epsilon_w
    safe_w = np.where(guarded, np.where(w < 0.0, -epsilon_w, epsilon_w), w)
    folded = obs - gamma_p / (num_experts * safe_w)
    if np.any(guarded):
        logger.debug(f"fold_bias: {int(np.sum(guarded))} weight(s) below {epsilon_w} guarded")
    return folded, guarded


def perceptron_decide(w_row, folded_obs_row, active=None) -> int:
    """Busy iff sum over active detectors of w_ji * o'_ji >= 0"""
    w_row = np.asarray(w_row, dtype=float)
    folded_obs_row = np.asarray(folded_obs_row, dtype=float)
    mask = np.ones(w_row.shape, dtype=bool) if active is None else np.asarray(active, dtype=bool)
    return int(np.dot(w_row[mask], folded_obs_row[mask]) >= 0.0)


def perceptron_update(w, o_prime, truth: int, decision: int, rho: float, discount: float = 1.0):
    """Additive correction after an FC mistake, with optional discounting of the old weight."""
    if int(truth) == int(decision):
        raise UpdateOnCorrectDecisionError()
    step = rho * np.asarray(o_prime, dtype=float)
    base = discount * np.asarray(w, dtype=float) if discount != 1.0 else np.asarray(w, dtype=float)
    out = base + step if truth == ChannelState.BUSY else base - step
    return float(out) if out.ndim == 0 else out


@dataclass
class ThresholdCacheEntry:
    gamma_p: float
    fingerprint: bytes
    sorted_sums: np.ndarray


@dataclass
class PerceptronState:
    """Perceptron learner state; one signed weight row per channel"""
    weights: WeightMatrix
    rho: float
    discount: float
    mc_samples: int = 10_000
    epsilon_w: float = DEFAULT_EPSILON_W
    rngs: List[np.random.Generator] = field(default_factory=list)
    threshold_cache: Dict[int, ThresholdCacheEntry] = field(default_factory=dict)
    h0_samples: Dict[int, np.ndarray] = field(default_factory=dict)

    @classmethod
    def initial(cls, num_channels: int, num_detectors: int, params: LearnerParams,
                rngs: Optional[List[np.random.Generator]] = None, seed: int = 0) -> "PerceptronState":
        if rngs is None:
            rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(num_channels)]
        if len(rngs) != num_channels:
            raise DimensionError(f"need one random stream per channel, got {len(rngs)} for {num_channels}")
        # w = 1/S: the first step behaves like an equal-weight soft vote
        return cls(
            weights=WeightMatrix.uniform(num_channels, num_detectors, 1.0 / num_detectors),
            rho=params.rho,
            discount=params.discount,
            mc_samples=params.mc_samples,
            epsilon_w=params.epsilon_w,
            rngs=list(rngs),
        )

    def h0_sample(self, channel: int, sigma2: float, num_samples: int) -> np.ndarray:
        sample = self.h0_samples.get(channel)
        if sample is None:
            sample = draw_h0_sample(self.weights.shape[1], sigma2, num_samples,
                                    self.mc_samples, self.rngs[channel])
            self.h0_samples[channel] = sample
        return sample

    def threshold(self, channel: int, active, sigma2: float, num_samples: int,
                  pfa: float) -> ThresholdCacheEntry:
        """Cached gamma_j^p for the channel's current (active) weight row."""
        w_row = np.where(active, self.weights.weights[channel], 0.0)
        fingerprint = w_row.tobytes()
        entry = self.threshold_cache.get(channel)
        if entry is None or entry.fingerprint != fingerprint:
            sums = weighted_h0(w_row, self.h0_sample(channel, sigma2, num_samples))
            entry = ThresholdCacheEntry(empirical_threshold(sums, pfa), fingerprint, sums)
            self.threshold_cache[channel] = entry
        return entry


def perceptron_step(state: PerceptronState, obs, agt: Callable[[DecisionVector], ChannelTruth],
                    sigma2: float, num_samples: int, pfa: float,
                    gate: Optional[FdrGate] = None) -> Tuple[DecisionVector, PerceptronState]:
    """One decide / observe / update round for soft reports."""
    if obs.mode != CombiningMode.SOFT:
        raise ValueError("the perceptron learner takes soft observations only")
    if obs.values.shape != state.weights.shape:
        raise DimensionError(
            f"observations {obs.values.shape} do not match weights {state.weights.shape}"
        )

    P = obs.num_channels
    values = obs.filled(0.0)
    has_active = obs.active.any(axis=1)
    soft = np.full(P, np.nan)
    final = np.ones(P, dtype=np.int8)
    thresholds = np.full(P, np.nan)
    p_values = np.ones(P)
    folded = np.zeros_like(values)

    for j in np.nonzero(has_active)[0]:
        mask = obs.active[j]
        w_row = state.weights.weights[j]
        entry = state.threshold(j, mask, sigma2, num_samples, pfa)
        folded[j], _ = fold_bias(values[j], w_row, entry.gamma_p, int(mask.sum()), state.epsilon_w)
        statistic = float(np.dot(w_row[mask], values[j][mask]))
        soft[j] = statistic
        thresholds[j] = entry.gamma_p
        final[j] = perceptron_decide(w_row, folded[j], mask)
        p_values[j] = empirical_p_value(statistic, entry.sorted_sums)

    decision = DecisionVector(soft, final, thresholds)
    if gate is not None:
        decision = gate.apply(decision, p_values, eligible=has_active)

    truth = agt(decision)
    observed = truth.agt_busy
    for j in np.nonzero(has_active)[0]:
        # Only probed channels reveal a label that can contradict the decision
        if not truth.probed[j] or observed[j] == decision.final[j]:
            continue
        mask = obs.active[j]
        row = state.weights.weights[j].copy()
        row[mask] = perceptron_update(row[mask], folded[j][mask], int(observed[j]),
                                      int(decision.final[j]), state.rho, state.discount)
        state.weights.weights[j] = row

    return decision, state
