"""
Hedge fusion: hard/soft combining, moment-matched thresholds and dHedge
"""
from dataclasses import dataclass
from typing import Callable, Optional, Tuple
import logging

import numpy as np

from csslearn.core import expert_loss, normalize_weights
from csslearn.detector import EnergyDetectorConfig, gamma_tail_inverse, hard_decision
from csslearn.errors import DimensionError
from csslearn.fdr import FdrGate, p_value
from csslearn.models import (
    ChannelTruth,
    CombiningMode,
    DecisionVector,
    LearnerParams,
    MomentMatchedGamma,
    WeightMatrix,
)

logger = logging.getLogger(__name__)

WEIGHT_FLOOR = 1e-300
HARD_THRESHOLD = 0.5
# Combined values within rounding of the threshold count as a tie (busy)
TIE_TOLERANCE = 1e-12


def hedge_combine(p_row, obs_row, active=None) -> float:
    """f~_j = sum over active detectors of p_ji * o_ji"""
    p_row = np.asarray(p_row, dtype=float)
    obs_row = np.asarray(obs_row, dtype=float)
    mask = np.ones(p_row.shape, dtype=bool) if active is None else np.asarray(active, dtype=bool)
    return float(np.dot(p_row[mask], obs_row[mask]))


def hard_decide(f_tilde: float) -> int:
    return int(f_tilde >= HARD_THRESHOLD - TIE_TOLERANCE)


def moment_match(p_row, sigma2: float, num_samples: int) -> MomentMatchedGamma:
    """Gamma whose first two moments match sum_i p_i * sigma2 * chi2_N."""
    p_row = np.asarray(p_row, dtype=float)
    sum_sq = float(np.dot(p_row, p_row))
    if sum_sq == 0.0:
        raise ValueError("empty weight row")
    return MomentMatchedGamma(k=num_samples / (2.0 * sum_sq), theta=2.0 * sigma2 * sum_sq)


def soft_threshold(g: MomentMatchedGamma, pfa: float) -> float:
    return gamma_tail_inverse(g.k, g.theta, pfa)


def hedge_update(w, loss, beta: float):
    """w * beta**loss. With w = w0 and loss = cumulative count this is the closed form."""
    out = np.asarray(w, dtype=float) * np.power(beta, np.asarray(loss, dtype=float))
    return float(out) if out.ndim == 0 else out


def dhedge_update(w, loss, beta: float, discount: float):
    """w**discount * beta**loss"""
    if discount == 1.0:
        return hedge_update(w, loss, beta)
    out = np.power(np.asarray(w, dtype=float), discount) * np.power(beta, np.asarray(loss, dtype=float))
    return float(out) if out.ndim == 0 else out


def derive_expert_decisions(obs_row, zeta):
    """Per-detector NP decisions d_ji = 1[e_ji >= zeta_ji] from soft reports"""
    with np.errstate(invalid="ignore"):
        return hard_decision(obs_row, zeta)


@dataclass
class HedgeState:
    """Hedge learner state for all channels.

    Undiscounted learners keep the integer applied-loss count L_ji and
    materialise w_ji = w0 * beta**L_ji; discounted learners fold
    dhedge_update into the raw weights.
    """
    weights: WeightMatrix
    beta: float
    discount: float
    mode: CombiningMode
    w0: float = 1.0
    renorm_interval: int = 1000
    cumulative_loss: np.ndarray = None
    steps: int = 0

    def __post_init__(self):
        if self.cumulative_loss is None:
            self.cumulative_loss = np.zeros(self.weights.shape, dtype=np.int64)

    @classmethod
    def initial(cls, num_channels: int, num_detectors: int, params: LearnerParams,
                mode: CombiningMode, active=None) -> "HedgeState":
        state = cls(
            weights=WeightMatrix.uniform(num_channels, num_detectors, params.w0),
            beta=params.beta,
            discount=params.discount,
            mode=mode,
            w0=params.w0,
            renorm_interval=params.renorm_interval,
        )
        if active is None:
            active = np.ones((num_channels, num_detectors), dtype=bool)
        state.refresh(active)
        return state

    @property
    def discounted(self) -> bool:
        return self.discount < 1.0

    def refresh(self, active) -> None:
        """Recompute normalised weights over the active detectors of each channel."""
        active = np.asarray(active, dtype=bool)
        normalized = np.zeros(self.weights.shape)
        for j in np.nonzero(active.any(axis=1))[0]:
            mask = active[j]
            if self.discounted:
                row = self.weights.weights[j]
            else:
                losses = self.cumulative_loss[j]
                row = hedge_update(1.0, losses - losses[mask].min(), self.beta)
            normalized[j] = normalize_weights(row, mask, channel=int(j))
        self.weights.normalized = normalized

    def apply_losses(self, loss: np.ndarray, update_mask: np.ndarray) -> None:
        loss = np.where(update_mask, loss, 0)
        if self.discounted:
            raw = self.weights.weights
            updated = np.maximum(dhedge_update(raw, loss, self.beta, self.discount), WEIGHT_FLOOR)
            self.weights.weights = np.where(update_mask, updated, raw)
        else:
            self.cumulative_loss += loss.astype(np.int64)
            self.weights.weights = np.maximum(hedge_update(self.w0, self.cumulative_loss, self.beta), WEIGHT_FLOOR)
        self.steps += 1
        if self.discounted and self.steps % self.renorm_interval == 0:
            peak = self.weights.weights.max(axis=1, keepdims=True)
            self.weights.weights = np.maximum(self.weights.weights / peak, WEIGHT_FLOOR)


def _broadcast_zeta(zeta, shape) -> np.ndarray:
    try:
        return np.broadcast_to(np.asarray(zeta, dtype=float), shape)
    except ValueError as e:
        raise DimensionError(f"zeta cannot be broadcast to {shape}: {e}") from e


def hedge_decide(state: HedgeState, obs, detector: EnergyDetectorConfig,
                 gate: Optional[FdrGate] = None) -> DecisionVector:
    """ComputeDecision: combine each channel's reports and threshold them."""
    P = obs.num_channels
    values = obs.filled(0.0)
    has_active = obs.active.any(axis=1)
    soft = np.full(P, np.nan)
    final = np.ones(P, dtype=np.int8)
    thresholds = np.full(P, np.nan)
    p_values = np.ones(P)

    for j in np.nonzero(has_active)[0]:
        p_row = state.weights.normalized[j]
        f_tilde = hedge_combine(p_row, values[j], obs.active[j])
        soft[j] = f_tilde
        if state.mode == CombiningMode.HARD:
            thresholds[j] = HARD_THRESHOLD
            final[j] = hard_decide(f_tilde)
        else:
            g = moment_match(p_row[obs.active[j]], detector.noise_variance, detector.num_samples)
            thresholds[j] = soft_threshold(g, detector.pfa_target)
            final[j] = int(f_tilde >= thresholds[j])
            p_values[j] = p_value(f_tilde, g)

    decision = DecisionVector(soft, final, thresholds)
    if gate is not None and state.mode == CombiningMode.SOFT:
        decision = gate.apply(decision, p_values, eligible=has_active)
    return decision


def hedge_learn(state: HedgeState, obs, decision: DecisionVector,
                truth: ChannelTruth, zeta) -> None:
    """ComputeNewWeights: apply losses on channels the FC decided idle."""
    values = obs.filled(0.0)
    if state.mode == CombiningMode.HARD:
        expert = values.astype(np.int8)
    else:
        expert = derive_expert_decisions(values, _broadcast_zeta(zeta, values.shape))
    label = truth.agt_busy[:, None]
    loss = expert_loss(expert, np.broadcast_to(label, expert.shape))
    update_mask = obs.active & decision.idle[:, None]
    state.apply_losses(loss, update_mask)


def hedge_step(state: HedgeState, obs, agt: Callable[[DecisionVector], ChannelTruth],
               zeta, detector: EnergyDetectorConfig,
               gate: Optional[FdrGate] = None) -> Tuple[DecisionVector, HedgeState]:
    """One decide / observe / update round.

    `agt` receives the FC decision and returns the ChannelTruth with the
    approximate ground truth filled in.
    """
    if obs.values.shape != state.weights.shape:
        raise DimensionError(
            f"observations {obs.values.shape} do not match weights {state.weights.shape}"
        )
    _broadcast_zeta(zeta, obs.values.shape)
    if obs.mode != state.mode:
        raise ValueError(f"{obs.mode.value} observations given to a {state.mode.value} learner")

    state.refresh(obs.active)
    decision = hedge_decide(state, obs, detector, gate)
    truth = agt(decision)
    hedge_learn(state, obs, decision, truth, zeta)
    state.refresh(obs.active)
    return decision, state
