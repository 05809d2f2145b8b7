"""
Domain types shared by the fusion, simulation and metrics modules
"""
from dataclasses import dataclass
from typing import Optional
import enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from csslearn.errors import DimensionError


class CombiningMode(str, enum.Enum):
    """What the SUs send to the FC"""
    HARD = "hard"
    SOFT = "soft"


class ChannelState(enum.IntEnum):
    """Channel occupancy"""
    IDLE = 0
    BUSY = 1


class AgtLabel(enum.IntEnum):
    """Label the FC observes for a channel after the transmission phase"""
    IDLE = 0
    BUSY = 1
    ASSUMED_BUSY = 2


class LearnerFamily(str, enum.Enum):
    HEDGE = "hedge"
    PERCEPTRON = "perceptron"
    BASELINE = "baseline"


class FdrPolicy(str, enum.Enum):
    """How the final decision relates to the BH procedure"""
    NONE = "none"
    BH = "bh"
    SWITCH = "switch"


class Algorithm(str, enum.Enum):
    """Fusion algorithms selectable for a scenario"""
    HEDGE_HC = "hedge-hc"
    HEDGE_SC = "hedge-sc"
    PERC_SC = "perc-sc"
    HSC_BH = "hsc-bh"
    PSC_BH = "psc-bh"
    HSC_SW = "hsc-sw"
    PSC_SW = "psc-sw"
    DHEDGE_HC = "dhedge-hc"
    DHEDGE_SC = "dhedge-sc"
    DPERC_SC = "dperc-sc"
    OR = "or"
    AND = "and"
    MAJORITY = "majority"

    @property
    def family(self) -> LearnerFamily:
        if self in (Algorithm.OR, Algorithm.AND, Algorithm.MAJORITY):
            return LearnerFamily.BASELINE
        if self in (Algorithm.PERC_SC, Algorithm.PSC_BH, Algorithm.PSC_SW, Algorithm.DPERC_SC):
            return LearnerFamily.PERCEPTRON
        return LearnerFamily.HEDGE

    @property
    def mode(self) -> CombiningMode:
        if self in (Algorithm.HEDGE_HC, Algorithm.DHEDGE_HC) or self.family == LearnerFamily.BASELINE:
            return CombiningMode.HARD
        return CombiningMode.SOFT

    @property
    def fdr_policy(self) -> FdrPolicy:
        if self in (Algorithm.HSC_BH, Algorithm.PSC_BH):
            return FdrPolicy.BH
        if self in (Algorithm.HSC_SW, Algorithm.PSC_SW):
            return FdrPolicy.SWITCH
        return FdrPolicy.NONE

    @property
    def discounted(self) -> bool:
        return self in (Algorithm.DHEDGE_HC, Algorithm.DHEDGE_SC, Algorithm.DPERC_SC)


class LearnerParams(BaseModel):
    """Learning, FDR and deactivation parameters"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    beta: float = Field(0.88, gt=0.0, le=1.0)
    rho: float = Field(0.80, gt=0.0, le=1.0)
    discount: float = Field(1.0, ge=0.0, le=1.0)
    w0: float = Field(1.0, gt=0.0)
    pfa_target: float = Field(0.05, gt=0.0, lt=1.0)
    alpha_fdr: float = Field(0.05, gt=0.0, lt=1.0)
    tau_switch: float = Field(0.02, gt=0.0, lt=1.0)
    mu_deactivate: float = Field(0.0, ge=0.0, lt=1.0)

    # Perceptron Monte Carlo sample count and |w| guard
    mc_samples: int = Field(10_000, ge=1000)
    epsilon_w: float = Field(1e-6, gt=0.0)

    # Discounted Hedge: rows are rescaled by their max every N steps
    renorm_interval: int = Field(1000, ge=1)


@dataclass
class ObservationMatrix:
    """P x S reports of one step; inactive entries hold NaN"""
    values: np.ndarray
    mode: CombiningMode
    active: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.active = np.asarray(self.active, dtype=bool)
        if self.values.ndim != 2 or self.values.shape != self.active.shape:
            raise DimensionError(
                f"observation values {self.values.shape} and mask {self.active.shape} must be equal 2-D shapes"
            )
        self.values = np.where(self.active, self.values, np.nan)
        reported = self.values[self.active]
        if self.mode == CombiningMode.HARD:
            if not np.all((reported == 0.0) | (reported == 1.0)):
                raise ValueError("hard observations must be 0 or 1")
        elif np.any(~(reported >= 0.0)):
            raise ValueError("soft observations must be nonnegative energies")

    @property
    def num_channels(self) -> int:
        return self.values.shape[0]

    @property
    def num_detectors(self) -> int:
        return self.values.shape[1]

    def filled(self, fill: float = 0.0) -> np.ndarray:
        """Values with inactive entries replaced, for combining sums"""
        return np.where(self.active, self.values, fill)


@dataclass
class WeightMatrix:
    """Learner weights w_ji and normalised weights p_ji, one row per channel"""
    weights: np.ndarray
    normalized: np.ndarray = None

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if self.normalized is None:
            self.normalized = np.zeros_like(self.weights)

    @classmethod
    def uniform(cls, num_channels: int, num_detectors: int, value: float) -> "WeightMatrix":
        return cls(np.full((num_channels, num_detectors), float(value)))

    @property
    def shape(self) -> tuple:
        return self.weights.shape


@dataclass
class ChannelTruth:
    """True occupancy g_j and the approximate ground truth seen by the FC"""
    true_state: np.ndarray
    agt: Optional[np.ndarray] = None

    def __post_init__(self):
        self.true_state = np.asarray(self.true_state, dtype=np.int8)
        if self.agt is not None:
            self.agt = np.asarray(self.agt, dtype=np.int8)

    @property
    def agt_busy(self) -> np.ndarray:
        """AGT collapsed to {0, 1}; assumed-busy counts as busy"""
        if self.agt is None:
            raise ValueError("AGT not observed yet")
        return (self.agt != AgtLabel.IDLE).astype(np.int8)

    @property
    def probed(self) -> np.ndarray:
        """Channels whose label came from a transmission"""
        if self.agt is None:
            raise ValueError("AGT not observed yet")
        return self.agt != AgtLabel.ASSUMED_BUSY


@dataclass
class DecisionVector:
    """FC output for one step"""
    soft: np.ndarray
    final: np.ndarray
    thresholds: np.ndarray

    def __post_init__(self):
        self.soft = np.asarray(self.soft, dtype=float)
        self.final = np.asarray(self.final, dtype=np.int8)
        self.thresholds = np.asarray(self.thresholds, dtype=float)

    @property
    def idle(self) -> np.ndarray:
        return self.final == ChannelState.IDLE


@dataclass(frozen=True)
class MomentMatchedGamma:
    """Gamma(k_j, theta_j) approximation of the combined H0 statistic"""
    k: float
    theta: float

    @property
    def mean(self) -> float:
        return self.k * self.theta
