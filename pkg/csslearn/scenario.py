"""
Scenario configuration: presets, experiment defaults and compatibility checks
"""
from typing import Any, Dict, List, Optional
import enum
import logging

from pydantic import BaseModel, ConfigDict, Field, model_validator

from csslearn.detector import EnergyDetectorConfig
from csslearn.models import Algorithm, CombiningMode, FdrPolicy, LearnerFamily, LearnerParams
from csslearn.sim.traffic import DEFAULT_SLOT_DURATION

logger = logging.getLogger(__name__)


class Preset(str, enum.Enum):
    """Signal-condition presets"""
    GSC = "gsc"
    MSC = "msc"
    BSC = "bsc"
    CUSTOM = "custom"


PRESETS: Dict[Preset, Dict[str, Any]] = {
    Preset.GSC: {"area_side": 1000.0, "num_sus": 10, "num_pus": 10},
    Preset.MSC: {"area_side": 8000.0, "num_sus": 50, "num_pus": 10},
    Preset.BSC: {"area_side": 8000.0, "num_sus": 10, "num_pus": 10},
}

# Learner parameters used for each algorithm in the reference experiments
ALGORITHM_DEFAULTS: Dict[Algorithm, Dict[str, float]] = {
    Algorithm.HEDGE_HC: {"beta": 0.88},
    Algorithm.HEDGE_SC: {"beta": 0.99},
    Algorithm.HSC_BH: {"beta": 0.99},
    Algorithm.HSC_SW: {"beta": 0.99},
    Algorithm.PERC_SC: {"rho": 0.80},
    Algorithm.PSC_BH: {"rho": 0.80},
    Algorithm.PSC_SW: {"rho": 0.80},
    Algorithm.DHEDGE_HC: {"discount": 0.80, "beta": 0.05},
    Algorithm.DHEDGE_SC: {"discount": 0.60, "beta": 0.50},
    Algorithm.DPERC_SC: {"discount": 0.99, "rho": 0.40},
}


def learner_defaults(algorithm: Algorithm, num_sus: int, pfa: float) -> Dict[str, float]:
    """Defaults for the learner section given the algorithm, SU count and P_fa."""
    defaults = dict(ALGORITHM_DEFAULTS.get(algorithm, {}))
    defaults["mu_deactivate"] = 1.0 / (2 * num_sus)
    defaults["pfa_target"] = pfa
    return defaults


class TrafficParams(BaseModel):
    """Hyper-exponential ON/OFF parameters.

    Rates are drawn from (0, lambda_max] per second and one step lasts
    `slot_duration` seconds, so a rate of 500/s means a mean stay of 2 ms.
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    components: int = Field(3, ge=1)
    lambda_max: float = Field(500.0, gt=0.0)
    slot_duration: float = Field(DEFAULT_SLOT_DURATION, gt=0.0)


class DetectorParams(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    num_samples: int = Field(10, ge=1)
    noise_variance: float = Field(1.0, gt=0.0)


class FdrParams(BaseModel):
    """BH / Switch-BH options. `policy` overrides the one implied by the algorithm."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    policy: Optional[FdrPolicy] = None
    latch: bool = False
    window: Optional[int] = Field(None, ge=1)


class EnergyParams(BaseModel):
    """Per-SU energy budget (None means unlimited) and selective deactivation"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    budget: Optional[int] = Field(None, ge=0)
    cost_per_sense: int = Field(1, ge=1)
    deactivation: bool = False


class MobilityParams(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    pus_mobile: bool = False
    sus_mobile: bool = False
    speed: float = Field(5.0, ge=0.0)
    step_duration: float = Field(1.0, gt=0.0)


class ScenarioConfig(BaseModel):
    """Everything that determines a scenario run, together with `seed`"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    preset: Preset = Preset.MSC
    num_pus: int = Field(10, ge=1)
    num_sus: int = Field(50, ge=1)
    area_side: float = Field(8000.0, gt=0.0)
    carrier_ghz: float = Field(6.0, gt=0.0)
    pu_tx_db: float = 0.0
    rx_noise_floor_db: float = -111.0
    pfa: float = Field(0.05, gt=0.0, lt=1.0)
    packet_loss: float = Field(0.05, ge=0.0, le=1.0)
    traffic: TrafficParams = TrafficParams()
    algorithm: Algorithm = Algorithm.HEDGE_SC
    learner: LearnerParams = LearnerParams()
    detector: DetectorParams = DetectorParams()
    fdr: FdrParams = FdrParams()
    energy: EnergyParams = EnergyParams()
    mobility: MobilityParams = MobilityParams()
    steps: int = Field(10_000, ge=1)
    seed: int = Field(0, ge=0)

    @model_validator(mode="before")
    @classmethod
    def apply_defaults(cls, data: Any) -> Any:
        """Fill preset geometry and algorithm-dependent learner defaults.

        Explicit keys always win over presets and defaults.
        """
        if not isinstance(data, dict):
            return data
        data = dict(data)

        try:
            preset = Preset(data.get("preset", Preset.MSC))
        except ValueError:
            return data
        if preset == Preset.CUSTOM:
            missing = [key for key in ("num_sus", "area_side") if key not in data]
            if missing:
                raise ValueError(f"custom preset requires {', '.join(missing)}")
        else:
            for key, value in PRESETS[preset].items():
                data.setdefault(key, value)

        try:
            algorithm = Algorithm(data.get("algorithm", Algorithm.HEDGE_SC))
        except ValueError:
            return data
        learner = data.get("learner") or {}
        if isinstance(learner, LearnerParams):
            learner = learner.model_dump(exclude_unset=True)
        if not isinstance(learner, dict):
            return data
        num_sus = data.get("num_sus", 50)
        pfa = data.get("pfa", 0.05)
        if isinstance(num_sus, int) and num_sus >= 1 and isinstance(pfa, (int, float)):
            merged = learner_defaults(algorithm, num_sus, float(pfa))
            merged.update(learner)
            data["learner"] = merged
        return data

    @property
    def mode(self) -> CombiningMode:
        return self.algorithm.mode

    @property
    def fdr_policy(self) -> FdrPolicy:
        if self.fdr.policy is not None:
            return self.fdr.policy
        return self.algorithm.fdr_policy

    def detector_config(self) -> EnergyDetectorConfig:
        """Per-SU Neyman-Pearson detector"""
        return EnergyDetectorConfig(
            num_samples=self.detector.num_samples,
            noise_variance=self.detector.noise_variance,
            pfa_target=self.pfa,
        )

    def fusion_detector_config(self) -> EnergyDetectorConfig:
        """Detector statistics as seen by the FC threshold (learner P_fa target)"""
        return EnergyDetectorConfig(
            num_samples=self.detector.num_samples,
            noise_variance=self.detector.noise_variance,
            pfa_target=self.learner.pfa_target,
        )

    def compatibility_problems(self) -> List[str]:
        """Algorithm / parameter combinations the engine cannot run"""
        problems = []
        policy = self.fdr_policy
        if policy != FdrPolicy.NONE and self.mode == CombiningMode.HARD:
            problems.append(f"{policy.value} decisions need soft combining, {self.algorithm.value} is hard")
        if self.energy.deactivation and self.algorithm.family != LearnerFamily.HEDGE:
            problems.append(f"selective deactivation needs a Hedge learner, got {self.algorithm.value}")
        if self.energy.deactivation and self.learner.mu_deactivate <= 0.0:
            problems.append("selective deactivation needs mu_deactivate > 0")
        return problems

    def derive(self, **changes) -> "ScenarioConfig":
        """Copy with top-level fields replaced and learner defaults re-derived.

        Learner values that differ from the defaults of the current
        algorithm are kept as explicit overrides.
        """
        current = LearnerParams(**learner_defaults(self.algorithm, self.num_sus, self.pfa)).model_dump()
        overrides = {k: v for k, v in self.learner.model_dump().items() if current[k] != v}
        overrides.update(changes.pop("learner", {}) or {})
        data = self.model_dump(exclude={"learner"})
        data.update(changes)
        data["learner"] = overrides
        return ScenarioConfig.model_validate(data)
