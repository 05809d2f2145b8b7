"""
Multi-run experiments: ROC sweeps and algorithm comparisons
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence
import logging

import numpy as np
import pandas as pd

from csslearn.errors import ConfigurationError
from csslearn.metrics import FRACTION_COLUMNS, MetricsLog, cumulative_frame, detection_rates
from csslearn.models import Algorithm, LearnerFamily
from csslearn.scenario import ScenarioConfig
from csslearn.sim.engine import run_scenario

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RocPoint:
    target: float
    pfa: float
    pd: float


@dataclass
class CompareResult:
    """`runs` holds every replicate's curves; `mean` the per-algorithm average over replicates"""
    runs: pd.DataFrame
    mean: pd.DataFrame

    @property
    def single_seed(self) -> pd.DataFrame:
        """Curves of the shared-seed replicate"""
        first = self.runs[self.runs["replicate"] == 0]
        return first.drop(columns=["replicate", "seed"]).reset_index(drop=True)


def derived_seeds(seed: int, count: int) -> List[int]:
    """Independent child seeds of `seed`"""
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(child.generate_state(1)[0]) for child in children]


def _run_all(configs: Sequence[ScenarioConfig], workers: Optional[int]) -> List[MetricsLog]:
    """Run member scenarios, in parallel when workers > 1; results keep input order."""
    if not workers or workers <= 1 or len(configs) <= 1:
        return [run_scenario(cfg) for cfg in configs]
    logger.info(f"Running {len(configs)} scenarios on {workers} workers")
    with ProcessPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(run_scenario, cfg) for cfg in configs]
        return [future.result() for future in futures]


def roc_sweep(cfg: ScenarioConfig, pfa_list: Sequence[float],
              workers: Optional[int] = None) -> List[RocPoint]:
    """Empirical FC (P_fa, P_d) for each target false-alarm rate.

    Each target reruns the scenario with its own derived seed. Targets at or
    above 1 and at or below 0 are not simulated: they return the synthetic
    ROC end points (1, 1) and (0, 0), the always-busy and never-busy
    detectors, rather than measured rates.
    """
    if cfg.algorithm.family != LearnerFamily.HEDGE:
        raise ConfigurationError(f"ROC sweeps need a Hedge algorithm, got {cfg.algorithm.value}")

    seeds = derived_seeds(cfg.seed, len(pfa_list))
    members, slots = [], []
    points: List[Optional[RocPoint]] = []
    for target, seed in zip(pfa_list, seeds):
        target = float(target)
        if target >= 1.0:
            points.append(RocPoint(target, 1.0, 1.0))
        elif target <= 0.0:
            points.append(RocPoint(target, 0.0, 0.0))
        else:
            slots.append(len(points))
            points.append(None)
            members.append(cfg.derive(pfa=target, seed=seed, learner={"pfa_target": target}))

    for slot, member, log in zip(slots, members, _run_all(members, workers)):
        pfa, pd_ = detection_rates(log)
        points[slot] = RocPoint(member.pfa, pfa, pd_)
        logger.info(f"ROC {cfg.algorithm.value} target {member.pfa:g}: P_fa {pfa:.4f}, P_d {pd_:.4f}")
    return points


def roc_frame(points: Sequence[RocPoint]) -> pd.DataFrame:
    return pd.DataFrame([vars(p) for p in points], columns=["target", "pfa", "pd"])


def compare(cfg: ScenarioConfig, algorithms: Sequence[Algorithm], seeds: int = 1,
            workers: Optional[int] = None) -> CompareResult:
    """Run every algorithm on the shared seed, plus `seeds - 1` derived replicates."""
    if seeds < 1:
        raise ConfigurationError("seeds must be >= 1")
    if not algorithms:
        raise ConfigurationError("compare needs at least one algorithm")
    replicate_seeds = [cfg.seed] + derived_seeds(cfg.seed, seeds - 1)

    members, labels = [], []
    for algorithm in algorithms:
        algorithm = Algorithm(algorithm)
        for replicate, seed in enumerate(replicate_seeds):
            member = cfg.derive(algorithm=algorithm, seed=seed)
            problems = member.compatibility_problems()
            if problems:
                raise ConfigurationError(f"{algorithm.value}: {'; '.join(problems)}")
            members.append(member)
            labels.append((algorithm.value, replicate, seed))

    logs = _run_all(members, workers)
    frames = []
    for (algorithm, replicate, seed), log in zip(labels, logs):
        frame = cumulative_frame(log)
        frame.insert(0, "seed", seed)
        frame.insert(0, "replicate", replicate)
        frame.insert(0, "algorithm", algorithm)
        frames.append(frame)
    runs = pd.concat(frames, ignore_index=True)

    mean = (
        runs.groupby(["algorithm", "step"], sort=False)[FRACTION_COLUMNS]
        .mean()
        .reset_index()
    )
    mean["replicates"] = len(replicate_seeds)
    return CompareResult(runs=runs, mean=mean)
