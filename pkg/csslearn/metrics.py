"""
Per-step metric bookkeeping, cumulative fractions and CSV emission
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import FrozenSet, List
import logging

import numpy as np
import pandas as pd

from csslearn.errors import OutputError

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["step", "pu_coll_frac", "su_coll_frac", "missed_frac", "avg_sensing", "alive_frac", "mode"]
FRACTION_COLUMNS = CSV_COLUMNS[1:6]


@dataclass
class StepRecord:
    """Counts observed in one step"""
    pu_collisions: int
    busy_channels: int
    su_collisions: int
    su_attempts: int
    missed_slots: int
    idle_channels: int
    sensing: int
    detections: int
    alive_frac: float
    mode: str = "none"
    lost_packets: int = 0


@dataclass
class MetricFractions:
    """Cumulative metrics at one step; `flags` names fractions with a zero denominator"""
    pu_collision: float
    su_collision: float
    missed: float
    avg_sensing: float
    flags: FrozenSet[str] = frozenset()


@dataclass
class MetricsLog:
    """Per-step counts of a scenario run"""
    num_sus: int
    records: List[StepRecord] = field(default_factory=list)

    def append(self, record: StepRecord) -> None:
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def counts(self) -> pd.DataFrame:
        """Per-step counts indexed by step (1-based)"""
        frame = pd.DataFrame([vars(r) for r in self.records],
                             columns=list(StepRecord.__dataclass_fields__))
        frame.index = pd.RangeIndex(1, len(frame) + 1, name="step")
        return frame

    def totals(self, step: int = None) -> dict:
        """Cumulative integer counts up to `step` (all steps by default)"""
        upto = self.records if step is None else self.records[:step]
        keys = ("pu_collisions", "busy_channels", "su_collisions", "su_attempts",
                "missed_slots", "idle_channels", "sensing", "detections", "lost_packets")
        return {k: int(sum(getattr(r, k) for r in upto)) for k in keys}


def _ratio(numerator, denominator):
    """Elementwise numerator / denominator with 0 where the denominator is 0"""
    numerator = np.asarray(numerator, dtype=float)
    denominator = np.asarray(denominator, dtype=float)
    out = np.zeros(np.broadcast(numerator, denominator).shape)
    np.divide(numerator, denominator, out=out, where=denominator > 0)
    return out


def metric_fractions(log: MetricsLog, step: int) -> MetricFractions:
    """The four cumulative metrics at `step` (1-based)."""
    if not 1 <= step <= len(log):
        raise ValueError(f"step {step} outside the log (1..{len(log)})")
    t = log.totals(step)
    flags = set()
    if t["busy_channels"] == 0:
        flags.add("pu_collision")
    if t["su_attempts"] == 0:
        flags.add("su_collision")
    if t["idle_channels"] == 0:
        flags.add("missed")
    if log.num_sus == 0:
        flags.add("avg_sensing")
    return MetricFractions(
        pu_collision=float(_ratio(t["pu_collisions"], t["busy_channels"])),
        su_collision=float(_ratio(t["su_collisions"], t["su_attempts"])),
        missed=float(_ratio(t["missed_slots"], t["idle_channels"])),
        avg_sensing=float(_ratio(t["sensing"], log.num_sus * step)),
        flags=frozenset(flags),
    )


def cumulative_frame(log: MetricsLog) -> pd.DataFrame:
    """Cumulative metric series in CSV column order"""
    if len(log) == 0:
        return pd.DataFrame(columns=CSV_COLUMNS)
    counts = log.counts()
    sums = counts.drop(columns=["alive_frac", "mode"]).cumsum()
    steps = np.arange(1, len(log) + 1)
    return pd.DataFrame({
        "step": steps,
        "pu_coll_frac": _ratio(sums["pu_collisions"], sums["busy_channels"]),
        "su_coll_frac": _ratio(sums["su_collisions"], sums["su_attempts"]),
        "missed_frac": _ratio(sums["missed_slots"], sums["idle_channels"]),
        "avg_sensing": _ratio(sums["sensing"], log.num_sus * steps),
        "alive_frac": counts["alive_frac"].to_numpy(dtype=float),
        "mode": counts["mode"].to_numpy(),
    }, columns=CSV_COLUMNS)


def detection_rates(log: MetricsLog) -> tuple:
    """FC-level empirical (P_fa, P_d) against the true channel states"""
    t = log.totals()
    return float(_ratio(t["missed_slots"], t["idle_channels"])), float(_ratio(t["detections"], t["busy_channels"]))


def write_frame(frame: pd.DataFrame, path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, lineterminator="\n")
    except OSError as e:
        raise OutputError(path, e.strerror or e) from e
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def emit_csv(log: MetricsLog, path) -> Path:
    """Write the cumulative metric series: header, then one row per step."""
    return write_frame(cumulative_frame(log), path)


def read_csv(path) -> pd.DataFrame:
    path = Path(path)
    try:
        return pd.read_csv(path, dtype={"mode": str}, keep_default_na=False)
    except OSError as e:
        raise OutputError(path, e.strerror or e) from e
