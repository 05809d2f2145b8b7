"""
Network environment: placement, Winner II path loss, mobility and the transmit/AGT feedback
"""
from dataclasses import dataclass, replace
from typing import Optional, Tuple
import logging

import numpy as np

from csslearn.detector import LinkGain
from csslearn.models import AgtLabel, ChannelState, ChannelTruth, DecisionVector

logger = logging.getLogger(__name__)

WINNER2_CONSTANT_DB = 46.4
WINNER2_REFERENCE_GHZ = 5.0


@dataclass(frozen=True)
class Topology:
    """Node positions in metres inside [0, area_side]^2"""
    pu_positions: np.ndarray
    su_positions: np.ndarray
    area_side: float
    carrier_ghz: float = 6.0
    pu_tx_power_db: float = 0.0
    pu_headings: Optional[np.ndarray] = None
    su_headings: Optional[np.ndarray] = None

    @property
    def num_pus(self) -> int:
        return self.pu_positions.shape[0]

    @property
    def num_sus(self) -> int:
        return self.su_positions.shape[0]

    def distances(self) -> np.ndarray:
        """P x S PU-SU distance matrix"""
        delta = self.pu_positions[:, None, :] - self.su_positions[None, :, :]
        return np.hypot(delta[..., 0], delta[..., 1])


@dataclass(frozen=True)
class MobilityModel:
    pus_mobile: bool = False
    sus_mobile: bool = False
    speed: float = 5.0
    step_duration: float = 1.0

    def __post_init__(self):
        if self.speed < 0.0:
            raise ValueError("speed must be >= 0")
        if self.step_duration <= 0.0:
            raise ValueError("step_duration must be positive")

    @property
    def enabled(self) -> bool:
        return (self.pus_mobile or self.sus_mobile) and self.speed > 0.0

    @property
    def step_length(self) -> float:
        return self.speed * self.step_duration


def generate_topology(num_pus: int, num_sus: int, area_side: float, rng: np.random.Generator,
                      carrier_ghz: float = 6.0, pu_tx_power_db: float = 0.0) -> Topology:
    """Uniform i.i.d. placement of PUs and SUs in the square."""
    pus = rng.uniform(0.0, area_side, size=(num_pus, 2))
    sus = rng.uniform(0.0, area_side, size=(num_sus, 2))
    return Topology(
        pu_positions=pus,
        su_positions=sus,
        area_side=float(area_side),
        carrier_ghz=float(carrier_ghz),
        pu_tx_power_db=float(pu_tx_power_db),
        pu_headings=rng.uniform(0.0, 2.0 * np.pi, size=num_pus),
        su_headings=rng.uniform(0.0, 2.0 * np.pi, size=num_sus),
    )


def winner2_pathloss(r, fc: float):
    """PL = 20 log10(r) + 46.4 + 20 log10(fc / 5), r in metres and fc in GHz.

    Non-positive distances (collocated nodes) are clamped to 1 m.
    """
    r = np.asarray(r, dtype=float)
    collocated = r <= 0.0
    if np.any(collocated):
        logger.debug(f"winner2_pathloss: clamped {int(np.sum(collocated))} collocated distance(s) to 1 m")
        r = np.where(collocated, 1.0, r)
    pl = 20.0 * np.log10(r) + WINNER2_CONSTANT_DB + 20.0 * np.log10(fc / WINNER2_REFERENCE_GHZ)
    return float(pl) if pl.ndim == 0 else pl


def link_gain(pt_db: float, pl_db: float) -> LinkGain:
    """Received signal variance 10^((PT - PL) / 10) in linear units."""
    return LinkGain(float(10.0 ** ((pt_db - pl_db) / 10.0)))


def signal_variances(topology: Topology, noise_floor_db: float = 0.0) -> np.ndarray:
    """P x S matrix of received PU power referred to `noise_floor_db` (linear)."""
    pl = winner2_pathloss(topology.distances(), topology.carrier_ghz)
    return np.power(10.0, (topology.pu_tx_power_db - noise_floor_db - pl) / 10.0)


def _advance(positions: np.ndarray, headings: np.ndarray, length: float, side: float,
             rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    step = length * np.column_stack((np.cos(headings), np.sin(headings)))
    moved = positions + step
    low = moved < 0.0
    high = moved > side
    moved = np.where(low, -moved, moved)
    moved = np.where(high, 2.0 * side - moved, moved)
    moved = np.clip(moved, 0.0, side)
    bounced = (low | high).any(axis=1)
    headings = headings.copy()
    if bounced.any():
        headings[bounced] = rng.uniform(0.0, 2.0 * np.pi, size=int(bounced.sum()))
    return moved, headings


def move_nodes(topology: Topology, mobility: MobilityModel, rng: np.random.Generator) -> Topology:
    """Advance mobile nodes along persistent headings, reflecting at the border."""
    if not mobility.enabled:
        return topology
    length = mobility.step_length
    side = topology.area_side
    pus, pu_headings = topology.pu_positions, topology.pu_headings
    sus, su_headings = topology.su_positions, topology.su_headings
    if pu_headings is None:
        pu_headings = rng.uniform(0.0, 2.0 * np.pi, size=topology.num_pus)
    if su_headings is None:
        su_headings = rng.uniform(0.0, 2.0 * np.pi, size=topology.num_sus)
    if mobility.pus_mobile:
        pus, pu_headings = _advance(pus, pu_headings, length, side, rng)
    if mobility.sus_mobile:
        sus, su_headings = _advance(sus, su_headings, length, side, rng)
    return replace(topology, pu_positions=pus, su_positions=sus,
                   pu_headings=pu_headings, su_headings=su_headings)


@dataclass
class ProbeReport:
    """What happened in the transmission phase of one step"""
    transmitters: np.ndarray
    attempts: int
    collisions: int
    lost: int


class RoundRobinScheduler:
    """Picks one alive SU per idle-declared channel, cycling through the SUs"""

    def __init__(self, num_sus: int):
        self.num_sus = num_sus
        self.cursor = 0

    def assign(self, idle_channels: np.ndarray, alive: np.ndarray) -> np.ndarray:
        transmitters = np.full(idle_channels.shape, -1, dtype=np.int64)
        candidates = np.nonzero(alive)[0]
        if candidates.size == 0:
            return transmitters
        for j in np.nonzero(idle_channels)[0]:
            # next alive SU at or after the cursor
            pos = np.searchsorted(candidates, self.cursor % self.num_sus)
            su = int(candidates[pos % candidates.size])
            transmitters[j] = su
            self.cursor = su + 1
        return transmitters


def observe_agt(decision: DecisionVector, truth: ChannelTruth, packet_loss: float,
                rng: np.random.Generator,
                transmitters: Optional[np.ndarray] = None) -> Tuple[ChannelTruth, ProbeReport]:
    """Fill in the approximate ground truth after the transmission phase.

    Busy decisions are not probed and read as assumed-busy. An idle decision
    with a transmitter reveals the channel: a busy channel collides, and a
    lost packet on an idle channel is indistinguishable from a collision.
    """
    if not 0.0 <= packet_loss <= 1.0:
        raise ValueError(f"packet_loss must lie in [0, 1], got {packet_loss}")
    P = decision.final.shape[0]
    if transmitters is None:
        transmitters = np.where(decision.idle, 0, -1)
    probing = decision.idle & (transmitters >= 0)
    agt = np.full(P, AgtLabel.ASSUMED_BUSY, dtype=np.int8)

    # One draw per channel keeps the stream independent of the decisions
    loss_draws = rng.random(P)
    busy = truth.true_state == ChannelState.BUSY
    collided = probing & busy
    lost = probing & ~busy & (loss_draws < packet_loss)
    success = probing & ~busy & ~lost

    agt[collided | lost] = AgtLabel.BUSY
    agt[success] = AgtLabel.IDLE
    # Idle decisions without a live transmitter reveal nothing
    agt[decision.idle & ~probing] = AgtLabel.ASSUMED_BUSY

    report = ProbeReport(
        transmitters=np.where(probing, transmitters, -1),
        attempts=int(probing.sum()),
        collisions=int(collided.sum()),
        lost=int(lost.sum()),
    )
    return ChannelTruth(truth.true_state.copy(), agt), report
