"""
Scenario engine: runs the sense / fuse / transmit / learn loop for one configuration
"""
from datetime import datetime, timezone
from typing import List, Optional
import logging

import numpy as np

from csslearn.config import settings
from csslearn.detector import hard_decision, np_threshold, reliable_fraction, sense_channels
from csslearn.energy import EnergyLedger, alive_fraction, deactivation_mask, energy_step
from csslearn.errors import ConfigurationError
from csslearn.fdr import FdrGate
from csslearn.fusion.baselines import fuse_matrix
from csslearn.fusion.hedge import HedgeState, hedge_step
from csslearn.fusion.perceptron import PerceptronState, perceptron_step
from csslearn.metrics import MetricsLog, StepRecord
from csslearn.models import (
    ChannelState,
    ChannelTruth,
    CombiningMode,
    DecisionVector,
    LearnerFamily,
    ObservationMatrix,
)
from csslearn.scenario import ScenarioConfig
from csslearn.sim.network import (
    MobilityModel,
    ProbeReport,
    RoundRobinScheduler,
    generate_topology,
    move_nodes,
    observe_agt,
    signal_variances,
)
from csslearn.sim.traffic import build_channels, traffic_step

logger = logging.getLogger(__name__)

LOG_EXCERPT_LINES = 50


class ScenarioEngine:
    """Runs one scenario deterministically under its seed"""

    def __init__(self, cfg: ScenarioConfig):
        problems = cfg.compatibility_problems()
        if problems:
            raise ConfigurationError("; ".join(problems))
        self.cfg = cfg
        self.log_messages: List[str] = []
        self.metrics = MetricsLog(num_sus=cfg.num_sus)

        root = np.random.SeedSequence(cfg.seed)
        topo_ss, traffic_ss, mobility_ss, agt_ss, sensing_ss, learner_ss = root.spawn(6)
        self.topology_rng = np.random.default_rng(topo_ss)
        self.traffic_rng = np.random.default_rng(traffic_ss)
        self.mobility_rng = np.random.default_rng(mobility_ss)
        self.agt_rng = np.random.default_rng(agt_ss)
        self.sensing_rngs = [np.random.default_rng(s) for s in sensing_ss.spawn(cfg.num_sus)]
        self.learner_rngs = [np.random.default_rng(s) for s in learner_ss.spawn(cfg.num_pus)]

        self.detector = cfg.detector_config()
        self.fusion_detector = cfg.fusion_detector_config()
        self.zeta = np_threshold(self.detector)
        self.mobility = MobilityModel(
            pus_mobile=cfg.mobility.pus_mobile,
            sus_mobile=cfg.mobility.sus_mobile,
            speed=cfg.mobility.speed,
            step_duration=cfg.mobility.step_duration,
        )

        self.topology = None
        self.signal_variance: Optional[np.ndarray] = None
        self.channels = None
        self.scheduler = RoundRobinScheduler(cfg.num_sus)
        self.ledger: Optional[EnergyLedger] = None
        self.mask = np.ones((cfg.num_pus, cfg.num_sus), dtype=bool)
        self.gate: Optional[FdrGate] = None
        self.learner = None
        self.last_probe: Optional[ProbeReport] = None

    def log(self, message: str, level: str = "INFO"):
        """Log a message"""
        timestamp = datetime.now(timezone.utc).strftime("%Y-%m-%d %H:%M:%S")
        self.log_messages.append(f"[{timestamp}] [{level}] {message}")

        if level == "ERROR":
            logger.error(message)
        elif level == "WARNING":
            logger.warning(message)
        elif level == "DEBUG":
            logger.debug(message)
        else:
            logger.info(message)

    @property
    def log_excerpt(self) -> List[str]:
        return self.log_messages[-LOG_EXCERPT_LINES:]

    def initialize(self) -> None:
        """Place nodes, draw traffic models and set up learner state"""
        cfg = self.cfg
        self.topology = generate_topology(
            cfg.num_pus, cfg.num_sus, cfg.area_side, self.topology_rng,
            carrier_ghz=cfg.carrier_ghz, pu_tx_power_db=cfg.pu_tx_db,
        )
        self.signal_variance = signal_variances(self.topology, cfg.rx_noise_floor_db)
        self.channels = build_channels(cfg.num_pus, cfg.traffic.components, cfg.traffic.lambda_max,
                                       self.traffic_rng, slot_duration=cfg.traffic.slot_duration)
        if cfg.energy.budget is not None:
            self.ledger = EnergyLedger.full(cfg.num_sus, cfg.energy.budget, cfg.energy.cost_per_sense)

        family = cfg.algorithm.family
        if family == LearnerFamily.HEDGE:
            self.learner = HedgeState.initial(cfg.num_pus, cfg.num_sus, cfg.learner, cfg.mode)
        elif family == LearnerFamily.PERCEPTRON:
            self.learner = PerceptronState.initial(cfg.num_pus, cfg.num_sus, cfg.learner,
                                                   rngs=self.learner_rngs)
        self.gate = FdrGate.build(cfg.fdr_policy, cfg.learner.alpha_fdr, cfg.learner.tau_switch,
                                  latch=cfg.fdr.latch, window=cfg.fdr.window)

        reliable = reliable_fraction(self.signal_variance, self.detector)
        self.log(
            f"Initialized {cfg.algorithm.value} on {cfg.preset.value}: {cfg.num_pus} PUs, "
            f"{cfg.num_sus} SUs, {cfg.area_side:g} m, {reliable:.0%} reliable pairs, seed {cfg.seed}"
        )

    @property
    def alive(self) -> np.ndarray:
        if self.ledger is None:
            return np.ones(self.cfg.num_sus, dtype=bool)
        return self.ledger.alive

    def sense(self, truth: np.ndarray, active: np.ndarray) -> ObservationMatrix:
        """Every SU draws energies for every channel; only active pairs are reported."""
        energies = np.column_stack([
            sense_channels(truth, self.signal_variance[:, i], self.detector, rng)
            for i, rng in enumerate(self.sensing_rngs)
        ])
        if self.cfg.mode == CombiningMode.HARD:
            values = hard_decision(energies, self.zeta)
            return ObservationMatrix(values, CombiningMode.HARD, active)
        return ObservationMatrix(energies, CombiningMode.SOFT, active)

    def _agt(self, truth: ChannelTruth, alive: np.ndarray):
        def observe(decision: DecisionVector) -> ChannelTruth:
            transmitters = self.scheduler.assign(decision.idle, alive)
            observed, self.last_probe = observe_agt(decision, truth, self.cfg.packet_loss,
                                                    self.agt_rng, transmitters)
            return observed
        return observe

    def fuse(self, obs: ObservationMatrix, truth: ChannelTruth, alive: np.ndarray) -> DecisionVector:
        cfg = self.cfg
        agt = self._agt(truth, alive)
        family = cfg.algorithm.family
        if family == LearnerFamily.HEDGE:
            decision, self.learner = hedge_step(self.learner, obs, agt, self.zeta,
                                                self.fusion_detector, self.gate)
        elif family == LearnerFamily.PERCEPTRON:
            decision, self.learner = perceptron_step(
                self.learner, obs, agt, self.detector.noise_variance, self.detector.num_samples,
                self.fusion_detector.pfa_target, self.gate,
            )
        else:
            final = fuse_matrix(cfg.algorithm.value, obs.filled(0.0), obs.active)
            nan = np.full(cfg.num_pus, np.nan)
            decision = DecisionVector(nan, final, nan)
            agt(decision)
        return decision

    def step(self) -> StepRecord:
        cfg = self.cfg
        true_state = traffic_step(self.channels, self.traffic_rng)
        if self.mobility.enabled:
            self.topology = move_nodes(self.topology, self.mobility, self.mobility_rng)
            self.signal_variance = signal_variances(self.topology, cfg.rx_noise_floor_db)

        alive = self.alive.copy()
        alive_frac = 1.0 if self.ledger is None else alive_fraction(self.ledger)
        active = self.mask & alive[None, :]

        truth = ChannelTruth(true_state)
        obs = self.sense(true_state, active)
        mode_label = self.gate.mode_label if self.gate is not None else "none"
        decision = self.fuse(obs, truth, alive)
        probe = self.last_probe

        if self.gate is not None:
            self.gate.record(probe.collisions, probe.attempts)
        if cfg.energy.deactivation:
            self.mask = deactivation_mask(self.learner.weights.normalized, cfg.learner.mu_deactivate,
                                          self.mask, alive)
        if self.ledger is not None:
            self.ledger = energy_step(self.ledger, active.sum(axis=0))

        busy = true_state == ChannelState.BUSY
        declared_busy = decision.final == ChannelState.BUSY
        return StepRecord(
            pu_collisions=probe.collisions,
            busy_channels=int(busy.sum()),
            su_collisions=probe.collisions,
            su_attempts=probe.attempts,
            missed_slots=int(np.sum(~busy & declared_busy)),
            idle_channels=int(np.sum(~busy)),
            sensing=int(active.sum()),
            detections=int(np.sum(busy & declared_busy)),
            alive_frac=alive_frac,
            mode=mode_label,
            lost_packets=probe.lost,
        )

    def run(self) -> MetricsLog:
        self.initialize()
        interval = settings.progress_interval
        for n in range(1, self.cfg.steps + 1):
            record = self.step()
            self.metrics.append(record)
            if interval and n % interval == 0:
                self.log(f"step {n}/{self.cfg.steps}: alive {record.alive_frac:.2f}, mode {record.mode}")
        totals = self.metrics.totals()
        self.log(f"Transmissions: {totals['su_attempts']} attempts, {totals['su_collisions']} collisions, "
                 f"{totals['lost_packets']} lost packets")
        self.log(f"Completed {self.cfg.steps} steps")
        return self.metrics


def run_scenario(cfg: ScenarioConfig) -> MetricsLog:
    """Run a scenario to completion and return its metrics."""
    return ScenarioEngine(cfg).run()

