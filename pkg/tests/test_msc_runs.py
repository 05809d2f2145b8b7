"""
Long MSC-preset runs: learning, baselines, FDR, energy survival, mobility and ROC
"""
import numpy as np
import pytest

from csslearn.detector import EnergyDetectorConfig, draw_chi2, hard_decision, np_threshold
from csslearn.experiments import compare, roc_sweep
from csslearn.fusion.hedge import HedgeState, hedge_step
from csslearn.metrics import cumulative_frame
from csslearn.models import ChannelTruth, CombiningMode, LearnerParams, ObservationMatrix
from csslearn.scenario import ScenarioConfig
from csslearn.sim.engine import run_scenario
from csslearn.sim.network import observe_agt

pytestmark = pytest.mark.slow

WORKERS = 4


def final_rows(result):
    """Last-step cumulative metrics indexed by (replicate, algorithm)"""
    runs = result.runs
    last = runs[runs["step"] == runs["step"].max()]
    return last.set_index(["replicate", "algorithm"])


def good_pair_weight(seed, steps=5000):
    """Hard Hedge on one channel: SUs 0 and 1 always hear the PU, the other 48 never do"""
    rng = np.random.default_rng(seed)
    detector = EnergyDetectorConfig(num_samples=10, noise_variance=1.0, pfa_target=0.05)
    zeta = np_threshold(detector)
    signal = np.zeros(50)
    signal[:2] = 1e4
    state = HedgeState.initial(1, 50, LearnerParams(beta=0.88), CombiningMode.HARD)
    active = np.ones((1, 50), dtype=bool)

    for _ in range(steps):
        true_state = np.array([int(rng.random() < 0.5)])
        energies = (detector.noise_variance + signal * true_state[0]) * draw_chi2(10, rng, size=50)
        obs = ObservationMatrix(hard_decision(energies, zeta)[None, :].astype(float),
                                CombiningMode.HARD, active)

        def agt(decision):
            return observe_agt(decision, ChannelTruth(true_state), 0.05, rng)[0]

        _, state = hedge_step(state, obs, agt, zeta, detector)
    return float(state.weights.normalized[0, :2].sum())


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_hard_hedge_concentrates_on_good_detectors(seed):
    assert good_pair_weight(seed) > 0.9


def test_hedge_soft_beats_hard_rules():
    cfg = ScenarioConfig(preset="msc", seed=1)
    result = compare(cfg, ["hedge-sc", "hedge-hc", "and", "or"], seeds=3, workers=WORKERS)
    final = final_rows(result)
    for replicate in range(3):
        sc = final.loc[(replicate, "hedge-sc")]
        assert sc["su_coll_frac"] < final.loc[(replicate, "and")]["su_coll_frac"]
        assert sc["missed_frac"] < final.loc[(replicate, "or")]["missed_frac"]
        assert sc["su_coll_frac"] <= final.loc[(replicate, "hedge-hc")]["su_coll_frac"]


def test_bh_reduces_missed_slots_and_switch_bounds_collisions():
    cfg = ScenarioConfig(preset="msc", seed=1)
    final = final_rows(compare(cfg, ["hedge-sc", "hsc-bh", "hsc-sw"], workers=WORKERS))
    assert final.loc[(0, "hsc-bh")]["missed_frac"] < final.loc[(0, "hedge-sc")]["missed_frac"]
    assert final.loc[(0, "hsc-sw")]["su_coll_frac"] <= cfg.learner.tau_switch + 0.005


def test_deactivation_keeps_network_alive():
    base = {"preset": "msc", "algorithm": "hedge-hc", "steps": 1500, "seed": 1}
    without = cumulative_frame(run_scenario(ScenarioConfig(**base, energy={"budget": 10_000})))
    with_deactivation = cumulative_frame(run_scenario(ScenarioConfig(
        **base, energy={"budget": 10_000, "deactivation": True})))
    # ten channels a step drain 10^4 units in 1000 steps
    assert without["alive_frac"].iloc[999] == 1.0
    assert without["alive_frac"].iloc[1000] == 0.0
    assert with_deactivation["alive_frac"].iloc[1499] > 0.0
    assert with_deactivation["avg_sensing"].iloc[-1] < 10.0


def test_discounted_perceptron_tracks_mobile_pus():
    cfg = ScenarioConfig(preset="msc", seed=1, mobility={"pus_mobile": True, "speed": 5.0})
    mean = compare(cfg, ["perc-sc", "dperc-sc"], seeds=3, workers=WORKERS).mean
    last = mean[mean["step"] == cfg.steps].set_index("algorithm")
    assert last.loc["dperc-sc"]["su_coll_frac"] < last.loc["perc-sc"]["su_coll_frac"]


def test_soft_roc_dominates_hard_roc():
    targets = [0.01, 0.05, 0.1, 0.2]
    soft = roc_sweep(ScenarioConfig(preset="msc", algorithm="hedge-sc", seed=1), targets, workers=WORKERS)
    hard = roc_sweep(ScenarioConfig(preset="msc", algorithm="hedge-hc", seed=1), targets, workers=WORKERS)

    curve = sorted([(0.0, 0.0), (1.0, 1.0)] + [(p.pfa, p.pd) for p in soft])
    pfa, pd_ = np.array(curve).T
    for point in hard:
        assert np.interp(point.pfa, pfa, pd_) >= point.pd - 0.01
