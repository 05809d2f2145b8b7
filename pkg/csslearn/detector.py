"""
Neyman-Pearson energy detection and the Gamma / chi-square tail utilities
"""
from dataclasses import dataclass
import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import special

logger = logging.getLogger(__name__)

# Above this many samples chi-square draws come from the gamma sampler
CHI2_DIRECT_MAX_SAMPLES = 64


class EnergyDetectorConfig(BaseModel):
    """Samples per sensing window, noise power and target false-alarm rate"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    num_samples: int = Field(10, ge=1)
    noise_variance: float = Field(1.0, gt=0.0)
    pfa_target: float = Field(0.05, gt=0.0, lt=1.0)


@dataclass(frozen=True)
class LinkGain:
    """Received PU signal variance at one SU (linear units)"""
    signal_variance: float

    def __post_init__(self):
        if not self.signal_variance >= 0.0:
            raise ValueError(f"signal_variance must be >= 0, got {self.signal_variance}")


def _check_shape_scale(k, theta):
    if not k > 0:
        raise ValueError(f"gamma shape must be positive, got {k}")
    if not theta > 0:
        raise ValueError(f"gamma scale must be positive, got {theta}")


def gamma_tail(k: float, theta: float, x: float) -> float:
    """P(X > x) for X ~ Gamma(k, theta)."""
    _check_shape_scale(k, theta)
    if math.isnan(x):
        raise ValueError("gamma_tail argument is NaN")
    if x <= 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    return float(special.gammaincc(k, x / theta))


def gamma_tail_inverse(k: float, theta: float, q: float) -> float:
    """x such that gamma_tail(k, theta, x) == q."""
    _check_shape_scale(k, theta)
    if not 0.0 < q < 1.0:
        raise ValueError(f"tail probability must lie in (0, 1), got {q}")
    return float(theta * special.gammainccinv(k, q))


def chi2_tail(num_samples: int, x: float) -> float:
    """Q of chi-square with N degrees of freedom (Gamma(N/2, 2))."""
    return gamma_tail(num_samples / 2.0, 2.0, x)


def chi2_tail_inverse(num_samples: int, q: float) -> float:
    return gamma_tail_inverse(num_samples / 2.0, 2.0, q)


def np_threshold(cfg: EnergyDetectorConfig) -> float:
    """Energy threshold zeta giving P(e > zeta | idle) == pfa_target."""
    return cfg.noise_variance * chi2_tail_inverse(cfg.num_samples, cfg.pfa_target)


def draw_chi2(num_samples: int, rng: np.random.Generator, size=None) -> np.ndarray:
    """Chi-square(N) draws: sum of N squared normals for small N, gamma beyond."""
    if num_samples <= CHI2_DIRECT_MAX_SAMPLES:
        shape = (num_samples,) if size is None else tuple(np.atleast_1d(size)) + (num_samples,)
        draws = np.square(rng.standard_normal(shape)).sum(axis=-1)
    else:
        draws = rng.gamma(num_samples / 2.0, 2.0, size=size)
    return draws


def sense_energy(truth: int, gain: LinkGain, cfg: EnergyDetectorConfig,
                 rng: np.random.Generator) -> float:
    """One detected energy: sigma^2 chi2_N when idle, (sigma_s^2 + sigma^2) chi2_N when busy."""
    variance = cfg.noise_variance
    if truth:
        variance += gain.signal_variance
    energy = float(variance * draw_chi2(cfg.num_samples, rng))
    # chi2 draws are positive almost surely; keep the contract strict
    return max(energy, np.finfo(float).tiny)


def sense_channels(truth: np.ndarray, signal_variance: np.ndarray,
                   cfg: EnergyDetectorConfig, rng: np.random.Generator) -> np.ndarray:
    """Energies one SU detects on every channel in a step (vector form of sense_energy)."""
    truth = np.asarray(truth)
    variance = cfg.noise_variance + np.where(truth == 1, signal_variance, 0.0)
    draws = draw_chi2(cfg.num_samples, rng, size=truth.shape)
    return np.maximum(variance * draws, np.finfo(float).tiny)


def hard_decision(energy, zeta):
    """1 iff energy >= zeta (a tie counts as busy)."""
    decision = (np.asarray(energy) >= np.asarray(zeta)).astype(np.int8)
    if decision.ndim == 0:
        return int(decision)
    return decision


def detector_pd(zeta: float, gain: LinkGain, cfg: EnergyDetectorConfig) -> float:
    """Single-detector probability of detection at threshold zeta."""
    return chi2_tail(cfg.num_samples, zeta / (gain.signal_variance + cfg.noise_variance))


def reliable_fraction(signal_variance: np.ndarray, cfg: EnergyDetectorConfig,
                      level: float = 0.95) -> float:
    """Fraction of SU-channel pairs whose single-detector P_d exceeds `level`."""
    signal_variance = np.asarray(signal_variance, dtype=float)
    if signal_variance.size == 0:
        return 0.0
    zeta = np_threshold(cfg)
    scaled = zeta / (signal_variance + cfg.noise_variance)
    pd = special.gammaincc(cfg.num_samples / 2.0, scaled / 2.0)
    return float(np.mean(pd > level))
