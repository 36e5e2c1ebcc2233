"""
Success-rate reward shaping.

Smoothed success/failure counts become a Beta(N_S + 1, N_F + 1) posterior over
the success rate of a state. A draw from it (or its plug-in ratio when sampling
is switched off) is mapped linearly into ``[r_min, r_max]`` and added to the
environment reward with weight ``lambda_weight``.
"""

import logging
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from sasr.exceptions import ConfigurationError, ValidationError
from sasr.sasr_types import CountEstimate, FloatArray, KernelKind

logger = logging.getLogger("sasr.shaping")


@dataclass(frozen=True)
class ShapingConfig:
    lambda_weight: float = 0.6
    r_min: float = 0.0
    r_max: float = 1.0
    retention_rate: float = 0.1
    bandwidth: float = 0.2
    bandwidth_end: float | None = None
    feature_dim: int = 1000
    kernel: KernelKind = KernelKind.GAUSSIAN
    sample_from_beta: bool = True
    state_action_features: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "kernel", KernelKind(self.kernel))
        if not 0.0 <= self.lambda_weight <= 1.0:
            raise ConfigurationError(
                "lambda must lie in [0, 1]", reason=f"got {self.lambda_weight!r}", key="lambda"
            )
        if self.r_min > self.r_max:
            raise ConfigurationError(
                "r_min must not exceed r_max",
                reason=f"r_min={self.r_min!r}, r_max={self.r_max!r}",
                key="r_min",
            )
        if not 0.0 < self.retention_rate <= 1.0:
            raise ConfigurationError(
                "phi must lie in (0, 1]", reason=f"got {self.retention_rate!r}", key="phi"
            )
        if not self.bandwidth > 0:
            raise ConfigurationError(
                "bandwidth must be positive", reason=f"got {self.bandwidth!r}", key="bandwidth"
            )
        if self.bandwidth_end is not None and not self.bandwidth_end > 0:
            raise ConfigurationError(
                "bandwidth_end must be positive",
                reason=f"got {self.bandwidth_end!r}",
                key="bandwidth_end",
            )
        if self.feature_dim < 1:
            raise ConfigurationError(
                "rff_dim must be a positive integer",
                reason=f"got {self.feature_dim!r}",
                key="rff_dim",
            )


@dataclass(frozen=True)
class BetaParams:
    alpha: FloatArray
    beta: FloatArray

    @classmethod
    def from_counts(cls, counts: CountEstimate) -> "BetaParams":
        return cls(
            alpha=np.maximum(counts.n_success, 0.0) + 1.0,
            beta=np.maximum(counts.n_failure, 0.0) + 1.0,
        )

    @property
    def mean(self) -> FloatArray:
        return self.alpha / (self.alpha + self.beta)

    @property
    def variance(self) -> FloatArray:
        total = self.alpha + self.beta
        return self.alpha * self.beta / (total**2 * (total + 1.0))


def beta_sample(p: BetaParams, rng: np.random.Generator) -> FloatArray | float:
    """One Beta(alpha, beta) draw per entry, built from two Gamma draws."""
    alpha = np.asarray(p.alpha, dtype=np.float64)
    beta = np.asarray(p.beta, dtype=np.float64)
    if not (np.all(np.isfinite(alpha)) and np.all(np.isfinite(beta))):
        raise ValidationError("Beta shapes must be finite")
    if np.any(alpha <= 0) or np.any(beta <= 0):
        raise ValidationError(
            "Beta shapes must be positive",
            reason=f"min alpha={np.min(alpha)!r}, min beta={np.min(beta)!r}",
        )
    alpha, beta = np.broadcast_arrays(alpha, beta)
    g1 = rng.standard_gamma(alpha)
    g2 = rng.standard_gamma(beta)
    total = g1 + g2
    # Both gammas can underflow for very small shapes; fall back to the mean.
    draws = np.where(total > 0, g1 / np.where(total > 0, total, 1.0), alpha / (alpha + beta))
    return float(draws) if draws.ndim == 0 else draws


def scale(r: npt.ArrayLike, r_min: float, r_max: float) -> FloatArray | float:
    """Map a success rate in [0, 1] linearly onto [r_min, r_max]."""
    rate = np.asarray(r, dtype=np.float64)
    if np.any(~np.isfinite(rate)) or np.any(rate < 0.0) or np.any(rate > 1.0):
        raise ValidationError("Success rate must lie in [0, 1]", reason=f"got {r!r}")
    scaled = r_min + rate * (r_max - r_min)
    return float(scaled) if scaled.ndim == 0 else scaled


def success_ratio(counts: CountEstimate) -> FloatArray:
    """Plug-in success rate N_S / (N_S + N_F); 0/0 reads as the prior mean 0.5."""
    total = counts.n_success + counts.n_failure
    safe_total = np.where(total > 0, total, 1.0)
    return np.where(total > 0, counts.n_success / safe_total, 0.5)


def shaped_reward(
    counts: CountEstimate, cfg: ShapingConfig, rng: np.random.Generator
) -> FloatArray | float:
    if cfg.sample_from_beta:
        rate = beta_sample(BetaParams.from_counts(counts), rng)
    else:
        rate = success_ratio(counts)
    if logger.isEnabledFor(logging.DEBUG):
        logger.debug(
            "Shaped %d rewards: mean success evidence %.3g, failure %.3g",
            np.size(counts.n_success),
            float(np.mean(counts.n_success)),
            float(np.mean(counts.n_failure)),
        )
    # Guard against 1 + 1e-16 style rounding in the ratio.
    return scale(np.clip(rate, 0.0, 1.0), cfg.r_min, cfg.r_max)


def compose(
    r_env: npt.ArrayLike, r_shaped: npt.ArrayLike, lambda_weight: float
) -> FloatArray | float:
    combined = np.asarray(r_env, dtype=np.float64) + lambda_weight * np.asarray(
        r_shaped, dtype=np.float64
    )
    return float(combined) if combined.ndim == 0 else combined
