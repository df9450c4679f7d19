"""Two-antenna phase interferometry for angle of arrival."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleMeasurementError
from .receiver import wrap_phase


@dataclass(frozen=True)
class InterferometerConfig:
    """Antenna pair: spacing and the carrier wavelength it measures at."""

    antenna_spacing_m: float
    wavelength_m: float

    def __post_init__(self) -> None:
        if self.antenna_spacing_m <= 0 or self.wavelength_m <= 0:
            raise ValueError("antenna spacing and wavelength must be positive")


def aoa_from_phase_diff(phase_diff_rad: float, config: InterferometerConfig) -> list[float]:
    """All arrival angles consistent with a measured phase difference.

    A plane wave from angle theta (measured from the baseline axis) arrives
    with inter-antenna phase difference 2 pi d cos(theta) / lambda; spacings
    beyond half a wavelength alias, so every integer wrap m with
    |(Delta + 2 pi m) lambda / (2 pi d)| <= 1 contributes a candidate.
    Candidates are returned ascending in angle, in [0, pi].
    """
    d, lam = config.antenna_spacing_m, config.wavelength_m
    scale = lam / (2.0 * np.pi * d)
    # cos(theta) = (Delta + 2 pi m) * scale must land in [-1, 1]
    m_lo = int(np.ceil((-1.0 / scale - phase_diff_rad) / (2.0 * np.pi) - 1e-12))
    m_hi = int(np.floor((1.0 / scale - phase_diff_rad) / (2.0 * np.pi) + 1e-12))
    angles = []
    for m in range(m_lo, m_hi + 1):
        c = (phase_diff_rad + 2.0 * np.pi * m) * scale
        if -1.0 <= c <= 1.0:
            angles.append(float(np.arccos(c)))
    if not angles:
        raise InfeasibleMeasurementError(
            f"phase difference {phase_diff_rad:.4f} rad fits no arrival angle "
            f"at spacing {d:.4f} m")
    return sorted(angles)


def phase_diff_for_angle(angle_rad: float, config: InterferometerConfig) -> float:
    """Forward model: wrapped phase difference seen for a plane wave."""
    delta = 2.0 * np.pi * config.antenna_spacing_m * np.cos(angle_rad) / config.wavelength_m
    return float(wrap_phase(delta))


def simulate_two_antenna_phase_diff(angle_rad: float, config: InterferometerConfig,
                                    snr_db: float, seed: int) -> float:
    """Noisy inter-antenna phase difference for a plane wave at ``angle_rad``.

    Each antenna's phase estimate carries white phase noise with variance
    1/(2 SNR); the difference of the two independent estimates is returned
    wrapped.  +inf SNR is the noiseless sentinel.
    """
    if not 0.0 <= angle_rad <= np.pi:
        raise ValueError("arrival angle must lie in [0, pi]")
    delta = phase_diff_for_angle(angle_rad, config)
    if np.isinf(snr_db) and snr_db > 0:
        return delta
    snr = 10.0 ** (snr_db / 10.0)
    rng = np.random.default_rng(seed)
    sigma = np.sqrt(1.0 / (2.0 * snr))
    noise = rng.normal(0.0, sigma) - rng.normal(0.0, sigma)
    return float(wrap_phase(delta + noise))
