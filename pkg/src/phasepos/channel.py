"""Multipath channel models for indoor factory scenarios.

The channel is a tapped delay line applied in the frequency domain over the
whole stream: tap i multiplies the stream spectrum by
gain_i * exp(-j 2 pi f_c tau_i) * exp(-j 2 pi f tau_i), which realizes the
fractional delay exactly for the simulated band (no interpolation error) and
bakes the carrier-phase rotation of each path into the baseband signal.  The
sign convention is fixed here once: a delay produces a *negative* phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .constants import SPEED_OF_LIGHT
from .errors import ConfigError, NoSignalError
from .waveform import BasebandStream

PROFILE_KINDS = ("InF-LOS", "InF-NLOS-S", "InF-NLOS-D")


@dataclass(frozen=True)
class Geometry:
    """Static transmitter/receiver placement, coordinates in metres."""

    gnb_position_m: tuple[float, float, float]
    ue_position_m: tuple[float, float, float]

    @property
    def true_distance_m(self) -> float:
        d = np.subtract(self.ue_position_m, self.gnb_position_m)
        return float(np.linalg.norm(d))

    @property
    def true_delay_s(self) -> float:
        return self.true_distance_m / SPEED_OF_LIGHT


@dataclass(frozen=True)
class ScenarioProfile:
    """Statistical description of one propagation scenario.

    The numeric defaults are simulator choices sized to indoor-factory
    behaviour; every field can be overridden through the harness config.
    """

    kind: str
    rician_k_db: float | None = None          # LOS only; +inf collapses to a single tap
    rms_delay_spread_s: float = 30e-9
    n_clutter_taps: int = 12
    nlos_excess_delay_mean_s: float | None = None   # NLOS only

    def __post_init__(self) -> None:
        if self.kind not in PROFILE_KINDS:
            raise ConfigError(f"unknown profile kind {self.kind!r}")
        if self.rms_delay_spread_s <= 0:
            raise ConfigError("rms_delay_spread_s must be positive")
        if self.n_clutter_taps < 1:
            raise ConfigError("n_clutter_taps must be positive")
        if self.is_los:
            if self.rician_k_db is None:
                raise ConfigError("LOS profile needs rician_k_db")
        else:
            if self.nlos_excess_delay_mean_s is None or self.nlos_excess_delay_mean_s <= 0:
                raise ConfigError("NLOS profile needs a positive nlos_excess_delay_mean_s")

    @property
    def is_los(self) -> bool:
        return self.kind == "InF-LOS"


# Delay spreads grow and the direct path disappears as clutter density rises.
_PROFILE_PRESETS = {
    "InF-LOS": dict(rician_k_db=16.0, rms_delay_spread_s=30e-9, n_clutter_taps=12),
    "InF-NLOS-S": dict(rms_delay_spread_s=60e-9, n_clutter_taps=12,
                       nlos_excess_delay_mean_s=50e-9),
    "InF-NLOS-D": dict(rms_delay_spread_s=90e-9, n_clutter_taps=12,
                       nlos_excess_delay_mean_s=100e-9),
}


def profile_preset(kind: str, **overrides) -> ScenarioProfile:
    """Profile for ``kind`` with optional field overrides."""
    if kind not in _PROFILE_PRESETS:
        raise ConfigError(f"unknown profile kind {kind!r}")
    params = dict(_PROFILE_PRESETS[kind])
    params.update(overrides)
    return ScenarioProfile(kind=kind, **params)


@dataclass
class ChannelRealization:
    """One drawn tapped-delay-line: (delay_s, complex gain) per tap."""

    taps: list[tuple[float, complex]]
    profile_kind: str
    seed: int

    @property
    def first_tap_delay_s(self) -> float:
        return min(t for t, _ in self.taps)

    @property
    def total_power(self) -> float:
        return float(sum(abs(g) ** 2 for _, g in self.taps))


def make_geometry(gnb_position_m, ue_position_m) -> Geometry:
    geo = Geometry(tuple(float(v) for v in gnb_position_m),
                   tuple(float(v) for v in ue_position_m))
    if geo.true_distance_m <= 0.0:
        raise ValueError("degenerate geometry: gNB and UE positions coincide")
    return geo


def draw_channel(profile: ScenarioProfile, geometry: Geometry, seed: int) -> ChannelRealization:
    """Draw one tapped-delay-line realization.

    LOS: a deterministic real direct tap at the geometric delay plus Rayleigh
    clutter taps at exponentially distributed excess delays, mean powers
    decaying exponentially with excess delay.  The K-factor is enforced
    exactly by rescaling the clutter block.  NLOS: no direct tap; the first
    tap is pushed past the geometric delay by an exponential excess.
    Total tap power is normalized to exactly 1.
    """
    rng = np.random.default_rng(seed)
    tau0 = geometry.true_delay_s

    if profile.is_los and math.isinf(profile.rician_k_db):
        return ChannelRealization([(tau0, 1.0 + 0.0j)], profile.kind, seed)

    n = profile.n_clutter_taps
    if profile.is_los:
        excess = rng.exponential(profile.rms_delay_spread_s, size=n)
        k_lin = 10.0 ** (profile.rician_k_db / 10.0)
        direct_power = k_lin / (k_lin + 1.0)
        clutter_power = 1.0 / (k_lin + 1.0)
    else:
        first = rng.exponential(profile.nlos_excess_delay_mean_s)
        excess = np.concatenate([[first],
                                 first + rng.exponential(profile.rms_delay_spread_s, size=n - 1)])
        direct_power = 0.0
        clutter_power = 1.0

    delays = tau0 + np.sort(excess)
    mean_power = np.exp(-(delays - delays[0]) / profile.rms_delay_spread_s)
    gains = np.sqrt(mean_power / 2.0) * (rng.standard_normal(delays.size)
                                         + 1j * rng.standard_normal(delays.size))
    gains *= np.sqrt(clutter_power / np.sum(np.abs(gains) ** 2))

    taps = []
    if direct_power > 0.0:
        taps.append((tau0, complex(np.sqrt(direct_power))))
    taps.extend((float(t), complex(g)) for t, g in zip(delays, gains))
    return ChannelRealization(taps, profile.kind, seed)


def apply_channel(stream: BasebandStream, channel: ChannelRealization) -> BasebandStream:
    """Convolve the stream with the tapped delay line (length preserved).

    Delays are applied as exp(-j 2 pi (f_c + f) tau) over the stream's DFT,
    so fractional delays are exact on the simulated band.
    """
    x = stream.samples
    n = len(x)
    freqs = np.fft.fftfreq(n, d=1.0 / stream.sample_rate_hz)
    response = np.zeros(n, dtype=np.complex128)
    for tau, gain in channel.taps:
        response += gain * np.exp(-2j * np.pi * (stream.carrier_frequency_hz * tau
                                                 + freqs * tau))
    out = np.fft.ifft(np.fft.fft(x) * response)
    return replace(stream, samples=out)


def add_awgn(stream: BasebandStream, snr_db: float, seed: int) -> BasebandStream:
    """Add circularly symmetric white noise at the given SNR.

    snr_db = +inf is the noiseless sentinel and returns the stream untouched.
    SNR is referenced to the mean power of the incoming samples.
    """
    if math.isinf(snr_db) and snr_db > 0:
        return replace(stream, samples=stream.samples.copy())
    power = float(np.mean(np.abs(stream.samples) ** 2))
    if power == 0.0:
        raise NoSignalError("cannot scale noise against a zero-power signal")
    rng = np.random.default_rng(seed)
    noise_var = power / 10.0 ** (snr_db / 10.0)
    n = len(stream.samples)
    noise = np.sqrt(noise_var / 2.0) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return replace(stream, samples=stream.samples + noise)


def doppler_ppm(speed_m_s: float) -> float:
    """Fractional Doppler shift in parts per million for a radial speed."""
    if speed_m_s < 0:
        raise ValueError("speed must be nonnegative")
    return speed_m_s / SPEED_OF_LIGHT * 1e6


def apply_frequency_offset(stream: BasebandStream, offset_hz: float) -> BasebandStream:
    """Deterministic CFO/Doppler rotation; off by default everywhere."""
    t = np.arange(len(stream.samples)) / stream.sample_rate_hz
    return replace(stream, samples=stream.samples * np.exp(2j * np.pi * offset_hz * t))


def close_in_path_gain(distance_m: float, carrier_frequency_hz: float,
                       exponent: float = 2.0, ref_distance_m: float = 1.0) -> float:
    """Close-in free-space-referenced path gain (linear power).

    Only used when a scenario explicitly enables path-loss weighting, e.g.
    to give two anchors different received powers in differencing setups.
    """
    if distance_m <= 0 or carrier_frequency_hz <= 0:
        raise ValueError("distance and carrier frequency must be positive")
    lam = SPEED_OF_LIGHT / carrier_frequency_hz
    fs_gain = (lam / (4.0 * np.pi * ref_distance_m)) ** 2
    return fs_gain * (ref_distance_m / distance_m) ** exponent
