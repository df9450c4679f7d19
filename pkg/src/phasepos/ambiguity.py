"""Carrier-range construction: fractions, integer search, widelane, differencing.

Distance maps to phase through d = (N + fraction) * wavelength with
fraction = ((-phase) mod 2 pi) / 2 pi, consistent with the delay =>
negative-phase convention used by the channel and receiver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import SPEED_OF_LIGHT
from .errors import AmbiguityError
from .receiver import wrap_phase

SINGLE = "single"
DOUBLE = "double"


@dataclass(frozen=True)
class CarrierRange:
    """A (possibly unresolved) phase-derived range on one wavelength."""

    wavelength_m: float
    fractional_cycles: float            # in [0, 1)
    integer_cycles: int | None = None
    distance_m: float | None = None     # (N + fraction) * wavelength once resolved

    def resolved(self, integer_cycles: int) -> "CarrierRange":
        d = (integer_cycles + self.fractional_cycles) * self.wavelength_m
        return CarrierRange(self.wavelength_m, self.fractional_cycles, integer_cycles, d)


@dataclass(frozen=True)
class DiffMeasurement:
    kind: str                           # SINGLE or DOUBLE
    value_rad: float
    receivers: tuple[str, str]
    anchors: tuple[str, ...]


def phase_to_fraction(phase_rad: float, frequency_hz: float) -> CarrierRange:
    """Fractional carrier cycles implied by a measured phase.

    A pure delay tau gives phase -2 pi f tau, so the fraction of a cycle
    travelled is (-phase mod 2 pi) / 2 pi.
    """
    if frequency_hz <= 0:
        raise ValueError("frequency must be positive")
    frac = float((-phase_rad) % (2.0 * np.pi)) / (2.0 * np.pi)
    if frac >= 1.0:    # guard the -0.0 / 2 pi edge
        frac -= 1.0
    return CarrierRange(SPEED_OF_LIGHT / frequency_hz, frac)


def ia_search_toa(fraction: CarrierRange, toa_s: float, toa_sigma_s: float,
                  k_sigma: float = 3.0) -> CarrierRange:
    """Resolve the integer ambiguity inside a TOA confidence window.

    Candidates are every integer N with (N + fraction) * wavelength inside
    [c*(toa - k_sigma*sigma), c*(toa + k_sigma*sigma)]; the one whose
    distance lies closest to c*toa wins, ties going to the smaller N.

    Raises:
        AmbiguityError: the window contains no candidate (TOA and phase are
            mutually inconsistent, e.g. under NLOS bias).
    """
    if toa_sigma_s <= 0 or k_sigma <= 0:
        raise ValueError("toa_sigma_s and k_sigma must be positive")
    lam = fraction.wavelength_m
    frac = fraction.fractional_cycles
    d_toa = toa_s * SPEED_OF_LIGHT
    half = k_sigma * toa_sigma_s * SPEED_OF_LIGHT
    lo = max(0.0, d_toa - half)
    hi = d_toa + half
    n_min = max(0, int(np.ceil(lo / lam - frac - 1e-12)))
    n_max = int(np.floor(hi / lam - frac + 1e-12))
    if n_max < n_min:
        raise AmbiguityError(
            f"no integer candidate in [{lo:.3f}, {hi:.3f}] m for wavelength {lam:.4f} m")
    candidates = np.arange(n_min, n_max + 1)
    dists = (candidates + frac) * lam
    best = int(candidates[np.argmin(np.abs(dists - d_toa))])   # argmin takes first on ties
    return fraction.resolved(best)


def virtual_wavelength(lambda1_m: float, lambda2_m: float) -> float:
    """Beat wavelength of two carriers: lambda1*lambda2 / |lambda2 - lambda1|."""
    if lambda1_m <= 0 or lambda2_m <= 0:
        raise ValueError("wavelengths must be positive")
    if lambda1_m == lambda2_m:
        raise ValueError("equal wavelengths have no beat (virtual wavelength diverges)")
    return lambda1_m * lambda2_m / abs(lambda2_m - lambda1_m)


def widelane_resolve(range1: CarrierRange, range2: CarrierRange,
                     coarse_distance_m: float, coarse_sigma_m: float,
                     k_sigma: float = 3.0) -> CarrierRange:
    """Two-carrier widelane resolution refined back to the finer carrier.

    The difference of the two fractional phases lives on the much longer
    beat wavelength, where a coarse TOA-grade distance is enough to fix the
    integer.  The widelane distance then bounds a second integer search on
    the shorter of the two carrier wavelengths within +- lambda_virtual/4.

    Returns the refined CarrierRange on the shorter wavelength.
    """
    lam_v = virtual_wavelength(range1.wavelength_m, range2.wavelength_m)
    fine, coarse = ((range1, range2) if range1.wavelength_m <= range2.wavelength_m
                    else (range2, range1))
    # Higher-frequency fraction minus lower-frequency fraction advances with
    # distance at the beat rate d / lambda_v.
    frac_v = (fine.fractional_cycles - coarse.fractional_cycles) % 1.0
    wide = ia_search_toa(CarrierRange(lam_v, frac_v),
                         coarse_distance_m / SPEED_OF_LIGHT,
                         coarse_sigma_m / SPEED_OF_LIGHT, k_sigma)
    refined = ia_search_toa(fine, wide.distance_m / SPEED_OF_LIGHT,
                            (lam_v / 4.0) / SPEED_OF_LIGHT, 1.0)
    return refined


def single_difference(phase_rx_a_rad: float, phase_rx_b_rad: float,
                      receivers: tuple[str, str] = ("A", "B"),
                      anchor: str = "1") -> DiffMeasurement:
    """Across-receiver difference for one anchor; cancels the anchor clock."""
    value = float(wrap_phase(phase_rx_a_rad - phase_rx_b_rad))
    return DiffMeasurement(SINGLE, value, receivers, (anchor,))


def double_difference(phases_rad: np.ndarray,
                      receivers: tuple[str, str] = ("A", "B"),
                      anchors: tuple[str, str] = ("1", "2")) -> DiffMeasurement:
    """Double difference over a 2x2 phase matrix [receivers x anchors].

    (phi_A1 - phi_A2) - (phi_B1 - phi_B2), wrapped to [-pi, pi).  Any
    receiver- or anchor-common phase offset cancels exactly before the wrap.
    """
    mat = np.asarray(phases_rad, dtype=np.float64)
    if mat.shape != (2, 2):
        raise ValueError(f"phase matrix must be 2x2 [receivers x anchors], got {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise ValueError("phase matrix contains a missing or non-finite entry")
    value = float(wrap_phase((mat[0, 0] - mat[0, 1]) - (mat[1, 0] - mat[1, 1])))
    return DiffMeasurement(DOUBLE, value, receivers, anchors)
