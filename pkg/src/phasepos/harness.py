"""Monte-Carlo scenario runner, CDF statistics, and result emitters.

Per trial the harness draws one channel realization and measures every
requested method against it: TOA on the conventional waveform, single-window
carrier phase (cp) and swept carrier phase (ccp) on the continuous waveform.
Per-trial seeds are split deterministically from the master seed, so results
are independent of worker count and execution order.
"""

from __future__ import annotations

import dataclasses
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .ambiguity import CarrierRange, ia_search_toa, phase_to_fraction, widelane_resolve
from .channel import (Geometry, add_awgn, apply_channel, draw_channel, make_geometry,
                      profile_preset)
from .constants import SPEED_OF_LIGHT
from .errors import AmbiguityError, ConfigError, NoSignalError
from .receiver import ccp_measure, estimate_toa, extract_phase
from .waveform import (CONTINUOUS, CONVENTIONAL, NumerologyConfig, PrsConfig, ResourceGrid,
                       generate_prs_grid, make_numerology, middle_subcarrier, ofdm_modulate,
                       signed_to_row, tile_grid)

METHODS = ("toa", "cp", "ccp")
IA_MODES = ("oracle", "toa", "widelane")

_PROFILE_OVERRIDE_KEYS = ("rician_k_db", "rms_delay_spread_s", "n_clutter_taps",
                          "nlos_excess_delay_mean_s")


class EmptyResultError(RuntimeError):
    """Every trial failed for the requested method."""


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything one reproducible scenario run depends on."""

    band: str = "FR1"
    profile: str = "InF-LOS"
    snr_db: float = 10.0
    n_trials: int = 200
    methods: tuple[str, ...] = ("toa", "cp", "ccp")
    ambiguity: str = "oracle"
    ccp_sweeps: int = 1000
    ccp_shift: int = 1                    # minimum spacing between swept windows
    n_symbols: int = 128                  # 128 symbols span exactly 137 FFT lengths
    master_seed: int = 20260815
    geometry: Geometry = field(default_factory=lambda: make_geometry(
        (100.0, 100.0, 15.0), (120.0, 100.0, 1.5)))
    comb_size: int = 6
    comb_offset: int = 0
    prs_seed: int = 7
    k_sigma: float = 3.0
    toa_sigma_s: float | None = None      # default: one-sample uniform quantization std
    widelane_second_fc_hz: float | None = None
    profile_overrides: tuple[tuple[str, float], ...] = ()


@dataclass
class TrialResult:
    trial_index: int
    distance_error_m: dict[str, float]
    resolved_integer: dict[str, int | None]
    ia_failure: dict[str, bool]
    no_signal: bool = False


@dataclass
class CdfResult:
    method: str
    abs_errors_m: np.ndarray      # sorted ascending
    cdf: np.ndarray               # i/n for the i-th sorted error
    percentiles: dict[int, float]
    n_failures: int
    n_trials: int


def validate_config(cfg: ScenarioConfig) -> None:
    if cfg.band.upper() not in ("FR1", "FR2"):
        raise ConfigError(f"band must be FR1 or FR2, got {cfg.band!r}")
    if cfg.profile not in ("InF-LOS", "InF-NLOS-S", "InF-NLOS-D"):
        raise ConfigError(f"unknown profile {cfg.profile!r}")
    if cfg.n_trials < 1:
        raise ConfigError("n_trials must be positive")
    if not cfg.methods or any(m not in METHODS for m in cfg.methods):
        raise ConfigError(f"methods must be a nonempty subset of {METHODS}")
    if cfg.ambiguity not in IA_MODES:
        raise ConfigError(f"ambiguity mode must be one of {IA_MODES}")
    if cfg.ambiguity == "widelane" and not cfg.widelane_second_fc_hz:
        raise ConfigError("widelane ambiguity mode needs widelane_second_fc_hz")
    if cfg.ccp_sweeps < 1 or cfg.ccp_shift < 1:
        raise ConfigError("ccp_sweeps and ccp_shift must be positive")
    if cfg.n_symbols < 2:
        raise ConfigError("n_symbols must be at least 2")
    if cfg.toa_sigma_s is not None and cfg.toa_sigma_s <= 0:
        raise ConfigError("toa_sigma_s must be positive")
    for key, _ in cfg.profile_overrides:
        if key not in _PROFILE_OVERRIDE_KEYS:
            raise ConfigError(f"unknown profile override {key!r}")


@dataclass(frozen=True)
class _Assets:
    """Per-scenario immutables shared by every trial."""

    num: NumerologyConfig
    prs: PrsConfig
    grid: ResourceGrid
    tx_conv: object
    tx_cont: object
    subcarrier: int
    ref_symbol: complex
    f_eff_hz: float
    cp_window_start: int
    ccp_start: int
    ccp_stride: int
    toa_sigma_s: float
    num2: NumerologyConfig | None
    tx2_cont: object | None
    f2_eff_hz: float | None


@lru_cache(maxsize=8)
def _build_assets(cfg: ScenarioConfig) -> _Assets:
    num = make_numerology(cfg.band)
    prs = PrsConfig(cfg.comb_size, cfg.comb_offset, cfg.n_symbols, cfg.prs_seed)
    # Block-type reference: one seeded column repeated, so the continuous
    # waveform is a genuine tone set over the whole stream.
    grid = tile_grid(generate_prs_grid(
        PrsConfig(cfg.comb_size, cfg.comb_offset, 1, cfg.prs_seed), num), cfg.n_symbols)
    tx_conv = ofdm_modulate(grid, CONVENTIONAL)
    tx_cont = ofdm_modulate(grid, CONTINUOUS)
    k = middle_subcarrier(prs, num)
    ref = complex(grid.values[signed_to_row(num, k), 0])
    f_eff = num.carrier_frequency_hz + k * num.scs_hz

    # Single-shot window aligned to symbol 1's useful part, clear of the
    # stream head where the circular channel wraps.
    cp_ws = num.symbol_samples + num.n_cp

    # Spread the sweep across the whole received stream: overlapping windows
    # one sample apart share almost all their noise, so the configured shift
    # acts as a minimum spacing and the stride grows to cover the stream.
    length = len(tx_cont.samples)
    ccp_start = num.symbol_samples
    avail = length - num.n_fft - ccp_start
    stride = cfg.ccp_shift
    if cfg.ccp_sweeps > 1:
        stride = max(cfg.ccp_shift, avail // (cfg.ccp_sweeps - 1))

    toa_sigma = cfg.toa_sigma_s
    if toa_sigma is None:
        toa_sigma = 1.0 / (num.sample_rate_hz * np.sqrt(12.0))

    num2 = tx2 = f2_eff = None
    if cfg.widelane_second_fc_hz:
        num2 = dataclasses.replace(num, carrier_frequency_hz=float(cfg.widelane_second_fc_hz))
        tx2 = ofdm_modulate(ResourceGrid(grid.values, num2), CONTINUOUS)
        f2_eff = num2.carrier_frequency_hz + k * num2.scs_hz

    return _Assets(num, prs, grid, tx_conv, tx_cont, k, ref, f_eff, cp_ws,
                   ccp_start, stride, toa_sigma, num2, tx2, f2_eff)


def _trial_seeds(master_seed: int, trial: int) -> np.ndarray:
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(trial,))
    return ss.generate_state(4, dtype=np.uint64)


def _oracle_resolve(fraction: CarrierRange, true_distance_m: float) -> CarrierRange:
    """Inject the integer nearest the truth given the measured fraction.

    Wrap-aware: a fraction that noise pushed past an integer boundary gets
    the neighbouring integer, so oracle-mode errors reflect phase noise only.
    """
    base = int(np.floor(true_distance_m / fraction.wavelength_m))
    cands = [n for n in (base - 1, base, base + 1) if n >= 0]
    best = min(cands, key=lambda n: abs(
        (n + fraction.fractional_cycles) * fraction.wavelength_m - true_distance_m))
    return fraction.resolved(best)


def run_trial(cfg: ScenarioConfig, trial: int) -> TrialResult:
    """One full measurement round against one channel realization."""
    assets = _build_assets(cfg)
    ch_seed, toa_seed, cp_seed, wl_seed = (int(s) for s in _trial_seeds(cfg.master_seed, trial))
    profile = profile_preset(cfg.profile, **dict(cfg.profile_overrides))
    channel = draw_channel(profile, cfg.geometry, ch_seed)
    d_true = cfg.geometry.true_distance_m

    errors: dict[str, float] = {}
    integers: dict[str, int | None] = {}
    failures: dict[str, bool] = {}

    need_toa = "toa" in cfg.methods or cfg.ambiguity in ("toa", "widelane")
    toa = None
    if need_toa:
        rx = add_awgn(apply_channel(assets.tx_conv, channel), cfg.snr_db, toa_seed)
        toa = estimate_toa(rx, assets.tx_conv)
        if "toa" in cfg.methods:
            errors["toa"] = toa.toa_s * SPEED_OF_LIGHT - d_true
            integers["toa"] = None
            failures["toa"] = False

    phase_methods = [m for m in cfg.methods if m in ("cp", "ccp")]
    if phase_methods:
        rx_c = add_awgn(apply_channel(assets.tx_cont, channel), cfg.snr_db, cp_seed)
        rx2 = None
        if cfg.ambiguity == "widelane":
            rx2 = add_awgn(apply_channel(assets.tx2_cont, channel), cfg.snr_db, wl_seed)

        for method in phase_methods:
            if method == "cp":
                meas = extract_phase(rx_c, assets.num, assets.cp_window_start,
                                     assets.subcarrier, assets.ref_symbol)
            else:
                meas = ccp_measure(rx_c, assets.num, assets.subcarrier, cfg.ccp_sweeps,
                                   assets.ccp_stride, assets.ref_symbol, assets.ccp_start)
            frac = phase_to_fraction(meas.phase_rad, assets.f_eff_hz)
            truth = _oracle_resolve(frac, d_true)

            try:
                if cfg.ambiguity == "oracle":
                    resolved = truth
                elif cfg.ambiguity == "toa":
                    resolved = ia_search_toa(frac, toa.toa_s, assets.toa_sigma_s, cfg.k_sigma)
                else:
                    if method == "cp":
                        meas2 = extract_phase(rx2, assets.num2, assets.cp_window_start,
                                              assets.subcarrier, assets.ref_symbol)
                    else:
                        meas2 = ccp_measure(rx2, assets.num2, assets.subcarrier,
                                            cfg.ccp_sweeps, assets.ccp_stride,
                                            assets.ref_symbol, assets.ccp_start)
                    frac2 = phase_to_fraction(meas2.phase_rad, assets.f2_eff_hz)
                    resolved = widelane_resolve(frac, frac2,
                                                toa.toa_s * SPEED_OF_LIGHT,
                                                assets.toa_sigma_s * SPEED_OF_LIGHT,
                                                cfg.k_sigma)
                failed = False
            except AmbiguityError:
                resolved = None
                failed = True

            if resolved is not None and cfg.ambiguity == "widelane":
                # The refined range may sit on the second carrier's wavelength.
                wrap_truth = _oracle_resolve(
                    CarrierRange(resolved.wavelength_m, resolved.fractional_cycles), d_true)
                failed = failed or resolved.integer_cycles != wrap_truth.integer_cycles
            elif resolved is not None and cfg.ambiguity == "toa":
                failed = failed or resolved.integer_cycles != truth.integer_cycles

            errors[method] = (np.nan if resolved is None
                              else resolved.distance_m - d_true)
            integers[method] = None if resolved is None else resolved.integer_cycles
            failures[method] = failed

    return TrialResult(trial, errors, integers, failures)


def run_scenario(cfg: ScenarioConfig, workers: int = 1) -> list[TrialResult]:
    """Run all trials; identical results for any worker count."""
    validate_config(cfg)
    if workers < 1:
        raise ConfigError("workers must be positive")
    trials = range(cfg.n_trials)
    if workers == 1:
        return [run_trial(cfg, t) for t in trials]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_trial, [cfg] * cfg.n_trials, trials, chunksize=8))


def compute_cdf(results: list[TrialResult], method: str) -> CdfResult:
    """Empirical CDF of |distance error| for one method.

    Trials flagged as IA failures (or with no signal) are excluded from the
    curve and reported in ``n_failures``; percentiles use the linear
    interpolation convention.
    """
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}")
    kept = [r.distance_error_m[method] for r in results
            if method in r.distance_error_m and not r.ia_failure.get(method, False)
            and not r.no_signal and np.isfinite(r.distance_error_m[method])]
    n_failures = sum(1 for r in results
                     if method in r.distance_error_m
                     and (r.ia_failure.get(method, False) or r.no_signal))
    if not kept:
        raise EmptyResultError(f"no successful trials for method {method!r}")
    abs_err = np.sort(np.abs(np.asarray(kept, dtype=np.float64)))
    cdf = np.arange(1, abs_err.size + 1) / abs_err.size
    pct = {p: float(np.percentile(abs_err, p)) for p in (50, 67, 90, 95)}
    return CdfResult(method, abs_err, cdf, pct, n_failures, len(results))


def config_to_dict(cfg: ScenarioConfig) -> dict:
    raw = dataclasses.asdict(cfg)
    raw["methods"] = list(cfg.methods)
    raw["geometry"] = {"gnb_position_m": list(cfg.geometry.gnb_position_m),
                       "ue_position_m": list(cfg.geometry.ue_position_m)}
    raw["profile_overrides"] = {k: v for k, v in cfg.profile_overrides}
    return raw


def emit_results(cdfs: list[CdfResult], cfg: ScenarioConfig, path: str,
                 fmt: str = "csv") -> str:
    """Write CDFs to ``path`` as csv or json.  Output is byte-deterministic."""
    if fmt == "csv":
        lines = ["method,abs_error_m,cdf"]
        for c in cdfs:
            lines.extend(f"{c.method},{float(e)!r},{float(p)!r}"
                         for e, p in zip(c.abs_errors_m, c.cdf))
        text = "\n".join(lines) + "\n"
    elif fmt == "json":
        payload = {
            "config": config_to_dict(cfg),
            "master_seed": cfg.master_seed,
            "methods": {
                c.method: {
                    "n_trials": c.n_trials,
                    "ia_failures": c.n_failures,
                    "percentiles": {f"p{p}": v for p, v in c.percentiles.items()},
                    "abs_errors_m": [float(e) for e in c.abs_errors_m],
                    "cdf": [float(v) for v in c.cdf],
                } for c in cdfs
            },
        }
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        raise ConfigError(f"unknown output format {fmt!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path


_CONFIG_KEYS = {f.name for f in dataclasses.fields(ScenarioConfig)}


def config_from_dict(raw: dict) -> ScenarioConfig:
    """Build a validated ScenarioConfig from parsed key/value text."""
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs = dict(raw)
    try:
        if "methods" in kwargs:
            kwargs["methods"] = tuple(kwargs["methods"])
        if "geometry" in kwargs:
            g = kwargs["geometry"]
            extra = set(g) - {"gnb_position_m", "ue_position_m"}
            if extra:
                raise ConfigError(f"unknown geometry keys: {sorted(extra)}")
            kwargs["geometry"] = make_geometry(g["gnb_position_m"], g["ue_position_m"])
        if "profile_overrides" in kwargs:
            kwargs["profile_overrides"] = tuple(sorted(kwargs["profile_overrides"].items()))
        cfg = ScenarioConfig(**kwargs)
    except (TypeError, ValueError, AttributeError, KeyError) as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    validate_config(cfg)
    return cfg


def load_config(path: str) -> ScenarioConfig:
    """Parse a JSON config file whose keys mirror ScenarioConfig fields."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config file must hold a JSON object")
    return config_from_dict(raw)
