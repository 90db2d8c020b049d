"""Synthetic GPR lane generator: flat ground response with jitter, bipolar
hyperbolic threat signatures, localized clutter blobs, white noise, and the
matching ground-truth table.  The desk-scale stand-in for field data."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .errors import ConfigError, DataError
from .model import DepthCategory, GprVolume, GroundTruthEntry, LaneDataset, Metal, index_to_meters

__all__ = ["SimSpec", "ThreatRender", "load_sim_spec", "synth_lane", "synth_lane_detailed", "synth_lanes"]

# Metal-content draw per depth category, following the documented encounter
# population (no low-metal threats at deep burial).
_METAL_P_STANDARD = ((Metal.METAL, 1441), (Metal.LOW_METAL, 2121), (Metal.NON_METAL, 465))
_METAL_P_DEEP = ((Metal.METAL, 308), (Metal.NON_METAL, 217))


@dataclass
class SimSpec:
    n_lanes: int = 1
    x_channels: int = 24
    y_scans: int = 160
    t_samples: int = 420
    dt: float = 1e-10
    dx: float = 0.05
    dy: float = 0.05
    n_threats: int = 8
    deep_fraction: float = 0.15
    # apex depth below ground, in time samples; deep range must sit strictly
    # below the standard range
    standard_t0_lo: float = 40.0
    standard_t0_hi: float = 140.0
    deep_t0_lo: float = 170.0
    deep_t0_hi: float = 260.0
    snr_db_standard_lo: float = 22.0
    snr_db_standard_hi: float = 30.0
    snr_db_deep_lo: float = 16.0
    snr_db_deep_hi: float = 22.0
    clutter_per_m2: float = 0.4
    clutter_snr_db_lo: float = 8.0
    clutter_snr_db_hi: float = 16.0
    noise_sigma: float = 1.0
    ground_index: int = 28
    ground_jitter: int = 2
    ground_snr_db: float = 38.0
    velocity_m_per_sample: float = 0.01
    aperture_m: float = 0.35
    wavelet_sigma: float = 1.0
    min_separation_m: float = 1.0
    edge_margin_m: float = 0.3
    seed: int = 7

    def __post_init__(self):
        self.validate()

    def validate(self):
        if min(self.n_lanes, self.x_channels, self.y_scans, self.t_samples,
               self.ground_index) < 1:
            raise ConfigError("lane dimensions and ground index must be positive")
        if min(self.dt, self.dx, self.dy, self.velocity_m_per_sample,
               self.wavelet_sigma, self.aperture_m) <= 0:
            raise ConfigError("spacings, velocity, wavelet width, aperture must be > 0")
        if self.n_threats < 0 or self.clutter_per_m2 < 0 or self.noise_sigma < 0:
            raise ConfigError("counts, densities, noise must be >= 0")
        if not 0 <= self.deep_fraction <= 1:
            raise ConfigError("deep_fraction must lie in [0, 1]")
        if not self.standard_t0_lo <= self.standard_t0_hi < self.deep_t0_lo <= self.deep_t0_hi:
            raise ConfigError("deep t0 range must sit strictly below the standard range")
        if self.ground_jitter < 0:
            raise ConfigError("ground_jitter must be >= 0")

    @classmethod
    def from_dict(cls, values: dict) -> "SimSpec":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"unknown simulation spec keys: {sorted(unknown)}")
        kwargs = {}
        for key, val in values.items():
            default = getattr(cls, key)
            if isinstance(default, int):
                if isinstance(val, bool) or not isinstance(val, int):
                    raise ConfigError(f"{key} must be an integer, got {val!r}")
            elif isinstance(default, float) and not isinstance(val, (int, float)):
                raise ConfigError(f"{key} must be a number, got {val!r}")
            kwargs[key] = val
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def load_sim_spec(path) -> SimSpec:
    try:
        with open(path, "rb") as fh:
            values = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"simulation spec not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed simulation spec {path}: {exc}")
    return SimSpec.from_dict(values)


@dataclass(frozen=True)
class ThreatRender:
    """Rendering metadata of one synthetic threat (for geometry checks)."""

    x_m: float
    y_m: float
    t0: float               # apex time below nominal ground, samples
    amplitude: float
    depth_category: DepthCategory


def _wavelet(t: np.ndarray, center: float, sigma: float) -> np.ndarray:
    """Derivative-of-Gaussian pulse, peak magnitude normalized to 1 and
    truncated to zero beyond 8 sigma (tail amplitude ~2e-13)."""
    u = (t - center) / sigma
    return np.where(np.abs(u) < 8.0, -u * np.exp(0.5 * (1.0 - u * u)), 0.0)


def _amp_ref(noise_sigma: float) -> float:
    return noise_sigma if noise_sigma > 0 else 1.0


def _place_threats(spec: SimSpec, rng: np.random.Generator) -> list[tuple[float, float]]:
    lane_x = spec.x_channels * spec.dx
    lane_y = spec.y_scans * spec.dy
    m = spec.edge_margin_m
    if lane_x <= 2 * m or lane_y <= 2 * m:
        raise DataError("lane too small for the placement margin")
    spots: list[tuple[float, float]] = []
    for _ in range(spec.n_threats):
        for _attempt in range(1000):
            x = float(rng.uniform(m, lane_x - m))
            y = float(rng.uniform(m, lane_y - m))
            if all(np.hypot(x - px, y - py) >= spec.min_separation_m for px, py in spots):
                spots.append((x, y))
                break
        else:
            raise DataError(
                f"cannot place {spec.n_threats} threats at least "
                f"{spec.min_separation_m} m apart in a {lane_x:.1f}x{lane_y:.1f} m lane"
            )
    return spots


def synth_lane_detailed(
    spec: SimSpec, lane_index: int = 0
) -> tuple[LaneDataset, list[ThreatRender]]:
    """Render one lane plus the per-threat geometry actually used."""
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, lane_index]))
    T, X, Y = spec.t_samples, spec.x_channels, spec.y_scans
    lane_id = f"lane{lane_index:02d}"
    samples = np.zeros((T, X, Y))
    t_axis = np.arange(T, dtype=np.float64)
    ref = _amp_ref(spec.noise_sigma)

    # Ground reflection with per-position jitter.
    ground_amp = ref * 10.0 ** (spec.ground_snr_db / 20.0)
    jitter = rng.integers(-spec.ground_jitter, spec.ground_jitter + 1, size=(X, Y))
    for j in np.unique(jitter):
        cols = jitter == j
        pulse = ground_amp * _wavelet(t_axis, spec.ground_index + j, spec.wavelet_sigma)
        samples[:, cols] += pulse[:, None]

    # Threats: bipolar hyperbolic wavefronts.
    spots = _place_threats(spec, rng)
    n_deep = int(round(spec.deep_fraction * len(spots)))
    renders = []
    truth = []
    x_pos = index_to_meters(np.arange(X), spec.dx)
    y_pos = index_to_meters(np.arange(Y), spec.dy)
    for k, (x, y) in enumerate(spots):
        deep = k < n_deep
        cat = DepthCategory.DEEP if deep else DepthCategory.STANDARD
        if deep:
            t0 = float(rng.uniform(spec.deep_t0_lo, spec.deep_t0_hi))
            snr = float(rng.uniform(spec.snr_db_deep_lo, spec.snr_db_deep_hi))
        else:
            t0 = float(rng.uniform(spec.standard_t0_lo, spec.standard_t0_hi))
            snr = float(rng.uniform(spec.snr_db_standard_lo, spec.snr_db_standard_hi))
        amp = ref * 10.0 ** (snr / 20.0)
        r = np.hypot(x_pos[:, None] - x, y_pos[None, :] - y)
        footprint = r <= spec.aperture_m
        taper = np.exp(-((r / spec.aperture_m) ** 2) * 2.0)
        tau = spec.ground_index + np.sqrt(t0**2 + (r / spec.velocity_m_per_sample) ** 2)
        fx, fy = np.nonzero(footprint)
        for cx, cy in zip(fx, fy):
            samples[:, cx, cy] += amp * taper[cx, cy] * _wavelet(
                t_axis, tau[cx, cy], spec.wavelet_sigma
            )
        metal_table = _METAL_P_DEEP if deep else _METAL_P_STANDARD
        weights = np.array([w for _, w in metal_table], dtype=np.float64)
        metal = metal_table[rng.choice(len(metal_table), p=weights / weights.sum())][0]
        renders.append(ThreatRender(x, y, t0, amp, cat))
        truth.append(GroundTruthEntry(lane_id, x, y, cat, metal))

    # Clutter: localized blobs with a flat (non-hyperbolic) time response.
    area = X * spec.dx * Y * spec.dy
    n_clutter = int(rng.poisson(spec.clutter_per_m2 * area))
    for _ in range(n_clutter):
        cxm = float(rng.uniform(0, X * spec.dx))
        cym = float(rng.uniform(0, Y * spec.dy))
        depth = float(rng.uniform(spec.standard_t0_lo * 0.5, spec.deep_t0_hi))
        snr = float(rng.uniform(spec.clutter_snr_db_lo, spec.clutter_snr_db_hi))
        amp = ref * 10.0 ** (snr / 20.0)
        sigma_sp = float(rng.uniform(0.04, 0.1))
        r = np.hypot(x_pos[:, None] - cxm, y_pos[None, :] - cym)
        blob = amp * np.exp(-(r**2) / (2 * sigma_sp**2))
        pulse = _wavelet(t_axis, spec.ground_index + depth, spec.wavelet_sigma)
        samples += pulse[:, None, None] * blob[None, :, :]

    if spec.noise_sigma > 0:
        samples += rng.normal(0.0, spec.noise_sigma, size=samples.shape)

    volume = GprVolume(samples, spec.dt, spec.dx, spec.dy)
    return LaneDataset(lane_id, volume, truth), renders


def synth_lane(spec: SimSpec, lane_index: int = 0) -> LaneDataset:
    lane, _ = synth_lane_detailed(spec, lane_index)
    return lane


def synth_lanes(spec: SimSpec) -> list[LaneDataset]:
    return [synth_lane(spec, i) for i in range(spec.n_lanes)]
