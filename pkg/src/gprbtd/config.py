"""Pipeline configuration: every tunable in one flat, validated namespace.

Config files are flat TOML documents (key = value).  Unknown keys are
rejected so a typo cannot silently fall back to a default.
"""

from __future__ import annotations

import dataclasses
import io
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .errors import ConfigError

__all__ = ["PipelineConfig", "load_config", "dump_config"]


@dataclass
class PipelineConfig:
    # --- shared cube extraction -------------------------------------------
    # Standard prescreener-alarm cube is (full below-ground time, 18, 18);
    # each discriminator crops its own sub-window.
    cube_x: int = 18
    cube_y: int = 18

    # --- preprocessing -----------------------------------------------------
    ground_search_frac: float = 0.25     # fraction of T searched for the ground response
    ground_target_index: int = 2         # common ground index after alignment
    whiten_half_window: int = 15         # down-track half window (full window 31)
    whiten_guard: int = 2
    whiten_eps: float = 1e-6
    hog_time_downsample: int = 2

    # --- F2 prescreener ----------------------------------------------------
    f2_median_len: int = 5               # down-track median filter length
    f2_depth_bin: int = 10               # samples per depth bin
    f2_cfar1d_half: int = 15             # 1-D CFAR half window (full 31)
    f2_cfar1d_guard: int = 5
    f2_cfar2d_half: int = 10             # 2-D CFAR half window (full 21x21)
    f2_cfar2d_guard: int = 5
    f2_smooth_sigma: float = 1.5
    f2_threshold: float = 2.5

    # --- CCY prescreener ---------------------------------------------------
    ccy_omega: int = 3                   # search window for the next chain point
    ccy_gamma: float = 1.0               # amplitude threshold to retain maxima
    ccy_max_arm: int = 5
    ccy_smooth_sigma: float = 1.5
    ccy_threshold: float = 2.0

    # --- prescreener fusion ------------------------------------------------
    merge_proximity_m: float = 0.25
    merge_weight_f2: float = 0.5
    merge_weight_ccy: float = 0.5

    # --- EHD discriminator -------------------------------------------------
    ehd_edge_threshold: float = 10.0
    ehd_window_t: int = 60
    ehd_depth_stride: int = 25
    ehd_depth_count: int = 14
    ehd_neg_per_alarm: int = 5
    ehd_kde_quantile: float = 0.2
    ehd_prototypes: int = 64
    ehd_svm_c: float = 1.0
    ehd_svm_gamma: float = 0.0           # 0 means 1/D

    # --- LG discriminator --------------------------------------------------
    lg_sigma_rho: float = 0.65           # radial spread ratio
    lg_sigma_theta_deg: float = 12.0
    lg_rho_max: float = 0.35             # highest center frequency, cycles/sample
    lg_depth_bins: int = 15
    lg_top_rows: int = 4
    lg_subsample_frac: float = 0.05
    lg_top_confidences: int = 3
    lg_svm_c: float = 1.0
    lg_svm_gamma: float = 0.0            # 0 means 1/D

    # --- gprHOG discriminator ----------------------------------------------
    hog_cube_t: int = 18
    hog_cell: int = 6
    hog_bins: int = 9
    hog_trees: int = 100
    hog_neg_patches: int = 24
    hog_pos_patches: int = 4
    hog_infer_stride: int = 6
    hog_top_stats: int = 12

    # --- SED discriminator -------------------------------------------------
    sed_window_t: int = 50
    sed_patch: int = 15
    sed_cells: int = 3
    sed_edge_threshold: float = 3.0
    sed_lead: int = 5                    # scans above the energy-peak anchor
    sed_depth_stride: int = 25
    sed_depth_count: int = 14
    sed_offset_grid: int = 5             # 5x5 spatial offsets at inference
    sed_top_stats: int = 25
    sed_train_maxima: int = 2
    sed_svm_c: float = 15.0
    sed_svm_gamma: float = 0.001

    # --- MSEK depth estimation ---------------------------------------------
    msek_smooth_len: int = 7

    # --- scoring -----------------------------------------------------------
    halo_m: float = 0.25
    fusion_lane: str = ""                # Platt-fit lane; "" means first lane sorted

    # --- run control ---------------------------------------------------------
    seed: int = 20230
    jobs: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        positive = [
            "whiten_half_window", "f2_median_len", "f2_depth_bin", "f2_cfar1d_half",
            "f2_cfar2d_half", "ccy_omega", "ccy_max_arm", "ehd_window_t",
            "ehd_depth_stride", "ehd_depth_count", "ehd_neg_per_alarm",
            "ehd_prototypes", "lg_depth_bins", "lg_top_rows", "lg_top_confidences",
            "hog_cube_t", "hog_cell", "hog_bins", "hog_trees", "hog_neg_patches",
            "hog_pos_patches", "hog_infer_stride", "hog_top_stats", "sed_window_t",
            "sed_patch", "sed_cells", "sed_lead", "sed_depth_stride",
            "sed_depth_count", "sed_offset_grid", "sed_top_stats",
            "sed_train_maxima", "msek_smooth_len", "cube_x", "cube_y",
            "hog_time_downsample", "jobs",
        ]
        for name in positive:
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        strictly_positive = [
            "whiten_eps", "f2_smooth_sigma", "ccy_gamma", "ccy_smooth_sigma",
            "merge_proximity_m", "halo_m", "ehd_svm_c", "lg_svm_c", "sed_svm_c",
            "sed_svm_gamma", "lg_sigma_rho", "lg_sigma_theta_deg", "lg_rho_max",
            "ehd_edge_threshold", "sed_edge_threshold",
        ]
        for name in strictly_positive:
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)}")
        if not 0 < self.ground_search_frac <= 1:
            raise ConfigError("ground_search_frac must lie in (0, 1]")
        if self.whiten_guard < 0 or self.whiten_guard >= self.whiten_half_window:
            raise ConfigError("whiten_guard must satisfy 0 <= guard < half_window")
        if self.f2_cfar1d_guard < 0 or self.f2_cfar2d_guard < 0:
            raise ConfigError("CFAR guards must be >= 0")
        if not 0 < self.lg_subsample_frac <= 1:
            raise ConfigError("lg_subsample_frac must lie in (0, 1]")
        if not 0 < self.ehd_kde_quantile <= 1:
            raise ConfigError("ehd_kde_quantile must lie in (0, 1]")
        w = self.merge_weight_f2 + self.merge_weight_ccy
        if self.merge_weight_f2 < 0 or self.merge_weight_ccy < 0 or abs(w - 1.0) > 1e-12:
            raise ConfigError("merge weights must be non-negative and sum to 1")
        if self.lg_sigma_rho == 1.0:
            raise ConfigError("lg_sigma_rho must differ from 1 (log of ratio in Gaussian)")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, values: dict) -> "PipelineConfig":
        known = {f.name: f.type for f in dataclasses.fields(cls)}
        unknown = set(values) - set(known)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {}
        for key, val in values.items():
            default = getattr(cls, key)
            if isinstance(default, bool):
                if not isinstance(val, bool):
                    raise ConfigError(f"{key} must be a boolean, got {val!r}")
            elif isinstance(default, int):
                if isinstance(val, bool) or not isinstance(val, int):
                    raise ConfigError(f"{key} must be an integer, got {val!r}")
            elif isinstance(default, float):
                if isinstance(val, bool) or not isinstance(val, (int, float)):
                    raise ConfigError(f"{key} must be a number, got {val!r}")
                val = float(val)
            elif isinstance(default, str):
                if not isinstance(val, str):
                    raise ConfigError(f"{key} must be a string, got {val!r}")
            kwargs[key] = val
        return cls(**kwargs)


def load_config(path) -> PipelineConfig:
    try:
        with open(path, "rb") as fh:
            values = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}")
    return PipelineConfig.from_dict(values)


def dump_config(cfg: PipelineConfig) -> str:
    """Render the config as a flat TOML document."""
    out = io.StringIO()
    for key, val in cfg.to_dict().items():
        if isinstance(val, bool):
            rendered = "true" if val else "false"
        elif isinstance(val, str):
            rendered = '"' + val.replace("\\", "\\\\").replace('"', '\\"') + '"'
        else:
            rendered = repr(val)
        out.write(f"{key} = {rendered}\n")
    return out.getvalue()
