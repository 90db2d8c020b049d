"""Shared data model: GPR volumes, alarms, ground truth, data cubes, lane IO.

Axis convention throughout the package: volume sample arrays are indexed
(t, x, y) = (time/depth, cross-track channel, down-track scan).  Spatial
coordinates are in meters with sample centers at (i + 0.5) * spacing, so a
lane of X channels spans exactly X * dx meters cross-track.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import DataError

__all__ = [
    "Source",
    "DepthCategory",
    "Metal",
    "GprVolume",
    "Alarm",
    "GroundTruthEntry",
    "DataCube",
    "LaneDataset",
    "extract_cube",
    "alarm_distance",
    "meters_to_index",
    "index_to_meters",
    "write_lane",
    "read_lane",
    "write_truth_csv",
    "read_truth_csv",
    "write_alarm_csv",
    "read_alarm_csv",
]


class Source(str, Enum):
    """Which pipeline stage produced an alarm statistic."""

    F2 = "F2"
    CCY = "CCY"
    FUSED_PRESCREEN = "FUSED_PRESCREEN"
    EHD = "EHD"
    LG = "LG"
    GPRHOG = "GPRHOG"
    SED = "SED"
    FUSED_DISC = "FUSED_DISC"


class DepthCategory(str, Enum):
    STANDARD = "standard"
    DEEP = "deep"


class Metal(str, Enum):
    METAL = "metal"
    LOW_METAL = "low_metal"
    NON_METAL = "non_metal"


@dataclass(frozen=True)
class GprVolume:
    """A 3-D block of GPR samples with physical spacings.

    samples: float array shaped (T, X, Y); dt in seconds, dx/dy in meters.
    ground_index is the common ground-response time index once A-scans have
    been aligned; None for raw data.
    """

    samples: np.ndarray
    dt: float
    dx: float
    dy: float
    ground_index: int | None = None

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", s)
        if s.ndim != 3 or min(s.shape) < 1:
            raise DataError(f"volume must be 3-D with positive dims, got shape {s.shape}")
        if not (self.dt > 0 and self.dx > 0 and self.dy > 0):
            raise DataError("dt, dx, dy must all be positive")
        if not np.isfinite(s).all():
            raise DataError("volume contains non-finite samples")
        if self.ground_index is not None and not 0 <= self.ground_index < s.shape[0]:
            raise DataError(f"ground_index {self.ground_index} outside [0, {s.shape[0]})")

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.samples.shape

    def with_samples(self, samples, ground_index=None) -> "GprVolume":
        return GprVolume(samples, self.dt, self.dx, self.dy, ground_index)


@dataclass(frozen=True)
class Alarm:
    """A suspicious spatial location plus its decision statistic."""

    lane_id: str
    x_m: float
    y_m: float
    statistic: float
    source: Source

    def __post_init__(self):
        if not np.isfinite(self.statistic):
            raise DataError("alarm statistic must be finite")


@dataclass(frozen=True)
class GroundTruthEntry:
    """Location and metadata of one buried threat."""

    lane_id: str
    x_m: float
    y_m: float
    depth_category: DepthCategory
    metal: Metal


@dataclass(frozen=True)
class DataCube:
    """Fixed-extent sub-volume centered at an alarm; the discriminator input."""

    samples: np.ndarray
    origin: tuple[int, int, int]

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", s)
        if s.ndim != 3 or min(s.shape) < 1:
            raise DataError("cube must be 3-D with positive extent")
        if not np.isfinite(s).all():
            raise DataError("cube contains non-finite samples")

    @property
    def extent(self) -> tuple[int, int, int]:
        return self.samples.shape


@dataclass
class LaneDataset:
    """One lane's volume, ground truth, and scanned surface area."""

    lane_id: str
    volume: GprVolume
    truth: list[GroundTruthEntry] = field(default_factory=list)
    area_m2: float = 0.0

    def __post_init__(self):
        _, X, Y = self.volume.shape
        expected = X * self.volume.dx * Y * self.volume.dy
        if self.area_m2 == 0.0:
            self.area_m2 = expected
        elif abs(self.area_m2 - expected) > 1e-9 * expected:
            raise DataError(
                f"area_m2 {self.area_m2} inconsistent with lane extent {expected}"
            )


def meters_to_index(coord_m: float, spacing: float, n: int) -> int:
    """Nearest-sample index for a coordinate; sample centers at (i+0.5)*spacing."""
    return int(np.clip(round(coord_m / spacing - 0.5), 0, n - 1))


def index_to_meters(i: int, spacing: float) -> float:
    return (i + 0.5) * spacing


def extract_cube(
    volume: GprVolume,
    alarm: Alarm,
    extent: tuple[int, int, int],
    t_anchor: int,
) -> DataCube:
    """Cut a zero-padded cube from the volume, spatially centered on the alarm.

    The cube starts at time index t_anchor and is centered at the alarm's
    nearest (x, y) sample indices.  Regions falling outside the volume are
    zero-filled.
    """
    T, X, Y = volume.shape
    Tc, Xc, Yc = extent
    if min(extent) < 1:
        raise DataError(f"cube extent must be positive, got {extent}")
    if Tc > 2 * T or Xc > 2 * X or Yc > 2 * Y:
        raise DataError(f"cube extent {extent} larger than twice the volume {volume.shape}")
    if not (0.0 <= alarm.x_m <= X * volume.dx) or not (0.0 <= alarm.y_m <= Y * volume.dy):
        raise DataError(
            f"alarm at ({alarm.x_m}, {alarm.y_m}) outside lane bounds "
            f"({X * volume.dx} x {Y * volume.dy} m)"
        )
    ix = meters_to_index(alarm.x_m, volume.dx, X)
    iy = meters_to_index(alarm.y_m, volume.dy, Y)
    t0 = int(t_anchor)
    x0 = ix - (Xc - 1) // 2
    y0 = iy - (Yc - 1) // 2

    out = np.zeros(extent, dtype=np.float64)
    # Overlap between the requested box and the volume, in both index frames.
    ts, xs, ys = max(t0, 0), max(x0, 0), max(y0, 0)
    te, xe, ye = min(t0 + Tc, T), min(x0 + Xc, X), min(y0 + Yc, Y)
    if ts < te and xs < xe and ys < ye:
        out[ts - t0 : te - t0, xs - x0 : xe - x0, ys - y0 : ye - y0] = volume.samples[
            ts:te, xs:xe, ys:ye
        ]
    return DataCube(out, origin=(t0, x0, y0))


def alarm_distance(a, b) -> float:
    """Euclidean distance in the (x, y) plane; both must lie in the same lane."""
    if a.lane_id != b.lane_id:
        raise DataError(f"distance across lanes {a.lane_id!r} vs {b.lane_id!r}")
    return float(np.hypot(a.x_m - b.x_m, a.y_m - b.y_m))


# ---------------------------------------------------------------------------
# Lane container IO: JSON header + little-endian float32 sidecar (.f32),
# samples serialized t-fastest, then x, then y.
# ---------------------------------------------------------------------------

def write_lane(lane: LaneDataset, header_path) -> None:
    header_path = Path(header_path)
    T, X, Y = lane.volume.shape
    header = {
        "T": T,
        "X": X,
        "Y": Y,
        "dt": lane.volume.dt,
        "dx": lane.volume.dx,
        "dy": lane.volume.dy,
        "lane_id": lane.lane_id,
        "area_m2": lane.area_m2,
    }
    if lane.volume.ground_index is not None:
        header["ground_index"] = lane.volume.ground_index
    header_path.write_text(json.dumps(header, indent=2, sort_keys=True) + "\n")
    raw = lane.volume.samples.astype("<f4").flatten(order="F")
    raw.tofile(header_path.with_suffix(".f32"))


def read_lane(header_path, truth_path=None) -> LaneDataset:
    header_path = Path(header_path)
    header = json.loads(header_path.read_text())
    shape = (header["T"], header["X"], header["Y"])
    raw = np.fromfile(header_path.with_suffix(".f32"), dtype="<f4")
    if raw.size != int(np.prod(shape)):
        raise DataError(
            f"sidecar holds {raw.size} samples, header implies {int(np.prod(shape))}"
        )
    samples = raw.astype(np.float64).reshape(shape, order="F")
    volume = GprVolume(
        samples, header["dt"], header["dx"], header["dy"], header.get("ground_index")
    )
    truth = read_truth_csv(truth_path) if truth_path is not None else []
    truth = [t for t in truth if t.lane_id == header["lane_id"]]
    return LaneDataset(header["lane_id"], volume, truth, header["area_m2"])


def write_truth_csv(entries: list[GroundTruthEntry], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lane_id", "x_m", "y_m", "depth_category", "metal"])
        for e in entries:
            w.writerow([e.lane_id, repr(e.x_m), repr(e.y_m), e.depth_category.value, e.metal.value])


def read_truth_csv(path) -> list[GroundTruthEntry]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(
                GroundTruthEntry(
                    row["lane_id"],
                    float(row["x_m"]),
                    float(row["y_m"]),
                    DepthCategory(row["depth_category"]),
                    Metal(row["metal"]),
                )
            )
    return out


def write_alarm_csv(alarms: list[Alarm], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lane_id", "x_m", "y_m", "statistic", "source"])
        for a in alarms:
            w.writerow([a.lane_id, repr(a.x_m), repr(a.y_m), repr(a.statistic), a.source.value])


def read_alarm_csv(path) -> list[Alarm]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(
                Alarm(
                    row["lane_id"],
                    float(row["x_m"]),
                    float(row["y_m"]),
                    float(row["statistic"]),
                    Source(row["source"]),
                )
            )
    return out
