"""Two-stage buried-threat detection for vehicle-mounted GPR volumes.

Stage one reduces a lane volume to candidate alarms with two fast
prescreeners (an energy-based one and a concavity-based one, fused).  Stage
two scores a data cube at each alarm with four feature-based discriminators
(edge histograms, log-Gabor energies, oriented-gradient histograms, spatial
edge descriptors) backed by from-scratch classifiers, calibrates and fuses
their statistics, and evaluates everything with halo-scored ROC curves under
lane-based cross-validation.
"""

__version__ = "0.1.0"

from .config import PipelineConfig, dump_config, load_config
from .errors import ConfigError, DataError, GprError, NotTrainedError
from .model import (
    Alarm,
    DataCube,
    DepthCategory,
    GprVolume,
    GroundTruthEntry,
    LaneDataset,
    Metal,
    Source,
    alarm_distance,
    extract_cube,
)
from .simulate import SimSpec, synth_lane, synth_lanes

__all__ = [
    "__version__",
    "PipelineConfig",
    "dump_config",
    "load_config",
    "ConfigError",
    "DataError",
    "GprError",
    "NotTrainedError",
    "Alarm",
    "DataCube",
    "DepthCategory",
    "GprVolume",
    "GroundTruthEntry",
    "LaneDataset",
    "Metal",
    "Source",
    "alarm_distance",
    "extract_cube",
    "SimSpec",
    "synth_lane",
    "synth_lanes",
]
