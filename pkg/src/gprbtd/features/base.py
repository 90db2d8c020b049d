"""Feature vector container shared by all descriptor extractors."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import DataError

__all__ = ["FeatureKind", "FeatureVector", "FIXED_DIMS"]


class FeatureKind(str, Enum):
    EHD_DT = "EHD_DT"
    EHD_CT = "EHD_CT"
    LG = "LG"
    HOG_TX = "HOG_TX"
    HOG_TY = "HOG_TY"
    SED = "SED"


# Dimensions fixed by the descriptor definitions; gprHOG depends on config.
FIXED_DIMS = {
    FeatureKind.EHD_DT: 35,
    FeatureKind.EHD_CT: 35,
    FeatureKind.LG: 144,
    FeatureKind.SED: 36,
}


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    kind: FeatureKind
    anchor: tuple[int, int, int] = field(default=(0, 0, 0))

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).ravel()
        object.__setattr__(self, "values", v)
        if not np.isfinite(v).all():
            raise DataError(f"{self.kind.value} feature contains non-finite values")
        expected = FIXED_DIMS.get(self.kind)
        if expected is not None and v.size != expected:
            raise DataError(
                f"{self.kind.value} feature must have {expected} values, got {v.size}"
            )
