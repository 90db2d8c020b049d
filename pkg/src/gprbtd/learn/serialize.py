"""Versioned binary container for trained models.

Layout: magic ``GPRM``, u32 version, u32 header length, JSON header
(kind, scalar params, array directory), then the arrays' raw little-endian
bytes in directory order.  Lets cross-validation folds resume from disk.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import DataError
from .forest import DecisionTree, ForestModel
from .kde import PrototypeSet
from .platt import PlattParams
from .svm import SvmModel

__all__ = ["save_model", "load_model"]

_MAGIC = b"GPRM"
_VERSION = 1


def _encode(model):
    from ..discriminate import Discriminator

    if isinstance(model, SvmModel):
        return "svm", {"bias": model.bias, "gamma": model.gamma, "C": model.C}, {
            "support_vectors": model.support_vectors,
            "dual_coefs": model.dual_coefs,
        }
    if isinstance(model, ForestModel):
        arrays = {
            "node_counts": np.array([t.feature.size for t in model.trees], dtype=np.int64),
        }
        for name in ("feature", "threshold", "left", "right", "value"):
            parts = [getattr(t, name) for t in model.trees]
            arrays[name] = (
                np.concatenate(parts) if parts else np.empty(0, dtype=np.float64)
            )
        return "forest", {"n_features": model.n_features, "constant": model.constant}, arrays
    if isinstance(model, PrototypeSet):
        return "prototypes", {"beta": model.beta}, {"prototypes": model.prototypes}
    if isinstance(model, PlattParams):
        return "platt", {"A": model.A, "B": model.B}, {}
    if isinstance(model, Discriminator):
        params = {
            "disc_kind": model.kind,
            "provenance_lanes": sorted(model.provenance_lanes),
            "scalars": {},
            "submodels": {},
            "subparams": {},
        }
        arrays = {}
        for name, sub in model.models.items():
            if isinstance(sub, tuple):
                params["scalars"][name] = list(sub)
                continue
            sub_kind, sub_params, sub_arrays = _encode(sub)
            params["submodels"][name] = sub_kind
            params["subparams"][name] = sub_params
            for a_name, arr in sub_arrays.items():
                arrays[f"{name}/{a_name}"] = arr
        return "discriminator", params, arrays
    raise DataError(f"cannot serialize {type(model).__name__}")


def save_model(model, path) -> None:
    kind, params, arrays = _encode(model)
    directory = []
    blobs = []
    for name, arr in arrays.items():
        arr = np.asarray(arr)
        dtype = "<i8" if arr.dtype.kind in "iu" else "<f8"
        blob = arr.astype(dtype).tobytes()
        directory.append([name, list(arr.shape), dtype])
        blobs.append(blob)
    header = json.dumps({"kind": kind, "params": params, "arrays": directory}).encode()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VERSION, len(header)))
        fh.write(header)
        for blob in blobs:
            fh.write(blob)


def _forest_from(params, arrays):
    counts = arrays["node_counts"].astype(np.intp)
    trees = []
    offset = 0
    for n in counts:
        sl = slice(offset, offset + int(n))
        trees.append(
            DecisionTree(
                arrays["feature"][sl].astype(np.intp),
                arrays["threshold"][sl].astype(np.float64),
                arrays["left"][sl].astype(np.intp),
                arrays["right"][sl].astype(np.intp),
                arrays["value"][sl].astype(np.float64),
            )
        )
        offset += int(n)
    return ForestModel(trees, int(params["n_features"]), params["constant"])


def _decode(kind, params, arrays):
    if kind == "svm":
        return SvmModel(
            arrays["support_vectors"], arrays["dual_coefs"],
            float(params["bias"]), float(params["gamma"]), float(params["C"]),
        )
    if kind == "forest":
        return _forest_from(params, arrays)
    if kind == "prototypes":
        return PrototypeSet(arrays["prototypes"], float(params["beta"]))
    if kind == "platt":
        return PlattParams(float(params["A"]), float(params["B"]))
    if kind == "discriminator":
        from ..discriminate import Discriminator

        disc = Discriminator(params["disc_kind"])
        disc.provenance_lanes = set(params["provenance_lanes"])
        for name, val in params["scalars"].items():
            disc.models[name] = tuple(val)
        for name, sub_kind in params["submodels"].items():
            prefix = f"{name}/"
            sub_arrays = {
                k[len(prefix):]: v for k, v in arrays.items() if k.startswith(prefix)
            }
            disc.models[name] = _decode(sub_kind, params["subparams"][name], sub_arrays)
        return disc
    raise DataError(f"unknown model kind {kind!r}")


def load_model(path):
    raw = Path(path).read_bytes()
    if raw[:4] != _MAGIC:
        raise DataError(f"{path} is not a model container")
    version, header_len = struct.unpack("<II", raw[4:12])
    if version != _VERSION:
        raise DataError(f"unsupported model container version {version}")
    header = json.loads(raw[12 : 12 + header_len].decode())
    offset = 12 + header_len
    arrays = {}
    for name, shape, dtype in header["arrays"]:
        count = int(np.prod(shape)) if shape else 1
        itemsize = np.dtype(dtype).itemsize
        arr = np.frombuffer(raw, dtype=dtype, count=count, offset=offset)
        arrays[name] = arr.reshape(shape).copy()
        offset += count * itemsize
    return _decode(header["kind"], header["params"], arrays)
