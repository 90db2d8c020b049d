import numpy as np
import pytest

from gprbtd.errors import DataError
from gprbtd.learn.forest import forest_decision, forest_train
from gprbtd.learn.kde import PrototypeSet
from gprbtd.learn.platt import PlattParams
from gprbtd.learn.serialize import load_model, save_model
from gprbtd.learn.svm import svm_decision, svm_train


class TestSerialize:
    def test_svm_roundtrip(self, rng, tmp_path):
        X = rng.normal(size=(16, 4))
        y = np.array([1, -1] * 8, dtype=float)
        model = svm_train(X, y, gamma=0.4, C=2.0)
        save_model(model, tmp_path / "m.model")
        back = load_model(tmp_path / "m.model")
        probes = rng.normal(size=(10, 4))
        np.testing.assert_array_equal(svm_decision(back, probes), svm_decision(model, probes))
        assert back.gamma == model.gamma and back.C == model.C

    def test_forest_roundtrip(self, rng, tmp_path):
        X = rng.normal(size=(40, 3))
        y = (X[:, 0] > 0).astype(float)
        model = forest_train(X, y, n_trees=7, seed=1)
        save_model(model, tmp_path / "f.model")
        back = load_model(tmp_path / "f.model")
        probes = rng.normal(size=(25, 3))
        np.testing.assert_array_equal(
            forest_decision(back, probes), forest_decision(model, probes)
        )

    def test_prototypes_and_platt_roundtrip(self, rng, tmp_path):
        protos = PrototypeSet(rng.normal(size=(5, 6)), beta=0.37)
        save_model(protos, tmp_path / "p.model")
        back = load_model(tmp_path / "p.model")
        np.testing.assert_array_equal(back.prototypes, protos.prototypes)
        assert back.beta == protos.beta

        platt = PlattParams(-1.25, 0.5)
        save_model(platt, tmp_path / "pl.model")
        assert load_model(tmp_path / "pl.model") == platt

    def test_bad_magic_rejected(self, tmp_path):
        (tmp_path / "junk.model").write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(DataError):
            load_model(tmp_path / "junk.model")
