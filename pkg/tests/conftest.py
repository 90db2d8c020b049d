import numpy as np
import pytest

from gprbtd.model import Alarm, GprVolume, Source


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_volume(samples, dt=1e-10, dx=0.05, dy=0.05, ground_index=None):
    return GprVolume(np.asarray(samples, dtype=np.float64), dt, dx, dy, ground_index)


def make_alarm(lane_id="lane00", x_m=0.5, y_m=0.5, statistic=1.0, source=Source.F2):
    return Alarm(lane_id, x_m, y_m, statistic, source)
