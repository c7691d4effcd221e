import numpy as np
import pytest

from lightcone.paths import SamplePath


def test_invariants():
    with pytest.raises(ValueError):
        SamplePath(t0=0.0, dt=0.0, values=np.ones(3))
    with pytest.raises(ValueError):
        SamplePath(t0=0.0, dt=0.1, values=np.empty(0))
    p = SamplePath(t0=1.0, dt=0.5, values=np.arange(4.0))
    assert p.duration == pytest.approx(1.5)
    assert p.times[0] == 1.0 and p.times[-1] == 2.5


def test_csv_roundtrip(tmp_path):
    p = SamplePath(t0=0.0, dt=0.25, values=np.array([0.0, 1.5, -2.25, 3.125]))
    f = tmp_path / "p.csv"
    p.to_csv(f)
    q = SamplePath.from_csv(f)
    np.testing.assert_allclose(q.values, p.values)
    assert q.dt == pytest.approx(p.dt)


def test_binary_roundtrip(tmp_path):
    p = SamplePath(t0=0.5, dt=0.125, values=np.linspace(-1, 1, 9),
                   meta={"delta": 1.5, "seed": 7, "brownian": np.zeros(9)})
    f = tmp_path / "p.bin"
    p.to_binary(f)
    q = SamplePath.from_binary(f)
    np.testing.assert_array_equal(q.values, p.values)
    assert q.meta["delta"] == 1.5
    assert "brownian" not in q.meta     # arrays stay out of the sidecar
