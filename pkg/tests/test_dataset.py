import io

import numpy as np
import pytest

from overfit_lab.dataset import Dataset, dump_csv, load_csv


def test_gap_conventions():
    ds = Dataset(x=np.array([0.2, 0.5, 0.9]), y=np.array([1.0, 2.0, 0.0]))
    assert ds.gaps == pytest.approx([0.2, 0.3, 0.4, 0.1])
    assert abs(ds.gaps.sum() - 1.0) <= 1e-12


def test_secant_conventions():
    ds = Dataset(x=np.array([0.0, 0.5, 1.0]), y=np.array([0.0, 1.0, 1.0]))
    assert ds.secants == pytest.approx([2.0, 0.0])
    assert ds.secants_padded == pytest.approx([2.0, 2.0, 0.0, 0.0])


def test_rejects_bad_inputs():
    with pytest.raises(ValueError):
        Dataset(x=np.array([0.1, 0.1, 0.2]), y=np.zeros(3))
    with pytest.raises(ValueError):
        Dataset(x=np.array([0.3, 0.2]), y=np.zeros(2))
    with pytest.raises(ValueError):
        Dataset(x=np.array([0.5]), y=np.array([1.0]))
    with pytest.raises(ValueError):
        Dataset(x=np.array([-0.1, 0.5]), y=np.zeros(2))
    with pytest.raises(ValueError):
        Dataset(x=np.array([0.1, np.nan]), y=np.zeros(2))


def test_arrays_are_frozen():
    ds = Dataset(x=np.array([0.1, 0.9]), y=np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        ds.x[0] = 0.5


def test_csv_roundtrip_with_header():
    ds = Dataset(x=np.array([0.125, 0.625]), y=np.array([1.0 / 3.0, -2.5]))
    buf = io.StringIO()
    dump_csv(ds, buf)
    buf.seek(0)
    loaded = load_csv(buf)
    assert np.array_equal(loaded.x, ds.x)
    assert np.array_equal(loaded.y, ds.y)


def test_csv_without_header_and_sorting():
    text = "0.9,2.0\n0.1,1.0\n"
    loaded = load_csv(io.StringIO(text))
    assert loaded.x == pytest.approx([0.1, 0.9])
    assert loaded.y == pytest.approx([1.0, 2.0])


def test_csv_errors():
    with pytest.raises(ValueError):
        load_csv(io.StringIO(""))
    with pytest.raises(ValueError):
        load_csv(io.StringIO("x,y\n"))
    with pytest.raises(ValueError):
        load_csv(io.StringIO("0.5\n"))
