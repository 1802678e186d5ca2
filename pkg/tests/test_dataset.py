import numpy as np
import pytest

from geomasksim.dataset import ChoiceDataset
from geomasksim.geometry import StudyArea


def _ds(**kw):
    base = dict(
        points=np.array([[0.0, 0.0], [0.3, 0.4], [-0.2, 0.1]]),
        facilities=np.array([[0.0, 0.0]]),
        choices=np.array([1, 0, 1]),
        area=StudyArea.unit_square(),
    )
    base.update(kw)
    return ChoiceDataset(**base)


def test_distances_autocomputed():
    ds = _ds()
    np.testing.assert_allclose(ds.distances[:, 0], [0.0, 0.5, np.hypot(0.2, 0.1)], atol=1e-15)
    assert ds.n == 3 and ds.n_facilities == 1


def test_consistent_distances_accepted_inconsistent_rejected():
    good = np.hypot(np.array([0.0, 0.3, -0.2]), np.array([0.0, 0.4, 0.1]))[:, None]
    _ds(distances=good)
    with pytest.raises(ValueError, match="inconsistent"):
        _ds(distances=good + 1e-6)


def test_active_points_switches_with_mask():
    ds = _ds()
    assert ds.active_points is ds.points
    masked = ds.points + 0.01
    dm = ds.with_masked_points(masked)
    assert dm.active_points is dm.masked_points
    # distances recomputed from the masked coordinates
    np.testing.assert_array_equal(dm.distances[:, 0], np.hypot(masked[:, 0], masked[:, 1]))
    # true distances still recoverable
    np.testing.assert_array_equal(dm.true_distances, ds.distances)
    # original untouched
    assert ds.masked_points is None


def test_choice_validation():
    with pytest.raises(ValueError, match="0 or 1"):
        _ds(choices=np.array([0, 1, 2]))
    with pytest.raises(ValueError, match="shape"):
        _ds(choices=np.array([0, 1]))


def test_shape_validation():
    with pytest.raises(ValueError):
        _ds(points=np.zeros((0, 2)))
    with pytest.raises(ValueError):
        _ds(points=np.zeros((3, 3)))
    with pytest.raises(ValueError, match="masked_points"):
        _ds(masked_points=np.zeros((2, 2)))


def test_nonfinite_rejected():
    pts = np.array([[0.0, 0.0], [np.nan, 0.4], [-0.2, 0.1]])
    with pytest.raises(ValueError, match="finite"):
        _ds(points=pts)


def test_has_both_choice_values():
    assert _ds().has_both_choice_values()
    assert not _ds(choices=np.array([1, 1, 1])).has_both_choice_values()
    assert not _ds(choices=np.array([0, 0, 0])).has_both_choice_values()


def test_dtype_coercion():
    ds = _ds(choices=np.array([1.0, 0.0, 1.0]))
    assert ds.choices.dtype == np.int64
    assert ds.points.dtype == np.float64
