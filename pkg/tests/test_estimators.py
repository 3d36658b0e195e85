import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from qdim.estimators import OptimalQuantizer, QuantizationDimensionEstimator
from qdim.measure import discretize, sample
from qdim.quantizer import optimal_quantizer

P = (0.4, 0.35, 0.25)


def test_params_and_clone():
    est = OptimalQuantizer(n_points=5, r=1)
    assert est.get_params() == {"n_points": 5, "r": 1, "boundary": False}
    twin = clone(est).set_params(n_points=7)
    assert twin.n_points == 7 and est.n_points == 5


def test_fit_predict_transform_score():
    X = sample(P, 3000, seed=0)
    est = OptimalQuantizer(n_points=6).fit(X)
    assert est.cluster_centers_.shape == (6, 1)
    assert est.cell_masses_.sum() == pytest.approx(3000)
    D = est.transform(X[:10])
    assert D.shape == (10, 6)
    np.testing.assert_array_equal(est.predict(X[:10]), D.argmin(axis=1))
    assert est.score(X) == pytest.approx(-est.cost_ / 3000)
    again = OptimalQuantizer(n_points=6).fit(X.reshape(-1, 1))
    np.testing.assert_array_equal(again.cluster_centers_, est.cluster_centers_)


def test_sample_weight_equals_repetition():
    X = np.array([0.0, 1.0, 2.0, 4.0])
    w = np.array([1, 3, 1, 2])
    a = OptimalQuantizer(n_points=2).fit(X, sample_weight=w)
    b = OptimalQuantizer(n_points=2).fit(np.repeat(X, w))
    np.testing.assert_allclose(a.cluster_centers_, b.cluster_centers_)


def test_fit_on_discrete_measure_matches_function():
    m = discretize(P, 7)
    est = OptimalQuantizer(n_points=9).fit(m)
    assert est.cost_ == pytest.approx(optimal_quantizer(m, 9, 2).cost)


def test_validation_errors():
    with pytest.raises(NotFittedError):
        OptimalQuantizer().predict([1.0])
    with pytest.raises(ValueError):
        OptimalQuantizer(n_points=0).fit([0.0, 1.0])
    with pytest.raises(ValueError):
        OptimalQuantizer(r=0.5).fit([0.0, 1.0])
    with pytest.raises(ValueError):
        OptimalQuantizer().fit(np.zeros((4, 2)))
    with pytest.raises(ValueError):
        OptimalQuantizer().fit([0.0, np.nan])


def test_dimension_estimator():
    m = discretize(P, 9)
    est = QuantizationDimensionEstimator(r=2, n_grid=(8, 16, 32, 64), chi=0.856).fit(m)
    assert 0.6 < est.slope_ < 1.0
    assert est.gap_ == pytest.approx(abs(est.slope_ - 0.856))
    assert est.diagnostics_.ratio >= 1
    e = est.predict([8, 64])
    assert e[0] > e[1] > 0
    plain = QuantizationDimensionEstimator(n_grid=(8, 16, 32)).fit(m)
    assert not hasattr(plain, "gap_")
