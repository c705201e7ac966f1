import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from levyhit.estimator import HittingTimeTail
from levyhit.models import ModelError
from levyhit.oracle import brownian_tail


def test_fit_predict_brownian():
    est = HittingTimeTail(family="stable", params=(2.0,)).fit()
    X = np.array([[1.0, 0.5], [10.0, 2.0]])
    np.testing.assert_allclose(est.predict(X), [brownian_tail(t, x) for t, x in X], rtol=1e-9)
    assert est.alpha_star_ == 2.0
    assert est.constants_.n == 0


def test_params_and_clone():
    est = HittingTimeTail(family="relativistic", params={"alpha": 1.5, "beta": 2.0}, n=1)
    assert est.get_params()["n"] == 1
    c = clone(est)
    assert c.get_params()["family"] == "relativistic"


def test_certify_rows():
    est = HittingTimeTail().fit()
    certs = est.certify([[100.0, 0.1]])
    assert [c.kind for c in certs] == ["theorem", "corollary"]
    assert all(c.holds for c in certs)


def test_errors():
    with pytest.raises(NotFittedError):
        HittingTimeTail().predict([[1.0, 1.0]])
    with pytest.raises(ModelError):
        HittingTimeTail(family="wiener_poisson", params={"c": 3.0}).fit()
    est = HittingTimeTail().fit()
    with pytest.raises(ValueError):
        est.predict([[1.0, 1.0, 1.0]])
    with pytest.raises(ValueError):
        est.predict([[-1.0, 1.0]])
    with pytest.raises(ValueError):
        est.predict([[1.0, 0.0]])
