import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from conftest import queuing2
from popdyn import GameAnalyzer, TurnByTurnSimulator


def test_params_and_clone():
    est = GameAnalyzer(cycle_cap=7, reverse_graph=True)
    assert est.get_params()["cycle_cap"] == 7
    twin = clone(est)
    assert twin.get_params() == est.get_params() and twin is not est
    sim = TurnByTurnSimulator(steps=10, seed=3).set_params(n_runs=2)
    assert clone(sim).get_params()["n_runs"] == 2


def test_not_fitted():
    with pytest.raises(NotFittedError):
        GameAnalyzer().predict([[1 / 3] * 3])
    with pytest.raises(NotFittedError):
        TurnByTurnSimulator().predict()


def test_analyzer_attributes_and_predict():
    est = GameAnalyzer().fit(queuing2(0.8))
    assert len(est.regions_) == 5 and est.rv_graph_.cycles[0] == [1, 2, 3]
    w = np.array([r.witness for r in est.regions_])
    assert est.predict(w).tolist() == [1, 2, 3, 4, 5]
    att = est.attractors_[0].point
    assert est.predict([att])[0] == 0
    with pytest.raises(ValueError):
        est.predict([[0.5, 0.5]])


def test_transform_is_drift():
    est = GameAnalyzer().fit(queuing2(0.2))
    w = est.regions_[0].witness
    assert np.allclose(est.transform([w])[0], est.regions_[0].b - w)


def test_fit_rejects_other_input():
    with pytest.raises(TypeError):
        GameAnalyzer().fit(np.zeros((3, 3)))


def test_simulator_fit_predict():
    g = queuing2(0.5)
    an = GameAnalyzer().fit(g)
    sim = TurnByTurnSimulator(steps=20_000, n_runs=2, seed=1, thin=100).fit(g, analyzer=an)
    labels = sim.predict()
    assert labels.shape == (2,) and sim.terminals_.shape == (2, 3)
    assert sim.summary_["runs"] == 2
    assert "generated_at" not in an.report(timestamp=False)
