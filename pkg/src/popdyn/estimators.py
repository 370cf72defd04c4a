"""scikit-learn style wrappers around the analysis pipeline and the simulator."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .analysis import analyze
from .attractors import CYCLE_CAP
from .game import TIE_TOL, GameSpec, drift
from .regions import locate
from .simulator import SimConfig, batch


def _aggregates(X, k: int) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != k:
        raise ValueError(f"expected {k} columns, got {X.shape[1]}")
    return X


class GameAnalyzer(BaseEstimator):
    """Regions, limit candidates, region graph and cycle tests of a game.

    ``fit`` takes a ``GameSpec``. ``predict`` maps aggregates to region ids
    (0 on a border), ``transform`` returns the drift at each aggregate.
    """

    def __init__(self, cycle_cap: int = CYCLE_CAP, reverse_graph: bool = False, tie_tol: float = TIE_TOL):
        self.cycle_cap = cycle_cap
        self.reverse_graph = reverse_graph
        self.tie_tol = tie_tol

    def fit(self, game: GameSpec, y=None):
        if not isinstance(game, GameSpec):
            raise TypeError("fit expects a GameSpec")
        an = analyze(game, self.cycle_cap, self.reverse_graph)
        self.game_ = game
        self.analysis_ = an
        self.regions_ = an.regions
        self.adjacency_ = an.adjacency
        self.attractors_ = an.attractors
        self.mfe_ = an.mfe
        self.rv_graph_ = an.graph
        self.cycle_tests_ = an.cycle_tests
        self.warnings_ = an.warnings
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "regions_")
        X = _aggregates(X, self.game_.n_actions)
        ids = [locate(self.regions_, self.game_, w, self.tie_tol) for w in X]
        return np.array([0 if v is None else v for v in ids], dtype=np.int64)

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "regions_")
        X = _aggregates(X, self.game_.n_actions)
        return np.array([drift(self.game_, w, self.tie_tol) for w in X])

    def report(self, timestamp: bool = True) -> dict:
        from .io import build_report

        check_is_fitted(self, "analysis_")
        return build_report(self.analysis_, timestamp)


class TurnByTurnSimulator(BaseEstimator):
    """Seeded batch of stochastic runs, each classified against the game's limit candidates."""

    def __init__(
        self,
        steps: int = 10**5,
        n_runs: int = 1,
        seed: int = 0,
        initial=None,
        t0: float = 1.0,
        thin: int = 100,
        tol_conv: float = 0.02,
        keep_trajectories: bool = False,
    ):
        self.steps = steps
        self.n_runs = n_runs
        self.seed = seed
        self.initial = initial
        self.t0 = t0
        self.thin = thin
        self.tol_conv = tol_conv
        self.keep_trajectories = keep_trajectories

    def fit(self, game: GameSpec, y=None, analyzer: GameAnalyzer | None = None):
        if analyzer is None:
            analyzer = GameAnalyzer().fit(game)
        check_is_fitted(analyzer, "regions_")
        cfg = SimConfig(self.steps, self.seed, self.initial, self.t0, self.thin)
        res = batch(
            game,
            cfg,
            self.n_runs,
            analyzer.attractors_,
            analyzer.regions_,
            analyzer.rv_graph_,
            self.tol_conv,
            self.keep_trajectories,
        )
        self.attractors_ = analyzer.attractors_
        self.reports_ = res.reports
        self.summary_ = res.summary
        self.trajectories_ = res.trajectories
        self.terminals_ = np.array([r.terminal for r in res.reports])
        return self

    def predict(self, X=None) -> np.ndarray:
        """Classification label of every fitted run."""
        check_is_fitted(self, "reports_")
        return np.array([r.classification for r in self.reports_])
