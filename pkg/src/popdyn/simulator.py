"""Turn-by-turn stochastic dynamics.

At every step one agent arrives, its type is drawn from ``alpha``, it picks a
best response to the current aggregate (ties broken uniformly) and the
aggregate absorbs the choice with weight ``1 / (t0 + t + 1)``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import digamma

from .attractors import Attractor
from .game import TIE_TOL, CompiledGame, GameSpec, check_aggregate
from .regions import RegionVertex, locate
from .rvgraph import RVGraph

BLOCK = 1 << 15
THREADS_ENV = "POPDYN_THREADS"


def harmonic(t) -> np.ndarray:
    """``H_t = sum_{i <= t} 1/i`` (zero at ``t = 0``)."""
    t = np.asarray(t, dtype=float)
    return np.where(t > 0, digamma(t + 1) + np.euler_gamma, 0.0)


@dataclass
class SimConfig:
    steps: int
    seed: int | np.random.SeedSequence = 0
    initial: Sequence[float] | None = None
    t0: float = 1.0
    thin: int = 100
    tie_tol: float = TIE_TOL


@dataclass
class SimState:
    omega: np.ndarray
    t: int
    counts: np.ndarray
    t0: float = 1.0


@dataclass
class Trajectory:
    steps: int
    sample_steps: np.ndarray
    omega: np.ndarray
    type_drawn: np.ndarray
    action_chosen: np.ndarray
    counts: np.ndarray
    seed: object
    initial: np.ndarray
    t0: float

    @property
    def tau(self) -> np.ndarray:
        return harmonic(self.sample_steps)

    @property
    def terminal(self) -> np.ndarray:
        return self.omega[-1]


def initial_state(game: GameSpec, initial=None, t0: float = 1.0) -> SimState:
    k = game.n_actions
    w = np.full(k, 1.0 / k) if initial is None else check_aggregate(initial, k)
    if t0 <= 0:
        raise ValueError("t0 must be positive")
    return SimState(w.copy(), 0, np.zeros((game.n_types, k), dtype=np.int64), t0)


def step(state: SimState, game: GameSpec, rng: np.random.Generator, tie_tol: float = TIE_TOL) -> SimState:
    """One arrival; returns a new state."""
    cg = CompiledGame(game, tie_tol)
    theta, a = _draw(cg, state.omega.tolist(), float(rng.random()), float(rng.random()))
    gain = 1.0 / (state.t0 + state.t + 1)
    w = state.omega * (1.0 - gain)
    w[a] += gain
    counts = state.counts.copy()
    counts[theta, a] += 1
    return SimState(w, state.t + 1, counts, state.t0)


def _draw(cg: CompiledGame, x: list[float], u_type: float, u_tie: float) -> tuple[int, int]:
    theta = 0
    cum = cg.cum_alpha
    while u_type >= cum[theta]:
        theta += 1
    br = cg.best_set(theta, x)
    return theta, br[0] if len(br) == 1 else br[int(u_tie * len(br))]


def _make_rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def run(game: GameSpec, config: SimConfig) -> Trajectory:
    """Simulate ``config.steps`` arrivals; samples every ``thin`` steps and at the end."""
    if config.steps < 1:
        raise ValueError("steps must be at least 1")
    thin = max(1, int(config.thin))
    st = initial_state(game, config.initial, config.t0)
    cg = CompiledGame(game, config.tie_tol)
    rng = _make_rng(config.seed)
    k = cg.k
    x = st.omega.tolist()
    counts = [[0] * k for _ in range(cg.n)]
    rows = cg.rows
    cum = cg.cum_alpha
    tol = config.tie_tol
    t0 = float(config.t0)
    T = int(config.steps)

    n_samples = T // thin + (1 if T % thin else 0) + 1
    samp_t = np.zeros(n_samples, dtype=np.int64)
    samp_w = np.zeros((n_samples, k))
    samp_th = np.full(n_samples, -1, dtype=np.int64)
    samp_a = np.full(n_samples, -1, dtype=np.int64)
    samp_w[0] = x
    si = 1
    acts = [[r[0] for r in rs] for rs in rows]

    t = 0
    while t < T:
        block = min(BLOCK, T - t)
        draws = rng.random((block, 2)).tolist()
        for u_type, u_tie in draws:
            theta = 0
            while u_type >= cum[theta]:
                theta += 1
            us = []
            for a, row, d in rows[theta]:
                u = d
                for c, xi in zip(row, x):
                    u += c * xi
                us.append(u)
            top = max(us)
            br = [acts[theta][j] for j, u in enumerate(us) if u >= top - tol]
            a = br[0] if len(br) == 1 else br[int(u_tie * len(br))]
            gain = 1.0 / (t0 + t + 1)
            keep = 1.0 - gain
            x = [xi * keep for xi in x]
            x[a] += gain
            counts[theta][a] += 1
            t += 1
            if t % thin == 0 or t == T:
                samp_t[si] = t
                samp_w[si] = x
                samp_th[si] = theta
                samp_a[si] = a
                si += 1
    return Trajectory(
        T,
        samp_t[:si],
        samp_w[:si],
        samp_th[:si],
        samp_a[:si],
        np.array(counts, dtype=np.int64),
        config.seed,
        st.omega,
        t0,
    )


# limits


@dataclass
class LimitReport:
    terminal: np.ndarray
    nearest: int | None
    distance: float
    classification: str  # "converged" | "cyclic-suspect" | "unresolved"
    region_sequence: list[int] = field(default_factory=list)
    lap_cycle: list[int] | None = None
    laps: float = 0.0
    settle: float = math.inf


def region_sequence(
    traj: Trajectory, game: GameSpec, regions: Sequence[RegionVertex], start_step: int = 0, min_run: int = 2
) -> list[int]:
    """Regions visited by the samples after ``start_step``, debounced and compressed."""
    labels = []
    for t, w in zip(traj.sample_steps, traj.omega):
        if t < start_step:
            continue
        v = locate(regions, game, w)
        if v is not None:
            labels.append(v)
    runs: list[list[int]] = []
    for v in labels:
        if runs and runs[-1][0] == v:
            runs[-1][1] += 1
        else:
            runs.append([v, 1])
    out: list[int] = []
    for v, n in runs:
        if n >= min_run and (not out or out[-1] != v):
            out.append(v)
    return out


def count_laps(seq: Sequence[int], cycle: Sequence[int]) -> float:
    """Longest stretch of ``seq`` that follows ``cycle``, measured in laps."""
    nxt = {cycle[i]: cycle[(i + 1) % len(cycle)] for i in range(len(cycle))}
    best = run_len = 0
    for i in range(1, len(seq)):
        if seq[i - 1] in nxt and nxt[seq[i - 1]] == seq[i]:
            run_len += 1
            best = max(best, run_len)
        else:
            run_len = 0
    return best / len(cycle)


def classify_limit(
    traj: Trajectory,
    attractors: Sequence[Attractor],
    tol_conv: float = 0.02,
    game: GameSpec | None = None,
    regions: Sequence[RegionVertex] | None = None,
    graph: RVGraph | None = None,
    window_start: int | None = None,
    min_laps: float = 2.0,
) -> LimitReport:
    """Converged, cyclic-suspect or unresolved.

    Converged needs the terminal point within ``tol_conv`` of an attractor and
    every sample of the last quarter of steps within ``tol_conv / 2`` of the
    terminal point. Cyclic-suspect needs the region sequence after
    ``window_start`` (default ``sqrt(T)``) to follow a cycle of ``graph`` for
    ``min_laps`` laps.
    """
    term = traj.terminal
    nearest, dist = None, math.inf
    for i, att in enumerate(attractors):
        d = float(np.max(np.abs(att.point - term)))
        if d < dist:
            nearest, dist = i, d
    late = traj.sample_steps >= 0.75 * traj.steps
    settle = float(np.max(np.abs(traj.omega[late] - term))) if late.any() else 0.0

    seq: list[int] = []
    lap_cycle, laps = None, 0.0
    if game is not None and regions is not None:
        start = int(math.sqrt(traj.steps)) if window_start is None else window_start
        seq = region_sequence(traj, game, regions, start)
        if graph is not None:
            for cyc in graph.cycles:
                n = count_laps(seq, cyc)
                if n > laps:
                    lap_cycle, laps = list(cyc), n

    if nearest is not None and dist < tol_conv and settle < tol_conv / 2:
        label = "converged"
    elif lap_cycle is not None and laps >= min_laps:
        label = "cyclic-suspect"
    else:
        label = "unresolved"
    return LimitReport(term.copy(), nearest, dist, label, seq, lap_cycle, laps, settle)


# batches


@dataclass
class BatchResult:
    reports: list[LimitReport]
    summary: dict
    trajectories: list[Trajectory] | None = None


def _worker_count(n_runs: int) -> int:
    n = os.cpu_count() or 1
    cap = os.environ.get(THREADS_ENV)
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return max(1, min(n, n_runs))


def _one(args):
    game, config, attractors, regions, graph, tol_conv, keep = args
    traj = run(game, config)
    rep = classify_limit(traj, attractors, tol_conv, game, regions, graph)
    return rep, traj if keep else None


def summarize(reports: Sequence[LimitReport], n_attractors: int) -> dict:
    basins = [0] * n_attractors
    cyclic = unresolved = 0
    for r in reports:
        if r.classification == "converged":
            basins[r.nearest] += 1
        elif r.classification == "cyclic-suspect":
            cyclic += 1
        else:
            unresolved += 1
    return {"runs": len(reports), "basins": basins, "cyclic_suspect": cyclic, "unresolved": unresolved}


def batch(
    game: GameSpec,
    config: SimConfig,
    n_runs: int,
    attractors: Sequence[Attractor] = (),
    regions: Sequence[RegionVertex] | None = None,
    graph: RVGraph | None = None,
    tol_conv: float = 0.02,
    keep_trajectories: bool = False,
) -> BatchResult:
    """Independent runs seeded from children of ``config.seed``."""
    if n_runs < 1:
        raise ValueError("n_runs must be at least 1")
    root = config.seed if isinstance(config.seed, np.random.SeedSequence) else np.random.SeedSequence(config.seed)
    jobs = []
    for child in root.spawn(n_runs):
        cfg = SimConfig(config.steps, child, config.initial, config.t0, config.thin, config.tie_tol)
        jobs.append((game, cfg, list(attractors), regions, graph, tol_conv, keep_trajectories))
    workers = _worker_count(n_runs)
    if workers == 1:
        results = [_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one, jobs))
    reports = [r for r, _ in results]
    trajs = [t for _, t in results] if keep_trajectories else None
    return BatchResult(reports, summarize(reports, len(attractors)), trajs)
