"""Multi-type population games with affine utilities.

Actions are indexed ``0..k-1`` throughout the Python API. Files and reports
use 1-based action labels (see :mod:`popdyn.io`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

TIE_TOL = 1e-12
SIMPLEX_TOL = 1e-10


class GameSpecError(ValueError):
    """Invalid game description. ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class ActionNotAvailable(ValueError):
    pass


def check_aggregate(omega, k: int | None = None) -> np.ndarray:
    """Validate a point of the action simplex and clamp round-off.

    Entries within 1e-12 outside ``[0, 1]`` are clipped; the sum must be 1
    within 1e-10.
    """
    w = np.asarray(omega, dtype=float).ravel()
    if k is not None and w.shape[0] != k:
        raise ValueError(f"aggregate has length {w.shape[0]}, expected {k}")
    if not np.all(np.isfinite(w)):
        raise ValueError("aggregate contains non-finite entries")
    if np.any(w < -1e-12) or np.any(w > 1 + 1e-12):
        raise ValueError(f"aggregate entries outside [0, 1]: {w}")
    if abs(w.sum() - 1.0) > SIMPLEX_TOL:
        raise ValueError(f"aggregate sums to {w.sum()!r}, expected 1")
    return np.clip(w, 0.0, 1.0)


@dataclass(frozen=True)
class BorderFun:
    """Affine utility difference ``u_theta(a) - u_theta(a_alt)``."""

    grad: np.ndarray
    offset: float
    theta: int
    a: int
    a_alt: int

    def __call__(self, omega) -> float:
        return float(np.dot(self.grad, omega) + self.offset)

    def values(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points) @ self.grad + self.offset

    def negated(self) -> "BorderFun":
        return BorderFun(-self.grad, -self.offset, self.theta, self.a_alt, self.a)

    @property
    def index(self) -> tuple[int, int, int]:
        return (self.a, self.a_alt, self.theta)


@dataclass(frozen=True)
class GameSpec:
    """A game with ``n`` types over ``k`` actions.

    ``U[theta]`` is ``k x k`` and ``d[theta]`` has length ``k``; the utility of
    action ``a`` for type ``theta`` at aggregate ``omega`` is
    ``U[theta][a] @ omega + d[theta][a]``. Rows for unavailable actions are
    never read.
    """

    type_names: tuple[str, ...]
    alpha: np.ndarray
    action_sets: tuple[tuple[int, ...], ...]
    U: np.ndarray
    d: np.ndarray
    _masks: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        names = tuple(str(s) for s in self.type_names)
        n = len(names)
        if n < 1:
            raise GameSpecError("types", "at least one type is required")
        alpha = np.asarray(self.alpha, dtype=float)
        if alpha.shape != (n,):
            raise GameSpecError("alpha", f"expected {n} entries, got {alpha.size}")
        if np.any(alpha < 0) or not np.all(np.isfinite(alpha)):
            raise GameSpecError("alpha", "entries must be finite and nonnegative")
        if abs(alpha.sum() - 1.0) > 1e-12:
            raise GameSpecError("alpha", f"entries sum to {float(alpha.sum())!r}, not 1")
        if len(self.action_sets) != n:
            raise GameSpecError("actions", f"expected {n} action lists")
        sets = []
        for i, acts in enumerate(self.action_sets):
            acts = tuple(sorted(int(a) for a in acts))
            if not acts:
                raise GameSpecError(f"actions[{i}]", "action set is empty")
            if len(set(acts)) != len(acts):
                raise GameSpecError(f"actions[{i}]", "duplicate actions")
            if acts[0] < 0:
                raise GameSpecError(f"actions[{i}]", f"action {acts[0]} out of range")
            sets.append(acts)
        k = max(a for acts in sets for a in acts) + 1
        used = set(a for acts in sets for a in acts)
        if used != set(range(k)):
            missing = sorted(set(range(k)) - used)
            raise GameSpecError("actions", f"actions {missing} unused (gaps not allowed)")
        U = np.asarray(self.U, dtype=float)
        d = np.asarray(self.d, dtype=float)
        if U.shape != (n, k, k):
            raise GameSpecError("U", f"expected shape {(n, k, k)}, got {U.shape}")
        if d.shape != (n, k):
            raise GameSpecError("d", f"expected shape {(n, k)}, got {d.shape}")
        masks = np.zeros((n, k), dtype=bool)
        for i, acts in enumerate(sets):
            masks[i, list(acts)] = True
            if not np.all(np.isfinite(U[i][masks[i]])) or not np.all(np.isfinite(d[i][masks[i]])):
                raise GameSpecError(f"U[{i}]", "non-finite coefficients")
        # never read rows of unavailable actions
        U = np.where(masks[:, :, None], U, 0.0)
        d = np.where(masks, d, 0.0)
        U.setflags(write=False)
        d.setflags(write=False)
        alpha.setflags(write=False)
        masks.setflags(write=False)
        object.__setattr__(self, "type_names", names)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "action_sets", tuple(sets))
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "_masks", masks)

    @property
    def n_types(self) -> int:
        return len(self.type_names)

    @property
    def n_actions(self) -> int:
        return self.U.shape[1]

    def utilities(self, theta: int, omega) -> np.ndarray:
        """Utilities of all actions for ``theta``; unavailable ones are ``-inf``."""
        u = self.U[theta] @ np.asarray(omega, dtype=float) + self.d[theta]
        return np.where(self._masks[theta], u, -np.inf)

    def same_as(self, other: "GameSpec") -> bool:
        return (
            self.type_names == other.type_names
            and self.action_sets == other.action_sets
            and np.array_equal(self.alpha, other.alpha)
            and np.array_equal(self.U, other.U)
            and np.array_equal(self.d, other.d)
        )


def utility(game: GameSpec, theta: int, a: int, omega) -> float:
    if a not in game.action_sets[theta]:
        raise ActionNotAvailable(f"action {a} not available to type {theta}")
    return float(game.U[theta][a] @ np.asarray(omega, dtype=float) + game.d[theta][a])


def best_response_set(game: GameSpec, theta: int, omega, tie_tol: float = TIE_TOL) -> tuple[int, ...]:
    if tie_tol < 0:
        raise ValueError("tie_tol must be nonnegative")
    u = game.utilities(theta, omega)
    top = u.max()
    return tuple(int(a) for a in np.flatnonzero(u >= top - tie_tol))


def border_functions(game: GameSpec, seed: int = 0) -> list[BorderFun]:
    """All border functions, one per ordered pair of distinct actions per type.

    Each one is checked against the utility difference at three random simplex
    points.
    """
    rng = np.random.default_rng(seed)
    probes = rng.dirichlet(np.ones(game.n_actions), size=3)
    out = []
    for theta, acts in enumerate(game.action_sets):
        for a in acts:
            for b in acts:
                if a == b:
                    continue
                h = make_border(game, theta, a, b)
                for w in probes:
                    diff = utility(game, theta, a, w) - utility(game, theta, b, w)
                    if abs(h(w) - diff) > 1e-12 * max(1.0, abs(diff)):
                        raise ArithmeticError(f"border {h.index} disagrees with utilities")
                out.append(h)
    return out


def make_border(game: GameSpec, theta: int, a: int, a_alt: int) -> BorderFun:
    acts = game.action_sets[theta]
    if a not in acts or a_alt not in acts:
        raise ActionNotAvailable(f"actions {a}, {a_alt} not both available to type {theta}")
    grad = np.array(game.U[theta][a] - game.U[theta][a_alt])
    grad.setflags(write=False)
    return BorderFun(grad, float(game.d[theta][a] - game.d[theta][a_alt]), theta, a, a_alt)


def drift(game: GameSpec, omega, tie_tol: float = TIE_TOL) -> np.ndarray:
    """Mean-field drift: the tie-averaged best-response mix minus ``omega``."""
    w = np.asarray(omega, dtype=float)
    target = np.zeros(game.n_actions)
    for theta in range(game.n_types):
        br = best_response_set(game, theta, w, tie_tol)
        target[list(br)] += game.alpha[theta] / len(br)
    return target - w


def profile_target(alpha: Sequence[float], profile: Sequence[int], k: int) -> np.ndarray:
    """Population-weighted action mix when type ``theta`` plays ``profile[theta]``."""
    b = np.zeros(k)
    for weight, a in zip(alpha, profile):
        b[a] += weight
    return b


# behavioral types


def avoid_type(k: int, actions: Sequence[int] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Prefers the least chosen action: ``u(a) = -omega[a]``."""
    U = np.zeros((k, k))
    for a in actions if actions is not None else range(k):
        U[a, a] = -1.0
    return U, np.zeros(k)


def herd_type(k: int, actions: Sequence[int] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Prefers the most chosen action: ``u(a) = omega[a]``."""
    U, d = avoid_type(k, actions)
    return -U, d


def prefer_type(k: int, favourite: int) -> tuple[np.ndarray, np.ndarray]:
    """Always prefers ``favourite``."""
    d = np.zeros(k)
    d[favourite] = 1.0
    return np.zeros((k, k)), d


def make_game(types: Sequence[tuple[str, float, Sequence[int], tuple[np.ndarray, np.ndarray]]]) -> GameSpec:
    """Assemble a game from ``(name, weight, actions, (U, d))`` tuples."""
    return GameSpec(
        type_names=tuple(t[0] for t in types),
        alpha=np.array([t[1] for t in types], dtype=float),
        action_sets=tuple(tuple(t[2]) for t in types),
        U=np.array([t[3][0] for t in types], dtype=float),
        d=np.array([t[3][1] for t in types], dtype=float),
    )


class CompiledGame:
    """Plain-Python view of a game for tight per-step loops."""

    def __init__(self, game: GameSpec, tie_tol: float = TIE_TOL):
        self.k = game.n_actions
        self.n = game.n_types
        self.tie_tol = tie_tol
        self.alpha = [float(a) for a in game.alpha]
        self.rows = [
            [(a, tuple(float(v) for v in game.U[t][a]), float(game.d[t][a])) for a in game.action_sets[t]]
            for t in range(self.n)
        ]
        cum, total = [], 0.0
        for a in self.alpha:
            total += a
            cum.append(total)
        cum[-1] = 1.0
        self.cum_alpha = cum

    def target(self, x) -> list[float]:
        """Tie-averaged best-response mix at ``x``."""
        b = [0.0] * self.k
        for t in range(self.n):
            br = self.best_set(t, x)
            share = self.alpha[t] / len(br)
            for a in br:
                b[a] += share
        return b

    def best_set(self, theta: int, x) -> list[int]:
        us = []
        for a, row, d in self.rows[theta]:
            u = d
            for c, xi in zip(row, x):
                u += c * xi
            us.append((u, a))
        top = max(u for u, _ in us)
        return [a for u, a in us if u >= top - self.tie_tol]

    def profile(self, x) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(self.best_set(t, x)) for t in range(self.n))
