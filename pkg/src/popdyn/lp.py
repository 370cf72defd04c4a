"""Dense two-phase simplex for the small LPs used by the region analysis.

Problems are stated as *maximize* ``objective @ x`` subject to equality rows,
``>=`` rows and per-variable bounds. Bland's rule prevents cycling, which
matters here because the facet LPs are highly degenerate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

PIVOT_TOL = 1e-12
DUST = 1e-14  # treated as exact zero
FEAS_TOL = 1e-9
MAX_VARIABLES = 64
MAX_CONSTRAINTS = 512


class LPError(Exception):
    pass


class DimensionMismatch(LPError, ValueError):
    pass


class NumericalBreakdown(LPError, ArithmeticError):
    pass


@dataclass
class LinearProgram:
    objective: np.ndarray
    eq_constraints: list = field(default_factory=list)
    ineq_constraints: list = field(default_factory=list)
    bounds: list | None = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).ravel()
        m = self.objective.size
        if self.bounds is None:
            self.bounds = [(0.0, np.inf)] * m
        if len(self.bounds) != m:
            raise DimensionMismatch(f"{len(self.bounds)} bounds for {m} variables")
        for lo, hi in self.bounds:
            if lo > hi:
                raise DimensionMismatch(f"bound lo={lo} exceeds hi={hi}")
        for kind in ("eq_constraints", "ineq_constraints"):
            rows = []
            for coef, rhs in getattr(self, kind):
                coef = np.asarray(coef, dtype=float).ravel()
                if coef.size != m:
                    raise DimensionMismatch(f"{kind} row has length {coef.size}, expected {m}")
                rows.append((coef, float(rhs)))
            setattr(self, kind, rows)

    @property
    def n_vars(self) -> int:
        return self.objective.size

    def violation(self, x: np.ndarray) -> float:
        worst = 0.0
        for coef, rhs in self.eq_constraints:
            worst = max(worst, abs(coef @ x - rhs))
        for coef, rhs in self.ineq_constraints:
            worst = max(worst, rhs - coef @ x)
        for xi, (lo, hi) in zip(x, self.bounds):
            worst = max(worst, lo - xi, xi - hi)
        return worst


@dataclass
class LPResult:
    status: str  # "feasible" | "infeasible" | "unbounded"
    x: np.ndarray | None
    objective_value: float | None


def _pivot(T: np.ndarray, basis: list[int], row: int, col: int) -> None:
    T[row] /= T[row, col]
    for r in range(T.shape[0]):
        if r != row and T[r, col] != 0.0:
            T[r] -= T[r, col] * T[row]
    T[np.abs(T) < DUST * 1e-2] = 0.0
    basis[row] = col


def _run_simplex(T: np.ndarray, basis: list[int], allowed: int, max_iter: int) -> str:
    """Maximize the objective held in the last row of ``T`` (stored as ``-c``).

    Columns ``>= allowed`` never enter. Returns "optimal" or "unbounded".
    """
    nrow = T.shape[0] - 1
    for _ in range(max_iter):
        reduced = T[-1, :allowed]
        candidates = np.flatnonzero(reduced < -PIVOT_TOL * 10)
        if candidates.size == 0:
            return "optimal"
        col = int(candidates[0])  # Bland: lowest index
        column = T[:nrow, col]
        positive = column > PIVOT_TOL
        if not positive.any():
            if (column > DUST).any():
                raise NumericalBreakdown("only sub-tolerance pivots available")
            return "unbounded"
        ratios = np.full(nrow, np.inf)
        ratios[positive] = T[:nrow, -1][positive] / column[positive]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + 1e-12 * max(1.0, abs(best)))
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(T, basis, row, col)
    raise NumericalBreakdown("iteration limit reached")


def solve(lp: LinearProgram) -> LPResult:
    m = lp.n_vars
    if m > MAX_VARIABLES or len(lp.eq_constraints) + len(lp.ineq_constraints) > MAX_CONSTRAINTS:
        raise DimensionMismatch("problem exceeds the desk-scale limits")

    # substitute x = shift + M @ y with y >= 0
    cols: list[tuple[int, float]] = []  # (variable, sign) per y column
    shift = np.zeros(m)
    extra_rows: list[tuple[np.ndarray, float, str]] = []
    for i, (lo, hi) in enumerate(lp.bounds):
        if np.isfinite(lo):
            shift[i] = lo
            cols.append((i, 1.0))
            if np.isfinite(hi):
                extra_rows.append((len(cols) - 1, hi - lo, "le"))
        elif np.isfinite(hi):
            shift[i] = hi
            cols.append((i, -1.0))
        else:
            cols.append((i, 1.0))
            cols.append((i, -1.0))
    ny = len(cols)
    M = np.zeros((m, ny))
    for j, (i, s) in enumerate(cols):
        M[i, j] = s

    rows: list[tuple[np.ndarray, float, str]] = []
    for coef, rhs in lp.eq_constraints:
        rows.append((coef @ M, rhs - coef @ shift, "eq"))
    for coef, rhs in lp.ineq_constraints:
        rows.append((coef @ M, rhs - coef @ shift, "ge"))
    for j, ub, kind in extra_rows:
        e = np.zeros(ny)
        e[j] = 1.0
        rows.append((e, ub, kind))

    n_slack = sum(1 for r in rows if r[2] != "eq")
    nr = len(rows)
    ncol = ny + n_slack + nr + 1
    T = np.zeros((nr + 1, ncol))
    s_idx = ny
    for r, (coef, rhs, kind) in enumerate(rows):
        T[r, :ny] = coef
        if kind == "ge":
            T[r, s_idx] = -1.0
            s_idx += 1
        elif kind == "le":
            T[r, s_idx] = 1.0
            s_idx += 1
        T[r, -1] = rhs
        if rhs < 0:
            T[r] *= -1.0
        T[r, ny + n_slack + r] = 1.0
    n_real = ny + n_slack
    basis = list(range(n_real, n_real + nr))
    max_iter = 50 * (ncol + nr) + 1000

    # phase 1: maximize -sum(artificials)
    T[-1, :] = 0.0
    T[-1, n_real:n_real + nr] = 1.0
    for r in range(nr):
        T[-1] -= T[r]
    if nr:
        _run_simplex(T, basis, n_real + nr, max_iter)
    scale = 1.0 + max((abs(r[1]) for r in rows), default=0.0)
    if -T[-1, -1] > FEAS_TOL * scale:
        return LPResult("infeasible", None, None)

    # drive artificials out of the basis, dropping redundant rows
    keep = []
    for r in range(nr):
        if basis[r] >= n_real:
            nz = np.flatnonzero(np.abs(T[r, :n_real]) > PIVOT_TOL)
            if nz.size:
                _pivot(T, basis, r, int(nz[0]))
                keep.append(r)
        else:
            keep.append(r)
    T = np.vstack([T[keep][:, list(range(n_real)) + [ncol - 1]], np.zeros((1, n_real + 1))])
    basis = [basis[r] for r in keep]

    # phase 2
    c = lp.objective @ M
    T[-1, :ny] = -c
    for r, b in enumerate(basis):
        if T[-1, b] != 0.0:
            T[-1] -= T[-1, b] * T[r]
    status = _run_simplex(T, basis, n_real, max_iter)
    if status == "unbounded":
        return LPResult("unbounded", None, None)

    y = np.zeros(n_real)
    for r, b in enumerate(basis):
        y[b] = T[r, -1]
    x = shift + M @ y[:ny]
    viol = lp.violation(x)
    if viol > FEAS_TOL * scale:
        raise NumericalBreakdown(f"solution violates constraints by {viol:.3g}")
    return LPResult("feasible", x, float(lp.objective @ x))


# region-level helpers


@dataclass
class SlackResult:
    nonempty: bool
    witness: np.ndarray | None
    slack: float


def max_slack(
    halfspaces: Sequence[tuple[np.ndarray, float]],
    k: int,
    equalities: Sequence[tuple[np.ndarray, float]] = (),
    closed: Sequence[tuple[np.ndarray, float]] = (),
    interior: bool = False,
    eps: float = FEAS_TOL,
    cap: float = 1.0,
) -> SlackResult:
    """Maximize ``s`` with ``g @ w + o >= s`` for each strict halfspace.

    ``closed`` halfspaces only need ``>= 0`` and ``equalities`` hold exactly.
    With ``interior=True`` every coordinate must also exceed ``s``, which keeps
    the optimizer off the simplex boundary. ``s`` is capped at ``cap``.
    """
    ones = np.ones(k)
    obj = np.zeros(k + 1)
    obj[-1] = 1.0
    eqs = [(np.append(ones, 0.0), 1.0)]
    for g, o in equalities:
        eqs.append((np.append(g, 0.0), -o))
    ineqs = []
    for g, o in halfspaces:
        ineqs.append((np.append(g, -1.0), -o))
    for g, o in closed:
        ineqs.append((np.append(g, 0.0), -o))
    if interior:
        for a in range(k):
            row = np.zeros(k + 1)
            row[a] = 1.0
            row[-1] = -1.0
            ineqs.append((row, 0.0))
    bounds = [(0.0, 1.0)] * k + [(-np.inf, cap)]
    res = solve(LinearProgram(obj, eqs, ineqs, bounds))
    if res.status != "feasible":
        return SlackResult(False, None, -np.inf)
    w = np.clip(res.x[:k], 0.0, 1.0)
    w = w / w.sum()
    s = float(res.x[-1])
    return SlackResult(s > eps, w, s)


def strict_feasible(halfspaces: Sequence[tuple[np.ndarray, float]], k: int, eps: float = FEAS_TOL) -> SlackResult:
    """Is ``{w on the simplex : g @ w + o > 0 for all halfspaces}`` nonempty?"""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return max_slack(halfspaces, k, eps=eps)


def extreme_value(
    direction: np.ndarray,
    k: int,
    equalities: Sequence[tuple[np.ndarray, float]] = (),
    closed: Sequence[tuple[np.ndarray, float]] = (),
    maximize: bool = True,
) -> float | None:
    """Max (or min) of ``direction @ w`` over the closed set on the simplex."""
    sign = 1.0 if maximize else -1.0
    eqs = [(np.ones(k), 1.0)] + [(np.asarray(g, float), -o) for g, o in equalities]
    ineqs = [(np.asarray(g, float), -o) for g, o in closed]
    res = solve(LinearProgram(sign * np.asarray(direction, float), eqs, ineqs, [(0.0, 1.0)] * k))
    if res.status != "feasible":
        return None
    return float(direction @ res.x)
