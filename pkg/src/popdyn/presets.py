"""Built-in queuing game.

Three actions: 1 = self-service, 2 = queue, 3 = skip service (1-based labels).
The cost-sensitive type pays a waiting cost, the contrarian type follows a
rock-paper-scissors pattern with weight ``c`` and the optional avoiding type
picks the least chosen action.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .game import GameSpec, avoid_type

DOMINANCE_TOL = 1e-12


class BadParameters(ValueError):
    pass


def build_queuing_preset(
    rho: float,
    p: float,
    ps: float,
    c: float,
    alpha: Sequence[float],
    include_avoid: bool | None = None,
) -> GameSpec:
    alpha = np.asarray(alpha, dtype=float)
    if include_avoid is None:
        include_avoid = alpha.size == 3
    n = 3 if include_avoid else 2
    if not 0 < rho < 1:
        raise BadParameters("rho must lie in (0, 1)")
    if p < 0 or ps < 0:
        raise BadParameters("p and ps must be nonnegative")
    if c < 1:
        raise BadParameters("c must be at least 1")
    if alpha.size != n:
        raise BadParameters(f"alpha needs {n} entries")
    if np.any(alpha < 0) or abs(alpha.sum() - 1) > 1e-12:
        raise BadParameters("alpha must lie on the simplex")

    cs_U = np.array([[-1.0, 0.0, 0.0], [0.0, -rho, 0.0], [0.0, 0.0, 0.0]])
    cs_d = np.array([0.0, -p, -ps])
    cm_U = np.array([[0.0, -1.0, 1.0], [1.0, 0.0, -c], [-1.0, 1.0, 0.0]])
    cm_d = np.zeros(3)
    # skipping is dominated once queueing costs at most the penalty everywhere
    cs_actions = (0, 1) if abs(p + rho - 1) <= DOMINANCE_TOL and abs(ps - 1) <= DOMINANCE_TOL else (0, 1, 2)

    names = ["cs", "cm"]
    sets = [cs_actions, (0, 1, 2)]
    Us, ds = [cs_U, cm_U], [cs_d, cm_d]
    if include_avoid:
        U, d = avoid_type(3)
        names.append("ac")
        sets.append((0, 1, 2))
        Us.append(U)
        ds.append(d)
    return GameSpec(tuple(names), alpha, tuple(sets), np.array(Us), np.array(ds))
