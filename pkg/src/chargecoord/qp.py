"""Minimum-norm safety filter: min ||u - u_nom||^2 s.t. a_k . u >= b_k.

The decision vector is (u_x, u_y, eta) and there are at most two rows, so the
exact KKT solution is found by enumerating the four active subsets and
projecting u_nom onto each candidate face.  No iterative solver, no
allocations beyond the result object; candidates are accepted only when both
primal feasible (all rows within FEAS_TOL) and dual feasible (multipliers
non-negative).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .params import ConstraintRow

log = logging.getLogger(__name__)

FEAS_TOL = 1e-9
DUAL_TOL = -1e-12
Vec3 = tuple[float, float, float]


class QpInfeasibleError(RuntimeError):
    """No candidate satisfies every row; carries the least-violated certificate."""

    def __init__(self, rows: tuple[ConstraintRow, ...], worst_violation: float):
        self.rows = rows
        self.worst_violation = worst_violation
        super().__init__(
            f"infeasible constraint system (best candidate violates by {worst_violation:.3e})"
        )


@dataclass(frozen=True)
class QpProblem:
    """Nominal input (with eta_nom = 0 by default upstream) and 0-2 rows."""

    u_nom: Vec3
    rows: tuple[ConstraintRow, ...]


@dataclass(frozen=True)
class QpSolution:
    u_star: Vec3
    active_set: tuple[int, ...]
    objective: float


def _dot3(a: Vec3, u: Vec3) -> float:
    return a[0] * u[0] + a[1] * u[1] + a[2] * u[2]


def solve(problem: QpProblem) -> QpSolution:
    """Exact projection of u_nom onto the feasible polyhedron.

    Inactive rows are skipped; all-zero rows (which only arise from guarded
    singular states upstream) are dropped with a warning.  Ties between
    equally optimal candidates go to the smaller active set.
    """
    rows: list[tuple[int, Vec3, float, float]] = []  # (index, a, b, ||a||^2)
    for k, row in enumerate(problem.rows):
        if not row.active:
            continue
        a = row.a
        na2 = a[0] * a[0] + a[1] * a[1] + a[2] * a[2]
        if na2 == 0.0:
            log.warning("dropping degenerate all-zero constraint row %d (b=%g)", k, row.b)
            continue
        if not (math.isfinite(na2) and math.isfinite(row.b)):
            raise ValueError(f"non-finite constraint row {k}: a={a}, b={row.b}")
        rows.append((k, a, row.b, na2))

    un = problem.u_nom
    best: QpSolution | None = None
    worst_violation = math.inf

    def consider(u: Vec3, active: tuple[int, ...]) -> None:
        nonlocal best, worst_violation
        violation = 0.0
        for _, a, b, _ in rows:
            slack = _dot3(a, u) - b
            if -slack > violation:
                violation = -slack
        if violation < worst_violation:
            worst_violation = violation
        if violation > FEAS_TOL:
            return
        obj = (u[0] - un[0]) ** 2 + (u[1] - un[1]) ** 2 + (u[2] - un[2]) ** 2
        if (
            best is None
            or obj < best.objective - 1e-15
            or (abs(obj - best.objective) <= 1e-15 and len(active) < len(best.active_set))
        ):
            best = QpSolution(u_star=u, active_set=active, objective=obj)

    # empty active set
    consider(un, ())

    # single-row projections
    for k, a, b, na2 in rows:
        lam = (b - _dot3(a, un)) / na2
        if lam < DUAL_TOL:
            continue
        consider((un[0] + lam * a[0], un[1] + lam * a[1], un[2] + lam * a[2]), (k,))

    # both rows active: solve the 2x2 Gram system for the multipliers
    if len(rows) == 2:
        (k0, a0, b0, g00), (k1, a1, b1, g11) = rows
        g01 = _dot3(a0, a1)
        det = g00 * g11 - g01 * g01
        if abs(det) > 1e-300:
            r0 = b0 - _dot3(a0, un)
            r1 = b1 - _dot3(a1, un)
            l0 = (g11 * r0 - g01 * r1) / det
            l1 = (g00 * r1 - g01 * r0) / det
            if l0 >= DUAL_TOL and l1 >= DUAL_TOL:
                consider(
                    (
                        un[0] + l0 * a0[0] + l1 * a1[0],
                        un[1] + l0 * a0[1] + l1 * a1[1],
                        un[2] + l0 * a0[2] + l1 * a1[2],
                    ),
                    (k0, k1),
                )

    if best is None:
        raise QpInfeasibleError(problem.rows, worst_violation)
    return best
