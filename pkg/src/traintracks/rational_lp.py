"""Exact linear programming over the rationals.

A small dense simplex with Bland's rule (so termination is guaranteed) plus
a brute-force vertex enumerator used as an independent oracle in tests.
Everything is a Fraction; there are no tolerances.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

ZERO = Fraction(0)
ONE = Fraction(1)


class ExactLP:
    """max c.x  subject to  A_eq x = b_eq,  A_le x <= b_le,  x >= 0."""

    def __init__(self, num_vars: int):
        self.n = num_vars
        self.eq: List[Tuple[List[Fraction], Fraction]] = []
        self.le: List[Tuple[List[Fraction], Fraction]] = []

    def _row(self, coeffs: Dict[int, Fraction]) -> List[Fraction]:
        row = [ZERO] * self.n
        for j, v in coeffs.items():
            row[j] += Fraction(v)
        return row

    def add_eq(self, coeffs: Dict[int, Fraction], rhs) -> None:
        self.eq.append((self._row(coeffs), Fraction(rhs)))

    def add_le(self, coeffs: Dict[int, Fraction], rhs) -> None:
        self.le.append((self._row(coeffs), Fraction(rhs)))

    # ------------------------------------------------------------------

    def _standard_form(self):
        """Rows over the slack-extended variable vector, with rhs >= 0."""
        n_slack = len(self.le)
        total = self.n + n_slack
        rows = []
        for coeffs, rhs in self.eq:
            row = coeffs + [ZERO] * n_slack
            rows.append((row, rhs))
        for i, (coeffs, rhs) in enumerate(self.le):
            row = coeffs + [ZERO] * n_slack
            row[self.n + i] = ONE
            rows.append((row, rhs))
        fixed = []
        for row, rhs in rows:
            if rhs < 0:
                fixed.append(([-v for v in row], -rhs))
            else:
                fixed.append((row, rhs))
        return fixed, total

    def feasible_point(self) -> Optional[List[Fraction]]:
        """A basic feasible point of the system, or None."""
        sol = self._phase1()
        if sol is None:
            return None
        return sol[: self.n]

    def maximize(self, obj: Dict[int, Fraction]):
        """(optimal value, argument) or None when infeasible.

        The feasible region must be bounded in the objective direction;
        unboundedness raises ValueError.
        """
        start = self._phase1()
        if start is None:
            return None
        tableau, basis, total = self._phase1_tableau_cache
        c = [ZERO] * total
        for j, v in obj.items():
            c[j] = Fraction(v)
        # maximize c.x by minimizing (-c).x
        cost = [-v for v in c]
        m = len(tableau)
        red = [
            cost[j] - sum(cost[basis[i]] * tableau[i][j] for i in range(m))
            for j in range(total)
        ]
        red.append(-sum(cost[basis[i]] * tableau[i][total] for i in range(m)))
        _bland(tableau, basis, red, total)
        x = [ZERO] * total
        for i, bv in enumerate(basis):
            x[bv] = tableau[i][total]
        value = sum(c[j] * x[j] for j in range(total))
        return value, x[: self.n]

    def _phase1(self):
        rows, total = self._standard_form()
        m = len(rows)
        width = total + m  # artificials
        tableau = []
        basis = []
        for i, (row, rhs) in enumerate(rows):
            t = row + [ZERO] * m + [rhs]
            t[total + i] = ONE
            tableau.append(t)
            basis.append(total + i)
        # minimize sum of artificials
        red = [ZERO] * (width + 1)
        for i in range(m):
            for j in range(width):
                red[j] -= tableau[i][j]
            red[width] -= tableau[i][width]
        for j in range(total, width):
            red[j] += ONE
        _bland(tableau, basis, red, width)
        value = -red[width]
        if value != 0:
            return None
        # drive artificials out of the basis where possible
        for i in range(m):
            if basis[i] >= total:
                piv = next((j for j in range(total) if tableau[i][j] != 0), None)
                if piv is not None:
                    _pivot(tableau, basis, i, piv)
        # drop artificial columns (rows with artificial basis are zero rows)
        keep_rows = [i for i in range(m) if basis[i] < total]
        tableau = [
            [tableau[i][j] for j in range(total)] + [tableau[i][width]]
            for i in keep_rows
        ]
        basis = [basis[i] for i in keep_rows]
        self._phase1_tableau_cache = (tableau, basis, total)
        x = [ZERO] * total
        for i, bv in enumerate(basis):
            x[bv] = tableau[i][total]
        return x


def _pivot(tableau, basis, r, c):
    piv = tableau[r][c]
    tableau[r] = [v / piv for v in tableau[r]]
    for i in range(len(tableau)):
        if i != r and tableau[i][c] != 0:
            f = tableau[i][c]
            tableau[i] = [a - f * b for a, b in zip(tableau[i], tableau[r])]
    basis[r] = c


def _bland(tableau, basis, red, width):
    """Minimize with Bland's anticycling rule; mutates tableau in place."""
    m = len(tableau)
    while True:
        enter = next((j for j in range(width) if red[j] < 0), None)
        if enter is None:
            return
        best = None
        for i in range(m):
            if tableau[i][enter] > 0:
                ratio = tableau[i][width] / tableau[i][enter]
                if best is None or ratio < best[0] or (
                    ratio == best[0] and basis[i] < basis[best[1]]
                ):
                    best = (ratio, i)
        if best is None:
            raise ValueError("objective is unbounded")
        r = best[1]
        piv_col = enter
        f = red[piv_col]
        _pivot(tableau, basis, r, piv_col)
        if f != 0:
            for j in range(width + 1):
                red[j] -= f * tableau[r][j]


# ----------------------------------------------------------------------
# independent oracle: brute-force vertex enumeration


def _gauss_solve(rows: List[List[Fraction]], rhs: List[Fraction]):
    """Unique solution of a square-ish system, or None if not unique."""
    n = len(rows[0]) if rows else 0
    aug = [row[:] + [r] for row, r in zip(rows, rhs)]
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(aug)) if aug[i][c] != 0), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        aug[r] = [v / aug[r][c] for v in aug[r]]
        for i in range(len(aug)):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
    for i in range(r, len(aug)):
        if aug[i][n] != 0:
            return None  # inconsistent
    if len(pivots) < n:
        return None  # underdetermined
    x = [ZERO] * n
    for i, c in enumerate(pivots):
        x[c] = aug[i][n]
    return x


def matrix_rank(rows: List[List[Fraction]]) -> int:
    if not rows:
        return 0
    work = [row[:] for row in rows]
    n = len(work[0])
    rank = 0
    for c in range(n):
        piv = next((i for i in range(rank, len(work)) if work[i][c] != 0), None)
        if piv is None:
            continue
        work[rank], work[piv] = work[piv], work[rank]
        work[rank] = [v / work[rank][c] for v in work[rank]]
        for i in range(len(work)):
            if i != rank and work[i][c] != 0:
                f = work[i][c]
                work[i] = [a - f * b for a, b in zip(work[i], work[rank])]
        rank += 1
    return rank


def enumerate_vertices(
    n: int,
    eqs: Sequence[Tuple[List[Fraction], Fraction]],
    ges: Sequence[Tuple[List[Fraction], Fraction]],
) -> List[List[Fraction]]:
    """All vertices of {x : eqs hold, each ge row satisfies a.x >= r}.

    Brute force over tight constraint subsets; intended for systems with at
    most a dozen variables, as an oracle against the simplex.
    """
    eq_rows = [row for row, _ in eqs]
    k = n - matrix_rank(eq_rows)
    vertices = []
    seen = set()
    for subset in combinations(range(len(ges)), k):
        rows = [row for row, _ in eqs] + [ges[i][0] for i in subset]
        rhs = [r for _, r in eqs] + [ges[i][1] for i in subset]
        x = _gauss_solve(rows, rhs)
        if x is None:
            continue
        if all(sum(a * v for a, v in zip(row, x)) >= r for row, r in ges):
            key = tuple(x)
            if key not in seen:
                seen.add(key)
                vertices.append(x)
    return vertices
