"""
Triangular Decomposition of Conjugacy Classes

For h_0 in a Levi H with Z_G(h_0) inside H:
- solve_conj_unip: the unique u in U+ with h u' = u^-1 h u
- tau: (h, u, v) -> v^-1 (h u) v, a chart of the G-class of h_0
- tau_form_residual: pullback identity relating the G-class form to the H-class form
"""

from dataclasses import dataclass
from typing import List, Sequence

from .core import (
    InvalidPointError, Jet, Matrix, Partition, Pattern, PreconditionError,
    ad, centralizer_contained_in_levi, left_log, linear_map_matrix, right_log, trace_form, value_of,
)
from .spaces import HALF, ConjClass, FormPair, evaluate_pairs, tangent_jets


@dataclass(frozen=True)
class TriangularChart:
    """Levi partition with a class representative h_0 whose centralizer lies in the Levi."""
    part: Partition
    h0: Matrix

    def __post_init__(self):
        bad = Pattern.levi(self.part).group_violations(self.h0)
        if bad:
            raise InvalidPointError([f"h0: {msg}" for msg in bad])
        if not centralizer_contained_in_levi(self.h0, self.part):
            raise PreconditionError(f"Centralizer of h0 is not contained in the Levi {self.part.sizes}")

    @property
    def upper(self) -> Pattern:
        return Pattern.upper(self.part)

    @property
    def lower(self) -> Pattern:
        return Pattern.lower(self.part)


def _level_entries(part: Partition, level: int) -> List[tuple]:
    n = part.n
    return [(i, j) for i in range(n) for j in range(n) if part.level(i, j) == level]


def _project(x: Matrix, entries: Sequence[tuple]) -> Matrix:
    rows = x.rows()
    keep = set(entries)
    return Matrix.from_rows(
        [[rows[i][j] if (i, j) in keep else 0 for j in range(x.n)] for i in range(x.n)], x.mode
    )


def solve_conj_unip(h: Matrix, u_prime: Matrix, part: Partition) -> Matrix:
    """
    Find the unique u in U+ with h u' = u^-1 h u.

    Writing u = I + X and u' = I + N, the equation reads
    hX - Xh = hN + XhN. Grading by block-superdiagonal level, level l of X
    solves a Sylvester system whose right-hand side only involves levels < l.

    Args:
        h: Block-diagonal element with Z_G(h) inside the Levi of part
        u_prime: Element of U+(part)
        part: Interval partition of the Levi

    Returns:
        u in U+(part)

    Raises:
        InvalidPointError: If u_prime is not in U+ or h is not block diagonal
        PreconditionError: If the Sylvester operator is singular on some level
    """
    upper = Pattern.upper(part)
    bad = [f"u': {m}" for m in upper.group_violations(u_prime)]
    bad += [f"h: {m}" for m in Pattern.levi(part).group_violations(h)]
    if bad:
        raise InvalidPointError(bad)

    mode = h.mode
    n = h.n
    ident = Matrix.identity(n, mode)
    hn = h @ (u_prime - ident)
    x = Matrix.zeros(n, n, mode)
    for level in range(1, part.depth + 1):
        entries = _level_entries(part, level)
        basis = [Matrix.unit(n, i, j, mode) for i, j in entries]
        op = linear_map_matrix(lambda e: h @ e - e @ h, basis, mode)
        if op.rank() < len(basis):
            raise PreconditionError(
                f"Centralizer condition fails: h commutes with a level-{level} element of U+"
            )
        rhs = _project(hn + x @ hn, entries)
        coords = op.solve(Matrix.from_columns([rhs.flat()], mode))
        for (i, j), c in zip(entries, coords.flat()):
            x = x + Matrix.unit(n, i, j, mode) * c
    return ident + x


def tau(chart: TriangularChart, h, u, v):
    """
    v^-1 (h u) v; accepts matrices or jets.

    Raises:
        InvalidPointError: If u is not in U+ or v is not in U-
    """
    bad = [f"u: {m}" for m in chart.upper.group_violations(value_of(u))]
    bad += [f"v: {m}" for m in chart.lower.group_violations(value_of(v))]
    if bad:
        raise InvalidPointError(bad)
    return v.inv() @ (h @ u) @ v


def class_tangent(y: Matrix, dy: Matrix) -> Matrix:
    """
    A chart tangent zeta at C = I of ConjClass(y) with y zeta - zeta y = dy.

    Raises:
        ValueError: If dy is not tangent to the class of y
    """
    mode = y.mode
    basis = [Matrix.unit(y.n, i, j, mode) for i in range(y.n) for j in range(y.n)]
    op = linear_map_matrix(lambda z: y @ z - z @ y, basis, mode)
    coords = op.solve(Matrix.from_columns([dy.flat()], mode))
    return Matrix.from_flat(coords.flat(), y.n, y.n, mode)


def class_form(y: Matrix, zx: Matrix, zy: Matrix):
    """Two-form of the G-class of y at y itself, on chart tangents."""
    return evaluate_pairs(ConjClass(y).one_forms([Jet.from_tangent(Matrix.identity(y.n, y.mode), zx)]),
                          ConjClass(y).one_forms([Jet.from_tangent(Matrix.identity(y.n, y.mode), zy)]),
                          y.mode)


def _chart_jets(chart: TriangularChart, point: Sequence[Matrix], x: Sequence[Matrix]):
    k, u, v = tangent_jets(point, x)
    h = k.inv() @ chart.h0 @ k
    return k, h, u, v


def _rhs_pairs(chart: TriangularChart, k, h, u, v) -> List[FormPair]:
    hu = h @ u
    a = right_log(v)
    pairs = [(HALF, right_log(k), ad(chart.h0, right_log(k)))]
    pairs.append((HALF, a, left_log(hu) + right_log(hu) + ad(value_of(hu), a)))
    return pairs


def tau_form_residual(chart: TriangularChart, point: Sequence[Matrix], x: Sequence[Matrix],
                      y: Sequence[Matrix]):
    """
    tau^* omega_G - [omega_H + 1/2 (dv v^-1, (hu)^-1 d(hu) + d(hu)(hu)^-1 + Ad_hu(dv v^-1))].

    The point is (k, u, v) with h = k^-1 h_0 k; k lives in H, tangents are
    right-logarithmic in each slot.
    """
    k, u, v = point
    bad = [f"k: {m}" for m in Pattern.levi(chart.part).group_violations(k)]
    for name, pattern, t in (("u", chart.upper, x[1]), ("v", chart.lower, x[2]),
                             ("u", chart.upper, y[1]), ("v", chart.lower, y[2])):
        if not pattern.contains_lie(t):
            bad.append(f"tangent {name} is not in {pattern.name}")
    for t in (x[0], y[0]):
        if not Pattern.levi(chart.part).contains_lie(t):
            bad.append("tangent k is not block diagonal")
    if bad:
        raise InvalidPointError(bad)

    jx = _chart_jets(chart, point, x)
    jy = _chart_jets(chart, point, y)
    yx = tau(chart, jx[1], jx[2], jx[3])
    yy = tau(chart, jy[1], jy[2], jy[3])
    target = yx.value
    lhs = class_form(target, class_tangent(target, yx.deriv), class_tangent(target, yy.deriv))
    rhs = evaluate_pairs(_rhs_pairs(chart, *jx), _rhs_pairs(chart, *jy), target.mode)
    return lhs - rhs
