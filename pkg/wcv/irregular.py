"""
Irregular Types and Stokes Data

Handles:
1. Irregular types Q(z) = sum_j Q_j z^-j with diagonal coefficients
2. Singular directions (maximal decay of exp(q_alpha)) and their supporting roots
3. Stokes group bases
4. The Levi chain H_1 c ... c H_r induced by Q, realized by interval partitions
5. The Stokes / unipotent dimension audit

Indices are 0-based throughout the library; reports print them 1-based.
"""

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import core
from .core import EXACT, ComplexScalar, Matrix, Partition, Pattern

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class IrregularType:
    """
    An untwisted irregular type for GL_n.

    coeffs[j - 1] holds the diagonal of Q_j. Trailing zero coefficients are
    stripped on construction, so the pole order r always has Q_r != 0.
    """
    n: int
    coeffs: Tuple[Tuple[ComplexScalar, ...], ...]
    mode: str = EXACT

    def __post_init__(self):
        for j, diag in enumerate(self.coeffs, start=1):
            if len(diag) != self.n:
                raise ValueError(f"Q_{j} has {len(diag)} diagonal entries, expected {self.n}")
            if any(x.mode != self.mode for x in diag):
                raise core.ModeMismatchError(f"Q_{j} entries are not all in {self.mode} mode")
        trimmed = list(self.coeffs)
        while trimmed and all(x.is_zero() for x in trimmed[-1]):
            trimmed.pop()
        object.__setattr__(self, "coeffs", tuple(trimmed))

    @classmethod
    def from_diagonals(cls, n: int, diagonals: Sequence[Sequence], mode: str = EXACT) -> "IrregularType":
        """Build from per-order diagonal entries (numbers, "p/q" strings or (re, im) pairs)."""
        return cls(n, tuple(tuple(ComplexScalar.of(x, mode) for x in d) for d in diagonals), mode)

    @property
    def r(self) -> int:
        return len(self.coeffs)

    def coefficient(self, j: int) -> Matrix:
        """Q_j as a diagonal matrix (1 <= j <= r)."""
        return Matrix.diag(list(self.coeffs[j - 1]), self.mode)

    def permuted(self, perm: Sequence[int]) -> "IrregularType":
        """The type in reordered coordinates: new index a carries old index perm[a]."""
        return IrregularType(self.n, tuple(tuple(d[i] for i in perm) for d in self.coeffs), self.mode)


@dataclass(frozen=True)
class SingularDirection:
    """
    A singular direction d in [0, 2 pi) with the roots supporting it.

    unit is exp(-i d) when it is a Gaussian rational (exact types only).
    """
    angle: float
    roots: Tuple[Tuple[int, int], ...]
    unit: Optional[ComplexScalar] = None

    def matches(self, other: "SingularDirection") -> bool:
        if self.unit is not None and other.unit is not None:
            return self.unit == other.unit
        return _angle_distance(self.angle, other.angle) <= core.TOL.angle


@dataclass(frozen=True)
class LeviChain:
    """
    Interval partitions pi_1 <= ... <= pi_r after reordering indices by perm.

    perm[a] is the original index placed at position a; pi_j is the
    equality pattern of (Q_j, ..., Q_r) in the reordered coordinates.
    """
    perm: Tuple[int, ...]
    partitions: Tuple[Partition, ...]

    def __post_init__(self):
        for j in range(len(self.partitions) - 1):
            if not self.partitions[j].refines(self.partitions[j + 1]):
                raise ValueError(f"Levi chain is not increasing at level {j + 1}")
        if self.partitions and sorted(self.perm) != list(range(self.partitions[0].n)):
            raise ValueError(f"perm {self.perm} is not a permutation of 0..n-1")

    @classmethod
    def from_partitions(cls, partitions: Sequence[Partition]) -> "LeviChain":
        """A chain given directly in interval form (identity reordering)."""
        partitions = tuple(partitions)
        if not partitions:
            raise ValueError("A Levi chain needs at least one partition")
        return cls(tuple(range(partitions[0].n)), partitions)

    @property
    def n(self) -> int:
        return self.partitions[0].n

    @property
    def r(self) -> int:
        return len(self.partitions)

    def permutation_matrix(self, mode: str = EXACT) -> Matrix:
        """P with (P x P^-1)[a, b] = x[perm[a], perm[b]]."""
        n = self.n
        return Matrix.from_rows([[1 if self.perm[a] == b else 0 for b in range(n)] for a in range(n)], mode)


def _angle_distance(a: float, b: float) -> float:
    d = abs(a - b) % TWO_PI
    return min(d, TWO_PI - d)


def _check_root(n: int, root: Tuple[int, int]) -> None:
    k, l = root
    if k == l or not (0 <= k < n and 0 <= l < n):
        raise ValueError(f"Invalid root {root} for n={n}")


def roots(n: int) -> List[Tuple[int, int]]:
    """All ordered pairs (k, l), k != l."""
    return [(k, l) for k in range(n) for l in range(n) if k != l]


def q_alpha(q: IrregularType, root: Tuple[int, int]) -> List[ComplexScalar]:
    """
    Coefficients <alpha, Q_j> = (Q_j)_kk - (Q_j)_ll for j = 1..r.

    Raises:
        ValueError: If the root indices are invalid
    """
    _check_root(q.n, root)
    k, l = root
    return [d[k] - d[l] for d in q.coeffs]


def leading_term(q: IrregularType, root: Tuple[int, int]) -> Optional[Tuple[ComplexScalar, int]]:
    """(leading nonzero coefficient, its order) of q_alpha, or None if q_alpha vanishes."""
    coeffs = q_alpha(q, root)
    for order in range(len(coeffs), 0, -1):
        c = coeffs[order - 1]
        if not c.is_zero():
            return c, order
    return None


def _exact_unit(c: ComplexScalar, order: int, angle: float) -> Optional[ComplexScalar]:
    """exp(-i d) as a Gaussian rational when one is available."""
    if c.mode != EXACT:
        return None
    if order == 1:
        # c * u = -|c| has the solution u = -conj(c) / |c|
        norm2 = c.abs2()
        num, den = math.isqrt(norm2.numerator), math.isqrt(norm2.denominator)
        if num * num == norm2.numerator and den * den == norm2.denominator:
            return -c.conjugate() / Fraction(num, den)
    quarter = angle / (math.pi / 2)
    if abs(quarter - round(quarter)) <= core.TOL.angle:
        return [ComplexScalar.of(x, EXACT) for x in (1, (0, -1), -1, (0, 1))][round(quarter) % 4]
    return None


def _root_directions(q: IrregularType, root: Tuple[int, int]) -> List[SingularDirection]:
    lead = leading_term(q, root)
    if lead is None:
        return []
    c, order = lead
    base = cmath.phase(c.to_complex()) + math.pi
    out = []
    for m in range(order):
        angle = ((base + TWO_PI * m) / order) % TWO_PI
        if TWO_PI - angle <= core.TOL.angle:
            angle = 0.0
        out.append(SingularDirection(angle, (root,), _exact_unit(c, order, angle)))
    return out


def singular_directions(q: IrregularType) -> List[SingularDirection]:
    """
    Singular directions of Q sorted by angle, with merged root supports.

    A root with leading coefficient c of order k supports the k angles d
    with c exp(-i k d) a negative real number; roots with q_alpha = 0
    support nothing.
    """
    merged: List[SingularDirection] = []
    for root in roots(q.n):
        for d in _root_directions(q, root):
            for idx, existing in enumerate(merged):
                if existing.matches(d):
                    merged[idx] = SingularDirection(
                        existing.angle,
                        tuple(sorted(existing.roots + d.roots)),
                        existing.unit if existing.unit is not None else d.unit,
                    )
                    break
            else:
                merged.append(d)
    return sorted(merged, key=lambda d: d.angle)


def _is_nilpotent_support(n: int, support: Sequence[Tuple[int, int]]) -> bool:
    adjacency = np.zeros((n, n), dtype=np.int64)
    for k, l in support:
        adjacency[k, l] = 1
    return not np.any(np.linalg.matrix_power(adjacency, n))


def stokes_pattern(q: IrregularType, d: SingularDirection) -> Pattern:
    """
    Unipotent zero pattern of the Stokes group at d.

    Raises:
        ValueError: If d is not a singular direction of Q
    """
    for known in singular_directions(q):
        if known.matches(d):
            support = known.roots
            break
    else:
        raise ValueError(f"Direction {d.angle:.6f} is not singular for this irregular type")
    if not _is_nilpotent_support(q.n, support):
        raise ValueError(f"Roots {support} do not span a nilpotent subalgebra")
    return Pattern(f"Sto({d.angle:.4f})", q.n, frozenset(support), True)


def stokes_group_basis(q: IrregularType, d: SingularDirection) -> List[Matrix]:
    """Basis {E_kl : (k, l) supports d} of the Stokes Lie algebra."""
    return stokes_pattern(q, d).basis(q.mode)


def equality_labels(diagonals: Sequence[Sequence[ComplexScalar]], n: int) -> List[int]:
    """label[i] = first index whose diagonal tuple equals that of i."""
    keys = [tuple(d[i] for d in diagonals) for i in range(n)]
    labels = []
    for i in range(n):
        for j in range(i + 1):
            if all((a - b).is_zero() for a, b in zip(keys[i], keys[j])):
                labels.append(j)
                break
    return labels


def equality_pattern(diagonals: Sequence[Sequence[ComplexScalar]], n: int, name: str = "H") -> Pattern:
    """Lie algebra of the common centralizer of diagonal matrices (not necessarily interval-shaped)."""
    labels = equality_labels(diagonals, n)
    return Pattern(name, n, frozenset((i, j) for i in range(n) for j in range(n) if labels[i] == labels[j]))


def centralizer_pattern(q: IrregularType) -> Pattern:
    """Pattern of H = Z_G(Q)."""
    return equality_pattern(q.coeffs, q.n, "Z(Q)")


def levi_chain(q: IrregularType) -> LeviChain:
    """
    The Levi chain pi_1 <= ... <= pi_r of Q in interval form.

    Indices are stably sorted by their block labels read from the top
    coefficient down, which makes every equality pattern contiguous.

    Raises:
        ValueError: If Q has pole order 0
    """
    if q.r == 0:
        raise ValueError("levi_chain needs pole order r >= 1")
    labels = [equality_labels(q.coeffs[j:], q.n) for j in range(q.r)]
    perm = sorted(range(q.n), key=lambda i: tuple(labels[j][i] for j in reversed(range(q.r))))
    partitions = []
    for j in range(q.r):
        sizes, prev = [], None
        for i in perm:
            if labels[j][i] != prev:
                sizes.append(0)
                prev = labels[j][i]
            sizes[-1] += 1
        partitions.append(Partition.from_sizes(sizes))
    return LeviChain(tuple(perm), tuple(partitions))


def dimension_audit(q: IrregularType) -> Tuple[int, int]:
    """
    (sum_d dim Sto_d, sum_j (dim U_j+ + dim U_j-)); the two agree.
    """
    sum_stokes = sum(len(d.roots) for d in singular_directions(q))
    if q.r == 0:
        return sum_stokes, 0
    chain = levi_chain(q)
    sum_unipotent = sum(2 * p.unipotent_dim() for p in chain.partitions)
    return sum_stokes, sum_unipotent


def normal_form_residues(q: IrregularType, lambda0: Sequence) -> List[Matrix]:
    """
    Residue terms Lambda_0..Lambda_r of dQ + Lambda_0 dz / z.

    Lambda_j = -j Q_j for j >= 1; lambda0 gives the diagonal of Lambda_0.
    """
    out = [Matrix.diag([ComplexScalar.of(x, q.mode) for x in lambda0], q.mode)]
    for j in range(1, q.r + 1):
        out.append(q.coefficient(j) * (-j))
    return out
