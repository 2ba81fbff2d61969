"""
Seeded random data for verification trials.

Exact mode draws small Gaussian integers, float mode standard complex
normals. Every function takes a numpy Generator so trials are reproducible.
"""

from typing import List, Sequence, Tuple

import numpy as np

from .assembly import IrregularCurveData, MarkedPoint, RepPoint, complete_relation
from .core import (
    EXACT, ComplexScalar, Matrix, Partition, Pattern, centralizer_contained_in_levi,
)
from .irregular import IrregularType, LeviChain
from .spaces import SpaceModel
from .unfolding import search_parameters

MAX_ATTEMPTS = 200


def random_scalar(rng: np.random.Generator, mode: str, real_bound: int = 3, imag_bound: int = 1) -> ComplexScalar:
    if mode == EXACT:
        re = int(rng.integers(-real_bound, real_bound + 1))
        im = int(rng.integers(-imag_bound, imag_bound + 1))
        return ComplexScalar.of((re, im), EXACT)
    return ComplexScalar.of(complex(rng.normal(), rng.normal()), mode)


def random_lie(rng: np.random.Generator, pattern: Pattern, mode: str) -> Matrix:
    """Random element of the pattern's Lie algebra."""
    zero = ComplexScalar.zero(mode)
    rows = [[random_scalar(rng, mode) if (i, j) in pattern.allowed else zero
             for j in range(pattern.n)] for i in range(pattern.n)]
    return Matrix.from_rows(rows, mode)


def random_group_elem(rng: np.random.Generator, pattern: Pattern, mode: str) -> Matrix:
    """Random invertible element of the pattern's group."""
    if pattern.unipotent:
        return Matrix.identity(pattern.n, mode) + random_lie(rng, pattern, mode)
    for _ in range(MAX_ATTEMPTS):
        g = random_lie(rng, pattern, mode)
        if g.is_invertible():
            return g
    raise RuntimeError(f"Could not draw an invertible element of {pattern.name}")


def random_point(rng: np.random.Generator, model: SpaceModel, mode: str) -> Tuple[Matrix, ...]:
    return tuple(random_group_elem(rng, pattern, mode) for _, pattern in model.slots())


def random_tangent(rng: np.random.Generator, model: SpaceModel, mode: str) -> Tuple[Matrix, ...]:
    return tuple(random_lie(rng, pattern, mode) for _, pattern in model.slots())


def random_partition(rng: np.random.Generator, n: int) -> Partition:
    """Uniform random composition of n."""
    cuts = [i for i in range(1, n) if rng.integers(0, 2)]
    bounds = [0] + cuts + [n]
    return Partition.from_sizes([bounds[k + 1] - bounds[k] for k in range(len(bounds) - 1)])


def coarsen(rng: np.random.Generator, part: Partition) -> Partition:
    """Merge random adjacent blocks."""
    sizes = [part.sizes[0]]
    for s in part.sizes[1:]:
        if rng.integers(0, 2):
            sizes[-1] += s
        else:
            sizes.append(s)
    return Partition.from_sizes(sizes)


def random_chain(rng: np.random.Generator, n: int, r: int, proper: bool = True) -> LeviChain:
    """
    Increasing chain pi_1 <= ... <= pi_r of interval partitions.

    With proper set, pi_r keeps at least two blocks so every level has a
    nontrivial unipotent radical.
    """
    first = random_partition(rng, n)
    if proper and len(first.blocks) < 2:
        first = Partition.discrete(n)
    parts = [first]
    for _ in range(r - 1):
        nxt = coarsen(rng, parts[-1])
        if proper and len(nxt.blocks) < 2:
            nxt = parts[-1]
        parts.append(nxt)
    return LeviChain.from_partitions(parts)


def random_irregular(rng: np.random.Generator, n: int, r: int, mode: str, bound: int = 2) -> IrregularType:
    """Diagonal coefficients with small integer (or normal) entries."""
    diagonals = []
    for _ in range(r):
        if mode == EXACT:
            diagonals.append([int(rng.integers(-bound, bound + 1)) for _ in range(n)])
        else:
            diagonals.append([complex(rng.normal(), rng.normal()) for _ in range(n)])
    return IrregularType.from_diagonals(n, diagonals, mode)


def random_class_rep(rng: np.random.Generator, part: Partition, mode: str) -> Matrix:
    """Block-diagonal h0 whose centralizer lies in the Levi of part."""
    levi = Pattern.levi(part)
    for _ in range(MAX_ATTEMPTS):
        h0 = random_group_elem(rng, levi, mode)
        if centralizer_contained_in_levi(h0, part):
            return h0
    raise RuntimeError(f"Could not draw a class representative for blocks {part.sizes}")


def conjugate_in_levi(rng: np.random.Generator, h0: Matrix, part: Partition) -> Tuple[Matrix, Matrix]:
    """(k, k^-1 h0 k) for random k in the Levi."""
    k = random_group_elem(rng, Pattern.levi(part), h0.mode)
    return k, k.inv() @ h0 @ k


def random_set(rng: np.random.Generator, n: int, size: int, mode: str) -> List[Matrix]:
    return [random_lie(rng, Pattern.general(n), mode) for _ in range(size)]


def random_triangular_set(rng: np.random.Generator, n: int, size: int, mode: str,
                          sizes: Sequence[int] = None) -> List[Matrix]:
    """Matrices sharing the invariant flag of a block upper triangular pattern."""
    part = Partition.from_sizes(sizes) if sizes else Partition.from_sizes([1, n - 1])
    allowed = frozenset((i, j) for i in range(n) for j in range(n) if part.level(i, j) >= 0)
    pattern = Pattern("P+", n, allowed)
    return [random_lie(rng, pattern, mode) for _ in range(size)]


def random_curve_point(rng: np.random.Generator, n: int, genus: int, r: int, mode: str,
                       max_trials: int = 1000, pool_max: int = 13):
    """
    An irregular curve with one pole of order r plus a reserved tame point,
    and an on-fiber representation point of it.

    The pole carries searched unfolding parameters and a class representative
    h0; its h slot is a Levi conjugate of h0. Pole order 0 gives a tame curve.

    Returns:
        (IrregularCurveData, RepPoint)

    Raises:
        SearchExhaustedError: If no parameters are found for the drawn chain
    """
    general = Pattern.general(n)
    handles = tuple((random_group_elem(rng, general, mode), random_group_elem(rng, general, mode))
                    for _ in range(genus))
    if r == 0:
        first = MarkedPoint(n, class_rep=random_group_elem(rng, general, mode))
        curve = IrregularCurveData(genus, (first, MarkedPoint(n)), n)
        slots = (random_group_elem(rng, general, mode), first.class_rep)
        return curve, complete_relation(RepPoint(handles, (slots,)), curve)

    chain = random_chain(rng, n, r)
    h0 = random_class_rep(rng, chain.partitions[0], mode)
    params = search_parameters(chain, h0, rng=rng, max_trials=max_trials, pool_max=pool_max)
    pole = MarkedPoint(n, chain=chain, params=params, class_rep=h0)
    curve = IrregularCurveData(genus, (pole, MarkedPoint(n)), n)

    _, h = conjugate_in_levi(rng, h0, chain.partitions[0])
    slots = list(random_point(rng, pole.model(), mode))
    slots[1] = h
    return curve, complete_relation(RepPoint(handles, (tuple(slots),)), curve)
