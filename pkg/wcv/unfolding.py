"""
Unfolding Maps

Turns multi-fission data (C, h, u_1, ..., u_2r) into tame data: an M-space
point [C, p] plus class elements M_1..M_r conjugate to parameters t_1..t_r.

Includes:
1. unfold_rank1 / unfold_step / unfold_full (explicit formula) / unfold_composite (iterated steps)
2. Moment and two-form intertwining residuals, etale rank check
3. Unfolded residues of a normal form and their exponentials
4. Seeded rejection sampler for parameters t_1..t_r
"""

import cmath
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .core import (
    FLOAT, ComplexScalar, InvalidPointError, Matrix, Partition, Pattern, PreconditionError,
    SearchExhaustedError, ad, centralizer_contained_in_levi,
    centralizer_equals_levi, centralizer_matches, centralizer_within, deriv_of, is_block_scalar,
    product, right_log, value_of,
)
from .irregular import LeviChain, equality_pattern
from .spaces import (
    ConjClass, MSpace, MultiFission, Fusion, SpacePoint, tangent_jets, two_form, validate_point,
)
from .triangular import class_tangent


@dataclass(frozen=True)
class UnfoldingParams:
    """
    Parameters t_1..t_r for a Levi chain.

    Each t_j is diagonal, scalar on the blocks of pi_j, and has centralizer
    exactly H_j; checked on construction.
    """
    ts: Tuple[Matrix, ...]
    chain: LeviChain

    def __post_init__(self):
        object.__setattr__(self, "ts", tuple(self.ts))
        if len(self.ts) != self.chain.r:
            raise ValueError(f"Expected {self.chain.r} parameters, got {len(self.ts)}")
        for j, (t, part) in enumerate(zip(self.ts, self.chain.partitions), start=1):
            if not is_block_scalar(t, part):
                raise PreconditionError(f"t_{j} is not diagonal and scalar on the blocks {part.sizes}")
            if not centralizer_equals_levi(t, part):
                raise PreconditionError(f"Z_G(t_{j}) differs from the Levi H_{j} with blocks {part.sizes}")

    @property
    def r(self) -> int:
        return len(self.ts)

    @property
    def mode(self) -> str:
        return self.ts[0].mode

    @property
    def partitions(self) -> Tuple[Partition, ...]:
        return self.chain.partitions

    def total(self) -> Matrix:
        """t_1 t_2 ... t_r."""
        return product(self.ts, self.chain.n, self.mode)


@dataclass(frozen=True)
class UnfoldResult:
    """M-space representative (C, p) and class elements M_1..M_r."""
    mpoint: Tuple[Matrix, Matrix]
    ms: Tuple[Matrix, ...]


def _check_source(partitions: Sequence[Partition], point: Sequence) -> None:
    validate_point(MultiFission(partitions), [value_of(g) for g in point])


def unfold_rank1(t: Matrix, point: Sequence, part: Partition):
    """
    (C, h, u, v) -> ([C, h t^-1 v], C^-1 v^-1 t u v C).

    Raises:
        PreconditionError: If Z_G(t) is not the Levi of part
        InvalidPointError: If the point is not in the rank-1 fission space
    """
    if not centralizer_equals_levi(t, part):
        raise PreconditionError(f"Z_G(t) differs from the Levi with blocks {part.sizes}")
    _check_source((part,), point)
    c, h, u, v = point
    return (c, h @ t.inv() @ v), c.inv() @ v.inv() @ t @ u @ v @ c


def unfold_step(t: Matrix, point: Sequence, partitions: Sequence[Partition]):
    """
    One induction step removing the top level of the chain.

    For r >= 2 returns ((C, k, v_1, ..., v_2r-2), M) with k = h t^-1,
    v_i = t u_i t^-1 (i <= 2r-3), v_2r-2 = t u_2r-2 t^-1 u_2r and
    M = C^-1 u_2r^-1 t u_2r-1 u_2r C. For r = 1 the last U- factor is
    absorbed and the first component is the M-space representative.

    Raises:
        PreconditionError: If Z_G(t) is not H_r
        InvalidPointError: If the point does not match the chain
    """
    partitions = tuple(partitions)
    r = len(partitions)
    if not centralizer_equals_levi(t, partitions[-1]):
        raise PreconditionError(f"Z_G(t) differs from H_{r} with blocks {partitions[-1].sizes}")
    _check_source(partitions, point)
    c, h, *us = point
    ti = t.inv()
    last_plus, last_minus = us[2 * r - 2], us[2 * r - 1]
    m = c.inv() @ last_minus.inv() @ t @ last_plus @ last_minus @ c
    if r == 1:
        return (c, h @ ti @ last_minus), m
    vs = [t @ u @ ti for u in us[:2 * r - 3]]
    vs.append(t @ us[2 * r - 3] @ ti @ last_minus)
    return (c, h @ ti, *vs), m


def _unfold_formula(ts: Sequence[Matrix], point: Sequence):
    c, h, *us = point
    r = len(ts)
    n, mode = ts[0].n, ts[0].mode
    tails: List[Matrix] = [None] * r
    acc = Matrix.identity(n, mode)
    for i in reversed(range(r)):
        tails[i] = acc
        acc = ts[i] @ acc
    plus = [tails[i] @ us[2 * i] @ tails[i].inv() for i in range(r)]
    minus = [tails[i] @ us[2 * i + 1] @ tails[i].inv() for i in range(r)]
    vs = [None] * r
    acc = Matrix.identity(n, mode)
    for i in reversed(range(r)):
        acc = minus[i] @ acc
        vs[i] = acc
    ms = [c.inv() @ vs[i].inv() @ ts[i] @ plus[i] @ vs[i] @ c for i in range(r)]
    shift = product([t.inv() for t in reversed(ts)], n, mode)
    return (c, h @ shift @ vs[0]), ms


def unfold_full(params: UnfoldingParams, point: Sequence) -> UnfoldResult:
    """
    The explicit unfolding map.

    With v_i = (t_i+1 ... t_r) u_i (t_i+1 ... t_r)^-1 and
    V_i = v_i- ... v_r-, returns ([C, h t_r^-1 ... t_1^-1 V_1], M_1..M_r)
    where M_i = C^-1 V_i^-1 t_i v_i+ V_i C. Accepts jets as slots.
    """
    _check_source(params.partitions, point)
    mpoint, ms = _unfold_formula(params.ts, point)
    return UnfoldResult(mpoint, tuple(ms))


def unfold_composite(params: UnfoldingParams, point: Sequence) -> UnfoldResult:
    """unfold_rank1(t_1) after unfold_step(t_2), ..., unfold_step(t_r)."""
    current = tuple(point)
    ms = []
    for i in range(params.r, 1, -1):
        current, m = unfold_step(params.ts[i - 1], current, params.partitions[:i])
        ms.insert(0, m)
    mpoint, m1 = unfold_rank1(params.ts[0], current, params.partitions[0])
    return UnfoldResult(mpoint, tuple([m1] + ms))


def target_model(params: UnfoldingParams, result: UnfoldResult) -> Fusion:
    """M (x)_G C_1 (x)_G ... (x)_G C_r, with each class charted at its own element."""
    return Fusion([MSpace(params.partitions[0])] + [ConjClass(value_of(m)) for m in result.ms])


def target_point(result: UnfoldResult) -> SpacePoint:
    c, p = result.mpoint
    n, mode = value_of(c).n, value_of(c).mode
    return (value_of(c), value_of(p)) + tuple(Matrix.identity(n, mode) for _ in result.ms)


def target_tangent(result: UnfoldResult) -> Tuple[Matrix, ...]:
    """Target tangent read off a jet-valued result."""
    c, p = result.mpoint
    out = [right_log(c), right_log(p)]
    for m in result.ms:
        out.append(class_tangent(value_of(m), deriv_of(m)))
    return tuple(out)


def moment_intertwine_residual(params: UnfoldingParams, point: Sequence[Matrix]) -> Tuple[Matrix, Matrix]:
    """
    mu_target(Upsilon(p)) - (C^-1 h u_1 ... u_2r C, t_1 ... t_r h^-1), per factor.
    """
    result = unfold_full(params, point)
    target = target_model(params, result)
    mu = target.moment(list(target_point(result)))
    source = MultiFission(params.chain).moment(list(point))
    expected_h = params.total() @ point[1].inv()
    return mu[0] - source[0], mu[1] - expected_h


def form_intertwine_residual(params: UnfoldingParams, point: Sequence[Matrix],
                             x: Sequence[Matrix], y: Sequence[Matrix]) -> ComplexScalar:
    """
    omega_source(p; X, Y) - omega_target(Upsilon(p); dUpsilon X, dUpsilon Y).

    Class factors are evaluated at M_i with chart tangents solving
    M_i zeta - zeta M_i = dM_i.
    """
    lhs = two_form(MultiFission(params.chain), point, x, y)
    rx = unfold_full(params, tangent_jets(point, x))
    ry = unfold_full(params, tangent_jets(point, y))
    target = target_model(params, rx)
    rhs = two_form(target, target_point(rx), target_tangent(rx), target_tangent(ry))
    return lhs - rhs


def _target_coordinates(result: UnfoldResult) -> List[ComplexScalar]:
    c, p = result.mpoint
    parts = [right_log(c), right_log(p)] + [deriv_of(m) for m in result.ms]
    return [x for part in parts for x in part.flat()]


def etale_rank_check(params: UnfoldingParams, point: Sequence[Matrix]) -> Tuple[bool, int]:
    """
    Decide whether dUpsilon is injective modulo the U- orbit at the M-space point.

    Columns are dUpsilon of a basis of the source tangent space together with
    the orbit directions (w, w - Ad_p w, 0, ..., 0) for w in u-(pi_1); the
    map is etale at the point iff this combined matrix has trivial kernel.

    Returns:
        (full_rank, kernel_dim)
    """
    model = MultiFission(params.chain)
    validate_point(model, point)
    mode = point[0].mode
    n = point[0].n
    zero = Matrix.zeros(n, n, mode)
    columns = []
    slots = model.slots()
    for s, (_, pattern) in enumerate(slots):
        for b in pattern.basis(mode):
            tangent = [zero] * len(slots)
            tangent[s] = b
            columns.append(_target_coordinates(unfold_full(params, tangent_jets(point, tangent))))
    base = unfold_full(params, point)
    p = base.mpoint[1]
    for w in Pattern.lower(params.partitions[0]).basis(mode):
        parts = [w, w - ad(p, w)] + [zero] * params.r
        columns.append([x for part in parts for x in part.flat()])
    combined = Matrix.from_columns(columns, mode)
    kernel_dim = len(columns) - combined.rank()
    return kernel_dim == 0, kernel_dim


# ---------------------------------------------------------------------------
# Enriched class chart
# ---------------------------------------------------------------------------

def enriched_chart(h: Matrix, u: Matrix, v: Matrix, part: Partition) -> Tuple[Matrix, Matrix]:
    """(h, u, v) -> [u, h v] in the M-space of part."""
    rep = (u, h @ v)
    validate_point(MSpace(part), rep)
    return rep


def enriched_tau(h: Matrix, u: Matrix, v: Matrix) -> Matrix:
    """u^-1 h v u, the G-moment of enriched_chart(h, u, v)."""
    return u.inv() @ h @ v @ u


# ---------------------------------------------------------------------------
# Residues
# ---------------------------------------------------------------------------

def unfolded_residues(lambdas: Sequence[Matrix], eps: Sequence) -> List[Matrix]:
    """
    Residues of the unfolded form sum_j Lambda_j dz / prod_{l <= j} (z - eps_l).

    hat_i = sum_{j >= i} Lambda_j prod_{l <= j, l != i} (eps_i - eps_l)^-1,
    and the hats sum to Lambda_0.

    Raises:
        ValueError: If two eps values coincide, the lengths differ or there
            are no residue terms
    """
    if not lambdas:
        raise ValueError("unfolded_residues needs at least one residue term")
    if len(lambdas) != len(eps):
        raise ValueError(f"Got {len(lambdas)} residue terms but {len(eps)} points")
    mode = lambdas[0].mode
    points = [ComplexScalar.of(e, mode) for e in eps]
    for i in range(len(points)):
        for j in range(i):
            if (points[i] - points[j]).is_zero():
                raise ValueError(f"eps_{j} and eps_{i} coincide")
    n = lambdas[0].n
    hats = []
    for i in range(len(points)):
        total = Matrix.zeros(n, n, mode)
        for j in range(i, len(points)):
            weight = ComplexScalar.one(mode)
            for l in range(j + 1):
                if l != i:
                    weight = weight / (points[i] - points[l])
            total = total + lambdas[j] * weight
        hats.append(total)
    return hats


@dataclass(frozen=True)
class ResidueParameters:
    """Exponentials of unfolded residues and the two centralizer conditions."""
    hats: Tuple[Matrix, ...]
    t0: Matrix
    ts: Tuple[Matrix, ...]
    levels_match: Tuple[bool, ...]
    contained: bool

    @property
    def ok(self) -> bool:
        return all(self.levels_match) and self.contained


def _exp_diagonal(x: Matrix) -> Matrix:
    return Matrix.diag([cmath.exp(2j * math.pi * d.to_complex()) for d in x.diagonal()], FLOAT)


def residue_parameters(lambdas: Sequence[Matrix], eps: Sequence) -> ResidueParameters:
    """
    t_i = exp(2 pi i hat_i) in float mode, with the conditions
    Z(t_i) = Z(Lambda_i, ..., Lambda_r) for i >= 1 and Z(t_0) inside Z(Lambda_1, ..., Lambda_r).
    """
    hats = unfolded_residues(lambdas, eps)
    n = lambdas[0].n
    exps = [_exp_diagonal(h) for h in hats]
    diagonals = [lam.diagonal() for lam in lambdas]
    levels = tuple(
        centralizer_matches(exps[i], equality_pattern(diagonals[i:], n)) for i in range(1, len(lambdas))
    )
    contained = centralizer_within(exps[0], equality_pattern(diagonals[1:], n)) if len(lambdas) > 1 else True
    return ResidueParameters(tuple(hats), exps[0], tuple(exps[1:]), levels, contained)


# ---------------------------------------------------------------------------
# Parameter search
# ---------------------------------------------------------------------------

def scalar_pool(pool_max: int = 13) -> List[Fraction]:
    """{+-1, ..., +-N, +-1/2, ..., +-1/N}."""
    positive = [Fraction(k) for k in range(1, pool_max + 1)] + [Fraction(1, k) for k in range(2, pool_max + 1)]
    return sorted(positive + [-x for x in positive])


def search_parameters(chain: LeviChain, h0: Matrix, seed: int = 0, max_trials: int = 1000,
                      pool_max: int = 13, rng=None) -> UnfoldingParams:
    """
    Sample t_1..t_r, scalar on the blocks of each pi_j, until
    (1) Z_G(t_j) = H_j for all j and
    (2) Z_G(h0 (t_1 ... t_r)^-1) lies in H_1.

    Args:
        chain: Levi chain in interval form
        h0: Class representative, block diagonal for pi_1
        seed: Seed for numpy.random.default_rng (ignored if rng is given)
        max_trials: Number of draws before giving up
        pool_max: N in the scalar pool
        rng: Optional generator exposing integers(low, high)

    Returns:
        Validated UnfoldingParams

    Raises:
        InvalidPointError: If h0 is not block diagonal for pi_1
        SearchExhaustedError: If no draw passes within max_trials
    """
    bad = Pattern.levi(chain.partitions[0]).group_violations(h0)
    if bad:
        raise InvalidPointError([f"h0: {m}" for m in bad])
    rng = rng if rng is not None else np.random.default_rng(seed)
    pool = scalar_pool(pool_max)
    failures: Dict[str, int] = {"centralizer_equals_levi": 0, "centralizer_contained_in_levi": 0}
    for trial in range(max_trials):
        ts = []
        for part in chain.partitions:
            scalars = [pool[int(rng.integers(0, len(pool)))] for _ in part.blocks]
            ts.append(block_scalar(part, scalars, h0.mode))
        if not all(centralizer_equals_levi(t, part) for t, part in zip(ts, chain.partitions)):
            failures["centralizer_equals_levi"] += 1
            continue
        shifted = h0 @ product(ts, h0.n, h0.mode).inv()
        if not centralizer_contained_in_levi(shifted, chain.partitions[0]):
            failures["centralizer_contained_in_levi"] += 1
            continue
        if trial:
            print(f"[WARN] search_parameters rejected {trial} draws {failures}", file=sys.stderr)
        return UnfoldingParams(tuple(ts), chain)
    worst = max(failures, key=failures.get) if max_trials else "none attempted"
    raise SearchExhaustedError(
        f"No parameters found in {max_trials} trials (most frequent failure: {worst})", failures
    )


def block_scalar(part: Partition, values: Sequence, mode: str) -> Matrix:
    """Block-scalar diagonal matrix with one value per block."""
    return Matrix.diag([values[part.block_index(i)] for i in range(part.n)], mode)

