"""
Wild Character Variety Points

Representation points of an irregular curve of genus g with m marked points:
handles (A_l, B_l) and one local slot tuple per marked point. Provides the
moment relation, determinant and stability tests, on-fiber completion and
the point-level unfolding to a tame curve.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .core import (
    EXACT, InvalidPointError, Matrix, Pattern, charpoly_equal, product, span_rank,
)
from .irregular import IrregularType, LeviChain, levi_chain
from .spaces import Double, MultiFission, SpaceModel, StokesModel, point_violations
from .unfolding import UnfoldingParams, unfold_full


@dataclass(frozen=True)
class MarkedPoint:
    """
    Local data at one marked point.

    A point with no irregular type (or pole order 0) is tame and carries
    slots (C, h). Otherwise slots are (C, h, u_1, ..., u_2r) for the Levi
    chain, or (C, h, S_1, ..., S_s) when stokes is set.
    """
    n: int
    irregular: Optional[IrregularType] = None
    chain: Optional[LeviChain] = None
    params: Optional[UnfoldingParams] = None
    class_rep: Optional[Matrix] = None
    stokes: bool = False

    def __post_init__(self):
        if self.chain is None and self.params is not None:
            object.__setattr__(self, "chain", self.params.chain)
        if self.chain is None and not self.is_tame:
            object.__setattr__(self, "chain", levi_chain(self.irregular))
        if self.chain is not None and self.irregular is not None and self.irregular.r:
            expected = levi_chain(self.irregular.permuted(self.chain.perm)).partitions
            if expected != self.chain.partitions:
                raise ValueError("Levi chain is inconsistent with the irregular type")
        if self.params is not None and self.params.chain.partitions != self.chain.partitions:
            raise ValueError("Unfolding parameters were built for a different chain")

    @property
    def r(self) -> int:
        if self.chain is not None:
            return self.chain.r
        return self.irregular.r if self.irregular is not None else 0

    @property
    def is_tame(self) -> bool:
        return self.chain is None and (self.irregular is None or self.irregular.r == 0)

    def model(self) -> SpaceModel:
        if self.is_tame:
            return Double(self.n)
        if self.stokes:
            return StokesModel(self.irregular)
        return MultiFission(self.chain)


@dataclass(frozen=True)
class IrregularCurveData:
    """Genus plus marked points, all of size n."""
    genus: int
    marked: Tuple[MarkedPoint, ...]
    n: int = field(default=0)

    def __post_init__(self):
        object.__setattr__(self, "marked", tuple(self.marked))
        if self.genus < 0:
            raise ValueError("Genus must be non-negative")
        sizes = {m.n for m in self.marked}
        if self.n:
            sizes.add(self.n)
        if len(sizes) > 1:
            raise ValueError(f"Marked points have different sizes: {sorted(sizes)}")
        if not self.n:
            if not sizes:
                raise ValueError("Matrix size is undetermined: give n or a marked point")
            object.__setattr__(self, "n", sizes.pop())


@dataclass(frozen=True)
class RepPoint:
    """Handles (A_l, B_l) and per-marked-point slot tuples."""
    handles: Tuple[Tuple[Matrix, Matrix], ...]
    locals: Tuple[Tuple[Matrix, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "handles", tuple(tuple(h) for h in self.handles))
        object.__setattr__(self, "locals", tuple(tuple(s) for s in self.locals))


def rep_point_violations(pt: RepPoint, curve: IrregularCurveData) -> List[str]:
    bad = []
    if len(pt.handles) != curve.genus:
        bad.append(f"expected {curve.genus} handle pairs, got {len(pt.handles)}")
    if len(pt.locals) != len(curve.marked):
        bad.append(f"expected {len(curve.marked)} marked points, got {len(pt.locals)}")
        return bad
    general = Pattern.general(curve.n)
    for l, pair in enumerate(pt.handles, start=1):
        for name, g in zip(("A", "B"), pair):
            bad += [f"{name}{l}: {m}" for m in general.group_violations(g)]
    for i, (mp, slots) in enumerate(zip(curve.marked, pt.locals), start=1):
        bad += [f"marked point {i}: {m}" for m in point_violations(mp.model(), slots)]
    return bad


def validate_rep_point(pt: RepPoint, curve: IrregularCurveData) -> None:
    """
    Raises:
        InvalidPointError: On any slot count or pattern violation
    """
    bad = rep_point_violations(pt, curve)
    if bad:
        raise InvalidPointError(bad)


def _mode(pt: RepPoint) -> str:
    for pair in pt.handles:
        return pair[0].mode
    for slots in pt.locals:
        return slots[0].mode
    raise ValueError("Empty representation point has no arithmetic mode")


def commutator(a: Matrix, b: Matrix) -> Matrix:
    """[A, B] = A B A^-1 B^-1."""
    return a @ b @ a.inv() @ b.inv()


def local_monodromies(pt: RepPoint, curve: IrregularCurveData) -> List[Matrix]:
    """G-moment C^-1 h (u... or S...) C of each marked point."""
    return [mp.model().moment(list(slots))[0] for mp, slots in zip(curve.marked, pt.locals)]


def _relation_product(pt: RepPoint, curve: IrregularCurveData, mode: str) -> Matrix:
    factors = [commutator(a, b) for a, b in pt.handles] + local_monodromies(pt, curve)
    return product(factors, curve.n, mode)


def moment_relation_residual(pt: RepPoint, curve: IrregularCurveData) -> Matrix:
    """
    prod_l [A_l, B_l] prod_i C_i^-1 h_i (...) C_i; the identity on the moment fiber.
    """
    validate_rep_point(pt, curve)
    return _relation_product(pt, curve, _mode(pt))


def relation_scale(pt: RepPoint) -> float:
    """
    Product of the spectral norms of every letter in the relation word:
    A, B, A^-1, B^-1 per handle and the slots plus C^-1 per marked point.
    Bounds the float rounding in the relation product.
    """
    scale = 1.0
    for a, b in pt.handles:
        for g in (a, b, a.inv(), b.inv()):
            scale *= max(g.norm(), 1.0)
    for slots in pt.locals:
        for g in tuple(slots) + (slots[0].inv(),):
            scale *= max(g.norm(), 1.0)
    return scale


def on_fiber(pt: RepPoint, curve: IrregularCurveData) -> bool:
    prod = moment_relation_residual(pt, curve)
    if prod.mode == EXACT:
        return prod == Matrix.identity(curve.n, EXACT)
    return prod.close_to(Matrix.identity(curve.n, prod.mode), relation_scale(pt))


def det_condition_check(pt: RepPoint, curve: IrregularCurveData) -> bool:
    """
    prod_i det(h_i) = 1 for an on-fiber point.

    Raises:
        InvalidPointError: If the point is off the moment fiber
    """
    if not on_fiber(pt, curve):
        raise InvalidPointError(["point is off-fiber: the moment relation does not hold"])
    mode = _mode(pt)
    hs = [slots[1] for slots in pt.locals]
    total = product(hs, curve.n, mode).det()
    if mode == EXACT:
        return (total - 1).is_zero()
    scale = 1.0
    for h in hs:
        scale *= h.norm() * h.inv().norm()
    return (total - 1).is_zero(scale)


def complete_relation(partial: RepPoint, curve: IrregularCurveData) -> RepPoint:
    """
    Fill the reserved last (tame) marked point with (I, P^-1), where P is the
    relation product of everything else, so the relation holds exactly.
    """
    if not curve.marked or not curve.marked[-1].is_tame:
        raise ValueError("complete_relation needs a reserved tame marked point at the end")
    if len(partial.locals) != len(curve.marked) - 1:
        raise ValueError(f"Expected {len(curve.marked) - 1} filled marked points, got {len(partial.locals)}")
    head = IrregularCurveData(curve.genus, curve.marked[:-1], curve.n)
    if partial.handles or partial.locals:
        validate_rep_point(partial, head)
        mode = _mode(partial)
    else:
        mode = curve.marked[-1].class_rep.mode if curve.marked[-1].class_rep is not None else EXACT
    prod = _relation_product(partial, head, mode)
    last = (Matrix.identity(curve.n, mode), prod.inv())
    return RepPoint(partial.handles, partial.locals + (last,))


# ---------------------------------------------------------------------------
# Stability
# ---------------------------------------------------------------------------

def generated_algebra_dim(mats: Sequence[Matrix], n: int, mode: str) -> int:
    """Dimension of the associative algebra generated by mats (with identity)."""
    basis = [Matrix.identity(n, mode)]
    frontier = list(basis)
    while frontier and len(basis) < n * n:
        fresh = []
        for b in frontier:
            for g in mats:
                cand = g @ b
                if span_rank(basis + [cand]) > len(basis):
                    basis.append(cand)
                    fresh.append(cand)
        frontier = fresh
    return len(basis)


def burnside_irreducible(mats: Sequence[Matrix], n: int, mode: str) -> bool:
    """No common proper invariant subspace, i.e. the generated algebra is all of M_n."""
    return generated_algebra_dim(mats, n, mode) == n * n


def _center_basis(pattern: Pattern, mode: str) -> List[Matrix]:
    """Indicator diagonals of the blocks of a Levi-type pattern (its center)."""
    classes = []
    for i in range(pattern.n):
        block = frozenset(j for j in range(pattern.n) if (i, j) in pattern.allowed)
        if block not in classes:
            classes.append(block)
    return [Matrix.diag([1 if i in block else 0 for i in range(pattern.n)], mode) for block in classes]


def stability_test_set(pt: RepPoint, curve: IrregularCurveData) -> List[Matrix]:
    """
    {A_l, B_l, C^-1 h C, C^-1 u C (or S), C^-1 z C for z spanning the centre of H_1}.
    """
    validate_rep_point(pt, curve)
    mode = _mode(pt)
    out = [g for pair in pt.handles for g in pair]
    for mp, slots in zip(curve.marked, pt.locals):
        c, h, *rest = slots
        ci = c.inv()
        out.append(ci @ h @ c)
        out += [ci @ u @ c for u in rest]
        h_pattern = mp.model().slots()[1][1]
        out += [ci @ z @ c for z in _center_basis(h_pattern, mode)]
    return out


def stability_check(pt: RepPoint, curve: IrregularCurveData) -> bool:
    """Stable iff the test set lies in no proper parabolic (Burnside saturation)."""
    mats = stability_test_set(pt, curve)
    return burnside_irreducible(mats, curve.n, _mode(pt))


# ---------------------------------------------------------------------------
# Unfolding
# ---------------------------------------------------------------------------

def tame_curve(curve: IrregularCurveData) -> IrregularCurveData:
    """The tame curve with sum_i (r_i + 1) marked points."""
    marked = []
    for mp in curve.marked:
        count = 1 if mp.is_tame else mp.r + 1
        marked += [MarkedPoint(curve.n) for _ in range(count)]
    return IrregularCurveData(curve.genus, tuple(marked), curve.n)


def unfold_wcv(pt: RepPoint, curve: IrregularCurveData) -> Tuple[RepPoint, IrregularCurveData]:
    """
    Unfold every irregular marked point into tame slots.

    Per marked point the M-space part [C', p'] becomes the slot (C', p')
    followed by (I, M_1), ..., (I, M_r); tame points are kept as they are.

    Raises:
        ValueError: If an irregular marked point has no unfolding parameters
        InvalidPointError: If the point is invalid or off-fiber
    """
    if not on_fiber(pt, curve):
        raise InvalidPointError(["point is off-fiber: the moment relation does not hold"])
    locals_out = []
    for i, (mp, slots) in enumerate(zip(curve.marked, pt.locals), start=1):
        if mp.is_tame:
            locals_out.append(slots)
            continue
        if mp.params is None:
            raise ValueError(f"Marked point {i} has no unfolding parameters")
        if mp.stokes:
            raise ValueError(f"Marked point {i} uses Stokes coordinates; unfolding needs the multi-fission layout")
        result = unfold_full(mp.params, slots)
        locals_out.append(result.mpoint)
        ident = Matrix.identity(curve.n, slots[0].mode)
        locals_out += [(ident, m) for m in result.ms]
    return RepPoint(pt.handles, tuple(locals_out)), tame_curve(curve)


def announced_classes(curve: IrregularCurveData) -> List[Optional[Matrix]]:
    """
    Class representative per tame output slot: h0 (t_1 ... t_r)^-1 then t_1..t_r
    for an irregular point, h0 for a tame point (None when unknown).
    """
    out: List[Optional[Matrix]] = []
    for mp in curve.marked:
        if mp.is_tame:
            out.append(mp.class_rep)
            continue
        if mp.class_rep is None or mp.params is None:
            out += [None] * (mp.r + 1)
            continue
        out.append(mp.class_rep @ mp.params.total().inv())
        out += list(mp.params.ts)
    return out


def class_bookkeeping(pt: RepPoint, curve: IrregularCurveData) -> List[bool]:
    """For each unfolded slot, whether its monodromy has the announced characteristic polynomial."""
    unfolded, tame = unfold_wcv(pt, curve)
    checks = []
    for mono, rep in zip(local_monodromies(unfolded, tame), announced_classes(curve)):
        if rep is not None:
            checks.append(charpoly_equal(mono, rep))
    return checks


def conjugate_point(pt: RepPoint, g: Matrix) -> RepPoint:
    """Simultaneous conjugation: A -> g A g^-1, C_i -> C_i g^-1."""
    gi = g.inv()
    handles = tuple((g @ a @ gi, g @ b @ gi) for a, b in pt.handles)
    locals_ = tuple((slots[0] @ gi,) + tuple(slots[1:]) for slots in pt.locals)
    return RepPoint(handles, locals_)
