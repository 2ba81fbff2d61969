"""
Quasi-Hamiltonian Space Models

Each model describes:
1. Slots - the subgroups a point's matrices live in (zero patterns)
2. Factors - the acting groups G x H_1 x ... (factor 0 is always G)
3. Moment map and action, written once and evaluated on matrices or jets
4. Two-form, given as coefficient-weighted pairs of matrix one-forms

A pair (c, A, B) contributes c * [(A(X), B(Y)) - (A(Y), B(X))] to omega(X, Y),
where one-forms are evaluated by jet propagation along the tangent.
Tangents are right-logarithmic: slot g moves as dg = xi g.
"""

from abc import ABC, abstractmethod
from fractions import Fraction
from typing import List, Sequence, Tuple, Union

import numpy as np

from . import core
from .core import (
    ComplexScalar, InvalidPointError, Jet, Matrix, Partition, Pattern,
    ad, block_diagonal_part, left_log, product, right_log, trace_form, value_of,
)
from .irregular import IrregularType, LeviChain, centralizer_pattern, singular_directions, stokes_pattern

HALF = Fraction(1, 2)

SpacePoint = Tuple[Matrix, ...]
Tangent = Tuple[Matrix, ...]
FormPair = Tuple[Fraction, Matrix, Matrix]


class SpaceModel(ABC):
    """A quasi-Hamiltonian G x H space realized on explicit matrix slots."""

    variant = "model"

    def __init__(self, n: int):
        self.n = n

    @abstractmethod
    def slots(self) -> List[Tuple[str, Pattern]]:
        """(name, pattern) per slot."""

    @abstractmethod
    def factors(self) -> List[Pattern]:
        """Lie algebra patterns of the acting factors; factor 0 is gl_n."""

    @abstractmethod
    def moment(self, point: Sequence) -> list:
        """Moment value per factor (matrices, or jets when given jets)."""

    @abstractmethod
    def act(self, elems: Sequence, point: Sequence) -> list:
        """Action of (g, k, ...) on a point."""

    @abstractmethod
    def one_forms(self, jets: Sequence[Jet]) -> List[FormPair]:
        """One-form values along the tangent carried by the jets."""

    def describe(self) -> dict:
        return {"variant": self.variant, "n": self.n}


def _fission_forms(c, h, us: Sequence) -> List[FormPair]:
    """
    Pairs of 2 omega = (A, Ad_b A) + (A, db b^-1) + (dC_0 C_0^-1, h^-1 dh)
    - sum_j (C_j^-1 dC_j, C_{j+1}^-1 dC_{j+1}), with A = dC C^-1,
    b = h u_1 ... u_m and C_j = u_{j+1} ... u_m C.
    """
    a = right_log(c)
    b = h
    for u in us:
        b = b @ u
    pairs = [(HALF, a, ad(value_of(b), a)), (HALF, a, right_log(b))]
    cs = [c]
    for u in reversed(us):
        cs.insert(0, u @ cs[0])
    pairs.append((HALF, right_log(cs[0]), left_log(h)))
    for j in range(len(us)):
        pairs.append((-HALF, left_log(cs[j]), left_log(cs[j + 1])))
    return pairs


class ConjClass(SpaceModel):
    """G-conjugacy class of base, charted by C -> C^-1 base C."""

    variant = "conj"

    def __init__(self, base: Matrix):
        super().__init__(base.n)
        self.base = base

    def slots(self):
        return [("C", Pattern.general(self.n))]

    def factors(self):
        return [Pattern.general(self.n)]

    def moment(self, point):
        (c,) = point
        return [c.inv() @ self.base @ c]

    def act(self, elems, point):
        (g,) = elems
        (c,) = point
        return [c @ g.inv()]

    def one_forms(self, jets):
        a = right_log(jets[0])
        return [(HALF, a, ad(self.base, a))]

    def describe(self):
        return {"variant": self.variant, "n": self.n, "base": self.base}


class Double(SpaceModel):
    """The internally fused double D(G) = G x G acted on by G x G."""

    variant = "double"

    def slots(self):
        return [("C", Pattern.general(self.n)), ("h", Pattern.general(self.n))]

    def factors(self):
        return [Pattern.general(self.n), Pattern.general(self.n)]

    def moment(self, point):
        c, h = point
        return [c.inv() @ h @ c, h.inv()]

    def act(self, elems, point):
        g, k = elems
        c, h = point
        return [k @ c @ g.inv(), k @ h @ k.inv()]

    def one_forms(self, jets):
        c, h = jets
        return _fission_forms(c, h, [])


class MultiFission(SpaceModel):
    """
    G x H_1 x prod_j (U_j+ x U_j-) for an increasing chain of Levis.

    Point layout: (C, h, u_1, u_2, ..., u_2r) with u_{2j-1} in U_j+ and
    u_{2j} in U_j-.
    """

    variant = "multifission"

    def __init__(self, partitions: Union[LeviChain, Sequence[Partition]]):
        if isinstance(partitions, LeviChain):
            partitions = partitions.partitions
        partitions = tuple(partitions)
        if not partitions:
            raise ValueError("A multi-fission space needs at least one level")
        super().__init__(partitions[0].n)
        for j in range(len(partitions) - 1):
            if not partitions[j].refines(partitions[j + 1]):
                raise ValueError(f"Parabolic chain is not increasing at level {j + 1}")
        self.partitions = partitions

    @property
    def r(self) -> int:
        return len(self.partitions)

    def slots(self):
        out = [("C", Pattern.general(self.n)), ("h", Pattern.levi(self.partitions[0]))]
        for j, part in enumerate(self.partitions, start=1):
            out.append((f"u{2 * j - 1}", Pattern.upper(part)))
            out.append((f"u{2 * j}", Pattern.lower(part)))
        return out

    def factors(self):
        return [Pattern.general(self.n), Pattern.levi(self.partitions[0])]

    def moment(self, point):
        c, h, *us = point
        return [c.inv() @ product([h, *us], self.n, value_of(c).mode) @ c, h.inv()]

    def act(self, elems, point):
        g, k = elems
        c, h, *us = point
        ki = k.inv()
        return [k @ c @ g.inv(), k @ h @ ki] + [k @ u @ ki for u in us]

    def one_forms(self, jets):
        c, h, *us = jets
        return _fission_forms(c, h, us)

    def describe(self):
        return {"variant": self.variant, "n": self.n, "chain": [list(p.sizes) for p in self.partitions]}


class Fission(MultiFission):
    """The r-fold fission space G x H x (U+ x U-)^r (constant chain)."""

    variant = "fission"

    def __init__(self, part: Partition, r: int):
        if r < 1:
            raise ValueError("Fission space needs r >= 1")
        super().__init__((part,) * r)


class StokesModel(SpaceModel):
    """
    Stokes-coordinate model A(Q) = G x H x prod_i Sto_{d_i}.

    Point layout (C, h, S_1, ..., S_s); moment (C^-1 h S_s ... S_1 C, h^-1).
    """

    variant = "stokes"

    def __init__(self, q: IrregularType):
        super().__init__(q.n)
        self.q = q
        self.directions = singular_directions(q)
        self._patterns = [stokes_pattern(q, d) for d in self.directions]
        self._h = centralizer_pattern(q)

    def slots(self):
        out = [("C", Pattern.general(self.n)), ("h", self._h)]
        out += [(f"S{i}", p) for i, p in enumerate(self._patterns, start=1)]
        return out

    def factors(self):
        return [Pattern.general(self.n), self._h]

    def moment(self, point):
        c, h, *ss = point
        return [c.inv() @ product([h, *reversed(ss)], self.n, value_of(c).mode) @ c, h.inv()]

    def act(self, elems, point):
        g, k = elems
        c, h, *ss = point
        ki = k.inv()
        return [k @ c @ g.inv(), k @ h @ ki] + [k @ s @ ki for s in ss]

    def one_forms(self, jets):
        c, h, *ss = jets
        return _fission_forms(c, h, list(reversed(ss)))

    def describe(self):
        return {"variant": self.variant, "n": self.n, "irregular_type": self.q}


class MSpace(SpaceModel):
    """
    M = (G x P-)/U-, handled through representatives (C, p).

    G acts by C -> C g^-1, H by (C, p) -> (kC, k p k^-1); U- acts the same way
    and is quotiented (see mspace_equivalent).
    """

    variant = "mspace"

    def __init__(self, part: Partition):
        super().__init__(part.n)
        self.part = part

    def slots(self):
        return [("C", Pattern.general(self.n)), ("p", Pattern.lower_parabolic(self.part))]

    def factors(self):
        return [Pattern.general(self.n), Pattern.levi(self.part)]

    def moment(self, point):
        c, p = point
        return [c.inv() @ p @ c, block_diagonal_part(p, self.part).inv()]

    def act(self, elems, point):
        g, k = elems
        c, p = point
        return [k @ c @ g.inv(), k @ p @ k.inv()]

    def one_forms(self, jets):
        c, p = jets
        return _fission_forms(c, p, [])

    def describe(self):
        return {"variant": self.variant, "n": self.n, "levi": list(self.part.sizes)}


class Fusion(SpaceModel):
    """
    Fusion of G-spaces, left-nested in child order.

    G-moments multiply left to right; every other factor is concatenated.
    """

    variant = "fusion"

    def __init__(self, children: Sequence[SpaceModel]):
        children = list(children)
        if not children:
            raise ValueError("fuse needs at least one space")
        n = children[0].n
        for child in children:
            if child.n != n:
                raise core.ShapeError(f"Cannot fuse spaces of sizes {n} and {child.n}")
        super().__init__(n)
        self.children = children

    def _split(self, seq: Sequence, counts: Sequence[int]) -> List[list]:
        out, start = [], 0
        for k in counts:
            out.append(list(seq[start:start + k]))
            start += k
        return out

    def _slot_split(self, seq):
        return self._split(seq, [len(c.slots()) for c in self.children])

    def slots(self):
        return [(f"{i}.{name}", pat) for i, c in enumerate(self.children) for name, pat in c.slots()]

    def factors(self):
        out = [Pattern.general(self.n)]
        for c in self.children:
            out += c.factors()[1:]
        return out

    def moment(self, point):
        parts = [c.moment(s) for c, s in zip(self.children, self._slot_split(point))]
        g_part = parts[0][0]
        for p in parts[1:]:
            g_part = g_part @ p[0]
        return [g_part] + [m for p in parts for m in p[1:]]

    def act(self, elems, point):
        g, *rest = elems
        ks = self._split(rest, [len(c.factors()) - 1 for c in self.children])
        out = []
        for c, s, k in zip(self.children, self._slot_split(point), ks):
            out += c.act([g] + k, s)
        return out

    def correction_pairs(self, jets) -> List[FormPair]:
        """-1/2 (mu_<i^-1 d mu_<i, d mu_i mu_i^-1) for each child after the first."""
        moments = [c.moment(s)[0] for c, s in zip(self.children, self._slot_split(jets))]
        pairs = []
        acc = moments[0]
        for mu in moments[1:]:
            pairs.append((-HALF, left_log(acc), right_log(mu)))
            acc = acc @ mu
        return pairs

    def one_forms(self, jets):
        pairs = []
        for c, s in zip(self.children, self._slot_split(jets)):
            pairs += c.one_forms(s)
        return pairs + self.correction_pairs(jets)

    def describe(self):
        return {"variant": self.variant, "n": self.n, "children": [c.describe() for c in self.children]}


def fuse(models: Sequence[SpaceModel]) -> Fusion:
    """
    Fuse spaces with G-action into one (left-nested association).

    Raises:
        ValueError: If the list is empty
        ShapeError: If the spaces have different sizes
    """
    return Fusion(models)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def point_violations(model: SpaceModel, point: Sequence[Matrix]) -> List[str]:
    slots = model.slots()
    if len(point) != len(slots):
        return [f"expected {len(slots)} slots ({', '.join(n for n, _ in slots)}), got {len(point)}"]
    bad = []
    for (name, pattern), g in zip(slots, point):
        bad += [f"{name}: {msg}" for msg in pattern.group_violations(value_of(g))]
    return bad


def validate_point(model: SpaceModel, point: Sequence[Matrix]) -> None:
    """
    Check slot count, invertibility and subgroup zero patterns.

    Raises:
        InvalidPointError: With one message per violated slot condition
    """
    bad = point_violations(model, point)
    if bad:
        raise InvalidPointError(bad)


def validate_tangent(model: SpaceModel, tangent: Sequence[Matrix]) -> None:
    """
    Check that each tangent component lies in its slot's Lie algebra.

    Raises:
        InvalidPointError: On a wrong component count or a pattern violation
    """
    slots = model.slots()
    if len(tangent) != len(slots):
        raise InvalidPointError([f"expected {len(slots)} tangent components, got {len(tangent)}"])
    bad = []
    for (name, pattern), x in zip(slots, tangent):
        if not pattern.contains_lie(x):
            bad.append(f"tangent {name}: not in the Lie algebra of {pattern.name}")
    if bad:
        raise InvalidPointError(bad)


def tangent_jets(point: Sequence[Matrix], tangent: Sequence[Matrix]) -> List[Jet]:
    return [Jet.from_tangent(g, x) for g, x in zip(point, tangent)]


def jets_tangent(jets: Sequence) -> Tangent:
    """Right-logarithmic tangent read off a tuple of jets."""
    return tuple(right_log(j) for j in jets)


def moment(model: SpaceModel, point: Sequence[Matrix]) -> List[Matrix]:
    """
    Moment map value, one entry per acting factor.

    Raises:
        InvalidPointError: If the point is invalid for the model
    """
    validate_point(model, point)
    return model.moment(list(point))


def evaluate_pairs(fx: Sequence[FormPair], fy: Sequence[FormPair], mode: str) -> ComplexScalar:
    total = ComplexScalar.zero(mode)
    for (coef, ax, bx), (_, ay, by) in zip(fx, fy):
        total = total + (trace_form(ax, by) - trace_form(ay, bx)) * coef
    return total


def two_form(model: SpaceModel, point: Sequence[Matrix], x: Sequence[Matrix], y: Sequence[Matrix]) -> ComplexScalar:
    """
    Evaluate the quasi-Hamiltonian two-form omega(X, Y) at a point.

    Raises:
        InvalidPointError: If the point or a tangent violates the slot patterns
    """
    validate_point(model, point)
    validate_tangent(model, x)
    validate_tangent(model, y)
    fx = model.one_forms(tangent_jets(point, x))
    fy = model.one_forms(tangent_jets(point, y))
    return evaluate_pairs(fx, fy, point[0].mode)


def fusion_correction(model: Fusion, point: Sequence[Matrix], x: Sequence[Matrix], y: Sequence[Matrix]) -> ComplexScalar:
    """The fusion terms of omega alone (omega minus the children's forms)."""
    validate_point(model, point)
    fx = model.correction_pairs(tangent_jets(point, x))
    fy = model.correction_pairs(tangent_jets(point, y))
    return evaluate_pairs(fx, fy, point[0].mode)


def identity_elems(model: SpaceModel, mode: str) -> List[Matrix]:
    return [Matrix.identity(model.n, mode) for _ in model.factors()]


def act_point(model: SpaceModel, elems: Sequence[Matrix], point: Sequence[Matrix]) -> SpacePoint:
    return tuple(model.act(list(elems), list(point)))


def act_tangent(model: SpaceModel, elems: Sequence[Matrix], point: Sequence[Matrix], x: Sequence[Matrix]) -> Tangent:
    """Push a tangent forward along the action of fixed group elements."""
    return jets_tangent(model.act(list(elems), tangent_jets(point, x)))


def infinitesimal_action(model: SpaceModel, point: Sequence[Matrix], xi: Matrix, factor: int = 0) -> Tangent:
    """
    xi_M: derivative of exp(-eps xi) . p at eps = 0, acting through one factor.

    Raises:
        InvalidPointError: If xi is outside the factor's Lie algebra
    """
    mode = point[0].mode
    patterns = model.factors()
    if not 0 <= factor < len(patterns):
        raise ValueError(f"Factor {factor} out of range (model has {len(patterns)})")
    if not patterns[factor].contains_lie(xi):
        raise InvalidPointError([f"xi is not in the Lie algebra of factor {factor} ({patterns[factor].name})"])
    elems = [Jet.constant(e) for e in identity_elems(model, mode)]
    elems[factor] = Jet(Matrix.identity(model.n, mode), -xi)
    return jets_tangent(model.act(elems, [Jet.constant(g) for g in point]))


def qh2_residual(model: SpaceModel, point: Sequence[Matrix], xi: Matrix, y: Sequence[Matrix],
                 factor: int = 0) -> ComplexScalar:
    """
    omega(xi_M, Y) - 1/2 ((mu^-1 d mu + d mu mu^-1)(Y), xi) for one acting factor.

    Vanishes exactly in exact mode for a quasi-Hamiltonian space. In float
    mode the difference is divided by a bound on the size of the terms
    (Cauchy-Schwarz on every trace pairing), so the result is relative.
    """
    validate_point(model, point)
    validate_tangent(model, y)
    xi_m = infinitesimal_action(model, point, xi, factor)
    fx = model.one_forms(tangent_jets(point, xi_m))
    fy = model.one_forms(tangent_jets(point, y))
    lhs = evaluate_pairs(fx, fy, point[0].mode)
    mu = model.moment(tangent_jets(point, y))[factor]
    logs = left_log(mu) + right_log(mu)
    rhs = trace_form(logs, xi) * HALF
    if point[0].mode != core.FLOAT:
        return lhs - rhs
    size = sum(abs(coef) * (_frobenius(ax) * _frobenius(by) + _frobenius(ay) * _frobenius(bx))
               for (coef, ax, bx), (_, ay, by) in zip(fx, fy))
    size += 0.5 * _frobenius(logs) * _frobenius(xi)
    return (lhs - rhs) * (1.0 / max(size, 1.0))


def _frobenius(m: Matrix) -> float:
    return float(np.linalg.norm(m.to_numpy()))


def mspace_equivalent(a: Sequence[Matrix], b: Sequence[Matrix], part: Partition) -> bool:
    """True iff b = w . a for w = C' C^-1 in U- (same point of M)."""
    (c, p), (c2, p2) = a, b
    w = c2 @ c.inv()
    if not Pattern.lower(part).contains_group(w):
        return False
    return p2.close_to(w @ p @ w.inv())


def double_class_point(x: Matrix, c: Matrix = None) -> SpacePoint:
    """A point of the double with H-moment x^-1; its G-moment C^-1 x C lies in the class of x."""
    if c is None:
        c = Matrix.identity(x.n, x.mode)
    return (c, x)


def dim_class(t: Matrix) -> int:
    """dim of the G-conjugacy class of t: n^2 - dim Z_G(t)."""
    return t.n * t.n - len(core.centralizer_subalgebra(t))


def dim_mspace(part: Partition) -> int:
    return part.n * part.n + part.levi_dim()


def dim_multifission(partitions: Sequence[Partition]) -> int:
    n = partitions[0].n
    return n * n + partitions[0].levi_dim() + sum(2 * p.unipotent_dim() for p in partitions)


def model_dimension(model: SpaceModel) -> int:
    """Dimension of the slot manifold (sum of slot subgroup dimensions)."""
    return sum(p.dim for _, p in model.slots())
