"""
Core arithmetic for wild character variety computations.

Provides:
1. ComplexScalar - exact (Gaussian rational) or float complex numbers
2. Matrix - n x m matrices in one of the two modes (GroupElem / LieElem)
3. Jet - (value, derivative) pairs for exact differentiation of composites
4. Partition / Pattern - block machinery for Levi, parabolic and unipotent subgroups
5. Trace form and centralizer computations for GL_n

Exact mode stores matrices as sympy DomainMatrix over QQ_I, float mode as
numpy complex128 arrays. Mixing modes is always an error.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from sympy import QQ, QQ_I
from sympy.polys.matrices import DomainMatrix

EXACT = "exact"
FLOAT = "float"
MODES = (EXACT, FLOAT)


# ---------------------------------------------------------------------------
# Tolerances and errors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Tolerances:
    """Float-mode thresholds (exact mode never consults them)."""
    residual: float = 1e-9
    pivot: float = 1e-10
    invertibility: float = 1e-12
    angle: float = 1e-12


TOL = Tolerances()


def configure(settings: dict) -> Tolerances:
    """
    Install tolerances from a settings dictionary (config/settings.json keys).

    Args:
        settings: Dictionary with optional residual_tolerance, pivot_tolerance,
            invertibility_tolerance and angle_tolerance keys

    Returns:
        The tolerances now in effect
    """
    global TOL
    TOL = Tolerances(
        residual=float(settings.get("residual_tolerance", TOL.residual)),
        pivot=float(settings.get("pivot_tolerance", TOL.pivot)),
        invertibility=float(settings.get("invertibility_tolerance", TOL.invertibility)),
        angle=float(settings.get("angle_tolerance", TOL.angle)),
    )
    return TOL


class ModeMismatchError(ValueError):
    """Exact and float operands were mixed."""


class ShapeError(ValueError):
    """Operands have incompatible sizes."""


class InvalidPointError(ValueError):
    """A point or tangent violates its slot patterns."""

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        super().__init__("Invalid point: " + "; ".join(self.violations))


class PreconditionError(ValueError):
    """A centralizer or parameter precondition does not hold."""


class SearchExhaustedError(ValueError):
    """The parameter sampler ran out of trials."""

    def __init__(self, message: str, failure_counts: dict):
        self.failure_counts = dict(failure_counts)
        super().__init__(message)


def _check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"Unknown arithmetic mode '{mode}' (expected exact or float)")
    return mode


# ---------------------------------------------------------------------------
# Scalars
# ---------------------------------------------------------------------------

Number = Union[int, Fraction, float, complex, str, tuple, "ComplexScalar"]


def _parse_real(value, mode: str):
    if isinstance(value, str):
        value = value.strip()
        if mode == EXACT:
            return Fraction(value)
        return float(Fraction(value)) if "/" in value else float(value)
    if mode == EXACT:
        if isinstance(value, float):
            raise ModeMismatchError(f"Float value {value!r} given in exact mode")
        return Fraction(value)
    return float(value)


@dataclass(frozen=True)
class ComplexScalar:
    """A complex number whose parts are Fractions (exact) or floats (float)."""
    re: Union[Fraction, float]
    im: Union[Fraction, float]
    mode: str

    @classmethod
    def of(cls, value: Number, mode: str) -> "ComplexScalar":
        """
        Coerce a Python number, "p/q" string, (re, im) pair or scalar.

        Raises:
            ModeMismatchError: If value is a scalar of the other mode, or a
                float in exact mode
        """
        _check_mode(mode)
        if isinstance(value, ComplexScalar):
            if value.mode != mode:
                raise ModeMismatchError(f"Cannot use a {value.mode} scalar in {mode} mode")
            return value
        if isinstance(value, (tuple, list)):
            re, im = value
            return cls(_parse_real(re, mode), _parse_real(im, mode), mode)
        if isinstance(value, complex):
            if mode == EXACT:
                raise ModeMismatchError(f"Complex float {value!r} given in exact mode")
            return cls(value.real, value.imag, mode)
        zero = Fraction(0) if mode == EXACT else 0.0
        return cls(_parse_real(value, mode), zero, mode)

    @classmethod
    def zero(cls, mode: str) -> "ComplexScalar":
        return cls.of(0, mode)

    @classmethod
    def one(cls, mode: str) -> "ComplexScalar":
        return cls.of(1, mode)

    def _coerce(self, other) -> "ComplexScalar":
        return ComplexScalar.of(other, self.mode)

    def __add__(self, other):
        o = self._coerce(other)
        return ComplexScalar(self.re + o.re, self.im + o.im, self.mode)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return ComplexScalar(self.re - o.re, self.im - o.im, self.mode)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return ComplexScalar(-self.re, -self.im, self.mode)

    def __mul__(self, other):
        if isinstance(other, Matrix):
            return NotImplemented
        o = self._coerce(other)
        return ComplexScalar(self.re * o.re - self.im * o.im,
                             self.re * o.im + self.im * o.re, self.mode)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        norm = o.re * o.re + o.im * o.im
        if norm == 0:
            raise ZeroDivisionError("Division by zero scalar")
        return ComplexScalar((self.re * o.re + self.im * o.im) / norm,
                             (self.im * o.re - self.re * o.im) / norm, self.mode)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def conjugate(self) -> "ComplexScalar":
        return ComplexScalar(self.re, -self.im, self.mode)

    def abs2(self):
        """Squared modulus, exact in exact mode."""
        return self.re * self.re + self.im * self.im

    def __abs__(self) -> float:
        return float(abs(complex(float(self.re), float(self.im))))

    def is_zero(self, scale: float = 1.0) -> bool:
        if self.mode == EXACT:
            return self.re == 0 and self.im == 0
        return abs(self) <= TOL.residual * max(scale, 1.0)

    def to_complex(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __str__(self) -> str:
        if self.im == 0:
            return str(self.re)
        return f"({self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}i)"


def _to_qqi(s: ComplexScalar):
    return QQ_I(QQ(s.re.numerator, s.re.denominator), QQ(s.im.numerator, s.im.denominator))


def _qq_to_fraction(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


def _from_qqi(e) -> ComplexScalar:
    return ComplexScalar(_qq_to_fraction(e.x), _qq_to_fraction(e.y), EXACT)


def _dm(rows: Sequence[Sequence], shape: Tuple[int, int]) -> DomainMatrix:
    return DomainMatrix([list(r) for r in rows], shape, QQ_I)


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------

def _equilibrate(data: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Scale columns to unit norm before an SVD rank decision.

    Columns below TOL.pivot times the largest column norm are rounding noise
    and are zeroed. Returns (scaled, weights): live columns of scaled are
    data * weights, so A x = 0 iff scaled (x / weights) = 0.
    """
    norms = np.linalg.norm(data, axis=0)
    top = float(norms.max()) if norms.size else 0.0
    live = norms > TOL.pivot * top
    weights = np.where(live, 1.0 / np.where(live, norms, 1.0), 1.0)
    return np.where(live, data * weights, 0.0), weights


def _numeric_rank(s: np.ndarray) -> int:
    if not s.size or s[0] == 0:
        return 0
    return int(np.sum(s > TOL.pivot * s[0]))


class Matrix:
    """
    A complex matrix in exact or float mode.

    Group elements and Lie algebra elements share this type; GroupElem and
    LieElem below are aliases naming the intent. Instances are immutable.
    """

    __slots__ = ("_data", "mode", "shape")

    def __init__(self, data, mode: str):
        self.mode = _check_mode(mode)
        if mode == EXACT:
            if not isinstance(data, DomainMatrix):
                raise TypeError("Exact matrices wrap a DomainMatrix")
            self._data = data
            self.shape = tuple(data.shape)
        else:
            arr = np.array(data, dtype=complex)
            arr.setflags(write=False)
            self._data = arr
            self.shape = arr.shape

    # -- construction -------------------------------------------------------

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Number]], mode: str) -> "Matrix":
        """Build from nested rows of numbers, "p/q" strings or (re, im) pairs."""
        _check_mode(mode)
        rows = [list(r) for r in rows]
        m = len(rows)
        n = len(rows[0]) if m else 0
        if any(len(r) != n for r in rows):
            raise ShapeError("Ragged rows in matrix input")
        scalars = [[ComplexScalar.of(x, mode) for x in r] for r in rows]
        if mode == EXACT:
            return cls(_dm([[_to_qqi(x) for x in r] for r in scalars], (m, n)), EXACT)
        return cls([[x.to_complex() for x in r] for r in scalars], FLOAT)

    @classmethod
    def zeros(cls, m: int, n: Optional[int] = None, mode: str = EXACT) -> "Matrix":
        n = m if n is None else n
        return cls.from_rows([[0] * n for _ in range(m)], mode)

    @classmethod
    def identity(cls, n: int, mode: str = EXACT) -> "Matrix":
        return cls.from_rows([[1 if i == j else 0 for j in range(n)] for i in range(n)], mode)

    @classmethod
    def unit(cls, n: int, i: int, j: int, mode: str = EXACT) -> "Matrix":
        """Elementary matrix E_ij (0-based)."""
        return cls.from_rows([[1 if (a, b) == (i, j) else 0 for b in range(n)] for a in range(n)], mode)

    @classmethod
    def diag(cls, values: Sequence[Number], mode: str = EXACT) -> "Matrix":
        n = len(values)
        return cls.from_rows([[values[i] if i == j else 0 for j in range(n)] for i in range(n)], mode)

    @classmethod
    def from_flat(cls, values: Sequence[Number], m: int, n: int, mode: str) -> "Matrix":
        """Row-major reshape of a flat vector."""
        values = list(values)
        if len(values) != m * n:
            raise ShapeError(f"Cannot reshape {len(values)} values to {m}x{n}")
        return cls.from_rows([values[i * n:(i + 1) * n] for i in range(m)], mode)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[Number]], mode: str) -> "Matrix":
        columns = [list(c) for c in columns]
        if not columns:
            raise ShapeError("At least one column is required")
        m = len(columns[0])
        return cls.from_rows([[c[i] for c in columns] for i in range(m)], mode)

    # -- access -------------------------------------------------------------

    @property
    def n(self) -> int:
        return self.shape[0]

    def rows(self) -> List[List[ComplexScalar]]:
        if self.mode == EXACT:
            return [[_from_qqi(e) for e in row] for row in self._data.to_list()]
        return [[ComplexScalar.of(complex(e), FLOAT) for e in row] for row in self._data]

    def entry(self, i: int, j: int) -> ComplexScalar:
        if self.mode == EXACT:
            return self.rows()[i][j]
        return ComplexScalar.of(complex(self._data[i, j]), FLOAT)

    def flat(self) -> List[ComplexScalar]:
        return [x for row in self.rows() for x in row]

    def diagonal(self) -> List[ComplexScalar]:
        rows = self.rows()
        return [rows[i][i] for i in range(min(self.shape))]

    def to_numpy(self) -> np.ndarray:
        if self.mode == FLOAT:
            return np.array(self._data)
        return np.array([[x.to_complex() for x in row] for row in self.rows()], dtype=complex)

    def to_float(self) -> "Matrix":
        return Matrix(self.to_numpy(), FLOAT)

    # -- arithmetic ---------------------------------------------------------

    def _same(self, other: "Matrix", op: str) -> None:
        if other.mode != self.mode:
            raise ModeMismatchError(f"Cannot {op} {self.mode} and {other.mode} matrices")

    def __matmul__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        self._same(other, "multiply")
        if self.shape[1] != other.shape[0]:
            raise ShapeError(f"Cannot multiply {self.shape} by {other.shape}")
        if self.mode == EXACT:
            return Matrix(self._data.matmul(other._data), EXACT)
        return Matrix(self._data @ other._data, FLOAT)

    def __add__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        self._same(other, "add")
        if self.shape != other.shape:
            raise ShapeError(f"Cannot add {self.shape} and {other.shape}")
        if self.mode == EXACT:
            return Matrix(self._data.add(other._data), EXACT)
        return Matrix(self._data + other._data, FLOAT)

    def __sub__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        self._same(other, "subtract")
        if self.shape != other.shape:
            raise ShapeError(f"Cannot subtract {self.shape} and {other.shape}")
        if self.mode == EXACT:
            return Matrix(self._data.sub(other._data), EXACT)
        return Matrix(self._data - other._data, FLOAT)

    def __neg__(self):
        if self.mode == EXACT:
            return Matrix(self._data.neg(), EXACT)
        return Matrix(-self._data, FLOAT)

    def __mul__(self, scalar):
        if isinstance(scalar, (Matrix, Jet)):
            return NotImplemented
        s = ComplexScalar.of(scalar, self.mode)
        if self.mode == EXACT:
            e = _to_qqi(s)
            m = self.shape[1]
            scalar_matrix = _dm([[e if i == j else QQ_I.zero for j in range(m)] for i in range(m)], (m, m))
            return Matrix(self._data.matmul(scalar_matrix), EXACT)
        return Matrix(self._data * s.to_complex(), FLOAT)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix) or other.mode != self.mode or other.shape != self.shape:
            return False
        if self.mode == EXACT:
            return self._data == other._data
        return bool(np.array_equal(self._data, other._data))

    __hash__ = None

    def transpose(self) -> "Matrix":
        if self.mode == EXACT:
            return Matrix(self._data.transpose(), EXACT)
        return Matrix(self._data.T, FLOAT)

    def trace(self) -> ComplexScalar:
        if self.shape[0] != self.shape[1]:
            raise ShapeError("Trace of a non-square matrix")
        total = ComplexScalar.zero(self.mode)
        for x in self.diagonal():
            total = total + x
        return total

    def det(self) -> ComplexScalar:
        if self.shape[0] != self.shape[1]:
            raise ShapeError("Determinant of a non-square matrix")
        if self.mode == EXACT:
            return _from_qqi(self._data.det())
        return ComplexScalar.of(complex(np.linalg.det(self._data)), FLOAT)

    def is_invertible(self) -> bool:
        if self.shape[0] != self.shape[1]:
            return False
        if self.mode == EXACT:
            return not self.det().is_zero()
        if self.shape[0] == 0:
            return True
        s = np.linalg.svd(self._data, compute_uv=False)
        floor = max(TOL.invertibility, self.shape[0] * np.finfo(float).eps)
        return bool(s[-1] > floor * s[0])

    def inv(self) -> "Matrix":
        if not self.is_invertible():
            raise ValueError(f"Matrix is singular:\n{self}")
        if self.mode == EXACT:
            return Matrix(self._data.inv(), EXACT)
        return Matrix(np.linalg.inv(self._data), FLOAT)

    def charpoly(self) -> List[ComplexScalar]:
        """Coefficients of det(xI - A), leading coefficient first."""
        if self.mode == EXACT:
            return [_from_qqi(c) for c in self._data.charpoly()]
        return [ComplexScalar.of(complex(c), FLOAT) for c in np.poly(self._data)]

    def max_abs(self) -> float:
        if self.mode == EXACT:
            return max((abs(x) for x in self.flat()), default=0.0)
        return float(np.max(np.abs(self._data))) if self._data.size else 0.0

    def is_zero(self, scale: float = 1.0) -> bool:
        if self.mode == EXACT:
            return all(x.is_zero() for x in self.flat())
        return self.max_abs() <= TOL.residual * max(scale, 1.0)

    def norm(self) -> float:
        """Spectral norm (largest singular value)."""
        if min(self.shape) == 0:
            return 0.0
        return float(np.linalg.norm(self.to_numpy(), 2))

    def close_to(self, other: "Matrix", scale: float = 1.0) -> bool:
        """
        Exact equality in exact mode, relative closeness in float mode.

        scale multiplies the tolerance; pass the size of whatever the two
        sides were computed from.
        """
        self._same(other, "compare")
        if self.mode == EXACT:
            return self == other
        size = max(self.max_abs(), other.max_abs(), 1.0) * max(scale, 1.0)
        return (self - other).max_abs() <= TOL.residual * size

    def __repr__(self) -> str:
        body = "; ".join(", ".join(str(x) for x in row) for row in self.rows())
        return f"Matrix[{self.mode}]([{body}])"

    __str__ = __repr__

    # -- linear algebra -----------------------------------------------------

    def hstack(self, other: "Matrix") -> "Matrix":
        self._same(other, "stack")
        if self.shape[0] != other.shape[0]:
            raise ShapeError("Row counts differ in hstack")
        if self.mode == EXACT:
            return Matrix(self._data.hstack(other._data), EXACT)
        return Matrix(np.hstack([self._data, other._data]), FLOAT)

    def rank(self) -> int:
        if min(self.shape) == 0:
            return 0
        if self.mode == EXACT:
            return int(self._data.rank())
        scaled, _ = _equilibrate(self._data)
        s = np.linalg.svd(scaled, compute_uv=False)
        return _numeric_rank(s)

    def nullspace(self) -> List[List[ComplexScalar]]:
        """Basis of {x : A x = 0} as a list of coordinate vectors."""
        ncols = self.shape[1]
        if self.mode == EXACT:
            if self.shape[0] == 0:
                return [[ComplexScalar.one(EXACT) if i == j else ComplexScalar.zero(EXACT)
                         for i in range(ncols)] for j in range(ncols)]
            basis = self._data.nullspace()
            return [[_from_qqi(e) for e in row] for row in basis.to_list()]
        if self.shape[0] == 0:
            return [[ComplexScalar.of(1.0 if i == j else 0.0, FLOAT) for i in range(ncols)]
                    for j in range(ncols)]
        scaled, weights = _equilibrate(self._data)
        _, s, vh = np.linalg.svd(scaled)
        r = _numeric_rank(s)
        # A D y = 0 with D = diag(weights) gives x = D y
        kernel = vh[r:].conj() * weights
        kernel = kernel / np.linalg.norm(kernel, axis=1, keepdims=True)
        return [[ComplexScalar.of(complex(x), FLOAT) for x in row] for row in kernel]

    def solve(self, rhs: "Matrix") -> "Matrix":
        """
        Particular solution x of A x = rhs (rhs a column vector).

        Raises:
            ValueError: If the system is inconsistent
        """
        self._same(rhs, "solve")
        m, ncols = self.shape
        if rhs.shape != (m, 1):
            raise ShapeError(f"Right-hand side must be {m}x1, got {rhs.shape}")
        if self.mode == EXACT:
            reduced, pivots = self.hstack(rhs)._data.rref()
            if ncols in pivots:
                raise ValueError("Linear system is inconsistent")
            rows = reduced.to_list()
            sol = [QQ_I.zero] * ncols
            for r, c in enumerate(pivots):
                sol[c] = rows[r][ncols]
            return Matrix(_dm([[e] for e in sol], (ncols, 1)), EXACT)
        x, *_ = np.linalg.lstsq(self._data, rhs._data, rcond=None)
        residual = np.max(np.abs(self._data @ x - rhs._data)) if m else 0.0
        scale = max(float(np.max(np.abs(rhs._data))) if m else 0.0, 1.0)
        if residual > TOL.residual * scale * max(1.0, float(np.max(np.abs(self._data))) if m else 1.0):
            raise ValueError(f"Linear system is inconsistent (residual {residual:.3e})")
        return Matrix(x, FLOAT)


GroupElem = Matrix
LieElem = Matrix


def same_mode(*items) -> str:
    """Common mode of matrices/scalars/jets, or ModeMismatchError."""
    modes = {value_of(x).mode if isinstance(x, (Matrix, Jet)) else x.mode for x in items}
    if len(modes) != 1:
        raise ModeMismatchError(f"Mixed arithmetic modes: {sorted(modes)}")
    return modes.pop()


def charpoly_equal(a: Matrix, b: Matrix) -> bool:
    """Characteristic polynomials agree (exactly, or within tolerance in float mode)."""
    same_mode(a, b)
    pa, pb = a.charpoly(), b.charpoly()
    if len(pa) != len(pb):
        return False
    scale = max([abs(x) for x in pa + pb] + [1.0])
    return all((x - y).is_zero(scale) for x, y in zip(pa, pb))


# ---------------------------------------------------------------------------
# Jets
# ---------------------------------------------------------------------------

class Jet:
    """
    A matrix together with its directional derivative.

    Products, inverses and sums propagate exactly:
    d(AB) = (dA)B + A(dB), d(A^-1) = -A^-1 (dA) A^-1.
    """

    __slots__ = ("value", "deriv")

    def __init__(self, value: Matrix, deriv: Matrix):
        if value.shape != deriv.shape:
            raise ShapeError("Jet value and derivative differ in shape")
        same_mode(value, deriv)
        self.value = value
        self.deriv = deriv

    @classmethod
    def constant(cls, value: Matrix) -> "Jet":
        return cls(value, Matrix.zeros(value.shape[0], value.shape[1], value.mode))

    @classmethod
    def from_tangent(cls, value: Matrix, xi: Matrix) -> "Jet":
        """Jet of a slot g moving with right-logarithmic tangent xi (dg = xi g)."""
        return cls(value, xi @ value)

    def __matmul__(self, other):
        if isinstance(other, Jet):
            return Jet(self.value @ other.value, self.deriv @ other.value + self.value @ other.deriv)
        if isinstance(other, Matrix):
            return Jet(self.value @ other, self.deriv @ other)
        return NotImplemented

    def __rmatmul__(self, other):
        if isinstance(other, Matrix):
            return Jet(other @ self.value, other @ self.deriv)
        return NotImplemented

    def __add__(self, other):
        other = as_jet(other)
        return Jet(self.value + other.value, self.deriv + other.deriv)

    __radd__ = __add__

    def __sub__(self, other):
        other = as_jet(other)
        return Jet(self.value - other.value, self.deriv - other.deriv)

    def __rsub__(self, other):
        return as_jet(other) - self

    def __neg__(self):
        return Jet(-self.value, -self.deriv)

    def __mul__(self, scalar):
        return Jet(self.value * scalar, self.deriv * scalar)

    __rmul__ = __mul__

    def inv(self) -> "Jet":
        vi = self.value.inv()
        return Jet(vi, -(vi @ self.deriv @ vi))

    @property
    def mode(self) -> str:
        return self.value.mode

    @property
    def shape(self):
        return self.value.shape


def as_jet(x: Union[Matrix, Jet]) -> Jet:
    return x if isinstance(x, Jet) else Jet.constant(x)


def value_of(x: Union[Matrix, Jet]) -> Matrix:
    return x.value if isinstance(x, Jet) else x


def deriv_of(x: Union[Matrix, Jet]) -> Matrix:
    return as_jet(x).deriv


def right_log(x: Union[Matrix, Jet]) -> Matrix:
    """dg g^-1 (zero for a constant)."""
    j = as_jet(x)
    return j.deriv @ j.value.inv()


def left_log(x: Union[Matrix, Jet]) -> Matrix:
    """g^-1 dg (zero for a constant)."""
    j = as_jet(x)
    return j.value.inv() @ j.deriv


def product(factors: Iterable[Union[Matrix, Jet]], n: int, mode: str):
    """Ordered product of matrices and jets; identity for an empty list."""
    result: Union[Matrix, Jet] = Matrix.identity(n, mode)
    for f in factors:
        result = result @ f
    return result


def ad(g: Matrix, x: Matrix) -> Matrix:
    """Ad_g(x) = g x g^-1."""
    return g @ x @ g.inv()


def trace_form(x: Matrix, y: Matrix) -> ComplexScalar:
    """
    The invariant form (X, Y) = tr(XY) on gl_n.

    Raises:
        ModeMismatchError: If X and Y have different modes
        ShapeError: If X and Y have different sizes
    """
    if x.shape != y.shape:
        raise ShapeError(f"trace_form needs equal sizes, got {x.shape} and {y.shape}")
    return (x @ y).trace()


# ---------------------------------------------------------------------------
# Partitions and patterns
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Partition:
    """
    An ordered partition of {0..n-1} into contiguous intervals [start, stop).

    Encodes the Levi subgroup of block-diagonal matrices, with the block upper
    (resp. lower) triangular parabolic and its unipotent radical.
    """
    blocks: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        expected = 0
        for start, stop in self.blocks:
            if start != expected or stop <= start:
                raise ValueError(f"Partition blocks must be contiguous ascending intervals: {self.blocks}")
            expected = stop
        if not self.blocks:
            raise ValueError("Partition needs at least one block")

    @classmethod
    def from_sizes(cls, sizes: Sequence[int]) -> "Partition":
        blocks, start = [], 0
        for s in sizes:
            blocks.append((start, start + int(s)))
            start += int(s)
        return cls(tuple(blocks))

    @classmethod
    def trivial(cls, n: int) -> "Partition":
        """One block: the whole group."""
        return cls(((0, n),))

    @classmethod
    def discrete(cls, n: int) -> "Partition":
        """Singletons: the diagonal torus."""
        return cls.from_sizes([1] * n)

    @property
    def n(self) -> int:
        return self.blocks[-1][1]

    @property
    def sizes(self) -> Tuple[int, ...]:
        return tuple(stop - start for start, stop in self.blocks)

    @property
    def depth(self) -> int:
        """Number of superdiagonal block levels of the unipotent radical."""
        return len(self.blocks) - 1

    def block_index(self, i: int) -> int:
        for b, (start, stop) in enumerate(self.blocks):
            if start <= i < stop:
                return b
        raise IndexError(f"Index {i} outside partition of {self.n}")

    def level(self, i: int, j: int) -> int:
        """Block distance of entry (i, j): positive above the block diagonal."""
        return self.block_index(j) - self.block_index(i)

    def refines(self, other: "Partition") -> bool:
        """Every block of self lies inside a block of other."""
        return self.n == other.n and all(
            other.block_index(start) == other.block_index(stop - 1) for start, stop in self.blocks
        )

    def levi_dim(self) -> int:
        return sum(s * s for s in self.sizes)

    def unipotent_dim(self) -> int:
        """dim U+ (= dim U-)."""
        return (self.n * self.n - self.levi_dim()) // 2


@dataclass(frozen=True)
class Pattern:
    """
    Zero pattern of a matrix subgroup and of its Lie algebra.

    allowed lists the entries that may be nonzero in the Lie algebra. For a
    unipotent pattern the group elements are I + (allowed entries).
    """
    name: str
    n: int
    allowed: frozenset
    unipotent: bool = False

    @classmethod
    def general(cls, n: int) -> "Pattern":
        return cls("GL", n, frozenset((i, j) for i in range(n) for j in range(n)))

    @classmethod
    def levi(cls, part: Partition) -> "Pattern":
        n = part.n
        return cls(f"H{part.sizes}", n,
                   frozenset((i, j) for i in range(n) for j in range(n) if part.level(i, j) == 0))

    @classmethod
    def upper(cls, part: Partition) -> "Pattern":
        n = part.n
        return cls(f"U+{part.sizes}", n,
                   frozenset((i, j) for i in range(n) for j in range(n) if part.level(i, j) > 0), True)

    @classmethod
    def lower(cls, part: Partition) -> "Pattern":
        n = part.n
        return cls(f"U-{part.sizes}", n,
                   frozenset((i, j) for i in range(n) for j in range(n) if part.level(i, j) < 0), True)

    @classmethod
    def lower_parabolic(cls, part: Partition) -> "Pattern":
        n = part.n
        return cls(f"P-{part.sizes}", n,
                   frozenset((i, j) for i in range(n) for j in range(n) if part.level(i, j) <= 0))

    @property
    def dim(self) -> int:
        return len(self.allowed)

    def basis(self, mode: str) -> List[Matrix]:
        return [Matrix.unit(self.n, i, j, mode) for i, j in sorted(self.allowed)]

    def lie_violations(self, x: Matrix) -> List[str]:
        if x.shape != (self.n, self.n):
            return [f"expected {self.n}x{self.n}, got {x.shape[0]}x{x.shape[1]}"]
        scale = x.max_abs()
        bad = []
        for i, row in enumerate(x.rows()):
            for j, e in enumerate(row):
                if (i, j) not in self.allowed and not e.is_zero(scale):
                    bad.append(f"entry ({i + 1},{j + 1}) = {e} must vanish in {self.name}")
        return bad

    def group_violations(self, g: Matrix) -> List[str]:
        if g.shape != (self.n, self.n):
            return [f"expected {self.n}x{self.n}, got {g.shape[0]}x{g.shape[1]}"]
        if self.unipotent:
            ident = Matrix.identity(self.n, g.mode)
            bad = self.lie_violations(g - ident)
            scale = g.max_abs()
            for i, e in enumerate((g - ident).diagonal()):
                if not e.is_zero(scale):
                    bad.append(f"diagonal entry ({i + 1},{i + 1}) of {self.name} element must be 1")
            return bad
        bad = self.lie_violations(g)
        if not bad and not g.is_invertible():
            bad.append(f"element of {self.name} is not invertible")
        return bad

    def contains_lie(self, x: Matrix) -> bool:
        if self.unipotent and not all(e.is_zero(x.max_abs()) for e in x.diagonal()):
            return False
        return not self.lie_violations(x)

    def contains_group(self, g: Matrix) -> bool:
        return not self.group_violations(g)


def block_diagonal_part(x: Union[Matrix, Jet], part: Partition):
    """Projection P- -> H (or P+ -> H) keeping the diagonal blocks; linear, so jets pass through."""
    if isinstance(x, Jet):
        return Jet(block_diagonal_part(x.value, part), block_diagonal_part(x.deriv, part))
    rows = x.rows()
    zero = ComplexScalar.zero(x.mode)
    return Matrix.from_rows(
        [[rows[i][j] if part.level(i, j) == 0 else zero for j in range(x.shape[1])] for i in range(x.shape[0])],
        x.mode,
    )


def is_block_scalar(t: Matrix, part: Partition) -> bool:
    """t is diagonal and constant on each block (i.e. central in the Levi)."""
    rows = t.rows()
    scale = t.max_abs()
    for i in range(t.n):
        for j in range(t.n):
            if i != j and not rows[i][j].is_zero(scale):
                return False
    for start, stop in part.blocks:
        for i in range(start + 1, stop):
            if not (rows[i][i] - rows[start][start]).is_zero(scale):
                return False
    return True


# ---------------------------------------------------------------------------
# Linear maps and centralizers
# ---------------------------------------------------------------------------

def linear_map_matrix(fn: Callable[[Matrix], Union[Matrix, Sequence[Matrix]]],
                      basis: Sequence[Matrix], mode: str) -> Matrix:
    """
    Coordinate matrix of a linear map given on a basis.

    Each column is the row-major flattening of fn(basis_k); when fn returns a
    tuple of matrices their flattenings are concatenated.
    """
    columns = []
    for b in basis:
        out = fn(b)
        parts = [out] if isinstance(out, Matrix) else list(out)
        columns.append([x for p in parts for x in p.flat()])
    return Matrix.from_columns(columns, mode)


def gl_basis(n: int, mode: str) -> List[Matrix]:
    return Pattern.general(n).basis(mode)


def combine(coeffs: Sequence[ComplexScalar], basis: Sequence[Matrix]) -> Matrix:
    """Linear combination sum c_k b_k."""
    total = Matrix.zeros(basis[0].shape[0], basis[0].shape[1], basis[0].mode)
    for c, b in zip(coeffs, basis):
        if not c.is_zero():
            total = total + b * c
    return total


def span_rank(elements: Sequence[Matrix]) -> int:
    """Dimension of the linear span of a list of matrices."""
    if not elements:
        return 0
    return Matrix.from_columns([e.flat() for e in elements], elements[0].mode).rank()


def centralizer_subalgebra(g: Matrix) -> List[Matrix]:
    """
    Basis of the centralizer {X : gX = Xg} in gl_n.

    Centralizers in GL_n are unit groups of matrix algebras, hence connected,
    so this Lie algebra determines Z_G(g).
    """
    n = g.n
    basis = gl_basis(n, g.mode)
    op = linear_map_matrix(lambda x: g @ x - x @ g, basis, g.mode)
    return [combine(vec, basis) for vec in op.nullspace()]


def centralizer_within(g: Matrix, pattern: Pattern) -> bool:
    """The centralizer of g lies inside the algebra of a zero pattern."""
    return all(not pattern.lie_violations(b) for b in centralizer_subalgebra(g))


def centralizer_matches(g: Matrix, pattern: Pattern) -> bool:
    """The centralizer of g is exactly the algebra of a zero pattern."""
    basis = centralizer_subalgebra(g)
    return len(basis) == pattern.dim and all(not pattern.lie_violations(b) for b in basis)


def centralizer_contained_in_levi(g: Matrix, part: Partition) -> bool:
    """Every element of the centralizer of g is block diagonal for part."""
    return centralizer_within(g, Pattern.levi(part))


def centralizer_equals_levi(g: Matrix, part: Partition) -> bool:
    """The centralizer of g is exactly the block-diagonal algebra of part."""
    return centralizer_matches(g, Pattern.levi(part))
