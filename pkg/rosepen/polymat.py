"""Scalar polynomials, rational functions and matrix polynomials over Q or float.

Exact arithmetic keeps ``fractions.Fraction`` entries in numpy object arrays and
hands ring-level work (gcd, division, factorization, determinants) to sympy's
``QQ[lambda]`` ring. Float arithmetic stays in binary64 numpy arrays.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.linalg
from numpy.polynomial import polynomial as npoly
from sympy import QQ, Symbol
from sympy.polys.matrices import DomainMatrix

from .errors import DimensionError, FieldModeError

logger = logging.getLogger(__name__)

LAMBDA = Symbol("lambda")
QQ_LAMBDA = QQ[LAMBDA]
_RING = QQ_LAMBDA.ring
EPS = 2.0 ** -52


# -- scalars ---------------------------------------------------------------


def exact_scalar(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except ValueError as exc:
            raise FieldModeError(f"not a rational literal: {x!r}") from exc
    raise FieldModeError(f"cannot use {x!r} as an exact rational")


def float_scalar(x):
    if isinstance(x, complex):
        return x
    if isinstance(x, str):
        return float(Fraction(x.strip()))
    return float(x)


def exact_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        out[idx] = exact_scalar(x)
    return out


def float_array(values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.dtype == object:
        arr = np.vectorize(float_scalar, otypes=[float])(arr) if arr.size else arr.astype(float)
    return np.array(arr, dtype=float)


def as_array(values, exact: bool) -> np.ndarray:
    return exact_array(values) if exact else float_array(values)


def zeros(shape, exact: bool) -> np.ndarray:
    if exact:
        return np.full(shape, Fraction(0), dtype=object)
    return np.zeros(shape)


def eye(n: int, exact: bool) -> np.ndarray:
    out = zeros((n, n), exact)
    for i in range(n):
        out[i, i] = Fraction(1) if exact else 1.0
    return out


def is_exact_array(a: np.ndarray) -> bool:
    return a.dtype == object


def _qq(c: Fraction):
    return QQ(c.numerator, c.denominator)


def _fraction(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


# -- constant matrices -----------------------------------------------------


def _domain_matrix(a: np.ndarray) -> DomainMatrix:
    rows = [[_qq(exact_scalar(x)) for x in row] for row in a]
    return DomainMatrix(rows, a.shape, QQ)


def _from_domain_list(rows, shape) -> np.ndarray:
    out = zeros(shape, True)
    for i, row in enumerate(rows):
        for j, q in enumerate(row):
            out[i, j] = _fraction(q)
    return out


def _float_tolerance(a: np.ndarray, s: np.ndarray) -> float:
    return max(a.shape) * EPS * (s[0] if s.size else 0.0)


def matrix_rank(a: np.ndarray) -> int:
    if a.size == 0:
        return 0
    if is_exact_array(a):
        return _domain_matrix(a).rank()
    s = scipy.linalg.svdvals(a)
    return int(np.sum(s > _float_tolerance(a, s)))


def matrix_det(a: np.ndarray):
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"determinant of non-square {a.shape} matrix")
    if a.shape[0] == 0:
        return Fraction(1) if is_exact_array(a) else 1.0
    if is_exact_array(a):
        return _fraction(_domain_matrix(a).det())
    return float(scipy.linalg.det(a))


def is_singular(a: np.ndarray) -> bool:
    return matrix_rank(a) < a.shape[0]


def matrix_inv(a: np.ndarray) -> np.ndarray:
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"inverse of non-square {a.shape} matrix")
    if is_singular(a):
        raise np.linalg.LinAlgError("matrix is singular")
    if a.shape[0] == 0:
        return a.copy()
    if is_exact_array(a):
        return _from_domain_list(_domain_matrix(a).inv().to_list(), a.shape)
    return scipy.linalg.inv(a)


def rank_factorization(a: np.ndarray):
    """Return (L, R) with a = L @ R and L, R of full rank rho."""
    rows, cols = a.shape
    exact = is_exact_array(a)
    if a.size == 0:
        return zeros((rows, 0), exact), zeros((0, cols), exact)
    if exact:
        reduced, pivots = _domain_matrix(a).rref()
        rho = len(pivots)
        right = _from_domain_list(reduced.to_list()[:rho], (rho, cols))
        left = a[:, list(pivots)].copy()
        return left, right
    u, s, vt = scipy.linalg.svd(a)
    rho = int(np.sum(s > _float_tolerance(a, s)))
    return u[:, :rho] * s[:rho], vt[:rho, :]


# -- scalar polynomials ----------------------------------------------------


def _trim(coeffs: list) -> list:
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


@dataclass(frozen=True)
class Poly:
    """Polynomial in lambda with ascending coefficients; degree -1 means zero."""

    coeffs: tuple = ()
    exact: bool = True

    def __post_init__(self):
        convert = exact_scalar if self.exact else float_scalar
        object.__setattr__(self, "coeffs", tuple(_trim([convert(c) for c in self.coeffs])))

    @classmethod
    def constant(cls, c, exact: bool = True) -> "Poly":
        return cls((c,), exact)

    @classmethod
    def monomial(cls, k: int, c=1, exact: bool = True) -> "Poly":
        return cls((0,) * k + (c,), exact)

    @classmethod
    def from_ring(cls, element) -> "Poly":
        terms = dict(element.terms())
        if not terms:
            return cls((), True)
        deg = max(k for (k,) in terms)
        coeffs = [Fraction(0)] * (deg + 1)
        for (k,), q in terms.items():
            coeffs[k] = _fraction(q)
        return cls(tuple(coeffs), True)

    def to_ring(self):
        self._require_exact("ring conversion")
        return _RING.from_dict({(k,): _qq(c) for k, c in enumerate(self.coeffs) if c})

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lc(self):
        return self.coeffs[-1] if self.coeffs else 0

    def monic(self) -> "Poly":
        if self.is_zero:
            return self
        lc = self.lc
        return Poly(tuple(c / lc for c in self.coeffs), self.exact)

    def __call__(self, x):
        result = Fraction(0) if self.exact else 0.0
        for c in reversed(self.coeffs):
            result = result * x + c
        return result

    def _lift(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.exact != self.exact:
                raise FieldModeError("mixed exact and float polynomials")
            return other
        return Poly.constant(other, self.exact)

    def _require_exact(self, what: str):
        if not self.exact:
            raise FieldModeError(f"{what} needs exact mode")

    def _float_coeffs(self) -> np.ndarray:
        return np.array(self.coeffs or (0.0,), dtype=complex if any(
            isinstance(c, complex) for c in self.coeffs) else float)

    def __add__(self, other):
        other = self._lift(other)
        if self.exact:
            return Poly.from_ring(self.to_ring() + other.to_ring())
        return Poly(tuple(npoly.polyadd(self._float_coeffs(), other._float_coeffs())), False)

    __radd__ = __add__

    def __neg__(self):
        return Poly(tuple(-c for c in self.coeffs), self.exact)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        if self.exact:
            return Poly.from_ring(self.to_ring() * other.to_ring())
        return Poly(tuple(npoly.polymul(self._float_coeffs(), other._float_coeffs())), False)

    __rmul__ = __mul__

    def __divmod__(self, other):
        other = self._lift(other)
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        if self.exact:
            q, r = divmod(self.to_ring(), other.to_ring())
            return Poly.from_ring(q), Poly.from_ring(r)
        q, r = npoly.polydiv(self._float_coeffs(), other._float_coeffs())
        return Poly(tuple(q), False), Poly(tuple(r), False)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def exact_quotient(self, other) -> "Poly":
        q, r = divmod(self, other)
        if not r.is_zero:
            raise ArithmeticError(f"{other} does not divide {self}")
        return q

    def divides(self, other: "Poly") -> bool:
        """True when self | other."""
        if self.is_zero:
            return other.is_zero
        return (other % self).is_zero

    def gcd(self, other) -> "Poly":
        other = self._lift(other)
        self._require_exact("gcd")
        return Poly.from_ring(self.to_ring().gcd(other.to_ring())).monic()

    def lcm(self, other) -> "Poly":
        other = self._lift(other)
        self._require_exact("lcm")
        if self.is_zero or other.is_zero:
            return Poly((), True)
        return Poly.from_ring(self.to_ring().lcm(other.to_ring())).monic()

    def multiplicity(self, divisor: "Poly") -> int:
        """Largest k with divisor**k | self (0 for the zero polynomial)."""
        if self.is_zero or divisor.degree < 1:
            return 0
        k, rest = 0, self
        while True:
            q, r = divmod(rest, divisor)
            if not r.is_zero:
                return k
            k, rest = k + 1, q

    def root_multiplicity(self, x0) -> int:
        return self.multiplicity(Poly((-x0, 1), self.exact))

    def roots(self) -> np.ndarray:
        """Numeric roots through companion-matrix eigenvalues."""
        if self.degree < 1:
            return np.array([], dtype=complex)
        return npoly.polyroots(np.array([complex(c) if isinstance(c, complex) else float(c)
                                         for c in self.coeffs]))

    def shift(self, k: int) -> "Poly":
        if self.is_zero:
            return self
        return Poly((0,) * k + self.coeffs, self.exact)

    def __str__(self):
        if self.is_zero:
            return "0"
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            sign = "-" if (c < 0 if not isinstance(c, complex) else False) else "+"
            mag = abs(c) if not isinstance(c, complex) else c
            body = "" if (mag == 1 and k > 0) else str(mag)
            power = "" if k == 0 else ("λ" if k == 1 else f"λ^{k}")
            terms.append((sign, body + power))
        text = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        for sign, body in terms[1:]:
            text += f" {sign} {body}"
        return text


@dataclass(frozen=True)
class RootGroup:
    """Roots of one irreducible factor of an exact polynomial."""

    factor: Poly
    values: tuple
    multiplicity: int

    @property
    def exact(self) -> bool:
        return self.factor.degree == 1


def root_groups(p: Poly) -> list:
    """Split an exact polynomial into irreducible factors over Q.

    Linear factors keep their rational root; the roots of the remaining
    factors are taken numerically from each factor separately.
    """
    p._require_exact("exact root isolation")
    if p.degree < 1:
        return []
    _, factors = p.to_ring().factor_list()
    groups = []
    for element, mult in factors:
        factor = Poly.from_ring(element).monic()
        if factor.degree == 1:
            values = (-factor.coeffs[0],)
        else:
            values = tuple(sorted(factor.roots(), key=lambda z: (z.real, z.imag)))
        groups.append(RootGroup(factor, values, mult))
    groups.sort(key=lambda g: (g.factor.degree, tuple(float(c) for c in g.factor.coeffs)))
    return groups


def product(polys: Iterable[Poly], exact: bool = True) -> Poly:
    return reduce(lambda a, b: a * b, polys, Poly.constant(1, exact))


# -- rational functions ----------------------------------------------------


@dataclass(frozen=True)
class RationalFn:
    """num/den with monic den; coprime parts in exact mode."""

    num: Poly
    den: Poly = None

    def __post_init__(self):
        den = self.den if self.den is not None else Poly.constant(1, self.num.exact)
        if den.is_zero:
            raise ZeroDivisionError("rational function with zero denominator")
        if den.exact != self.num.exact:
            raise FieldModeError("mixed exact and float rational function")
        num = self.num
        if num.exact and not num.is_zero:
            g = num.gcd(den)
            num, den = num.exact_quotient(g), den.exact_quotient(g)
        elif num.is_zero:
            den = Poly.constant(1, num.exact)
        lc = den.lc
        object.__setattr__(self, "num", Poly(tuple(c / lc for c in num.coeffs), num.exact))
        object.__setattr__(self, "den", den.monic())

    @classmethod
    def of(cls, p) -> "RationalFn":
        if isinstance(p, RationalFn):
            return p
        if isinstance(p, Poly):
            return cls(p)
        return cls(Poly.constant(p))

    @property
    def exact(self) -> bool:
        return self.num.exact

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def is_polynomial(self) -> bool:
        return self.den.degree == 0

    def __add__(self, other):
        other = RationalFn.of(other)
        return RationalFn(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFn(-self.num, self.den)

    def __sub__(self, other):
        return self + (-RationalFn.of(other))

    def __mul__(self, other):
        other = RationalFn.of(other)
        return RationalFn(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = RationalFn.of(other)
        if other.is_zero:
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFn(self.num * other.den, self.den * other.num)

    def __call__(self, x):
        return self.num(x) / self.den(x)

    def valuation(self, x0) -> int:
        """Order of vanishing at x0 (negative at a pole)."""
        return self.num.root_multiplicity(x0) - self.den.root_multiplicity(x0)

    def __str__(self):
        if self.is_polynomial:
            return str(self.num)
        return f"({self.num})/({self.den})"


# -- matrix polynomials ----------------------------------------------------


class PolyMatrix:
    """Dense matrix polynomial stored as a coefficient stack (degree+1, rows, cols)."""

    __slots__ = ("coeffs", "exact")

    def __init__(self, coeffs, exact: bool = True):
        arr = as_array(coeffs, exact)
        if arr.ndim == 2:
            arr = arr[None]
        if arr.ndim != 3:
            raise DimensionError(f"coefficient stack must be 3-D, got shape {arr.shape}")
        while arr.shape[0] > 1 and np.all(arr[-1] == 0):
            arr = arr[:-1]
        if arr.shape[0] == 0:
            arr = zeros((1,) + arr.shape[1:], exact)
        arr.flags.writeable = False
        self.coeffs = arr
        self.exact = exact

    # construction

    @classmethod
    def constant(cls, matrix, exact: bool = True) -> "PolyMatrix":
        return cls(as_array(matrix, exact)[None], exact)

    @classmethod
    def identity(cls, n: int, exact: bool = True) -> "PolyMatrix":
        return cls(eye(n, exact)[None], exact)

    @classmethod
    def zeros(cls, rows: int, cols: int, exact: bool = True) -> "PolyMatrix":
        return cls(zeros((1, rows, cols), exact), exact)

    @classmethod
    def pencil(cls, lead, const, exact: bool = True) -> "PolyMatrix":
        """lambda * lead + const."""
        return cls(np.stack([as_array(const, exact), as_array(lead, exact)]), exact)

    @classmethod
    def from_entries(cls, grid: Sequence[Sequence[Poly]], exact: bool = True) -> "PolyMatrix":
        rows = len(grid)
        cols = len(grid[0]) if rows else 0
        deg = max([p.degree for row in grid for p in row] + [0])
        stack = zeros((deg + 1, rows, cols), exact)
        for i, row in enumerate(grid):
            if len(row) != cols:
                raise DimensionError("ragged polynomial matrix")
            for j, p in enumerate(row):
                if p.exact != exact:
                    raise FieldModeError("entry mode differs from matrix mode")
                for k, c in enumerate(p.coeffs):
                    stack[k, i, j] = c
        return cls(stack, exact)

    @classmethod
    def from_ring_grid(cls, grid, rows: int, cols: int) -> "PolyMatrix":
        if rows == 0 or cols == 0:
            return cls.zeros(rows, cols, True)
        return cls.from_entries([[Poly.from_ring(x) for x in row] for row in grid], True)

    @classmethod
    def hstack(cls, blocks: Sequence["PolyMatrix"]) -> "PolyMatrix":
        return cls._stack(blocks, axis=2)

    @classmethod
    def vstack(cls, blocks: Sequence["PolyMatrix"]) -> "PolyMatrix":
        return cls._stack(blocks, axis=1)

    @classmethod
    def _stack(cls, blocks, axis):
        exact = _common_mode(blocks)
        deg = max(b.coeffs.shape[0] for b in blocks)
        return cls(np.concatenate([b._padded(deg) for b in blocks], axis=axis), exact)

    @classmethod
    def block_diag(cls, blocks: Sequence["PolyMatrix"]) -> "PolyMatrix":
        exact = _common_mode(blocks)
        deg = max(b.coeffs.shape[0] for b in blocks)
        rows = sum(b.rows for b in blocks)
        cols = sum(b.cols for b in blocks)
        stack = zeros((deg, rows, cols), exact)
        r = c = 0
        for b in blocks:
            stack[:, r:r + b.rows, c:c + b.cols] = b._padded(deg)
            r, c = r + b.rows, c + b.cols
        return cls(stack, exact)

    # shape and access

    @property
    def rows(self) -> int:
        return self.coeffs.shape[1]

    @property
    def cols(self) -> int:
        return self.coeffs.shape[2]

    @property
    def shape(self):
        return self.coeffs.shape[1:]

    @property
    def degree(self) -> int:
        if self.coeffs.shape[0] == 1 and np.all(self.coeffs[0] == 0):
            return -1
        return self.coeffs.shape[0] - 1

    @property
    def is_zero(self) -> bool:
        return self.degree == -1

    def coefficient(self, k: int) -> np.ndarray:
        if 0 <= k < self.coeffs.shape[0]:
            return self.coeffs[k].copy()
        return zeros(self.shape, self.exact)

    def entry(self, i: int, j: int) -> Poly:
        return Poly(tuple(self.coeffs[:, i, j]), self.exact)

    def entries(self) -> list:
        return [[self.entry(i, j) for j in range(self.cols)] for i in range(self.rows)]

    def submatrix(self, rows: slice, cols: slice) -> "PolyMatrix":
        return PolyMatrix(self.coeffs[:, rows, cols], self.exact)

    def _padded(self, layers: int) -> np.ndarray:
        pad = zeros((layers - self.coeffs.shape[0],) + self.shape, self.exact)
        return np.concatenate([self.coeffs, pad], axis=0)

    # arithmetic

    def _check(self, other: "PolyMatrix"):
        if other.exact != self.exact:
            raise FieldModeError("mixed exact and float polynomial matrices")

    def __add__(self, other: "PolyMatrix") -> "PolyMatrix":
        self._check(other)
        if self.shape != other.shape:
            raise DimensionError(f"cannot add {self.shape} and {other.shape}")
        layers = max(self.coeffs.shape[0], other.coeffs.shape[0])
        return PolyMatrix(self._padded(layers) + other._padded(layers), self.exact)

    def __neg__(self) -> "PolyMatrix":
        return PolyMatrix(-self.coeffs, self.exact)

    def __sub__(self, other: "PolyMatrix") -> "PolyMatrix":
        return self + (-other)

    def __matmul__(self, other: "PolyMatrix") -> "PolyMatrix":
        self._check(other)
        if self.cols != other.rows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        da, db = self.coeffs.shape[0], other.coeffs.shape[0]
        out = zeros((da + db - 1, self.rows, other.cols), self.exact)
        for i in range(da):
            if not np.any(self.coeffs[i] != 0):
                continue
            for j in range(db):
                out[i + j] = out[i + j] + self.coeffs[i] @ other.coeffs[j]
        return PolyMatrix(out, self.exact)

    def scale(self, c) -> "PolyMatrix":
        return PolyMatrix(self.coeffs * c, self.exact)

    def shift(self, k: int = 1) -> "PolyMatrix":
        """Multiply by lambda**k."""
        if self.is_zero:
            return self
        pad = zeros((k,) + self.shape, self.exact)
        return PolyMatrix(np.concatenate([pad, self.coeffs], axis=0), self.exact)

    def transpose(self) -> "PolyMatrix":
        return PolyMatrix(np.transpose(self.coeffs, (0, 2, 1)), self.exact)

    def evaluate(self, x) -> np.ndarray:
        return poly_matrix_eval(self, x)

    def __eq__(self, other):
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return (self.exact == other.exact and self.coeffs.shape == other.coeffs.shape
                and bool(np.all(self.coeffs == other.coeffs)))

    def __hash__(self):
        return hash((self.exact, self.coeffs.shape, tuple(str(c) for c in self.coeffs.flat)))

    def first_nonzero(self):
        """(row, col) of the first nonzero entry in row-major order, or None."""
        mask = np.any(self.coeffs != 0, axis=0)
        hits = np.argwhere(mask)
        return tuple(int(v) for v in hits[0]) if hits.size else None

    def to_domain_matrix(self) -> DomainMatrix:
        if not self.exact:
            raise FieldModeError("domain matrix conversion needs exact mode")
        rows = [[self.entry(i, j).to_ring() for j in range(self.cols)] for i in range(self.rows)]
        return DomainMatrix(rows, self.shape, QQ_LAMBDA)

    @classmethod
    def from_domain_matrix(cls, dm: DomainMatrix) -> "PolyMatrix":
        rows, cols = dm.shape
        grid = dm.to_list()
        if rows == 0 or cols == 0:
            return cls.zeros(rows, cols, True)
        return cls.from_entries([[Poly.from_ring(x) for x in row] for row in grid], True)

    def __repr__(self):
        return f"PolyMatrix({self.rows}x{self.cols}, degree={self.degree}, exact={self.exact})"

    def __str__(self):
        return "\n".join("[" + ", ".join(str(p) for p in row) + "]" for row in self.entries())


def _common_mode(blocks) -> bool:
    modes = {b.exact for b in blocks}
    if len(modes) != 1:
        raise FieldModeError("blocks mix exact and float modes")
    return modes.pop()


def poly_matrix_eval(M: PolyMatrix, x) -> np.ndarray:
    """Horner evaluation sum_j x**j A_j."""
    if M.exact:
        x = exact_scalar(x) if not isinstance(x, Fraction) else x
    elif isinstance(x, Fraction):
        raise FieldModeError("exact evaluation point for a float matrix")
    result = M.coeffs[-1].copy()
    if not M.exact and isinstance(x, complex):
        result = result.astype(complex)
    for k in range(M.coeffs.shape[0] - 2, -1, -1):
        result = result * x + M.coeffs[k]
    return result


def poly_matrix_det(M: PolyMatrix) -> Poly:
    if M.rows != M.cols:
        raise DimensionError(f"determinant of non-square {M.shape} polynomial matrix")
    if not M.exact:
        raise FieldModeError("polynomial determinants need exact mode; evaluate pointwise instead")
    if M.rows == 0:
        return Poly.constant(1)
    return Poly.from_ring(M.to_domain_matrix().det())


def horner_shift(P: PolyMatrix, k: int, m: Optional[int] = None) -> PolyMatrix:
    """P_k = A_{m-k} + lambda A_{m-k+1} + ... + lambda**k A_m.

    ``m`` defaults to the degree of P; callers with a padded degree pass it.
    """
    m = P.degree if m is None else m
    if not 0 <= k <= m:
        raise DimensionError(f"Horner shift index {k} outside 0..{m}")
    return PolyMatrix(np.stack([P.coefficient(j) for j in range(m - k, m + 1)]), P.exact)


def block_transpose(M: PolyMatrix, block_rows: int, block_cols: int, block_size: int) -> PolyMatrix:
    if M.shape != (block_rows * block_size, block_cols * block_size):
        raise DimensionError(
            f"{M.shape} does not split into {block_rows}x{block_cols} blocks of size {block_size}")
    layers = M.coeffs.shape[0]
    blocks = M.coeffs.reshape(layers, block_rows, block_size, block_cols, block_size)
    swapped = np.transpose(blocks, (0, 3, 2, 1, 4))
    return PolyMatrix(swapped.reshape(layers, block_cols * block_size, block_rows * block_size),
                      M.exact)


# -- rational matrices -----------------------------------------------------


class RationalMatrix:
    __slots__ = ("grid",)

    def __init__(self, grid: Sequence[Sequence]):
        self.grid = tuple(tuple(RationalFn.of(x) for x in row) for row in grid)
        if len({len(row) for row in self.grid}) > 1:
            raise DimensionError("ragged rational matrix")
        if len({x.exact for row in self.grid for x in row}) > 1:
            raise FieldModeError("rational matrix mixes exact and float entries")

    @classmethod
    def from_poly_matrix(cls, M: PolyMatrix) -> "RationalMatrix":
        return cls([[RationalFn(p) for p in row] for row in M.entries()])

    @property
    def rows(self) -> int:
        return len(self.grid)

    @property
    def cols(self) -> int:
        return len(self.grid[0]) if self.grid else 0

    @property
    def shape(self):
        return self.rows, self.cols

    @property
    def exact(self) -> bool:
        return all(x.exact for row in self.grid for x in row)

    def entry(self, i: int, j: int) -> RationalFn:
        return self.grid[i][j]

    def denominator_lcm(self) -> Poly:
        return reduce(lambda acc, x: acc.lcm(x.den), (x for row in self.grid for x in row),
                      Poly.constant(1))

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.shape != other.shape:
            raise DimensionError(f"cannot add {self.shape} and {other.shape}")
        return RationalMatrix([[a + b for a, b in zip(ra, rb)]
                               for ra, rb in zip(self.grid, other.grid)])

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.cols != other.rows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        zero = RationalFn(Poly())
        return RationalMatrix([[sum((self.grid[i][k] * other.grid[k][j] for k in range(self.cols)),
                                    zero)
                                for j in range(other.cols)] for i in range(self.rows)])

    def evaluate(self, x) -> np.ndarray:
        out = zeros(self.shape, self.exact)
        for i, row in enumerate(self.grid):
            for j, f in enumerate(row):
                out[i, j] = f(x)
        return out

    def __eq__(self, other):
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return self.grid == other.grid

    def __hash__(self):
        return hash(self.grid)

    def __repr__(self):
        return f"RationalMatrix({self.rows}x{self.cols})"


# -- Smith and Smith-McMillan forms ----------------------------------------


@dataclass(frozen=True)
class SmithForm:
    identity_count: int
    invariant_polys: tuple
    zero_rows: int
    zero_cols: int
    left: Optional[PolyMatrix] = field(default=None, compare=False, repr=False)
    right: Optional[PolyMatrix] = field(default=None, compare=False, repr=False)

    @property
    def rank(self) -> int:
        return self.identity_count + len(self.invariant_polys)

    def diagonal(self) -> list:
        return [Poly.constant(1)] * self.identity_count + list(self.invariant_polys)


@dataclass(frozen=True)
class SmithMcMillanForm:
    numerators: tuple
    denominators: tuple
    zero_rows: int
    zero_cols: int
    left: Optional[PolyMatrix] = field(default=None, compare=False, repr=False)
    right: Optional[PolyMatrix] = field(default=None, compare=False, repr=False)

    @property
    def rank(self) -> int:
        return len(self.numerators)


def _ring_identity(n: int):
    one, zero = _RING.one, _RING.zero
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


class _SmithReducer:
    """Elementary row/column reduction over Q[lambda] with optional transforms."""

    def __init__(self, grid, rows, cols, transforms):
        self.a = grid
        self.rows, self.cols = rows, cols
        self.left = _ring_identity(rows) if transforms else None
        self.right = _ring_identity(cols) if transforms else None

    def swap_rows(self, i, j):
        if i != j:
            self.a[i], self.a[j] = self.a[j], self.a[i]
            if self.left is not None:
                self.left[i], self.left[j] = self.left[j], self.left[i]

    def swap_cols(self, i, j):
        if i != j:
            for row in self.a:
                row[i], row[j] = row[j], row[i]
            if self.right is not None:
                for row in self.right:
                    row[i], row[j] = row[j], row[i]

    def add_row(self, target, source, q):
        """row[target] += q * row[source]."""
        for mat in (self.a, self.left):
            if mat is None:
                continue
            src, dst = mat[source], mat[target]
            for c in range(len(dst)):
                if src[c]:
                    dst[c] = dst[c] + q * src[c]

    def add_col(self, target, source, q):
        for mat in (self.a, self.right):
            if mat is None:
                continue
            for row in mat:
                if row[source]:
                    row[target] = row[target] + q * row[source]

    def scale_row(self, t, lc):
        for mat in (self.a, self.left):
            if mat is None:
                continue
            mat[t] = [x.quo_ground(lc) for x in mat[t]]

    def select_pivot(self, t):
        best = None
        for i in range(t, self.rows):
            for j in range(t, self.cols):
                x = self.a[i][j]
                if x and (best is None or x.degree() < best[0]):
                    best = (x.degree(), i, j)
        return None if best is None else best[1:]

    def eliminate(self, t) -> bool:
        """Clear column then row t against the pivot; False if a remainder survives."""
        p = self.a[t][t]
        clean = True
        for i in range(t + 1, self.rows):
            if self.a[i][t]:
                q, r = divmod(self.a[i][t], p)
                self.add_row(i, t, -q)
                clean = clean and not r
        if not clean:
            return False
        for j in range(t + 1, self.cols):
            if self.a[t][j]:
                q, r = divmod(self.a[t][j], p)
                self.add_col(j, t, -q)
                clean = clean and not r
        return clean

    def non_divisible_row(self, t):
        p = self.a[t][t]
        for i in range(t + 1, self.rows):
            for j in range(t + 1, self.cols):
                if self.a[i][j] and divmod(self.a[i][j], p)[1]:
                    return i
        return None

    def run(self):
        diag = []
        t = 0
        while t < min(self.rows, self.cols):
            pivot = self.select_pivot(t)
            if pivot is None:
                break
            self.swap_rows(t, pivot[0])
            self.swap_cols(t, pivot[1])
            if not self.eliminate(t):
                continue
            bad = self.non_divisible_row(t)
            if bad is not None:
                self.add_row(t, bad, _RING.one)
                continue
            self.scale_row(t, self.a[t][t].LC)
            diag.append(self.a[t][t])
            t += 1
        return diag


def smith_form(M: PolyMatrix, transforms: bool = False) -> SmithForm:
    """Smith form by gcd-pivot reduction.

    The pivot is the minimal-degree nonzero entry of the trailing submatrix,
    ties going to the lowest (row, col). With ``transforms`` the unimodular
    ``left`` and ``right`` satisfy left @ M @ right = diag form.
    """
    if not M.exact:
        raise FieldModeError("Smith form needs exact mode")
    rows, cols = M.shape
    grid = [[M.entry(i, j).to_ring() for j in range(cols)] for i in range(rows)]
    reducer = _SmithReducer(grid, rows, cols, transforms)
    diag = [Poly.from_ring(x) for x in reducer.run()]
    units = sum(1 for p in diag if p.degree == 0)
    logger.debug("smith form of %dx%d matrix: rank %d, %d unit factors", rows, cols,
                 len(diag), units)
    left = right = None
    if transforms:
        left = PolyMatrix.from_ring_grid(reducer.left, rows, rows)
        right = PolyMatrix.from_ring_grid(reducer.right, cols, cols)
    return SmithForm(units, tuple(diag[units:]), rows - len(diag), cols - len(diag),
                     left, right)


def smith_mcmillan(G: RationalMatrix, transforms: bool = False) -> SmithMcMillanForm:
    if not G.exact:
        raise FieldModeError("Smith-McMillan form needs exact mode")
    d = G.denominator_lcm()
    N = PolyMatrix.from_entries(
        [[x.num * d.exact_quotient(x.den) for x in row] for row in G.grid], True) \
        if G.rows and G.cols else PolyMatrix.zeros(G.rows, G.cols)
    sf = smith_form(N, transforms)
    numerators, denominators = [], []
    for eps in sf.diagonal():
        g = eps.gcd(d)
        numerators.append(eps.exact_quotient(g).monic())
        denominators.append(d.exact_quotient(g).monic())
    return SmithMcMillanForm(tuple(numerators), tuple(denominators), sf.zero_rows,
                             sf.zero_cols, sf.left, sf.right)


def zero_pole_polys(sm: SmithMcMillanForm):
    return product(sm.numerators).monic(), product(sm.denominators).monic()


def _index(sm: SmithMcMillanForm, divisor: Poly, kind: str) -> tuple:
    if kind == "zero":
        return tuple(p.multiplicity(divisor) for p in sm.numerators)
    if kind == "pole":
        return tuple(p.multiplicity(divisor) for p in reversed(sm.denominators))
    raise ValueError(f"kind must be 'zero' or 'pole', got {kind!r}")


def multiplicity_index(sm: SmithMcMillanForm, x0, kind: str) -> tuple:
    """Partial multiplicities at a rational point.

    Zeros come as (gamma_1, ..., gamma_k), poles as (alpha_k, ..., alpha_1);
    both read nondecreasing left to right.
    """
    return _index(sm, Poly((-exact_scalar(x0), 1)), kind)


def factor_multiplicity_index(sm: SmithMcMillanForm, factor: Poly, kind: str) -> tuple:
    """Partial multiplicities shared by every root of an irreducible factor."""
    return _index(sm, factor, kind)


@dataclass(frozen=True)
class Multiplicity:
    index: tuple
    algebraic: int
    geometric: int


def multiplicities(sm: SmithMcMillanForm, x0, kind: str) -> Multiplicity:
    index = multiplicity_index(sm, x0, kind)
    return Multiplicity(index, sum(index), sum(1 for g in index if g))
