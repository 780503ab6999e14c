"""Fiedler factors and Fiedler pencils of Rosenbrock system polynomials.

Block indices in the public metadata are 1-based, the way the pencils are
usually written; everything inside this module slices with 0-based blocks.
"""
from __future__ import annotations

import hashlib
import itertools
import logging
from dataclasses import dataclass
from functools import reduce
from typing import Iterator, Optional

import numpy as np

from .errors import DimensionError, InvalidBijectionError, PencilStructureError
from .polymat import PolyMatrix, block_transpose, eye, matrix_inv, zeros
from .system import RosenbrockSystem

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Bijection:
    """Product order of the factors M_0..M_{m-1}, stored as sigma^-1."""

    inverse_order: tuple

    def __post_init__(self):
        try:
            order = tuple(int(i) for i in self.inverse_order)
        except (TypeError, ValueError) as exc:
            raise InvalidBijectionError(f"not a sequence of integers: {self.inverse_order!r}") \
                from exc
        if not order or sorted(order) != list(range(len(order))):
            raise InvalidBijectionError(f"{order} is not a permutation of 0..{len(order) - 1}")
        object.__setattr__(self, "inverse_order", order)

    @classmethod
    def parse(cls, text: str, m: Optional[int] = None) -> "Bijection":
        try:
            order = tuple(int(part) for part in text.split(","))
        except ValueError as exc:
            raise InvalidBijectionError(f"cannot parse sigma {text!r}") from exc
        sigma = cls(order)
        if m is not None and sigma.m != m:
            raise InvalidBijectionError(f"sigma {text!r} has length {sigma.m}, system needs {m}")
        return sigma

    @classmethod
    def first_companion(cls, m: int) -> "Bijection":
        return cls(tuple(range(m - 1, -1, -1)))

    @classmethod
    def second_companion(cls, m: int) -> "Bijection":
        return cls(tuple(range(m)))

    @classmethod
    def all(cls, m: int) -> Iterator["Bijection"]:
        for order in itertools.permutations(range(m)):
            yield cls(order)

    @property
    def m(self) -> int:
        return len(self.inverse_order)

    def position(self, i: int) -> int:
        """sigma(i): 1-based position of M_i in the product."""
        return self.inverse_order.index(i) + 1

    def has_consecution(self, d: int) -> bool:
        return self.position(d) < self.position(d + 1)

    def pattern(self) -> tuple:
        return tuple(self.has_consecution(d) for d in range(self.m - 1))

    def reversed(self) -> "Bijection":
        return Bijection(self.inverse_order[::-1])

    def equivalent(self, other: "Bijection") -> bool:
        """Same product once commuting factors are reordered."""
        return self.m == other.m and self.pattern() == other.pattern()

    def __str__(self):
        return ",".join(str(i) for i in self.inverse_order)


@dataclass(frozen=True)
class CISS:
    pairs: tuple

    @property
    def c_total(self) -> int:
        return sum(self.pairs[0::2])

    @property
    def i_total(self) -> int:
        return sum(self.pairs[1::2])

    @property
    def c1(self) -> int:
        return self.pairs[0] if self.pairs else 0

    @property
    def i1(self) -> int:
        return self.pairs[1] if len(self.pairs) > 1 else 0

    def __str__(self):
        return "(" + ", ".join(str(k) for k in self.pairs) + ")"


def ciss(sigma: Bijection) -> CISS:
    """Consecution-inversion structure sequence (c1, i1, ..., cl, il)."""
    if sigma.m == 1:
        return CISS(())
    runs = []
    in_consecution, count = True, 0
    for consecution in sigma.pattern():
        if consecution == in_consecution:
            count += 1
        else:
            runs.append(count)
            in_consecution, count = consecution, 1
    runs.append(count)
    if in_consecution:
        runs.append(0)
    return CISS(tuple(runs))


def block_placement(sigma: Bijection) -> tuple:
    """(B-row block, C-column block), 1-based."""
    structure = ciss(sigma)
    m = sigma.m
    if structure.c1 > 0:
        return m - structure.c1, m
    return m, m - structure.i1


@dataclass(frozen=True, eq=False)
class FiedlerFactor:
    index: int
    matrix: np.ndarray
    n: int
    r: int
    m: int


def _classical_factor(sys: RosenbrockSystem, i: int) -> np.ndarray:
    n, m, exact = sys.n, sys.m, sys.exact
    nm = n * m
    M = eye(nm, exact)
    if i == 0:
        M[nm - n:, nm - n:] = -sys.coefficient(0)
    elif i == m:
        M[:n, :n] = sys.coefficient(m)
    else:
        k = m - i - 1
        here, below = slice(k * n, (k + 1) * n), slice((k + 1) * n, (k + 2) * n)
        M[here, here] = -sys.coefficient(i)
        M[below, below] = zeros((n, n), exact)
        M[here, below] = eye(n, exact)
        M[below, here] = eye(n, exact)
    return M


def make_factor(sys: RosenbrockSystem, i: int) -> FiedlerFactor:
    n, r, m, exact = sys.n, sys.r, sys.m, sys.exact
    if not 0 <= i <= m:
        raise DimensionError(f"factor index {i} outside 0..{m}")
    nm = n * m
    F = zeros((nm + r, nm + r), exact)
    F[:nm, :nm] = _classical_factor(sys, i)
    if i == 0:
        F[nm - n:nm, nm:] = -sys.C
        F[nm:, nm - n:nm] = -sys.B
        F[nm:, nm:] = -sys.A
    elif i == m:
        F[nm:, nm:] = -sys.E
    else:
        F[nm:, nm:] = eye(r, exact)
    return FiedlerFactor(i, F, n, r, m)


def factor_inverse(f: FiedlerFactor, numeric: bool = False) -> np.ndarray:
    """Closed-form inverse for 1 <= index <= m-1.

    M_0 and M_m have no closed form; with ``numeric`` they are inverted
    directly (and may turn out singular).
    """
    if f.index in (0, f.m):
        if not numeric:
            raise DimensionError(f"factor {f.index} has no closed-form inverse")
        return matrix_inv(f.matrix)
    n = f.n
    exact = f.matrix.dtype == object
    k = f.m - f.index - 1
    here, below = slice(k * n, (k + 1) * n), slice((k + 1) * n, (k + 2) * n)
    inv = f.matrix.copy()
    coeff = -f.matrix[here, here]
    inv[here, here] = zeros((n, n), exact)
    inv[below, below] = coeff
    return inv


def _product(matrices, size: int, exact: bool) -> np.ndarray:
    return reduce(lambda a, b: a @ b, matrices, eye(size, exact))


@dataclass(frozen=True, eq=False)
class SystemPencil:
    """lambda * lead + const_term, with lead = M_m and const_term = -M_sigma."""

    lead: np.ndarray
    const_term: np.ndarray
    n: int
    r: int
    m: int
    b_row_block: int
    c_col_block: int
    sigma: Optional[Bijection] = None

    @property
    def exact(self) -> bool:
        return self.lead.dtype == object

    @property
    def size(self) -> int:
        return self.lead.shape[0]

    def as_poly_matrix(self) -> PolyMatrix:
        return PolyMatrix.pencil(self.lead, self.const_term, self.exact)

    def evaluate(self, x) -> np.ndarray:
        return x * self.lead + self.const_term

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.n},{self.r},{self.m};".encode())
        for arr in (self.lead, self.const_term):
            h.update(",".join(str(x) for x in arr.flat).encode())
            h.update(b";")
        return h.hexdigest()[:16]

    def __eq__(self, other):
        if not isinstance(other, SystemPencil):
            return NotImplemented
        return ((self.n, self.r, self.m) == (other.n, other.r, other.m)
                and self.lead.shape == other.lead.shape
                and bool(np.all(self.lead == other.lead))
                and bool(np.all(self.const_term == other.const_term)))

    __hash__ = None


def _check_sigma(sys: RosenbrockSystem, sigma: Bijection):
    if sigma.m != sys.m:
        raise InvalidBijectionError(f"sigma {sigma} has length {sigma.m}, system has m = {sys.m}")


def _pencil(sys: RosenbrockSystem, sigma: Bijection, fiedler_product: np.ndarray) -> SystemPencil:
    b_row, c_col = block_placement(sigma)
    return SystemPencil(make_factor(sys, sys.m).matrix, -fiedler_product, sys.n, sys.r, sys.m,
                        b_row, c_col, sigma)


def pencil_direct(sys: RosenbrockSystem, sigma: Bijection) -> SystemPencil:
    """lambda M_m - M_{sigma^-1(1)} ... M_{sigma^-1(m)} by explicit multiplication."""
    _check_sigma(sys, sigma)
    factors = [make_factor(sys, i).matrix for i in sigma.inverse_order]
    size = sys.n * sys.m + sys.r
    logger.debug("direct product for sigma %s, size %d", sigma, size)
    return _pencil(sys, sigma, _product(factors, size, sys.exact))


def pencil_algorithm1(sys: RosenbrockSystem, sigma: Bijection) -> SystemPencil:
    """Grow M_sigma one block at a time from the consecution/inversion pattern."""
    _check_sigma(sys, sigma)
    m, n, r, exact = sys.m, sys.n, sys.r, sys.exact
    if m < 2:
        raise DimensionError("the block-splicing construction needs m >= 2")
    A = sys.coefficient
    I = eye(n, exact)
    Z = lambda rows, cols: zeros((rows, cols), exact)  # noqa: E731
    if sigma.has_consecution(0):
        W = np.block([[-A(1), I, Z(n, r)],
                      [-A(0), Z(n, n), -sys.C],
                      [-sys.B, Z(r, n), -sys.A]])
    else:
        W = np.block([[-A(1), -A(0), -sys.C],
                      [I, Z(n, n), Z(n, r)],
                      [Z(r, n), -sys.B, -sys.A]])
    for i in range(1, m - 1):
        rest = W.shape[0]
        if sigma.has_consecution(i):
            top = np.hstack([-A(i + 1), I, Z(n, i * n + r)])
            bottom = np.hstack([W[:, :n], Z(rest, n), W[:, n:]])
            W = np.vstack([top, bottom])
        else:
            left = np.vstack([-A(i + 1), I, Z(i * n + r, n)])
            right = np.vstack([W[:n, :], Z(n, rest), W[n:, :]])
            W = np.hstack([left, right])
    return _pencil(sys, sigma, W)


def classical_pencil(P: PolyMatrix, sigma: Bijection) -> SystemPencil:
    """Fiedler pencil of P alone (no state part)."""
    empty = RosenbrockSystem(P, [], [], [], [])
    return pencil_direct(empty, sigma)


def pencil_block_formula(sys: RosenbrockSystem, sigma: Bijection) -> SystemPencil:
    """Classical pencil of P bordered by a single C column block and B row block."""
    _check_sigma(sys, sigma)
    m, n, r, exact = sys.m, sys.n, sys.r, sys.exact
    if m < 2:
        raise DimensionError("the block formula needs m >= 2")
    nm = n * m
    inner = classical_pencil(sys.P, sigma)
    b_row, c_col = block_placement(sigma)
    lead = zeros((nm + r, nm + r), exact)
    const = zeros((nm + r, nm + r), exact)
    lead[:nm, :nm] = inner.lead
    lead[nm:, nm:] = -sys.E
    const[:nm, :nm] = inner.const_term
    const[(c_col - 1) * n:c_col * n, nm:] = sys.C
    const[nm:, (b_row - 1) * n:b_row * n] = sys.B
    const[nm:, nm:] = sys.A
    return SystemPencil(lead, const, n, r, m, b_row, c_col, sigma)


def companion_layout(sys: RosenbrockSystem) -> SystemPencil:
    """First companion form written out block by block."""
    m, n, r, exact = sys.m, sys.n, sys.r, sys.exact
    nm = n * m
    lead = eye(nm + r, exact)
    lead[:n, :n] = sys.coefficient(m)
    lead[nm:, nm:] = -sys.E
    const = zeros((nm + r, nm + r), exact)
    for k in range(m):
        const[:n, k * n:(k + 1) * n] = sys.coefficient(m - 1 - k)
    for k in range(m - 1):
        const[(k + 1) * n:(k + 2) * n, k * n:(k + 1) * n] = -eye(n, exact)
    const[:n, nm:] = sys.C
    const[nm:, nm - n:nm] = sys.B
    const[nm:, nm:] = sys.A
    return SystemPencil(lead, const, n, r, m, m, 1, Bijection.first_companion(m))


def first_companion(sys: RosenbrockSystem) -> SystemPencil:
    pencil = pencil_direct(sys, Bijection.first_companion(sys.m))
    if pencil != companion_layout(sys):
        raise PencilStructureError("first companion product disagrees with its block layout")
    return pencil


def second_companion(sys: RosenbrockSystem) -> SystemPencil:
    return pencil_direct(sys, Bijection.second_companion(sys.m))


def _nonzero_blocks(strip: np.ndarray, n: int, m: int, axis: int) -> list:
    hits = []
    for k in range(m):
        part = strip[k * n:(k + 1) * n, :] if axis == 0 else strip[:, k * n:(k + 1) * n]
        if np.any(part != 0):
            hits.append(k)
    return hits


def system_block_transpose(p: SystemPencil) -> SystemPencil:
    """Block transpose of the polynomial part; the C column and B row swap places."""
    n, r, m = p.n, p.r, p.m
    nm = n * m
    if np.any(p.lead[:nm, nm:] != 0) or np.any(p.lead[nm:, :nm] != 0):
        raise PencilStructureError("leading coefficient couples the state block")
    column = p.const_term[:nm, nm:]
    row = p.const_term[nm:, :nm]
    xs = _nonzero_blocks(column, n, m, axis=0)
    ys = _nonzero_blocks(row, n, m, axis=1)
    if len(xs) > 1 or len(ys) > 1:
        raise PencilStructureError("state coupling is spread over several blocks")
    i = xs[0] if xs else p.c_col_block - 1
    j = ys[0] if ys else p.b_row_block - 1

    def transpose(arr):
        out = arr.copy()
        out[:nm, :nm] = block_transpose(PolyMatrix.constant(arr[:nm, :nm], p.exact),
                                        m, m, n).coefficient(0)
        out[:nm, nm:] = zeros((nm, r), p.exact)
        out[nm:, :nm] = zeros((r, nm), p.exact)
        return out

    lead = transpose(p.lead)
    const = transpose(p.const_term)
    const[j * n:(j + 1) * n, nm:] = column[i * n:(i + 1) * n, :]
    const[nm:, i * n:(i + 1) * n] = row[:, j * n:(j + 1) * n]
    sigma = p.sigma.reversed() if p.sigma is not None else None
    return SystemPencil(lead, const, n, r, m, i + 1, j + 1, sigma)


def is_block_pentadiagonal(p: SystemPencil) -> bool:
    sizes = [p.n] * p.m + ([p.r] if p.r else [])
    offsets = np.cumsum([0] + sizes)
    for I, J in itertools.product(range(len(sizes)), repeat=2):
        if abs(I - J) <= 2:
            continue
        rows = slice(offsets[I], offsets[I + 1])
        cols = slice(offsets[J], offsets[J + 1])
        if np.any(p.lead[rows, cols] != 0) or np.any(p.const_term[rows, cols] != 0):
            return False
    return True


def pentadiagonal_by_ciss(sys: RosenbrockSystem, sigma: Bijection) -> bool:
    """c1 <= 1, i1 <= 1 and the classical pencil of P is pentadiagonal."""
    structure = ciss(sigma)
    return (structure.c1 <= 1 and structure.i1 <= 1
            and is_block_pentadiagonal(classical_pencil(sys.P, sigma)))


def commutation_check(sys: RosenbrockSystem, i: int, j: int) -> bool:
    a, b = make_factor(sys, i).matrix, make_factor(sys, j).matrix
    return bool(np.all(a @ b == b @ a))


def inverse_commutation_check(sys: RosenbrockSystem, i: int, j: int) -> bool:
    a = factor_inverse(make_factor(sys, i))
    b = factor_inverse(make_factor(sys, j))
    return bool(np.all(a @ b == b @ a))


def count_distinct_pencils(sys: RosenbrockSystem) -> int:
    return len({pencil_direct(sys, sigma).digest() for sigma in Bijection.all(sys.m)})
