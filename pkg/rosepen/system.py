"""Rosenbrock system polynomials S(lambda) = [[P, C], [B, A - lambda E]]."""
from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import DimensionError, DocumentError, FieldModeError, SingularStateMatrixError
from .polymat import (
    Poly,
    PolyMatrix,
    RationalFn,
    RationalMatrix,
    as_array,
    eye,
    float_array,
    is_singular,
    matrix_rank,
    poly_matrix_det,
    rank_factorization,
    root_groups,
    smith_form,
    zeros,
)

logger = logging.getLogger(__name__)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = a.copy()
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class RosenbrockSystem:
    P: PolyMatrix
    A: np.ndarray
    E: np.ndarray
    B: np.ndarray
    C: np.ndarray
    # verdict of is_minimal when the system came out of realize()
    minimal: Optional[bool] = field(default=None)

    def __post_init__(self):
        exact = self.P.exact
        n = self.P.rows
        if self.P.cols != n:
            raise DimensionError(f"P must be square, got {self.P.shape}")
        arrays = {}
        for name in ("A", "E", "B", "C"):
            value = getattr(self, name)
            if isinstance(value, np.ndarray) and value.size and (value.dtype == object) != exact:
                raise FieldModeError(f"{name} is not in the mode of P")
            arrays[name] = _frozen(as_array(value, exact))
        r = arrays["A"].shape[0] if arrays["A"].ndim == 2 else 0
        expected = {"A": (r, r), "E": (r, r), "B": (r, n), "C": (n, r)}
        for name, shape in expected.items():
            arr = arrays[name]
            if arr.size == 0 and arr.shape != shape:
                arr = _frozen(zeros(shape, exact))
            if arr.shape != shape:
                raise DimensionError(f"{name} has shape {arr.shape}, expected {shape}")
            object.__setattr__(self, name, arr)

    @classmethod
    def build(cls, P, A, E, B, C, exact: bool = True) -> "RosenbrockSystem":
        """Build from nested lists; P is a coefficient stack (ascending powers)."""
        if not isinstance(P, PolyMatrix):
            P = PolyMatrix(P, exact)
        return cls(P, A, E, B, C)

    @property
    def exact(self) -> bool:
        return self.P.exact

    @property
    def n(self) -> int:
        return self.P.rows

    @property
    def r(self) -> int:
        return self.A.shape[0]

    @property
    def degree(self) -> int:
        return self.P.degree

    @property
    def m(self) -> int:
        return max(self.P.degree, 1)

    def coefficient(self, j: int) -> np.ndarray:
        """A_j of P, zero beyond the stored degree."""
        return self.P.coefficient(j)

    def state_pencil(self) -> PolyMatrix:
        """lambda E - A."""
        return PolyMatrix.pencil(self.E, -self.A, self.exact)

    def with_minimal(self, minimal: bool) -> "RosenbrockSystem":
        return dataclasses.replace(self, minimal=minimal)

    def as_float(self) -> "RosenbrockSystem":
        if not self.exact:
            return self
        return RosenbrockSystem(PolyMatrix(float_array(self.P.coeffs), False),
                                *(float_array(getattr(self, k)) for k in ("A", "E", "B", "C")),
                                minimal=self.minimal)

    def __eq__(self, other):
        if not isinstance(other, RosenbrockSystem):
            return NotImplemented
        return self.P == other.P and all(
            getattr(self, k).shape == getattr(other, k).shape
            and bool(np.all(getattr(self, k) == getattr(other, k)))
            for k in ("A", "E", "B", "C"))

    __hash__ = None


@dataclass(frozen=True)
class DecouplingReport:
    input_decoupling_zeros: tuple = ()
    output_decoupling_zeros: tuple = ()

    @property
    def empty(self) -> bool:
        return not self.input_decoupling_zeros and not self.output_decoupling_zeros


@dataclass(frozen=True)
class MinimalityCheck:
    minimal: bool
    decoupling: DecouplingReport

    def __bool__(self):
        return self.minimal


@dataclass(frozen=True, eq=False)
class RepTerm:
    fn: RationalFn
    matrix: np.ndarray


@dataclass(frozen=True, eq=False)
class RepSpec:
    """P(lambda) + sum_j s_j(lambda) C_j with scalar simple-pole s_j."""

    P: PolyMatrix
    terms: tuple = ()

    def __post_init__(self):
        n = self.P.rows
        terms = []
        for term in self.terms:
            matrix = _frozen(as_array(term.matrix, self.P.exact))
            if matrix.shape != (n, n):
                raise DimensionError(f"term matrix has shape {matrix.shape}, expected {(n, n)}")
            if term.fn.exact != self.P.exact:
                raise FieldModeError("term function is not in the mode of P")
            terms.append(RepTerm(term.fn, matrix))
        object.__setattr__(self, "terms", tuple(terms))

    @property
    def exact(self) -> bool:
        return self.P.exact

    @property
    def n(self) -> int:
        return self.P.rows

    def rational_matrix(self) -> RationalMatrix:
        grid = [[RationalFn(p) for p in row] for row in self.P.entries()]
        for term in self.terms:
            for i in range(self.n):
                for j in range(self.n):
                    if term.matrix[i, j] != 0:
                        grid[i][j] = grid[i][j] + term.fn * term.matrix[i, j]
        return RationalMatrix(grid)


def assemble_system_matrix(sys: RosenbrockSystem) -> PolyMatrix:
    if sys.r == 0:
        return sys.P
    top = PolyMatrix.hstack([sys.P, PolyMatrix.constant(sys.C, sys.exact)])
    bottom = PolyMatrix.hstack([PolyMatrix.constant(sys.B, sys.exact),
                                PolyMatrix.pencil(-sys.E, sys.A, sys.exact)])
    return PolyMatrix.vstack([top, bottom])


def transfer_function(sys: RosenbrockSystem) -> RationalMatrix:
    """G = P + C (lambda E - A)^-1 B via the exact adjugate of lambda E - A."""
    if not sys.exact:
        raise FieldModeError("transfer function needs exact mode")
    if sys.r == 0:
        return RationalMatrix.from_poly_matrix(sys.P)
    adj, det = sys.state_pencil().to_domain_matrix().adj_det()
    if not det:
        raise SingularStateMatrixError("lambda E - A is singular (determinant vanishes)")
    C = PolyMatrix.constant(sys.C).to_domain_matrix()
    B = PolyMatrix.constant(sys.B).to_domain_matrix()
    numerators = PolyMatrix.from_domain_matrix(C * adj * B)
    den = Poly.from_ring(det)
    return RationalMatrix([[RationalFn(numerators.entry(i, j), den) + sys.P.entry(i, j)
                            for j in range(sys.n)] for i in range(sys.n)])


def require_regular_e(sys: RosenbrockSystem):
    if sys.r and is_singular(sys.E):
        raise SingularStateMatrixError("E is singular; descriptor systems are not supported")


def _sort_key(value):
    z = complex(value)
    return (z.real, z.imag)


def state_eigenvalues(sys: RosenbrockSystem) -> list:
    """Eigenvalues of (A, E) with multiplicity; exact roots stay Fraction."""
    require_regular_e(sys)
    if sys.r == 0:
        return []
    if sys.exact:
        values = []
        for group in root_groups(poly_matrix_det(sys.state_pencil())):
            values.extend(list(group.values) * group.multiplicity)
        return sorted(values, key=_sort_key)
    return sorted(scipy.linalg.eigvals(sys.A, sys.E), key=_sort_key)


def cluster(values, tol: float = 1e-8) -> list:
    """Group numerically equal values; returns (representative, count) pairs."""
    groups = []
    for v in values:
        z = complex(v)
        for g in groups:
            ref = complex(g[0])
            if abs(z - ref) <= tol * max(1.0, abs(z), abs(ref)):
                g.append(v)
                break
        else:
            groups.append([v])
    return [(g[0] if len(g) == 1 else complex(np.mean([complex(x) for x in g])), len(g))
            for g in groups]


def _exact_rank_drop_points(M: PolyMatrix, r: int) -> tuple:
    sf = smith_form(M)
    if sf.rank < r:
        raise SingularStateMatrixError("lambda E - A is singular")
    if not sf.invariant_polys:
        return ()
    points = []
    for group in root_groups(sf.invariant_polys[-1]):
        points.extend(group.values)
    return tuple(sorted(points, key=_sort_key))


def _float_rank_drop_points(sys: RosenbrockSystem, coupling: np.ndarray, axis: int) -> tuple:
    points = []
    for value, _ in cluster(scipy.linalg.eigvals(sys.A, sys.E)):
        shifted = sys.A - value * sys.E
        stacked = np.concatenate([shifted, coupling], axis=axis)
        if matrix_rank(stacked) < sys.r:
            points.append(value)
    return tuple(sorted(points, key=_sort_key))


def decoupling_zeros(sys: RosenbrockSystem) -> DecouplingReport:
    require_regular_e(sys)
    if sys.r == 0:
        return DecouplingReport()
    if sys.exact:
        state = PolyMatrix.pencil(-sys.E, sys.A)
        inputs = _exact_rank_drop_points(
            PolyMatrix.hstack([state, PolyMatrix.constant(sys.B)]), sys.r)
        outputs = _exact_rank_drop_points(
            PolyMatrix.vstack([state, PolyMatrix.constant(sys.C)]), sys.r)
    else:
        inputs = _float_rank_drop_points(sys, sys.B, axis=1)
        outputs = _float_rank_drop_points(sys, sys.C, axis=0)
    return DecouplingReport(inputs, outputs)


def is_minimal(sys: RosenbrockSystem) -> MinimalityCheck:
    report = decoupling_zeros(sys)
    return MinimalityCheck(report.empty, report)


def realize(spec: RepSpec) -> RosenbrockSystem:
    """State-space realization of a simple-pole RepSpec.

    Each term c/(lambda - p) C_j with C_j = L R contributes the block
    (A, E, B, C) = (p I, I, c R, L); polynomial parts of the scalar terms
    are folded into P.
    """
    exact = spec.exact
    n = spec.n
    P = spec.P
    blocks = []
    for index, term in enumerate(spec.terms):
        fn = term.fn
        if fn.den.degree != 1:
            raise DocumentError(
                f"term {index}: denominator {fn.den} must have degree 1 after reduction")
        if not np.any(term.matrix != 0):
            logger.warning("dropping term %d: zero coefficient matrix", index)
            continue
        quotient, remainder = divmod(fn.num, fn.den)
        if not quotient.is_zero:
            P = P + PolyMatrix(np.stack([c * term.matrix for c in quotient.coeffs]), exact)
        if remainder.is_zero:
            logger.warning("term %d has no strictly proper part", index)
            continue
        pole = -fn.den.coeffs[0]
        left, right = rank_factorization(term.matrix)
        blocks.append((pole, remainder.coeffs[0], left, right))
        logger.debug("term %d: pole %s, rank %d", index, pole, left.shape[1])
    r = sum(left.shape[1] for _, _, left, _ in blocks)
    A = zeros((r, r), exact)
    B = zeros((r, n), exact)
    C = zeros((n, r), exact)
    offset = 0
    for pole, c, left, right in blocks:
        rho = left.shape[1]
        for k in range(rho):
            A[offset + k, offset + k] = pole
        B[offset:offset + rho, :] = c * right
        C[:, offset:offset + rho] = left
        offset += rho
    system = RosenbrockSystem(P, A, eye(r, exact), B, C)
    check = is_minimal(system)
    if not check.minimal:
        logger.warning("realization of order %d is not minimal: %s", r, check.decoupling)
    return system.with_minimal(check.minimal)
