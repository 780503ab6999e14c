"""Unimodular system equivalence certificates for Fiedler pencils.

The pencil is peeled one factor at a time: each step multiplies the current
intermediate pencil by an auxiliary Q/R pair on the left and right, and after
m-1 steps only diag(-I, S(lambda)) is left.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Optional

import numpy as np

from .errors import (
    CertificateError,
    DimensionError,
    FieldModeError,
    InvalidBijectionError,
    SingularPencilError,
)
from .fiedler import Bijection, SystemPencil, make_factor, pencil_algorithm1, pencil_direct
from .polymat import PolyMatrix, block_transpose, eye, horner_shift, poly_matrix_det, zeros
from .system import RosenbrockSystem, assemble_system_matrix

logger = logging.getLogger(__name__)

KINDS = ("Q", "R", "T", "D")


@dataclass(frozen=True, eq=False)
class AuxMatrix:
    kind: str
    index: int
    matrix: PolyMatrix


class _BlockStack:
    """Coefficient stack of an (nm+r)-square system polynomial, filled blockwise."""

    def __init__(self, sys: RosenbrockSystem):
        self.n, self.m, self.r, self.exact = sys.n, sys.m, sys.r, sys.exact
        self.nm = self.n * self.m
        size = self.nm + self.r
        self.stack = zeros((self.m + 2, size, size), self.exact)

    def _span(self, block: int) -> slice:
        return slice(block * self.n, (block + 1) * self.n)

    def put(self, bi: int, bj: int, value: PolyMatrix, shift: int = 0):
        for k, layer in enumerate(value.coeffs):
            self.stack[k + shift, self._span(bi), self._span(bj)] = layer

    def identity(self, blocks):
        for b in blocks:
            self.stack[0, self._span(b), self._span(b)] = eye(self.n, self.exact)

    def state(self, matrix: np.ndarray):
        self.stack[0, self.nm:, self.nm:] = matrix

    def build(self) -> PolyMatrix:
        return PolyMatrix(self.stack, self.exact)


def _shift(sys: RosenbrockSystem, k: int) -> PolyMatrix:
    return horner_shift(sys.P, k, m=sys.m)


def aux_matrix(sys: RosenbrockSystem, kind: str, i: int) -> AuxMatrix:
    m = sys.m
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    upper = m if kind == "D" else m - 1
    if not 1 <= i <= upper:
        raise DimensionError(f"{kind}_{i} undefined for m = {m} (index range 1..{upper})")
    n, exact = sys.n, sys.exact
    ident = PolyMatrix.identity(n, exact)
    blocks = _BlockStack(sys)
    if kind == "Q":
        blocks.identity(range(m))
        blocks.put(i - 1, i, ident, shift=1)
        blocks.state(eye(sys.r, exact))
    elif kind == "R":
        blocks.identity(b for b in range(m) if b not in (i - 1, i))
        blocks.put(i - 1, i, ident)
        blocks.put(i, i - 1, ident)
        blocks.put(i, i, _shift(sys, i))
        blocks.state(eye(sys.r, exact))
    elif kind == "T":
        previous = _shift(sys, i - 1)
        blocks.put(i - 1, i, previous, shift=1)
        blocks.put(i, i - 1, ident, shift=1)
        blocks.put(i, i, previous, shift=2)
    else:
        blocks.put(i - 1, i - 1, _shift(sys, i - 1))
        blocks.identity(range(i, m))
        blocks.state(-sys.E)
    return AuxMatrix(kind, i, blocks.build())


def system_block_transpose_matrix(M: PolyMatrix, sys: RosenbrockSystem) -> PolyMatrix:
    """Block transpose of an auxiliary system polynomial (no state coupling)."""
    nm = sys.n * sys.m
    if not M.submatrix(slice(0, nm), slice(nm, None)).is_zero or \
            not M.submatrix(slice(nm, None), slice(0, nm)).is_zero:
        raise DimensionError("auxiliary matrix couples the state block")
    inner = block_transpose(M.submatrix(slice(0, nm), slice(0, nm)), sys.m, sys.m, sys.n)
    return PolyMatrix.block_diag([inner, M.submatrix(slice(nm, None), slice(nm, None))])


def _factor(sys, i) -> PolyMatrix:
    return PolyMatrix.constant(make_factor(sys, i).matrix, sys.exact)


@dataclass(frozen=True)
class RelationCheck:
    ok: bool
    failures: tuple = ()

    def __bool__(self):
        return self.ok


def aux_relations_check(sys: RosenbrockSystem, i: int) -> RelationCheck:
    m = sys.m
    if not 1 <= i <= m - 1:
        raise DimensionError(f"relations need 1 <= i <= {m - 1}, got {i}")
    Q = aux_matrix(sys, "Q", i).matrix
    R = aux_matrix(sys, "R", i).matrix
    T = aux_matrix(sys, "T", i).matrix
    D = aux_matrix(sys, "D", i).matrix
    D_next = aux_matrix(sys, "D", i + 1).matrix
    QB = system_block_transpose_matrix(Q, sys)
    RB = system_block_transpose_matrix(R, sys)
    TB = system_block_transpose_matrix(T, sys)
    low, high = _factor(sys, m - i - 1), _factor(sys, m - i)
    identities = {
        f"Q{i}^B (lambda D{i}) R{i} = lambda D{i + 1} + T{i}":
            (QB @ D.shift() @ R, D_next.shift() + T),
        f"Q{i}^B (M{m - i - 1} M{m - i}) R{i} = M{m - i - 1} + T{i}":
            (QB @ low @ high @ R, low + T),
        f"R{i}^B (lambda D{i}) Q{i} = lambda D{i + 1} + T{i}^B":
            (RB @ D.shift() @ Q, D_next.shift() + TB),
        f"R{i}^B (M{m - i} M{m - i - 1}) Q{i} = M{m - i - 1} + T{i}^B":
            (RB @ high @ low @ Q, low + TB),
    }
    for j in range(m - i - 1):
        Mj = _factor(sys, j)
        identities[f"T{i} M{j} = M{j} T{i} = T{i}"] = (T @ Mj, T, Mj @ T)
        identities[f"T{i}^B M{j} = M{j} T{i}^B = T{i}^B"] = (TB @ Mj, TB, Mj @ TB)
    failures = tuple(label for label, sides in identities.items()
                     if any(side != sides[0] for side in sides[1:]))
    for label in failures:
        logger.warning("auxiliary relation failed: %s", label)
    return RelationCheck(not failures, failures)


def intermediate_pencil(sys: RosenbrockSystem, sigma: Bijection, j: int) -> PolyMatrix:
    """lambda D_j - product of the factors with index <= m - j, in sigma order."""
    m = sys.m
    if not 1 <= j <= m:
        raise DimensionError(f"intermediate pencil index {j} outside 1..{m}")
    size = sys.n * m + sys.r
    kept = [make_factor(sys, i).matrix for i in sigma.inverse_order if i <= m - j]
    fiedler_product = reduce(lambda a, b: a @ b, kept, eye(size, sys.exact))
    D = aux_matrix(sys, "D", j).matrix
    return D.shift() - PolyMatrix.constant(fiedler_product, sys.exact)


def certificate_target(sys: RosenbrockSystem) -> PolyMatrix:
    """diag(-I_{(m-1)n}, S(lambda))."""
    k = (sys.m - 1) * sys.n
    return PolyMatrix.block_diag([-PolyMatrix.identity(k, sys.exact),
                                  assemble_system_matrix(sys)])


@dataclass(frozen=True)
class CertificateFactor:
    step: int
    kind: str
    index: int

    def __str__(self):
        return f"{self.kind.replace('^B', '')}{self.index}{'^B' if '^B' in self.kind else ''}"


@dataclass(frozen=True)
class ChainStep:
    step: int
    left: str
    right: str
    holds: bool


@dataclass(frozen=True, eq=False)
class EquivalenceCertificate:
    sigma: Bijection
    U: PolyMatrix
    V: PolyMatrix
    left_factors: tuple
    right_factors: tuple
    steps: tuple
    residual: PolyMatrix
    target: PolyMatrix

    @property
    def residual_zero(self) -> bool:
        return self.residual.is_zero

    @property
    def ok(self) -> bool:
        return self.residual_zero and all(step.holds for step in self.steps)

    def sequence(self) -> str:
        left = " ".join(str(f) for f in self.left_factors)
        right = " ".join(str(f) for f in self.right_factors)
        return f"({left}) L ({right})"


def _check_length(sys: RosenbrockSystem, sigma: Bijection):
    if sigma.m != sys.m:
        raise InvalidBijectionError(f"sigma {sigma} has length {sigma.m}, system has m = {sys.m}")


def _step_factors(sys: RosenbrockSystem, sigma: Bijection, k: int):
    """(U_k, V_k) with their descriptors for step position k = 0..m-2."""
    i = sys.m - k - 1
    Q = aux_matrix(sys, "Q", i).matrix
    R = aux_matrix(sys, "R", i).matrix
    if sigma.has_consecution(k):
        return (system_block_transpose_matrix(Q, sys), CertificateFactor(k, "Q^B", i),
                R, CertificateFactor(k, "R", i))
    return (system_block_transpose_matrix(R, sys), CertificateFactor(k, "R^B", i),
            Q, CertificateFactor(k, "Q", i))


def _constructed_pencil(sys: RosenbrockSystem, sigma: Bijection) -> SystemPencil:
    return pencil_algorithm1(sys, sigma) if sys.m >= 2 else pencil_direct(sys, sigma)


def build_certificate(sys: RosenbrockSystem, sigma: Bijection,
                      pencil: Optional[SystemPencil] = None) -> EquivalenceCertificate:
    """U, V with U L_sigma V = diag(-I, S), built factor by factor.

    ``pencil`` replaces the constructed pencil when an external one must be
    validated; the chain steps are always checked on the constructed pencils.
    """
    m = sys.m
    if not sys.exact:
        raise FieldModeError("certificates need exact mode")
    _check_length(sys, sigma)
    if pencil is None:
        pencil = _constructed_pencil(sys, sigma)
    if not pencil.exact:
        raise FieldModeError("certificates need an exact pencil")
    if pencil.size != sys.n * m + sys.r:
        raise CertificateError(f"pencil has size {pencil.size}, expected {sys.n * m + sys.r}")
    factors = [_step_factors(sys, sigma, k) for k in range(m - 1)]
    steps = []
    current = intermediate_pencil(sys, sigma, 1)
    for i in range(1, m):
        U_k, u_desc, V_k, v_desc = factors[m - i - 1]
        following = intermediate_pencil(sys, sigma, i + 1)
        holds = U_k @ current @ V_k == following
        steps.append(ChainStep(i, str(u_desc), str(v_desc), holds))
        logger.debug("sigma %s step %d (%s, %s): %s", sigma, i, u_desc, v_desc, holds)
        current = following
    identity = PolyMatrix.identity(pencil.size)
    U = reduce(lambda a, b: a @ b, (f[0] for f in factors), identity)
    V = reduce(lambda a, b: a @ b, (f[2] for f in reversed(factors)), identity)
    target = certificate_target(sys)
    residual = U @ pencil.as_poly_matrix() @ V - target
    certificate = EquivalenceCertificate(
        sigma, U, V, tuple(f[1] for f in factors), tuple(f[3] for f in reversed(factors)),
        tuple(steps), residual, target)
    if not residual.is_zero:
        entry = residual.first_nonzero()
        raise CertificateError(f"sigma {sigma}: residual nonzero at entry {entry}",
                               certificate, entry)
    broken = [step.step for step in steps if not step.holds]
    if broken:
        raise CertificateError(f"sigma {sigma}: chain steps {broken} fail", certificate)
    return certificate


def is_unimodular(M: PolyMatrix) -> bool:
    return M.rows == M.cols and poly_matrix_det(M).degree == 0


def has_system_shape(M: PolyMatrix, sys: RosenbrockSystem) -> bool:
    """[[U', 0], [0, I_r]] block shape."""
    nm = sys.n * sys.m
    return (M.submatrix(slice(0, nm), slice(nm, None)).is_zero
            and M.submatrix(slice(nm, None), slice(0, nm)).is_zero
            and M.submatrix(slice(nm, None), slice(nm, None))
            == PolyMatrix.identity(sys.r, sys.exact))


def verify_rosenbrock_linearization(sys: RosenbrockSystem, sigma: Bijection,
                                    pencil: Optional[SystemPencil] = None) -> bool:
    try:
        certificate = build_certificate(sys, sigma, pencil)
    except CertificateError as exc:
        logger.info("certificate rejected: %s", exc)
        return False
    if not (is_unimodular(certificate.U) and is_unimodular(certificate.V)):
        logger.info("sigma %s: transforms are not unimodular", sigma)
        return False
    if not (has_system_shape(certificate.U, sys) and has_system_shape(certificate.V, sys)):
        logger.info("sigma %s: transforms touch the state block", sigma)
        return False
    return True


def det_constant(sys: RosenbrockSystem, pencil: SystemPencil) -> Fraction:
    """c with det(pencil) = c det(S)."""
    det_s = poly_matrix_det(assemble_system_matrix(sys))
    det_l = poly_matrix_det(pencil.as_poly_matrix())
    if det_s.is_zero:
        if det_l.is_zero:
            raise SingularPencilError("S(lambda) is singular; the determinant ratio is undefined")
        raise CertificateError("det S vanishes but the pencil determinant does not")
    quotient, remainder = divmod(det_l, det_s)
    if not remainder.is_zero or quotient.degree != 0:
        raise CertificateError(f"det(pencil) / det(S) = ({det_l}) / ({det_s}) is not constant")
    return quotient.coeffs[0]
