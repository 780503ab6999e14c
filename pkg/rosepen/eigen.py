"""Finite eigenvalues of system pencils and the zero/pole taxonomy of G(lambda)."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .equivalence import det_constant
from .errors import FieldModeError, SingularPencilError
from .fiedler import Bijection, SystemPencil, pencil_algorithm1, pencil_direct
from .polymat import (
    EPS,
    Poly,
    PolyMatrix,
    RationalMatrix,
    factor_multiplicity_index,
    float_array,
    is_singular,
    poly_matrix_det,
    root_groups,
    smith_mcmillan,
    zero_pole_polys,
)
from .system import (
    DecouplingReport,
    RepSpec,
    RosenbrockSystem,
    cluster,
    is_minimal,
    realize,
    require_regular_e,
    transfer_function,
)

logger = logging.getLogger(__name__)

BACKENDS = ("exact", "numeric")
EIGENVALUE = "Eigenvalue"
EIGENPOLE = "Eigenpole"
DEFAULT_TOLERANCE = 1e-8
# alpha and beta both below this many eps (relative) flag a singular pencil
_SINGULAR_FACTOR = 100


def _sort_key(value):
    z = complex(value)
    return (z.real, z.imag)


def _close(a, b, tol: float) -> bool:
    a, b = complex(a), complex(b)
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def _check_backend(backend: str):
    if backend not in BACKENDS:
        raise ValueError(f"backend must be one of {BACKENDS}, got {backend!r}")


@dataclass(frozen=True, eq=False)
class GepResult:
    finite_eigenvalues: tuple
    infinite_flag: bool
    singular: bool
    backend: str
    det: Optional[Poly] = None
    groups: tuple = ()


def _solve_exact(p: SystemPencil, infinite: bool) -> GepResult:
    if not p.exact:
        raise FieldModeError("the exact backend needs an exact pencil")
    det = poly_matrix_det(p.as_poly_matrix())
    if det.is_zero:
        logger.warning("pencil of size %d is singular", p.size)
        return GepResult((), infinite, True, "exact", det)
    groups = tuple(root_groups(det))
    values = []
    for group in groups:
        values.extend(list(group.values) * group.multiplicity)
    return GepResult(tuple(sorted(values, key=_sort_key)), infinite, False, "exact", det, groups)


def _solve_numeric(p: SystemPencil, infinite: bool) -> GepResult:
    a = float_array(-p.const_term)
    b = float_array(p.lead)
    if not p.size:
        return GepResult((), False, False, "numeric")
    alpha, beta = scipy.linalg.eigvals(a, b, homogeneous_eigvals=True)
    scale = max(np.linalg.norm(a), np.linalg.norm(b), 1.0)
    tol = _SINGULAR_FACTOR * p.size * EPS * scale
    if np.any((np.abs(alpha) <= tol) & (np.abs(beta) <= tol)):
        logger.warning("pencil of size %d is numerically singular", p.size)
        return GepResult((), infinite, True, "numeric")
    finite = np.abs(beta) > tol * np.maximum(1.0, np.abs(alpha))
    values = alpha[finite] / beta[finite]
    return GepResult(tuple(sorted(values, key=_sort_key)), infinite, False, "numeric")


def solve_gep(p: SystemPencil, backend: str = "exact") -> GepResult:
    """Finite eigenvalues of lambda * lead + const.

    A singular pencil comes back with ``singular`` set rather than raising.
    """
    _check_backend(backend)
    infinite = is_singular(p.lead) if p.size else False
    if infinite:
        logger.warning("pencil lead is singular; eigenvalues at infinity are not reported")
    if backend == "exact":
        return _solve_exact(p, infinite)
    return _solve_numeric(p, infinite)


@dataclass(frozen=True)
class ZeroEntry:
    value: object
    classification: str
    multiplicity: int
    transmission: bool = True
    ind_phi: Optional[tuple] = None
    ind_psi: Optional[tuple] = None


@dataclass(frozen=True)
class PoleEntry:
    value: object
    multiplicity: int
    ind_psi: Optional[tuple] = None


@dataclass(frozen=True, eq=False)
class ZeroReport:
    zeros: tuple
    poles: tuple
    decoupling: DecouplingReport
    minimal: bool
    backend: str
    sigma: Bijection
    pencil_size: int
    infinite_flag: bool = False
    det_constant: object = None
    zero_poly: Optional[Poly] = field(default=None, repr=False)
    pole_poly: Optional[Poly] = field(default=None, repr=False)
    gep: Optional[GepResult] = field(default=None, repr=False)

    @property
    def zero_kind(self) -> str:
        return "transmission" if self.minimal else "invariant"

    def eigenvalues(self) -> list:
        return [z.value for z in self.zeros if z.classification == EIGENVALUE]

    def eigenpoles(self) -> list:
        return [z.value for z in self.zeros if z.classification == EIGENPOLE]

    def zero_values(self) -> list:
        """Zeros repeated by multiplicity."""
        values = []
        for z in self.zeros:
            values.extend([z.value] * z.multiplicity)
        return values


def system_pencil(sys: RosenbrockSystem, sigma: Bijection) -> SystemPencil:
    if sys.m >= 2:
        return pencil_algorithm1(sys, sigma)
    return pencil_direct(sys, sigma)


def _exact_report_parts(sys: RosenbrockSystem, gep: GepResult):
    sm = smith_mcmillan(transfer_function(sys))
    phi, psi = zero_pole_polys(sm)
    zeros = []
    for group in gep.groups:
        is_pole = group.factor.divides(psi)
        ind_phi = factor_multiplicity_index(sm, group.factor, "zero")
        ind_psi = factor_multiplicity_index(sm, group.factor, "pole") if is_pole else None
        for value in group.values:
            zeros.append(ZeroEntry(value, EIGENPOLE if is_pole else EIGENVALUE,
                                   group.multiplicity, group.factor.divides(phi),
                                   ind_phi, ind_psi))
    poles = []
    for group in root_groups(psi):
        ind_psi = factor_multiplicity_index(sm, group.factor, "pole")
        for value in group.values:
            poles.append(PoleEntry(value, group.multiplicity, ind_psi))
    return zeros, poles, phi, psi


def _numeric_state_eigenvalues(sys: RosenbrockSystem) -> list:
    if sys.r == 0:
        return []
    return list(scipy.linalg.eigvals(float_array(sys.A), float_array(sys.E)))


def _numeric_poles(state: list, blocked: tuple, tol: float) -> list:
    """Eigenvalues of (A, E) minus one copy per decoupling zero; what remains are poles of G."""
    poles = []
    for value, count in state:
        count -= sum(1 for z in blocked if _close(value, z, tol))
        if count > 0:
            poles.append((value, count))
    return poles


def _numeric_report_parts(sys: RosenbrockSystem, gep: GepResult, decoupling: DecouplingReport,
                          tol: float):
    blocked = decoupling.input_decoupling_zeros + decoupling.output_decoupling_zeros
    state = _numeric_poles(cluster(_numeric_state_eigenvalues(sys), tol), blocked, tol)
    zeros = []
    for value, count in cluster(gep.finite_eigenvalues, tol):
        is_pole = any(_close(value, pole, tol) for pole, _ in state)
        transmission = not any(_close(value, z, tol) for z in blocked)
        zeros.append(ZeroEntry(value, EIGENPOLE if is_pole else EIGENVALUE, count, transmission))
    poles = [PoleEntry(value, count) for value, count in state]
    return zeros, poles


def classify_zeros(sys: RosenbrockSystem, backend: str = "exact",
                   sigma: Optional[Bijection] = None,
                   tol: float = DEFAULT_TOLERANCE) -> ZeroReport:
    """Zeros of S(lambda) from a Fiedler pencil, split into eigenvalues and eigenpoles."""
    _check_backend(backend)
    require_regular_e(sys)
    if backend == "exact" and not sys.exact:
        raise FieldModeError("the exact backend needs an exact system")
    sigma = sigma or Bijection.first_companion(sys.m)
    pencil = system_pencil(sys, sigma)
    logger.debug("classifying zeros with sigma %s on a pencil of size %d", sigma, pencil.size)
    gep = solve_gep(pencil, backend)
    if gep.singular:
        raise SingularPencilError("singular pencil: spectrum undefined at pencil level")
    check = is_minimal(sys)
    if not check.minimal:
        logger.warning("system is not minimal; reporting invariant zeros")
    if backend == "exact":
        zeros, poles, phi, psi = _exact_report_parts(sys, gep)
        constant = det_constant(sys, pencil)
    else:
        zeros, poles = _numeric_report_parts(sys, gep, check.decoupling, tol)
        phi = psi = constant = None
    return ZeroReport(
        zeros=tuple(sorted(zeros, key=lambda z: _sort_key(z.value))),
        poles=tuple(sorted(poles, key=lambda p: _sort_key(p.value))),
        decoupling=check.decoupling,
        minimal=check.minimal,
        backend=backend,
        sigma=sigma,
        pencil_size=pencil.size,
        infinite_flag=gep.infinite_flag,
        det_constant=constant,
        zero_poly=phi,
        pole_poly=psi,
        gep=gep,
    )


def solve_rep(spec: RepSpec, sigma: Optional[Bijection] = None, backend: str = "exact",
              tol: float = DEFAULT_TOLERANCE) -> ZeroReport:
    """Realize, linearize, solve: zeros of G(lambda) = P(lambda) + sum s_j(lambda) C_j."""
    system = realize(spec)
    logger.debug("realized spec: n=%d r=%d m=%d", system.n, system.r, system.m)
    return classify_zeros(system, backend, sigma, tol)


def eig_eip_split(zero_poly: Poly, pole_poly: Poly, tol: float = DEFAULT_TOLERANCE):
    """(eigenvalues, eigenpoles): roots of zero_poly, split by whether pole_poly vanishes."""
    eig, eip = [], []
    if zero_poly.exact and pole_poly.exact:
        for group in root_groups(zero_poly):
            target = eip if group.factor.divides(pole_poly) else eig
            target.extend(list(group.values) * group.multiplicity)
    else:
        poles = list(pole_poly.roots())
        for value in zero_poly.roots():
            (eip if any(_close(value, p, tol) for p in poles) else eig).append(value)
    return sorted(eig, key=_sort_key), sorted(eip, key=_sort_key)


def eigenpole_direction(G: RationalMatrix, x0) -> PolyMatrix:
    """Polynomial column v with v(x0) != 0 and G v vanishing at x0.

    Taken from the right Smith-McMillan transform at the first diagonal
    position whose numerator vanishes at x0.
    """
    sm = smith_mcmillan(G, transforms=True)
    for i, numerator in enumerate(sm.numerators):
        if numerator.root_multiplicity(x0) > 0:
            return sm.right.submatrix(slice(None), slice(i, i + 1))
    raise ValueError(f"{x0} is not a zero of the transfer function")


def vanishes_at(G: RationalMatrix, v: PolyMatrix, x0) -> bool:
    """G(lambda) v(lambda) -> 0 as lambda -> x0, by order counting."""
    w = G @ RationalMatrix.from_poly_matrix(v)
    return all(f.is_zero or f.valuation(x0) > 0 for row in w.grid for f in row)
