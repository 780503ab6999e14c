"""JSON-ready encoding of rosepen objects.

Exact rationals travel as strings ("3", "-1/2"), floats as numbers and
complex values as {"re": ..., "im": ...}.
"""
from __future__ import annotations

import numbers
from fractions import Fraction

import numpy as np

from .errors import DocumentError, FieldModeError, RosepenError
from .fiedler import Bijection, SystemPencil
from .polymat import (
    Poly,
    PolyMatrix,
    RationalFn,
    RationalMatrix,
    SmithForm,
    SmithMcMillanForm,
    as_array,
    eye,
)
from .system import RepSpec, RepTerm, RosenbrockSystem

MODES = ("exact", "float")


# -- scalars ---------------------------------------------------------------


def encode_scalar(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": float(x.real), "im": float(x.imag)}
    if isinstance(x, numbers.Integral):
        return str(int(x))
    return float(x)


def decode_scalar(value, exact: bool):
    if isinstance(value, dict):
        if exact:
            raise DocumentError("complex values are not allowed in exact mode")
        try:
            return complex(float(value["re"]), float(value["im"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise DocumentError(f"bad complex literal {value!r}") from exc
    if exact and isinstance(value, float):
        if not value.is_integer():
            raise DocumentError(f"float {value!r} in an exact document; write it as \"p/q\"")
        value = int(value)
    try:
        return Fraction(value) if exact else float(Fraction(value) if isinstance(value, str)
                                                   else value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise DocumentError(f"bad scalar {value!r}") from exc


def _mode(doc: dict) -> bool:
    mode = doc.get("mode", "exact")
    if mode not in MODES:
        raise DocumentError(f"mode must be one of {MODES}, got {mode!r}")
    return mode == "exact"


def encode_array(a: np.ndarray) -> list:
    return [[encode_scalar(x) for x in row] for row in a]


def decode_array(value, exact: bool, name: str = "matrix") -> np.ndarray:
    if not isinstance(value, list):
        raise DocumentError(f"{name} must be a list of rows")
    rows = value
    if not all(isinstance(row, list) for row in rows):
        raise DocumentError(f"{name} must be a list of rows")
    if len({len(row) for row in rows}) > 1:
        raise DocumentError(f"{name} is ragged")
    try:
        return as_array([[decode_scalar(x, exact) for x in row] for row in rows], exact) \
            if rows else as_array(np.zeros((0, 0)), exact)
    except FieldModeError as exc:
        raise DocumentError(f"{name}: {exc}") from exc


# -- polynomials -----------------------------------------------------------


def encode_poly(p: Poly) -> dict:
    return {"coeffs": [encode_scalar(c) for c in p.coeffs], "text": str(p)}


def decode_poly(value, exact: bool) -> Poly:
    coeffs = value["coeffs"] if isinstance(value, dict) else value
    if not isinstance(coeffs, list):
        raise DocumentError(f"polynomial coefficients must be a list, got {coeffs!r}")
    return Poly(tuple(decode_scalar(c, exact) for c in coeffs), exact)


def encode_poly_matrix(M: PolyMatrix) -> list:
    """Grid of ascending coefficient lists."""
    return [[encode_poly(p)["coeffs"] for p in row] for row in M.entries()]


def decode_poly_matrix(grid, exact: bool) -> PolyMatrix:
    if not grid or not isinstance(grid[0], list):
        raise DocumentError("a polynomial matrix is a non-empty grid of coefficient lists")
    return PolyMatrix.from_entries([[decode_poly(entry, exact) for entry in row]
                                    for row in grid], exact)


def decode_stack(value, exact: bool, name: str = "P") -> PolyMatrix:
    """Coefficient stack [A_0, A_1, ...]; a single matrix is read as constant."""
    if not isinstance(value, list) or not value:
        raise DocumentError(f"{name} must be a non-empty list")
    if isinstance(value[0], list) and value[0] and isinstance(value[0][0], list):
        layers = [decode_array(layer, exact, f"{name}[{k}]") for k, layer in enumerate(value)]
        if len({layer.shape for layer in layers}) > 1:
            raise DocumentError(f"{name} layers differ in shape")
        return PolyMatrix(np.stack(layers), exact)
    return PolyMatrix.constant(decode_array(value, exact, name), exact)


def encode_stack(M: PolyMatrix) -> list:
    return [encode_array(layer) for layer in M.coeffs]


def encode_rational(f: RationalFn) -> dict:
    return {"num": encode_poly(f.num), "den": encode_poly(f.den), "text": str(f)}


def encode_rational_matrix(G: RationalMatrix) -> list:
    return [[encode_rational(f) for f in row] for row in G.grid]


# -- systems ---------------------------------------------------------------


def encode_system(sys: RosenbrockSystem) -> dict:
    doc = {
        "mode": "exact" if sys.exact else "float",
        "P": encode_stack(sys.P),
        "A": encode_array(sys.A),
        "E": encode_array(sys.E),
        "B": encode_array(sys.B),
        "C": encode_array(sys.C),
        "n": sys.n,
        "r": sys.r,
        "m": sys.m,
    }
    if sys.minimal is not None:
        doc["minimal"] = sys.minimal
    return doc


def decode_system(doc: dict) -> RosenbrockSystem:
    exact = _mode(doc)
    try:
        P = decode_stack(doc["P"], exact)
        A = decode_array(doc["A"], exact, "A")
        r = A.shape[0]
        E = decode_array(doc["E"], exact, "E") if "E" in doc else eye(r, exact)
        B = decode_array(doc.get("B", []), exact, "B")
        C = decode_array(doc.get("C", []), exact, "C")
    except KeyError as exc:
        raise DocumentError(f"system document lacks {exc}") from exc
    try:
        return RosenbrockSystem(P, A, E, B, C)
    except RosepenError as exc:
        raise DocumentError(f"invalid system: {exc}") from exc


def decode_spec(doc: dict) -> RepSpec:
    exact = _mode(doc)
    P = decode_stack(doc.get("P"), exact)
    terms = []
    for k, term in enumerate(doc.get("terms", [])):
        try:
            fn = RationalFn(decode_poly(term["num"], exact), decode_poly(term["den"], exact))
            terms.append(RepTerm(fn, decode_array(term["matrix"], exact, f"terms[{k}].matrix")))
        except KeyError as exc:
            raise DocumentError(f"terms[{k}] lacks {exc}") from exc
        except ZeroDivisionError as exc:
            raise DocumentError(f"terms[{k}]: {exc}") from exc
    try:
        return RepSpec(P, tuple(terms))
    except RosepenError as exc:
        raise DocumentError(f"invalid spec: {exc}") from exc


# -- pencils ---------------------------------------------------------------


def encode_bijection(sigma) -> list:
    return list(sigma.inverse_order) if sigma is not None else None


def encode_pencil(p: SystemPencil) -> dict:
    return {
        "mode": "exact" if p.exact else "float",
        "lead": encode_array(p.lead),
        "const": encode_array(p.const_term),
        "n": p.n,
        "r": p.r,
        "m": p.m,
        "size": p.size,
        "b_row_block": p.b_row_block,
        "c_col_block": p.c_col_block,
        "sigma": encode_bijection(p.sigma),
        "digest": p.digest(),
    }


def decode_pencil(doc: dict) -> SystemPencil:
    exact = _mode(doc)
    try:
        lead = decode_array(doc["lead"], exact, "lead")
        const = decode_array(doc["const"], exact, "const")
        n, r, m = int(doc["n"]), int(doc["r"]), int(doc["m"])
        sigma = Bijection(tuple(doc["sigma"])) if doc.get("sigma") is not None else None
        pencil = SystemPencil(lead, const, n, r, m, int(doc.get("b_row_block", m)),
                              int(doc.get("c_col_block", 1)), sigma)
    except KeyError as exc:
        raise DocumentError(f"pencil document lacks {exc}") from exc
    if lead.shape != const.shape or lead.shape != (n * m + r, n * m + r):
        raise DocumentError(f"pencil matrices have shapes {lead.shape} and {const.shape}, "
                            f"expected {(n * m + r, n * m + r)}")
    return pencil


# -- results ---------------------------------------------------------------


def encode_gep(result) -> dict:
    return {
        "finite_eigenvalues": [encode_scalar(x) for x in result.finite_eigenvalues],
        "infinite_flag": bool(result.infinite_flag),
        "singular": bool(result.singular),
        "backend": result.backend,
        "det": encode_poly(result.det) if result.det is not None else None,
    }


def _index(ind):
    return list(ind) if ind is not None else None


def encode_zero_report(report) -> dict:
    return {
        "zeros": [{
            "value": encode_scalar(z.value),
            "class": z.classification,
            "multiplicity": z.multiplicity,
            "transmission": z.transmission,
            "ind_phi": _index(z.ind_phi),
            "ind_psi": _index(z.ind_psi),
        } for z in report.zeros],
        "poles": [{
            "value": encode_scalar(p.value),
            "multiplicity": p.multiplicity,
            "ind_psi": _index(p.ind_psi),
        } for p in report.poles],
        "decoupling": {
            "input": [encode_scalar(x) for x in report.decoupling.input_decoupling_zeros],
            "output": [encode_scalar(x) for x in report.decoupling.output_decoupling_zeros],
        },
        "minimal": report.minimal,
        "zero_kind": report.zero_kind,
        "backend": report.backend,
        "sigma": encode_bijection(report.sigma),
        "pencil_size": report.pencil_size,
        "infinite_flag": bool(report.infinite_flag),
        "det_constant": encode_scalar(report.det_constant)
        if report.det_constant is not None else None,
        "zero_poly": encode_poly(report.zero_poly) if report.zero_poly is not None else None,
        "pole_poly": encode_poly(report.pole_poly) if report.pole_poly is not None else None,
        "pencil_eigenvalues": encode_gep(report.gep) if report.gep is not None else None,
    }


def encode_smith(sf: SmithForm) -> dict:
    return {
        "p": sf.identity_count,
        "phi": [str(p) for p in sf.invariant_polys],
        "phi_coeffs": [encode_poly(p)["coeffs"] for p in sf.invariant_polys],
        "rank": sf.rank,
        "zero_rows": sf.zero_rows,
        "zero_cols": sf.zero_cols,
    }


def encode_smith_mcmillan(sm: SmithMcMillanForm) -> dict:
    return {
        "numerators": [encode_poly(p) for p in sm.numerators],
        "denominators": [encode_poly(p) for p in sm.denominators],
        "rank": sm.rank,
    }


def encode_certificate_summary(sigma, pencil: SystemPencil, certificate=None, passed=False,
                               constant=None, error: str = None) -> dict:
    doc = {
        "sigma": encode_bijection(sigma),
        "digest": pencil.digest() if pencil is not None else None,
        "residual_zero": bool(certificate is not None and certificate.residual_zero),
        "passed": bool(passed),
        "det_constant": encode_scalar(constant) if constant is not None else None,
    }
    if certificate is not None:
        doc["sequence"] = certificate.sequence()
        doc["steps"] = [{"step": s.step, "left": s.left, "right": s.right, "holds": s.holds}
                        for s in certificate.steps]
    if error:
        doc["error"] = error
    return doc
