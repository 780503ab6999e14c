import logging
import math
from concurrent.futures import ThreadPoolExecutor

from . import codec
from .document_handler import PENCIL, POLY_MATRIX, SPEC, SYSTEM, DocumentHandler
from .eigen import classify_zeros, system_pencil
from .equivalence import build_certificate, det_constant
from .errors import (
    CertificateError,
    ConfigError,
    DocumentError,
    FieldModeError,
    SingularPencilError,
)
from .fiedler import Bijection, block_placement, ciss
from .polymat import smith_form, smith_mcmillan
from .system import RosenbrockSystem, assemble_system_matrix, realize, transfer_function

logger = logging.getLogger(__name__)


class PencilManager:
    def __init__(self, config):
        self.config = config
        self.documents = DocumentHandler(config)

    def _sigma(self, text, m):
        if text is None:
            return Bijection.first_companion(m), True
        return Bijection.parse(text, m), False

    def _with_mode(self, sys: RosenbrockSystem, mode=None) -> RosenbrockSystem:
        mode = mode or self.config.get_mode()
        if mode == "float":
            return sys.as_float()
        if not sys.exact:
            raise FieldModeError("a float document cannot be used in exact mode")
        return sys

    def build(self, path, sigma_text=None, mode=None):
        sys = self._with_mode(self.documents.load_system(path), mode)
        sigma, default = self._sigma(sigma_text, sys.m)
        pencil = system_pencil(sys, sigma)
        logger.debug("built pencil of size %d for sigma %s", pencil.size, sigma)
        return {
            "pencil": codec.encode_pencil(pencil),
            "sigma": codec.encode_bijection(sigma),
            "sigma_default": default,
        }

    def zeros(self, path, sigma_text=None, backend=None, mode=None):
        tol = self.config.get_zero_tolerance()
        schema, obj = self.documents.load(path)
        if schema == SPEC:
            obj = realize(obj)
        elif schema != SYSTEM:
            raise DocumentError(f"zeros needs a system or a spec, got a {schema}")
        sys = self._with_mode(obj, mode)
        if backend is None:
            # float data has only the numeric backend
            backend = self.config.get_backend() if sys.exact else "numeric"
        sigma, _ = self._sigma(sigma_text, sys.m)
        return codec.encode_zero_report(classify_zeros(sys, backend, sigma, tol))

    def _certify(self, sys, sigma, pencil=None):
        constant = None
        try:
            certificate = build_certificate(sys, sigma, pencil)
        except CertificateError as exc:
            logger.info("sigma %s failed: %s", sigma, exc)
            return codec.encode_certificate_summary(
                sigma, pencil or system_pencil(sys, sigma), exc.certificate, False,
                error=str(exc))
        used = pencil or system_pencil(sys, sigma)
        try:
            constant = det_constant(sys, used)
        except (SingularPencilError, CertificateError) as exc:
            logger.info("no determinant constant for sigma %s: %s", sigma, exc)
        return codec.encode_certificate_summary(sigma, used, certificate, True, constant)

    def verify(self, path, sigma_text=None, pencil_path=None):
        sys = self._with_mode(self.documents.load_system(path), "exact")
        pencil = None
        if pencil_path is not None:
            pencil = self.documents.load_pencil(pencil_path)
            if sigma_text is None and pencil.sigma is not None:
                sigma_text = str(pencil.sigma)
        sigma, _ = self._sigma(sigma_text, sys.m)
        result = self._certify(sys, sigma, pencil)
        return {"m": sys.m, "results": [result], "passed": result["passed"]}

    def verify_all(self, path):
        sys = self._with_mode(self.documents.load_system(path), "exact")
        max_m = self.config.get_max_m()
        if sys.m > max_m:
            raise ConfigError(f"m = {sys.m} exceeds the sweep bound {max_m} (ROSEPEN_MAX_M)")
        sigmas = list(Bijection.all(sys.m))
        workers = self.config.get_parallel_operations()
        logger.debug("verifying %d bijections on %d workers", len(sigmas), workers)
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(lambda sigma: self._certify(sys, sigma), sigmas))
        return {
            "m": sys.m,
            "count": math.factorial(sys.m),
            "distinct_pencils": len({r["digest"] for r in results}),
            "results": results,
            "passed": all(r["passed"] for r in results),
        }

    def ciss(self, sigma_text, m=None):
        sigma = Bijection.parse(sigma_text, m)
        structure = ciss(sigma)
        b_row, c_col = block_placement(sigma)
        return {
            "sigma": codec.encode_bijection(sigma),
            "ciss": list(structure.pairs),
            "c1": structure.c1,
            "i1": structure.i1,
            "pattern": ["c" if c else "i" for c in sigma.pattern()],
            "b_row_block": b_row,
            "c_col_block": c_col,
        }

    def smith(self, path):
        schema, obj = self.documents.load(path)
        if schema == SYSTEM:
            sys = self._with_mode(obj, "exact")
            payload = codec.encode_smith(smith_form(assemble_system_matrix(sys)))
            G = transfer_function(sys)
            payload["smith_mcmillan"] = codec.encode_smith_mcmillan(smith_mcmillan(G))
            payload["transfer_function"] = codec.encode_rational_matrix(G)
            return payload
        if schema == SPEC:
            G = obj.rational_matrix()
            return {"smith_mcmillan": codec.encode_smith_mcmillan(smith_mcmillan(G)),
                    "transfer_function": codec.encode_rational_matrix(G)}
        if schema == PENCIL:
            return codec.encode_smith(smith_form(obj.as_poly_matrix()))
        if schema == POLY_MATRIX:
            return codec.encode_smith(smith_form(obj))
        raise DocumentError(f"smith cannot handle a {schema}")

    def realize(self, path):
        schema, spec = self.documents.load(path)
        if schema != SPEC:
            raise DocumentError(f"realize needs a spec document, got a {schema}")
        return codec.encode_system(realize(spec))

    def write(self, payload, out=None):
        self.documents.write(payload, out)
