class RosepenError(Exception):
    """Base error; ``exit_code`` is what the CLI exits with."""

    exit_code = 1


class DocumentError(RosepenError, ValueError):
    exit_code = 2


class DimensionError(RosepenError, ValueError):
    exit_code = 2


class FieldModeError(RosepenError, TypeError):
    exit_code = 2


class ConfigError(RosepenError, ValueError):
    exit_code = 2


class PencilStructureError(RosepenError, ValueError):
    exit_code = 2


class InvalidBijectionError(RosepenError, ValueError):
    exit_code = 3


class SingularStateMatrixError(RosepenError):
    exit_code = 4


class SingularPencilError(RosepenError):
    exit_code = 5


class CertificateError(RosepenError):
    exit_code = 6

    def __init__(self, message, certificate=None, entry=None):
        super().__init__(message)
        self.certificate = certificate
        # (row, col, coefficient degree) of the first nonzero residual entry
        self.entry = entry
