import json
import logging
from pathlib import Path

import click

from . import codec
from .errors import DocumentError

logger = logging.getLogger(__name__)

SYSTEM = "system"
SPEC = "spec"
PENCIL = "pencil"
POLY_MATRIX = "poly_matrix"


def detect_schema(doc) -> str:
    if isinstance(doc, list):
        return POLY_MATRIX
    if not isinstance(doc, dict):
        raise DocumentError(f"unsupported document of type {type(doc).__name__}")
    if "terms" in doc:
        return SPEC
    if "A" in doc:
        return SYSTEM
    if "lead" in doc or isinstance(doc.get("pencil"), dict):
        return PENCIL
    raise DocumentError("cannot detect the document schema (expected terms, A, lead or a grid)")


class DocumentHandler:
    """Reads input documents and writes JSON results."""

    def __init__(self, config):
        self.config = config
        self.base_dir = config.get_base_dir()

    def resolve(self, path) -> Path:
        candidate = Path(path)
        if candidate.exists():
            return candidate
        fallback = self.base_dir / candidate
        if not candidate.is_absolute() and fallback.exists():
            return fallback
        raise DocumentError(f"input file not found: {path}")

    def read(self, path):
        resolved = self.resolve(path)
        try:
            with open(resolved, "r", encoding="utf-8") as f:
                doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise DocumentError(f"{resolved}: invalid JSON ({exc})") from exc
        logger.debug("read %s", resolved)
        return doc

    def load(self, path):
        """(schema, object) for the document at path."""
        doc = self.read(path)
        schema = detect_schema(doc)
        if schema == SPEC:
            return schema, codec.decode_spec(doc)
        if schema == SYSTEM:
            return schema, codec.decode_system(doc)
        if schema == PENCIL:
            return schema, codec.decode_pencil(doc.get("pencil", doc))
        return schema, codec.decode_poly_matrix(doc, exact=self.config.get_mode() == "exact")

    def load_system(self, path):
        schema, obj = self.load(path)
        if schema != SYSTEM:
            raise DocumentError(f"{path} holds a {schema}, expected a system")
        return obj

    def load_pencil(self, path):
        schema, obj = self.load(path)
        if schema != PENCIL:
            raise DocumentError(f"{path} holds a {schema}, expected a pencil")
        return obj

    @staticmethod
    def dumps(payload) -> str:
        return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False)

    def write(self, payload, out=None):
        text = self.dumps(payload)
        if out:
            with open(out, "w", encoding="utf-8") as f:
                f.write(text + "\n")
            logger.info("wrote %s", out)
        else:
            click.echo(text)
