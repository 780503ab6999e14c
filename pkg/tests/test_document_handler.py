import json
import os
import tempfile
import unittest
from pathlib import Path
from unittest.mock import MagicMock, patch

from rosepen.document_handler import (
    PENCIL,
    POLY_MATRIX,
    SPEC,
    SYSTEM,
    DocumentHandler,
    detect_schema,
)
from rosepen.errors import DocumentError
from rosepen.polymat import Poly
from rosepen.system import RepSpec
from tests.fixtures import desk1

SYSTEMS_DIR = Path(__file__).resolve().parent.parent / "systems"


class TestDetectSchema(unittest.TestCase):
    def test_schemas(self):
        self.assertEqual(detect_schema({"P": [], "terms": []}), SPEC)
        self.assertEqual(detect_schema({"P": [], "A": []}), SYSTEM)
        self.assertEqual(detect_schema({"lead": []}), PENCIL)
        self.assertEqual(detect_schema({"pencil": {"lead": []}, "sigma": [0]}), PENCIL)
        self.assertEqual(detect_schema([[["1"]]]), POLY_MATRIX)

    def test_unknown(self):
        with self.assertRaises(DocumentError):
            detect_schema({"P": []})
        with self.assertRaises(DocumentError):
            detect_schema("text")


class TestDocumentHandler(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.mock_config = MagicMock()
        self.mock_config.get_base_dir.return_value = Path(self.tmp.name)
        self.mock_config.get_mode.return_value = "exact"
        self.handler = DocumentHandler(self.mock_config)

    def write(self, name, payload):
        path = Path(self.tmp.name) / name
        path.write_text(payload if isinstance(payload, str) else json.dumps(payload))
        return path

    def test_load_system(self):
        sys = self.handler.load_system(str(SYSTEMS_DIR / "desk1.json"))
        self.assertEqual(sys, desk1())

    def test_load_spec(self):
        schema, spec = self.handler.load(str(SYSTEMS_DIR / "fluid_solid_spec.json"))
        self.assertEqual(schema, SPEC)
        self.assertIsInstance(spec, RepSpec)
        self.assertEqual(spec.P.degree, 1)

    def test_relative_path_falls_back_to_base_dir(self):
        self.write("only_here.json", {"A": [["1"]], "P": [[["1"]]], "B": [["1"]], "C": [["1"]]})
        self.assertFalse(os.path.exists("only_here.json"))
        self.assertEqual(self.handler.resolve("only_here.json"),
                         Path(self.tmp.name) / "only_here.json")
        self.assertEqual(self.handler.load_system("only_here.json").r, 1)

    def test_missing_file(self):
        with self.assertRaises(DocumentError):
            self.handler.read("does_not_exist.json")

    def test_invalid_json(self):
        path = self.write("broken.json", "{oops")
        with self.assertRaises(DocumentError):
            self.handler.read(str(path))

    def test_wrong_schema(self):
        with self.assertRaises(DocumentError):
            self.handler.load_pencil(str(SYSTEMS_DIR / "desk1.json"))
        with self.assertRaises(DocumentError):
            self.handler.load_system(str(SYSTEMS_DIR / "desk1_spec.json"))

    def test_poly_matrix_grid_uses_config_mode(self):
        path = self.write("grid.json", [[["0", "1"], ["1"]], [["1"], ["0"]]])
        schema, M = self.handler.load(str(path))
        self.assertEqual(schema, POLY_MATRIX)
        self.assertEqual(M.entry(0, 0), Poly((0, 1)))
        self.assertTrue(M.exact)

    def test_write_to_file(self):
        out = Path(self.tmp.name) / "out.json"
        self.handler.write({"b": 1, "a": "λ"}, str(out))
        text = out.read_text(encoding="utf-8")
        self.assertTrue(text.startswith('{\n  "a": "λ"'))
        self.assertEqual(json.loads(text), {"a": "λ", "b": 1})

    @patch("click.echo")
    def test_write_to_stdout(self, mock_echo):
        self.handler.write({"passed": True})
        mock_echo.assert_called_once_with('{\n  "passed": true\n}')


if __name__ == "__main__":
    unittest.main()
