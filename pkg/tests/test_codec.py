import json
import unittest
from fractions import Fraction

import numpy as np

from rosepen import codec
from rosepen.eigen import classify_zeros
from rosepen.equivalence import build_certificate
from rosepen.errors import DocumentError
from rosepen.fiedler import Bijection, pencil_direct
from rosepen.polymat import Poly, PolyMatrix, smith_form
from rosepen.system import assemble_system_matrix
from tests.fixtures import desk1, eigenpole_system

DESK1_DOC = {
    "mode": "exact",
    "P": [[["0"]], [["0"]], [["1"]]],
    "A": [["1"]],
    "B": [["1"]],
    "C": [["1"]],
}


class TestScalars(unittest.TestCase):
    def test_encode(self):
        self.assertEqual(codec.encode_scalar(Fraction(-1, 2)), "-1/2")
        self.assertEqual(codec.encode_scalar(np.int64(5)), "5")
        self.assertEqual(codec.encode_scalar(0.25), 0.25)
        self.assertEqual(codec.encode_scalar(complex(1, -2)), {"re": 1.0, "im": -2.0})

    def test_decode_exact(self):
        self.assertEqual(codec.decode_scalar("-1/2", True), Fraction(-1, 2))
        self.assertEqual(codec.decode_scalar(3, True), Fraction(3))
        self.assertEqual(codec.decode_scalar(2.0, True), Fraction(2))

    def test_decode_float(self):
        self.assertEqual(codec.decode_scalar("1/4", False), 0.25)
        self.assertEqual(codec.decode_scalar({"re": 1, "im": 2}, False), complex(1, 2))

    def test_decode_errors(self):
        for value, exact in [(0.5, True), ({"re": 1, "im": 0}, True), ("abc", True),
                             ("1/0", True), ({"re": 1}, False)]:
            with self.assertRaises(DocumentError, msg=repr(value)):
                codec.decode_scalar(value, exact)


class TestArrays(unittest.TestCase):
    def test_decode(self):
        a = codec.decode_array([["1", "2/3"]], True)
        self.assertEqual(a.shape, (1, 2))
        self.assertEqual(a[0, 1], Fraction(2, 3))
        self.assertEqual(codec.decode_array([], True).shape, (0, 0))

    def test_ragged(self):
        with self.assertRaises(DocumentError):
            codec.decode_array([["1"], ["1", "2"]], True)
        with self.assertRaises(DocumentError):
            codec.decode_array("1", True)

    def test_stack(self):
        self.assertEqual(codec.decode_stack([["1", "2"], ["3", "4"]], True).degree, 0)
        P = codec.decode_stack([[["0"]], [["1"]]], True)
        self.assertEqual(P.entry(0, 0), Poly((0, 1)))
        with self.assertRaises(DocumentError):
            codec.decode_stack([[["1"]], [["1", "0"]]], True)

    def test_poly_matrix_grid(self):
        M = codec.decode_poly_matrix([[["0", "1"], ["1"]]], True)
        self.assertEqual(M, PolyMatrix.from_entries([[Poly((0, 1)), Poly((1,))]]))
        self.assertEqual(codec.encode_poly_matrix(M), [[["0", "1"], ["1"]]])


class TestSystems(unittest.TestCase):
    def test_decode_defaults_e_to_identity(self):
        sys = codec.decode_system(DESK1_DOC)
        self.assertEqual(sys, desk1())

    def test_encode(self):
        doc = codec.encode_system(eigenpole_system())
        self.assertEqual((doc["n"], doc["r"], doc["m"]), (2, 1, 1))
        self.assertEqual(doc["B"], [["0", "1"]])
        self.assertNotIn("minimal", doc)
        self.assertEqual(codec.decode_system(doc), eigenpole_system())

    def test_float_mode(self):
        doc = dict(DESK1_DOC, mode="float", A=[[0.5]])
        sys = codec.decode_system(doc)
        self.assertFalse(sys.exact)
        self.assertEqual(sys.A[0, 0], 0.5)

    def test_errors(self):
        for doc in [{"A": [["1"]]},
                    dict(DESK1_DOC, mode="complex"),
                    dict(DESK1_DOC, B=[["1", "1"]]),
                    dict(DESK1_DOC, A=[[0.5]])]:
            with self.assertRaises(DocumentError, msg=repr(doc)):
                codec.decode_system(doc)

    def test_spec(self):
        spec = codec.decode_spec({"P": [[["1"]]],
                                  "terms": [{"num": ["1"], "den": ["-2", "1"], "matrix": [["3"]]}]})
        self.assertEqual(len(spec.terms), 1)
        self.assertEqual(spec.terms[0].fn.den, Poly((-2, 1)))

    def test_spec_errors(self):
        with self.assertRaises(DocumentError):
            codec.decode_spec({"P": [[["1"]]], "terms": [{"num": ["1"], "matrix": [["1"]]}]})
        with self.assertRaises(DocumentError):
            codec.decode_spec({"P": [[["1"]]], "terms": [{"num": ["1"], "den": ["0"],
                                                           "matrix": [["1"]]}]})
        with self.assertRaises(DocumentError):
            codec.decode_spec({"P": [[["1"]]], "terms": [{"num": ["1"], "den": ["-2", "1"],
                                                           "matrix": [["1", "1"]]}]})


class TestPencils(unittest.TestCase):
    def test_round_trip_keeps_sigma(self):
        p = pencil_direct(desk1(), Bijection((0, 1)))
        doc = codec.encode_pencil(p)
        self.assertEqual(doc["sigma"], [0, 1])
        self.assertEqual(doc["const"], [["0", "-1", "0"], ["0", "0", "1"], ["1", "0", "1"]])
        decoded = codec.decode_pencil(json.loads(json.dumps(doc)))
        self.assertEqual(decoded, p)
        self.assertEqual(decoded.sigma, p.sigma)
        self.assertEqual(decoded.digest(), doc["digest"])

    def test_shape_mismatch(self):
        doc = codec.encode_pencil(pencil_direct(desk1(), Bijection((0, 1))))
        doc["n"] = 2
        with self.assertRaises(DocumentError):
            codec.decode_pencil(doc)

    def test_missing_key(self):
        doc = codec.encode_pencil(pencil_direct(desk1(), Bijection((0, 1))))
        del doc["lead"]
        with self.assertRaises(DocumentError):
            codec.decode_pencil(doc)


class TestResults(unittest.TestCase):
    def test_zero_report(self):
        doc = codec.encode_zero_report(classify_zeros(eigenpole_system()))
        self.assertEqual(doc["zeros"], [{"value": "2", "class": "Eigenpole", "multiplicity": 1,
                                         "transmission": True, "ind_phi": [0, 1],
                                         "ind_psi": [0, 1]}])
        self.assertEqual(doc["poles"][0]["value"], "2")
        self.assertEqual(doc["zero_kind"], "transmission")
        self.assertEqual(doc["sigma"], [0])
        gep = doc["pencil_eigenvalues"]
        self.assertEqual(gep["finite_eigenvalues"], ["2"])
        self.assertEqual((gep["singular"], gep["infinite_flag"]), (False, False))
        self.assertEqual(gep["backend"], "exact")
        json.dumps(doc)

    def test_numeric_zero_report_is_serializable(self):
        doc = codec.encode_zero_report(classify_zeros(desk1().as_float(), "numeric"))
        self.assertEqual(len(doc["zeros"]), 3)
        self.assertIsNone(doc["zero_poly"])
        json.dumps(doc)

    def test_smith(self):
        doc = codec.encode_smith(smith_form(assemble_system_matrix(desk1())))
        self.assertEqual(doc["p"], 1)
        self.assertEqual(doc["phi"], ["λ^3 - λ^2 + 1"])
        self.assertEqual(doc["phi_coeffs"], [["1", "0", "-1", "1"]])

    def test_certificate_summary(self):
        sys = desk1()
        sigma = Bijection((1, 0))
        pencil = pencil_direct(sys, sigma)
        doc = codec.encode_certificate_summary(sigma, pencil, build_certificate(sys, sigma),
                                               True, Fraction(1))
        self.assertTrue(doc["passed"])
        self.assertTrue(doc["residual_zero"])
        self.assertEqual(doc["sequence"], "(R1^B) L (Q1)")
        self.assertEqual(doc["det_constant"], "1")
        self.assertEqual(doc["steps"], [{"step": 1, "left": "R1^B", "right": "Q1", "holds": True}])
        self.assertNotIn("error", doc)


if __name__ == "__main__":
    unittest.main()
