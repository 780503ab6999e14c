import math
import unittest

import numpy as np

from rosepen.errors import DimensionError, InvalidBijectionError
from rosepen.fiedler import (
    Bijection,
    block_placement,
    ciss,
    commutation_check,
    companion_layout,
    count_distinct_pencils,
    factor_inverse,
    first_companion,
    inverse_commutation_check,
    is_block_pentadiagonal,
    make_factor,
    pencil_algorithm1,
    pencil_block_formula,
    pencil_direct,
    pentadiagonal_by_ciss,
    second_companion,
    system_block_transpose,
)
from rosepen.polymat import eye, exact_array
from tests.fixtures import desk1, identity, layout, random_system


def same(a, b):
    return a.shape == b.shape and bool(np.all(a == b))


class TestBijection(unittest.TestCase):
    def test_parse_and_positions(self):
        sigma = Bijection.parse("2,0,1,3")
        self.assertEqual(sigma.m, 4)
        self.assertEqual(sigma.position(2), 1)
        self.assertEqual(sigma.position(3), 4)
        self.assertEqual(sigma.pattern(), (True, False, True))
        self.assertEqual(str(sigma), "2,0,1,3")

    def test_invalid(self):
        for bad in [(0, 0), (), (1, 2)]:
            with self.assertRaises(InvalidBijectionError):
                Bijection(bad)
        with self.assertRaises(InvalidBijectionError):
            Bijection.parse("a,b")
        with self.assertRaises(InvalidBijectionError):
            Bijection.parse("1,0", m=3)

    def test_companions(self):
        self.assertEqual(Bijection.first_companion(3).inverse_order, (2, 1, 0))
        self.assertEqual(Bijection.second_companion(3).inverse_order, (0, 1, 2))

    def test_all_and_equivalence_classes(self):
        sigmas = list(Bijection.all(4))
        self.assertEqual(len(sigmas), math.factorial(4))
        self.assertEqual(len({s.pattern() for s in sigmas}), 2 ** 3)
        self.assertTrue(Bijection((0, 2, 3, 1)).equivalent(Bijection((2, 0, 1, 3))))
        self.assertFalse(Bijection((1, 0)).equivalent(Bijection((0, 1))))


class TestCISS(unittest.TestCase):
    def test_first_companion(self):
        structure = ciss(Bijection((3, 2, 1, 0)))
        self.assertEqual(structure.pairs, (0, 3))
        self.assertEqual(block_placement(Bijection((3, 2, 1, 0))), (4, 1))

    def test_second_companion(self):
        structure = ciss(Bijection((0, 1, 2, 3)))
        self.assertEqual(structure.pairs, (3, 0))
        self.assertEqual((structure.c1, structure.i1), (3, 0))
        self.assertEqual(block_placement(Bijection((0, 1, 2, 3))), (1, 4))

    def test_mixed(self):
        structure = ciss(Bijection((0, 1, 3, 5, 2, 4)))
        self.assertEqual(structure.pairs, (2, 1, 1, 1))
        self.assertEqual(structure.c_total + structure.i_total, 5)
        self.assertEqual(str(structure), "(2, 1, 1, 1)")

    def test_single_factor(self):
        self.assertEqual(ciss(Bijection((0,))).pairs, ())


class TestFactors(unittest.TestCase):
    def test_desk1_factors(self):
        sys = desk1()
        self.assertTrue(same(make_factor(sys, 0).matrix,
                             exact_array([[1, 0, 0], [0, 0, -1], [0, -1, -1]])))
        self.assertTrue(same(make_factor(sys, 1).matrix,
                             exact_array([[0, 1, 0], [1, 0, 0], [0, 0, 1]])))
        self.assertTrue(same(make_factor(sys, 2).matrix,
                             exact_array([[1, 0, 0], [0, 1, 0], [0, 0, -1]])))

    def test_index_out_of_range(self):
        with self.assertRaises(DimensionError):
            make_factor(desk1(), 3)

    def test_closed_form_inverse(self):
        sys = random_system(np.random.default_rng(1), 2, 1, 4)
        for i in range(1, sys.m):
            f = make_factor(sys, i)
            self.assertTrue(same(factor_inverse(f) @ f.matrix, eye(f.matrix.shape[0], True)))

    def test_outer_factors_need_numeric_inverse(self):
        f = make_factor(desk1(), 0)
        with self.assertRaises(DimensionError):
            factor_inverse(f)
        self.assertTrue(same(factor_inverse(f, numeric=True) @ f.matrix, eye(3, True)))

    def test_commutation(self):
        sys = random_system(np.random.default_rng(2), 1, 1, 4, positive=True)
        for i in range(sys.m):
            for j in range(i + 1, sys.m):
                self.assertEqual(commutation_check(sys, i, j), j - i != 1, (i, j))
        self.assertFalse(commutation_check(sys, 0, sys.m))
        self.assertTrue(commutation_check(sys, 1, sys.m))
        self.assertFalse(commutation_check(sys, sys.m - 1, sys.m))

    def test_inverse_commutation(self):
        sys = random_system(np.random.default_rng(3), 1, 1, 5, positive=True)
        for i in range(1, sys.m):
            for j in range(i + 1, sys.m):
                self.assertEqual(inverse_commutation_check(sys, i, j), j - i != 1, (i, j))


class TestDesk1Pencils(unittest.TestCase):
    def test_first_companion(self):
        p = first_companion(desk1())
        self.assertTrue(same(p.lead, exact_array([[1, 0, 0], [0, 1, 0], [0, 0, -1]])))
        self.assertTrue(same(p.const_term, exact_array([[0, 0, 1], [-1, 0, 0], [0, 1, 1]])))
        self.assertEqual((p.b_row_block, p.c_col_block), (2, 1))

    def test_second_companion(self):
        p = second_companion(desk1())
        self.assertTrue(same(p.const_term, exact_array([[0, -1, 0], [0, 0, 1], [1, 0, 1]])))
        self.assertEqual((p.b_row_block, p.c_col_block), (1, 2))

    def test_algorithm1_needs_two_blocks(self):
        sys = random_system(np.random.default_rng(4), 1, 1, 1)
        with self.assertRaises(DimensionError):
            pencil_algorithm1(sys, Bijection((0,)))

    def test_wrong_length_sigma(self):
        with self.assertRaises(InvalidBijectionError):
            pencil_direct(desk1(), Bijection((0, 1, 2)))


class TestDegreeFourPencils(unittest.TestCase):
    def setUp(self):
        self.sys = random_system(np.random.default_rng(5), 2, 1, 4, positive=True)
        self.A = self.sys.coefficient
        self.I = identity(self.sys)

    def check(self, sigma, blocks):
        expected = -layout(self.sys, blocks)
        for build in (pencil_direct, pencil_algorithm1, pencil_block_formula):
            p = build(self.sys, Bijection(sigma))
            self.assertTrue(same(p.const_term, expected), build.__name__)

    def test_leading_coefficient(self):
        p = pencil_direct(self.sys, Bijection((1, 0, 2, 3)))
        lead = layout(self.sys, {(0, 0): self.A(4), (1, 1): self.I, (2, 2): self.I,
                                 (3, 3): self.I, (4, 4): -self.sys.E})
        self.assertTrue(same(p.lead, lead))

    def test_sigma(self):
        A, I, s = self.A, self.I, self.sys
        self.check((1, 0, 2, 3), {
            (0, 0): -A(3), (0, 1): I, (1, 0): -A(2), (1, 2): I, (2, 0): -A(1),
            (2, 3): -A(0), (2, 4): -s.C, (3, 0): I, (4, 3): -s.B, (4, 4): -s.A})
        self.assertEqual(block_placement(Bijection((1, 0, 2, 3))), (4, 3))

    def test_tau_and_equivalent_delta(self):
        A, I, s = self.A, self.I, self.sys
        self.check((2, 0, 1, 3), {
            (0, 0): -A(3), (0, 1): I, (1, 0): -A(2), (1, 2): -A(1), (1, 3): I,
            (2, 0): I, (3, 2): -A(0), (3, 4): -s.C, (4, 2): -s.B, (4, 4): -s.A})
        tau = pencil_direct(s, Bijection((2, 0, 1, 3)))
        delta = pencil_direct(s, Bijection((0, 2, 3, 1)))
        self.assertEqual(tau, delta)
        self.assertEqual(tau.digest(), delta.digest())


class TestConstructionsAgree(unittest.TestCase):
    def check_all(self, sys):
        for sigma in Bijection.all(sys.m):
            direct = pencil_direct(sys, sigma)
            self.assertEqual(direct, pencil_algorithm1(sys, sigma), str(sigma))
            self.assertEqual(direct, pencil_block_formula(sys, sigma), str(sigma))
            self.assertEqual((direct.b_row_block, direct.c_col_block), block_placement(sigma))

    def test_all_bijections(self):
        rng = np.random.default_rng(6)
        for m in range(2, 6):
            self.check_all(random_system(rng, 1, 1, m))

    def test_all_bijections_with_block_sizes(self):
        rng = np.random.default_rng(13)
        for n in (1, 2, 3):
            for r in (1, 2, 3):
                for m in (2, 3, 4):
                    self.check_all(random_system(rng, n, r, m))
        self.check_all(random_system(rng, 2, 3, 5))

    def test_companion_layout(self):
        rng = np.random.default_rng(7)
        for m in range(1, 5):
            sys = random_system(rng, 2, 2, m)
            self.assertEqual(first_companion(sys), companion_layout(sys))

    def test_distinct_pencils(self):
        rng = np.random.default_rng(8)
        for m in range(2, 5):
            sys = random_system(rng, 1, 1, m, positive=True)
            self.assertEqual(count_distinct_pencils(sys), 2 ** (m - 1))


class TestBlockTranspose(unittest.TestCase):
    def test_companions(self):
        sys = random_system(np.random.default_rng(9), 2, 1, 3, positive=True)
        self.assertEqual(system_block_transpose(first_companion(sys)), second_companion(sys))

    def test_reversed_bijection(self):
        sys = random_system(np.random.default_rng(10), 1, 2, 4, positive=True)
        for sigma in Bijection.all(4):
            transposed = system_block_transpose(pencil_direct(sys, sigma))
            self.assertEqual(transposed, pencil_direct(sys, sigma.reversed()), str(sigma))
            self.assertEqual(transposed.sigma, sigma.reversed())


class TestPentadiagonal(unittest.TestCase):
    def setUp(self):
        self.sys = random_system(np.random.default_rng(11), 1, 1, 6, positive=True)

    def test_alternating_patterns(self):
        for sigma in [(1, 3, 5, 0, 2, 4), (0, 2, 4, 1, 3, 5)]:
            p = pencil_direct(self.sys, Bijection(sigma))
            self.assertTrue(is_block_pentadiagonal(p), sigma)
            self.assertTrue(pentadiagonal_by_ciss(self.sys, Bijection(sigma)), sigma)

    def test_long_leading_consecution(self):
        sigma = Bijection((0, 1, 3, 5, 2, 4))
        p = pencil_direct(self.sys, sigma)
        self.assertFalse(is_block_pentadiagonal(p))
        self.assertTrue(np.any(p.const_term[6:, 3:4] != 0))
        self.assertFalse(pentadiagonal_by_ciss(self.sys, sigma))

    def check(self, sigma, blocks, pentadiagonal):
        sys = random_system(np.random.default_rng(14), 2, 1, 6, positive=True)
        A, I = sys.coefficient, identity(sys)
        expected = -layout(sys, blocks(A, I, sys))
        for build in (pencil_direct, pencil_algorithm1, pencil_block_formula):
            p = build(sys, Bijection(sigma))
            self.assertTrue(same(p.const_term, expected), build.__name__)
            self.assertEqual(is_block_pentadiagonal(p), pentadiagonal, build.__name__)

    def test_odd_then_m0_then_even(self):
        self.check((1, 3, 5, 0, 2, 4), lambda A, I, s: {
            (0, 0): -A(5), (0, 1): -A(4), (0, 2): I, (1, 0): I,
            (2, 1): -A(3), (2, 3): -A(2), (2, 4): I, (3, 1): I,
            (4, 3): -A(1), (4, 5): -A(0), (4, 6): -s.C, (5, 3): I,
            (6, 5): -s.B, (6, 6): -s.A}, True)

    def test_m0_then_even_then_odd(self):
        self.check((0, 2, 4, 1, 3, 5), lambda A, I, s: {
            (0, 0): -A(5), (0, 1): I, (1, 0): -A(4), (1, 2): -A(3), (1, 3): I,
            (2, 0): I, (3, 2): -A(2), (3, 4): -A(1), (3, 5): I, (4, 2): I,
            (5, 4): -A(0), (5, 6): -s.C, (6, 4): -s.B, (6, 6): -s.A}, True)

    def test_m0_then_odd_then_even(self):
        self.check((0, 1, 3, 5, 2, 4), lambda A, I, s: {
            (0, 0): -A(5), (0, 1): -A(4), (0, 2): I, (1, 0): I,
            (2, 1): -A(3), (2, 3): -A(2), (2, 4): I, (3, 1): I,
            (4, 3): -A(1), (4, 5): I, (5, 3): -A(0), (5, 6): -s.C,
            (6, 3): -s.B, (6, 6): -s.A}, False)

    def test_predicate_matches_scan(self):
        rng = np.random.default_rng(12)
        for m in range(2, 6):
            sys = random_system(rng, 1, 1, m, positive=True)
            for sigma in Bijection.all(m):
                scan = is_block_pentadiagonal(pencil_direct(sys, sigma))
                self.assertEqual(pentadiagonal_by_ciss(sys, sigma), scan, str(sigma))


if __name__ == "__main__":
    unittest.main()
