import unittest

import numpy as np

from shortlaw.lib.errors import BudgetExceeded, ConstructionError, TrivialWordError
from shortlaw.lib.evaluation import evaluate, is_law, vanishing_mask
from shortlaw.lib.finitegroups import GroupSpec, as_group, element_orders, enumerate_elements
from shortlaw.lib.freeword import EMPTY, X_WORD, Y_WORD, WalkParams, commutator, parse_word, power, random_walk
from shortlaw.lib.lawcomb import (atom, divisor_claim_report, extension_law, extension_trace, metabelian_law,
                                  order_divisor_law, order_divisor_trace, parse_conjugators, power_law,
                                  prune_divisors, psl2_order_law, psl2_orders, psl3_psu3_divisors,
                                  psl3_psu3_order_trace, solvable_law, solvable_trace, union_law, union_trace)

XY = commutator(X_WORD, Y_WORD)


class TestPowerAndUnion(unittest.TestCase):
    def test_power_law(self):
        self.assertEqual(power_law(2), parse_word('x^2'))
        self.assertTrue(is_law(power_law(6), 'Sym:3'))
        self.assertFalse(is_law(power_law(3), 'Sym:3'))
        self.assertTrue(is_law(power_law(60), 'Alt:5'))
        with self.assertRaises(TrivialWordError):
            power_law(0)

    def test_union_of_one_word(self):
        self.assertEqual(union_law([parse_word('x^3y')]), parse_word('x^3y'))

    def test_union_length_bound(self):
        w = union_law([power(X_WORD, 2), power(Y_WORD, 2)])
        self.assertLessEqual(len(w), 16 * 4 * 2)
        self.assertFalse(w.is_trivial())

    def test_union_vanishing_set(self):
        """union_law([x^2, y^2]) vanishes wherever g^2 = 1 or h^2 = 1"""
        w = union_law([power(X_WORD, 2), power(Y_WORD, 2)])
        mask = vanishing_mask(w, 'Sym:3')
        group = as_group('Sym:3')
        involution = element_orders(group, enumerate_elements(group)) <= 2
        expected = involution[:, None] | involution[None, :]
        self.assertTrue(np.all(mask[expected]))

    def test_union_contains_input_vanishing_sets(self):
        """Seeded families of up to 8 walk words of length <= 12, checked on every pair"""
        specs = ('Sym:3', 'Sym:4', 'Alt:5', 'PSL2:5')
        for seed in range(200):
            rng = np.random.default_rng(seed)
            m = int(rng.integers(2, 9))
            words, stream = [], 0
            while len(words) < m:
                walk = random_walk(WalkParams(int(rng.integers(1, 13)), 'simple', seed, stream))
                stream += 1
                if not walk.is_trivial():
                    words.append(walk)
            trace = union_trace([atom(w) for w in words])
            self.assertFalse(trace.word.is_trivial(), seed)
            self.assertLessEqual(trace.length, 16 * m * m * max(len(w) for w in words), seed)
            for spec in specs:
                expected = np.zeros_like(vanishing_mask(words[0], spec))
                for w in words:
                    expected |= vanishing_mask(w, spec)
                self.assertTrue(np.all(vanishing_mask(trace, spec)[expected]), (seed, spec))

    def test_union_of_many(self):
        words = [power(X_WORD, k) for k in range(2, 7)]
        trace = union_trace([atom(w) for w in words])
        self.assertEqual(trace.kind, 'union')
        self.assertEqual(trace.params['m'], '5')
        self.assertEqual(len(parse_conjugators(trace.params['conjugators'])), 4)
        self.assertLessEqual(trace.length, 16 * 25 * 6)

    def test_union_errors(self):
        with self.assertRaises(ConstructionError):
            union_trace([])
        with self.assertRaises(TrivialWordError):
            union_law([X_WORD, EMPTY])
        with self.assertRaises(BudgetExceeded):
            union_law([power(X_WORD, 10), power(Y_WORD, 10)], max_length=20)


class TestExtension(unittest.TestCase):
    def test_abelian_by_order_two(self):
        w = extension_law(XY, power(X_WORD, 2))
        self.assertLessEqual(len(w), 8)
        self.assertTrue(is_law(w, 'Sym:3'))

    def test_trivial_quotient(self):
        w_n = parse_word('x^2Yxy')
        self.assertEqual(extension_law(w_n, X_WORD), w_n)

    def test_groups_of_order_four(self):
        w = extension_law(power(X_WORD, 2), power(X_WORD, 2))
        self.assertLessEqual(len(w), 4)
        self.assertTrue(is_law(w, 'Cyclic:4'))
        self.assertTrue(is_law(w, 'Dihedral:4'))

    def test_extension_trace_records_second_pair(self):
        trace = extension_trace(atom(XY), atom(power(X_WORD, 2)))
        self.assertEqual(trace.kind, 'extension')
        self.assertIn('second_pair', trace.params)
        self.assertEqual(len(trace.children), 2)

    def test_extension_budget(self):
        with self.assertRaises(BudgetExceeded):
            extension_law(power(X_WORD, 10), power(X_WORD, 10), max_length=50)


class TestSolvable(unittest.TestCase):
    def test_first_levels(self):
        self.assertEqual(solvable_law(1), XY)
        self.assertEqual(solvable_law(2), metabelian_law())
        self.assertEqual(len(metabelian_law()), 14)

    def test_length_bound(self):
        for d in range(1, 5):
            w = solvable_law(d)
            self.assertFalse(w.is_trivial())
            self.assertLessEqual(len(w), 4 * 6 ** (d - 1), d)

    def test_laws_for_solvable_groups(self):
        self.assertTrue(is_law(metabelian_law(), 'Sym:3'))
        self.assertTrue(is_law(metabelian_law(), 'Alt:4'))
        self.assertTrue(is_law(metabelian_law(), 'Dihedral:8'))
        self.assertTrue(is_law(solvable_law(3), 'Sym:4'))
        self.assertTrue(is_law(solvable_law(3), 'SL2:3'))
        self.assertFalse(is_law(solvable_law(1), 'Sym:4'))
        self.assertFalse(is_law(solvable_law(1), 'Sym:3'))

    def test_metabelian_law_on_borel(self):
        """The upper triangular subgroup of PSL2(5) is metabelian"""
        group = as_group('PSL2:5')
        elements = enumerate_elements(group)
        borel = elements[elements[:, 2] == 0]
        self.assertEqual(len(borel), 10)
        for g in borel:
            for h in borel:
                self.assertTrue(group.is_identity(evaluate(metabelian_law(), g, h, group)[None])[0])

    def test_solvable_trace(self):
        trace = solvable_trace(3)
        self.assertEqual(trace.params['d'], '3')
        self.assertNotIn('padding', trace.params)
        with self.assertRaises(TrivialWordError):
            solvable_trace(0)


class TestOrderLaws(unittest.TestCase):
    def test_prune_divisors(self):
        self.assertEqual(prune_divisors([2, 3, 4, 6, 12]), [12])
        self.assertEqual(prune_divisors([5, 2, 3]), [2, 3, 5])
        self.assertEqual(prune_divisors([1, 2, 3, 4, 7]), [3, 4, 7])
        with self.assertRaises(ConstructionError):
            prune_divisors([])

    def test_degenerate(self):
        trace = order_divisor_trace({1})
        self.assertEqual(trace.kind, 'degenerate')
        self.assertEqual(trace.word, X_WORD)

    def test_divisor_law_vanishes_on_small_orders(self):
        w = order_divisor_law({2, 3})
        self.assertLessEqual(len(w), 16 * 4 * 3)
        group = as_group('Sym:4')
        orders = element_orders(group, enumerate_elements(group))
        mask = vanishing_mask(w, 'Sym:4')
        self.assertTrue(np.all(mask[orders <= 3]))

    def test_single_order(self):
        trace = order_divisor_trace([5])
        self.assertEqual(trace.kind, 'divisor')
        self.assertEqual(trace.word, power(X_WORD, 5))
        self.assertTrue(is_law(trace, 'Cyclic:5'))

    def test_psl2_orders(self):
        self.assertEqual(psl2_orders(4), [2, 3, 5])
        self.assertEqual(psl2_orders(7), [7, 3, 4])
        self.assertEqual(psl2_orders(8), [2, 7, 9])

    def test_psl2_order_laws(self):
        self.assertTrue(is_law(psl2_order_law(4), 'PSL2:4'))
        self.assertTrue(is_law(psl2_order_law(4), 'Alt:5'))
        self.assertTrue(is_law(psl2_order_law(7), 'PSL2:7'))
        self.assertTrue(is_law(psl2_order_law(8), 'PSL2:8'))

    def test_psl3_order_trace(self):
        exact = psl3_psu3_order_trace(2, False)
        self.assertEqual(exact.params['order_source'], 'exact')
        self.assertEqual(exact.params['orders'], '3 4 7')
        self.assertTrue(is_law(exact, 'PSL3:2'))
        divisors = psl3_psu3_order_trace(2, False, ceiling=100)
        self.assertEqual(divisors.params['order_source'], 'divisors')
        self.assertIn(4, psl3_psu3_divisors(2))
        self.assertNotIn(4, psl3_psu3_divisors(3))

    def test_divisor_claim_report(self):
        """Order 4 in PSL3(2) divides none of the five divisor values"""
        report = divisor_claim_report([GroupSpec('PSL3', 2), GroupSpec('PSL3', 3)])
        self.assertEqual(report['group'].tolist(), ['PSL3:2', 'PSL3:3'])
        self.assertEqual(report['exceptions'].tolist(), ['4', ''])
        self.assertEqual(report['holds'].tolist(), [False, True])

    def test_divisor_claim_on_larger_groups(self):
        report = divisor_claim_report([GroupSpec('PSL3', 5), GroupSpec('PSU3', 3)])
        self.assertEqual(report['orders'].tolist(), ['1 2 3 4 5 6 8 10 12 20 24 31', '1 2 3 4 6 7 8 12'])
        self.assertEqual(report['exceptions'].tolist(), ['', ''])
        self.assertTrue(report['holds'].all())


class TestTrace(unittest.TestCase):
    def test_to_lines(self):
        trace = union_trace([atom(power(X_WORD, 2)), atom(power(Y_WORD, 3))], 'demo')
        lines = trace.to_lines()
        self.assertEqual(lines[0], '- kind: union')
        self.assertIn('  scope: demo', lines)
        self.assertIn('  - kind: word', lines)
        self.assertEqual(len(list(trace.nodes())), 3)

    def test_release_words(self):
        inner = union_trace([atom(power(X_WORD, 2)), atom(power(Y_WORD, 3))])
        outer = union_trace([inner, atom(XY)])
        outer.release_words(limit=4)
        self.assertIsNone(inner.word)
        self.assertIsNotNone(outer.word)
        self.assertGreater(inner.length, 4)

    def test_empty_word_rejected(self):
        with self.assertRaises(ConstructionError):
            atom(EMPTY)


if __name__ == '__main__':
    unittest.main()
