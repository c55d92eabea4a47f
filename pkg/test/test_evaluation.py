import unittest

import numpy as np
from hypothesis import given, settings, strategies as st

from shortlaw.lib.errors import BudgetExceeded
from shortlaw.lib.evaluation import (BackendArithmetic, compile_plan, evaluate, evaluate_word, format_element, is_law,
                                     shortest_law, vanishing_mask, verify)
from shortlaw.lib.finitegroups import as_group, element_orders, enumerate_elements
from shortlaw.lib.freeword import EMPTY, X_WORD, Y_WORD, commutator, parse_word, power, reduce
from shortlaw.lib.lawcomb import atom, extension_trace, metabelian_trace, order_divisor_trace, solvable_trace, union_trace
from shortlaw.lib.pipeline import PipelineParams, psl2_family_law


class TestEvaluate(unittest.TestCase):
    def setUp(self):
        self.group = as_group('PSL2:7')
        self.elements = enumerate_elements(self.group)

    def test_empty_word_is_identity(self):
        g, h = self.elements[5], self.elements[17]
        self.assertTrue(self.group.is_identity(evaluate(EMPTY, g, h, self.group)[None])[0])

    def test_letters(self):
        g, h = self.elements[5], self.elements[17]
        self.assertTrue(np.array_equal(evaluate(X_WORD, g, h, self.group), g))
        self.assertTrue(np.array_equal(evaluate(Y_WORD, g, h, self.group), h))

    @settings(max_examples=40, deadline=None)
    @given(st.text(alphabet='xXyY', max_size=20), st.text(alphabet='xXyY', max_size=20),
           st.integers(0, 167), st.integers(0, 167))
    def test_homomorphism(self, a, b, i, j):
        u, v = reduce(a), reduce(b)
        g, h = self.elements[i], self.elements[j]
        left = evaluate(u * v, g, h, self.group)
        right = self.group.mul(evaluate(u, g, h, self.group), evaluate(v, g, h, self.group))
        self.assertTrue(self.group.equal(left[None], right)[0])

    def test_batched_evaluation(self):
        arith = BackendArithmetic(self.group)
        w = parse_word('x^3Yxy^2')
        batch = evaluate_word(arith, w, self.elements[:10], self.elements[10:20])
        for k in range(10):
            single = evaluate(w, self.elements[k], self.elements[10 + k], self.group)
            self.assertTrue(self.group.equal(batch[k][None], single[None])[0])

    def test_format_element(self):
        sym = as_group('Sym:3')
        self.assertEqual(format_element(sym, np.array([1, 0, 2])), '(1,2)')
        self.assertEqual(format_element(self.group, self.group.matrix([[1, 1], [0, 1]])), '[[1,1],[0,1]]')


class TestVerify(unittest.TestCase):
    def test_exhaustive_pass(self):
        record = verify(power(X_WORD, 6), 'Sym:3')
        self.assertTrue(record.passed)
        self.assertEqual(record.mode, 'exhaustive')
        self.assertEqual(record.pairs, 36)
        self.assertIsNone(record.seed)
        self.assertIsNone(record.witness)

    def test_exhaustive_failure_and_witness(self):
        """x^2 fails exactly on the 2 x 6 pairs whose first entry has order 3"""
        group = as_group('Sym:3')
        record = verify(power(X_WORD, 2), group)
        self.assertFalse(record.passed)
        self.assertEqual(record.violations, 12)
        elements = enumerate_elements(group)
        orders = element_orders(group, elements)
        i, j = record.witness
        self.assertEqual(orders[i], 3)
        self.assertEqual(j, 0)
        self.assertEqual(i, int(np.flatnonzero(orders == 3)[0]))
        self.assertTrue(record.witness_text.startswith('('))

    def test_table_and_backend_agree(self):
        w = commutator(power(X_WORD, 2), Y_WORD)
        table = verify(w, 'PSL2:5')
        backend = verify(w, 'PSL2:5', table_ceiling=0)
        self.assertEqual((table.violations, table.witness), (backend.violations, backend.witness))
        self.assertGreater(table.violations, 0)

    def test_sampled_mode(self):
        record = verify(X_WORD, 'PSL2:7', pair_budget=0, sample_pairs=5000, batch_size=1024, seed=9)
        self.assertEqual(record.mode, 'sampled:5000')
        self.assertEqual(record.pairs, 5000)
        self.assertEqual(record.seed, 9)
        # only the identity survives x
        self.assertGreater(record.violations, 4900)

    def test_sampled_mode_reproducible(self):
        w = parse_word('x^4')
        a = verify(w, 'PSL2:7', pair_budget=0, sample_pairs=3000, batch_size=512, seed=3)
        b = verify(w, 'PSL2:7', pair_budget=0, sample_pairs=3000, batch_size=512, seed=3)
        c = verify(w, 'PSL2:7', pair_budget=0, sample_pairs=3000, batch_size=512, seed=3, workers=2)
        self.assertEqual((a.violations, a.witness), (b.violations, b.witness))
        self.assertEqual((a.violations, a.witness), (c.violations, c.witness))

    def test_is_law(self):
        self.assertTrue(is_law(parse_word('x^12'), 'Sym:4'))
        self.assertFalse(is_law(parse_word('x^6'), 'Sym:4'))


class TestPlans(unittest.TestCase):
    def assertPlanMatchesWord(self, trace, spec):
        self.assertTrue(np.array_equal(vanishing_mask(trace, spec), vanishing_mask(trace.word, spec)))

    def test_union_plan(self):
        trace = union_trace([atom(power(X_WORD, k)) for k in (2, 3, 4)])
        self.assertPlanMatchesWord(trace, 'Sym:4')

    def test_extension_plan(self):
        trace = extension_trace(atom(commutator(X_WORD, Y_WORD)), atom(power(X_WORD, 2)))
        self.assertPlanMatchesWord(trace, 'Sym:4')

    def test_solvable_plan(self):
        self.assertPlanMatchesWord(solvable_trace(3), 'Sym:4')
        self.assertPlanMatchesWord(solvable_trace(2), 'PSL2:5')

    def test_divisor_plan(self):
        trace = order_divisor_trace({2, 3, 5})
        self.assertPlanMatchesWord(trace, 'Alt:5')
        self.assertEqual(type(compile_plan(trace)).__name__, 'CommutatorPlan')

    def test_substitution_plan(self):
        word, trace = psl2_family_law(PipelineParams(60, c1=1, c4=0.3, seed=2))
        self.assertPlanMatchesWord(trace.children[0], 'Sym:4')
        self.assertTrue(is_law(trace, 'PSL2:5'))

    def test_metabelian_plan(self):
        self.assertPlanMatchesWord(metabelian_trace(), 'Alt:5')


class TestShortestLaw(unittest.TestCase):
    def test_cyclic_two(self):
        law = shortest_law('Cyclic:2', 4)
        self.assertEqual(len(law), 2)
        self.assertTrue(is_law(law, 'Cyclic:2'))

    def test_symmetric_three(self):
        """No law of S3 is shorter than six letters"""
        self.assertIsNone(shortest_law('Sym:3', 5))
        law = shortest_law('Sym:3', 6)
        self.assertEqual(len(law), 6)
        self.assertTrue(is_law(law, 'Sym:3'))

    def test_budget(self):
        with self.assertRaises(BudgetExceeded):
            shortest_law('Sym:5', 10, budget=10 ** 6)


if __name__ == '__main__':
    unittest.main()
