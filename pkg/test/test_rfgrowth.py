import os
import unittest

from shortlaw.lib.errors import BudgetExceeded, GroupSpecError, TrivialWordError
from shortlaw.lib.freeword import EMPTY, X_WORD, Y_WORD, commutator, parse_word, power
from shortlaw.lib.rfgrowth import (CosetTable, NormalQuotient, cache_path, cached_normal_quotients, certify_law,
                                   hall_counts, k_of, low_index_subgroups, normal_quotients, quotient_export,
                                   quotient_import, rf_growth, rf_table)
from shortlaw.lib.utils import temporary_directory

SLOW = bool(os.environ.get('SHORTLAW_SLOW'))
XY = commutator(X_WORD, Y_WORD)


class TestSubgroups(unittest.TestCase):
    def test_hall_counts(self):
        self.assertEqual(hall_counts(6), [1, 3, 13, 71, 461, 3447])

    def test_low_index_matches_hall(self):
        tables = list(low_index_subgroups(6))
        self.assertEqual(len(tables), sum(hall_counts(6)))
        by_index = [sum(1 for t in tables if t.index == m) for m in range(1, 7)]
        self.assertEqual(by_index, [1, 3, 13, 71, 461, 3447])
        self.assertEqual(len(set(tables)), len(tables))

    def test_coset_tables_are_permutations(self):
        for table in low_index_subgroups(3):
            self.assertEqual(sorted(table.x), list(range(table.index)))
            self.assertEqual(sorted(table.y), list(range(table.index)))
            for i, row in enumerate(table.rows):
                self.assertEqual(table.rows[row[0]][1], i)
                self.assertEqual(table.rows[row[2]][3], i)

    def test_budget(self):
        with self.assertRaises(BudgetExceeded):
            list(low_index_subgroups(20, budget=10))
        self.assertEqual(list(low_index_subgroups(0)), [])


class TestNormalQuotients(unittest.TestCase):
    def test_counts_by_index(self):
        """F2 has 1, 3, 4, 7, 6, 15 normal subgroups of index 1..6"""
        quotients = normal_quotients(6)
        by_index = [sum(1 for q in quotients if q.index == m) for m in range(1, 7)]
        self.assertEqual(by_index, [1, 3, 4, 7, 6, 15])
        self.assertEqual(len(normal_quotients(5)), 21)

    def test_normal_subset_of_low_index(self):
        normal = [t for t in low_index_subgroups(4) if t.is_normal()]
        self.assertEqual(len(normal), 1 + 3 + 4 + 7)

    def test_quotients_act_regularly(self):
        for q in normal_quotients(6):
            self.assertTrue(q.table().is_normal())
            self.assertEqual(q.order(), q.index)

    def test_sorted_and_unique(self):
        quotients = normal_quotients(6)
        keys = [(q.index, q.x, q.y) for q in quotients]
        self.assertEqual(keys, sorted(keys))
        self.assertEqual(len(set(q.key for q in quotients)), len(quotients))

    def test_budget(self):
        with self.assertRaises(BudgetExceeded):
            normal_quotients(30, budget=24)
        self.assertEqual(normal_quotients(0), ())

    def test_describe(self):
        q = NormalQuotient(2, (1, 0), (0, 1))
        self.assertEqual(q.describe(), 'order 2: x -> (1,2), y -> ()')
        self.assertTrue(q.table().contains(power(X_WORD, 2)))
        self.assertFalse(q.table().contains(X_WORD))
        self.assertEqual(q.table().trace(parse_word('xy^3'), start=1), 0)


class TestDetection(unittest.TestCase):
    def test_k_of(self):
        self.assertEqual(k_of(X_WORD, 6), 2)
        self.assertEqual(k_of(power(X_WORD, 2), 6), 3)
        self.assertEqual(k_of(power(X_WORD, 6), 6), 4)
        # S3 is the smallest nonabelian group
        self.assertEqual(k_of(XY, 6), 6)
        self.assertIsNone(k_of(power(X_WORD, 60), 6))
        self.assertIsNone(k_of(XY, 5))

    def test_k_of_empty_word(self):
        with self.assertRaises(TrivialWordError):
            k_of(EMPTY, 4)

    def test_large_exponents(self):
        """Run lengths are reduced modulo lcm(1..m) before tracing"""
        self.assertIsNone(k_of(power(X_WORD, 600_000), 6))
        self.assertEqual(k_of(power(X_WORD, 600_001), 6), 2)

    def test_certify_law(self):
        record = certify_law(power(X_WORD, 60), 5)
        self.assertTrue(record.passed)
        self.assertEqual(record.group, 'order<=5')
        self.assertEqual(record.mode, 'oracle')
        self.assertEqual(record.pairs, 21)

    def test_certify_law_failure(self):
        self.assertTrue(certify_law(XY, 5).passed)
        record = certify_law(XY, 6)
        self.assertFalse(record.passed)
        self.assertTrue(record.witness_text.startswith('order 6:'))
        failed = certify_law(X_WORD, 2)
        self.assertEqual(failed.violations, 2)
        self.assertTrue(failed.witness_text.startswith('order 2:'))

    def test_certify_empty_word(self):
        with self.assertRaises(TrivialWordError):
            certify_law(EMPTY, 3)


class TestGrowth(unittest.TestCase):
    def test_small_values(self):
        self.assertEqual(rf_growth(1, 6).value, 2)
        self.assertEqual(rf_growth(2, 6).value, 3)
        three = rf_growth(3, 6)
        self.assertEqual(three.value, 3)
        self.assertTrue(three.exact)
        self.assertEqual(str(three), 'F(3) = 3')

    def test_lower_bound_when_a_law_appears(self):
        """[x, y] survives no quotient of order <= 5"""
        value = rf_growth(4, 5)
        self.assertFalse(value.exact)
        self.assertEqual(value.value, 6)
        self.assertEqual(len(value.witness), 4)
        self.assertEqual(str(value), 'F(4) >= 6')

    def test_errors(self):
        with self.assertRaises(TrivialWordError):
            rf_growth(0, 4)
        with self.assertRaises(BudgetExceeded):
            rf_growth(12, 4, word_budget=8)

    def test_rf_table(self):
        table = rf_table([1, 2, 3], 6)
        self.assertEqual(list(table.columns), ['n', 'F', 'exact', 'witness'])
        self.assertEqual(table['F'].tolist(), [2, 3, 3])
        self.assertTrue(table['exact'].all())
        self.assertEqual(table['witness'].iloc[0], 'x')

    @unittest.skipUnless(SLOW, 'set SHORTLAW_SLOW=1 for quotients up to order 12')
    def test_growth_against_order_twelve(self):
        self.assertEqual(rf_growth(3, 12).value, 3)
        self.assertEqual(k_of(XY, 12), 6)
        # derived subgroups of groups of order <= 12 have exponent dividing 60
        self.assertIsNone(k_of(power(XY, 60), 12))


class TestCache(unittest.TestCase):
    def test_export_import(self):
        quotients = normal_quotients(5)
        with temporary_directory() as tmpdir:
            path = os.path.join(tmpdir, 'quotients.txt')
            quotient_export(quotients, path, 5)
            max_order, loaded = quotient_import(path)
        self.assertEqual(max_order, 5)
        self.assertEqual(loaded, quotients)

    def test_cached_normal_quotients(self):
        with temporary_directory() as tmpdir:
            first = cached_normal_quotients(4, tmpdir)
            self.assertTrue(os.path.exists(cache_path(tmpdir, 4)))
            second = cached_normal_quotients(4, tmpdir)
        self.assertEqual(first, second)

    def test_tampered_cache(self):
        with temporary_directory() as tmpdir:
            path = os.path.join(tmpdir, 'bad.txt')
            with open(path, 'w') as f:
                f.write('max_order: 2\n2 (1,2) () 0,1/0,1\n')
            with self.assertRaises(GroupSpecError):
                quotient_import(path)
            with open(path, 'w') as f:
                f.write('2 (1,2) () 1,0/0,1\n')
            with self.assertRaises(GroupSpecError):
                quotient_import(path)

    def test_table_from_rows(self):
        table = CosetTable(((0, 0, 0, 0),))
        self.assertEqual(table.index, 1)
        self.assertTrue(table.is_normal())
        self.assertTrue(table.contains(XY))


if __name__ == '__main__':
    unittest.main()
