import os
import unittest

from shortlaw.lib.catalog import (PERM_ORDERS, catalog_table, format_cycles, load_catalog_data, named_specs,
                                  parse_cycles, perm_spec, simple_catalog)
from shortlaw.lib.errors import CeilingExceeded, GroupSpecError
from shortlaw.lib.finitegroups import closure, enumerate_elements, order_set, standard_generators

SLOW = bool(os.environ.get('SHORTLAW_SLOW'))


class TestCycles(unittest.TestCase):
    def test_parse_cycles(self):
        self.assertEqual(parse_cycles('(1,2,3)(4,5)', 5), (1, 2, 0, 4, 3))
        self.assertEqual(parse_cycles('()', 3), (0, 1, 2))
        self.assertEqual(parse_cycles('(1, 3)', 4), (2, 1, 0, 3))

    def test_parse_cycles_errors(self):
        with self.assertRaises(GroupSpecError):
            parse_cycles('(1,2', 3)
        with self.assertRaises(GroupSpecError):
            parse_cycles('(1,7)', 3)

    def test_format_cycles(self):
        self.assertEqual(format_cycles((1, 2, 0, 4, 3)), '(1,2,3)(4,5)')
        self.assertEqual(format_cycles((0, 1, 2)), '()')
        self.assertEqual(parse_cycles(format_cycles((3, 0, 1, 2)), 4), (3, 0, 1, 2))


class TestCatalog(unittest.TestCase):
    def test_nothing_below_sixty(self):
        self.assertEqual(simple_catalog(59), [])
        self.assertEqual([e.name for e in simple_catalog(60)], ['Alt:5'])

    def test_catalog_up_to_thousand(self):
        entries = simple_catalog(1000)
        self.assertEqual([e.order for e in entries], [60, 168, 360, 504, 660])
        self.assertEqual([e.name for e in entries], ['Alt:5', 'PSL2:7', 'Alt:6', 'PSL2:8', 'PSL2:11'])
        self.assertTrue(all(e.special for e in entries))
        self.assertIn('PSL2:4', entries[0].aliases)

    def test_non_special_entries(self):
        names = [e.name for e in simple_catalog(30000) if not e.special]
        self.assertEqual(names, ['Alt:7', 'Perm:M11', 'Alt:8', 'Perm:PSU4_2', 'Perm:Sz8'])
        special = [e.name for e in simple_catalog(6048) if e.special]
        self.assertIn('PSL3:3', special)
        self.assertIn('PSU3:3', special)

    def test_catalog_ceiling(self):
        with self.assertRaises(CeilingExceeded):
            simple_catalog(200000, ceiling=100000)

    def test_catalog_table(self):
        table = catalog_table(700)
        self.assertEqual(list(table.columns), ['group', 'order', 'special', 'aliases'])
        self.assertEqual(table['order'].tolist(), [60, 168, 360, 504, 660])
        self.assertEqual(table.loc[table['group'] == 'Alt:6', 'aliases'].item(), 'PSL2:9')

    def test_catalog_data(self):
        specs = load_catalog_data()
        self.assertIn('M11', specs)
        self.assertEqual(specs['M11'].order, PERM_ORDERS['M11'])
        self.assertEqual(specs['M12'].order, PERM_ORDERS['M12'])
        with self.assertRaises(GroupSpecError):
            perm_spec('M24')

    def test_constructed_groups_have_their_orders(self):
        """Sz(8) on the ovoid and PSU4(2) on the E6 roots, orders by Schreier-Sims"""
        specs = named_specs()
        self.assertEqual(specs['Sz8'].parameter, 65)
        self.assertEqual(specs['Sz8'].order, 29120)
        self.assertEqual(specs['PSU4_2'].parameter, 72)
        self.assertEqual(specs['PSU4_2'].order, 25920)

    def test_m11_order_set(self):
        self.assertEqual(order_set(perm_spec('M11')), {1, 2, 3, 4, 5, 6, 8, 11})

    @unittest.skipUnless(SLOW, 'set SHORTLAW_SLOW=1 for the catalog closures')
    def test_closures_match_orders(self):
        for name in ('Sz8', 'PSU4_2', 'M11'):
            spec = perm_spec(name)
            self.assertEqual(len(closure(spec, standard_generators(spec))), PERM_ORDERS[name])
            self.assertEqual(len(enumerate_elements(spec)), PERM_ORDERS[name])


if __name__ == '__main__':
    unittest.main()
