import sys; import os; sys.path.insert(1, os.path.join(os.getcwd(), "src"))


import json
import math
import tempfile
import unittest

import jsonschema
import numpy as np

from reports import (
    Report, round_float, to_jsonable, dumps, write_json, format_cell,
    table_to_csv, validate_report)


class TestReport(unittest.TestCase):

    def test_checks(self):
        report = Report('demo')
        self.assertTrue(report.check_le('le', 1.0, 2.0))
        self.assertTrue(report.check_ge('ge', 1.0, 1.0 + 1e-13, 1e-12))
        self.assertTrue(report.check_close('close', 1.0, 1.0 + 1e-10, 1e-9))
        self.assertFalse(report.check_true('flag', False))
        self.assertFalse(report.passed)
        self.assertEqual([a.name for a in report.failed_assertions()], ['flag'])
        with self.assertRaises(KeyError):
            report.assertion('missing')

    def test_pow2_checks_switch_to_log2(self):
        report = Report('demo')
        report.check_le_pow2('small', 3.0, 2.0)
        report.check_ge_pow2('tiny', 1e-10, -2000.0)
        self.assertEqual(report.assertions[0].rhs, 4.0)
        self.assertEqual(report.assertions[1].name, 'tiny.log2')
        self.assertTrue(report.passed)

    def test_merge_prefixes_everything(self):
        inner = Report('inner')
        inner.quantities['x'] = 1
        inner.check_true('ok', True)
        inner.warn('careful')
        inner.add_trace({'step': 1})
        outer = Report('outer')
        outer.merge(inner, 'a.')
        self.assertEqual(outer.quantities, {'a.x': 1})
        self.assertEqual(outer.assertions[0].name, 'a.ok')
        self.assertEqual(outer.warnings, ['a.careful'])
        self.assertEqual(outer.trace, [{'source': 'a', 'step': 1}])

    def test_skip(self):
        report = Report('demo')
        report.skip('bound', 'hypothesis fails')
        self.assertTrue(report.quantities['bound.skipped'])
        self.assertTrue(report.passed)


class TestSerialization(unittest.TestCase):

    def test_round_float(self):
        self.assertEqual(round_float(1 / 3), 0.333333333333)
        self.assertEqual(round_float(math.inf), "inf")
        self.assertEqual(round_float(-math.inf), "-inf")
        self.assertEqual(round_float(math.nan), "nan")

    def test_to_jsonable(self):
        value = to_jsonable({'a': np.int64(3), 'b': np.array([0.5, 1.0]), 'c': (True,),
                             'd': {2, 1}, 'e': 1 + 2j, 'f': np.bool_(False)})
        self.assertEqual(value, {'a': 3, 'b': [0.5, 1.0], 'c': [True], 'd': [1, 2],
                                 'e': {'re': 1.0, 'im': 2.0}, 'f': False})

    def test_dumps_is_canonical(self):
        text = dumps({'b': 1, 'a': 2})
        self.assertTrue(text.endswith("}\n"))
        self.assertLess(text.index('"a"'), text.index('"b"'))

    def test_format_cell(self):
        self.assertEqual(format_cell(True), "true")
        self.assertEqual(format_cell(np.bool_(False)), "false")
        self.assertEqual(format_cell(7), "7")
        self.assertEqual(format_cell(1.0), "1")
        self.assertEqual(format_cell(2 ** 0.5), "1.41421356237")
        self.assertEqual(format_cell(math.inf), "inf")

    def test_table_to_csv(self):
        rows = [{'p': 3, 'x': 0.5, 'ok': True}, {'p': 5, 'x': 0.25, 'ok': False}]
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'out.csv')
            text = table_to_csv(rows, ['p', 'x', 'ok'], path)
            with open(path, 'r', newline='') as f:
                self.assertEqual(f.read(), text)
        self.assertEqual(text, "p,x,ok\n3,0.5,true\n5,0.25,false\n")


class TestSchema(unittest.TestCase):

    def test_report_matches_schema(self):
        report = Report('demo', inputs={'p': 13})
        report.check_le('bound', 1.0, math.inf)
        report.quantities['value'] = math.nan
        report.add_trace({'k': 4})
        validate_report(report.to_dict())

    def test_schema_rejects_extra_fields(self):
        d = Report('demo').to_dict()
        d['extra'] = 1
        with self.assertRaises(jsonschema.ValidationError):
            validate_report(d)

    def test_write_json(self):
        report = Report('demo')
        report.check_true('ok', True)
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'r.json')
            text = write_json(report, path)
            with open(path, 'r') as f:
                loaded = json.load(f)
        self.assertEqual(loaded, json.loads(text))
        self.assertTrue(loaded['pass'])
        self.assertEqual(loaded['schema_version'], "1")


if __name__ == '__main__':
    unittest.main()
