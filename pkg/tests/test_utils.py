"""
Tests for provenance claims, report rendering and JSON encoding.
"""

import json
from fractions import Fraction

import numpy as np
import pytest

from utils import (
    NonUnitQuaternion, PresentationSyntaxError, Provenance, Report, ToolkitError, UnsupportedImmersion, claim,
    dumps, round_float, write_report,
)


def sample_report(checks=None):
    return Report('demo', {'group': 'Z4'}, 'testing', {'value': claim(3), 'nested': {'x': claim('Z/2')}},
                  {'seed': 0}, checks or [])


class TestClaims:

    def test_default_provenance(self):
        assert claim(1) == {'value': 1, 'provenance': 'computed'}

    def test_note(self):
        assert claim(2, Provenance.EXPECTED, 'corrected')['note'] == 'corrected'

    def test_unknown_provenance(self):
        with pytest.raises(ValueError):
            claim(1, 'guessed')


class TestErrors:

    def test_input_errors_are_value_errors(self):
        for cls in (PresentationSyntaxError, UnsupportedImmersion):
            assert issubclass(cls, ToolkitError)
            assert issubclass(cls, ValueError)
        assert isinstance(NonUnitQuaternion('bad', 2.0), ValueError)
        assert NonUnitQuaternion('bad', 2.0).norm == 2.0


class TestEncoding:

    def test_numpy_and_fractions(self):
        payload = {'a': np.int64(3), 'b': np.float64(0.5), 'c': np.array([1, 2]), 'd': Fraction(4, 2),
                   'e': np.bool_(True), 'f': frozenset({2, 1})}
        assert json.loads(dumps(payload)) == {'a': 3, 'b': 0.5, 'c': [1, 2], 'd': 2, 'e': True, 'f': [1, 2]}

    def test_sorted_keys(self):
        assert dumps({'b': 1, 'a': 2}).index('"a"') < dumps({'b': 1, 'a': 2}).index('"b"')

    def test_round_float(self):
        assert round_float(0.1 + 0.2) == 0.3
        assert round_float(1 / 3, 3) == 0.333


class TestReport:

    def test_text(self):
        text = sample_report().to_text()
        assert text.splitlines()[0] == 'demo  [testing]'
        assert '  input group = Z4' in text
        assert 'nested:' in text
        assert 'defaults: seed=0' in text

    def test_checks_render_marks(self):
        report = sample_report([{'name': 'a', 'expected': 1, 'computed': 1, 'ok': True},
                                {'name': 'b', 'expected': 1, 'computed': 2, 'ok': False}])
        text = report.to_text()
        assert '✓ a: 1 (expected 1)' in text
        assert '✗ b: 2 (expected 1)' in text
        assert not report.ok

    def test_json_round_trip_is_stable(self):
        report = sample_report()
        assert json.loads(report.to_json())['results']['value'] == {'value': 3, 'provenance': 'computed'}
        assert report.digest() == sample_report().digest()

    def test_write_to_file(self, tmp_path):
        target = tmp_path / 'r.txt'
        text = write_report(sample_report(), 'text', str(target))
        assert target.read_text(encoding='utf-8') == text + '\n'
