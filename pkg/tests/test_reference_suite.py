"""
Tests for the reference-value suite and its expectations file.
"""

import pytest
import yaml

from reference_suite import CHECKS, SuiteResult, load_expectations, run_suite

FAST = ['h0-z4-pi', 'h1-z4-pi', 'h2-k4-pi', 'h0-z4-zminus', 'd2-x', 'd2-u2', 'e3-degree-5', 'bordism-z4',
        'bordism-z4-e8-flag', 'wu2-rp2xtrp2', 'rings-s2-truncations', 'rings-rp2-distinct',
        'gamma-rp2xrp2', 'orbits-with-swap', 'orbits-without-swap', 'twist-closed-form', 'lift-orders',
        'diagonal-self-intersection']


@pytest.fixture(scope='module')
def entries(shipped_config):
    return load_expectations(shipped_config.expectations_file)


def run(entries, only, **overrides):
    params = dict(grid=200, seed=0, samples=500, eps=0.1, e8_survives=True)
    params.update(overrides)
    return run_suite(entries, only=only, **params)


# =============================================================================
# Loading
# =============================================================================

class TestLoading:

    def test_every_kind_is_registered(self, entries):
        assert entries
        assert {e['kind'] for e in entries} <= set(CHECKS)

    def test_ids_are_unique(self, entries):
        ids = [e['id'] for e in entries]
        assert len(ids) == len(set(ids))

    def test_corrections_carry_notes(self, entries):
        by_id = {e['id']: e for e in entries}
        assert 'corrected' in by_id['h0-z4-pi']['note']

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_expectations(tmp_path / 'none.yaml')

    def test_missing_key(self, tmp_path):
        path = tmp_path / 'bad.yaml'
        path.write_text(yaml.safe_dump({'checks': [{'id': 'a', 'kind': 'lift_orders', 'expected': [8, 4]}]}))
        with pytest.raises(ValueError, match='section'):
            load_expectations(path)

    def test_unknown_kind(self, tmp_path):
        path = tmp_path / 'bad.yaml'
        path.write_text(yaml.safe_dump({'checks': [{'id': 'a', 'section': 's', 'kind': 'nope', 'expected': 1}]}))
        with pytest.raises(ValueError, match='unknown kind'):
            load_expectations(path)

    def test_duplicate_id(self, tmp_path):
        entry = {'id': 'a', 'section': 's', 'kind': 'lift_orders', 'expected': [8, 4]}
        path = tmp_path / 'bad.yaml'
        path.write_text(yaml.safe_dump({'checks': [entry, entry]}))
        with pytest.raises(ValueError, match='duplicate'):
            load_expectations(path)


# =============================================================================
# Running
# =============================================================================

class TestRunning:

    def test_fast_checks_pass(self, entries):
        results = run(entries, FAST)
        assert [r.id for r in results] == [e['id'] for e in entries if e['id'] in FAST]
        failures = [(r.id, r.expected, r.computed, r.error) for r in results if not r.ok]
        assert failures == []

    def test_action_checks_pass(self, entries):
        results = run(entries, ['sigma-free', 'psi-free', 'identity-not-free', 'covering-c0'])
        assert all(r.ok for r in results)

    @pytest.mark.slow
    def test_full_suite_passes(self, entries):
        results = run(entries, None, samples=2000)
        assert [r.id for r in results if not r.ok] == []

    def test_e8_flag_changes_the_answer(self, entries):
        result, = run(entries, ['bordism-z4'], e8_survives=False)
        assert not result.ok
        assert result.computed == [[0, 4, 'Z/2'], [2, 2, 'Z/2']]

    def test_errors_become_failed_results(self):
        entry = {'id': 'bad', 'section': 's', 'kind': 'kkr_count', 'expected': 1,
                 'args': {'quotient': 'RP4#RP4', 'cls': 'x+y'}}
        result, = run([entry], None)
        assert not result.ok
        assert result.computed is None
        assert result.error.startswith('UnsupportedImmersion')
        assert result.to_check()['error'] == result.error

    def test_to_check(self):
        check = SuiteResult('a', 's', 'lift_orders', [8, 4], [8, 4], True).to_check()
        assert check == {'name': 'a', 'paper_section': 's', 'kind': 'lift_orders',
                         'expected': [8, 4], 'computed': [8, 4], 'ok': True}
