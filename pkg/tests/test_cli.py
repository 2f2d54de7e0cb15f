"""
Tests for the s2s2 command line: parsing, exit codes, and report rendering.
"""

import json
from pathlib import Path

import pytest

from cli import (
    EXIT_MALFORMED, EXIT_MISMATCH, EXIT_OK, MalformedInput, build_parser, parse_characters, parse_degrees, parse_matrix,
    run,
)
from config_loader import reload_config

ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture(autouse=True)
def restore_config():
    yield
    reload_config(ROOT / 'toolkit.yaml')


def run_json(capsys, argv):
    code = run(argv + ['--format', 'json'])
    return code, json.loads(capsys.readouterr().out)


# =============================================================================
# Input parsing
# =============================================================================

class TestParsing:

    def test_matrix_separators(self):
        assert parse_matrix('1, 2; 3 4').to_list() == [[1, 2], [3, 4]]
        assert parse_matrix('1 2\n3 4\n').to_list() == [[1, 2], [3, 4]]

    def test_matrix_errors(self):
        with pytest.raises(MalformedInput):
            parse_matrix('1 x')
        with pytest.raises(MalformedInput):
            parse_matrix('1 2; 3')
        with pytest.raises(MalformedInput):
            parse_matrix('  ')

    def test_characters(self):
        assert parse_characters(None) is None
        assert parse_characters(['x=1']) == {'x': (1,)}
        assert parse_characters(['t=1,0', 'u=0,3']) == {'t': (1, 0), 'u': (0, 1)}
        with pytest.raises(MalformedInput):
            parse_characters(['x'])
        with pytest.raises(MalformedInput):
            parse_characters(['x=a'])

    def test_suite_command_names(self):
        parser = build_parser()
        assert parser.parse_args(['paper-suite']).command == 'paper-suite'
        assert parser.parse_args(['reference-suite', '--only', 'd2-x']).only == ['d2-x']

    def test_degrees(self):
        assert parse_degrees('0-3') == [0, 1, 2, 3]
        assert parse_degrees('0,2,4') == [0, 2, 4]
        with pytest.raises(MalformedInput):
            parse_degrees('a-b')


# =============================================================================
# Exit codes
# =============================================================================

class TestExitCodes:

    def test_snf_ok(self, capsys):
        assert run(['snf', '--matrix', '1 0; 0 1']) == EXIT_OK
        assert 'snf' in capsys.readouterr().out

    def test_malformed_matrix(self, capsys):
        assert run(['snf', '--matrix', '1 x']) == EXIT_MALFORMED
        assert '✗' in capsys.readouterr().err

    def test_bad_grid(self):
        assert run(['kkr', '--table', '--grid', '1']) == EXIT_MALFORMED

    def test_missing_config(self, tmp_path):
        assert run(['rings', '--config', str(tmp_path / 'missing.yaml')]) == EXIT_MALFORMED

    def test_unknown_group(self):
        assert run(['bordism', '--group', 'Z3']) == EXIT_MALFORMED

    def test_ring_iso_needs_other(self):
        assert run(['ring', 'iso', '--ring', 'rp2xrp2']) == EXIT_MALFORMED

    def test_kkr_needs_class(self):
        assert run(['kkr', '--quotient', 'S2xRP2']) == EXIT_MALFORMED

    def test_unsupported_immersion(self):
        assert run(['kkr', '--quotient', 'RP4#RP4', '--class', 'x+y']) == EXIT_MALFORMED

    def test_ring_not_matching_group(self):
        assert run(['bordism', '--group', 'Z4', '--ring', 'z2xz2', '--w1', 't', '--w2', 't*u',
                    '--character', 't=1', '--character', 'u=0']) == EXIT_MALFORMED

    def test_character_length_must_match_group(self):
        assert run(['bordism', '--group', 'Z2xZ2', '--character', 't=1', '--character', 'u=0,1']) == EXIT_MALFORMED

    def test_fixed_point_is_a_failed_check(self):
        assert run(['verify-actions', '--action', 'identity', '--samples', '50']) == EXIT_MISMATCH


# =============================================================================
# Reports
# =============================================================================

class TestReports:

    def test_snf_json(self, capsys):
        code, out = run_json(capsys, ['snf', '--matrix', '2 4; 6 8'])
        assert code == EXIT_OK
        assert out['command'] == 'snf'
        assert out['results']['diagonal'] == {'value': [2, 4], 'provenance': 'computed'}
        assert out['results']['cokernel']['value'] == 'Z/2 + Z/4'
        assert set(out['metadata']) == {'seed', 'grid', 'samples', 'tolerance', 'eps'}

    def test_group_cohomology(self, capsys):
        _, out = run_json(capsys, ['group-cohomology', '--group', 'Z4', '--module', 'Pi-Z4', '--degrees', '0-1'])
        groups = out['results']['groups']
        assert groups['0']['value'] == '0'
        assert out['inputs']['degrees'] == [0, 1]

    def test_ring_wu(self, capsys):
        _, out = run_json(capsys, ['ring', 'wu', '--ring', 'rp2xtrp2'])
        assert out['results']['v2']['value'] == 't*u + u^2'

    def test_ring_cup(self, capsys):
        _, out = run_json(capsys, ['ring', 'cup', '--ring', 'rp2xrp2', '--a', 't', '--b', 'u'])
        assert out['results']['product']['value'] == 't*u'

    def test_ring_iso_truncated(self, capsys):
        _, out = run_json(capsys, ['ring', 'iso', '--ring', 's2xrp2', '--other', 's2xtrp2', '--truncate', '3'])
        assert out['results']['isomorphism']['value']['isomorphic'] is True

    def test_bordism_answer(self, capsys):
        code, out = run_json(capsys, ['bordism', '--group', 'Z4'])
        assert code == EXIT_OK
        assert out['results']['answer']['value'] == 'Z/2 + Z/2 + Z/2'
        provenance = {(s['value']['p'], s['value']['q']): s['provenance'] for s in out['results']['summands']}
        assert provenance == {(0, 4): 'computed', (2, 2): 'computed', (4, 0): 'assumption'}

    def test_bordism_from_ring_file(self, capsys):
        code, out = run_json(capsys, ['bordism', '--group', 'Z4', '--ring', str(ROOT / 'rings' / 'z4.ring'),
                                      '--character', 'x=1', '--w1', 'x', '--w2', 'u'])
        assert code == EXIT_OK
        assert out['inputs']['ring'] == 'z4'
        assert out['inputs']['characters'] == {'x': [1]}
        assert out['results']['answer']['value'] == 'Z/2 + Z/2 + Z/2'

    def test_bordism_ring_file_e3(self, capsys):
        _, out = run_json(capsys, ['bordism', '--group', 'Z4', '--ring', str(ROOT / 'rings' / 'z4.ring'),
                                   '--character', 'x=1', '--page', 'e3'])
        nonzero = sorted([e['p'], e['q']] for e in out['results']['e3']['value']['entries']
                         if e['p'] + e['q'] == 4 and e['dim'])
        assert nonzero == [[0, 4], [2, 2], [4, 0]]

    def test_bordism_without_e8(self, capsys):
        _, out = run_json(capsys, ['bordism', '--group', 'Z4', '--no-e8'])
        assert out['results']['answer']['value'] == 'Z/2 + Z/2'
        assert out['inputs']['e8_survives'] is False

    def test_text_and_json_agree(self, capsys):
        assert run(['gamma', '--preset', 'RP2xRP2', '--format', 'text']) == EXIT_OK
        text = capsys.readouterr().out
        _, out = run_json(capsys, ['gamma', '--preset', 'RP2xRP2'])
        assert out['results']['coinvariants']['value'] == 'Z + Z/2 + Z/2'
        assert 'Z + Z/2 + Z/2' in text
        assert '"orbit_count": 3' in text
        assert out['results']['orbits']['value']['orbit_count'] == 3

    def test_out_file(self, capsys, tmp_path):
        target = tmp_path / 'report.json'
        assert run(['rings', '--format', 'json', '--out', str(target)]) == EXIT_OK
        assert '✓' in capsys.readouterr().out
        data = json.loads(target.read_text(encoding='utf-8'))
        assert data['results']['rings']['rp2xrp2']['dims'] == [1, 2, 3, 2, 1]

    def test_config_overrides_defaults(self, capsys, tmp_path):
        cfg = (ROOT / 'toolkit.yaml').read_text(encoding='utf-8').replace('seed: 0', 'seed: 17')
        path = tmp_path / 'toolkit.yaml'
        path.write_text(cfg, encoding='utf-8')
        (tmp_path / 'rings').symlink_to(ROOT / 'rings')
        (tmp_path / 'report.schema.json').symlink_to(ROOT / 'report.schema.json')
        _, out = run_json(capsys, ['rings', '--config', str(path)])
        assert out['metadata']['seed'] == 17

    @pytest.mark.parametrize('command', ['paper-suite', 'reference-suite'])
    def test_suite_subset(self, capsys, command):
        code, out = run_json(capsys, [command, '--only', 'h0-z4-pi', '--only', 'd2-u2',
                                      '--only', 'lift-orders'])
        assert code == EXIT_OK
        assert [c['name'] for c in out['checks']] == ['h0-z4-pi', 'd2-u2', 'lift-orders']
        assert all(c['ok'] for c in out['checks'])
        assert out['command'] == 'paper-suite'
        assert all(c['paper_section'] for c in out['checks'])

    def test_paper_section_and_expected_provenance(self, capsys):
        _, out = run_json(capsys, ['kkr', '--quotient', 'S2xRP2', '--class', 'x'])
        assert out['paper_section']
        assert 'section' not in out
        assert out['results']['euler_number']['provenance'] == 'paper-expected'

    def test_verify_actions_echoes_applied_bound(self, capsys):
        _, out = run_json(capsys, ['verify-actions', '--action', 'sigma', '--samples', '100'])
        twist = next(c for c in out['checks'] if c['name'] == 'twist factor closed form')
        assert twist['expected'] == '<= 1e-10'
        assert twist['ok']
        free = next(c for c in out['checks'] if c['name'] == 'sigma free')
        assert free['computed'] is True
