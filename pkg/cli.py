#!/usr/bin/env python3
"""
s2s2 - command-line surface for the S²×S² quotient toolkit.

Every subcommand builds a Report (inputs echo, topic tag, results with
provenance, numerical defaults) and renders it as text or JSON.

Exit codes: 0 success, 1 paper-suite mismatch or failed numerical
check, 2 malformed input.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

# Load environment variables from .env file (S2S2_CONFIG and friends)
from dotenv import load_dotenv
load_dotenv()

from config_loader import get_config, reload_config
from utils import (
    PresentationSyntaxError, Provenance, Report, ToolkitError, claim, write_report,
)

logger = logging.getLogger('s2s2')

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_MALFORMED = 2


class MalformedInput(ValueError):
    """Command-line input that cannot be parsed."""


# ============== Input parsing ==============

def parse_matrix(text: str):
    """Rows separated by newlines or ';', entries by whitespace or ','."""
    from exact_linalg import IntMatrix

    rows = []
    for raw in text.replace(';', '\n').splitlines():
        raw = raw.strip()
        if not raw:
            continue
        try:
            rows.append([int(x) for x in raw.replace(',', ' ').split()])
        except ValueError:
            raise MalformedInput(f"not an integer row: '{raw}'")
    if not rows:
        raise MalformedInput("empty matrix")
    if len({len(r) for r in rows}) != 1:
        raise MalformedInput("rows have different lengths")
    return IntMatrix.from_rows(rows)


def parse_degrees(text: str) -> List[int]:
    """'0-6' or '0,2,4'."""
    try:
        if '-' in text:
            lo, hi = text.split('-', 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(x) for x in text.split(',') if x.strip()]
    except ValueError:
        raise MalformedInput(f"bad degree list '{text}'")


def parse_characters(items: Optional[List[str]]) -> Optional[Dict[str, Tuple[int, ...]]]:
    """['x=1'] or ['t=1,0', 'u=0,1']: each degree-1 generator's character on the group generators."""
    if not items:
        return None
    out = {}
    for item in items:
        name, sep, values = item.partition('=')
        if not sep or not name.strip():
            raise MalformedInput(f"character must look like name=v1,v2,...: '{item}'")
        try:
            out[name.strip()] = tuple(int(v) % 2 for v in values.split(','))
        except ValueError:
            raise MalformedInput(f"character values must be integers: '{item}'")
    return out


def _load_ring(name: str):
    from f2_rings import load_ring, ring_from_library

    path = Path(name)
    if path.suffix == '.ring' or path.exists():
        return load_ring(path)
    return ring_from_library(name)


def _numeric_defaults(args) -> Dict[str, object]:
    return {'seed': args.seed, 'grid': args.grid, 'samples': args.samples, 'tolerance': args.tolerance,
            'eps': args.eps}


# ============== Subcommands ==============

def cmd_snf(args) -> Report:
    from exact_linalg import cokernel_invariants, smith_normal_form

    text = args.matrix if args.matrix is not None else sys.stdin.read()
    m = parse_matrix(text)
    snf = smith_normal_form(m)
    return Report('snf', {'matrix': m.to_list()}, 'exact linear algebra', {
        'd': claim(snf.d.to_list()),
        'u': claim(snf.u.to_list()),
        'v': claim(snf.v.to_list()),
        'diagonal': claim(snf.diagonal),
        'cokernel': claim(str(cokernel_invariants(m))),
    })


def _homology_command(args, kind: str) -> Report:
    from group_homalg import cohomology_table, homology_table, module_preset, parse_group

    group = parse_group(args.group)
    module = module_preset(args.module)
    degrees = parse_degrees(args.degrees)
    table = (cohomology_table if kind == 'cohomology' else homology_table)(group, module, degrees)
    results = {str(n): claim(str(inv)) for n, inv in table.items()}
    return Report(f'group-{kind}', {'group': group.name(), 'module': args.module, 'degrees': degrees},
                  f'group {kind} with twisted coefficients', {'groups': results})


def cmd_group_cohomology(args) -> Report:
    return _homology_command(args, 'cohomology')


def cmd_group_homology(args) -> Report:
    return _homology_command(args, 'homology')


def cmd_ring(args) -> Report:
    from f2_rings import ring_isomorphic

    ring = _load_ring(args.ring)
    inputs = {'action': args.action, 'ring': args.ring}
    if args.action in ('cup', 'sq') and not args.a:
        raise MalformedInput(f"ring {args.action} needs --a")
    if args.action == 'cup' and not args.b:
        raise MalformedInput("ring cup needs --b")
    if args.action == 'build':
        results = {'ring': claim(ring.summary())}
    elif args.action == 'cup':
        a = ring.class_from_polynomial(args.a)
        b = ring.class_from_polynomial(args.b)
        inputs.update(a=args.a, b=args.b)
        results = {'product': claim(str(ring.cup(a, b)))}
    elif args.action == 'sq':
        a = ring.class_from_polynomial(args.a)
        inputs.update(a=args.a, i=args.i)
        results = {'square': claim(str(ring.sq(args.i, a)))}
    elif args.action == 'wu':
        v1, v2 = ring.wu_classes()
        w1, w2 = ring.stiefel_whitney()
        results = {'v1': claim(str(v1)), 'v2': claim(str(v2)), 'w1': claim(str(w1)), 'w2': claim(str(w2))}
    elif args.action == 'iso':
        if not args.other:
            raise MalformedInput("ring iso needs --other")
        other = _load_ring(args.other)
        inputs['other'] = args.other
        if args.truncate is not None:
            ring, other = ring.truncate(args.truncate), other.truncate(args.truncate)
            inputs['truncate'] = args.truncate
        results = {'isomorphism': claim(ring_isomorphic(ring, other).to_dict())}
    else:
        raise MalformedInput(f"unknown ring action {args.action}")
    return Report('ring', inputs, 'F2 cohomology rings', results)


def cmd_rings(args) -> Report:
    from f2_rings import list_library, ring_from_library

    rings_dir = get_config().rings_dir
    listing = {}
    for name in list_library(rings_dir):
        ring = ring_from_library(name, rings_dir)
        listing[name] = {'dims': ring.dims(), 'fundamental': ring.fundamental_class is not None}
    return Report('rings', {'dir': str(rings_dir)}, 'F2 cohomology rings', {'rings': listing})


def cmd_gamma(args) -> Report:
    from gamma_quadratic import gamma_preset, torsion_orbit_count, twisted_coinvariants

    gm, symmetries = gamma_preset(args.preset)
    if args.no_symmetries:
        symmetries = {}
    coinv = twisted_coinvariants(gm)
    orbits = torsion_orbit_count(gm, symmetries)
    return Report('gamma', {'preset': args.preset, 'symmetries': sorted(symmetries)}, 'quadratic 2-types', {
        'labels': list(gm.labels),
        'coinvariants': claim(str(coinv)),
        'orbits': claim(orbits.to_dict()),
    })


def cmd_bordism(args) -> Report:
    from ahss_bordism import bordism_answer, bordism_input_for, e2_page, e3_page

    e8 = get_config().e8_survives and not args.no_e8
    ring = _load_ring(args.ring) if args.ring else None
    inp = bordism_input_for(args.group, args.w1, args.w2, args.coefficients, e8, ring,
                            parse_characters(args.character))
    inputs = {'group': args.group, 'ring': inp.ring.name, 'w1': str(inp.w1), 'w2': str(inp.w2),
              'characters': {k: list(v) for k, v in sorted(inp.character_basis.items())},
              'coefficients': args.coefficients, 'page': args.page, 'e8_survives': e8}
    if args.page == 'e2':
        results = {'e2': claim(e2_page(inp).to_dict())}
    elif args.page == 'e3':
        results = {'e3': claim(e3_page(inp).to_dict())}
    else:
        answer = bordism_answer(inp)
        results = {
            'answer': claim(str(answer.invariants) if answer.invariants else None),
            'summands': [claim(s.to_dict(), Provenance.ASSUMPTION if s.flags else Provenance.COMPUTED)
                         for s in answer.summands],
            'assumptions': claim(answer.assumptions, Provenance.ASSUMPTION),
            'd3_audit': claim(answer.d3_audit),
            'unknown': claim([list(u) for u in answer.unknown]),
        }
    return Report('bordism', inputs, 'Atiyah-Hirzebruch bordism computation', results)


def cmd_verify_actions(args) -> Report:
    from quat_geom import ACTIONS, CLOSED_FORM_TOL, psi_seam_mismatch, twist_factor_grid_deviation, verify_action

    cfg = get_config()
    names = args.action or [n for n in ACTIONS if n != 'identity']
    results, checks = {}, []
    for name in names:
        report = verify_action(name, args.samples, args.seed, tol=cfg.composite_tolerance)
        results[name] = claim(report.to_dict())
        checks.append({'name': f'{name} free', 'expected': True, 'computed': report.is_free,
                       'ok': report.is_free})
    twist = twist_factor_grid_deviation(100)
    seam = psi_seam_mismatch()
    results['twist_closed_form_deviation'] = claim(twist)
    results['psi_seam_mismatch'] = claim(seam)
    bound = max(args.tolerance, CLOSED_FORM_TOL)
    checks.append({'name': 'twist factor closed form', 'expected': f'<= {bound}',
                   'computed': twist, 'ok': twist <= bound})
    return Report('verify-actions', {'actions': names}, 'free actions on S2xS2', results, checks=checks)


def cmd_cover_check(args) -> Report:
    from quat_geom import covering_check, twist_commutation_deviation

    tol = max(args.tolerance, 1e-10)
    report = covering_check(args.samples, args.seed, tol)
    commute = twist_commutation_deviation(min(args.samples, 1000), args.seed)
    return Report('cover-check', {'samples': args.samples}, 'the covering of C0', {
        'cover': claim(report.to_dict()),
        'twist_commutation_deviation': claim(commute),
    })


def cmd_kkr(args) -> Report:
    from kkr import catalog_entry, distinguish_quotients, double_points

    if args.table:
        table = distinguish_quotients(args.grid, args.seed, args.eps)
        return Report('kkr', {'table': True}, 'the quadratic function on Z/2 quotients',
                      {'distinction': claim(table.to_dict())})
    if not args.quotient or not args.cls:
        raise MalformedInput("kkr needs --quotient and --class (or --table)")
    sphere = catalog_entry(args.quotient, args.cls, args.eps)
    report = double_points(sphere, args.grid, args.seed)
    q = (sphere.euler_number + 2 * report.count) % 4
    return Report('kkr', {'quotient': args.quotient, 'class': args.cls}, 'the quadratic function on Z/2 quotients', {
        'double_points': claim(report.to_dict()),
        'euler_number': claim(sphere.euler_number, Provenance.EXPECTED, sphere.euler_note),
        'q': claim(q),
    })


def cmd_paper_suite(args) -> Report:
    from reference_suite import load_expectations, run_suite

    cfg = get_config()
    entries = load_expectations(Path(args.expectations) if args.expectations else cfg.expectations_file)
    results = run_suite(entries, args.grid, args.seed, args.samples, args.eps, cfg.e8_survives, args.only)
    checks = [r.to_check() for r in results]
    passed = sum(1 for r in results if r.ok)
    return Report('paper-suite', {'expectations': len(entries)}, 'all anchored examples',
                  {'passed': claim(passed), 'total': claim(len(results))}, checks=checks)


COMMANDS: Dict[str, Callable] = {
    'snf': cmd_snf,
    'group-cohomology': cmd_group_cohomology,
    'group-homology': cmd_group_homology,
    'ring': cmd_ring,
    'rings': cmd_rings,
    'gamma': cmd_gamma,
    'bordism': cmd_bordism,
    'verify-actions': cmd_verify_actions,
    'cover-check': cmd_cover_check,
    'kkr': cmd_kkr,
    'paper-suite': cmd_paper_suite,
    'reference-suite': cmd_paper_suite,
}


# ============== Parser ==============

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--format', choices=['text', 'json'], help='Output format')
    common.add_argument('--seed', type=int, help='Random seed')
    common.add_argument('--grid', type=int, help='Grid resolution')
    common.add_argument('--samples', type=int, help='Sample count')
    common.add_argument('--tolerance', type=float, help='Identity tolerance')
    common.add_argument('--eps', type=float, help='Isotopy parameter')
    common.add_argument('--out', help='Write the report to this file')
    common.add_argument('--config', help='Path to toolkit.yaml')
    common.add_argument('--verbose', '-v', action='store_true', help='Debug logging')

    # shared flags live on each subcommand so subparser defaults cannot mask them
    parser = argparse.ArgumentParser(prog='s2s2', description='Computations for quotients of S2xS2')
    subparsers = parser.add_subparsers(dest='command', required=True)

    p = subparsers.add_parser('snf', parents=[common], help='Smith normal form of an integer matrix')
    p.add_argument('--matrix', help="Rows separated by ';' (default: read stdin)")

    for name, help_text in (('group-cohomology', 'H^n(G; M)'), ('group-homology', 'H_n(G; M)')):
        p = subparsers.add_parser(name, parents=[common], help=help_text)
        p.add_argument('--group', default='Z4', help='trivial, Z2, Z4, Z2xZ2, ...')
        p.add_argument('--module', default='Pi-Z4', help='Coefficient module preset')
        p.add_argument('--degrees', default='0-6', help="'0-6' or '0,2,4'")

    p = subparsers.add_parser('ring', parents=[common], help='F2 cohomology ring operations')
    p.add_argument('action', choices=['build', 'cup', 'sq', 'wu', 'iso'])
    p.add_argument('--ring', required=True, help='Library name or .ring file')
    p.add_argument('--other', help='Second ring for iso')
    p.add_argument('--a', help='Class as a polynomial')
    p.add_argument('--b', help='Second class for cup')
    p.add_argument('--i', type=int, default=1, help='Square index for sq')
    p.add_argument('--truncate', type=int, help='Compare truncations to this degree')

    subparsers.add_parser('rings', parents=[common], help='List shipped ring presentations')

    p = subparsers.add_parser('gamma', parents=[common], help='Twisted coinvariants and orbit counts')
    p.add_argument('--preset', default='RP2xRP2')
    p.add_argument('--no-symmetries', action='store_true', help='Count orbits without geometric symmetries')

    p = subparsers.add_parser('bordism', parents=[common], help='AHSS for 4-dimensional TopSpin bordism')
    p.add_argument('--group', default='Z4')
    p.add_argument('--ring', help='Library name or .ring file for H*(group; F2) (default: shipped ring)')
    p.add_argument('--character', action='append',
                   help="Degree-1 generator character, e.g. x=1 or t=1,0 (repeatable)")
    p.add_argument('--w1', help='w1 as a polynomial')
    p.add_argument('--w2', help='w2 as a polynomial')
    p.add_argument('--coefficients', choices=['topspin', 'listed'], default='topspin')
    p.add_argument('--page', choices=['e2', 'e3', 'answer'], default='answer')
    p.add_argument('--no-e8', action='store_true', help='Do not assume the (4,0) term survives')

    p = subparsers.add_parser('verify-actions', parents=[common], help='Order and freeness of group actions')
    p.add_argument('--action', action='append', help='Action name (repeatable)')

    subparsers.add_parser('cover-check', parents=[common], help='Identities of the covering S3 -> C0')

    p = subparsers.add_parser('kkr', parents=[common], help='Double points and the quadratic function q')
    p.add_argument('--quotient', choices=['S2xRP2', 'S2xtRP2', 'RP4#RP4'])
    p.add_argument('--class', dest='cls', choices=['x', 'y', 'x+y'])
    p.add_argument('--table', action='store_true', help='Distinction table for all three quotients')

    p = subparsers.add_parser('paper-suite', aliases=['reference-suite'], parents=[common],
                              help='Recompute every reference value and diff against expectations')
    p.add_argument('--expectations', help='Expectations YAML (default from config)')
    p.add_argument('--only', action='append', help='Run only this check id (repeatable)')
    return parser


def _apply_defaults(args) -> None:
    cfg = get_config()
    for key, value in (('format', cfg.output_format), ('seed', cfg.seed), ('grid', cfg.grid),
                       ('samples', cfg.samples), ('tolerance', cfg.tolerance), ('eps', cfg.isotopy_eps)):
        if getattr(args, key, None) is None:
            setattr(args, key, value)
    if args.grid < 2:
        raise MalformedInput("--grid must be at least 2")
    if args.samples < 1:
        raise MalformedInput("--samples must be positive")


def _validate(report: Report) -> None:
    import jsonschema

    schema_file = get_config().schema_file
    if not schema_file.exists():
        logger.debug("no schema at %s, skipping validation", schema_file)
        return
    schema = json.loads(schema_file.read_text(encoding='utf-8'))
    jsonschema.validate(json.loads(report.to_json()), schema)


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        if args.config:
            reload_config(Path(args.config))
        _apply_defaults(args)
        report = COMMANDS[args.command](args)
    except (MalformedInput, PresentationSyntaxError, FileNotFoundError, ValueError) as e:
        print(f"✗ {e}", file=sys.stderr)
        return EXIT_MALFORMED
    except ToolkitError as e:
        print(f"✗ {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_MISMATCH

    report.metadata = _numeric_defaults(args)
    _validate(report)
    text = write_report(report, args.format, args.out)
    if args.out:
        print(f"✓ Report saved to: {args.out}")
    else:
        print(text)
    return EXIT_OK if report.ok else EXIT_MISMATCH


def main() -> None:
    sys.exit(run())


if __name__ == '__main__':
    main()
