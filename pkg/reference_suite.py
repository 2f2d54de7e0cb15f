"""
Reference-value suite: every anchored example, recomputed and diffed
against the checked-in expectations file.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import yaml

from ahss_bordism import bordism_answer, bordism_input_for, d2_dual, e3_page
from f2_rings import ring_from_library, ring_isomorphic
from gamma_quadratic import gamma_preset, torsion_orbit_count, twisted_coinvariants
from group_homalg import group_cohomology, group_homology, module_preset, parse_group
from kkr import catalog_entry, distinguish_quotients, double_points, q_kkr_table
from quat_geom import (
    covering_check, homological_self_intersection, lift_order_table, twist_factor_grid_deviation, verify_action,
)
from utils import FixedPointFound, ToolkitError

logger = logging.getLogger(__name__)

REQUIRED_KEYS = ('id', 'section', 'kind', 'expected')

CheckFn = Callable[..., Any]
CHECKS: Dict[str, CheckFn] = {}


def check(kind: str) -> Callable[[CheckFn], CheckFn]:
    def register(fn: CheckFn) -> CheckFn:
        CHECKS[kind] = fn
        return fn
    return register


# ============== Check kinds ==============

@check('group_cohomology')
def _group_cohomology(ctx, group: str, module: str, degree: int):
    return str(group_cohomology(parse_group(group), module_preset(module), degree))


@check('group_homology')
def _group_homology(ctx, group: str, module: str, degree: int):
    return str(group_homology(parse_group(group), module_preset(module), degree))


@check('d2_dual')
def _d2_dual(ctx, group: str, cls: str, degree: int):
    inp = bordism_input_for(group)
    return str(d2_dual(inp.ring.class_from_polynomial(cls, degree), inp))


@check('bordism_summands')
def _bordism_summands(ctx, group: str):
    answer = bordism_answer(bordism_input_for(group, e8_survives=ctx['e8_survives']))
    return sorted([s.p, s.q, str(s.invariants)] for s in answer.summands)


@check('bordism_flagged')
def _bordism_flagged(ctx, group: str, p: int, q: int):
    answer = bordism_answer(bordism_input_for(group, e8_survives=ctx['e8_survives']))
    return any(s.p == p and s.q == q and s.flags for s in answer.summands)


@check('e3_nonzero')
def _e3_nonzero(ctx, group: str, total_degree: int):
    page = e3_page(bordism_input_for(group), (total_degree,))
    return sorted([p, q] for (p, q), e in page.entries.items()
                  if e.invariants is None or not e.invariants.is_zero)


@check('wu_class')
def _wu_class(ctx, ring: str, k: int):
    return str(ring_from_library(ring).wu_class(k))


@check('ring_isomorphic')
def _ring_isomorphic(ctx, first: str, second: str, truncate: Optional[int] = None):
    a, b = ring_from_library(first), ring_from_library(second)
    if truncate is not None:
        a, b = a.truncate(truncate), b.truncate(truncate)
    return ring_isomorphic(a, b).isomorphic


@check('gamma_coinvariants')
def _gamma_coinvariants(ctx, preset: str):
    gm, _ = gamma_preset(preset)
    return str(twisted_coinvariants(gm))


@check('gamma_orbits')
def _gamma_orbits(ctx, preset: str, symmetries: bool = True):
    gm, syms = gamma_preset(preset)
    return torsion_orbit_count(gm, syms if symmetries else {}).orbit_count


@check('kkr_table')
def _kkr_table(ctx, quotient: str):
    table = q_kkr_table(quotient, ctx['grid'], ctx['seed'], ctx['eps'])
    return {k: v for k, v in table.items() if v is not None}


@check('kkr_count')
def _kkr_count(ctx, quotient: str, cls: str, eps: Optional[List[float]] = None):
    if eps is None:
        return double_points(catalog_entry(quotient, cls, ctx['eps']), ctx['grid'], ctx['seed']).count
    return [double_points(catalog_entry(quotient, cls, e), ctx['grid'], ctx['seed']).count for e in eps]


@check('kkr_witness_disc')
def _kkr_witness_disc(ctx, quotient: str, cls: str, digits: int = 8):
    report = double_points(catalog_entry(quotient, cls, ctx['eps']), ctx['grid'], ctx['seed'])
    return sorted([round(d['r'], digits), round(d['t'], digits)] for w in report.witnesses for d in w['disc'])


@check('quotients_distinct')
def _quotients_distinct(ctx):
    return distinguish_quotients(ctx['grid'], ctx['seed'], ctx['eps']).distinct


@check('v2_nonzero')
def _v2_nonzero(ctx, ring: str):
    return not ring_from_library(ring).wu_class(2).is_zero


@check('action_free')
def _action_free(ctx, action: str):
    report = verify_action(action, ctx['samples'], ctx['seed'])
    return report.is_free


@check('action_fixed_point')
def _action_fixed_point(ctx, action: str):
    try:
        verify_action(action, ctx['samples'], ctx['seed'])
    except FixedPointFound:
        return True
    return False


@check('twist_closed_form')
def _twist_closed_form(ctx, n: int, tolerance: float):
    return twist_factor_grid_deviation(n) <= tolerance


@check('covering_identities')
def _covering_identities(ctx, tolerance: float):
    report = covering_check(ctx['samples'], ctx['seed'], tolerance)
    return max(report.max_c0_error, report.max_sign_error, report.max_lift_error) <= tolerance


@check('lift_orders')
def _lift_orders(ctx):
    table = lift_order_table()
    first = lambda key: next(row['power'] for row in table if row[key])
    return [first('is_identity'), first('trivial_on_C0')]


@check('self_intersection')
def _self_intersection(ctx, a: int, b: int):
    return homological_self_intersection((a, b))


# ============== Runner ==============

@dataclass
class SuiteResult:
    id: str
    section: str
    kind: str
    expected: Any
    computed: Any
    ok: bool
    note: str = ''
    error: str = ''

    def to_check(self) -> dict:
        out = {'name': self.id, 'paper_section': self.section, 'kind': self.kind,
               'expected': self.expected, 'computed': self.computed, 'ok': self.ok}
        if self.note:
            out['note'] = self.note
        if self.error:
            out['error'] = self.error
        return out


def load_expectations(path: Path) -> List[dict]:
    """Read and validate the expectations file."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Expectations file not found: {path}")
    with open(path, 'r', encoding='utf-8') as f:
        data = yaml.safe_load(f) or {}
    entries = data.get('checks', [])
    seen = set()
    for entry in entries:
        missing = [k for k in REQUIRED_KEYS if k not in entry]
        if missing:
            raise ValueError(f"expectation {entry.get('id', '?')} is missing {', '.join(missing)}")
        if entry['kind'] not in CHECKS:
            raise ValueError(f"expectation {entry['id']} has unknown kind {entry['kind']}")
        if entry['id'] in seen:
            raise ValueError(f"duplicate expectation id {entry['id']}")
        seen.add(entry['id'])
    return entries


def _normalize(value: Any) -> Any:
    if isinstance(value, tuple):
        return [_normalize(v) for v in value]
    if isinstance(value, list):
        return [_normalize(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _normalize(v) for k, v in value.items()}
    return value


def run_suite(entries: List[dict], grid: int, seed: int, samples: int, eps: float,
              e8_survives: bool = True, only: Optional[List[str]] = None) -> List[SuiteResult]:
    ctx = {'grid': grid, 'seed': seed, 'samples': samples, 'eps': eps, 'e8_survives': e8_survives}
    results = []
    for entry in entries:
        if only and entry['id'] not in only:
            continue
        args = dict(entry.get('args') or {})
        expected = _normalize(entry['expected'])
        try:
            computed = _normalize(CHECKS[entry['kind']](ctx, **args))
            results.append(SuiteResult(entry['id'], entry['section'], entry['kind'], expected, computed,
                                       computed == expected, entry.get('note', '')))
        except (ToolkitError, ValueError) as e:
            logger.warning("check %s raised %s", entry['id'], e)
            results.append(SuiteResult(entry['id'], entry['section'], entry['kind'], expected, None,
                                       False, entry.get('note', ''), f"{type(e).__name__}: {e}"))
    return results
