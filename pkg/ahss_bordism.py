"""
Atiyah–Hirzebruch spectral sequence for Ω₄(B, ξ) with B the normal 1-type
of a non-orientable 4-manifold with finite abelian π₁ and w₂ pulled back
from the group.

E²_{p,q} = H_p(π; Ω_q^{TopSpin}), integral coefficients twisted by w₁. The
d₂ differentials out of the 𝔽₂ rows are dual to
    d̂(α) = Sq²α + (Sq¹α)·w₁ + α·w₂
computed in H*(π; 𝔽₂); d₂ out of the integral row is reduction mod 2
followed by the same dual map, and is only evaluated when that composite
is determined by the ring data.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from exact_linalg import AbelianInvariants, F2Matrix, f2_rank
from f2_rings import F2Class, GradedF2Algebra, build_ring, format_monomial, ring_from_library
from group_homalg import FiniteAbelianGroup, GroupModule, group_homology, parse_group
from utils import DegreeOverflow

logger = logging.getLogger(__name__)

Z = AbelianInvariants(1, ())
Z2 = AbelianInvariants(0, (2,))
ZERO = AbelianInvariants.zero()

# Ω_q^{TopSpin} for q = 0..4
TOPSPIN_ROW = (Z, Z2, Z2, ZERO, Z)
# variant with ℤ/2 at q = 4, i.e. the value E²_{0,4} takes for π = ℤ/4
LISTED_ROW = (Z, Z2, Z2, ZERO, Z2)
COEFFICIENT_ROWS = {'topspin': TOPSPIN_ROW, 'listed': LISTED_ROW}

# the only q = 1 source with an independently known d₂
CONFIRMED_ROW_ONE_SOURCE = (3, 1)


class Status:
    COMPUTED = 'computed'
    NOT_COMPUTED = 'not computed'


@dataclass
class BordismInput:
    """Group, its 𝔽₂-cohomology ring, w₁, w₂ and the coefficient row."""
    group: FiniteAbelianGroup
    ring: GradedF2Algebra
    w1: F2Class
    w2: F2Class
    coefficient_row: Tuple[AbelianInvariants, ...] = TOPSPIN_ROW
    character_basis: Dict[str, Tuple[int, ...]] = field(default_factory=dict)
    e8_survives: bool = True

    def __post_init__(self):
        if len(self.coefficient_row) != 5:
            raise ValueError("coefficient row must list Ω_q for q = 0..4")
        if self.w1.degree != 1 or self.w2.degree != 2:
            raise ValueError("w1 must have degree 1 and w2 degree 2")
        if self.w1.ring is not self.ring or self.w2.ring is not self.ring:
            raise ValueError("w1 and w2 must live in the supplied ring")

    def orientation_weight(self) -> Tuple[int, ...]:
        """w₁ as a character π → {±1}, one sign per group generator."""
        signs = [0] * self.group.ngens
        for mono in self.ring.to_polynomial(self.w1):
            name = format_monomial(mono, self.ring.names)
            if name not in self.character_basis:
                raise ValueError(f"no character given for degree-1 class {name}")
            for j, v in enumerate(self.character_basis[name]):
                signs[j] += v
        return tuple(-1 if s % 2 else 1 for s in signs)


@dataclass
class PageEntry:
    p: int
    q: int
    invariants: Optional[AbelianInvariants]
    basis: List[str] = field(default_factory=list)
    flags: List[str] = field(default_factory=list)

    @property
    def dim(self) -> Optional[int]:
        """𝔽₂-dimension; None when the entry is unknown or not an 𝔽₂-space."""
        if self.invariants is None:
            return None
        if self.invariants.free_rank or any(t != 2 for t in self.invariants.torsion):
            return None
        return len(self.invariants.torsion)

    def to_dict(self) -> dict:
        return {
            'p': self.p, 'q': self.q,
            'dim': self.dim,
            'invariants': self.invariants.to_dict() if self.invariants else None,
            'basis': self.basis,
            'assumption_flags': self.flags,
        }


@dataclass
class Differential:
    source: Tuple[int, int]
    target: Tuple[int, int]
    rank: Optional[int]
    status: str
    flags: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {'source': list(self.source), 'target': list(self.target),
                'rank': self.rank, 'status': self.status, 'flags': self.flags}


@dataclass
class SpectralPage:
    page: int
    entries: Dict[Tuple[int, int], PageEntry]
    differentials: List[Differential] = field(default_factory=list)

    def entry(self, p: int, q: int) -> PageEntry:
        if (p, q) in self.entries:
            return self.entries[(p, q)]
        return PageEntry(p, q, ZERO)

    def to_dict(self) -> dict:
        return {
            'page': self.page,
            'entries': [self.entries[k].to_dict() for k in sorted(self.entries)],
            'differentials': [d.to_dict() for d in self.differentials],
        }


# ============== d̂ ==============

def d2_dual(alpha: F2Class, inp: BordismInput) -> F2Class:
    """Sq²α + (Sq¹α)·w₁ + α·w₂."""
    ring = inp.ring
    if alpha.degree + 2 > ring.top_degree:
        raise DegreeOverflow(f"d̂ of a degree-{alpha.degree} class leaves the ring (top {ring.top_degree})")
    return ring.sq(2, alpha) + ring.cup(ring.sq(1, alpha), inp.w1) + ring.cup(alpha, inp.w2)


def d2_dual_matrix(inp: BordismInput, degree: int) -> F2Matrix:
    """d̂: H^degree → H^{degree+2} with columns the images of the basis."""
    ring = inp.ring
    cols = [d2_dual(b, inp).bits for b in ring.basis(degree)]
    return F2Matrix.from_columns(cols, ring.dim(degree + 2))


def homology_d2_matrix(inp: BordismInput, p: int) -> F2Matrix:
    """d₂: H_p(π;𝔽₂) → H_{p−2}(π;𝔽₂), the transpose of d̂ in the dual bases."""
    return d2_dual_matrix(inp, p - 2).transpose()


# ============== E² ==============

def _coefficient_module(inp: BordismInput, coeff: AbelianInvariants) -> Optional[GroupModule]:
    if coeff.is_zero:
        return None
    if coeff.free_rank == 1 and not coeff.torsion:
        return GroupModule.trivial(inp.group, weight=inp.orientation_weight(), label='Z^w')
    if coeff.free_rank == 0 and len(coeff.torsion) == 1:
        n = coeff.torsion[0]
        return GroupModule.trivial(inp.group, weight=inp.orientation_weight(), modulus=n, label=f'Z/{n}')
    raise ValueError(f"unsupported coefficient group {coeff}")


def e2_page(inp: BordismInput, max_total_degree: int = 6) -> SpectralPage:
    """E²_{p,q} = H_p(π; Ω_q) for p + q ≤ max_total_degree."""
    if max_total_degree > inp.ring.top_degree:
        raise ValueError(f"max_total_degree {max_total_degree} exceeds the ring's top degree")
    entries = {}
    for q, coeff in enumerate(inp.coefficient_row):
        module = _coefficient_module(inp, coeff)
        for p in range(0, max_total_degree - q + 1):
            if module is None:
                entries[(p, q)] = PageEntry(p, q, ZERO)
                continue
            inv = group_homology(inp.group, module, p)
            basis = []
            if module.modulus == 2:
                if inv.f2_dimension() != inp.ring.dim(p):
                    raise ValueError(f"H_{p}(π;F2) has dimension {inv.f2_dimension()} but the ring "
                                     f"has {inp.ring.dim(p)}; ring does not match the group")
                basis = [f"dual({c})" for c in inp.ring.basis(p)]
            entries[(p, q)] = PageEntry(p, q, inv, basis)
    logger.debug("E2 page with %d entries", len(entries))
    return SpectralPage(2, entries)


# ============== d₂ ==============

def _row_kind(coeff: AbelianInvariants) -> str:
    if coeff.is_zero:
        return 'zero'
    if coeff == Z:
        return 'integral'
    if coeff == Z2:
        return 'f2'
    return 'other'


def compute_d2(inp: BordismInput, e2: SpectralPage, source: Tuple[int, int]) -> Differential:
    p, q = source
    target = (p - 2, q + 1)
    src, tgt = e2.entry(*source), e2.entry(*target)
    flags = ['unconfirmed'] if q == 1 and source != CONFIRMED_ROW_ONE_SOURCE else []
    if p < 2 or q + 1 > 4 or src.invariants is None or src.invariants.is_zero \
            or tgt.invariants is None or tgt.invariants.is_zero:
        return Differential(source, target, 0, Status.COMPUTED, [])

    kind_s, kind_t = _row_kind(inp.coefficient_row[q]), _row_kind(inp.coefficient_row[q + 1])
    if kind_s == 'f2' and kind_t == 'f2':
        rank = f2_rank(homology_d2_matrix(inp, p))
        return Differential(source, target, rank, Status.COMPUTED, flags)

    if kind_s == 'integral' and kind_t == 'f2':
        dual = homology_d2_matrix(inp, p)
        if dual.is_zero():
            return Differential(source, target, 0, Status.COMPUTED, flags)
        inv = src.invariants
        elementary = inv.free_rank == 0 and all(t == 2 for t in inv.torsion)
        # reduction H_p(ℤ^w) → H_p(𝔽₂) is an isomorphism when the ranks agree
        if elementary and len(inv.torsion) == inp.ring.dim(p):
            return Differential(source, target, f2_rank(dual), Status.COMPUTED, flags)
        return Differential(source, target, None, Status.NOT_COMPUTED, flags)

    return Differential(source, target, None, Status.NOT_COMPUTED, flags)


def e3_page(inp: BordismInput, total_degrees: Sequence[int] = (4, 5)) -> SpectralPage:
    """E³ entries on the given total degrees from the E² page and its d₂."""
    top = max(total_degrees) + 1
    e2 = e2_page(inp, top)
    cache: Dict[Tuple[int, int], Differential] = {}

    def d2(source):
        if source not in cache:
            cache[source] = compute_d2(inp, e2, source)
        return cache[source]

    entries = {}
    used = []
    for n in total_degrees:
        for q in range(0, 5):
            p = n - q
            if p < 0:
                continue
            entry = e2.entry(p, q)
            out_d, in_d = d2((p, q)), d2((p + 2, q - 1)) if q >= 1 else None
            used.extend(d for d in (out_d, in_d) if d is not None)
            entries[(p, q)] = _e3_entry(entry, out_d, in_d)
    unique = {(d.source, d.target): d for d in used if d.rank != 0 or d.status != Status.COMPUTED}
    return SpectralPage(3, entries, [unique[k] for k in sorted(unique)])


def _e3_entry(entry: PageEntry, out_d: Differential, in_d: Optional[Differential]) -> PageEntry:
    inv = entry.invariants
    if inv is None or inv.is_zero:
        return PageEntry(entry.p, entry.q, ZERO)
    ranks = [out_d.rank] + ([in_d.rank] if in_d is not None else [])
    if any(r is None for r in ranks):
        return PageEntry(entry.p, entry.q, None, [], ['not computed'])
    removed = sum(ranks)
    if removed == 0:
        return PageEntry(entry.p, entry.q, inv, list(entry.basis))
    if entry.dim is None:
        return PageEntry(entry.p, entry.q, None, [], ['not computed'])
    return PageEntry(entry.p, entry.q, AbelianInvariants(0, (2,) * (entry.dim - removed)))


# ============== Answer ==============

@dataclass
class Summand:
    p: int
    q: int
    invariants: AbelianInvariants
    flags: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {'p': self.p, 'q': self.q, 'invariants': self.invariants.to_dict(), 'flags': self.flags}


@dataclass
class BordismAnswer:
    invariants: Optional[AbelianInvariants]
    summands: List[Summand]
    assumptions: List[str]
    d3_audit: Dict[str, object]
    unknown: List[Tuple[int, int]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            'invariants': self.invariants.to_dict() if self.invariants else None,
            'summands': [s.to_dict() for s in self.summands],
            'assumptions': self.assumptions,
            'd3_audit': self.d3_audit,
            'unknown': [list(u) for u in self.unknown],
        }


def bordism_answer(inp: BordismInput) -> BordismAnswer:
    """
    Sum of the E³ terms on total degree 4, assuming no further differentials
    and split extensions; the (4,0) term survives only under the E₈ flag.
    """
    e3 = e3_page(inp)
    summands, assumptions, unknown = [], [], []
    for q in range(0, 5):
        p = 4 - q
        entry = e3.entry(p, q)
        if entry.invariants is None:
            unknown.append((p, q))
            continue
        if entry.invariants.is_zero:
            continue
        flags = []
        if (p, q) == (4, 0):
            if not inp.e8_survives:
                assumptions.append('E3_{4,0} assumed killed (e8_survives = false)')
                continue
            flags.append('assumption: E3_{4,0} survives (E8 / Spin^c argument)')
        summands.append(Summand(p, q, entry.invariants, flags))
    if summands:
        assumptions.append('extensions on the total-degree-4 line assumed split')
    if any(s.flags for s in summands):
        assumptions.append('the (4,0) term survives to E-infinity')

    source, target = e3.entry(3, 2), e3.entry(0, 4)
    d3_audit = {
        'source': [3, 2], 'target': [0, 4],
        'source_dim': source.dim, 'target_dim': target.dim,
        'note': 'd3 out of E3_{3,2} is the only higher differential that can reach the total-degree-4 line',
    }
    total = None
    if not unknown:
        total = AbelianInvariants.zero()
        for s in summands:
            total = total.direct_sum(s.invariants)
    return BordismAnswer(total, summands, assumptions, d3_audit, unknown)


# ============== Inputs ==============

# group orders -> (library ring, characters of the degree-1 generators, default w₁, default w₂)
PRESETS: Dict[Tuple[int, ...], Tuple[Optional[str], Dict[str, Tuple[int, ...]], Optional[str], Optional[str]]] = {
    (4,): ('z4', {'x': (1,)}, 'x', 'u'),
    (2, 2): ('z2xz2', {'t': (1, 0), 'u': (0, 1)}, 't + u', 't*u'),
    (): (None, {}, None, None),
}


def bordism_input_for(group_name: str, w1: Optional[str] = None, w2: Optional[str] = None,
                      coefficients: str = 'topspin', e8_survives: bool = True,
                      ring: Optional[GradedF2Algebra] = None,
                      characters: Optional[Dict[str, Tuple[int, ...]]] = None) -> BordismInput:
    """
    Assemble a BordismInput for a group.

    Without `ring` the shipped presentation for the group is used ('Z4' with
    w₁ = x, w₂ = u; 'Z2xZ2'; 'trivial'). A supplied ring replaces it; the
    E² page then checks that its dimensions match H_*(π; 𝔽₂). `characters`
    maps each degree-1 generator to its character on the group generators.
    """
    group = parse_group(group_name)
    if coefficients not in COEFFICIENT_ROWS:
        raise ValueError(f"unknown coefficient row {coefficients}")
    row = COEFFICIENT_ROWS[coefficients]
    preset = PRESETS.get(group.cyclic_orders)

    if ring is None:
        if preset is None:
            raise ValueError(f"no shipped cohomology ring for {group_name}; pass a ring presentation")
        library_name = preset[0]
        ring = ring_from_library(library_name) if library_name else build_ring("name trivial\ntop 6")
    chars = dict(characters) if characters is not None else dict(preset[1] if preset else {})
    for name, values in chars.items():
        if len(values) != group.ngens:
            raise ValueError(f"character of {name} needs {group.ngens} entries, got {len(values)}")
    if preset is not None:
        w1 = w1 if w1 is not None else preset[2]
        w2 = w2 if w2 is not None else preset[3]

    w1_class = ring.class_from_polynomial(w1, 1) if w1 else ring.zero(1)
    w2_class = ring.class_from_polynomial(w2, 2) if w2 else ring.zero(2)
    return BordismInput(group, ring, w1_class, w2_class, row, chars, e8_survives)
