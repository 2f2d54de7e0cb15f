"""
Finite-dimensional graded-commutative 𝔽₂ algebras from presentations.

A ring is 𝔽₂[g₁,…,g_k]/(relations), truncated above a top degree. In each
degree the ideal is spanned by monomial multiples of the relations; after
row reduction (columns in descending lex order) the non-pivot monomials are
the standard basis and every polynomial reduces to it. Steenrod squares are
evaluated in the free ring by the Cartan formula from their values on
generators, then reduced.

Presentation text format, one directive per line (`#` starts a comment):

    name  <label>
    gen   <name> <degree>
    rel   <polynomial>
    sq1   <gen> <polynomial>
    top   <degree>
    fundamental <monomial>

Polynomials are `+`-separated monomials; a monomial is `1`, `0`, or
generator powers `g^k` joined by `*`.
"""

import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

from exact_linalg import F2Matrix, f2_rank, f2_solve
from utils import (
    DegreeOverflow, InconsistentPresentation, PresentationSyntaxError, SingularPairing,
)

logger = logging.getLogger(__name__)

Monomial = Tuple[int, ...]
Polynomial = FrozenSet[Monomial]

_NAME = re.compile(r'^[A-Za-z][A-Za-z0-9_]*$')


# ============== Free polynomials ==============

def poly_add(a: Polynomial, b: Polynomial) -> Polynomial:
    return a ^ b


def poly_mul(a: Polynomial, b: Polynomial, max_degree: Optional[int] = None,
             degrees: Optional[Sequence[int]] = None) -> Polynomial:
    """Product in 𝔽₂[g]; terms above max_degree are dropped when degrees are given."""
    counts = Counter()
    for m in a:
        for n in b:
            prod = tuple(x + y for x, y in zip(m, n))
            if max_degree is not None and monomial_degree(prod, degrees) > max_degree:
                continue
            counts[prod] += 1
    return frozenset(m for m, c in counts.items() if c % 2)


def monomial_degree(m: Monomial, degrees: Sequence[int]) -> int:
    return sum(e * d for e, d in zip(m, degrees))


def parse_polynomial(text: str, names: Sequence[str]) -> Polynomial:
    """Parse `t^2*u + u^2 + 1` over the given generator names."""
    index = {n: i for i, n in enumerate(names)}
    text = text.strip()
    if not text:
        raise PresentationSyntaxError("empty polynomial")
    terms = Counter()
    for raw in text.split('+'):
        term = raw.strip()
        if not term:
            raise PresentationSyntaxError(f"empty term in polynomial '{text}'")
        if term == '0':
            continue
        exps = [0] * len(names)
        if term != '1':
            for factor in term.split('*'):
                factor = factor.strip()
                base, _, power = factor.partition('^')
                base = base.strip()
                if base not in index:
                    raise PresentationSyntaxError(f"unknown generator '{base}' in '{text}'")
                try:
                    k = int(power) if power else 1
                except ValueError:
                    raise PresentationSyntaxError(f"bad exponent in '{factor}'")
                if k < 0:
                    raise PresentationSyntaxError(f"negative exponent in '{factor}'")
                exps[index[base]] += k
        terms[tuple(exps)] += 1
    return frozenset(m for m, c in terms.items() if c % 2)


def format_monomial(m: Monomial, names: Sequence[str]) -> str:
    parts = [n if e == 1 else f"{n}^{e}" for n, e in zip(names, m) if e]
    return '*'.join(parts) if parts else '1'


def format_polynomial(p: Polynomial, names: Sequence[str]) -> str:
    if not p:
        return '0'
    return ' + '.join(format_monomial(m, names) for m in sorted(p, reverse=True))


def _monomials_of_degree(degrees: Sequence[int], d: int) -> List[Monomial]:
    """All exponent vectors of total degree d, in descending lex order."""
    out = []

    def rec(i, remaining, prefix):
        if i == len(degrees):
            if remaining == 0:
                out.append(tuple(prefix))
            return
        for e in range(remaining // degrees[i], -1, -1):
            rec(i + 1, remaining - e * degrees[i], prefix + [e])

    rec(0, d, [])
    return out


# ============== Presentations ==============

@dataclass
class Presentation:
    """Parsed ring presentation, polynomials kept as text until the ring is built."""
    generators: List[Tuple[str, int]]
    relations: List[str]
    top_degree: int
    sq1: Dict[str, str] = field(default_factory=dict)
    fundamental: Optional[str] = None
    name: str = ''


def parse_presentation(text: str, name: str = '') -> Presentation:
    gens, rels, sq1 = [], [], {}
    top, fundamental = None, None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        keyword, _, rest = line.partition(' ')
        rest = rest.strip()
        try:
            if keyword == 'gen':
                gname, deg = rest.split()
                if not _NAME.match(gname):
                    raise PresentationSyntaxError(f"bad generator name '{gname}'")
                if int(deg) < 1:
                    raise PresentationSyntaxError("generator degrees must be positive")
                gens.append((gname, int(deg)))
            elif keyword == 'rel':
                rels.append(rest)
            elif keyword == 'sq1':
                gname, _, poly = rest.partition(' ')
                sq1[gname] = poly.strip()
            elif keyword == 'top':
                top = int(rest)
            elif keyword == 'fundamental':
                fundamental = rest
            elif keyword == 'name':
                name = rest
            else:
                raise PresentationSyntaxError(f"unknown directive '{keyword}'")
        except ValueError as e:
            if isinstance(e, PresentationSyntaxError):
                raise PresentationSyntaxError(f"line {lineno}: {e}")
            raise PresentationSyntaxError(f"line {lineno}: cannot parse '{raw.strip()}'")
    if top is None:
        raise PresentationSyntaxError("presentation has no 'top' line")
    if len({g for g, _ in gens}) != len(gens):
        raise PresentationSyntaxError("duplicate generator names")
    return Presentation(gens, rels, top, sq1, fundamental, name)


# ============== Classes ==============

@dataclass(frozen=True)
class F2Class:
    """A homogeneous class: coordinates (bitset) over the standard basis in its degree."""
    degree: int
    bits: int
    ring: 'GradedF2Algebra' = field(compare=False, repr=False, hash=False)

    def __add__(self, other: 'F2Class') -> 'F2Class':
        if self.degree != other.degree:
            raise ValueError(f"cannot add classes of degrees {self.degree} and {other.degree}")
        return F2Class(self.degree, self.bits ^ other.bits, self.ring)

    def __mul__(self, other: 'F2Class') -> 'F2Class':
        return self.ring.cup(self, other)

    @property
    def is_zero(self) -> bool:
        return self.bits == 0

    def coordinates(self) -> List[int]:
        return [(self.bits >> i) & 1 for i in range(self.ring.dim(self.degree))]

    def __str__(self) -> str:
        return self.ring.format_class(self)


# ============== Rings ==============

class GradedF2Algebra:
    """
    Truncated graded-commutative 𝔽₂ algebra. Immutable after construction.
    """

    def __init__(self, presentation: Presentation):
        self.name = presentation.name
        self.generators = tuple(presentation.generators)
        self.names = tuple(g for g, _ in self.generators)
        self.degrees = tuple(d for _, d in self.generators)
        self.top_degree = presentation.top_degree
        self.presentation = presentation
        self.relations = tuple(self._homogeneous(parse_polynomial(r, self.names), r)
                               for r in presentation.relations)

        self._columns: List[List[Monomial]] = []
        self._reducers: List[List[Tuple[int, int]]] = []
        self._basis: List[List[Monomial]] = []
        for d in range(self.top_degree + 1):
            self._build_degree(d)
        if not self._basis[0]:
            raise InconsistentPresentation(f"relations of {self.name or 'ring'} force 1 = 0")

        self.sq1_table = self._build_sq1(presentation.sq1)
        self.fundamental_class: Optional[F2Class] = None

        self.check_steenrod_consistent()
        if presentation.fundamental:
            self._set_fundamental(presentation.fundamental)
        logger.debug("built ring %s with dims %s", self.name, self.dims())

    def _homogeneous(self, p: Polynomial, text: str) -> Polynomial:
        degs = {monomial_degree(m, self.degrees) for m in p}
        if len(degs) > 1:
            raise PresentationSyntaxError(f"relation '{text}' is not homogeneous")
        return p

    def _build_degree(self, d: int) -> None:
        cols = _monomials_of_degree(self.degrees, d)
        col_index = {m: i for i, m in enumerate(cols)}
        rows = []
        for rel in self.relations:
            if not rel:
                continue
            rdeg = monomial_degree(next(iter(rel)), self.degrees)
            if rdeg > d:
                continue
            for mult in _monomials_of_degree(self.degrees, d - rdeg):
                rows.append(sum(1 << col_index[m] for m in poly_mul(frozenset([mult]), rel)))
        # reduce with the smallest column index (largest monomial) as leading term
        reducers = []
        for col in range(len(cols)):
            bit = 1 << col
            hit = next((i for i, r in enumerate(rows) if r & bit), None)
            if hit is None:
                continue
            pivot_row = rows.pop(hit)
            rows = [r ^ pivot_row if r & bit else r for r in rows]
            reducers = [(c, r ^ pivot_row if r & bit else r) for c, r in reducers]
            reducers.append((col, pivot_row))
        pivots = {c for c, _ in reducers}
        self._columns.append(cols)
        self._reducers.append(reducers)
        self._basis.append([m for i, m in enumerate(cols) if i not in pivots])

    def _build_sq1(self, table: Dict[str, str]) -> Dict[str, Polynomial]:
        out = {}
        for gname, deg in self.generators:
            if deg == 1:
                forced = frozenset([tuple(2 if n == gname else 0 for n in self.names)])
                if gname in table and self._reduce(parse_polynomial(table[gname], self.names), 2) != \
                        self._reduce(forced, 2):
                    raise InconsistentPresentation(f"Sq1 {gname} must equal {gname}^2 in degree 1")
                out[gname] = forced
            else:
                poly = parse_polynomial(table.get(gname, '0'), self.names)
                self._homogeneous(poly, table.get(gname, '0'))
                if poly and monomial_degree(next(iter(poly)), self.degrees) != deg + 1:
                    raise PresentationSyntaxError(f"Sq1 {gname} must have degree {deg + 1}")
                out[gname] = poly
        for gname in table:
            if gname not in self.names:
                raise PresentationSyntaxError(f"sq1 given for unknown generator '{gname}'")
        return out

    def _set_fundamental(self, text: str) -> None:
        poly = parse_polynomial(text, self.names)
        cls = self.class_from_polynomial(poly, self.top_degree)
        if cls.is_zero:
            raise SingularPairing(f"fundamental class {text} vanishes")
        if self.dim(self.top_degree) != 1:
            raise SingularPairing(f"top degree has dimension {self.dim(self.top_degree)}, not 1")
        self.fundamental_class = cls
        for k in range(self.top_degree + 1):
            if f2_rank(self.pairing_matrix(k)) != self.dim(k) or self.dim(k) != self.dim(self.top_degree - k):
                raise SingularPairing(f"Poincaré pairing degenerate in degree {k}")

    # ----- reduction -----

    def _reduce(self, p: Polynomial, d: int) -> int:
        """Normal form of a degree-d polynomial as a bitset over the standard basis."""
        if d > self.top_degree or d < 0:
            return 0
        cols = self._columns[d]
        idx = {m: i for i, m in enumerate(cols)}
        vec = 0
        for m in p:
            vec ^= 1 << idx[m]
        for col, row in self._reducers[d]:
            if vec >> col & 1:
                vec ^= row
        basis_pos = {m: i for i, m in enumerate(self._basis[d])}
        out = 0
        for i, m in enumerate(cols):
            if vec >> i & 1:
                out |= 1 << basis_pos[m]
        return out

    # ----- basic accessors -----

    def dim(self, d: int) -> int:
        return len(self._basis[d]) if 0 <= d <= self.top_degree else 0

    def dims(self) -> List[int]:
        return [self.dim(d) for d in range(self.top_degree + 1)]

    def basis_monomials(self, d: int) -> List[Monomial]:
        return list(self._basis[d]) if 0 <= d <= self.top_degree else []

    def basis(self, d: int) -> List[F2Class]:
        return [F2Class(d, 1 << i, self) for i in range(self.dim(d))]

    def zero(self, d: int) -> F2Class:
        return F2Class(d, 0, self)

    def one(self) -> F2Class:
        return self.class_from_polynomial(frozenset([(0,) * len(self.names)]), 0)

    def generator(self, name: str) -> F2Class:
        i = self.names.index(name)
        mono = tuple(1 if j == i else 0 for j in range(len(self.names)))
        return self.class_from_polynomial(frozenset([mono]), self.degrees[i])

    def all_classes(self, d: int) -> List[F2Class]:
        return [F2Class(d, bits, self) for bits in range(1 << self.dim(d))]

    def class_from_polynomial(self, p: Union[Polynomial, str], degree: Optional[int] = None) -> F2Class:
        if isinstance(p, str):
            p = parse_polynomial(p, self.names)
        degs = {monomial_degree(m, self.degrees) for m in p}
        if len(degs) > 1:
            raise ValueError("class must be homogeneous")
        if degs:
            d = degs.pop()
            if degree is not None and degree != d:
                raise ValueError(f"polynomial has degree {d}, expected {degree}")
        elif degree is None:
            raise ValueError("degree required for the zero polynomial")
        else:
            d = degree
        if d > self.top_degree:
            raise DegreeOverflow(f"degree {d} exceeds top degree {self.top_degree}")
        return F2Class(d, self._reduce(p, d), self)

    def to_polynomial(self, c: F2Class) -> Polynomial:
        return frozenset(m for i, m in enumerate(self._basis[c.degree]) if c.bits >> i & 1)

    def format_class(self, c: F2Class) -> str:
        return format_polynomial(self.to_polynomial(c), self.names)

    # ----- products and squares -----

    def cup(self, a: F2Class, b: F2Class) -> F2Class:
        d = a.degree + b.degree
        if d > self.top_degree:
            raise DegreeOverflow(f"cup product lands in degree {d} > top degree {self.top_degree}")
        return F2Class(d, self._reduce(poly_mul(self.to_polynomial(a), self.to_polynomial(b)), d), self)

    def _product_or_zero(self, a: F2Class, b: F2Class) -> F2Class:
        if a.degree + b.degree > self.top_degree:
            return self.zero(a.degree + b.degree)
        return self.cup(a, b)

    def power(self, a: F2Class, k: int) -> F2Class:
        """a^k, zero once it passes the top degree."""
        out = self.one()
        for _ in range(k):
            out = self._product_or_zero(out, a)
        return out

    def _total_square_generator(self, i: int) -> Dict[int, Polynomial]:
        name, deg = self.generators[i]
        g = tuple(1 if j == i else 0 for j in range(len(self.names)))
        total = {deg: frozenset([g]), 2 * deg: frozenset([tuple(2 * e for e in g)])}
        if deg > 1 and self.sq1_table[name]:
            total[deg + 1] = self.sq1_table[name]
        return total

    def _square_monomial(self, i: int, m: Monomial) -> Polynomial:
        """Sq^i of a free monomial by the Cartan formula, in the free ring."""
        target = monomial_degree(m, self.degrees) + i
        acc: Dict[int, Polynomial] = {0: frozenset([(0,) * len(self.names)])}
        for gi, e in enumerate(m):
            total = self._total_square_generator(gi)
            for _ in range(e):
                nxt: Dict[int, Polynomial] = {}
                for da, pa in acc.items():
                    for db, pb in total.items():
                        if da + db > target:
                            continue
                        nxt[da + db] = poly_add(nxt.get(da + db, frozenset()), poly_mul(pa, pb))
                acc = nxt
        return acc.get(target, frozenset())

    def _square_free(self, i: int, p: Polynomial) -> Polynomial:
        out = frozenset()
        for m in p:
            out = poly_add(out, self._square_monomial(i, m))
        return out

    def sq(self, i: int, a: F2Class) -> F2Class:
        """Sq^i a; zero when it lands above the top degree."""
        if i < 0:
            raise ValueError("square index must be nonnegative")
        d = a.degree + i
        if i == 0:
            return a
        if i > a.degree or d > self.top_degree:
            return self.zero(d)
        return F2Class(d, self._reduce(self._square_free(i, self.to_polynomial(a)), d), self)

    def check_steenrod_consistent(self) -> None:
        """Every square of every relation must vanish in the quotient (within the truncation)."""
        for rel in self.relations:
            if not rel:
                continue
            rdeg = monomial_degree(next(iter(rel)), self.degrees)
            for i in range(1, rdeg):
                if rdeg + i > self.top_degree:
                    break
                if self._reduce(self._square_free(i, rel), rdeg + i):
                    raise InconsistentPresentation(
                        f"Sq{i}({format_polynomial(rel, self.names)}) ≠ 0 in {self.name or 'ring'}")

    def steenrod_consistent(self) -> bool:
        try:
            self.check_steenrod_consistent()
        except InconsistentPresentation:
            return False
        return True

    # ----- duality -----

    def evaluate(self, c: F2Class) -> int:
        """⟨c, [M]⟩."""
        if self.fundamental_class is None:
            raise SingularPairing("ring has no fundamental class")
        if c.degree != self.top_degree:
            return 0
        return 1 if c.bits else 0

    def pairing_matrix(self, k: int) -> F2Matrix:
        """P[i][j] = ⟨b_i · b'_j, [M]⟩ for bases of H^k and H^{top−k}."""
        left, right = self.basis(k), self.basis(self.top_degree - k)
        return F2Matrix.from_rows([[self.evaluate(self.cup(a, b)) for b in right] for a in left], len(right))

    def wu_class(self, k: int) -> F2Class:
        """The class v_k with ⟨v_k·y, [M]⟩ = ⟨Sq^k y, [M]⟩ for all y in degree top−k."""
        if self.fundamental_class is None:
            raise SingularPairing("Wu classes need a fundamental class")
        n = self.top_degree
        if 2 * k > n:
            return self.zero(k)
        ys = self.basis(n - k)
        target = sum(self.evaluate(self.sq(k, y)) << j for j, y in enumerate(ys))
        pairing = self.pairing_matrix(k).transpose()
        x = f2_solve(pairing, target)
        if x is None or f2_rank(pairing) != self.dim(k):
            raise SingularPairing(f"pairing in degree {k} is degenerate")
        return F2Class(k, x, self)

    def wu_classes(self) -> Tuple[F2Class, F2Class]:
        return self.wu_class(1), self.wu_class(2)

    def stiefel_whitney(self) -> Tuple[F2Class, F2Class]:
        """w = Sq(v): w₁ = v₁, w₂ = v₂ + v₁²."""
        v1, v2 = self.wu_classes()
        return v1, v2 + self._product_or_zero(v1, v1)

    # ----- derived rings -----

    def truncate(self, degree: int) -> 'GradedF2Algebra':
        """The same presentation cut off above `degree`, without a fundamental class."""
        pres = Presentation(
            generators=[g for g in self.generators if g[1] <= degree] if degree >= 1 else [],
            relations=[r for r in self.presentation.relations],
            top_degree=degree,
            sq1=dict(self.presentation.sq1),
            fundamental=None,
            name=f"{self.name}<={degree}",
        )
        if len(pres.generators) != len(self.generators):
            raise ValueError("truncation below a generator degree is not supported")
        return GradedF2Algebra(pres)

    def nonvanishing_power_classes(self, degree: int, power: int) -> List[F2Class]:
        """Nonzero classes c of the given degree with c^power ≠ 0."""
        return [c for c in self.all_classes(degree) if not c.is_zero and not self.power(c, power).is_zero]

    def summary(self) -> dict:
        return {
            'name': self.name,
            'generators': [{'name': n, 'degree': d} for n, d in self.generators],
            'relations': [format_polynomial(r, self.names) for r in self.relations],
            'top_degree': self.top_degree,
            'dims': self.dims(),
            'basis': {str(d): [format_monomial(m, self.names) for m in self._basis[d]]
                      for d in range(self.top_degree + 1)},
            'fundamental': str(self.fundamental_class) if self.fundamental_class else None,
        }


# ============== Operations ==============

def build_ring(presentation: Union[Presentation, str], name: str = '') -> GradedF2Algebra:
    if isinstance(presentation, str):
        presentation = parse_presentation(presentation, name)
    return GradedF2Algebra(presentation)


def load_ring(path: Union[str, Path]) -> GradedF2Algebra:
    path = Path(path)
    return build_ring(parse_presentation(path.read_text(encoding='utf-8'), path.stem))


def ring_from_library(name: str, rings_dir: Optional[Path] = None) -> GradedF2Algebra:
    """Load a shipped presentation by stem, e.g. 'rp2xrp2'."""
    if rings_dir is None:
        from config_loader import get_config
        rings_dir = get_config().rings_dir
    path = Path(rings_dir) / f"{name}.ring"
    if not path.exists():
        raise FileNotFoundError(f"No ring presentation named {name} in {rings_dir}")
    return load_ring(path)


def list_library(rings_dir: Path) -> List[str]:
    return sorted(p.stem for p in Path(rings_dir).glob('*.ring'))


def cup(a: F2Class, b: F2Class) -> F2Class:
    return a.ring.cup(a, b)


def sq(i: int, a: F2Class) -> F2Class:
    return a.ring.sq(i, a)


def wu_classes(r: GradedF2Algebra) -> Tuple[F2Class, F2Class]:
    return r.wu_classes()


def truncate(r: GradedF2Algebra, degree: int) -> GradedF2Algebra:
    return r.truncate(degree)


@dataclass
class IsomorphismResult:
    isomorphic: bool
    witness: Optional[Dict[str, str]] = None
    maps_checked: int = 0
    reason: str = ''

    def __bool__(self) -> bool:
        return self.isomorphic

    def to_dict(self) -> dict:
        return {'isomorphic': self.isomorphic, 'witness': self.witness,
                'maps_checked': self.maps_checked, 'reason': self.reason}


def ring_isomorphic(r1: GradedF2Algebra, r2: GradedF2Algebra) -> IsomorphismResult:
    """
    Exhaustive search over degree-preserving generator images r1 → r2.

    A candidate is accepted when every relation of r1 maps to zero and the
    induced map is bijective in each degree.
    """
    if r1.top_degree != r2.top_degree:
        return IsomorphismResult(False, reason='different top degrees')
    if r1.dims() != r2.dims():
        return IsomorphismResult(False, reason=f'dimensions {r1.dims()} vs {r2.dims()}')

    choices = [r2.all_classes(d) for d in r1.degrees]
    checked = 0
    for images in product(*choices):
        checked += 1
        if _is_isomorphism(r1, r2, images):
            witness = {n: str(c) for n, c in zip(r1.names, images)}
            logger.debug("isomorphism %s -> %s: %s", r1.name, r2.name, witness)
            return IsomorphismResult(True, witness, checked)
    return IsomorphismResult(False, None, checked, reason='no generator assignment is a ring isomorphism')


def _image_of_monomial(r2: GradedF2Algebra, images: Sequence[F2Class], m: Monomial) -> F2Class:
    out = r2.one()
    for c, e in zip(images, m):
        out = r2._product_or_zero(out, r2.power(c, e))
    return out


def _image_of_polynomial(r1: GradedF2Algebra, r2: GradedF2Algebra, images, p: Polynomial, d: int) -> F2Class:
    out = r2.zero(d)
    for m in p:
        out = out + _image_of_monomial(r2, images, m)
    return out


def _is_isomorphism(r1: GradedF2Algebra, r2: GradedF2Algebra, images: Sequence[F2Class]) -> bool:
    for rel in r1.relations:
        if not rel:
            continue
        d = monomial_degree(next(iter(rel)), r1.degrees)
        if d <= r2.top_degree and not _image_of_polynomial(r1, r2, images, rel, d).is_zero:
            return False
    for d in range(r1.top_degree + 1):
        cols = [_image_of_monomial(r2, images, m).bits for m in r1.basis_monomials(d)]
        if f2_rank(F2Matrix.from_columns(cols, r2.dim(d))) != r2.dim(d):
            return False
    return True
