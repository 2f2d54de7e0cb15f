"""
Group (co)homology of finite abelian groups with twisted coefficients.

Elements of ℤ[π] are dicts {group element: coefficient}; group elements are
exponent tuples. Free resolutions are built per cyclic factor (the period-2
resolution alternating t−1 and the norm element) and combined by tensor
product with Koszul signs. A coefficient module is a ℤ-lattice with one
action matrix per generator and a weight w: π → {±1}; group element g acts
by w(g)·A_g. Everything is reduced to exact_linalg through the regular
representation.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

from exact_linalg import (
    AbelianInvariants, IntMatrix, cokernel_invariants, subquotient_invariants,
)
from utils import ResolutionNotExact

logger = logging.getLogger(__name__)

Element = Tuple[int, ...]
GroupRingElement = Dict[Element, int]


# ============== Groups ==============

@dataclass(frozen=True)
class FiniteAbelianGroup:
    """ℤ/n₁ × … × ℤ/n_k; the empty tuple is the trivial group."""
    cyclic_orders: Tuple[int, ...] = ()

    def __post_init__(self):
        if any(int(n) < 2 for n in self.cyclic_orders):
            raise ValueError(f"cyclic orders must be at least 2, got {self.cyclic_orders}")
        object.__setattr__(self, 'cyclic_orders', tuple(int(n) for n in self.cyclic_orders))

    @property
    def order(self) -> int:
        out = 1
        for n in self.cyclic_orders:
            out *= n
        return out

    @property
    def ngens(self) -> int:
        return len(self.cyclic_orders)

    @property
    def identity(self) -> Element:
        return (0,) * self.ngens

    def elements(self) -> List[Element]:
        return list(product(*(range(n) for n in self.cyclic_orders)))

    def index(self, g: Element) -> int:
        idx = 0
        for e, n in zip(g, self.cyclic_orders):
            idx = idx * n + e
        return idx

    def multiply(self, g: Element, h: Element) -> Element:
        return tuple((a + b) % n for a, b, n in zip(g, h, self.cyclic_orders))

    def generator(self, i: int) -> Element:
        return tuple(1 if j == i else 0 for j in range(self.ngens))

    def name(self) -> str:
        if not self.cyclic_orders:
            return '1'
        return 'x'.join(f'Z{n}' for n in self.cyclic_orders)


GROUPS = {
    'trivial': FiniteAbelianGroup(()),
    'Z2': FiniteAbelianGroup((2,)),
    'Z4': FiniteAbelianGroup((4,)),
    'Z2xZ2': FiniteAbelianGroup((2, 2)),
}


def parse_group(name: str) -> FiniteAbelianGroup:
    """'Z4', 'Z2xZ2', 'trivial', or any 'Zn1xZn2…'."""
    if name in GROUPS:
        return GROUPS[name]
    try:
        orders = tuple(int(part.strip().lstrip('Zz')) for part in name.split('x'))
    except ValueError:
        raise ValueError(f"Unrecognized group name: {name}")
    return FiniteAbelianGroup(orders)


# ============== Group ring ==============

def ring_add(a: GroupRingElement, b: GroupRingElement, scale: int = 1) -> GroupRingElement:
    out = dict(a)
    for g, c in b.items():
        out[g] = out.get(g, 0) + scale * c
    return {g: c for g, c in out.items() if c}


def ring_embed(a: GroupRingElement, left: int, right: int, position: str) -> GroupRingElement:
    """Embed an element of ℤ[π₁] (or ℤ[π₂]) into ℤ[π₁×π₂]."""
    if position == 'left':
        return {g + (0,) * right: c for g, c in a.items()}
    return {(0,) * left + g: c for g, c in a.items()}


def regular_representation(group: FiniteAbelianGroup, a: GroupRingElement) -> IntMatrix:
    """Matrix of multiplication by a on ℤ[π] in the element basis."""
    elems = group.elements()
    out = [[0] * len(elems) for _ in elems]
    for h in elems:
        col = group.index(h)
        for g, c in a.items():
            out[group.index(group.multiply(g, h))][col] += c
    return IntMatrix.from_rows(out, len(elems))


# ============== Coefficient modules ==============

@dataclass(frozen=True)
class GroupModule:
    """
    ℤ^rank (or (ℤ/modulus)^rank) with commuting generator actions, twisted by weight.
    """
    group: FiniteAbelianGroup
    rank: int
    actions: Tuple[IntMatrix, ...]
    weight: Tuple[int, ...] = ()
    modulus: int = 0
    label: str = ''

    def __post_init__(self):
        g = self.group
        if not self.weight:
            object.__setattr__(self, 'weight', (1,) * g.ngens)
        if len(self.actions) != g.ngens or len(self.weight) != g.ngens:
            raise ValueError("need one action matrix and one weight per group generator")
        ident = IntMatrix.identity(self.rank)
        for a, n, w in zip(self.actions, g.cyclic_orders, self.weight):
            if (a.rows, a.cols) != (self.rank, self.rank):
                raise ValueError(f"action matrix must be {self.rank}x{self.rank}")
            det = a.determinant()
            if self.modulus == 0 and abs(det) != 1:
                raise ValueError(f"action matrix not invertible over Z (det {det})")
            if not (_power(a, n) - ident).is_zero(self.modulus):
                raise ValueError(f"action matrix does not have order dividing {n}")
            if w not in (1, -1) or (w == -1 and n % 2):
                raise ValueError(f"weight {w} is not a character of Z/{n}")
        for i, a in enumerate(self.actions):
            for b in self.actions[i + 1:]:
                if not ((a @ b) - (b @ a)).is_zero(self.modulus):
                    raise ValueError("action matrices do not commute")

    def element_action(self, g: Element) -> IntMatrix:
        """w(g)·A_g."""
        out = IntMatrix.identity(self.rank)
        sign = 1
        for a, w, e in zip(self.actions, self.weight, g):
            out = out @ _power(a, e)
            sign *= w ** e
        return out.scale(sign)

    def represent(self, a: GroupRingElement) -> IntMatrix:
        """ρ(λ) = Σ c_g w(g) A_g."""
        out = IntMatrix.zeros(self.rank, self.rank)
        for g, c in a.items():
            out = out + self.element_action(g).scale(c)
        return out

    def with_weight(self, weight: Sequence[int]) -> 'GroupModule':
        return GroupModule(self.group, self.rank, self.actions, tuple(weight), self.modulus, self.label)

    def reduced(self, modulus: int) -> 'GroupModule':
        return GroupModule(self.group, self.rank, self.actions, self.weight, modulus, self.label)

    @classmethod
    def trivial(cls, group: FiniteAbelianGroup, rank: int = 1, weight: Sequence[int] = (),
                modulus: int = 0, label: str = '') -> 'GroupModule':
        ident = IntMatrix.identity(rank)
        return cls(group, rank, tuple(ident for _ in group.cyclic_orders), tuple(weight), modulus, label)


def _power(a: IntMatrix, e: int) -> IntMatrix:
    out = IntMatrix.identity(a.rows)
    for _ in range(e):
        out = out @ a
    return out


def module_preset(name: str) -> GroupModule:
    """Named coefficient modules used throughout the computations."""
    z4, k4, z2 = GROUPS['Z4'], GROUPS['Z2xZ2'], GROUPS['Z2']
    presets = {
        # π₂ of the ℤ/4 quotient: t acts by the rotation (0,1;−1,0)
        'Pi-Z4': lambda: GroupModule(z4, 2, (IntMatrix.from_rows([[0, 1], [-1, 0]]),), label='Pi'),
        # π₃ of the ℤ/4 quotient: t swaps the summands
        'pi3-Z4': lambda: GroupModule(z4, 2, (IntMatrix.from_rows([[0, 1], [1, 0]]),), label='pi3'),
        'Zminus-Z4': lambda: GroupModule.trivial(z4, weight=(-1,), label='Z^w'),
        'Pi-RP2xRP2': lambda: GroupModule(k4, 2, (IntMatrix.diagonal([-1, 1]), IntMatrix.diagonal([1, -1])),
                                          label='Pi'),
        'Pi-S2xRP2': lambda: GroupModule(z2, 2, (IntMatrix.diagonal([1, -1]),), label='Pi'),
    }
    if name in presets:
        return presets[name]()
    # generic forms: Z-<group>, Zminus-<group>, F2-<group>
    kind, _, group_name = name.partition('-')
    group = parse_group(group_name) if group_name else GROUPS['trivial']
    if kind == 'Z':
        return GroupModule.trivial(group, label='Z')
    if kind == 'F2':
        return GroupModule.trivial(group, modulus=2, label='F2')
    if kind == 'Zminus':
        return GroupModule.trivial(group, weight=(-1,) * group.ngens, label='Z^w')
    raise ValueError(f"Unknown coefficient module: {name}")


# ============== Resolutions ==============

@dataclass(frozen=True, eq=False)
class ResolutionSegment:
    """
    F_length → … → F_1 → F_0 → ℤ.

    boundaries[k-1] is ∂_k: F_k → F_{k-1}, a ranks[k-1] × ranks[k] matrix over ℤ[π].
    """
    group: FiniteAbelianGroup
    ranks: Tuple[int, ...]
    boundaries: Tuple[Tuple[Tuple[GroupRingElement, ...], ...], ...] = field(repr=False)

    @property
    def length(self) -> int:
        return len(self.ranks) - 1

    def boundary(self, k: int) -> Tuple[Tuple[GroupRingElement, ...], ...]:
        return self.boundaries[k - 1]

    def integer_boundary(self, k: int) -> IntMatrix:
        """∂_k in the regular representation, size |π|·ranks[k-1] × |π|·ranks[k]."""
        n = self.group.order
        rows, cols = self.ranks[k - 1], self.ranks[k]
        if rows == 0 or cols == 0:
            return IntMatrix.zeros(n * rows, n * cols)
        grid = [[regular_representation(self.group, self.boundary(k)[i][j]) for j in range(cols)]
                for i in range(rows)]
        return IntMatrix.block(grid)

    def verify(self) -> None:
        """Assert ∂² = 0, H₀ = ℤ and exactness in degrees 1 … length−1."""
        for k in range(2, self.length + 1):
            if not (self.integer_boundary(k - 1) @ self.integer_boundary(k)).is_zero():
                raise ResolutionNotExact(f"∂_{k-1}∂_{k} ≠ 0 for {self.group.name()}")
        n = self.group.order
        if self.length >= 1:
            h0 = cokernel_invariants(self.integer_boundary(1))
        else:
            h0 = AbelianInvariants(n, ())
        if h0 != AbelianInvariants(1, ()):
            raise ResolutionNotExact(f"coker ∂_1 is {h0}, expected Z")
        for k in range(1, self.length):
            h = subquotient_invariants(self.integer_boundary(k + 1), self.integer_boundary(k))
            if not h.is_zero:
                raise ResolutionNotExact(f"resolution of {self.group.name()} not exact in degree {k}: {h}")


def _trivial_resolution(length: int) -> ResolutionSegment:
    ranks = (1,) + (0,) * length
    bounds = tuple(tuple(tuple() for _ in range(ranks[k - 1])) for k in range(1, length + 1))
    return ResolutionSegment(FiniteAbelianGroup(()), ranks, bounds)


def _cyclic_resolution(n: int, length: int) -> ResolutionSegment:
    t_minus_1 = {(1,): 1, (0,): -1}
    norm = {(e,): 1 for e in range(n)}
    bounds = tuple(((t_minus_1 if k % 2 else norm,),) for k in range(1, length + 1))
    return ResolutionSegment(FiniteAbelianGroup((n,)), (1,) * (length + 1), bounds)


def _tensor_resolutions(r1: ResolutionSegment, r2: ResolutionSegment, length: int) -> ResolutionSegment:
    n1, n2 = r1.group.ngens, r2.group.ngens
    group = FiniteAbelianGroup(r1.group.cyclic_orders + r2.group.cyclic_orders)

    def basis(k):
        return [(i, p, k - i, q) for i in range(k + 1)
                for p in range(r1.ranks[i]) for q in range(r2.ranks[k - i])]

    bases = [basis(k) for k in range(length + 1)]
    bounds = []
    for k in range(1, length + 1):
        target = {b: idx for idx, b in enumerate(bases[k - 1])}
        mat = [[{} for _ in bases[k]] for _ in bases[k - 1]]
        for col, (i, p, j, q) in enumerate(bases[k]):
            if i >= 1:
                for p2 in range(r1.ranks[i - 1]):
                    entry = r1.boundary(i)[p2][p]
                    if entry:
                        row = target[(i - 1, p2, j, q)]
                        mat[row][col] = ring_add(mat[row][col], ring_embed(entry, n1, n2, 'left'))
            if j >= 1:
                sign = -1 if i % 2 else 1
                for q2 in range(r2.ranks[j - 1]):
                    entry = r2.boundary(j)[q2][q]
                    if entry:
                        row = target[(i, p, j - 1, q2)]
                        mat[row][col] = ring_add(mat[row][col], ring_embed(entry, n1, n2, 'right'), sign)
        bounds.append(tuple(tuple(r) for r in mat))
    ranks = tuple(len(b) for b in bases)
    return ResolutionSegment(group, ranks, tuple(bounds))


@lru_cache(maxsize=None)
def resolution(group: FiniteAbelianGroup, length: int) -> ResolutionSegment:
    """
    Free ℤ[π]-resolution of ℤ through degree `length`, verified on construction.
    """
    if length < 1:
        raise ValueError("resolution length must be at least 1")
    res = _trivial_resolution(length)
    for n in group.cyclic_orders:
        factor = _cyclic_resolution(n, length)
        if res.group.ngens == 0:
            res = factor
        else:
            res = _tensor_resolutions(res, factor, length)
    res.verify()
    logger.debug("resolution of %s through degree %d: ranks %s", group.name(), length, res.ranks)
    return res


# ============== (Co)chain complexes ==============

def _block_matrix(res: ResolutionSegment, m: GroupModule, k: int, transpose: bool) -> IntMatrix:
    """Blocks ρ(∂_ij), laid out as ∂ (chains) or transposed (cochains)."""
    rows, cols = res.ranks[k - 1], res.ranks[k]
    r = m.rank
    if transpose:
        rows, cols = cols, rows
    if rows == 0 or cols == 0:
        return IntMatrix.zeros(rows * r, cols * r)
    d = res.boundary(k)
    grid = [[m.represent(d[j][i] if transpose else d[i][j]) for j in range(cols)] for i in range(rows)]
    return IntMatrix.block(grid)


def cochain_differential(res: ResolutionSegment, m: GroupModule, k: int) -> IntMatrix:
    """δ: Hom(F_{k-1}, M) → Hom(F_k, M); k = 0 gives the zero map into C⁰."""
    if k == 0:
        return IntMatrix.zeros(res.ranks[0] * m.rank, 0)
    return _block_matrix(res, m, k, transpose=True)


def chain_differential(res: ResolutionSegment, m: GroupModule, k: int) -> IntMatrix:
    """∂: F_k ⊗ M → F_{k-1} ⊗ M; k = 0 gives the zero map out of C₀."""
    if k == 0:
        return IntMatrix.zeros(0, res.ranks[0] * m.rank)
    return _block_matrix(res, m, k, transpose=False)


def group_cohomology(group: FiniteAbelianGroup, m: GroupModule, n: int) -> AbelianInvariants:
    """Hⁿ(π; M ⊗ ℤ^w) via Hom out of the standard resolution."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    _check_group(group, m)
    res = resolution(group, n + 1)
    result = subquotient_invariants(cochain_differential(res, m, n), cochain_differential(res, m, n + 1),
                                    modulus=m.modulus)
    logger.debug("H^%d(%s; %s) = %s", n, group.name(), m.label or 'M', result)
    return result


def group_homology(group: FiniteAbelianGroup, m: GroupModule, n: int) -> AbelianInvariants:
    """H_n(π; M ⊗ ℤ^w) via the tensor complex."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    _check_group(group, m)
    res = resolution(group, n + 1)
    result = subquotient_invariants(chain_differential(res, m, n + 1), chain_differential(res, m, n),
                                    modulus=m.modulus)
    logger.debug("H_%d(%s; %s) = %s", n, group.name(), m.label or 'M', result)
    return result


def _check_group(group: FiniteAbelianGroup, m: GroupModule) -> None:
    if m.group != group:
        raise ValueError(f"module is over {m.group.name()}, not {group.name()}")


def cohomology_table(group: FiniteAbelianGroup, m: GroupModule, degrees: Sequence[int]) -> Dict[int, AbelianInvariants]:
    return {n: group_cohomology(group, m, n) for n in degrees}


def homology_table(group: FiniteAbelianGroup, m: GroupModule, degrees: Sequence[int]) -> Dict[int, AbelianInvariants]:
    return {n: group_homology(group, m, n) for n in degrees}
