"""
Exact linear algebra over ℤ and 𝔽₂.

Integer matrices are immutable tuples of Python ints, so every pivot is
computed in arbitrary precision. The Smith normal form tracks both
transforms and their inverses; kernels, images in kernel coordinates and
subquotients are all read off from those four matrices.

𝔽₂ matrices store each row as an int bitset (bit j is column j).
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

from utils import CompositionNonzero

logger = logging.getLogger(__name__)


# ============== Integer matrices ==============

@dataclass(frozen=True)
class IntMatrix:
    """Immutable integer matrix. Shapes with zero rows or columns are allowed."""
    rows: int
    cols: int
    entries: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise ValueError(f"entries do not match shape {self.rows}x{self.cols}")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]], cols: Optional[int] = None) -> 'IntMatrix':
        data = tuple(tuple(int(x) for x in row) for row in rows)
        if cols is None:
            cols = len(data[0]) if data else 0
        return cls(len(data), cols, data)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> 'IntMatrix':
        return cls(rows, cols, tuple((0,) * cols for _ in range(rows)))

    @classmethod
    def identity(cls, n: int) -> 'IntMatrix':
        return cls(n, n, tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))

    @classmethod
    def diagonal(cls, values: Sequence[int], rows: Optional[int] = None, cols: Optional[int] = None) -> 'IntMatrix':
        rows = len(values) if rows is None else rows
        cols = len(values) if cols is None else cols
        out = [[0] * cols for _ in range(rows)]
        for i, v in enumerate(values):
            out[i][i] = int(v)
        return cls.from_rows(out, cols)

    @classmethod
    def hstack(cls, blocks: Sequence['IntMatrix']) -> 'IntMatrix':
        if not blocks:
            raise ValueError("hstack needs at least one block")
        rows = blocks[0].rows
        if any(b.rows != rows for b in blocks):
            raise ValueError("hstack blocks must share a row count")
        data = [sum((b.entries[i] for b in blocks), ()) for i in range(rows)]
        return cls.from_rows(data, sum(b.cols for b in blocks))

    @classmethod
    def vstack(cls, blocks: Sequence['IntMatrix']) -> 'IntMatrix':
        if not blocks:
            raise ValueError("vstack needs at least one block")
        cols = blocks[0].cols
        if any(b.cols != cols for b in blocks):
            raise ValueError("vstack blocks must share a column count")
        return cls.from_rows([r for b in blocks for r in b.entries], cols)

    @classmethod
    def block(cls, grid: Sequence[Sequence['IntMatrix']]) -> 'IntMatrix':
        return cls.vstack([cls.hstack(list(row)) for row in grid])

    def __getitem__(self, index: Tuple[int, int]) -> int:
        i, j = index
        return self.entries[i][j]

    def __matmul__(self, other: 'IntMatrix') -> 'IntMatrix':
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        other_cols = list(zip(*other.entries)) if other.rows else [()] * other.cols
        data = [[sum(a * b for a, b in zip(row, col)) for col in other_cols] for row in self.entries]
        return IntMatrix.from_rows(data, other.cols)

    def __add__(self, other: 'IntMatrix') -> 'IntMatrix':
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch in addition")
        return IntMatrix.from_rows(
            [[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)], self.cols)

    def __sub__(self, other: 'IntMatrix') -> 'IntMatrix':
        return self + other.scale(-1)

    def scale(self, c: int) -> 'IntMatrix':
        return IntMatrix.from_rows([[c * a for a in r] for r in self.entries], self.cols)

    def transpose(self) -> 'IntMatrix':
        if self.rows == 0:
            return IntMatrix.zeros(self.cols, 0)
        return IntMatrix.from_rows(zip(*self.entries), self.rows)

    @property
    def T(self) -> 'IntMatrix':
        return self.transpose()

    def is_zero(self, modulus: int = 0) -> bool:
        if modulus:
            return all(a % modulus == 0 for r in self.entries for a in r)
        return all(a == 0 for r in self.entries for a in r)

    def is_diagonal(self) -> bool:
        return all(a == 0 for i, r in enumerate(self.entries) for j, a in enumerate(r) if i != j)

    def diagonal_entries(self) -> List[int]:
        return [self.entries[i][i] for i in range(min(self.rows, self.cols))]

    def submatrix(self, row_range: range, col_range: range) -> 'IntMatrix':
        return IntMatrix.from_rows(
            [[self.entries[i][j] for j in col_range] for i in row_range], len(col_range))

    def to_list(self) -> List[List[int]]:
        return [list(r) for r in self.entries]

    def to_dict(self) -> dict:
        return {'rows': self.rows, 'cols': self.cols, 'entries': self.to_list()}

    def determinant(self) -> int:
        """Exact determinant by fraction-free (Bareiss) elimination."""
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        n = self.rows
        if n == 0:
            return 1
        a = self.to_list()
        sign, prev = 1, 1
        for k in range(n - 1):
            if a[k][k] == 0:
                swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
                if swap is None:
                    return 0
                a[k], a[swap] = a[swap], a[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            prev = a[k][k]
        return sign * a[n - 1][n - 1]

    def rank(self) -> int:
        """Rank over ℚ."""
        return sum(1 for d in smith_normal_form(self).d.diagonal_entries() if d != 0)


# ============== Smith normal form ==============

@dataclass(frozen=True)
class SnfResult:
    """u · original · v = d, with u and v unimodular."""
    d: IntMatrix
    u: IntMatrix
    v: IntMatrix
    u_inv: IntMatrix
    v_inv: IntMatrix

    @property
    def diagonal(self) -> List[int]:
        return self.d.diagonal_entries()

    @property
    def rank(self) -> int:
        return sum(1 for x in self.diagonal if x != 0)

    def to_dict(self) -> dict:
        return {'d': self.d.to_dict(), 'u': self.u.to_dict(), 'v': self.v.to_dict()}


class _SnfWork:
    """Mutable workspace; every row/column operation updates the transforms."""

    def __init__(self, m: IntMatrix):
        self.a = m.to_list()
        self.nr, self.nc = m.rows, m.cols
        self.u = IntMatrix.identity(m.rows).to_list()
        self.u_inv = IntMatrix.identity(m.rows).to_list()
        self.v = IntMatrix.identity(m.cols).to_list()
        self.v_inv = IntMatrix.identity(m.cols).to_list()

    # row ops act on a and u from the left; u_inv gets the inverse column op
    def swap_rows(self, i: int, j: int) -> None:
        if i == j:
            return
        for mat in (self.a, self.u):
            mat[i], mat[j] = mat[j], mat[i]
        for row in self.u_inv:
            row[i], row[j] = row[j], row[i]

    def add_row(self, target: int, source: int, q: int) -> None:
        """row_target += q * row_source"""
        if q == 0:
            return
        for mat in (self.a, self.u):
            src = mat[source]
            mat[target] = [x + q * y for x, y in zip(mat[target], src)]
        for row in self.u_inv:
            row[source] -= q * row[target]

    def negate_row(self, i: int) -> None:
        for mat in (self.a, self.u):
            mat[i] = [-x for x in mat[i]]
        for row in self.u_inv:
            row[i] = -row[i]

    # column ops act on a and v from the right; v_inv gets the inverse row op
    def swap_cols(self, i: int, j: int) -> None:
        if i == j:
            return
        for mat in (self.a, self.v):
            for row in mat:
                row[i], row[j] = row[j], row[i]
        self.v_inv[i], self.v_inv[j] = self.v_inv[j], self.v_inv[i]

    def add_col(self, target: int, source: int, q: int) -> None:
        """col_target += q * col_source"""
        if q == 0:
            return
        for mat in (self.a, self.v):
            for row in mat:
                row[target] += q * row[source]
        tgt = self.v_inv[target]
        self.v_inv[source] = [x - q * y for x, y in zip(self.v_inv[source], tgt)]

    def pivot(self, t: int) -> Optional[Tuple[int, int]]:
        """Smallest nonzero |entry| in the trailing block; ties by lowest row, then column."""
        best = None
        for i in range(t, self.nr):
            for j in range(t, self.nc):
                x = self.a[i][j]
                if x != 0 and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
        return None if best is None else (best[1], best[2])


def smith_normal_form(m: IntMatrix) -> SnfResult:
    """
    Smith normal form with transforms.

    Returns d, u, v with u·m·v = d, d diagonal, nonnegative, each diagonal
    entry dividing the next. Deterministic for a given input.
    """
    w = _SnfWork(m)
    steps = 0
    for t in range(min(w.nr, w.nc)):
        while True:
            p = w.pivot(t)
            if p is None:
                break
            w.swap_rows(t, p[0])
            w.swap_cols(t, p[1])
            piv = w.a[t][t]
            for i in range(t + 1, w.nr):
                w.add_row(i, t, -(w.a[i][t] // piv))
            for j in range(t + 1, w.nc):
                w.add_col(j, t, -(w.a[t][j] // piv))
            steps += 1
            if any(w.a[i][t] for i in range(t + 1, w.nr)) or any(w.a[t][j] for j in range(t + 1, w.nc)):
                continue
            bad = next((i for i in range(t + 1, w.nr)
                        for j in range(t + 1, w.nc) if w.a[i][j] % piv), None)
            if bad is None:
                break
            w.add_row(t, bad, 1)
        if w.pivot(t) is None and w.a[t][t] == 0:
            break
        if w.a[t][t] < 0:
            w.negate_row(t)

    logger.debug("SNF of %dx%d matrix in %d pivot steps", m.rows, m.cols, steps)
    return SnfResult(
        d=IntMatrix.from_rows(w.a, w.nc),
        u=IntMatrix.from_rows(w.u, w.nr),
        v=IntMatrix.from_rows(w.v, w.nc),
        u_inv=IntMatrix.from_rows(w.u_inv, w.nr),
        v_inv=IntMatrix.from_rows(w.v_inv, w.nc),
    )


# ============== Abelian groups ==============

@dataclass(frozen=True)
class AbelianInvariants:
    """ℤ^free_rank ⊕ ⨁ ℤ/torsion[i], torsion in divisibility order."""
    free_rank: int
    torsion: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.free_rank < 0:
            raise ValueError("free_rank must be nonnegative")
        if any(t < 2 for t in self.torsion):
            raise ValueError("torsion coefficients must be at least 2")
        if any(b % a for a, b in zip(self.torsion, self.torsion[1:])):
            raise ValueError(f"torsion {self.torsion} is not a divisibility chain")

    @classmethod
    def from_orders(cls, free_rank: int, orders: Iterable[int]) -> 'AbelianInvariants':
        """Canonicalize ℤ^r ⊕ ⨁ ℤ/nᵢ for arbitrary nᵢ (1 and 0 allowed)."""
        orders = [abs(int(n)) for n in orders]
        free_rank += sum(1 for n in orders if n == 0)
        finite = [n for n in orders if n > 1]
        if not finite:
            return cls(free_rank, ())
        diag = smith_normal_form(IntMatrix.diagonal(finite)).diagonal
        return cls(free_rank, tuple(d for d in diag if d > 1))

    @classmethod
    def zero(cls) -> 'AbelianInvariants':
        return cls(0, ())

    def direct_sum(self, other: 'AbelianInvariants') -> 'AbelianInvariants':
        return AbelianInvariants.from_orders(self.free_rank + other.free_rank,
                                             list(self.torsion) + list(other.torsion))

    @property
    def is_zero(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    @property
    def order(self) -> Optional[int]:
        """Group order, or None when infinite."""
        if self.free_rank:
            return None
        out = 1
        for t in self.torsion:
            out *= t
        return out

    def f2_dimension(self) -> int:
        """dim over 𝔽₂ of G ⊗ 𝔽₂."""
        return self.free_rank + sum(1 for t in self.torsion if t % 2 == 0)

    def to_dict(self) -> dict:
        return {'free_rank': self.free_rank, 'torsion': list(self.torsion)}

    def __str__(self) -> str:
        parts = []
        if self.free_rank:
            parts.append('Z' if self.free_rank == 1 else f'Z^{self.free_rank}')
        parts.extend(f'Z/{t}' for t in self.torsion)
        return ' + '.join(parts) if parts else '0'


def cokernel_invariants(m: IntMatrix) -> AbelianInvariants:
    """Invariants of ℤ^rows / image(m)."""
    snf = smith_normal_form(m)
    diag = snf.diagonal
    return AbelianInvariants(m.rows - snf.rank, tuple(d for d in diag if d > 1))


def kernel_basis(m: IntMatrix) -> IntMatrix:
    """Columns form a ℤ-basis of ker(m) ⊂ ℤ^cols (a saturated sublattice)."""
    snf = smith_normal_form(m)
    return snf.v.submatrix(range(m.cols), range(snf.rank, m.cols))


def lattice_basis(gens: IntMatrix) -> IntMatrix:
    """Columns form a ℤ-basis of the lattice spanned by the columns of gens."""
    snf = smith_normal_form(gens)
    r = snf.rank
    diag = snf.diagonal
    # gens = u_inv · d · v_inv, so image = u_inv[:, :r] · diag(d[:r])
    return IntMatrix.from_rows(
        [[snf.u_inv[i, j] * diag[j] for j in range(r)] for i in range(gens.rows)], r)


def coordinates_in_basis(basis: IntMatrix, vectors: IntMatrix) -> IntMatrix:
    """Integer X with basis · X = vectors. Raises ValueError if some vector is outside the lattice."""
    snf = smith_normal_form(basis)
    r = snf.rank
    if r != basis.cols:
        raise ValueError("basis columns are linearly dependent")
    uy = snf.u @ vectors
    diag = snf.diagonal
    z = []
    for i in range(basis.rows):
        row = uy.entries[i]
        if i < r:
            if any(x % diag[i] for x in row):
                raise ValueError("vector not in lattice")
            z.append([x // diag[i] for x in row])
        elif any(row):
            raise ValueError("vector not in lattice")
    return snf.v @ IntMatrix.from_rows(z, vectors.cols)


def lattice_quotient(ambient: IntMatrix, sub: IntMatrix) -> AbelianInvariants:
    """Invariants of span(ambient) / span(sub); sub must lie in span(ambient)."""
    basis = lattice_basis(ambient)
    if basis.cols == 0:
        return AbelianInvariants.zero()
    if sub.cols == 0:
        return AbelianInvariants(basis.cols, ())
    return cokernel_invariants(coordinates_in_basis(basis, sub))


def subquotient_invariants(boundary_in: IntMatrix, boundary_out: IntMatrix,
                           modulus: int = 0) -> AbelianInvariants:
    """
    Homology ker(boundary_out) / im(boundary_in) at the middle position.

    With modulus m > 0 the complex is read with ℤ/m coefficients: the cycles
    are the vectors whose image vanishes mod m, and boundaries include mℤ^b.
    """
    if boundary_out.cols != boundary_in.rows:
        raise ValueError(f"incompatible boundaries: {boundary_out.rows}x{boundary_out.cols} "
                         f"after {boundary_in.rows}x{boundary_in.cols}")
    if not (boundary_out @ boundary_in).is_zero(modulus):
        raise CompositionNonzero("boundary_out · boundary_in ≠ 0"
                                 + (f" mod {modulus}" if modulus else ""))
    b = boundary_in.rows
    if b == 0:
        return AbelianInvariants.zero()
    if modulus:
        c = boundary_out.rows
        padded = IntMatrix.hstack([boundary_out, IntMatrix.identity(c).scale(modulus)]) if c else boundary_out
        k = kernel_basis(padded)
        cycles = k.submatrix(range(b), range(k.cols))
        sub = IntMatrix.hstack([boundary_in, IntMatrix.identity(b).scale(modulus)])
        return lattice_quotient(cycles, sub)
    cycles = kernel_basis(boundary_out)
    if cycles.cols == 0:
        return AbelianInvariants.zero()
    return lattice_quotient(cycles, boundary_in)


# ============== 𝔽₂ matrices ==============

@dataclass(frozen=True)
class F2Matrix:
    """Matrix over 𝔽₂; each row is an int bitset, bit j = column j."""
    rows: int
    cols: int
    bits: Tuple[int, ...]

    def __post_init__(self):
        if len(self.bits) != self.rows:
            raise ValueError("row count mismatch")
        mask = (1 << self.cols) - 1
        if any(b & ~mask for b in self.bits):
            raise ValueError("bits outside the column range")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]], cols: Optional[int] = None) -> 'F2Matrix':
        data = [list(r) for r in rows]
        if cols is None:
            cols = len(data[0]) if data else 0
        bits = tuple(sum(1 << j for j, x in enumerate(r) if int(x) % 2) for r in data)
        return cls(len(data), cols, bits)

    @classmethod
    def from_int_matrix(cls, m: IntMatrix) -> 'F2Matrix':
        return cls.from_rows(m.entries, m.cols)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> 'F2Matrix':
        return cls(rows, cols, (0,) * rows)

    @classmethod
    def identity(cls, n: int) -> 'F2Matrix':
        return cls(n, n, tuple(1 << i for i in range(n)))

    @classmethod
    def from_columns(cls, columns: Sequence[int], rows: int) -> 'F2Matrix':
        """Build from column bitsets (bit i = row i)."""
        bits = tuple(sum(1 << j for j, c in enumerate(columns) if (c >> i) & 1) for i in range(rows))
        return cls(rows, len(columns), bits)

    def entry(self, i: int, j: int) -> int:
        return (self.bits[i] >> j) & 1

    def to_list(self) -> List[List[int]]:
        return [[self.entry(i, j) for j in range(self.cols)] for i in range(self.rows)]

    def column(self, j: int) -> int:
        return sum(((b >> j) & 1) << i for i, b in enumerate(self.bits))

    def transpose(self) -> 'F2Matrix':
        return F2Matrix(self.cols, self.rows, tuple(self.column(j) for j in range(self.cols)))

    @property
    def T(self) -> 'F2Matrix':
        return self.transpose()

    def apply(self, vector: int) -> int:
        """Matrix times a column bitset."""
        return sum((bin(b & vector).count('1') & 1) << i for i, b in enumerate(self.bits))

    def __matmul__(self, other: 'F2Matrix') -> 'F2Matrix':
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        cols = [self.apply(other.column(j)) for j in range(other.cols)]
        return F2Matrix.from_columns(cols, self.rows)

    def is_zero(self) -> bool:
        return not any(self.bits)


def _rref(m: F2Matrix) -> Tuple[List[int], List[int]]:
    rows = list(m.bits)
    pivots = []
    r = 0
    for col in range(m.cols):
        bit = 1 << col
        hit = next((i for i in range(r, len(rows)) if rows[i] & bit), None)
        if hit is None:
            continue
        rows[r], rows[hit] = rows[hit], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i] & bit:
                rows[i] ^= rows[r]
        pivots.append(col)
        r += 1
    return rows[:r], pivots


def f2_rank(m: F2Matrix) -> int:
    return len(_rref(m)[1])


def f2_kernel_basis(m: F2Matrix) -> F2Matrix:
    """Rows form the canonical kernel basis: one vector per free column, in column order."""
    reduced, pivots = _rref(m)
    free = [c for c in range(m.cols) if c not in pivots]
    basis = []
    for f in free:
        vec = 1 << f
        for row, p in zip(reduced, pivots):
            if (row >> f) & 1:
                vec |= 1 << p
        basis.append(vec)
    return F2Matrix(len(basis), m.cols, tuple(basis))


def f2_quotient_dim(m: F2Matrix) -> int:
    """dim of 𝔽₂^rows / image(m)."""
    return m.rows - f2_rank(m)


def f2_subquotient_dim(incoming: F2Matrix, outgoing: F2Matrix) -> int:
    """dim ker(outgoing) − rank(incoming)."""
    if not (outgoing @ incoming).is_zero():
        raise CompositionNonzero("outgoing · incoming ≠ 0 over F2")
    return outgoing.cols - f2_rank(outgoing) - f2_rank(incoming)


def f2_solve(m: F2Matrix, target: int) -> Optional[int]:
    """Some x with m·x = target (column bitsets), or None if inconsistent."""
    augmented = F2Matrix(m.rows, m.cols + 1,
                         tuple(b | (((target >> i) & 1) << m.cols) for i, b in enumerate(m.bits)))
    reduced, pivots = _rref(augmented)
    if m.cols in pivots:
        return None
    x = 0
    for row, p in zip(reduced, pivots):
        if (row >> m.cols) & 1:
            x |= 1 << p
    return x
