"""
The quadratic function q(x) = e(ν(S_x)) + 2|Self(S_x)| mod 4 on π₂⊗ℤ/2 of
the three ℤ/2-quotients of S²×S².

Every catalog sphere lifts to a graph {(a, h(a))} or {(h(a), a)} in S²×S².
A double point downstairs is an unordered pair {a, b} with g(a) = D(g(b)),
D the deck involution. The graph coordinate of D(g(b)) fixes a, which
leaves one vector equation in b; it is seeded on a disc grid over both
hemispheres and refined by Gauss–Newton.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from quat_geom import antipodal, disc_coordinates, normalize, psi, r_pi
from utils import NonTransverseDoublePoint, SolverDiverged, UnsupportedImmersion, round_float

logger = logging.getLogger(__name__)

CONVERGED = 1e-12
WITNESS_TOL = 1e-8
SEPARATION = 1e-3
STALLED = 1e-6
RANK_TOL = 1e-6
MAX_SEEDS = 512
MAX_ITER = 60

Pair = Tuple[np.ndarray, np.ndarray]


# ============== Deck transformations ==============

def _deck_s2xrp2(s, t):
    return np.array(s, dtype=float), antipodal(t)


def _deck_s2xtrp2(s, t):
    return antipodal(s), r_pi(t)


QUOTIENTS: Dict[str, Tuple[str, Callable]] = {
    'S2xRP2': ('S²×RP²', _deck_s2xrp2),
    'S2xtRP2': ('S²×̃RP²', _deck_s2xtrp2),
    'RP4#RP4': ('RP⁴#_{S¹}RP⁴', psi),
}

CLASSES = ('x', 'y', 'x+y')


# ============== Catalog ==============

def _constant(p):
    p = np.asarray(p, dtype=float)
    return lambda a, eps: np.tile(p, (len(a), 1))


def _fold(a, eps):
    # folds the lower hemisphere onto the upper one
    a = np.asarray(a, dtype=float)
    return np.column_stack([a[:, 0], a[:, 1], np.abs(a[:, 2])])


def _identity(a, eps):
    return np.array(a, dtype=float)


def _equator_push(a, eps):
    """h_ε: rotation about the k-axis by angle ε·x."""
    a = np.asarray(a, dtype=float)
    theta = eps * a[:, 0]
    c, s = np.cos(theta), np.sin(theta)
    return np.column_stack([c * a[:, 0] - s * a[:, 1], s * a[:, 0] + c * a[:, 1], a[:, 2]])


@dataclass(frozen=True)
class ImmersedSphere:
    quotient: str
    class_name: str
    parametrization: str
    euler_number: int
    graph_over: str
    profile: Callable = field(compare=False, repr=False)
    eps: float = 0.0
    euler_note: str = ''

    def __post_init__(self):
        if self.quotient not in QUOTIENTS:
            raise UnsupportedImmersion(f"Unknown quotient: {self.quotient}")
        if self.euler_number % 2:
            raise ValueError(f"normal Euler number {self.euler_number} is odd; the form on S²×S² is even")
        if self.graph_over not in ('first', 'second'):
            raise ValueError(f"graph_over must be 'first' or 'second', not {self.graph_over!r}")

    @property
    def deck(self) -> Callable:
        return QUOTIENTS[self.quotient][1]

    def lift(self, a: np.ndarray) -> Pair:
        a = np.atleast_2d(np.asarray(a, dtype=float))
        h = self.profile(a, self.eps)
        return (a, h) if self.graph_over == 'first' else (h, a)

    def partner(self, b: np.ndarray) -> np.ndarray:
        """The a with D(g(b)) in the same graph fibre as g(a)."""
        s, t = self.deck(*self.lift(b))
        return s if self.graph_over == 'first' else t

    def coincidence(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """g(a) − D(g(b)) in ℝ⁶."""
        ga = self.lift(a)
        db = self.deck(*self.lift(b))
        return np.concatenate([ga[0] - db[0], ga[1] - db[1]], axis=-1)

    def reduced_residual(self, b: np.ndarray) -> np.ndarray:
        return self.coincidence(self.partner(b), b)

    def to_dict(self) -> dict:
        return {
            'quotient': self.quotient,
            'class': self.class_name,
            'parametrization': self.parametrization,
            'euler_number': self.euler_number,
            'euler_note': self.euler_note,
            'eps': self.eps,
        }


I_POINT = (1.0, 0.0, 0.0)
J_POINT = (0.0, 1.0, 0.0)

_FIBRE_NOTE = 'embedded with trivial normal bundle'
_DIAGONAL_NOTE = 'normal Euler number of the diagonal is ±2'


def catalog_entry(quotient: str, class_name: str, eps: float = 0.1) -> ImmersedSphere:
    """The catalog representative of a class in π₂⊗ℤ/2 of a quotient."""
    table = {
        ('S2xRP2', 'x'): ('S²×{i}', 0, 'first', _constant(I_POINT), _FIBRE_NOTE),
        ('S2xRP2', 'y'): ('folded sphere {(f(s), s)}', 0, 'second', _fold, 'f is null homotopic'),
        ('S2xRP2', 'x+y'): ('diagonal (graph of the covering S² → RP²)', 2, 'first', _identity, _DIAGONAL_NOTE),
        ('S2xtRP2', 'x'): ('S²×{i}', 0, 'first', _constant(I_POINT), _FIBRE_NOTE),
        ('S2xtRP2', 'y'): ('{i}×S²', 0, 'second', _constant(I_POINT), _FIBRE_NOTE),
        ('S2xtRP2', 'x+y'): ('isotoped diagonal {(h_ε(s), s)}', 2, 'second', _equator_push,
                             _DIAGONAL_NOTE + '; isotopy preserves it'),
        ('RP4#RP4', 'x'): ('S²×{i}', 0, 'first', _constant(I_POINT), _FIBRE_NOTE),
        ('RP4#RP4', 'y'): ('{j}×S²', 0, 'second', _constant(J_POINT), 'trivial normal bundle'),
    }
    if quotient not in QUOTIENTS:
        raise UnsupportedImmersion(f"Unknown quotient: {quotient} (choose from {', '.join(QUOTIENTS)})")
    key = (quotient, class_name)
    if key not in table:
        raise UnsupportedImmersion(f"No catalog immersion for class {class_name} in {quotient}")
    label, euler, over, profile, note = table[key]
    return ImmersedSphere(quotient, class_name, label, euler, over, profile,
                          eps if profile is _equator_push else 0.0, note)


# ============== Solver ==============

def _tangent_basis(b: np.ndarray) -> Pair:
    helper = np.where(np.abs(b[:, [0]]) < 0.9, np.array([[1.0, 0.0, 0.0]]), np.array([[0.0, 1.0, 0.0]]))
    e1 = normalize(np.cross(b, helper))
    return e1, np.cross(b, e1)


def _jacobian(fn: Callable, b: np.ndarray, h: float = 1e-7) -> np.ndarray:
    """(N, 6, 2) derivative of fn along a tangent frame at each b."""
    e1, e2 = _tangent_basis(b)
    cols = [(fn(normalize(b + h * e)) - fn(normalize(b - h * e))) / (2 * h) for e in (e1, e2)]
    return np.stack(cols, axis=-1)


def _seed_grid(grid: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Disc grid over D₊ and D₋; the angular offset is drawn from `seed`."""
    offset = np.random.default_rng(seed).uniform(0.0, 1.0 / grid)
    r, t = np.meshgrid(np.linspace(0.0, 1.0, grid), offset + np.arange(grid) / grid, indexing='ij')
    x, y = r * np.cos(2 * np.pi * t), r * np.sin(2 * np.pi * t)
    z = np.sqrt(np.maximum(0.0, 1.0 - r * r))
    points = np.stack([np.stack([x, y, z], axis=-1), np.stack([x, y, -z], axis=-1)])
    return points.reshape(-1, 3), points.shape[:3]


def _local_minima(values: np.ndarray) -> np.ndarray:
    """Non-strict local minima on (hemisphere, r, t) grids, periodic in t."""
    padded = np.pad(values, ((0, 0), (1, 1), (0, 0)), constant_values=np.inf)
    is_min = np.ones(values.shape, dtype=bool)
    for dr in (-1, 0, 1):
        shifted_r = padded[:, 1 + dr:padded.shape[1] - 1 + dr, :]
        for dt in (-1, 0, 1):
            if dr == 0 and dt == 0:
                continue
            is_min &= values <= np.roll(shifted_r, dt, axis=2)
    return is_min


def _refine(sphere: ImmersedSphere, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Batched Gauss–Newton on the reduced residual."""
    for _ in range(MAX_ITER):
        res = sphere.reduced_residual(b)
        norms = np.linalg.norm(res, axis=1)
        if np.all(norms < CONVERGED):
            break
        jac = _jacobian(sphere.reduced_residual, b)
        step = -np.einsum('nij,nj->ni', np.linalg.pinv(jac), res)
        length = np.linalg.norm(step, axis=1, keepdims=True)
        step = np.where(length > 0.5, step * 0.5 / np.maximum(length, 1e-300), step)
        e1, e2 = _tangent_basis(b)
        moved = normalize(b + step[:, [0]] * e1 + step[:, [1]] * e2)
        b = np.where((norms < CONVERGED)[:, None], b, moved)
    return b, np.linalg.norm(sphere.reduced_residual(b), axis=1)


def _disc(v: np.ndarray) -> dict:
    r, t = disc_coordinates(v[None, :])
    return {'hemisphere': '+' if v[2] >= 0 else '-', 'r': round_float(float(r[0]), 10),
            't': round_float(float(t[0]), 10)}


def transversality(sphere: ImmersedSphere, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Singular values of [dg_a | −d(D∘g)_b]; the sheets are transverse iff the rank is 4."""
    lift = lambda p: np.concatenate(sphere.lift(p), axis=-1)
    image = lambda p: np.concatenate(sphere.deck(*sphere.lift(p)), axis=-1)
    jac = np.concatenate([_jacobian(lift, a[None, :], 1e-6)[0], -_jacobian(image, b[None, :], 1e-6)[0]], axis=1)
    return np.linalg.svd(jac, compute_uv=False)


@dataclass
class DoublePointReport:
    sphere: ImmersedSphere
    count: int
    witnesses: List[dict]
    grid: int
    seed: int
    seeds_refined: int

    def to_dict(self) -> dict:
        return {
            'immersion': self.sphere.to_dict(),
            'count': self.count,
            'witnesses': self.witnesses,
            'grid': self.grid,
            'seed': self.seed,
            'seeds_refined': self.seeds_refined,
        }


def converged_mask(refined: np.ndarray, residuals: np.ndarray) -> np.ndarray:
    """
    Seeds whose refined residual is at witness accuracy. Residuals between
    WITNESS_TOL and STALLED mean Gauss–Newton stopped short of a real root.
    """
    stalled = (residuals > WITNESS_TOL) & (residuals < STALLED)
    if np.any(stalled):
        k = int(np.argmax(stalled))
        raise SolverDiverged(f"refinement stalled at residual {residuals[k]:.3e}",
                             witness=refined[k].tolist(), residual=float(residuals[k]))
    return residuals <= WITNESS_TOL


def double_points(sphere: ImmersedSphere, grid: int = 200, seed: int = 0) -> DoublePointReport:
    """
    Double points of a catalog sphere in its quotient.

    The lift is an embedded graph, so every double point comes from the deck
    involution. Solutions b are found with their partners a; each unordered
    pair {a, b} is one double point.
    """
    if grid < 2:
        raise ValueError("grid must be at least 2")
    points, shape = _seed_grid(grid, seed)
    values = np.linalg.norm(sphere.reduced_residual(points), axis=1)
    tau = min(1.0, 40.0 / grid)
    candidates = (_local_minima(values.reshape(shape)).ravel()) & (values < tau)
    idx = np.flatnonzero(candidates)
    idx = idx[np.argsort(values[idx], kind='stable')][:MAX_SEEDS]
    logger.debug("%s/%s: %d seeds below %.3g", sphere.quotient, sphere.class_name, len(idx), tau)

    solutions: List[np.ndarray] = []
    if len(idx):
        refined, residuals = _refine(sphere, points[idx])
        if not np.all(np.isfinite(residuals)):
            bad = int(np.argmax(~np.isfinite(residuals)))
            raise SolverDiverged("Gauss–Newton produced a non-finite residual",
                                 witness=points[idx][bad].tolist())
        accepted = converged_mask(refined, residuals)
        for k in np.argsort(residuals, kind='stable'):
            if not accepted[k]:
                break
            b = refined[k]
            if all(np.linalg.norm(b - other) >= SEPARATION for other in solutions):
                solutions.append(b)

    pairs: List[Pair] = []
    for b in solutions:
        a = sphere.partner(b)[0]
        if np.linalg.norm(a - b) < SEPARATION:
            continue
        if any(min(np.linalg.norm(a - p) + np.linalg.norm(b - q), np.linalg.norm(a - q) + np.linalg.norm(b - p))
               < SEPARATION for p, q in pairs):
            continue
        pairs.append((b, a))

    witnesses = []
    for b, a in pairs:
        # lead with the D₊ preimage
        if b[2] < 0 <= a[2]:
            a, b = b, a
            a = sphere.partner(b)[0]
        residual = float(np.linalg.norm(sphere.coincidence(a[None, :], b[None, :])))
        if residual > WITNESS_TOL:
            raise SolverDiverged(f"witness residual {residual:.3e} above {WITNESS_TOL}",
                                 witness=b.tolist(), residual=residual)
        sv = transversality(sphere, a, b)
        if sv[-1] <= RANK_TOL * max(sv[0], 1.0):
            raise NonTransverseDoublePoint(f"rank-deficient differential at {b.tolist()}",
                                           witness=b.tolist(), singular_values=sv.tolist())
        witnesses.append({
            'points': [[round_float(x, 10) for x in b], [round_float(x, 10) for x in a]],
            'disc': [_disc(b), _disc(a)],
            'residual': round_float(residual, 3),
            'singular_values': [round_float(float(x), 6) for x in sv],
            'transverse': True,
        })
    witnesses.sort(key=lambda w: (w['disc'][0]['hemisphere'], w['disc'][0]['t'], w['disc'][0]['r']))
    logger.info("%s class %s: %d double point(s)", sphere.quotient, sphere.class_name, len(witnesses))
    return DoublePointReport(sphere, len(witnesses), witnesses, grid, seed, int(len(idx)))


def q_kkr(sphere: ImmersedSphere, grid: int = 200, seed: int = 0) -> int:
    """(e(ν) + 2·|Self|) mod 4."""
    report = double_points(sphere, grid, seed)
    return (sphere.euler_number + 2 * report.count) % 4


def q_kkr_value(quotient: str, class_name: str, grid: int = 200, seed: int = 0, eps: float = 0.1) -> int:
    if class_name == '0':
        return 0
    return q_kkr(catalog_entry(quotient, class_name, eps), grid, seed)


def q_kkr_table(quotient: str, grid: int = 200, seed: int = 0, eps: float = 0.1) -> Dict[str, Optional[int]]:
    """q on x, y, x+y; None where the catalog has no representative."""
    table: Dict[str, Optional[int]] = {}
    for name in CLASSES:
        try:
            table[name] = q_kkr_value(quotient, name, grid, seed, eps)
        except UnsupportedImmersion:
            table[name] = None
    return table


# ============== Distinguishing the quotients ==============

V2_SOURCES = {'S2xRP2': 's2xrp2', 'S2xtRP2': 's2xtrp2', 'RP4#RP4': None}


@dataclass
class DistinctionTable:
    rows: List[dict]
    distinct: bool

    def to_dict(self) -> dict:
        return {'rows': self.rows, 'distinct': self.distinct}


def distinguish_quotients(grid: int = 200, seed: int = 0, eps: float = 0.1) -> DistinctionTable:
    """
    (v₂ ≠ 0, q values) for the three quotients. v₂ comes from the shipped
    rings where one exists; RP⁴#_{S¹}RP⁴ has no ring here and its v₂ ≠ 0
    (exceptional fibres have self-intersection 1) is an input.
    """
    from f2_rings import ring_from_library

    rows = []
    for quotient, ring_name in V2_SOURCES.items():
        if ring_name:
            v2_nonzero = not ring_from_library(ring_name).wu_class(2).is_zero
            source = f'computed from ring {ring_name}'
        else:
            v2_nonzero = True
            source = 'input: exceptional fibres have self-intersection 1'
        rows.append({
            'quotient': quotient,
            'name': QUOTIENTS[quotient][0],
            'v2_nonzero': v2_nonzero,
            'v2_source': source,
            'q': q_kkr_table(quotient, grid, seed, eps),
        })
    keys = [(row['v2_nonzero'], tuple(sorted((k, v) for k, v in row['q'].items() if v is not None)))
            for row in rows]
    return DistinctionTable(rows, len(set(keys)) == len(keys))


