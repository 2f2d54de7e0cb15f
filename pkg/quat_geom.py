"""
Quaternionic geometry on S²×S².

S² is the unit sphere in the purely imaginary quaternions, stored as
3-vectors (x, y, z) ↔ xi + yj + zk. Quaternions are (w, x, y, z). Batch
kernels work on (N, 4) and (N, 3) arrays; the dataclasses wrap single
points for the public per-point operations.

Hemispheres: D₊ = {z ≥ 0}, D₋ = {z ≤ 0}, each identified with the unit
disc by vertical projection, (x, y, ±√(1−r²)) ↔ r·e^{2πit}.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from utils import (
    ClosedFormMismatch, FixedPointFound, IdentityViolated, NonUnitQuaternion, OrderFailed, round_float,
)

logger = logging.getLogger(__name__)

UNIT_TOL = 1e-12
IDENTITY_TOL = 1e-9
CLOSED_FORM_TOL = 1e-10
FREE_SEPARATION = 1e-3


# ============== Batch kernels ==============

def qmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product of (..., 4) arrays."""
    aw, ax, ay, az = np.moveaxis(np.asarray(a, dtype=float), -1, 0)
    bw, bx, by, bz = np.moveaxis(np.asarray(b, dtype=float), -1, 0)
    return np.stack([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ], axis=-1)


def qconj(a: np.ndarray) -> np.ndarray:
    return np.asarray(a, dtype=float) * np.array([1.0, -1.0, -1.0, -1.0])


def qinv(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return qconj(a) / np.sum(a * a, axis=-1, keepdims=True)


def pure(v: np.ndarray) -> np.ndarray:
    """3-vectors to pure quaternions."""
    v = np.asarray(v, dtype=float)
    return np.concatenate([np.zeros(v.shape[:-1] + (1,)), v], axis=-1)


def qrotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """q v q⁻¹ for unit q, returned as 3-vectors."""
    return qmul(qmul(q, pure(v)), qinv(q))[..., 1:]


def antipodal(v: np.ndarray) -> np.ndarray:
    return -np.asarray(v, dtype=float)


def r_pi(v: np.ndarray) -> np.ndarray:
    """Rotation by π about the k-axis (conjugation by k)."""
    return np.asarray(v, dtype=float) * np.array([-1.0, -1.0, 1.0])


def equator_reflection(v: np.ndarray) -> np.ndarray:
    return np.asarray(v, dtype=float) * np.array([1.0, 1.0, -1.0])


def normalize(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def random_sphere_points(rng: np.random.Generator, n: int) -> np.ndarray:
    return normalize(rng.standard_normal((n, 3)))


def random_unit_quaternions(rng: np.random.Generator, n: int) -> np.ndarray:
    return normalize(rng.standard_normal((n, 4)))


# ============== Value types ==============

@dataclass(frozen=True)
class Quaternion:
    w: float
    x: float
    y: float
    z: float

    @classmethod
    def from_array(cls, a: Sequence[float]) -> 'Quaternion':
        return cls(*(float(c) for c in a))

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def __mul__(self, other: 'Quaternion') -> 'Quaternion':
        return Quaternion.from_array(qmul(self.as_array(), other.as_array()))

    def __add__(self, other: 'Quaternion') -> 'Quaternion':
        return Quaternion.from_array(self.as_array() + other.as_array())

    def __sub__(self, other: 'Quaternion') -> 'Quaternion':
        return Quaternion.from_array(self.as_array() - other.as_array())

    def __neg__(self) -> 'Quaternion':
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def scale(self, c: float) -> 'Quaternion':
        return Quaternion.from_array(c * self.as_array())

    def conjugate(self) -> 'Quaternion':
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def inverse(self) -> 'Quaternion':
        return Quaternion.from_array(qinv(self.as_array()))

    def norm(self) -> float:
        return float(np.linalg.norm(self.as_array()))

    def is_unit(self, tol: float = UNIT_TOL) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def distance(self, other: 'Quaternion') -> float:
        return float(np.linalg.norm(self.as_array() - other.as_array()))

    def power(self, k: int) -> 'Quaternion':
        out = ONE
        for _ in range(k):
            out = out * self
        return out

    def to_dict(self) -> dict:
        return {'w': round_float(self.w), 'x': round_float(self.x),
                'y': round_float(self.y), 'z': round_float(self.z)}


ONE = Quaternion(1.0, 0.0, 0.0, 0.0)
I = Quaternion(0.0, 1.0, 0.0, 0.0)
J = Quaternion(0.0, 0.0, 1.0, 0.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)


def exp_i(theta: float) -> Quaternion:
    """e^{iθ} = cos θ + i sin θ."""
    return Quaternion(np.cos(theta), np.sin(theta), 0.0, 0.0)


@dataclass(frozen=True)
class S2Point:
    """A unit pure quaternion xi + yj + zk."""
    x: float
    y: float
    z: float

    def __post_init__(self):
        n = float(np.sqrt(self.x ** 2 + self.y ** 2 + self.z ** 2))
        if abs(n - 1.0) > 1e-6:
            raise ValueError(f"point is not on the unit sphere (norm {n})")
        object.__setattr__(self, 'x', float(self.x) / n)
        object.__setattr__(self, 'y', float(self.y) / n)
        object.__setattr__(self, 'z', float(self.z) / n)

    @classmethod
    def from_vector(cls, v: Sequence[float]) -> 'S2Point':
        v = np.asarray(v, dtype=float)
        v = v / np.linalg.norm(v)
        return cls(*v)

    def as_vector(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def as_quaternion(self) -> Quaternion:
        return Quaternion(0.0, self.x, self.y, self.z)

    def hemisphere(self) -> str:
        return '+' if self.z >= 0 else '-'


@dataclass(frozen=True)
class DiscCoord:
    """r·e^{2πit} in the closed unit disc."""
    r: float
    t: float

    def __post_init__(self):
        if not -1e-12 <= self.r <= 1 + 1e-12:
            raise ValueError(f"disc radius {self.r} outside [0, 1]")
        object.__setattr__(self, 't', float(self.t) % 1.0)

    def rotated(self) -> 'DiscCoord':
        """R_π on the disc: t ↦ t + 1/2."""
        return DiscCoord(self.r, self.t + 0.5)

    def to_point(self, hemisphere: str = '+') -> S2Point:
        sign = 1.0 if hemisphere == '+' else -1.0
        r = min(max(self.r, 0.0), 1.0)
        return S2Point(r * np.cos(2 * np.pi * self.t), r * np.sin(2 * np.pi * self.t),
                       sign * np.sqrt(max(0.0, 1.0 - r * r)))

    @classmethod
    def from_point(cls, p: S2Point) -> 'DiscCoord':
        r = min(1.0, float(np.hypot(p.x, p.y)))
        t = float(np.arctan2(p.y, p.x) / (2 * np.pi)) if r > 0 else 0.0
        return cls(r, t)


@dataclass(frozen=True)
class ProductPoint:
    """(s, d) in S²×S²; the hemisphere tag picks the branch of piecewise maps."""
    first: S2Point
    second: S2Point
    hemisphere: Optional[str] = None

    def branch(self) -> str:
        return self.hemisphere or self.second.hemisphere()


# ============== Rotations and the disc maps ==============

def rotate_by_conjugation(q: Quaternion, v: S2Point, tol: float = UNIT_TOL) -> S2Point:
    """q v q⁻¹ for a unit quaternion q."""
    if not q.is_unit(tol):
        raise NonUnitQuaternion(f"quaternion has norm {q.norm()}, not 1", q.norm())
    return S2Point.from_vector(qrotate(q.as_array(), v.as_vector()))


def v_map_array(r: np.ndarray, t: np.ndarray) -> np.ndarray:
    """V(r, t) = sin(πr/2)·e^{2πit} + cos(πr/2)·j as (N, 4)."""
    r, t = np.asarray(r, dtype=float), np.asarray(t, dtype=float)
    s = np.sin(np.pi * r / 2)
    return np.stack([s * np.cos(2 * np.pi * t), s * np.sin(2 * np.pi * t),
                     np.cos(np.pi * r / 2), np.zeros_like(r)], axis=-1)


def v_map(d: DiscCoord) -> Quaternion:
    return Quaternion.from_array(v_map_array(np.array(d.r), np.array(d.t)))


def twist_closed_form_array(r: np.ndarray, t: np.ndarray) -> np.ndarray:
    """cos πr − sin πr cos 2πt·j + sin πr sin 2πt·k."""
    r, t = np.asarray(r, dtype=float), np.asarray(t, dtype=float)
    return np.stack([np.cos(np.pi * r), np.zeros_like(r),
                     -np.sin(np.pi * r) * np.cos(2 * np.pi * t),
                     np.sin(np.pi * r) * np.sin(2 * np.pi * t)], axis=-1)


def twist_factor_array(r: np.ndarray, t: np.ndarray) -> np.ndarray:
    """V(R_π d)⁻¹ V(d) by quaternion arithmetic."""
    return qmul(qinv(v_map_array(r, np.asarray(t) + 0.5)), v_map_array(r, t))


def twist_factor(d: DiscCoord, tol: float = CLOSED_FORM_TOL) -> Quaternion:
    """V(R_π d)⁻¹V(d), cross-checked against the closed form."""
    computed = twist_factor_array(np.array(d.r), np.array(d.t))
    closed = twist_closed_form_array(np.array(d.r), np.array(d.t))
    deviation = float(np.max(np.abs(computed - closed)))
    if deviation > tol:
        raise ClosedFormMismatch(f"twist factor deviates from closed form by {deviation:.3e}",
                                 witness=d, deviation=deviation)
    return Quaternion.from_array(computed)


def twist_factor_grid_deviation(n: int = 100) -> float:
    """Max |quaternion evaluation − closed form| over an n×n (r, t) grid."""
    r, t = np.meshgrid(np.linspace(0.0, 1.0, n), np.linspace(0.0, 1.0, n, endpoint=False))
    r, t = r.ravel(), t.ravel()
    return float(np.max(np.abs(twist_factor_array(r, t) - twist_closed_form_array(r, t))))


def disc_coordinates(v: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    v = np.asarray(v, dtype=float)
    r = np.minimum(1.0, np.hypot(v[..., 0], v[..., 1]))
    t = np.mod(np.arctan2(v[..., 1], v[..., 0]) / (2 * np.pi), 1.0)
    return r, t


# ============== Group actions ==============

Map = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]


def sigma(s: np.ndarray, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """σ(s, t) = (t, A(s))."""
    return np.array(t, dtype=float), antipodal(s)


def sigma_squared(s: np.ndarray, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    return sigma(*sigma(s, t))


def psi(s: np.ndarray, t: np.ndarray, hemisphere: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    The free involution presenting RP⁴#_{S¹}RP⁴.

    On D₋: (A(s), R_π d). On D₊: (Q·A(s)·Q⁻¹, R_π d) with Q = V(R_π d)⁻¹V(d).
    `hemisphere` is a boolean array (True = D₊); by default the sign of z decides.
    """
    s = np.atleast_2d(np.asarray(s, dtype=float))
    t = np.atleast_2d(np.asarray(t, dtype=float))
    upper = t[:, 2] >= 0 if hemisphere is None else np.asarray(hemisphere, dtype=bool)
    r, tt = disc_coordinates(t)
    q = twist_factor_array(r, tt)
    first = antipodal(s)
    first = np.where(upper[:, None], qrotate(q, first), first)
    return first, r_pi(t)


def psi_point(p: ProductPoint) -> ProductPoint:
    """ψ on a single point; R_π preserves z, so the image keeps the tag."""
    first, second = psi(p.first.as_vector(), p.second.as_vector(), np.array([p.branch() == '+']))
    return ProductPoint(S2Point.from_vector(first[0]), S2Point.from_vector(second[0]), p.hemisphere)


def t_action(s: np.ndarray, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """t(s, s′) = (−s, s′)."""
    return antipodal(s), np.array(t, dtype=float)


def u_action(s: np.ndarray, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """u(s, s′) = (R_π s, −s′)."""
    return r_pi(s), antipodal(t)


def f_lift(s: np.ndarray, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(s, s′) ↦ (−s, R(s′)), R the reflection across the equator."""
    return antipodal(s), equator_reflection(t)


def identity_map(s: np.ndarray, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    return np.array(s, dtype=float), np.array(t, dtype=float)


@dataclass(frozen=True)
class RegisteredAction:
    name: str
    generators: Tuple[Map, ...]
    orders: Tuple[int, ...]
    description: str = ''


ACTIONS: Dict[str, RegisteredAction] = {
    'sigma': RegisteredAction('sigma', (sigma,), (4,), 'σ(s,t) = (t, −s), π = ℤ/4'),
    'sigma2': RegisteredAction('sigma2', (sigma_squared,), (2,), 'σ² = A×A'),
    'psi': RegisteredAction('psi', (psi,), (2,), 'ψ, deck involution of RP⁴#_{S¹}RP⁴'),
    'z2xz2': RegisteredAction('z2xz2', (t_action, u_action), (2, 2),
                              't(s,s′) = (−s,s′), u(s,s′) = (R_π s,−s′)'),
    'F': RegisteredAction('F', (f_lift,), (2,), '(s,s′) ↦ (−s, R(s′))'),
    'identity': RegisteredAction('identity', (identity_map,), (1,), 'identity, not free'),
}


def apply_power(g: Map, k: int, s: np.ndarray, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    for _ in range(k):
        s, t = g(s, t)
    return s, t


def apply_element(action: RegisteredAction, exponents: Sequence[int], s, t):
    for g, e in zip(action.generators, exponents):
        s, t = apply_power(g, e, s, t)
    return s, t


def _displacement(s, t, s2, t2) -> np.ndarray:
    return np.sqrt(np.sum((s2 - s) ** 2, axis=-1) + np.sum((t2 - t) ** 2, axis=-1))


def _angles_to_points(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    th1, ph1, th2, ph2 = x
    s = np.array([[np.sin(th1) * np.cos(ph1), np.sin(th1) * np.sin(ph1), np.cos(th1)]])
    t = np.array([[np.sin(th2) * np.cos(ph2), np.sin(th2) * np.sin(ph2), np.cos(th2)]])
    return s, t


def _points_to_angles(s: np.ndarray, t: np.ndarray) -> np.ndarray:
    return np.array([np.arccos(np.clip(s[2], -1, 1)), np.arctan2(s[1], s[0]),
                     np.arccos(np.clip(t[2], -1, 1)), np.arctan2(t[1], t[0])])


@dataclass
class ActionReport:
    action: str
    orders: List[int]
    order_ok: bool
    commutes: bool
    min_displacement: float
    worst_point: List[float]
    worst_element: List[int]
    samples: int
    seed: int
    max_order_error: float = 0.0
    max_norm_error: float = 0.0

    @property
    def is_free(self) -> bool:
        """Orders and commutation hold and no orbit comes within FREE_SEPARATION."""
        return self.order_ok and self.commutes and self.min_displacement >= FREE_SEPARATION

    def to_dict(self) -> dict:
        return {
            'action': self.action,
            'orders': self.orders,
            'order_ok': self.order_ok,
            'commutes': self.commutes,
            'min_displacement': round_float(self.min_displacement),
            'worst_point': [round_float(x) for x in self.worst_point],
            'worst_element': self.worst_element,
            'samples': self.samples,
            'seed': self.seed,
            'max_order_error': round_float(self.max_order_error, 3),
            'max_norm_error': round_float(self.max_norm_error, 3),
        }


def _nontrivial_elements(orders: Sequence[int]) -> List[Tuple[int, ...]]:
    # a generator claimed to have order 1 still has to move every point
    ranges = [range(max(n, 2)) for n in orders]
    out = [()]
    for rng in ranges:
        out = [e + (k,) for e in out for k in rng]
    return [e for e in out if any(e)]


def verify_action(action, samples: int = 10000, seed: int = 0, refine: int = 5,
                  tol: float = IDENTITY_TOL, fixed_tol: float = 1e-6) -> ActionReport:
    """
    Order, commutativity and freeness of a registered action on sampled points.

    The displacement minimum over samples is refined by Nelder–Mead from the
    `refine` best seeds per group element; the reported minimum is that
    refined value.
    """
    if isinstance(action, str):
        if action not in ACTIONS:
            raise ValueError(f"Unknown action: {action} (choose from {', '.join(ACTIONS)})")
        action = ACTIONS[action]
    rng = np.random.default_rng(seed)
    s, t = random_sphere_points(rng, samples), random_sphere_points(rng, samples)

    max_order_error, max_norm_error = 0.0, 0.0
    for g, n in zip(action.generators, action.orders):
        s1, t1 = g(s, t)
        max_norm_error = max(max_norm_error,
                             float(np.max(np.abs(np.linalg.norm(s1, axis=1) - 1))),
                             float(np.max(np.abs(np.linalg.norm(t1, axis=1) - 1))))
        sn, tn = apply_power(g, n, s, t)
        err = _displacement(s, t, sn, tn)
        worst = int(np.argmax(err))
        max_order_error = max(max_order_error, float(err[worst]))
        if err[worst] > tol:
            raise OrderFailed(f"{action.name}: generator^{n} ≠ id (error {err[worst]:.3e})",
                              witness=(s[worst].tolist(), t[worst].tolist()), deviation=float(err[worst]))

    commutes = True
    gens = action.generators
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            a = gens[i](*gens[j](s, t))
            b = gens[j](*gens[i](s, t))
            if float(np.max(_displacement(*a, *b))) > tol:
                commutes = False

    best = (np.inf, None, None)
    for exps in _nontrivial_elements(action.orders):
        disp = _displacement(s, t, *apply_element(action, exps, s, t))
        seeds = np.argsort(disp)[:refine]
        for idx in seeds:
            x0 = _points_to_angles(s[idx], t[idx])

            def objective(x, exps=exps):
                ps, pt = _angles_to_points(x)
                return float(_displacement(ps, pt, *apply_element(action, exps, ps, pt))[0])

            res = minimize(objective, x0, method='Nelder-Mead',
                           options={'xatol': 1e-10, 'fatol': 1e-12, 'maxiter': 2000})
            val = min(float(res.fun), float(disp[idx]))
            if val < best[0]:
                point = res.x if res.fun <= disp[idx] else x0
                ps, pt = _angles_to_points(point)
                best = (val, np.concatenate([ps[0], pt[0]]).tolist(), list(exps))
    min_disp, worst_point, worst_element = best
    if worst_point is None:
        min_disp, worst_point, worst_element = float('inf'), [], []

    logger.debug("%s: min displacement %.3e at element %s", action.name, min_disp, worst_element)
    if min_disp < fixed_tol:
        raise FixedPointFound(f"{action.name}: element {worst_element} has a fixed point",
                              witness=worst_point, power=sum(worst_element), displacement=min_disp)
    return ActionReport(action.name, list(action.orders), True, commutes, min_disp, worst_point,
                        worst_element, samples, seed, max_order_error, max_norm_error)


def psi_seam_mismatch(n: int = 1000) -> float:
    """Max difference of the two branch formulas of ψ on the equator r = 1."""
    theta = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    t = np.stack([np.cos(theta), np.sin(theta), np.zeros_like(theta)], axis=-1)
    rng = np.random.default_rng(n)
    s = random_sphere_points(rng, n)
    up = psi(s, t, hemisphere=np.ones(n, dtype=bool))
    down = psi(s, t, hemisphere=np.zeros(n, dtype=bool))
    return float(np.max(_displacement(*up, *down)))


def twist_commutation_deviation(samples: int = 1000, seed: int = 0) -> float:
    """
    The lifts ξ̃(s, x) = (x s x⁻¹, x) and f̃(s, x) = (−s, x) on S²×S¹ commute;
    returns the max deviation of f̃ξ̃ from ξ̃f̃.
    """
    rng = np.random.default_rng(seed)
    s = random_sphere_points(rng, samples)
    theta = rng.uniform(0.0, 2 * np.pi, samples)
    x = np.stack([np.cos(theta), np.sin(theta), np.zeros(samples), np.zeros(samples)], axis=-1)
    xi_then_f = antipodal(qrotate(x, s))
    f_then_xi = qrotate(x, antipodal(s))
    return float(np.max(np.linalg.norm(xi_then_f - f_then_xi, axis=1)))


# ============== The covering of C₀ ==============

LIFT = Quaternion(1 / np.sqrt(2), 0.0, 0.0, 1 / np.sqrt(2))


def covering_map(q: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """f(q) = (q i q⁻¹, q j q⁻¹)."""
    q = np.atleast_2d(q)
    n = q.shape[0]
    return qrotate(q, np.tile([1.0, 0.0, 0.0], (n, 1))), qrotate(q, np.tile([0.0, 1.0, 0.0], (n, 1)))


@dataclass
class CoverReport:
    samples: int
    seed: int
    max_c0_error: float
    max_sign_error: float
    max_lift_error: float
    min_injectivity_ratio: float
    base_point: List[List[float]]
    lift_order_table: List[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            'samples': self.samples,
            'seed': self.seed,
            'max_c0_error': round_float(self.max_c0_error, 3),
            'max_sign_error': round_float(self.max_sign_error, 3),
            'max_lift_error': round_float(self.max_lift_error, 3),
            'min_injectivity_ratio': round_float(self.min_injectivity_ratio, 6),
            'base_point': [[round_float(x) for x in p] for p in self.base_point],
            'lift_order_table': self.lift_order_table,
        }


def lift_order_table() -> List[dict]:
    """Powers of (1+k)/√2: order 8 as a quaternion, order 4 on C₀."""
    table = []
    for k in range(1, 9):
        c = LIFT.power(k)
        table.append({
            'power': k,
            'value': c.to_dict(),
            'is_identity': c.distance(ONE) < 1e-12,
            'trivial_on_C0': min(c.distance(ONE), c.distance(-ONE)) < 1e-12,
        })
    return table


def covering_check(samples: int = 10000, seed: int = 0, tol: float = CLOSED_FORM_TOL) -> CoverReport:
    """
    Sampled checks of f: S³ → C₀: image in C₀, f(−q) = f(q), the lift
    identity f(q·(1+k)/√2) = σ(f(q)), and injectivity up to sign.
    """
    rng = np.random.default_rng(seed)
    q = random_unit_quaternions(rng, samples)
    s, t = covering_map(q)

    c0 = np.abs(np.sum(s * t, axis=1))
    _raise_if(c0, tol, "f(q) not in C0", q)

    sm, tm = covering_map(-q)
    sign = _displacement(s, t, sm, tm)
    _raise_if(sign, tol, "f(-q) != f(q)", q)

    sl, tl = covering_map(qmul(q, LIFT.as_array()))
    lift = _displacement(*sigma(s, t), sl, tl)
    _raise_if(lift, tol, "f(q c) != sigma(f(q))", q)

    # injectivity: ‖f(q₁) − f(q₂)‖ against the distance from q₁ to ±q₂, near and far pairs
    near = normalize(q + 1e-3 * rng.standard_normal(q.shape))
    far = random_unit_quaternions(rng, samples)
    ratios = []
    for other in (near, far):
        so, to = covering_map(other)
        image = _displacement(s, t, so, to)
        source = np.minimum(np.linalg.norm(q - other, axis=1), np.linalg.norm(q + other, axis=1))
        ratios.append(image / np.maximum(source, 1e-300))
    ratio = float(np.min(np.concatenate(ratios)))
    if ratio < 1e-6:
        raise IdentityViolated(f"f is not injective up to sign (ratio {ratio:.3e})", deviation=ratio)

    base = covering_map(ONE.as_array())
    return CoverReport(samples, seed, float(np.max(c0)), float(np.max(sign)), float(np.max(lift)), ratio,
                       [base[0][0].tolist(), base[1][0].tolist()], lift_order_table())


def _raise_if(errors: np.ndarray, tol: float, message: str, q: np.ndarray) -> None:
    worst = int(np.argmax(errors))
    if errors[worst] > tol:
        raise IdentityViolated(f"{message} (error {errors[worst]:.3e})", witness=q[worst].tolist(),
                               deviation=float(errors[worst]))


# ============== Intersections ==============

def homological_self_intersection(bidegree: Tuple[int, int]) -> int:
    """Q(a, b) = 2ab for the form (0 1; 1 0) on H₂(S²×S²)."""
    a, b = bidegree
    return 2 * a * b


def graph_bidegree(k: int) -> Tuple[int, int]:
    """The graph of a degree-k map S² → S²."""
    return 1, k
