"""
Whitehead's quadratic functor on free modules with group action, twisted
coinvariants, and orbit counts of polarizations within a quadratic 2-type.
"""

import logging
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

from exact_linalg import AbelianInvariants, IntMatrix, cokernel_invariants, smith_normal_form
from group_homalg import GROUPS, Element, FiniteAbelianGroup, GroupModule, module_preset
from utils import SymmetryNotInduced

logger = logging.getLogger(__name__)


def gamma_labels(n: int) -> List[str]:
    """γ(e₁),…,γ(eₙ), then [eᵢ,eⱼ] for i<j in lex order."""
    labels = [f"g(e{i + 1})" for i in range(n)]
    labels += [f"[e{i + 1},e{j + 1}]" for i in range(n) for j in range(i + 1, n)]
    return labels


def _pair_index(n: int) -> Dict[Tuple[int, int], int]:
    index, pos = {}, n
    for i in range(n):
        for j in range(i + 1, n):
            index[(i, j)] = pos
            pos += 1
    return index


def gamma_matrix(a: IntMatrix) -> IntMatrix:
    """
    Γ(a) in the basis γ(eᵢ), [eᵢ,eⱼ].

    γ(Σ aᵢeᵢ) = Σ aᵢ²γ(eᵢ) + Σ_{i<j} aᵢaⱼ[eᵢ,eⱼ] and [eᵢ,eᵢ] = 2γ(eᵢ).
    """
    n = a.rows
    if a.cols != n:
        raise ValueError("gamma_matrix needs a square matrix")
    pairs = _pair_index(n)
    size = n + len(pairs)
    cols = []
    for k in range(n):
        v = [a[i, k] for i in range(n)]
        col = [0] * size
        for i in range(n):
            col[i] = v[i] * v[i]
        for (i, j), pos in pairs.items():
            col[pos] = v[i] * v[j]
        cols.append(col)
    for (k, l), _ in sorted(pairs.items(), key=lambda kv: kv[1]):
        v = [a[i, k] for i in range(n)]
        w = [a[i, l] for i in range(n)]
        col = [0] * size
        for i in range(n):
            col[i] = 2 * v[i] * w[i]
        for (i, j), pos in pairs.items():
            col[pos] = v[i] * w[j] + v[j] * w[i]
        cols.append(col)
    return IntMatrix.from_rows(list(zip(*cols)), size) if size else IntMatrix.zeros(0, 0)


@dataclass(frozen=True)
class GammaModule:
    """Γ_W(Π) with the induced action of each generator; weight carried from Π."""
    base: GroupModule
    actions: Tuple[IntMatrix, ...]
    labels: Tuple[str, ...]

    @property
    def rank(self) -> int:
        return len(self.labels)

    @property
    def group(self) -> FiniteAbelianGroup:
        return self.base.group

    @property
    def weight(self) -> Tuple[int, ...]:
        return self.base.weight

    def relation_matrix(self) -> IntMatrix:
        """Columns of (w(g)·Γ(A_g) − I) for every generator g."""
        ident = IntMatrix.identity(self.rank)
        blocks = [act.scale(w) - ident for act, w in zip(self.actions, self.weight)]
        if not blocks:
            return IntMatrix.zeros(self.rank, 0)
        return IntMatrix.hstack(blocks)

    def format_vector(self, vec: Sequence[int]) -> str:
        terms = []
        for c, label in zip(vec, self.labels):
            if c == 0:
                continue
            terms.append(label if c == 1 else f"-{label}" if c == -1 else f"{c}*{label}")
        return ' + '.join(terms).replace('+ -', '- ') if terms else '0'


def gamma_functor(m: GroupModule) -> GammaModule:
    if m.modulus:
        raise ValueError("Γ_W needs a free ℤ-module")
    return GammaModule(m, tuple(gamma_matrix(a) for a in m.actions), tuple(gamma_labels(m.rank)))


def twisted_coinvariants(gm: GammaModule) -> AbelianInvariants:
    """ℤ^w ⊗_Λ Γ_W(Π)."""
    return cokernel_invariants(gm.relation_matrix())


@dataclass
class PolarizationOrbitReport:
    torsion: AbelianInvariants
    symmetries: List[str]
    orbit_count: int
    orbits: List[List[str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            'torsion': self.torsion.to_dict(),
            'symmetries': self.symmetries,
            'orbit_count': self.orbit_count,
            'orbits': self.orbits,
        }


def _check_normalizes(m: GroupModule, s: IntMatrix, name: str) -> None:
    det = s.determinant()
    if abs(det) != 1:
        raise SymmetryNotInduced(f"symmetry {name} is not invertible over Z (det {det})")
    elements = m.group.elements()
    sign_of = {g: _weight_of(m, g) for g in elements}
    actions = {g: m.element_action(g).scale(sign_of[g]) for g in elements}
    for i, a in enumerate(m.actions):
        gen = m.group.generator(i)
        # s·A·s⁻¹ = B  ⇔  s·A = B·s
        sa = s @ a
        match = [g for g in elements if (actions[g] @ s) == sa]
        if not match:
            raise SymmetryNotInduced(f"symmetry {name} does not normalize the action of generator {i + 1}")
        if all(sign_of[g] != sign_of[gen] for g in match):
            raise SymmetryNotInduced(f"symmetry {name} does not preserve the orientation character")


def _weight_of(m: GroupModule, g: Element) -> int:
    sign = 1
    for w, e in zip(m.weight, g):
        sign *= w ** e
    return sign


def torsion_orbit_count(gm: GammaModule, symmetries: Optional[Dict[str, IntMatrix]] = None) -> PolarizationOrbitReport:
    """
    Orbits of the torsion subgroup of ℤ^w ⊗_Λ Γ_W(Π) under the induced symmetries.

    Torsion elements are enumerated in Smith coordinates; each symmetry acts
    there by U·Γ(s)·U⁻¹ reduced modulo the diagonal.
    """
    symmetries = symmetries or {}
    for name, s in symmetries.items():
        _check_normalizes(gm.base, s, name)

    snf = smith_normal_form(gm.relation_matrix())
    diag = snf.diagonal + [0] * (gm.rank - len(snf.diagonal))
    tpos = [i for i, d in enumerate(diag) if d > 1]
    moduli = [diag[i] for i in tpos]
    torsion = AbelianInvariants.from_orders(0, moduli)

    induced = [snf.u @ gamma_matrix(s) @ snf.u_inv for s in symmetries.values()]

    def act(mat: IntMatrix, elem: Tuple[int, ...]) -> Tuple[int, ...]:
        y = [0] * gm.rank
        for pos, c in zip(tpos, elem):
            y[pos] = c
        out = [sum(mat[i, j] * y[j] for j in range(gm.rank)) for i in range(gm.rank)]
        return tuple(out[p] % d for p, d in zip(tpos, moduli))

    elements = list(product(*(range(d) for d in moduli)))
    seen, orbits = set(), []
    for start in elements:
        if start in seen:
            continue
        orbit, frontier = {start}, [start]
        while frontier:
            e = frontier.pop()
            for mat in induced:
                img = act(mat, e)
                if img not in orbit:
                    orbit.add(img)
                    frontier.append(img)
        seen |= orbit
        orbits.append(sorted(orbit))

    def label(elem):
        y = [0] * gm.rank
        for pos, c in zip(tpos, elem):
            y[pos] = c
        x = [sum(snf.u_inv[i, j] * y[j] for j in range(gm.rank)) for i in range(gm.rank)]
        if set(moduli) == {2}:
            x = [c % 2 for c in x]
        return gm.format_vector(x)

    report = PolarizationOrbitReport(torsion, sorted(symmetries), len(orbits),
                                     [[label(e) for e in orb] for orb in orbits])
    logger.debug("torsion %s has %d orbits under %s", torsion, len(orbits), report.symmetries)
    return report


# ============== Presets ==============

SWAP = IntMatrix.from_rows([[0, 1], [1, 0]])


def gamma_preset(name: str) -> Tuple[GammaModule, Dict[str, IntMatrix]]:
    """Γ_W(Π) with orientation twist and the geometric symmetries used for orbit counts."""
    presets = {
        'RP2xRP2': lambda: (module_preset('Pi-RP2xRP2').with_weight((-1, -1)), {'factor-swap': SWAP}),
        'RP2xtRP2': lambda: (module_preset('Pi-RP2xRP2').with_weight((-1, -1)), {}),
        'S2xRP2': lambda: (module_preset('Pi-S2xRP2').with_weight((-1,)), {}),
        'Z4': lambda: (module_preset('Pi-Z4').with_weight((-1,)), {}),
        'trivial': lambda: (GroupModule.trivial(GROUPS['trivial'], rank=2, label='Pi'), {}),
    }
    if name not in presets:
        raise ValueError(f"Unknown gamma preset: {name} (choose from {', '.join(sorted(presets))})")
    module, symmetries = presets[name]()
    return gamma_functor(module), symmetries
