"""The fan over a polyhedral structure and the strata of the induced semi-stable reduction.

For a structure Λ on X (finite cells in N_R), the fan Λ̃ in N_R × R has one cone
cone(P × {1}) for every finite cell P, plus the recession cones at height 0.  The
vertex rays (v, 1) form the set I, and each stratum X_J is the compactified star
fan of the cone spanned by J.  All strata are kept inside one ``FanSupport`` on Λ̃.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .apresolution import FanSupport
from .exactlin import primitive_direction
from .polyhedra import Fan, Polyhedron, cone, scale
from .troptoric import AmbientFan, Cone, WeightedComplex, check_balancing, check_regular_at_infinity


@dataclass
class ConeData:
    base: WeightedComplex
    k: int
    support: FanSupport
    vertex_rays: list[int]
    cell_cones: dict[int, Cone]

    @property
    def fan(self) -> Fan:
        return self.support.ambient.fan

    @property
    def psi(self) -> tuple[int, ...]:
        """The height functional on N_R × R."""
        return (0,) * self.base.ambient.n + (1,)


@dataclass
class ReductionStratum:
    j: tuple[int, ...]
    cone: Cone
    dim: int
    weights: dict[Cone, int]
    complex: WeightedComplex
    ambient: AmbientFan

    def label(self, data: ConeData) -> list[int]:
        return [data.vertex_rays.index(i) for i in self.j]


def _recession_overlap(cones: list[Polyhedron]) -> tuple[Polyhedron, Polyhedron] | None:
    for a, b in combinations(cones, 2):
        meet = a.intersection(b)
        if meet.is_empty:
            continue
        if meet not in a.faces or meet not in b.faces:
            return a, b
    return None


def fan_over(lam: WeightedComplex, k: int = 1) -> ConeData:
    """The fan Λ̃ over the finite cells of Λ, scaled by k so that all vertices are lattice points."""
    n = lam.ambient.n
    finite = [i for i, c in enumerate(lam.cells) if not c.sigma]
    for i in finite:
        if lam.cells[i].finite.lines:
            raise ValueError(f"cell {lam.cells[i].describe()} contains a line")
    vertices: list[tuple] = []
    for i in finite:
        if lam.cells[i].dim == 0:
            vertices.append(tuple(lam.cells[i].finite.vertices[0]))
    vertices.sort()
    rays: list[tuple[int, ...]] = []
    ray_index: dict[tuple[int, ...], int] = {}

    def add_ray(v) -> int:
        r = primitive_direction(v)
        if r not in ray_index:
            ray_index[r] = len(rays)
            rays.append(r)
        return ray_index[r]

    for v in vertices:
        lifted = tuple(Fraction(k) * x for x in v) + (Fraction(1),)
        if any(x.denominator != 1 for x in lifted):
            raise ValueError(f"vertex {v} is not in (1/{k})N")
        add_ray(lifted)
    vertex_rays = list(range(len(rays)))
    recession: list[Polyhedron] = []
    cell_cones: dict[int, Cone] = {}
    for i in finite:
        p = lam.cells[i].finite
        indices = [add_ray(tuple(Fraction(k) * x for x in v) + (Fraction(1),)) for v in p.vertices]
        indices += [add_ray(tuple(r) + (0,)) for r in p.rays]
        cell_cones[i] = frozenset(indices)
        if p.rays:
            recession.append(cone(n, p.rays))
    overlap = _recession_overlap(list({c.key: c for c in recession}.values()))
    if overlap is not None:
        raise ValueError(f"recession cones {overlap[0]} and {overlap[1]} do not form a fan")
    fan = Fan(n + 1, rays, cell_cones.values())
    ambient = AmbientFan(fan)
    if not ambient.is_unimodular:
        raise ValueError("the fan over the structure is not unimodular")
    top = lam.dim
    weights = {cell_cones[i]: lam.weights[i] for i in finite if lam.cells[i].dim == top}
    support = FanSupport(ambient, cell_cones.values(), weights)
    return ConeData(lam, k, support, vertex_rays, cell_cones)


def height_one_slice(data: ConeData) -> tuple[bool, list]:
    """Compare {C ∩ (N_R × {1})} over cones meeting I with the finite cells of Λ (scaled by k)."""
    n = data.base.ambient.n
    fan = data.fan
    slices = set()
    for c in data.support.cones:
        if not c & set(data.vertex_rays):
            continue
        polyhedron = fan.cone_polyhedron(c)
        plane = Polyhedron.from_inequalities(n + 1, [], [(data.psi, 1)])
        cut = polyhedron.intersection(plane)
        dropped = Polyhedron.from_generators(n, [v[:n] for v in cut.vertices], [r[:n] for r in cut.rays],
                                             [l[:n] for l in cut.lines])
        slices.add(dropped.key)
    expected = set()
    for i, cell in enumerate(data.base.cells):
        if cell.sigma:
            continue
        p = cell.finite
        scaled = Polyhedron.from_generators(n, [scale(data.k, v) for v in p.vertices], p.rays, p.lines)
        expected.add(scaled.key)
    missing = sorted(expected - slices)
    extra = sorted(slices - expected)
    return not missing and not extra, missing + extra


def star_complex(support: FanSupport, beta: Cone) -> tuple[AmbientFan, WeightedComplex]:
    """The compactified star fan of β as a weighted complex in its own toric variety."""
    ambient = support.ambient
    star = support.star(beta)
    ray_list = sorted({i for c in star for i in c} - beta)
    images = [ambient.ray_image(beta, i) for i in ray_list]
    position = {i: t for t, i in enumerate(ray_list)}
    cones = [frozenset(position[i] for i in c - beta) for c in star]
    m = ambient.quotient_rank(beta)
    own = AmbientFan(Fan(m, images, cones))
    weights = {frozenset(position[i] for i in c - beta): w for c, w in support.weights.items() if beta <= c}
    complex_ = FanSupport(own, cones, weights).cell_complex
    return own, complex_


def semistable_reduction(data: ConeData) -> list[ReductionStratum]:
    """All nonempty strata X_J, J ⊆ I, with inherited weights; each is checked for balancing and regularity."""
    support = data.support
    out = []
    vertex_set = set(data.vertex_rays)
    for c in sorted(support.cones, key=lambda c: (len(c), sorted(c))):
        if not c or not c <= vertex_set:
            continue
        j = tuple(sorted(c))
        own, complex_ = star_complex(support, c)
        weights = {d: w for d, w in support.weights.items() if c <= d}
        stratum = ReductionStratum(j, c, support.dim - len(c), weights, complex_, own)
        ok, witnesses = check_balancing(complex_)
        if not ok:
            raise AssertionError(f"stratum {list(j)} is not balanced: {witnesses}")
        ok, witnesses = check_regular_at_infinity(complex_)
        if not ok:
            raise AssertionError(f"stratum {list(j)} is not regular at infinity: {witnesses}")
        out.append(stratum)
    return out


@dataclass
class ReductionReport:
    slice_ok: bool
    dimensions_ok: bool
    balanced: bool
    regular: bool
    vertex_count_ok: bool
    retraction_ok: bool
    details: list

    @property
    def ok(self) -> bool:
        return all([self.slice_ok, self.dimensions_ok, self.balanced, self.regular,
                    self.vertex_count_ok, self.retraction_ok])


def check_reduction(data: ConeData, strata: Sequence[ReductionStratum]) -> ReductionReport:
    """Exact checks of the construction: slice, stratum dimensions, balancing, regularity, retraction."""
    details = []
    slice_ok, diff = height_one_slice(data)
    if not slice_ok:
        details.append({"slice_mismatch": [str(d) for d in diff]})
    dim_x = data.base.dim
    dimensions_ok = True
    balanced = regular = True
    for s in strata:
        if s.complex.dim != dim_x - len(s.j) + 1:
            dimensions_ok = False
            details.append({"stratum": list(s.j), "dim": s.complex.dim})
        balanced &= check_balancing(s.complex)[0]
        regular &= check_regular_at_infinity(s.complex)[0]
    vertices = sum(1 for c in data.base.cells if not c.sigma and c.dim == 0)
    vertex_count_ok = vertices == len(data.vertex_rays)
    meeting = [c for c in data.support.cones if c & set(data.vertex_rays)]
    finite = [i for i, c in enumerate(data.base.cells) if not c.sigma]
    image = {data.cell_cones[i] for i in finite}
    retraction_ok = set(meeting) == image and len(image) == len(finite) and all(
        len(data.cell_cones[i]) == data.base.cells[i].dim + 1 for i in finite)
    return ReductionReport(slice_ok, dimensions_ok, balanced, regular, vertex_count_ok, retraction_ok, details)
