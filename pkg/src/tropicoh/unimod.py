"""Unimodular structures: certified triangulation of compact complexes and extension along a dual stratification.

Compact parts are triangulated and refined by stellar subdivision at lattice points of (1/k)N;
when a simplex has no such point but is still not unimodular, k is doubled.  Whatever comes
out is accepted only through ``certify_structure``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import ceil, floor
from typing import Sequence

from .exactlin import dense_solve
from .polyhedra import (
    DualStratification,
    Fan,
    PolyComplex,
    Polyhedron,
    SemiOpenPolyhedron,
    Vector,
    minkowski_sum,
    is_unimodular_cell,
    sub,
    unions_equal,
    verify_stratification,
)
from .troptoric import WeightedComplex

Simplex = tuple[Vector, ...]


class UnimodularizationError(ValueError):
    def __init__(self, message: str, partial: PolyComplex, k: int):
        super().__init__(message)
        self.partial = partial
        self.k = k


def _pulling_triangulation(p: Polyhedron, order: dict[Vector, int]) -> list[Simplex]:
    """Triangulate a polytope by pulling its first vertex; compatible on shared faces."""
    vertices = sorted(p.vertices, key=order.__getitem__)
    if len(vertices) == p.dim + 1:
        return [tuple(vertices)]
    apex = vertices[0]
    out = []
    for facet in p.faces:
        if facet.dim != p.dim - 1 or apex in facet.vertices:
            continue
        for simplex in _pulling_triangulation(facet, order):
            out.append((apex,) + simplex)
    return out


def _barycentric(simplex: Simplex, x: Vector) -> list[Fraction] | None:
    """Barycentric coordinates of x in the affine span of the simplex, or None off the span."""
    n = len(x)
    base = simplex[0]
    columns = [sub(v, base) for v in simplex[1:]]
    rows = [[c[i] for c in columns] for i in range(n)]
    coords = dense_solve(rows, list(sub(x, base)), len(columns)) if columns else []
    if coords is None:
        return None
    if not columns and any(a != b for a, b in zip(x, base)):
        return None
    return [1 - sum(coords, Fraction(0))] + list(coords)


def _lattice_points(simplex: Simplex, k: int) -> list[Vector]:
    """Points of (1/k)N in the closed simplex, sorted."""
    n = len(simplex[0])
    ranges = []
    for i in range(n):
        lo = min(v[i] for v in simplex) * k
        hi = max(v[i] for v in simplex) * k
        ranges.append(range(ceil(lo), floor(hi) + 1))
    out = []
    for point in product(*ranges):
        x = tuple(Fraction(c, k) for c in point)
        coords = _barycentric(simplex, x)
        if coords is not None and all(c >= 0 for c in coords):
            out.append(x)
    return out


def _stellar(simplices: list[Simplex], x: Vector) -> list[Simplex]:
    """Stellar subdivision of every simplex containing x."""
    out = []
    for s in simplices:
        coords = _barycentric(s, x)
        if coords is None or any(c < 0 for c in coords):
            out.append(s)
            continue
        carrier = [i for i, c in enumerate(coords) if c > 0]
        for i in carrier:
            out.append(tuple(sorted(s[:i] + (x,) + s[i + 1:])))
    return out


def _simplex_polyhedron(s: Simplex) -> Polyhedron:
    return Polyhedron.from_generators(len(s[0]), s)


def unimodularize_compact(c: PolyComplex, max_iterations: int = 200, k: int = 1) -> tuple[int, PolyComplex]:
    """A (1/k)N-unimodular triangulation of a compact complex, certified cell by cell."""
    maximal = c.maximal_cells()
    if any(not p.is_bounded for p in maximal):
        raise ValueError("complex is not compact")
    points = sorted({v for p in c.cells for v in p.vertices})
    order = {v: i for i, v in enumerate(points)}
    simplices = sorted({tuple(sorted(s)) for p in maximal for s in _pulling_triangulation(p, order)})
    for _ in range(max_iterations):
        bad = [s for s in simplices if not is_unimodular_cell(_simplex_polyhedron(s), k)]
        if not bad:
            return k, PolyComplex.from_maximal(_simplex_polyhedron(s) for s in simplices)
        extra = [x for x in _lattice_points(bad[0], k) if x not in bad[0]]
        if extra:
            # points on small faces first keeps neighbouring simplices compatible and shallow
            support = {x: sum(1 for c in _barycentric(bad[0], x) if c > 0) for x in extra}
            chosen = min(extra, key=lambda x: (support[x], x))
            simplices = sorted(set(_stellar(simplices, chosen)))
        else:
            k *= 2
    partial = PolyComplex.from_maximal(_simplex_polyhedron(s) for s in simplices)
    raise UnimodularizationError(f"no certified triangulation after {max_iterations} steps", partial, k)


def finite_part(x: WeightedComplex) -> PolyComplex:
    """The cells of X lying in N_R."""
    return PolyComplex.from_maximal(
        x.cells[i].finite for i in range(len(x.cells))
        if not x.cells[i].sigma and not any(j != i and not x.cells[j].sigma for j in x.cofaces(i)))


def _maximal_only(polyhedra: list[Polyhedron]) -> list[Polyhedron]:
    unique = list({p.key: p for p in polyhedra}.values())
    return [p for p in unique if not any(q != p and q.contains(p) for q in unique)]


def core_complex(x: WeightedComplex, strat: DualStratification) -> PolyComplex:
    """The common refinement of X ∩ rQ_{0} with the barycentric cells."""
    pieces = []
    for cell in finite_part(x).maximal_cells():
        for simplex in strat.barycentric_simplices():
            meet = cell.intersection(simplex)
            if not meet.is_empty:
                pieces.append(meet)
    return PolyComplex.from_maximal(_maximal_only(pieces))


def _refines_barycentric(core: PolyComplex, strat: DualStratification) -> Polyhedron | None:
    simplices = strat.barycentric_simplices()
    for cell in core.maximal_cells():
        if not any(s.contains(cell) for s in simplices):
            return cell
    return None


def extend_structure(x: WeightedComplex, strat: DualStratification, core: PolyComplex, k: int) -> PolyComplex:
    """The cells closure(U + τ) over core cells U inside closure(rP_τ), as a complex in N_R."""
    finite = finite_part(x)
    ok, witness = verify_stratification(strat, finite)
    if not ok:
        raise ValueError(f"stratification does not decompose X; witness {witness}")
    for cell in core.maximal_cells():
        if not is_unimodular_cell(cell, k):
            raise ValueError(f"core cell {cell} is not (1/{k})N-unimodular")
    outside = _refines_barycentric(core, strat)
    if outside is not None:
        raise ValueError(f"core cell {outside} is not inside a barycentric cell")
    fan = strat.fan
    cells = []
    for u in core.cells:
        for tau in fan.cones:
            if any(piece.contains(u) for piece in strat.rp_closure(tau)):
                cells.append(minkowski_sum(u, fan.cone_polyhedron(tau)))
    lam = PolyComplex.from_maximal(_maximal_only(cells))
    lam.check_complex()
    return lam


def structured_complex(x: WeightedComplex, lam: PolyComplex) -> WeightedComplex:
    """X with the structure Λ and weights transported from the cells of X containing each cell."""
    finite = [x.cells[i].finite for i in x.top_cells()]
    weights = [x.weight(i) for i in x.top_cells()]
    maximal = []
    for cell in lam.maximal_cells():
        owner = [w for p, w in zip(finite, weights) if p.contains(cell)]
        if not owner:
            raise ValueError(f"cell {cell} is not inside a top cell of X")
        maximal.append((cell, owner[0]))
    return WeightedComplex.from_polyhedra(x.ambient, maximal)


@dataclass
class StructureReport:
    support_ok: bool
    unimodular_ok: bool
    finer_ok: bool
    support_witness: Sequence | None = None
    non_unimodular: list[Polyhedron] = field(default_factory=list)
    crossing: list[Polyhedron] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.support_ok and self.unimodular_ok and self.finer_ok


def certify_structure(x: WeightedComplex | PolyComplex, lam: PolyComplex, k: int, sigma_bar: Fan) -> StructureReport:
    """Support equality in N_R, (1/k)N-unimodularity of maximal cells, and containment in cones of Σ."""
    target = finite_part(x) if isinstance(x, WeightedComplex) else x
    support_ok, witness = unions_equal([SemiOpenPolyhedron(p) for p in lam.maximal_cells()],
                                       [SemiOpenPolyhedron(p) for p in target.maximal_cells()])
    non_unimodular = [p for p in lam.maximal_cells() if not is_unimodular_cell(p, k, sigma_bar)]
    cones = [sigma_bar.cone_polyhedron(c) for c in sigma_bar.cones]
    crossing = [p for p in lam.maximal_cells() if not any(c.contains(p) for c in cones)]
    return StructureReport(support_ok, not non_unimodular, not crossing, witness, non_unimodular, crossing)


def unimodular_structure(x: WeightedComplex, strat: DualStratification) -> tuple[int, PolyComplex]:
    """Core refinement, compact unimodularization and extension in one call."""
    k, core = unimodularize_compact(core_complex(x, strat))
    return k, extend_structure(x, strat, core, k)
