"""Tropical toric varieties Trop(T_Σ), extended polyhedra and weighted complexes.

Each cone σ gets one adapted lattice basis B_σ whose first columns are the rays of
σ.  The stratum N_σ = N / span(σ) is then coordinatized by the remaining rows of
B_σ^-1, so every quotient map between strata is an explicit integer matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

from .exactlin import (
    complete_to_basis,
    dense_kernel,
    dense_rank,
    dense_solve,
    integer_inverse,
    saturation_basis,
    smith_normal_form,
)
from .polyhedra import (
    Fan,
    Polyhedron,
    SemiOpenPolyhedron,
    union_difference_witness,
    Vector,
    cone,
    dot,
    integer_scaled,
    product_polyhedron,
    sub,
    zero,
)

Cone = frozenset


def mat_vec(matrix: Sequence[Sequence], x: Sequence) -> Vector:
    return tuple(dot(row, x) for row in matrix)


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence], inner: int) -> list[list]:
    if not a:
        return []
    columns = len(b[0]) if b else 0
    return [[sum((a[i][k] * b[k][j] for k in range(inner)), 0) for j in range(columns)]
            for i in range(len(a))]


class AmbientFan:
    """A fan Σ in N_R together with adapted coordinates on every stratum N_σ."""

    def __init__(self, fan: Fan, bases: dict[Cone, tuple[tuple[int, ...], ...]] | None = None):
        self.fan = fan
        self.n = fan.n
        self._bases: dict[Cone, tuple[tuple[int, ...], ...]] = dict(bases or {})
        self._image_cache: dict = {}

    @classmethod
    def from_rays(cls, n: int, rays, cones) -> "AmbientFan":
        return cls(Fan(n, rays, cones))

    @classmethod
    def torus(cls, n: int) -> "AmbientFan":
        return cls(Fan(n, [], []))

    @property
    def rays(self):
        return self.fan.rays

    @property
    def cones(self):
        return self.fan.cones

    @cached_property
    def is_unimodular(self) -> bool:
        return self.fan.is_unimodular()

    @cached_property
    def is_complete(self) -> bool:
        return self.fan.is_complete()

    def normalize_cone(self, sigma: Iterable[int]) -> Cone:
        sigma = frozenset(sigma)
        if sigma not in self.fan:
            raise ValueError(f"{sorted(sigma)} is not a cone of the ambient fan")
        return sigma

    def cone_dim(self, sigma: Cone) -> int:
        return self.fan.dim_of(sigma)

    def quotient_rank(self, sigma: Cone) -> int:
        return self.n - self.cone_dim(sigma)

    def basis(self, sigma: Cone) -> tuple[tuple[int, ...], ...]:
        """Unimodular matrix whose first columns are the rays of σ in index order."""
        sigma = frozenset(sigma)
        if sigma not in self._bases:
            rays = [self.fan.rays[i] for i in sorted(sigma)]
            if len(rays) != self.cone_dim(sigma):
                raise ValueError(f"cone {sorted(sigma)} is not simplicial")
            self._bases[sigma] = complete_to_basis(rays, self.n)
        return self._bases[sigma]

    @cached_property
    def _inverse_cache(self) -> dict:
        return {}

    def _inverse(self, sigma: Cone):
        if sigma not in self._inverse_cache:
            self._inverse_cache[sigma] = integer_inverse(self.basis(sigma))
        return self._inverse_cache[sigma]

    def projection(self, sigma: Cone) -> tuple[tuple[int, ...], ...]:
        """Matrix of N -> N_σ in adapted coordinates."""
        s = self.cone_dim(sigma)
        return self._inverse(frozenset(sigma))[s:]

    def lift(self, sigma: Cone) -> list[list[int]]:
        """Matrix of a section N_σ -> N."""
        s = self.cone_dim(sigma)
        b = self.basis(sigma)
        return [list(row[s:]) for row in b]

    def quotient_map(self, sigma: Cone, tau: Cone) -> list[list[int]]:
        """Matrix of the natural map N_σ -> N_τ for σ ⊆ τ."""
        if not frozenset(sigma) <= frozenset(tau):
            raise ValueError("quotient map needs σ ⊆ τ")
        lift = self.lift(sigma)
        return mat_mul(self.projection(tau), lift, self.n)

    def section(self, tau: Cone, sigma: Cone) -> list[list[int]]:
        """Matrix of a section N_τ -> N_σ of the quotient map."""
        return mat_mul(self.projection(sigma), self.lift(tau), self.n)

    def image_cone(self, sigma: Cone, tau: Cone) -> Polyhedron:
        """The cone π_σ(τ) in N_σ."""
        key = (frozenset(sigma), frozenset(tau))
        if key not in self._image_cache:
            self._image_cache[key] = self._image_cone(*key)
        return self._image_cache[key]

    def _image_cone(self, sigma: Cone, tau: Cone) -> Polyhedron:
        projection = self.projection(sigma)
        m = self.quotient_rank(sigma)
        return cone(m, [mat_vec(projection, self.fan.rays[i]) for i in sorted(tau) if i not in sigma])

    def star(self, sigma: Cone) -> list[Cone]:
        return [tau for tau in self.fan.cones if sigma <= tau]

    def ray_image(self, sigma: Cone, ray_index: int) -> tuple[int, ...]:
        return tuple(int(x) for x in mat_vec(self.projection(sigma), self.fan.rays[ray_index]))

    def product(self, other: "AmbientFan") -> "AmbientFan":
        """Product fan with block-diagonal adapted bases, so strata coordinates concatenate."""
        n1, n2 = self.n, other.n
        offset = len(self.rays)
        rays = [tuple(r) + (0,) * n2 for r in self.rays] + [(0,) * n1 + tuple(r) for r in other.rays]
        cones = [set(a) | {offset + i for i in b}
                 for a in self.fan.maximal_cones() for b in other.fan.maximal_cones()]
        fan = Fan(n1 + n2, rays, cones)
        bases = {}
        for a in self.cones:
            for b in other.cones:
                s1, s2 = self.cone_dim(a), other.cone_dim(b)
                b1, b2 = self.basis(a), other.basis(b)
                col1 = [[b1[i][j] for i in range(n1)] + [0] * n2 for j in range(n1)]
                col2 = [[0] * n1 + [b2[i][j] for i in range(n2)] for j in range(n2)]
                columns = col1[:s1] + col2[:s2] + col1[s1:] + col2[s2:]
                matrix = tuple(tuple(columns[j][i] for j in range(n1 + n2)) for i in range(n1 + n2))
                bases[frozenset(a) | frozenset(offset + i for i in b)] = matrix
        return AmbientFan(fan, bases)


@dataclass(frozen=True)
class ExtendedCell:
    """The closure in Trop(T_Σ) of a polyhedron living in the stratum N_σ."""

    sigma: Cone
    finite: Polyhedron

    @property
    def dim(self) -> int:
        return self.finite.dim

    @cached_property
    def key(self) -> tuple:
        return (tuple(sorted(self.sigma)), self.finite.key)

    def __lt__(self, other: "ExtendedCell") -> bool:
        return (self.dim, self.key) < (other.dim, other.key)

    def describe(self) -> str:
        return f"sed{sorted(self.sigma)}:{self.finite!r}"


def relative_interior_meets(c1: Polyhedron, c2: Polyhedron) -> bool:
    """Whether relint(c1) meets c2, for a pointed simplicial cone c1 and a cone c2.

    The intersection is a cone, so it meets relint(c1) iff each generator of c1 appears
    with positive coefficient in some ray of the intersection.
    """
    generators = list(c1.rays)
    if not generators:
        return True
    meet = c1.intersection(c2)
    columns = [[g[i] for g in generators] for i in range(c1.n)]
    seen = [False] * len(generators)
    for ray in meet.rays:
        coefficients = dense_solve(columns, list(ray), len(generators))
        for k, c in enumerate(coefficients):
            if c > 0:
                seen[k] = True
    return all(seen)


@lru_cache(maxsize=4096)
def recession_of(p: Polyhedron) -> Polyhedron:
    return cone(p.n, p.rays, p.lines)


def closure_cells(q: ExtendedCell | Polyhedron, ambient: AmbientFan, sigma: Iterable[int] = ()
                  ) -> list[ExtendedCell]:
    """All faces of the closure of q in Trop(T_Σ), including q itself.

    A face R of q reaches the stratum of τ ⊇ σ exactly when rec(R) meets the relative
    interior of π_σ(τ); the resulting face is the image of R in N_τ.
    """
    if isinstance(q, Polyhedron):
        q = ExtendedCell(ambient.normalize_cone(sigma), q)
    if q.finite.is_empty:
        raise ValueError("cannot close an empty polyhedron")
    sigma = q.sigma
    out: dict[tuple, ExtendedCell] = {}
    for face in q.finite.faces:
        recession = recession_of(face)
        for tau in ambient.star(sigma):
            if not relative_interior_meets(ambient.image_cone(sigma, tau), recession):
                continue
            if tau == sigma:
                image = face
            else:
                image = face.linear_image(ambient.quotient_map(sigma, tau), ambient.quotient_rank(tau))
            cell = ExtendedCell(tau, image)
            out.setdefault(cell.key, cell)
    return sorted(out.values())


class WeightedComplex:
    """A rational polyhedral complex in Trop(T_Σ) with positive weights on its top cells."""

    def __init__(self, ambient: AmbientFan, cells: Sequence[ExtendedCell], faces: dict[int, set[int]],
                 weights: dict[int, int]):
        self.ambient = ambient
        self.cells = list(cells)
        self.faces = faces
        self.weights = dict(weights)
        self.index = {c.key: i for i, c in enumerate(self.cells)}
        self.dim = max((c.dim for c in self.cells), default=-1)

    @classmethod
    def from_maximal(cls, ambient: AmbientFan, maximal: Sequence[tuple[ExtendedCell, int]]
                     ) -> "WeightedComplex":
        closures = []
        pool: dict[tuple, ExtendedCell] = {}
        for cell, _ in maximal:
            faces = closure_cells(cell, ambient)
            closures.append(faces)
            for f in faces:
                pool.setdefault(f.key, f)
        cells = sorted(pool.values())
        index = {c.key: i for i, c in enumerate(cells)}
        faces_of: dict[int, set[int]] = {i: {i} for i in range(len(cells))}
        done = set()
        for group in closures:
            for c in group:
                if c.key in done:
                    continue
                done.add(c.key)
                faces_of[index[c.key]] = {index[f.key] for f in closure_cells(c, ambient)}
        weights = {}
        for cell, w in maximal:
            if int(w) <= 0:
                raise ValueError(f"weight {w} is not positive")
            weights[index[cell.key]] = int(w)
        complex_ = cls(ambient, cells, faces_of, weights)
        top = [i for i, c in enumerate(cells) if c.dim == complex_.dim]
        for i in top:
            if i not in weights:
                raise ValueError(f"top cell {cells[i].describe()} has no weight")
        lower = [i for i in weights if cells[i].dim != complex_.dim]
        if lower:
            raise ValueError("complex is not pure: weighted cell of lower dimension")
        for i, c in enumerate(cells):
            if not any(i in faces_of[j] for j in top):
                raise ValueError(f"complex is not pure: cell {c.describe()} lies in no top cell")
        return complex_

    @classmethod
    def from_polyhedra(cls, ambient: AmbientFan, maximal: Sequence[tuple[Polyhedron, int]]
                       ) -> "WeightedComplex":
        return cls.from_maximal(ambient, [(ExtendedCell(frozenset(), p), w) for p, w in maximal])

    # structure
    def cofaces(self, i: int) -> list[int]:
        return [j for j, fs in self.faces.items() if i in fs]

    def facets_of(self, i: int) -> list[int]:
        """Faces of codimension one."""
        d = self.cells[i].dim
        return [j for j in self.faces[i] if self.cells[j].dim == d - 1]

    def cells_of_dim(self, k: int) -> list[int]:
        return [i for i, c in enumerate(self.cells) if c.dim == k]

    def top_cells(self) -> list[int]:
        return self.cells_of_dim(self.dim)

    def weight(self, i: int) -> int:
        return self.weights[i]

    @cached_property
    def is_compact(self) -> bool:
        """Whether every recession cone is covered by the image of the star of its stratum."""
        for c in self.cells:
            if c.finite.is_bounded:
                continue
            recession = recession_of(c.finite)
            covering = [SemiOpenPolyhedron(self.ambient.image_cone(c.sigma, tau))
                        for tau in self.ambient.star(c.sigma)]
            if union_difference_witness([SemiOpenPolyhedron(recession)], covering) is not None:
                return False
        return True

    def find(self, cell: ExtendedCell) -> int:
        if cell.key not in self.index:
            raise ValueError(f"cell {cell.describe()} is not in the complex")
        return self.index[cell.key]

    def tangent_basis(self, i: int) -> list[tuple[int, ...]]:
        return self.cells[i].finite.tangent_basis()

    def product(self, other: "WeightedComplex") -> "WeightedComplex":
        ambient = self.ambient.product(other.ambient)
        offset = len(self.ambient.rays)
        maximal = []
        for i in self.top_cells():
            for j in other.top_cells():
                a, b = self.cells[i], other.cells[j]
                sigma = frozenset(a.sigma) | frozenset(offset + k for k in b.sigma)
                maximal.append((ExtendedCell(sigma, product_polyhedron(a.finite, b.finite)),
                                self.weights[i] * other.weights[j]))
        return WeightedComplex.from_maximal(ambient, maximal)

    def subcomplex_indices(self, cells: Iterable[int]) -> set[int]:
        """Closure under faces of a set of cell indices."""
        out = set()
        for i in cells:
            out |= self.faces[i]
        return out


def point_complex() -> WeightedComplex:
    ambient = AmbientFan.torus(0)
    return WeightedComplex.from_polyhedra(ambient, [(Polyhedron.from_generators(0, [()]), 1)])


# balancing

def primitive_normal(p: Polyhedron, q: Polyhedron) -> tuple[int, ...]:
    """The primitive vector v_{P,Q}: generator of Tan_Z(P)/Tan_Z(Q) pointing into P."""
    n = p.n
    basis_p = saturation_basis(p.directions, n)
    basis_q = saturation_basis(q.directions, n)
    d = len(basis_p)
    columns = [[b[i] for b in basis_p] for i in range(n)]
    coords_q = [dense_solve(columns, list(v), d) for v in basis_q]
    functional = dense_kernel(coords_q, d) if coords_q else [[Fraction(int(i == 0)) for i in range(d)]]
    if len(functional) != 1:
        raise ValueError("faces are not of codimension one")
    phi = integer_scaled(functional[0])
    inward = sub(p.relative_interior_point(), q.relative_interior_point())
    inward_coords = dense_solve(columns, list(inward), d)
    if dot(phi, inward_coords) < 0:
        phi = tuple(-x for x in phi)
    u, _, v = smith_normal_form([list(phi)])
    coefficients = [v[k][0] * u[0][0] for k in range(d)]
    g = tuple(sum(c * b[i] for c, b in zip(coefficients, basis_p)) for i in range(n))
    assert dot(phi, coefficients) == 1
    return g


def check_balancing(x: WeightedComplex) -> tuple[bool, list[dict]]:
    """Verify Σ w_P v_{P,Q} ∈ Tan(Q) at every codimension-one cell, over cofaces of equal sedentarity."""
    witnesses = []
    for qi in x.cells_of_dim(x.dim - 1):
        q = x.cells[qi]
        cofaces = [pi for pi in x.cofaces(qi) if x.cells[pi].dim == x.dim and x.cells[pi].sigma == q.sigma]
        if not cofaces:
            continue
        total = zero(q.finite.n)
        for pi in cofaces:
            v = primitive_normal(x.cells[pi].finite, q.finite)
            total = tuple(t + x.weights[pi] * c for t, c in zip(total, v))
        directions = list(q.finite.directions)
        if dense_rank(directions + [total], q.finite.n) > dense_rank(directions, q.finite.n):
            witnesses.append({"cell": qi, "description": q.describe(),
                              "sum": [str(c) for c in total]})
    return not witnesses, witnesses


def check_regular_at_infinity(x: WeightedComplex) -> tuple[bool, list[dict]]:
    """Each face reaching a deeper stratum τ must contain the full image cone π_σ(τ) in its recession cone."""
    if not x.ambient.is_unimodular:
        raise ValueError("ambient fan is not unimodular")
    witnesses = []
    ambient = x.ambient
    for i, cell in enumerate(x.cells):
        for face in cell.finite.faces:
            recession = recession_of(face)
            for tau in ambient.star(cell.sigma):
                if tau == cell.sigma:
                    continue
                image = ambient.image_cone(cell.sigma, tau)
                if relative_interior_meets(image, recession) and not recession.contains(image):
                    witnesses.append({"cell": i, "description": cell.describe(), "stratum": sorted(tau)})
    return not witnesses, witnesses


def star_fan(x: WeightedComplex, cell: ExtendedCell | int) -> WeightedComplex:
    """Fan of cofaces (of equal sedentarity) modulo Tan(cell), with inherited weights, in a torus."""
    qi = cell if isinstance(cell, int) else x.find(cell)
    q = x.cells[qi]
    m = q.finite.n
    tangent = saturation_basis(q.finite.directions, m)
    full = complete_to_basis(tangent, m) if tangent else tuple(tuple(int(i == j) for j in range(m)) for i in range(m))
    inverse = integer_inverse(full)
    projection = inverse[len(tangent):]
    k = m - len(tangent)
    base = q.finite.relative_interior_point()
    maximal = []
    for pi in x.cofaces(qi):
        p = x.cells[pi]
        if p.dim != x.dim or p.sigma != q.sigma:
            continue
        generators = [sub(v, base) for v in p.finite.vertices] + list(p.finite.rays) + list(p.finite.lines)
        images = [mat_vec(projection, g) for g in generators]
        lines = [mat_vec(projection, l) for l in p.finite.lines]
        maximal.append((cone(k, [g for g in images if any(c != 0 for c in g)], lines), x.weights[pi]))
    if not maximal:
        maximal = [(cone(k), 1)]
    return WeightedComplex.from_polyhedra(AmbientFan.torus(k), maximal)
