"""Rational polyhedra, cones, fans and polyhedral complexes with exact arithmetic.

Polyhedra keep both an H-representation and a V-representation, converted with
the double description method.  Half-open sets such as the strata rP_σ are
closed polyhedra minus a list of excluded faces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from itertools import combinations
from math import gcd
from typing import Iterable, Sequence

import gmpy2
from gmpy2 import mpq, mpz

from .exactlin import (
    dense_kernel,
    dense_rank,
    dense_rref,
    dense_solve,
    elementary_divisors,
    primitive_direction,
    to_rat,
)

Vector = tuple[Fraction, ...]


# vector helpers

def vec(values: Iterable) -> Vector:
    return tuple(to_rat(x) for x in values)


def dot(a: Sequence, b: Sequence) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def add(a: Sequence, b: Sequence) -> Vector:
    return tuple(x + y for x, y in zip(a, b))


def sub(a: Sequence, b: Sequence) -> Vector:
    return tuple(x - y for x, y in zip(a, b))


def scale(c, a: Sequence) -> Vector:
    return tuple(c * x for x in a)


def zero(n: int) -> Vector:
    return tuple(Fraction(0) for _ in range(n))


def integer_scaled(a: Sequence) -> tuple[int, ...]:
    """Primitive integer vector positively proportional to a nonzero rational vector."""
    return primitive_direction(a)


def rank_of(vectors: Sequence[Sequence], n: int) -> int:
    return dense_rank(vectors, n)


def _orthogonal_projector(basis: Sequence[Vector], n: int):
    """Projection onto the orthogonal complement of span(basis)."""
    if not basis:
        return lambda x: tuple(x)
    reduced, _ = dense_rref(basis, n)
    orthogonal = dense_kernel(reduced, n)
    # x = Σ c_i w_i + (component in span(basis)); solve on the complement basis
    if not orthogonal:
        return lambda x: zero(n)
    gram = [[dot(u, w) for w in orthogonal] for u in orthogonal]

    def apply(x):
        coeffs = dense_solve(gram, [dot(u, x) for u in orthogonal], len(orthogonal))
        out = zero(n)
        for c, w in zip(coeffs, orthogonal):
            out = add(out, scale(c, w))
        return out

    return apply


def _canonical_subspace(basis: Sequence[Sequence], n: int) -> tuple[tuple[int, ...], ...]:
    """Reduced echelon basis of a subspace, rows scaled to primitive integers."""
    if not basis:
        return ()
    reduced, _ = dense_rref(basis, n)
    return tuple(integer_scaled(row) for row in reduced)


# double description (internally on gmpy2 rationals for speed)

def _mpq(x):
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


def _mdot(a, b):
    total = mpq(0)
    for x, y in zip(a, b):
        if x and y:
            total += x * y
    return total


def _mprimitive(v):
    """Positive rescaling of a nonzero rational vector to a primitive integer vector."""
    denominator = mpz(1)
    for x in v:
        denominator = gmpy2.lcm(denominator, x.denominator)
    scaled = [x * denominator for x in v]
    g = mpz(0)
    for x in scaled:
        g = gmpy2.gcd(g, x.numerator)
    return tuple(mpq(x.numerator // g) for x in scaled)


def _pointed_cone_rays(rows: list, w: int) -> list:
    """Extreme rays of the pointed cone {x in Q^w : a·x <= 0 for a in rows}; rows have rank w."""
    if w == 0:
        return []
    chosen: list[int] = []
    for i, a in enumerate(rows):
        if dense_rank([rows[j] for j in chosen] + [a], w, _mpq) > len(chosen):
            chosen.append(i)
        if len(chosen) == w:
            break
    square = [rows[i] for i in chosen]
    rays: list = []
    zeros: list[set[int]] = []
    for j in range(w):
        solution = dense_solve(square, [mpq(int(k == j)) for k in range(w)], w, _mpq)
        rays.append(_mprimitive([-x for x in solution]))
        zeros.append({chosen[k] for k in range(w) if k != j})
    for i, a in enumerate(rows):
        if i in chosen:
            continue
        values = [_mdot(a, r) for r in rays]
        positive = [k for k, s in enumerate(values) if s > 0]
        negative = [k for k, s in enumerate(values) if s < 0]
        if not positive:
            for k, s in enumerate(values):
                if s == 0:
                    zeros[k].add(i)
            continue
        new_rays: list = []
        new_zeros: list[set[int]] = []
        for p in positive:
            for q in negative:
                common = zeros[p] & zeros[q]
                if len(common) < w - 2:
                    continue
                if any(k != p and k != q and common <= zeros[k] for k in range(len(rays))):
                    continue
                combo = [values[p] * y - values[q] * x for x, y in zip(rays[p], rays[q])]
                new_rays.append(_mprimitive(combo))
                new_zeros.append(common | {i})
        keep = [k for k in range(len(rays)) if values[k] <= 0]
        for k in keep:
            if values[k] == 0:
                zeros[k].add(i)
        rays = [rays[k] for k in keep] + new_rays
        zeros = [zeros[k] for k in keep] + new_zeros
    return rays


def cone_generators(inequalities: Sequence[Sequence], equations: Sequence[Sequence], d: int
                    ) -> tuple[list[Vector], list[Vector]]:
    """(lines, extreme rays) of {x : a·x <= 0, e·x = 0}.

    Rays are returned modulo the lineality space, orthogonally projected onto its complement.
    """
    inequalities = [[_mpq(x) for x in a] for a in inequalities]
    equations = [[_mpq(x) for x in e] for e in equations if any(x != 0 for x in e)]
    identity = lambda k: [[mpq(int(i == j)) for i in range(k)] for j in range(k)]
    subspace = dense_kernel(equations, d, _mpq) if equations else identity(d)
    s = len(subspace)
    if s == 0:
        return [], []
    restricted = [[_mdot(a, b) for b in subspace] for a in inequalities]
    lineality = dense_kernel(restricted, s, _mpq) if restricted else identity(s)
    complement, _ = dense_rref(restricted, s, _mpq) if restricted else ([], [])

    def lift(coords, basis):
        out = [mpq(0)] * len(basis[0])
        for c, b in zip(coords, basis):
            if c:
                out = [x + c * y for x, y in zip(out, b)]
        return out

    rays = []
    if complement:
        reduced_rows = [[_mdot(row, w) for w in complement] for row in restricted]
        for r in _pointed_cone_rays(reduced_rows, len(complement)):
            rays.append(lift(lift(r, complement), subspace))
    lines = [lift(l, subspace) for l in lineality]
    if lines:
        reduced_lines, _ = dense_rref(lines, d, _mpq)
        orthogonal = dense_kernel(reduced_lines, d, _mpq)
        gram = [[_mdot(u, w) for w in orthogonal] for u in orthogonal]
        projected = []
        for r in rays:
            coeffs = dense_solve(gram, [_mdot(u, r) for u in orthogonal], len(orthogonal), _mpq)
            projected.append(_mprimitive(lift(coeffs, orthogonal)))
        rays = projected
    to_fraction = lambda v: tuple(Fraction(int(x.numerator), int(x.denominator)) for x in v)
    return [to_fraction(l) for l in lines], [to_fraction(r) for r in rays]


# polyhedra

class Polyhedron:
    """A rational polyhedron in Q^n with cached H- and V-representations.

    H-rep: ``inequalities`` a·x <= b and ``equations`` a·x = b, a integral.
    V-rep: ``vertices`` (rational), ``rays`` and ``lines`` (primitive integral).
    Vertices and rays lie in the orthogonal complement of the lineality space.
    """

    __slots__ = ("n", "inequalities", "equations", "vertices", "rays", "lines", "__dict__")

    def __init__(self, n: int, inequalities, equations, vertices, rays, lines):
        self.n = n
        self.inequalities = inequalities
        self.equations = equations
        self.vertices = vertices
        self.rays = rays
        self.lines = lines

    # construction
    @classmethod
    def from_generators(cls, n: int, vertices: Sequence[Sequence] = (), rays: Sequence[Sequence] = (),
                        lines: Sequence[Sequence] = ()) -> "Polyhedron":
        vertices = [vec(v) for v in vertices]
        rays = [vec(r) for r in rays if any(to_rat(x) != 0 for x in r)]
        lines = [vec(l) for l in lines if any(to_rat(x) != 0 for x in l)]
        for item in vertices + rays + lines:
            if len(item) != n:
                raise ValueError(f"generator {item} does not have length {n}")
        if not vertices:
            if rays or lines:
                raise ValueError("a nonempty polyhedron needs at least one vertex")
            return cls._empty(n)
        generators = [v + (Fraction(1),) for v in vertices] + [r + (Fraction(0),) for r in rays]
        line_generators = [l + (Fraction(0),) for l in lines]
        # the polar cone {(a, c) : (a, c)·g <= 0} yields facets as rays and equations as lines
        polar_lines, polar_rays = cone_generators(generators, line_generators, n + 1)
        inequalities = []
        for ray in polar_rays:
            a, c = ray[:n], ray[n]
            if all(x == 0 for x in a):
                continue
            inequalities.append((a, -c))
        equations = [(l[:n], -l[n]) for l in polar_lines]
        return cls._from_h_and_check(n, inequalities, equations)

    @classmethod
    def from_inequalities(cls, n: int, inequalities: Sequence[tuple[Sequence, object]] = (),
                          equations: Sequence[tuple[Sequence, object]] = ()) -> "Polyhedron":
        for a, _ in list(inequalities) + list(equations):
            if len(a) != n:
                raise ValueError(f"normal {a} does not have length {n}")
        cone_rows = [vec(a) + (-to_rat(b),) for a, b in inequalities]
        cone_rows.append(zero(n) + (Fraction(-1),))
        cone_equations = [vec(a) + (-to_rat(b),) for a, b in equations]
        lines, rays = cone_generators(cone_rows, cone_equations, n + 1)
        if any(l[n] != 0 for l in lines):
            raise AssertionError("homogenized cone has lineality with nonzero height")
        vertices = [scale(1 / r[n], r[:n]) for r in rays if r[n] > 0]
        if not vertices:
            return cls._empty(n)
        plain_rays = [r[:n] for r in rays if r[n] == 0]
        return cls.from_generators(n, vertices, plain_rays, [l[:n] for l in lines])

    @classmethod
    def _empty(cls, n: int) -> "Polyhedron":
        return cls(n, ((zero(n), Fraction(-1)),), (), (), (), ())

    @classmethod
    def _from_h_and_check(cls, n, inequalities, equations) -> "Polyhedron":
        # canonical equations: reduced echelon rows of [A | b]
        eq_rows = _canonical_subspace([tuple(a) + (b,) for a, b in equations], n + 1)
        canon_eqs = tuple((tuple(Fraction(x) for x in row[:n]), Fraction(row[n])) for row in eq_rows)
        eq_normals = [a for a, _ in canon_eqs]
        project = _orthogonal_projector(eq_normals, n)
        canon_ineqs = set()
        for a, b in inequalities:
            a_proj = project(a)
            # shift b along the equations: b' = b - (a - a_proj)·x on the affine hull
            difference = sub(a, a_proj)
            if eq_normals:
                coeffs = dense_solve([[e[i] for e in eq_normals] for i in range(n)], difference,
                                     len(eq_normals))
                b = b - sum((c * rhs for c, (_, rhs) in zip(coeffs, canon_eqs)), Fraction(0))
            if all(x == 0 for x in a_proj):
                continue
            factor = _integer_factor(a_proj)
            canon_ineqs.add((tuple(Fraction(x * factor) for x in a_proj), b * factor))
        polyhedron = cls(n, tuple(sorted(canon_ineqs)), canon_eqs, (), (), ())
        return polyhedron._fill_v()

    def _fill_v(self) -> "Polyhedron":
        n = self.n
        cone_rows = [a + (-b,) for a, b in self.inequalities] + [zero(n) + (Fraction(-1),)]
        cone_eqs = [a + (-b,) for a, b in self.equations]
        lines, rays = cone_generators(cone_rows, cone_eqs, n + 1)
        vertices = sorted(scale(1 / r[n], r[:n]) for r in rays if r[n] > 0)
        plain_rays = sorted(vec(integer_scaled(r[:n])) for r in rays if r[n] == 0)
        canon_lines = tuple(vec(l) for l in _canonical_subspace([l[:n] for l in lines], n))
        self.vertices = tuple(vertices)
        self.rays = tuple(plain_rays)
        self.lines = canon_lines
        return self

    # basic queries
    @property
    def is_empty(self) -> bool:
        return not self.vertices

    @cached_property
    def key(self) -> tuple:
        return (self.n, self.vertices, self.rays, self.lines)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Polyhedron) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        show = lambda vs: "[" + ", ".join("(" + ", ".join(str(x) for x in v) + ")" for v in vs) + "]"
        parts = [f"vertices={show(self.vertices)}"]
        if self.rays:
            parts.append(f"rays={show(self.rays)}")
        if self.lines:
            parts.append(f"lines={show(self.lines)}")
        return f"Polyhedron(n={self.n}, " + ", ".join(parts) + ")"

    @cached_property
    def directions(self) -> tuple[Vector, ...]:
        """Spanning set of the linear space parallel to the affine hull."""
        base = self.vertices[0]
        return tuple(sub(v, base) for v in self.vertices[1:]) + self.rays + self.lines

    @cached_property
    def dim(self) -> int:
        if self.is_empty:
            return -1
        return rank_of(self.directions, self.n)

    @property
    def is_bounded(self) -> bool:
        return not self.rays and not self.lines

    @property
    def is_cone(self) -> bool:
        return len(self.vertices) == 1 and all(x == 0 for x in self.vertices[0])

    def contains_point(self, x: Sequence) -> bool:
        x = vec(x)
        return (all(dot(a, x) <= b for a, b in self.inequalities)
                and all(dot(a, x) == b for a, b in self.equations))

    def contains_direction(self, u: Sequence) -> bool:
        u = vec(u)
        return (all(dot(a, u) <= 0 for a, _ in self.inequalities)
                and all(dot(a, u) == 0 for a, _ in self.equations))

    def contains(self, other: "Polyhedron") -> bool:
        if other.is_empty:
            return True
        if self.is_empty:
            return False
        return (all(self.contains_point(v) for v in other.vertices)
                and all(self.contains_direction(r) for r in other.rays)
                and all(self.contains_direction(l) and self.contains_direction(scale(-1, l))
                        for l in other.lines))

    def relative_interior_point(self) -> Vector:
        if self.is_empty:
            raise ValueError("empty polyhedron has no points")
        total = zero(self.n)
        for v in self.vertices:
            total = add(total, v)
        point = scale(Fraction(1, len(self.vertices)), total)
        for r in self.rays:
            point = add(point, r)
        return point

    def in_relative_interior(self, x: Sequence) -> bool:
        x = vec(x)
        return self.contains_point(x) and all(dot(a, x) < b for a, b in self.inequalities)

    def intersection(self, other: "Polyhedron") -> "Polyhedron":
        if self.n != other.n:
            raise ValueError("ambient ranks differ")
        return Polyhedron.from_inequalities(self.n, self.inequalities + other.inequalities,
                                            self.equations + other.equations)

    def translate(self, t: Sequence) -> "Polyhedron":
        t = vec(t)
        return Polyhedron.from_generators(self.n, [add(v, t) for v in self.vertices], self.rays, self.lines)

    def linear_image(self, matrix: Sequence[Sequence], m: int) -> "Polyhedron":
        """Image under the linear map Q^n -> Q^m with the given m×n matrix."""
        apply = lambda x: tuple(dot(row, x) for row in matrix)
        return Polyhedron.from_generators(m, [apply(v) for v in self.vertices],
                                          [apply(r) for r in self.rays],
                                          [apply(l) for l in self.lines])

    def tangent_basis(self) -> list[tuple[int, ...]]:
        """Integral basis of the lattice of integer points of the tangent space."""
        from .exactlin import saturation_basis
        return saturation_basis(self.directions, self.n)

    def face_generators(self, functional: Sequence) -> "Polyhedron":
        """The face maximizing a linear functional that is bounded above on the polyhedron."""
        functional = vec(functional)
        if any(dot(functional, l) != 0 for l in self.lines) or any(dot(functional, r) > 0 for r in self.rays):
            raise ValueError("functional is unbounded")
        best = max(dot(functional, v) for v in self.vertices)
        return Polyhedron.from_generators(
            self.n, [v for v in self.vertices if dot(functional, v) == best],
            [r for r in self.rays if dot(functional, r) == 0], self.lines)

    @cached_property
    def faces(self) -> tuple["Polyhedron", ...]:
        """All nonempty faces, including the polyhedron itself, sorted by dimension."""
        if self.is_empty:
            raise ValueError("empty polyhedron has no face lattice")
        generators = [("v", i) for i in range(len(self.vertices))] + [("r", j) for j in range(len(self.rays))]
        facet_sets = []
        for a, b in self.inequalities:
            tight = frozenset([("v", i) for i, v in enumerate(self.vertices) if dot(a, v) == b]
                              + [("r", j) for j, r in enumerate(self.rays) if dot(a, r) == 0])
            facet_sets.append(tight)
        everything = frozenset(generators)
        seen = {everything}
        queue = [everything]
        while queue:
            current = queue.pop()
            for facet in facet_sets:
                smaller = current & facet
                if smaller not in seen and any(kind == "v" for kind, _ in smaller):
                    seen.add(smaller)
                    queue.append(smaller)
        out = []
        for gens in seen:
            out.append(Polyhedron.from_generators(
                self.n, [self.vertices[i] for kind, i in sorted(gens) if kind == "v"],
                [self.rays[j] for kind, j in sorted(gens) if kind == "r"], self.lines))
        return tuple(sorted(out, key=lambda f: (f.dim, f.key)))


def _integer_factor(a: Sequence[Fraction]) -> Fraction:
    """Positive factor turning a rational vector into a primitive integer vector."""
    denominator = reduce(lambda x, y: x * y // gcd(x, y), (x.denominator for x in a), 1)
    scaled = [int(x * denominator) for x in a]
    g = reduce(gcd, scaled, 0)
    return Fraction(denominator, g)


def cone(n: int, rays: Sequence[Sequence] = (), lines: Sequence[Sequence] = ()) -> Polyhedron:
    return Polyhedron.from_generators(n, [zero(n)], rays, lines)


def point(x: Sequence) -> Polyhedron:
    x = vec(x)
    return Polyhedron.from_generators(len(x), [x])


def recession_cone(p: Polyhedron) -> Polyhedron:
    """The cone C with p = (compact part) + C."""
    if p.is_empty:
        raise ValueError("empty polyhedron")
    return cone(p.n, p.rays, p.lines)


def minkowski_sum(p: Polyhedron, q: Polyhedron) -> Polyhedron:
    if p.n != q.n:
        raise ValueError("ambient ranks differ")
    vertices = [add(a, b) for a in p.vertices for b in q.vertices]
    return Polyhedron.from_generators(p.n, vertices, p.rays + q.rays, p.lines + q.lines)


def product_polyhedron(p: Polyhedron, q: Polyhedron) -> Polyhedron:
    n = p.n + q.n
    zp, zq = zero(p.n), zero(q.n)
    return Polyhedron.from_generators(
        n, [a + b for a in p.vertices for b in q.vertices],
        [r + zq for r in p.rays] + [zp + r for r in q.rays],
        [l + zq for l in p.lines] + [zp + l for l in q.lines])


# complexes and fans

@dataclass
class PolyComplex:
    """A polyhedral complex given by all its cells and the (transitive) face relation."""

    cells: list[Polyhedron]
    face_relation: set[tuple[int, int]] = field(default_factory=set)

    @classmethod
    def from_maximal(cls, maximal: Iterable[Polyhedron]) -> "PolyComplex":
        index: dict[Polyhedron, int] = {}
        cells: list[Polyhedron] = []
        relation: set[tuple[int, int]] = set()
        maximal = list(maximal)
        for cell in maximal:
            for face in cell.faces:
                if face not in index:
                    index[face] = len(cells)
                    cells.append(face)
        for cell in cells:
            for face in cell.faces:
                if face != cell:
                    relation.add((index[face], index[cell]))
        order = sorted(range(len(cells)), key=lambda i: (cells[i].dim, cells[i].key))
        renumber = {old: new for new, old in enumerate(order)}
        return cls([cells[i] for i in order], {(renumber[a], renumber[b]) for a, b in relation})

    def index(self, cell: Polyhedron) -> int:
        return self.cells.index(cell)

    @property
    def dim(self) -> int:
        return max((c.dim for c in self.cells), default=-1)

    def maximal_cells(self) -> list[Polyhedron]:
        parents = {a for a, _ in self.face_relation}
        return [c for i, c in enumerate(self.cells) if i not in parents]

    def contains_point(self, x: Sequence) -> bool:
        return any(c.contains_point(x) for c in self.cells)

    def check_complex(self) -> None:
        """Every pairwise intersection is empty or a common face."""
        for i, j in combinations(range(len(self.cells)), 2):
            meet = self.cells[i].intersection(self.cells[j])
            if meet.is_empty:
                continue
            if meet not in self.cells[i].faces or meet not in self.cells[j].faces:
                raise ValueError(f"cells {i} and {j} meet in {meet}, not a common face")


def face_lattice(p: Polyhedron) -> PolyComplex:
    """All faces of p with the inclusion relation."""
    if p.is_empty:
        raise ValueError("empty polyhedron has no face lattice")
    return PolyComplex.from_maximal([p])


class Fan:
    """A rational polyhedral fan given by primitive rays and cones as ray-index sets."""

    def __init__(self, n: int, rays: Sequence[Sequence[int]], cones: Iterable[Iterable[int]],
                 lineality: Sequence[Sequence[int]] = ()):
        self.n = n
        self.rays = tuple(tuple(int(x) for x in r) for r in rays)
        for r in self.rays:
            if len(r) != n:
                raise ValueError(f"ray {r} does not have length {n}")
            if tuple(integer_scaled(r)) != r:
                raise ValueError(f"ray {r} is not primitive")
        generated = {frozenset(c) for c in cones}
        closed = set()
        for c in generated:
            closed |= self._faces_of(c)
        closed.add(frozenset())
        self.cones = tuple(sorted(closed, key=lambda c: (len(c), sorted(c))))
        self._cone_set = set(self.cones)

    def _faces_of(self, c: frozenset) -> set[frozenset]:
        polyhedron = self.cone_polyhedron(c)
        out = set()
        for face in polyhedron.faces:
            out.add(frozenset(i for i in c if face.contains_direction(self.rays[i])))
        return out

    def cone_polyhedron(self, c: Iterable[int]) -> Polyhedron:
        return cone(self.n, [self.rays[i] for i in c])

    def __contains__(self, c) -> bool:
        return frozenset(c) in self._cone_set

    def dim_of(self, c: Iterable[int]) -> int:
        c = list(c)
        return rank_of([self.rays[i] for i in c], self.n) if c else 0

    def maximal_cones(self) -> list[frozenset]:
        return [c for c in self.cones if not any(c < d for d in self.cones)]

    def is_simplicial(self) -> bool:
        return all(self.dim_of(c) == len(c) for c in self.cones)

    def is_unimodular(self) -> bool:
        from .exactlin import extends_to_basis
        return self.is_simplicial() and all(
            extends_to_basis([self.rays[i] for i in sorted(c)], self.n) for c in self.maximal_cones())

    def is_complete(self) -> bool:
        maximal = self.maximal_cones()
        if any(self.dim_of(c) != self.n for c in maximal):
            return False
        if self.n == 0:
            return True
        walls: dict[frozenset, list[frozenset]] = {}
        for c in maximal:
            for wall in self._faces_of(c):
                if self.dim_of(wall) == self.n - 1:
                    walls.setdefault(wall, []).append(c)
        for wall, cofaces in walls.items():
            if len(cofaces) != 2:
                return False
            normal = dense_kernel([self.rays[i] for i in wall], self.n)[0]
            sides = []
            for c in cofaces:
                outside = [i for i in c if i not in wall]
                sides.append(dot(normal, self.rays[outside[0]]))
            if not (sides[0] * sides[1] < 0):
                return False
        return True

    def cone_containing(self, x: Sequence) -> frozenset | None:
        """The smallest cone containing the point x, or None."""
        best = None
        for c in self.cones:
            if self.cone_polyhedron(c).contains_point(x):
                if best is None or len(c) < len(best):
                    best = c
        return best

    def cone_with_relative_interior(self, x: Sequence) -> frozenset | None:
        for c in self.cones:
            if self.cone_polyhedron(c).in_relative_interior(x):
                return c
        return None

    def to_complex(self) -> PolyComplex:
        return PolyComplex.from_maximal(self.cone_polyhedron(c) for c in self.maximal_cones())


def projective_space_fan(n: int) -> Fan:
    """The fan of P^n: rays e_1..e_n and -(e_1+...+e_n), all proper subsets as cones."""
    rays = [tuple(int(i == j) for j in range(n)) for i in range(n)] + [tuple(-1 for _ in range(n))]
    return Fan(n, rays, [c for c in combinations(range(n + 1), n)])


def product_fan(first: Fan, second: Fan) -> Fan:
    n = first.n + second.n
    rays = [r + (0,) * second.n for r in first.rays] + [(0,) * first.n + r for r in second.rays]
    offset = len(first.rays)
    cones = [set(a) | {offset + i for i in b} for a in first.maximal_cones() for b in second.maximal_cones()]
    return Fan(n, rays, cones)


# half-open polyhedra

@dataclass(frozen=True)
class SemiOpenPolyhedron:
    """The set closure minus the union of the excluded faces (each a face of closure)."""

    closure: Polyhedron
    excluded: tuple[Polyhedron, ...] = ()

    @property
    def n(self) -> int:
        return self.closure.n

    def contains_point(self, x: Sequence) -> bool:
        return self.closure.contains_point(x) and not any(e.contains_point(x) for e in self.excluded)

    @property
    def is_empty(self) -> bool:
        if self.closure.is_empty:
            return True
        return any(e.contains(self.closure) for e in self.excluded)

    def witness_point(self) -> Vector:
        if self.is_empty:
            raise ValueError("empty set")
        return self.closure.relative_interior_point()

    def intersection(self, other: "SemiOpenPolyhedron | Polyhedron") -> "SemiOpenPolyhedron":
        if isinstance(other, Polyhedron):
            other = SemiOpenPolyhedron(other)
        meet = self.closure.intersection(other.closure)
        if meet.is_empty:
            return SemiOpenPolyhedron(meet)
        excluded = []
        for e in self.excluded + other.excluded:
            piece = e.intersection(meet)
            if not piece.is_empty and piece not in excluded:
                excluded.append(piece)
        return SemiOpenPolyhedron(meet, tuple(excluded))

    def plus_cone(self, c: Polyhedron) -> "SemiOpenPolyhedron":
        """Minkowski sum with a closed cone.

        A face G of closure + c lies outside the sum exactly when the face of closure
        maximizing G's defining functional sits inside an excluded face.
        """
        total = minkowski_sum(self.closure, c)
        if self.is_empty:
            return SemiOpenPolyhedron(Polyhedron._empty(self.n))
        excluded = []
        for face in total.faces:
            functional = _defining_functional(total, face)
            base_face = self.closure.face_generators(functional)
            if any(e.contains(base_face) for e in self.excluded):
                excluded.append(face)
        excluded = [e for e in excluded if not any(e != f and f.contains(e) for f in excluded)]
        return SemiOpenPolyhedron(total, tuple(excluded))


def _defining_functional(p: Polyhedron, face: Polyhedron) -> Vector:
    """Sum of the facet normals tight on a face; zero for the whole polyhedron."""
    total = zero(p.n)
    x = face.relative_interior_point()
    for a, b in p.inequalities:
        if dot(a, x) == b:
            total = add(total, a)
    return total


def _hyperplanes(sets: Sequence[SemiOpenPolyhedron]) -> list[tuple[Vector, Fraction]]:
    out = []
    for s in sets:
        for polyhedron in (s.closure,) + s.excluded:
            for a, b in polyhedron.inequalities + polyhedron.equations:
                if (a, b) not in out:
                    out.append((a, b))
    return out


def h_to_v(n: int, inequalities, equations) -> tuple[list[Vector], list[Vector], list[Vector]]:
    """Uncanonicalized (vertices, rays, lines) of {a·x <= b, e·x = c}."""
    cone_rows = [vec(a) + (-to_rat(b),) for a, b in inequalities] + [zero(n) + (Fraction(-1),)]
    cone_eqs = [vec(a) + (-to_rat(b),) for a, b in equations]
    lines, rays = cone_generators(cone_rows, cone_eqs, n + 1)
    vertices = [scale(1 / r[n], r[:n]) for r in rays if r[n] > 0]
    return vertices, [r[:n] for r in rays if r[n] == 0], [l[:n] for l in lines]


def _cell_generators(region: list[tuple[Vector, Fraction, str]], n: int):
    """Generators of the closure of {a·x (<=, <, =) b}, or None when the set is empty."""
    closed = [(a, b) for a, b, kind in region if kind in ("<=", "<")]
    equal = [(a, b) for a, b, kind in region if kind == "="]
    vertices, rays, lines = h_to_v(n, closed, equal)
    if not vertices:
        return None
    for a, b, kind in region:
        if kind == "<":
            if (all(dot(a, v) == b for v in vertices) and all(dot(a, u) == 0 for u in rays)
                    and all(dot(a, l) == 0 for l in lines)):
                return None
    return vertices, rays, lines


def _generic_point(generators) -> Vector:
    vertices, rays, _ = generators
    point = scale(Fraction(1, len(vertices)), reduce(add, vertices))
    for u in rays:
        point = add(point, u)
    return point


def _nonempty(region: list[tuple[Vector, Fraction, str]], n: int) -> Vector | None:
    """A relative-interior point of {a·x (<=, <, =) b}, or None when the set is empty."""
    generators = _cell_generators(region, n)
    return None if generators is None else _generic_point(generators)


def arrangement_points(start: list[tuple[Vector, Fraction, str]], planes, n: int) -> list[Vector]:
    """One relative-interior point per nonempty cell of the arrangement inside a region."""
    first = _cell_generators(start, n)
    if first is None:
        return []
    cells = [(start, first)]
    for a, b in planes:
        refined = []
        for region, (vertices, rays, lines) in cells:
            below = (any(dot(a, v) < b for v in vertices) or any(dot(a, u) < 0 for u in rays)
                     or any(dot(a, l) != 0 for l in lines))
            above = (any(dot(a, v) > b for v in vertices) or any(dot(a, u) > 0 for u in rays)
                     or any(dot(a, l) != 0 for l in lines))
            if not below and not above:
                refined.append((region, (vertices, rays, lines)))
                continue
            options = [("=", a, b)]
            if below:
                options.append(("<", a, b))
            if above:
                options.append(("<", scale(-1, a), -b))
            for kind, normal, rhs in options:
                candidate = region + [(normal, rhs, kind)]
                generators = _cell_generators(candidate, n)
                if generators is not None:
                    refined.append((candidate, generators))
        cells = refined
    return [_generic_point(g) for _, g in cells]


def union_difference_witness(first: Sequence[SemiOpenPolyhedron], second: Sequence[SemiOpenPolyhedron]
                             ) -> Vector | None:
    """A point of (∪ first) minus (∪ second), or None when the first union is contained in the second.

    Works on the arrangement of every hyperplane appearing in either family: each set is a
    union of arrangement cells, so testing one relative-interior point per cell is exact.
    """
    first = [s for s in first if not s.is_empty]
    if not first:
        return None
    n = first[0].n
    planes = _hyperplanes(list(first) + list(second))
    for s in first:
        start = [(a, b, "<=") for a, b in s.closure.inequalities] + [(a, b, "=") for a, b in s.closure.equations]
        for x in arrangement_points(start, planes, n):
            if s.contains_point(x) and not any(t.contains_point(x) for t in second):
                return x
    return None


def unions_equal(first, second) -> tuple[bool, Vector | None]:
    witness = union_difference_witness(first, second)
    if witness is None:
        witness = union_difference_witness(second, first)
    return witness is None, witness


# dual stratification

@dataclass
class DualStratification:
    """The sets rQ_σ and rP_σ attached to a complete unimodular fan and a scale r."""

    fan: Fan
    r: Fraction
    barycenters: dict[frozenset, Vector]
    q_cells: dict[frozenset, list[Polyhedron]]
    p_cells: dict[frozenset, list[SemiOpenPolyhedron]]
    flags: list[tuple[frozenset, ...]]

    def rq(self, sigma) -> list[Polyhedron]:
        return self.q_cells[frozenset(sigma)]

    def rp(self, sigma) -> list[SemiOpenPolyhedron]:
        return self.p_cells[frozenset(sigma)]

    def rp_closure(self, sigma) -> list[Polyhedron]:
        return [s.closure for s in self.rp(sigma)]

    def barycentric_simplices(self) -> list[Polyhedron]:
        """The maximal cells P(σ_*) of the barycentric subdivision of rQ_{0}."""
        return [flag_cell(self, f) for f in self.flags if f[0] == frozenset()]


def flag_cell(strat: DualStratification, flag: Sequence[frozenset]) -> Polyhedron:
    return Polyhedron.from_generators(strat.fan.n, [strat.barycenters[s] for s in flag])


def _maximal_flags(fan: Fan, start: frozenset) -> list[tuple[frozenset, ...]]:
    out = []

    def extend(chain):
        bigger = [c for c in fan.cones if chain[-1] < c and len(c) == len(chain[-1]) + 1]
        if not bigger:
            out.append(tuple(chain))
            return
        for c in sorted(bigger, key=sorted):
            extend(chain + [c])

    extend([start])
    return out


def build_dual_stratification(sigma: Fan, r) -> DualStratification:
    """rQ_σ, the barycentric cells and the half-open strata rP_σ for a complete unimodular fan."""
    r = to_rat(r)
    if r <= 0:
        raise ValueError("r must be positive")
    if not sigma.is_complete():
        raise ValueError("fan is not complete")
    if not sigma.is_unimodular():
        raise ValueError("fan is not unimodular")
    n = sigma.n
    barycenters: dict[frozenset, Vector] = {frozenset(): zero(n)}
    for c in sigma.cones:
        if c:
            total = zero(n)
            for i in c:
                total = add(total, vec(sigma.rays[i]))
            barycenters[c] = scale(r / len(c), total)
    q_cells: dict[frozenset, list[Polyhedron]] = {}
    for c in sigma.cones:
        if c:
            q_cells[c] = [Polyhedron.from_generators(n, [scale(r, vec(sigma.rays[i])) for i in sorted(c)])]
    q_cells[frozenset()] = [
        Polyhedron.from_generators(n, [zero(n)] + [scale(r, vec(sigma.rays[i])) for i in sorted(c)])
        for c in sigma.maximal_cones()]
    strat = DualStratification(sigma, r, barycenters, q_cells, {}, [])
    all_flags = []
    for c in sigma.cones:
        flags = _maximal_flags(sigma, c)
        all_flags.extend(flags)
        pieces = []
        for flag in flags:
            simplex = flag_cell(strat, flag)
            if len(flag) == 1:
                pieces.append(SemiOpenPolyhedron(simplex))
                continue
            opposite = Polyhedron.from_generators(n, [barycenters[s] for s in flag[1:]])
            pieces.append(SemiOpenPolyhedron(simplex, (opposite,)))
        strat.p_cells[c] = pieces
    strat.flags = all_flags
    _check_partition(strat)
    return strat


def _check_partition(strat: DualStratification) -> None:
    whole = [SemiOpenPolyhedron(p) for p in strat.q_cells[frozenset()]]
    pieces = [s for c in strat.fan.cones for s in strat.p_cells[c]]
    ok, witness = unions_equal(whole, pieces)
    if not ok:
        raise AssertionError(f"strata do not cover rQ_0; witness {witness}")
    cones = list(strat.fan.cones)
    for i, j in combinations(range(len(cones)), 2):
        for s in strat.p_cells[cones[i]]:
            for t in strat.p_cells[cones[j]]:
                if not s.intersection(t).is_empty:
                    raise AssertionError(f"strata of {sorted(cones[i])} and {sorted(cones[j])} overlap")


def verify_stratification(strat: DualStratification, x: PolyComplex) -> tuple[bool, Vector | None]:
    """Check X ∩ (rP_τ + τ) = (X ∩ rP_τ) + τ for every cone τ.

    Since the sets rP_τ + τ partition N_R, this is the decomposition
    X = ⨆_τ (X ∩ rP_τ) + τ.  Returns a witness point on failure.
    """
    maximal = x.maximal_cells()
    for tau in strat.fan.cones:
        tau_cone = strat.fan.cone_polyhedron(tau)
        lhs, rhs = [], []
        for piece in strat.p_cells[tau]:
            shifted = piece.plus_cone(tau_cone)
            for cell in maximal:
                lhs.append(shifted.intersection(cell))
                meet = piece.intersection(cell)
                if not meet.is_empty:
                    rhs.append(meet.plus_cone(tau_cone))
        ok, witness = unions_equal(lhs, rhs)
        if not ok:
            return False, witness
    return True, None


def stratification_with_doubling(sigma: Fan, x: PolyComplex, r=1, max_doublings: int = 20
                                 ) -> DualStratification:
    """Double r until verify_stratification passes, at most max_doublings times."""
    r = to_rat(r)
    for _ in range(max_doublings + 1):
        strat = build_dual_stratification(sigma, r)
        ok, _ = verify_stratification(strat, x)
        if ok:
            return strat
        r *= 2
    raise ValueError(f"no valid stratification found up to r = {r / 2}")


# unimodularity

def is_unimodular_cell(p: Polyhedron, k: int, sigma_bar: Fan | None = None) -> bool:
    """Test whether p = Conv(v_0..v_r) + cone(u_j) with v_i - v_0, u_j / k part of a basis of N / k."""
    if p.is_empty or p.lines:
        return False
    vertices, rays = p.vertices, p.rays
    if any(x.denominator != 1 for v in vertices for x in scale(k, v)):
        return False
    if len(vertices) + len(rays) - 1 != p.dim:
        return False
    if sigma_bar is not None and rays:
        ray_index = {r: i for i, r in enumerate(sigma_bar.rays)}
        integral = [tuple(int(x) for x in r) for r in rays]
        if any(r not in ray_index for r in integral):
            return False
        if frozenset(ray_index[r] for r in integral) not in sigma_bar:
            return False
    columns = [[int(k * x) for x in sub(v, vertices[0])] for v in vertices[1:]]
    columns += [[int(x) for x in r] for r in rays]
    if not columns:
        return True
    matrix = [[columns[j][i] for j in range(len(columns))] for i in range(p.n)]
    divisors = elementary_divisors(matrix)
    return len(divisors) == len(columns) and all(d == 1 for d in divisors)
