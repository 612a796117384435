"""Named desk-scale tropical varieties used by the tests and the CLI corpus."""

from __future__ import annotations

from itertools import combinations

from .polyhedra import Fan, Polyhedron, cone, projective_space_fan
from .troptoric import AmbientFan, WeightedComplex, point_complex


def projective_ambient(n: int) -> AmbientFan:
    return AmbientFan(projective_space_fan(n))


def affine_line() -> AmbientFan:
    return AmbientFan.from_rays(1, [(1,)], [(0,)])


def whole_space(n: int) -> Polyhedron:
    basis = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    return Polyhedron.from_generators(n, [(0,) * n], lines=basis)


def trop_projective(n: int) -> WeightedComplex:
    """Trop(ℙⁿ) as the closure of N_ℝ."""
    if n == 0:
        return point_complex()
    return WeightedComplex.from_polyhedra(projective_ambient(n), [(whole_space(n), 1)])


def projective_line_one_vertex() -> WeightedComplex:
    """Trop(ℙ¹) with the structure {0}, [0,∞), (−∞,0]."""
    ambient = projective_ambient(1)
    return WeightedComplex.from_polyhedra(ambient, [(cone(1, [(1,)]), 1), (cone(1, [(-1,)]), 1)])


def projective_line_two_vertices() -> WeightedComplex:
    """Trop(ℙ¹) with vertices 0 and 1."""
    ambient = projective_ambient(1)
    return WeightedComplex.from_polyhedra(ambient, [
        (Polyhedron.from_generators(1, [(0,), (1,)]), 1),
        (Polyhedron.from_generators(1, [(1,)], [(1,)]), 1),
        (cone(1, [(-1,)]), 1),
    ])


def affine_line_closure() -> WeightedComplex:
    """ℝ ∪ {∞} inside Trop(𝔸¹)."""
    return WeightedComplex.from_polyhedra(affine_line(), [(whole_space(1), 1)])


def bergman_fan(n: int, d: int) -> WeightedComplex:
    """The fan of the uniform matroid of rank d+1 on n+1 elements, closed in Trop(ℙⁿ)."""
    ambient = projective_ambient(n)
    rays = ambient.fan.rays
    cells = [(cone(n, [rays[i] for i in subset]), 1) for subset in combinations(range(n + 1), d)]
    return WeightedComplex.from_polyhedra(ambient, cells)


def tropical_line() -> WeightedComplex:
    return bergman_fan(2, 1)


def tropical_plane() -> WeightedComplex:
    """The tropical plane in Trop(ℙ³)."""
    return bergman_fan(3, 2)


def smooth_cubic() -> WeightedComplex:
    """A smooth plane cubic of genus one: a lattice hexagon with three trivalent bridges."""
    ambient = projective_ambient(2)
    hexagon = [(0, 0), (-1, 0), (-2, -1), (-2, -2), (-1, -2), (0, -1)]
    bridges = [((0, 0), (1, 1)), ((-2, -1), (-3, -1)), ((-1, -2), (-1, -3))]
    rays = [((-1, 0), (0, 1)), ((-2, -2), (-1, -1)), ((0, -1), (1, 0)),
            ((1, 1), (1, 0)), ((1, 1), (0, 1)), ((-3, -1), (0, 1)), ((-3, -1), (-1, -1)),
            ((-1, -3), (1, 0)), ((-1, -3), (-1, -1))]
    cells = []
    for a, b in list(zip(hexagon, hexagon[1:] + hexagon[:1])) + bridges:
        cells.append((Polyhedron.from_generators(2, [a, b]), 1))
    for v, u in rays:
        cells.append((Polyhedron.from_generators(2, [v], [u]), 1))
    return WeightedComplex.from_polyhedra(ambient, cells)


def prism_fan() -> WeightedComplex:
    """A balanced 2-dimensional fan in ℝ³ whose link is a triangular prism, closed in its own toric variety.

    It is not locally matroidal and carries a class in bidegree (2,1).
    """
    rays = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (0, -1, -1), (-1, 0, -1), (-1, -1, 0)]
    cones = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (0, 3), (1, 4), (2, 5)]
    weights = [2, 2, 2, 1, 1, 1, 2, 2, 2]
    ambient = AmbientFan(Fan(3, rays, cones))
    cells = [(cone(3, [rays[i] for i in c]), w) for c, w in zip(cones, weights)]
    return WeightedComplex.from_polyhedra(ambient, cells)


def unbalanced_fan() -> WeightedComplex:
    """Two coordinate rays in Trop(𝔸²); the origin fails balancing."""
    ambient = AmbientFan.from_rays(2, [(1, 0), (0, 1)], [(0, 1)])
    return WeightedComplex.from_polyhedra(ambient, [(cone(2, [(1, 0)]), 1), (cone(2, [(0, 1)]), 1)])


def tilted_ray() -> WeightedComplex:
    """The ray (1,2) in Trop(𝔸²) with its endpoint declared on the torus-fixed point."""
    ambient = AmbientFan.from_rays(2, [(1, 0), (0, 1)], [(0, 1)])
    return WeightedComplex.from_polyhedra(ambient, [(Polyhedron.from_generators(2, [(0, 0)], [(1, 2)]), 1)])


def product_degeneration() -> WeightedComplex:
    """Trop(ℙ¹)² with the product of the two-vertex and one-vertex structures."""
    return projective_line_two_vertices().product(projective_line_one_vertex())


FAN_FIXTURES = {
    "tropical_line": tropical_line,
    "p1": lambda: trop_projective(1),
    "p2": lambda: trop_projective(2),
    "p1xp1": lambda: trop_projective(1).product(trop_projective(1)),
    "tropical_plane": tropical_plane,
}

DEGENERATIONS = {
    "p1_one_vertex": projective_line_one_vertex,
    "p1_two_vertices": projective_line_two_vertices,
    "p1xp1_product": product_degeneration,
    "smooth_cubic": smooth_cubic,
}


def line_times_p1() -> WeightedComplex:
    return tropical_line().product(trop_projective(1))


def corpus() -> dict[str, dict]:
    """The JSON documents shipped in the corpus directory, by file stem."""
    from .cli import to_document

    docs = {
        "tropical_line": to_document(tropical_line()),
        "p1": to_document(trop_projective(1)),
        "p2": to_document(trop_projective(2)),
        "p3": to_document(trop_projective(3)),
        "p1xp1": to_document(trop_projective(1).product(trop_projective(1))),
        "line_x_p1": to_document(line_times_p1()),
        "tropical_plane": to_document(tropical_plane()),
        "affine_line": to_document(affine_line_closure(), boundary=[0]),
        "p1_minus_point": to_document(trop_projective(1), boundary=[0]),
        "p2_minus_line": to_document(trop_projective(2), boundary=[0]),
        "p2_minus_two_lines": to_document(trop_projective(2), boundary=[0, 1]),
        "p1_one_vertex": to_document(projective_line_one_vertex(), smooth=True),
        "p1_two_vertices": to_document(projective_line_two_vertices(), smooth=True),
        "p1xp1_product": to_document(product_degeneration(), smooth=True),
        "smooth_cubic": to_document(smooth_cubic(), smooth=True),
        "nonmatroidal_prism": to_document(prism_fan(), smooth=True),
        "unbalanced": to_document(unbalanced_fan()),
        "tilted_ray": to_document(tilted_ray()),
    }
    zero = to_document(tropical_line())
    zero["weights"]["1"] = 0
    docs["weight_zero"] = zero
    long = to_document(tropical_plane())
    long["cells"][0]["vertices"][0] = [0, 0, 0, 0]
    docs["wrong_length"] = long
    bad_index = to_document(tropical_line())
    bad_index["ambient"]["cones"][0] = [0, 7]
    docs["index_out_of_range"] = bad_index
    return docs
