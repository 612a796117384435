from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from tropicoh.polyhedra import (
    Fan,
    PolyComplex,
    Polyhedron,
    SemiOpenPolyhedron,
    build_dual_stratification,
    cone,
    face_lattice,
    is_unimodular_cell,
    minkowski_sum,
    point,
    projective_space_fan,
    recession_cone,
    stratification_with_doubling,
    unions_equal,
    verify_stratification,
)

F = Fraction


def segment(a, b):
    return Polyhedron.from_generators(len(a), [a, b])


def unit_square():
    return Polyhedron.from_generators(2, [(0, 0), (1, 0), (0, 1), (1, 1)])


def test_face_counts():
    assert len(unit_square().faces) == 9
    assert len(segment((0,), (1,)).faces) == 3
    assert len(cone(2, [(1, 1)]).faces) == 2


def test_face_lattice_of_empty_polyhedron_is_an_error():
    empty = Polyhedron.from_inequalities(1, [((1,), -1), ((-1,), -1)])
    assert empty.is_empty
    with pytest.raises(ValueError):
        face_lattice(empty)


def test_h_and_v_representations_agree():
    square = Polyhedron.from_inequalities(2, [((1, 0), 1), ((-1, 0), 0), ((0, 1), 1), ((0, -1), 0)])
    assert square == unit_square()


def test_polyhedron_must_be_strongly_convex_only_where_required():
    plane = Polyhedron.from_generators(2, [(0, 0)], lines=[(1, 0), (0, 1)])
    assert plane.dim == 2 and plane.lines


def test_recession_examples():
    wedge = Polyhedron.from_inequalities(2, [((-1, 0), 0), ((1, -1), 0)])
    assert recession_cone(wedge) == wedge
    assert recession_cone(unit_square()) == point((0, 0))
    half_strip = Polyhedron.from_generators(2, [(0, 0), (1, 0)], [(1, 0)])
    assert recession_cone(half_strip) == cone(2, [(1, 0)])


def test_minkowski_examples():
    assert minkowski_sum(segment((0, 0), (1, 0)), segment((0, 0), (0, 1))) == unit_square()
    moved = minkowski_sum(point((2, 3)), unit_square())
    assert moved == Polyhedron.from_generators(2, [(2, 3), (3, 3), (2, 4), (3, 4)])
    strip = minkowski_sum(segment((0, 0), (1, 0)), cone(2, [(0, 1)]))
    assert strip == Polyhedron.from_generators(2, [(0, 0), (1, 0)], [(0, 1)])


def test_is_unimodular_cell_examples():
    assert is_unimodular_cell(segment((0, 0), (1, 0)), 1)
    assert not is_unimodular_cell(segment((0, 0), (2, 0)), 1)
    # (2,0) is four times a basis vector of (1/2)N, so refining the lattice does not help
    assert not is_unimodular_cell(segment((0, 0), (2, 0)), 2)
    assert is_unimodular_cell(segment((0, 0), (F(1, 2), 0)), 2)
    assert not is_unimodular_cell(segment((0, 0), (F(1, 2), 0)), 1)
    assert is_unimodular_cell(Polyhedron.from_generators(2, [(0, 0), (1, 0)], [(1, 1)]), 1)
    assert not is_unimodular_cell(Polyhedron.from_generators(2, [(0, 0), (1, 0), (0, 2)]), 1)


def test_is_unimodular_cell_checks_rays_against_the_fan():
    fan = projective_space_fan(2)
    ray_cell = Polyhedron.from_generators(2, [(0, 0)], [(1, 1)])
    assert is_unimodular_cell(ray_cell, 1)
    assert not is_unimodular_cell(ray_cell, 1, fan)
    assert is_unimodular_cell(Polyhedron.from_generators(2, [(0, 0)], [(1, 0)]), 1, fan)


def test_fan_checks():
    p2 = projective_space_fan(2)
    assert p2.is_complete() and p2.is_unimodular()
    assert not Fan(2, [(1, 0), (1, 2)], [(0, 1)]).is_unimodular()
    assert not Fan(2, [(1, 0), (0, 1)], [(0, 1)]).is_complete()


def test_p1_stratification():
    fan = projective_space_fan(1)
    strat = build_dual_stratification(fan, 1)
    assert strat.rq(frozenset()) and unions_equal(
        [SemiOpenPolyhedron(p) for p in strat.rq(frozenset())], [SemiOpenPolyhedron(segment((-1,), (1,)))])[0]
    # each ray is a maximal cone, so its stratum is the barycentre of rQ_ray = {±r}
    assert unions_equal(strat.rp({0}), [SemiOpenPolyhedron(point((1,)))])[0]
    assert unions_equal(strat.rp({1}), [SemiOpenPolyhedron(point((-1,)))])[0]
    core = SemiOpenPolyhedron(segment((-1,), (1,)), (point((-1,)), point((1,))))
    assert unions_equal(strat.rp(frozenset()), [core])[0]


def test_stratification_preconditions():
    with pytest.raises(ValueError, match="complete"):
        build_dual_stratification(Fan(2, [(1, 0), (0, 1)], [(0, 1)]), 1)
    with pytest.raises(ValueError, match="positive"):
        build_dual_stratification(projective_space_fan(1), 0)


def tropical_line_complex():
    return PolyComplex.from_maximal(cone(2, [r]) for r in [(1, 0), (0, 1), (-1, -1)])


def test_verify_stratification_examples():
    fan = projective_space_fan(2)
    ok, witness = verify_stratification(build_dual_stratification(fan, 3), tropical_line_complex())
    assert ok and witness is None
    for r in (F(1, 3), 1, 5):
        assert verify_stratification(build_dual_stratification(fan, r), PolyComplex.from_maximal([point((0, 0))]))[0]


def test_verify_stratification_reports_a_witness():
    # a ray starting far from the origin crosses the strata transversally for small r
    fan = projective_space_fan(2)
    offset = PolyComplex.from_maximal([Polyhedron.from_generators(2, [(3, 0)], [(0, 1)])])
    ok, witness = verify_stratification(build_dual_stratification(fan, 1), offset)
    assert not ok and witness is not None
    doubled = stratification_with_doubling(fan, offset)
    assert verify_stratification(doubled, offset)[0]
    assert doubled.r > 1


def test_strata_partition_the_core_on_fixtures():
    for fan in (projective_space_fan(1), projective_space_fan(2)):
        strat = build_dual_stratification(fan, 1)
        pieces = [s for c in fan.cones for s in strat.rp(c)]
        assert unions_equal(pieces, [SemiOpenPolyhedron(p) for p in strat.rq(frozenset())])[0]
        for a, b in combinations(fan.cones, 2):
            for s in strat.rp(a):
                for t in strat.rp(b):
                    assert s.intersection(t).is_empty


coords = st.integers(-3, 3)
points2 = st.tuples(coords, coords)


@given(st.lists(points2, min_size=1, max_size=5), st.lists(points2, min_size=0, max_size=2))
def test_recession_of_sum_is_the_cone(vertices, rays):
    p = Polyhedron.from_generators(2, vertices)
    c = cone(2, [r for r in rays if r != (0, 0)])
    if c.lines:
        return
    assert recession_cone(minkowski_sum(p, c)) == c


@given(st.lists(points2, min_size=1, max_size=5))
def test_face_lattice_matches_inclusion(vertices):
    p = Polyhedron.from_generators(2, vertices)
    lattice = face_lattice(p)
    for i, a in enumerate(lattice.cells):
        for j, b in enumerate(lattice.cells):
            if i != j:
                assert ((i, j) in lattice.face_relation) == b.contains(a)


@st.composite
def unimodular_matrices(draw):
    m = [[1, 0], [0, 1]]
    for _ in range(draw(st.integers(0, 4))):
        i = draw(st.integers(0, 1))
        c = draw(st.integers(-2, 2))
        m[i] = [m[i][0] + c * m[1 - i][0], m[i][1] + c * m[1 - i][1]]
    if draw(st.booleans()):
        m = [m[1], m[0]]
    return m


@given(st.lists(points2, min_size=1, max_size=4), unimodular_matrices(), st.integers(1, 3))
def test_unimodularity_is_invariant_under_lattice_automorphisms(vertices, g, k):
    p = Polyhedron.from_generators(2, vertices)
    if p.is_empty:
        return
    image = p.linear_image(g, 2)
    assert is_unimodular_cell(p, k) == is_unimodular_cell(image, k)
