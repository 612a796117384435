import pytest
from hypothesis import given, settings, strategies as st

from tropicoh import fixtures as fx
from tropicoh.polyhedra import Polyhedron, cone
from tropicoh.troptoric import (
    AmbientFan,
    ExtendedCell,
    WeightedComplex,
    check_balancing,
    check_regular_at_infinity,
    closure_cells,
    star_fan,
)


def described(cells):
    return sorted(c.describe() for c in cells)


def test_closure_of_a_ray_in_p2():
    cells = closure_cells(cone(2, [(1, 0)]), fx.projective_ambient(2))
    assert [sorted(c.sigma) for c in cells] == [[], [0], []]
    assert {c.dim for c in cells} == {0, 1}
    boundary = [c for c in cells if c.sigma]
    assert boundary[0].finite == Polyhedron.from_generators(1, [(0,)])


def test_closure_of_the_plane_has_seven_cells():
    cells = closure_cells(fx.whole_space(2), fx.projective_ambient(2))
    assert len(cells) == 7
    assert sorted(len(c.sigma) for c in cells) == [0, 1, 1, 1, 2, 2, 2]


def test_closure_of_a_bounded_cell_stays_finite():
    cells = closure_cells(Polyhedron.from_generators(2, [(0, 0), (1, 0)]), fx.projective_ambient(2))
    assert all(not c.sigma for c in cells) and len(cells) == 3


def test_empty_polyhedron_has_no_closure():
    empty = Polyhedron.from_inequalities(1, [((1,), -1), ((-1,), -1)])
    with pytest.raises(ValueError):
        closure_cells(empty, fx.affine_line())


@pytest.mark.parametrize("build", [fx.tropical_line, fx.tropical_plane, fx.smooth_cubic, fx.prism_fan,
                                   fx.projective_line_two_vertices, fx.product_degeneration])
def test_fixtures_are_balanced_and_regular(build):
    x = build()
    assert check_balancing(x) == (True, [])
    assert check_regular_at_infinity(x) == (True, [])


def test_unbalanced_vertex_is_reported():
    ok, witnesses = check_balancing(fx.unbalanced_fan())
    assert not ok
    assert witnesses[0]["sum"] == ["1", "1"]


def test_balancing_uses_weights():
    ambient = AmbientFan.torus(1)
    x = WeightedComplex.from_polyhedra(ambient, [(cone(1, [(1,)]), 2), (cone(1, [(-1,)]), 1)])
    ok, witnesses = check_balancing(x)
    assert not ok and witnesses[0]["sum"] == ["1"]
    y = WeightedComplex.from_polyhedra(ambient, [(cone(1, [(1,)]), 3), (cone(1, [(-1,)]), 3)])
    assert check_balancing(y)[0]


def test_tilted_ray_is_not_regular_at_infinity():
    ok, witnesses = check_regular_at_infinity(fx.tilted_ray())
    assert not ok
    assert witnesses[0]["stratum"] == [0, 1]


def test_non_unimodular_ambient_is_rejected():
    ambient = AmbientFan.from_rays(2, [(1, 0), (1, 2)], [(0, 1)])
    assert not ambient.is_unimodular
    with pytest.raises(ValueError):
        check_regular_at_infinity(WeightedComplex.from_polyhedra(ambient, [(cone(2, [(1, 1)]), 1)]))


def test_star_fan_of_the_line_vertex():
    line = fx.tropical_line()
    star = star_fan(line, ExtendedCell(frozenset(), Polyhedron.from_generators(2, [(0, 0)])))
    assert star.dim == 1 and len(star.top_cells()) == 3
    assert check_balancing(star)[0]


def test_star_fan_at_an_edge_is_a_line():
    line = fx.projective_line_two_vertices()
    vertex = [i for i, c in enumerate(line.cells) if c.dim == 0 and not c.sigma][0]
    star = star_fan(line, vertex)
    expected = {c.describe() for ray in [(1,), (-1,)] for c in closure_cells(cone(1, [ray]), AmbientFan.torus(1))}
    assert set(described(star.cells)) == expected and len(star.cells) == 3


def test_product_dimensions_and_weights():
    x = fx.tropical_line().product(fx.projective_line_two_vertices())
    assert x.dim == 2
    assert {x.weight(i) for i in x.top_cells()} == {1}
    assert check_balancing(x)[0] and check_regular_at_infinity(x)[0]


@settings(max_examples=12)
@given(st.sampled_from([fx.tropical_line, fx.tropical_plane, fx.smooth_cubic, fx.prism_fan]),
       st.integers(0, 40))
def test_stars_of_balanced_complexes_are_balanced(build, index):
    x = build()
    finite = [i for i, c in enumerate(x.cells) if not c.sigma and c.dim < x.dim]
    star = star_fan(x, finite[index % len(finite)])
    assert check_balancing(star)[0]


@given(st.integers(1, 4), st.integers(1, 4))
def test_weighted_lines_balance_exactly_when_weights_agree(a, b):
    ambient = AmbientFan.torus(1)
    x = WeightedComplex.from_polyhedra(ambient, [(cone(1, [(1,)]), a), (cone(1, [(-1,)]), b)])
    assert check_balancing(x)[0] == (a == b)


def test_closure_of_the_line_in_p1():
    cells = closure_cells(fx.whole_space(1), fx.projective_ambient(1))
    assert sorted(sorted(c.sigma) for c in cells) == [[], [0], [1]]


def test_closure_of_a_point_is_the_point():
    p = Polyhedron.from_generators(2, [(1, 1)])
    assert [c.finite for c in closure_cells(p, fx.projective_ambient(2))] == [p]


def test_star_fan_at_a_ray_collapses_to_a_point():
    line = fx.tropical_line()
    ray = line.find(ExtendedCell(frozenset(), cone(2, [(1, 0)])))
    star = star_fan(line, ray)
    assert star.ambient.fan.n == 1 and star.dim == 0
    assert [star.weight(i) for i in star.top_cells()] == [1]


def test_star_fan_of_a_top_cell_is_a_point():
    plane = fx.trop_projective(2)
    (top,) = [i for i, c in enumerate(plane.cells) if not c.sigma]
    star = star_fan(plane, top)
    assert star.ambient.fan.n == 0 and star.dim == 0
