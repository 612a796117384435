from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from tropicoh import fixtures as fx
from tropicoh.polyhedra import (
    PolyComplex,
    Polyhedron,
    SemiOpenPolyhedron,
    build_dual_stratification,
    cone,
    is_unimodular_cell,
    point,
    projective_space_fan,
    unions_equal,
)
from tropicoh.reduction import check_reduction, fan_over, semistable_reduction
from tropicoh.unimod import (
    UnimodularizationError,
    certify_structure,
    core_complex,
    extend_structure,
    structured_complex,
    unimodularize_compact,
)


def complex_of(*cells):
    return PolyComplex.from_maximal(cells)


def same_support(a, b):
    return unions_equal([SemiOpenPolyhedron(p) for p in a.maximal_cells()],
                        [SemiOpenPolyhedron(p) for p in b.maximal_cells()])[0]


def assert_certified(original, k, result):
    assert same_support(original, result)
    assert all(is_unimodular_cell(p, k) for p in result.maximal_cells())
    result.check_complex()


def test_long_segment_is_split():
    c = complex_of(Polyhedron.from_generators(1, [(0,), (2,)]))
    k, result = unimodularize_compact(c)
    assert k == 1
    assert sorted(p.vertices for p in result.maximal_cells()) == [((0,), (1,)), ((1,), (2,))]


def test_unit_simplex_is_unchanged():
    simplex = Polyhedron.from_generators(2, [(0, 0), (1, 0), (0, 1)])
    k, result = unimodularize_compact(complex_of(simplex))
    assert k == 1 and result.maximal_cells() == [simplex]


def test_tall_triangle_is_certified():
    c = complex_of(Polyhedron.from_generators(2, [(0, 0), (1, 0), (0, 2)]))
    k, result = unimodularize_compact(c)
    assert_certified(c, k, result)
    assert len(result.maximal_cells()) == 2


def test_square_of_side_two():
    c = complex_of(Polyhedron.from_generators(2, [(0, 0), (2, 0), (0, 2), (2, 2)]))
    k, result = unimodularize_compact(c)
    assert_certified(c, k, result)
    assert k == 1 and len(result.maximal_cells()) == 8


def test_shared_faces_stay_compatible():
    left = Polyhedron.from_generators(2, [(0, 0), (2, 0), (0, 2)])
    right = Polyhedron.from_generators(2, [(2, 0), (0, 2), (2, 2)])
    c = complex_of(left, right)
    k, result = unimodularize_compact(c)
    assert_certified(c, k, result)


def test_a_cell_without_lattice_points_doubles_k():
    c = complex_of(Polyhedron.from_generators(1, [(0,), (Fraction(1, 2),)]))
    k, result = unimodularize_compact(c)
    assert k == 2 and result.maximal_cells() == c.maximal_cells()
    c = complex_of(Polyhedron.from_generators(2, [(0, 0), (Fraction(3, 2), 0), (0, 1)]))
    k, result = unimodularize_compact(c)
    assert k == 2
    assert_certified(c, k, result)


def test_unit_square_is_cut_once():
    square = complex_of(Polyhedron.from_generators(2, [(0, 0), (1, 0), (0, 1), (1, 1)]))
    k, result = unimodularize_compact(square)
    assert k == 1 and len(result.maximal_cells()) == 2
    assert_certified(square, k, result)


def test_iteration_cap_reports_the_partial_subdivision():
    c = complex_of(Polyhedron.from_generators(2, [(0, 0), (1, 0), (0, 2)]))
    with pytest.raises(UnimodularizationError) as info:
        unimodularize_compact(c, max_iterations=0)
    assert info.value.k == 1
    assert same_support(info.value.partial, c)


def test_non_compact_input_is_refused():
    with pytest.raises(ValueError, match="compact"):
        unimodularize_compact(complex_of(cone(1, [(1,)])))


@settings(max_examples=10)
@given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2)), min_size=3, max_size=5))
def test_random_lattice_polygons_are_certified(vertices):
    p = Polyhedron.from_generators(2, vertices)
    if p.dim < 2:
        return
    c = complex_of(p)
    k, result = unimodularize_compact(c)
    assert_certified(c, k, result)


def extended(x, r):
    strat = build_dual_stratification(x.ambient.fan, r)
    k, core = unimodularize_compact(core_complex(x, strat))
    return strat, k, extend_structure(x, strat, core, k)


def test_extension_on_p1():
    x = fx.trop_projective(1)
    _, k, lam = extended(x, 1)
    assert k == 1
    assert sorted((c.vertices, c.rays) for c in lam.maximal_cells()) == [
        (((-1,),), ((-1,),)), (((-1,), (0,)), ()), (((0,), (1,)), ()), (((1,),), ((1,),))]
    assert certify_structure(x, lam, k, x.ambient.fan).ok


def test_extension_on_the_two_vertex_p1():
    x = fx.projective_line_two_vertices()
    _, k, lam = extended(x, 1)
    report = certify_structure(x, lam, k, x.ambient.fan)
    assert report.ok and report.support_witness is None


def test_extension_of_a_point():
    x = fx.trop_projective(0)
    assert certify_structure(PolyComplex.from_maximal([point(())]), PolyComplex.from_maximal([point(())]), 1,
                             x.ambient.fan).ok


@pytest.mark.slow
def test_extension_on_the_line_feeds_the_reduction():
    x = fx.tropical_line()
    _, k, lam = extended(x, 3)
    assert certify_structure(x, lam, k, x.ambient.fan).ok
    structured = structured_complex(x, lam)
    data = fan_over(structured, k)
    assert check_reduction(data, semistable_reduction(data)).ok


def test_extension_needs_a_unimodular_core():
    x = fx.trop_projective(1)
    strat = build_dual_stratification(x.ambient.fan, 2)
    core = core_complex(x, strat)
    assert any(not is_unimodular_cell(p, 1) for p in core.maximal_cells())
    with pytest.raises(ValueError, match="unimodular"):
        extend_structure(x, strat, core, 1)


def test_extension_needs_a_verified_stratification():
    x = fx.projective_line_two_vertices()
    fan = x.ambient.fan
    strat = build_dual_stratification(fan, 1)
    # a core that does not refine the barycentric cells of rQ_0
    coarse = PolyComplex.from_maximal([Polyhedron.from_generators(1, [(-1,), (1,)])])
    with pytest.raises(ValueError):
        extend_structure(x, strat, coarse, 2)


def test_certificate_flags_an_index_two_cell():
    fan = projective_space_fan(2)
    target = PolyComplex.from_maximal([Polyhedron.from_generators(2, [(0, 0), (1, 0), (0, 2)])])
    report = certify_structure(target, target, 1, fan)
    assert report.support_ok and report.finer_ok
    assert not report.unimodular_ok and report.non_unimodular == target.maximal_cells()


def test_certificate_flags_a_wall_crossing_cell():
    fan = projective_space_fan(2)
    crossing = Polyhedron.from_generators(2, [(1, 2), (-1, 1)])
    target = PolyComplex.from_maximal([crossing])
    report = certify_structure(target, target, 1, fan)
    assert report.unimodular_ok and not report.finer_ok
    assert report.crossing == [crossing]


def test_certificate_flags_a_support_mismatch():
    fan = projective_space_fan(1)
    target = PolyComplex.from_maximal([Polyhedron.from_generators(1, [(0,), (2,)])])
    short = PolyComplex.from_maximal([Polyhedron.from_generators(1, [(0,), (1,)])])
    report = certify_structure(target, short, 1, fan)
    assert not report.support_ok and report.support_witness is not None
