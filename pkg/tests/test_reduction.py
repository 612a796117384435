from dataclasses import replace
from fractions import Fraction

import pytest

from tropicoh import fixtures as fx
from tropicoh.cohomology import hodge_table
from tropicoh.polyhedra import Polyhedron
from tropicoh.reduction import check_reduction, fan_over, height_one_slice, semistable_reduction
from tropicoh.troptoric import WeightedComplex


def nonzero(table):
    return {k: v for k, v in table.items() if v}


def p1_with_vertices(vertices):
    vs = sorted(vertices)
    cells = [(Polyhedron.from_generators(1, [(a,), (b,)]), 1) for a, b in zip(vs, vs[1:])]
    cells += [(Polyhedron.from_generators(1, [(vs[-1],)], [(1,)]), 1),
              (Polyhedron.from_generators(1, [(vs[0],)], [(-1,)]), 1)]
    return WeightedComplex.from_polyhedra(fx.projective_ambient(1), cells)


def cones(data):
    return sorted(sorted(c) for c in data.fan.cones)


def test_fan_over_one_vertex():
    data = fan_over(fx.projective_line_one_vertex())
    assert data.fan.rays == ((0, 1), (-1, 0), (1, 0))
    assert data.vertex_rays == [0]
    assert cones(data) == [[], [0], [0, 1], [0, 2], [1], [2]]
    assert data.psi == (0, 1)


def test_fan_over_two_vertices():
    data = fan_over(fx.projective_line_two_vertices())
    assert data.fan.rays == ((0, 1), (1, 1), (-1, 0), (1, 0))
    assert data.vertex_rays == [0, 1]
    assert cones(data) == [[], [0], [0, 1], [0, 2], [1], [1, 3], [2], [3]]


def test_fan_over_a_point():
    data = fan_over(fx.trop_projective(0))
    assert data.fan.rays == ((1,),) and data.vertex_rays == [0]
    assert cones(data) == [[], [0]]


def test_fan_over_scales_by_k():
    x = p1_with_vertices([Fraction(0), Fraction(1, 2)])
    with pytest.raises(ValueError, match="not in"):
        fan_over(x, 1)
    data = fan_over(x, 2)
    assert data.fan.rays[:2] == ((0, 1), (1, 1))
    assert height_one_slice(data) == (True, [])


def test_fan_over_refuses_lines():
    with pytest.raises(ValueError, match="contains a line"):
        fan_over(fx.trop_projective(1))


def test_fan_over_refuses_a_non_unimodular_cone():
    with pytest.raises(ValueError, match="not unimodular"):
        fan_over(p1_with_vertices([0, 2]))


def test_strata_of_the_one_vertex_degeneration():
    strata = semistable_reduction(fan_over(fx.projective_line_one_vertex()))
    assert [s.j for s in strata] == [(0,)]
    assert nonzero(hodge_table(strata[0].complex)) == {(0, 0): 1, (1, 1): 1}


def test_strata_of_the_two_vertex_degeneration():
    data = fan_over(fx.projective_line_two_vertices())
    strata = semistable_reduction(data)
    assert sorted(s.j for s in strata) == [(0,), (0, 1), (1,)]
    by_j = {s.j: s for s in strata}
    assert by_j[(0, 1)].complex.dim == 0
    assert nonzero(hodge_table(by_j[(0, 1)].complex)) == {(0, 0): 1}
    assert all(nonzero(hodge_table(by_j[j].complex)) == {(0, 0): 1, (1, 1): 1} for j in [(0,), (1,)])
    assert by_j[(0, 1)].label(data) == [0, 1]


@pytest.mark.parametrize("name", sorted(fx.DEGENERATIONS))
def test_reduction_checks_pass_on_degenerations(name):
    data = fan_over(fx.DEGENERATIONS[name]())
    strata = semistable_reduction(data)
    report = check_reduction(data, strata)
    assert report.ok, report.details
    dim = data.base.dim
    assert all(s.complex.dim == dim - len(s.j) + 1 for s in strata)


def test_report_catches_a_wrong_stratum_dimension():
    data = fan_over(fx.projective_line_two_vertices())
    strata = semistable_reduction(data)
    forged = [replace(s, j=s.j[:1]) if len(s.j) == 2 else s for s in strata]
    report = check_reduction(data, forged)
    assert not report.dimensions_ok and not report.ok
    assert report.details == [{"stratum": [0], "dim": 0}]
