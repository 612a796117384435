from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from tropicoh.exactlin import (
    CochainComplex,
    FilteredComplex,
    QMatrix,
    Subquotient,
    complex_cohomology,
    det,
    elementary_divisors,
    extends_to_basis,
    induced_wedge_map,
    kernel_basis,
    primitive_vector,
    smith_normal_form,
    subquotient_map,
)

small = st.integers(min_value=-4, max_value=4)


def matrices(rows=st.integers(1, 4), cols=st.integers(1, 4)):
    return st.tuples(rows, cols).flatmap(
        lambda shape: st.lists(st.lists(small, min_size=shape[1], max_size=shape[1]),
                               min_size=shape[0], max_size=shape[0]))


def as_sympy(rows):
    return sympy.Matrix(rows)


def test_smith_normal_form_examples():
    _, d, _ = smith_normal_form(((2, 4), (6, 8)))
    assert d == ((2, 0), (0, 4))
    _, d, _ = smith_normal_form(((1, 0), (0, 1)))
    assert d == ((1, 0), (0, 1))
    _, d, _ = smith_normal_form(((0, 0, 0), (0, 0, 0)))
    assert d == ((0, 0, 0), (0, 0, 0))


def test_elementary_divisors_match_sympy():
    m = [[2, 4, 4], [-6, 6, 12], [10, -4, -16]]
    ours = elementary_divisors(m)
    theirs = [abs(x) for x in sympy.matrices.normalforms.invariant_factors(sympy.Matrix(m))]
    assert [x for x in ours if x] == [x for x in theirs if x]


@given(matrices())
def test_smith_normal_form_certificate(rows):
    u, d, v = smith_normal_form(rows)
    product = as_sympy(u) * as_sympy(rows) * as_sympy(v)
    assert product == as_sympy(d)
    assert abs(as_sympy(u).det()) == 1 and abs(as_sympy(v).det()) == 1
    diagonal = [d[i][i] for i in range(min(len(d), len(d[0])))]
    assert all(d[i][j] == 0 for i in range(len(d)) for j in range(len(d[0])) if i != j)
    nonzero = [x for x in diagonal if x]
    assert all(x > 0 for x in nonzero)
    assert all(b % a == 0 for a, b in zip(nonzero, nonzero[1:]))
    assert diagonal[:len(nonzero)] == nonzero


def test_primitive_vector_examples():
    assert primitive_vector((4, 6)) == (2, 3)
    assert primitive_vector((0, -5)) == (0, -1)
    assert primitive_vector((7,)) == (1,)
    with pytest.raises(ValueError, match="zero vector"):
        primitive_vector((0, 0))


def test_extends_to_basis():
    assert extends_to_basis([(1, 0, 0)], 3)
    assert not extends_to_basis([(2, 0)], 2)
    assert extends_to_basis([(1, 1), (0, 1)], 2)


def test_kernel_examples():
    k = kernel_basis(QMatrix.from_rows([[1, 1]]))
    assert k.cols == 1
    assert (QMatrix.from_rows([[1, 1]]) @ k).is_zero()
    assert kernel_basis(QMatrix.identity(3)).cols == 0
    assert kernel_basis(QMatrix.zeros(2, 3)).cols == 3


@given(matrices())
def test_kernel_property(rows):
    m = QMatrix.from_rows(rows)
    k = kernel_basis(m)
    assert k.cols == m.cols - m.rank()
    assert (m @ k).is_zero() if k.cols else True
    assert m.rank() == as_sympy(rows).rank()


def test_rank_of_large_rational_matrix():
    n = 12
    rows = [[Fraction(1, i + j + 1) for j in range(n)] for i in range(n)]
    assert QMatrix.from_rows(rows).rank() == n
    assert det(rows) == sympy.Matrix(n, n, lambda i, j: sympy.Rational(1, i + j + 1)).det()


def wedge(rows, p):
    return induced_wedge_map(QMatrix.from_rows(rows), p).to_rows()


def test_wedge_examples():
    assert wedge([[2, 0], [0, 3]], 2) == [[6]]
    assert wedge([[2, 0], [0, 3]], 0) == [[1]]
    assert wedge([[2, 0], [0, 3]], 1) == [[2, 0], [0, 3]]


square = st.integers(1, 3).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.lists(small, min_size=n, max_size=n), min_size=n, max_size=n),
                        st.lists(st.lists(small, min_size=n, max_size=n), min_size=n, max_size=n),
                        st.integers(0, n)))


@given(square)
def test_wedge_is_functorial(args):
    n, a, b, p = args
    ab = (as_sympy(a) * as_sympy(b)).tolist()
    lhs = as_sympy(wedge(ab, p))
    rhs = as_sympy(wedge(a, p)) * as_sympy(wedge(b, p))
    assert lhs == rhs


@given(square)
def test_top_wedge_is_determinant(args):
    n, a, _, _ = args
    assert wedge(a, n) == [[as_sympy(a).det()]]


def test_complex_cohomology_examples():
    # d = 0 on ℚ → ℚ
    assert [dim for dim, _ in complex_cohomology([QMatrix.zeros(1, 1)])] == [1, 1]
    # ℚ --[1]--> ℚ is exact
    assert [dim for dim, _ in complex_cohomology([QMatrix.from_rows([[1]])])] == [0, 0]
    # ℚ² --(1 1)--> ℚ
    assert [dim for dim, _ in complex_cohomology([QMatrix.from_rows([[1, 1]])])] == [1, 0]


def test_square_zero_violation_is_reported():
    one = QMatrix.from_rows([[1]])
    with pytest.raises(ValueError, match="degree 0"):
        CochainComplex({0: 1, 1: 1, 2: 1}, {0: one, 1: one})


def test_shape_mismatch_is_reported():
    with pytest.raises(ValueError, match="shape"):
        CochainComplex({0: 2, 1: 1}, {0: QMatrix.identity(2)})


def random_matrix(rng, rows, cols):
    return QMatrix.from_dict({(i, j): rng.randint(-2, 2) for i in range(rows) for j in range(cols)}, (rows, cols))


@given(st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3)), st.randoms(use_true_random=False))
def test_euler_characteristic_of_cohomology(dims, rng):
    d0 = random_matrix(rng, dims[1], dims[0])
    # rows annihilating the image of d0, so that d1 d0 = 0
    left = kernel_basis(d0.T).T if dims[1] else QMatrix.zeros(0, 0)
    d1 = random_matrix(rng, dims[2], left.rows) @ left if left.rows else QMatrix.zeros(dims[2], dims[1])
    c = CochainComplex(dict(enumerate(dims)), {0: d0, 1: d1})
    betti = {k: c.cohomology(k).dimension for k in range(3)}
    assert sum((-1) ** k * v for k, v in betti.items()) == c.euler_characteristic()
    assert betti[0] == dims[0] - d0.rank()


def test_subquotient_dimensions_and_maps():
    n = 3
    ambient = Subquotient.full(n)
    assert ambient.dimension == 3
    line = QMatrix.from_columns([[1, 0, 0]], n)
    quotient = Subquotient.quotient(n, line)
    assert quotient.dimension == 2
    projection = subquotient_map(ambient, quotient, QMatrix.identity(n))
    assert projection.shape == (2, 3) and projection.rank() == 2
    inclusion = subquotient_map(Subquotient(n, line, QMatrix.zeros(n, 0)), ambient, QMatrix.identity(n))
    assert inclusion.rank() == 1


def test_subquotient_map_must_preserve_relations():
    n = 2
    line = QMatrix.from_columns([[1, 0]], n)
    with pytest.raises(ValueError):
        # the identity does not send the killed line of the source into the killed part of ℚ²
        subquotient_map(Subquotient.quotient(n, line), Subquotient.full(n), QMatrix.identity(n))


def test_filtered_complex_pages():
    # C^0 = ℚ at level 0, C^1 = ℚ at level 1, d = 1: E_1 has two classes, E_2 none
    c = CochainComplex({0: 1, 1: 1}, {0: QMatrix.from_rows([[1]])})
    f = FilteredComplex(c, {0: [0], 1: [1]})
    assert f.page(1) == {(0, 0): 1, (1, 0): 1}
    assert f.page(2) == {}
    # same levels: d is internal to E_0, so E_1 vanishes
    g = FilteredComplex(c, {0: [0], 1: [0]})
    assert g.page(1) == {}


def test_filtration_must_be_preserved():
    c = CochainComplex({0: 1, 1: 1}, {0: QMatrix.from_rows([[1]])})
    with pytest.raises(ValueError, match="lowers"):
        FilteredComplex(c, {0: [1], 1: [0]})
