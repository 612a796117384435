"""Exact linear algebra over the rationals and the integers.

Matrices are thin wrappers around sympy's sparse ``DomainMatrix`` over ``QQ``;
scalars cross the API boundary as :class:`fractions.Fraction`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from itertools import combinations
from math import gcd
from typing import Iterable, Sequence

from sympy import Matrix, QQ, ZZ
from sympy.matrices.normalforms import smith_normal_decomp
from sympy.polys.matrices import DomainMatrix

Rat = Fraction


def to_rat(value) -> Fraction:
    """Convert ints, Fractions, gmpy/sympy rationals and ``"num/den"`` strings."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    numerator = getattr(value, "numerator", None)
    denominator = getattr(value, "denominator", None)
    if numerator is not None and denominator is not None:
        if callable(numerator):
            numerator, denominator = numerator(), denominator()
        return Fraction(int(numerator), int(denominator))
    raise TypeError(f"cannot interpret {value!r} as a rational number")


def _qq(value):
    value = to_rat(value)
    return QQ(value.numerator, value.denominator)


def _frac(element) -> Fraction:
    return Fraction(int(element.numerator), int(element.denominator))


class QMatrix:
    """Immutable rational matrix."""

    __slots__ = ("_dm",)

    def __init__(self, dm: DomainMatrix):
        if dm.domain != QQ:
            dm = dm.convert_to(QQ)
        self._dm = dm.to_sparse()

    # construction
    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], ncols: int | None = None) -> "QMatrix":
        rows = [list(r) for r in rows]
        if ncols is None:
            if not rows:
                raise ValueError("ncols is required for a matrix with no rows")
            ncols = len(rows[0])
        entries = {}
        for i, row in enumerate(rows):
            if len(row) != ncols:
                raise ValueError(f"row {i} has length {len(row)}, expected {ncols}")
            rowdict = {j: _qq(x) for j, x in enumerate(row) if x != 0}
            if rowdict:
                entries[i] = rowdict
        return cls(DomainMatrix(entries, (len(rows), ncols), QQ))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], nrows: int) -> "QMatrix":
        entries: dict[int, dict[int, object]] = {}
        for j, col in enumerate(columns):
            if len(col) != nrows:
                raise ValueError(f"column {j} has length {len(col)}, expected {nrows}")
            for i, x in enumerate(col):
                if x != 0:
                    entries.setdefault(i, {})[j] = _qq(x)
        return cls(DomainMatrix(entries, (nrows, len(columns)), QQ))

    @classmethod
    def from_dict(cls, entries: dict[tuple[int, int], object], shape: tuple[int, int]) -> "QMatrix":
        nested: dict[int, dict[int, object]] = {}
        for (i, j), x in entries.items():
            if not (0 <= i < shape[0] and 0 <= j < shape[1]):
                raise IndexError(f"entry {(i, j)} outside shape {shape}")
            if x != 0:
                nested.setdefault(i, {})[j] = _qq(x)
        return cls(DomainMatrix(nested, shape, QQ))

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "QMatrix":
        return cls(DomainMatrix({}, (nrows, ncols), QQ))

    @classmethod
    def identity(cls, n: int) -> "QMatrix":
        return cls(DomainMatrix({i: {i: QQ(1)} for i in range(n)}, (n, n), QQ))

    # shape and access
    @property
    def rows(self) -> int:
        return self._dm.shape[0]

    @property
    def cols(self) -> int:
        return self._dm.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._dm.shape

    @property
    def domain_matrix(self) -> DomainMatrix:
        return self._dm

    def __getitem__(self, index: tuple[int, int]) -> Fraction:
        i, j = index
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(index)
        return _frac(self._dm.rep.get(i, {}).get(j, QQ(0)))

    def items(self) -> Iterable[tuple[int, int, Fraction]]:
        for i, row in self._dm.rep.items():
            for j, x in row.items():
                yield i, j, _frac(x)

    def to_rows(self) -> list[list[Fraction]]:
        out = [[Fraction(0)] * self.cols for _ in range(self.rows)]
        for i, j, x in self.items():
            out[i][j] = x
        return out

    def column(self, j: int) -> list[Fraction]:
        out = [Fraction(0)] * self.rows
        for i, row in self._dm.rep.items():
            if j in row:
                out[i] = _frac(row[j])
        return out

    def columns(self) -> list[list[Fraction]]:
        rows = self.to_rows()
        return [[rows[i][j] for i in range(self.rows)] for j in range(self.cols)]

    # algebra
    def __matmul__(self, other: "QMatrix") -> "QMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        return QMatrix(self._dm * other._dm)

    def __add__(self, other: "QMatrix") -> "QMatrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} + {other.shape}")
        return QMatrix(self._dm + other._dm)

    def __sub__(self, other: "QMatrix") -> "QMatrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} - {other.shape}")
        return QMatrix(self._dm - other._dm)

    def __neg__(self) -> "QMatrix":
        return QMatrix(-self._dm)

    def scale(self, c) -> "QMatrix":
        return QMatrix(self._dm * _qq(c))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QMatrix):
            return NotImplemented
        return self.shape == other.shape and (self._dm - other._dm).rep == {}

    __hash__ = None  # type: ignore[assignment]

    def transpose(self) -> "QMatrix":
        return QMatrix(self._dm.transpose())

    @property
    def T(self) -> "QMatrix":
        return self.transpose()

    def is_zero(self) -> bool:
        return not any(self._dm.rep.values())

    def select_columns(self, indices: Sequence[int]) -> "QMatrix":
        position = {j: k for k, j in enumerate(indices)}
        entries = {}
        for i, row in self._dm.rep.items():
            new_row = {position[j]: x for j, x in row.items() if j in position}
            if new_row:
                entries[i] = new_row
        return QMatrix(DomainMatrix(entries, (self.rows, len(indices)), QQ))

    def select_rows(self, indices: Sequence[int]) -> "QMatrix":
        entries = {}
        for k, i in enumerate(indices):
            row = self._dm.rep.get(i)
            if row:
                entries[k] = dict(row)
        return QMatrix(DomainMatrix(entries, (len(indices), self.cols), QQ))

    def __repr__(self) -> str:
        body = ", ".join("[" + ", ".join(str(x) for x in row) + "]" for row in self.to_rows())
        return f"QMatrix({self.rows}x{self.cols}: [{body}])"

    # elimination
    def rref(self) -> tuple["QMatrix", tuple[int, ...]]:
        if self.rows == 0 or self.cols == 0:
            return self, ()
        reduced, pivots = self._dm.rref()
        return QMatrix(reduced), tuple(pivots)

    def rank(self) -> int:
        if self.rows == 0 or self.cols == 0:
            return 0
        return len(self.rref()[1])


def hstack(*blocks: QMatrix) -> QMatrix:
    nrows = blocks[0].rows
    offset = 0
    entries: dict[int, dict[int, object]] = {}
    for block in blocks:
        if block.rows != nrows:
            raise ValueError("hstack needs equal row counts")
        for i, row in block.domain_matrix.rep.items():
            target = entries.setdefault(i, {})
            for j, x in row.items():
                target[j + offset] = x
        offset += block.cols
    return QMatrix(DomainMatrix(entries, (nrows, offset), QQ))


def vstack(*blocks: QMatrix) -> QMatrix:
    ncols = blocks[0].cols
    offset = 0
    entries: dict[int, dict[int, object]] = {}
    for block in blocks:
        if block.cols != ncols:
            raise ValueError("vstack needs equal column counts")
        for i, row in block.domain_matrix.rep.items():
            if row:
                entries[i + offset] = dict(row)
        offset += block.rows
    return QMatrix(DomainMatrix(entries, (offset, ncols), QQ))


def block_matrix(row_sizes: Sequence[int], col_sizes: Sequence[int],
                 blocks: dict[tuple[int, int], QMatrix]) -> QMatrix:
    """Assemble a matrix from sparse blocks keyed by (block row, block column)."""
    row_offsets = [0]
    for size in row_sizes:
        row_offsets.append(row_offsets[-1] + size)
    col_offsets = [0]
    for size in col_sizes:
        col_offsets.append(col_offsets[-1] + size)
    entries: dict[int, dict[int, object]] = {}
    for (bi, bj), block in blocks.items():
        if block.shape != (row_sizes[bi], col_sizes[bj]):
            raise ValueError(f"block {(bi, bj)} has shape {block.shape}, "
                             f"expected {(row_sizes[bi], col_sizes[bj])}")
        for i, row in block.domain_matrix.rep.items():
            target = entries.setdefault(i + row_offsets[bi], {})
            for j, x in row.items():
                key = j + col_offsets[bj]
                total = target.get(key, QQ(0)) + x
                if total:
                    target[key] = total
                else:
                    target.pop(key, None)
    entries = {i: row for i, row in entries.items() if row}
    return QMatrix(DomainMatrix(entries, (row_offsets[-1], col_offsets[-1]), QQ))


def kernel_basis(m: QMatrix) -> QMatrix:
    """Columns spanning ker(m), one per free column of the reduced echelon form."""
    if m.rows == 0:
        return QMatrix.identity(m.cols)
    reduced, pivots = m.rref()
    pivot_set = set(pivots)
    free = [j for j in range(m.cols) if j not in pivot_set]
    rep = reduced.domain_matrix.rep
    entries = {}
    for k, f in enumerate(free):
        entries[(f, k)] = 1
        for row_index, p in enumerate(pivots):
            x = rep.get(row_index, {}).get(f)
            if x:
                entries[(p, k)] = -_frac(x)
    return QMatrix.from_dict(entries, (m.cols, len(free)))


def column_space_basis(m: QMatrix) -> QMatrix:
    """The pivot columns of m, a basis of its column space."""
    _, pivots = m.rref()
    return m.select_columns(pivots)


def solve(a: QMatrix, b: QMatrix) -> QMatrix:
    """Return x with a @ x == b; raise ValueError naming the first unsolvable column."""
    if a.rows != b.rows:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    if a.cols == 0 or b.cols == 0:
        if not b.is_zero():
            bad = min(j for _, j, _ in b.items())
            raise ValueError(f"column {bad} is not in the column space")
        return QMatrix.zeros(a.cols, b.cols)
    reduced, pivots = hstack(a, b).rref()
    for row_index, p in enumerate(pivots):
        if p >= a.cols:
            raise ValueError(f"column {p - a.cols} is not in the column space")
    rep = reduced.domain_matrix.rep
    entries = {}
    for row_index, p in enumerate(pivots):
        for j, x in rep.get(row_index, {}).items():
            if j >= a.cols:
                entries[(p, j - a.cols)] = _frac(x)
    return QMatrix.from_dict(entries, (a.cols, b.cols))


def in_column_space(a: QMatrix, vector: Sequence) -> bool:
    b = QMatrix.from_columns([list(vector)], a.rows)
    return hstack(a, b).rank() == a.rank()


def det(rows: Sequence[Sequence]) -> Fraction:
    """Determinant of a small square matrix by fraction-free elimination."""
    n = len(rows)
    if n == 0:
        return Fraction(1)
    a = [[to_rat(x) for x in row] for row in rows]
    sign = 1
    result = Fraction(1)
    for c in range(n):
        pivot = next((r for r in range(c, n) if a[r][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            a[c], a[pivot] = a[pivot], a[c]
            sign = -sign
        result *= a[c][c]
        for r in range(c + 1, n):
            if a[r][c] != 0:
                factor = a[r][c] / a[c][c]
                a[r] = [x - factor * y for x, y in zip(a[r], a[c])]
    return sign * result


# integer lattices

def smith_normal_form(m: Sequence[Sequence[int]]):
    """Return (U, D, V) with U·m·V = D, D diagonal with d1 | d2 | ..., U and V unimodular."""
    rows = [list(map(int, r)) for r in m]
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    eye = lambda n: tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
    if nrows == 0 or ncols == 0 or all(x == 0 for r in rows for x in r):
        return eye(nrows), tuple(tuple(0 for _ in range(ncols)) for _ in range(nrows)), eye(ncols)
    d, u, v = smith_normal_decomp(Matrix(rows), domain=ZZ)
    as_tuple = lambda mat: tuple(tuple(int(mat[i, j]) for j in range(mat.cols)) for i in range(mat.rows))
    return as_tuple(u), as_tuple(d), as_tuple(v)


def elementary_divisors(m: Sequence[Sequence[int]]) -> list[int]:
    """Nonzero diagonal entries of the Smith form, absolute values."""
    _, d, _ = smith_normal_form(m)
    return [abs(d[i][i]) for i in range(min(len(d), len(d[0]) if d else 0)) if d[i][i] != 0]


def primitive_vector(v: Sequence[int]) -> tuple[int, ...]:
    """Divide an integer vector by the gcd of its entries."""
    v = tuple(int(x) for x in v)
    g = reduce(gcd, v, 0)
    if g == 0:
        raise ValueError("zero vector has no primitive")
    return tuple(x // g for x in v)


def primitive_direction(v: Sequence) -> tuple[int, ...]:
    """Primitive integer vector on the ray through a nonzero rational vector."""
    v = [to_rat(x) for x in v]
    denominator = reduce(lambda a, b: a * b // gcd(a, b), (x.denominator for x in v), 1)
    return primitive_vector([int(x * denominator) for x in v])


def extends_to_basis(vectors: Sequence[Sequence[int]], n: int) -> bool:
    """True iff the integer vectors are part of a Z-basis of Z^n."""
    vectors = [list(map(int, v)) for v in vectors]
    if not vectors:
        return True
    columns = [[vectors[j][i] for j in range(len(vectors))] for i in range(n)]
    divisors = elementary_divisors(columns)
    return len(divisors) == len(vectors) and all(x == 1 for x in divisors)


def integer_inverse(m: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    """Inverse of a unimodular integer matrix."""
    if not len(m):
        return ()
    q = QMatrix.from_rows(m)
    inv = solve(q, QMatrix.identity(q.rows))
    out = []
    for row in inv.to_rows():
        if any(x.denominator != 1 for x in row):
            raise ValueError("matrix is not unimodular")
        out.append(tuple(int(x) for x in row))
    return tuple(out)


def complete_to_basis(vectors: Sequence[Sequence[int]], n: int) -> tuple[tuple[int, ...], ...]:
    """Unimodular n×n matrix whose first columns are the given vectors.

    Requires the vectors to extend to a Z-basis.  The completion is the tail of
    U^-1 from the Smith form U·B·V = D of the column matrix B.
    """
    s = len(vectors)
    if s == 0:
        return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
    if not extends_to_basis(vectors, n):
        raise ValueError("vectors do not extend to a lattice basis")
    columns = [[int(vectors[j][i]) for j in range(s)] for i in range(n)]
    u, _, _ = smith_normal_form(columns)
    u_inverse = integer_inverse(u)
    tail = [[u_inverse[i][j] for i in range(n)] for j in range(s, n)]
    basis_columns = [list(map(int, v)) for v in vectors] + tail
    matrix = tuple(tuple(basis_columns[j][i] for j in range(n)) for i in range(n))
    assert abs(det(matrix)) == 1
    return matrix


def saturation_basis(vectors: Sequence[Sequence], n: int) -> list[tuple[int, ...]]:
    """Z-basis of (rational span of vectors) ∩ Z^n."""
    integral = [primitive_direction(v) for v in vectors if any(to_rat(x) != 0 for x in v)]
    if not integral:
        return []
    columns = [[v[i] for v in integral] for i in range(n)]
    u, d, _ = smith_normal_form(columns)
    rank = sum(1 for i in range(min(n, len(integral))) if d[i][i] != 0)
    u_inverse = integer_inverse(u)
    return [tuple(u_inverse[i][j] for i in range(n)) for j in range(rank)]


# exterior algebra

def wedge_indices(n: int, p: int) -> list[tuple[int, ...]]:
    """Lexicographic basis of the p-th exterior power of Q^n."""
    if p < 0 or p > n:
        return []
    return list(combinations(range(n), p))


def induced_wedge_map(m: QMatrix, p: int) -> QMatrix:
    """Matrix of the p-th exterior power of m in lexicographic multi-index bases."""
    if p < 0:
        raise ValueError("p must be non-negative")
    row_sets = wedge_indices(m.rows, p)
    col_sets = wedge_indices(m.cols, p)
    if p == 0:
        return QMatrix.identity(1)
    dense = m.to_rows()
    entries = {}
    for a, rset in enumerate(row_sets):
        for b, cset in enumerate(col_sets):
            value = det([[dense[i][j] for j in cset] for i in rset])
            if value:
                entries[(a, b)] = value
    return QMatrix.from_dict(entries, (len(row_sets), len(col_sets)))


def wedge_of_vectors(vectors: Sequence[Sequence], n: int) -> list[Fraction]:
    """Coordinates of v1∧...∧vp in the lexicographic basis of the p-th exterior power."""
    p = len(vectors)
    out = []
    for index in wedge_indices(n, p):
        out.append(det([[to_rat(vectors[j][i]) for j in range(p)] for i in index]))
    return out


def exterior_span(basis_vectors: Sequence[Sequence], n: int, p: int) -> list[list[Fraction]]:
    """Spanning vectors of the p-th exterior power of span(basis_vectors)."""
    if p == 0:
        return [[Fraction(1)]]
    return [wedge_of_vectors([basis_vectors[i] for i in subset], n)
            for subset in combinations(range(len(basis_vectors)), p)]


def contraction_matrix(n: int, k: int, vector: Sequence) -> QMatrix:
    """Right contraction with a vector v, from the k-th to the (k-1)-th exterior power of the dual.

    In coordinates: e^I ↦ Σ_t (-1)^(k-t) v[i_t] e^(I minus i_t), with t counted from 1.
    """
    sources = wedge_indices(n, k)
    targets = wedge_indices(n, k - 1)
    position = {index: i for i, index in enumerate(targets)}
    entries = {}
    v = [to_rat(x) for x in vector]
    for col, index in enumerate(sources):
        for t, i in enumerate(index, start=1):
            if v[i]:
                row = position[index[:t - 1] + index[t:]]
                entries[(row, col)] = entries.get((row, col), 0) + (-1) ** (k - t) * v[i]
    return QMatrix.from_dict(entries, (len(targets), len(sources)))


# subquotients and complexes

@dataclass(frozen=True)
class Subquotient:
    """The quotient V/W of two nested subspaces of Q^ambient_dim, given by spanning columns."""

    ambient_dim: int
    span_basis: QMatrix
    kill_basis: QMatrix
    _reps: QMatrix = field(init=False, repr=False, compare=False)
    _solver: QMatrix = field(init=False, repr=False, compare=False)
    _kill_rank: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.span_basis.rows != self.ambient_dim or self.kill_basis.rows != self.ambient_dim:
            raise ValueError("basis rows must equal the ambient dimension")
        kill = column_space_basis(self.kill_basis) if self.kill_basis.cols else self.kill_basis
        combined = hstack(kill, self.span_basis) if kill.cols else self.span_basis
        pivots = combined.rref()[1] if combined.cols else ()
        if len(pivots) != self.span_basis.rank():
            raise ValueError("kill space is not contained in the span")
        reps = combined.select_columns([p for p in pivots if p >= kill.cols])
        object.__setattr__(self, "_reps", reps)
        object.__setattr__(self, "_kill_rank", kill.cols)
        object.__setattr__(self, "_solver", hstack(kill, reps) if kill.cols else reps)

    @classmethod
    def full(cls, n: int) -> "Subquotient":
        return cls(n, QMatrix.identity(n), QMatrix.zeros(n, 0))

    @classmethod
    def quotient(cls, n: int, kill: QMatrix) -> "Subquotient":
        return cls(n, QMatrix.identity(n), kill)

    @property
    def dimension(self) -> int:
        return self._reps.cols

    @property
    def representatives(self) -> QMatrix:
        """Ambient vectors lifting the quotient basis."""
        return self._reps

    def coordinates(self, vectors: QMatrix) -> QMatrix:
        """Quotient coordinates of ambient columns lying in the span."""
        if self.dimension == 0 and self._kill_rank == 0:
            if not vectors.is_zero():
                raise ValueError("vector escapes the span")
            return QMatrix.zeros(0, vectors.cols)
        full = solve(self._solver, vectors)
        return full.select_rows(range(self._kill_rank, self._kill_rank + self.dimension))


def subquotient_map(src: Subquotient, dst: Subquotient, ambient: QMatrix) -> QMatrix:
    """Matrix on quotient bases induced by an ambient linear map."""
    if ambient.shape != (dst.ambient_dim, src.ambient_dim):
        raise ValueError(f"ambient map has shape {ambient.shape}, expected "
                         f"{(dst.ambient_dim, src.ambient_dim)}")
    images = ambient @ src.representatives
    try:
        coords = dst.coordinates(images)
    except ValueError as exc:
        raise ValueError(f"ill-defined map: image of span column escapes target span ({exc})") from None
    if src.kill_basis.cols:
        killed = ambient @ src.kill_basis
        try:
            leftover = dst.coordinates(killed)
        except ValueError:
            raise ValueError("ill-defined map: a kill column escapes the target span") from None
        for _, j, _ in leftover.items():
            raise ValueError(f"ill-defined map: kill column {j} is not sent into the target kill space")
    return coords


@dataclass
class CohomologyGroup:
    degree: int
    dimension: int
    representatives: QMatrix
    _solver: QMatrix = field(repr=False)
    _image_rank: int = field(repr=False)

    def coordinates(self, cocycles: QMatrix) -> QMatrix:
        """Class coordinates of cocycle columns in the representative basis."""
        if self.dimension == 0:
            return QMatrix.zeros(0, cocycles.cols)
        full = solve(self._solver, cocycles)
        return full.select_rows(range(self._image_rank, self._image_rank + self.dimension))


class CochainComplex:
    """A bounded cochain complex of finite-dimensional rational vector spaces.

    ``dims[k]`` is dim C^k and ``differentials[k]`` is the matrix C^k -> C^(k+1).
    Missing differentials are zero.
    """

    def __init__(self, dims: dict[int, int], differentials: dict[int, QMatrix] | None = None,
                 check: bool = True):
        self.dims = {k: v for k, v in dims.items()}
        self.differentials: dict[int, QMatrix] = {}
        for k, m in (differentials or {}).items():
            expected = (self.dim(k + 1), self.dim(k))
            if m.shape != expected:
                raise ValueError(f"differential in degree {k} has shape {m.shape}, expected {expected}")
            self.differentials[k] = m
        if check:
            self.check_square_zero()

    def dim(self, k: int) -> int:
        return self.dims.get(k, 0)

    def degrees(self) -> list[int]:
        present = [k for k, v in self.dims.items() if v]
        if not present:
            return []
        return list(range(min(present), max(present) + 1))

    def d(self, k: int) -> QMatrix:
        m = self.differentials.get(k)
        if m is None:
            return QMatrix.zeros(self.dim(k + 1), self.dim(k))
        return m

    def check_square_zero(self) -> None:
        for k in sorted(self.differentials):
            if k + 1 in self.differentials:
                composite = self.differentials[k + 1] @ self.differentials[k]
                if not composite.is_zero():
                    column = min(j for _, j, _ in composite.items())
                    raise ValueError(f"d∘d is nonzero in degree {k}: column {column} of the composite")

    def cohomology(self, k: int) -> CohomologyGroup:
        n = self.dim(k)
        outgoing = self.d(k)
        cycles = kernel_basis(outgoing) if n else QMatrix.zeros(0, 0)
        incoming = self.d(k - 1)
        image = column_space_basis(incoming) if incoming.cols and n else QMatrix.zeros(n, 0)
        if cycles.cols == 0:
            return CohomologyGroup(k, 0, QMatrix.zeros(n, 0), QMatrix.zeros(n, 0), image.cols)
        combined = hstack(image, cycles) if image.cols else cycles
        _, pivots = combined.rref()
        reps = combined.select_columns([p for p in pivots if p >= image.cols])
        solver = hstack(image, reps) if image.cols else reps
        return CohomologyGroup(k, reps.cols, reps, solver, image.cols)

    def betti(self) -> dict[int, int]:
        return {k: self.cohomology(k).dimension for k in self.degrees()}

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * v for k, v in self.dims.items())


def complex_cohomology(d: Sequence[QMatrix]) -> list[tuple[int, QMatrix]]:
    """Cohomology of 0 -> C^0 -> C^1 -> ... given the list of differentials d_i: C^i -> C^(i+1)."""
    if not d:
        return []
    dims = {0: d[0].cols}
    for i, m in enumerate(d):
        if m.cols != dims[i]:
            raise ValueError(f"differentials {i - 1} and {i} are not composable")
        dims[i + 1] = m.rows
    complex_ = CochainComplex(dims, dict(enumerate(d)))
    out = []
    for k in range(len(d) + 1):
        group = complex_.cohomology(k)
        out.append((group.dimension, group.representatives))
    return out


# small dense helpers on lists of Fractions, for the tiny systems of polyhedral geometry

def dense_rref(rows: Sequence[Sequence], ncols: int, field=to_rat) -> tuple[list[list], list[int]]:
    """Reduced row echelon form of a small dense matrix; returns (nonzero rows, pivots).

    ``field`` converts entries to the scalar type used (Fraction by default).
    """
    a = [[field(x) for x in row] for row in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        lead = a[r][c]
        if lead != 1:
            a[r] = [x / lead for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                factor = a[i][c]
                a[i] = [x - factor * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    return a[:r], pivots


def dense_rank(rows: Sequence[Sequence], ncols: int, field=to_rat) -> int:
    return len(dense_rref(rows, ncols, field)[1]) if rows else 0


def dense_kernel(rows: Sequence[Sequence], ncols: int, field=to_rat) -> list[list]:
    """Basis vectors of the kernel, one per free column."""
    reduced, pivots = dense_rref(rows, ncols, field) if rows else ([], [])
    pivot_set = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivot_set:
            continue
        v = [field(0)] * ncols
        v[f] = field(1)
        for row, p in zip(reduced, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def dense_solve(rows: Sequence[Sequence], rhs: Sequence, ncols: int, field=to_rat) -> list | None:
    """One solution x of rows·x = rhs, or None."""
    augmented = [list(row) + [b] for row, b in zip(rows, rhs)]
    reduced, pivots = dense_rref(augmented, ncols + 1, field)
    if pivots and pivots[-1] == ncols:
        return None
    x = [field(0)] * ncols
    for row, p in zip(reduced, pivots):
        x[p] = row[ncols]
    return x


# spectral sequences of filtered complexes

def _subspace_sum_rank(*blocks: QMatrix) -> int:
    present = [b for b in blocks if b.cols]
    return hstack(*present).rank() if present else 0


class FilteredComplex:
    """A cochain complex with a decreasing filtration by basis elements.

    ``levels[n][i]`` is the filtration level of the i-th basis vector in degree n;
    F^p is spanned by the basis vectors of level ≥ p.  Pages use the standard
    description E_r^p = Z_r^p / (Z_{r-1}^{p+1} + d Z_{r-1}^{p-r+1}) with
    Z_r^p = {x ∈ F^p : dx ∈ F^{p+r}}.
    """

    def __init__(self, complex_: CochainComplex, levels: dict[int, Sequence[int]]):
        self.complex = complex_
        self.levels = {n: list(v) for n, v in levels.items()}
        for n in complex_.degrees():
            if len(self.levels.get(n, [])) != complex_.dim(n):
                raise ValueError(f"filtration levels missing in degree {n}")
            d = complex_.d(n)
            for i, j, _ in d.items():
                if self.levels[n + 1][i] < self.levels[n][j]:
                    raise ValueError(f"differential lowers the filtration in degree {n}")
        every = [lv for n in complex_.degrees() for lv in self.levels.get(n, [])]
        self.low = min(every, default=0)
        self.high = max(every, default=0)
        self._z: dict = {}

    def _cycles(self, n: int, p: int, r: int) -> QMatrix:
        """Basis (as columns of C^n) of Z_r^p in degree n."""
        key = (n, p, r)
        if key in self._z:
            return self._z[key]
        size = self.complex.dim(n)
        columns = [j for j in range(size) if self.levels[n][j] >= p]
        if not columns:
            out = QMatrix.zeros(size, 0)
        else:
            d = self.complex.d(n)
            rows = [i for i in range(self.complex.dim(n + 1)) if self.levels[n + 1][i] < p + r]
            restricted = d.select_rows(rows).select_columns(columns) if rows else QMatrix.zeros(0, len(columns))
            kernel = kernel_basis(restricted)
            entries = {(columns[i], j): v for i, j, v in kernel.items()}
            out = QMatrix.from_dict(entries, (size, kernel.cols))
        self._z[key] = out
        return out

    def term_dim(self, r: int, p: int, n: int) -> int:
        z = self._cycles(n, p, r)
        if not z.cols:
            return 0
        lower = self._cycles(n, p + 1, r - 1)
        source = self._cycles(n - 1, p - r + 1, r - 1)
        image = self.complex.d(n - 1) @ source if source.cols else QMatrix.zeros(z.rows, 0)
        return z.rank() - _subspace_sum_rank(lower, image)

    def page(self, r: int) -> dict[tuple[int, int], int]:
        """dim E_r^{p,q} for all nonzero entries, with q = n - p."""
        out = {}
        for n in self.complex.degrees():
            for p in range(self.low, self.high + 1):
                dim = self.term_dim(r, p, n)
                if dim:
                    out[(p, n - p)] = dim
        return out

    def stable_page_index(self) -> int:
        return max(1, self.high - self.low + 1)

    def pages(self) -> dict[int, dict[tuple[int, int], int]]:
        """Pages E_1, E_2, ... up to the first page beyond which all differentials vanish."""
        last = self.stable_page_index()
        return {r: self.page(r) for r in range(1, last + 1)}

    def limit(self) -> dict[tuple[int, int], int]:
        return self.page(self.stable_page_index())
