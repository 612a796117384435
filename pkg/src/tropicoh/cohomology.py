"""Multi-tangent spaces F_p, the sheaves 𝔽^p and cellular tropical cohomology.

Two cochain models are provided.  The cellular model puts 𝔽^p(P) on every cell P
with incidence signs from cell orientations; it is used on compact complexes.  The
chain model puts 𝔽^p(P_k) on every chain P_0 < ... < P_k of the face poset; it needs
no orientations, works for any open or closed union of cells, and realizes
cohomology with supports.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable

from .exactlin import (
    CochainComplex,
    QMatrix,
    Subquotient,
    column_space_basis,
    dense_solve,
    exterior_span,
    induced_wedge_map,
    kernel_basis,
    subquotient_map,
    wedge_indices,
)
from .polyhedra import sub
from .troptoric import WeightedComplex


def annihilator(span: QMatrix) -> QMatrix:
    """Columns spanning the annihilator of the column span, in dual coordinates."""
    if span.cols == 0:
        return QMatrix.identity(span.rows)
    return kernel_basis(span.T)


@dataclass(frozen=True)
class FStalk:
    """F_p(P) as spanning wedges in ∧^p N_σ, and its dual 𝔽^p(P) as a quotient of ∧^p M_σ."""

    cell: int
    p: int
    rank: int
    tangent_span: QMatrix
    sheaf: Subquotient

    @property
    def dimension(self) -> int:
        return self.sheaf.dimension


def multitangent_span(tangent_bases: Iterable[list], n: int, p: int) -> QMatrix:
    vectors = []
    for basis in tangent_bases:
        vectors.extend(exterior_span(basis, n, p) if len(basis) >= p else [])
    size = len(wedge_indices(n, p))
    if not vectors:
        return QMatrix.zeros(size, 0)
    return column_space_basis(QMatrix.from_columns(vectors, size))


def multitangent(x: WeightedComplex, cell: int, p: int) -> FStalk:
    """F_p(P) = Σ ∧^p Tan(P') over cofaces P' ⊇ P of the same sedentarity."""
    c = x.cells[cell]
    n = c.finite.n
    same = [j for j in x.cofaces(cell) if x.cells[j].sigma == c.sigma]
    span = multitangent_span((x.tangent_basis(j) for j in same), n, p)
    size = len(wedge_indices(n, p))
    return FStalk(cell, p, n, span, Subquotient(size, QMatrix.identity(size), annihilator(span)))


class FSheaf:
    """The sheaf 𝔽^p on the cells of a complex, with its restriction maps."""

    def __init__(self, x: WeightedComplex, p: int):
        self.x = x
        self.p = p
        self._stalks: dict[int, FStalk] = {}
        self._maps: dict[tuple[int, int], QMatrix] = {}

    def stalk(self, i: int) -> FStalk:
        if i not in self._stalks:
            self._stalks[i] = multitangent(self.x, i, self.p)
        return self._stalks[i]

    def dim(self, i: int) -> int:
        return self.stalk(i).dimension

    def restriction(self, face: int, coface: int) -> QMatrix:
        """𝔽^p(Q) -> 𝔽^p(P) for a face Q of P, induced by M_{σ_Q} ⊆ M_{σ_P}."""
        key = (face, coface)
        if key not in self._maps:
            q, c = self.x.cells[face], self.x.cells[coface]
            if q.sigma == c.sigma:
                ambient = QMatrix.identity(len(wedge_indices(q.finite.n, self.p)))
            else:
                pi = self.x.ambient.quotient_map(c.sigma, q.sigma)
                pi_t = QMatrix.from_rows([[pi[i][j] for i in range(len(pi))] for j in range(c.finite.n)],
                                         len(pi)) if c.finite.n else QMatrix.zeros(0, len(pi))
                ambient = induced_wedge_map(pi_t, self.p)
            self._maps[key] = subquotient_map(self.stalk(face).sheaf, self.stalk(coface).sheaf, ambient)
        return self._maps[key]


# cellular model

def _coordinates(basis: list, vectors: list, n: int) -> list[list[Fraction]]:
    columns = [[b[i] for b in basis] for i in range(n)]
    out = []
    for v in vectors:
        c = dense_solve(columns, list(v), len(basis))
        if c is None:
            raise ValueError("vector is not in the tangent space of the cell")
        out.append(c)
    return out


def _sign_of(matrix: list[list[Fraction]]) -> int:
    from .exactlin import det
    value = det(matrix)
    if value == 0:
        raise ValueError("degenerate orientation data")
    return 1 if value > 0 else -1


def incidence(x: WeightedComplex, coface: int, face: int) -> int:
    """Incidence number [P:Q] for a facet Q of P, from the inward vector and the orientations."""
    p, q = x.cells[coface], x.cells[face]
    n = p.finite.n
    basis_p = x.tangent_basis(coface)
    basis_q = x.tangent_basis(face)
    if p.sigma == q.sigma:
        inward = sub(p.finite.relative_interior_point(), q.finite.relative_interior_point())
        vectors = [inward] + list(basis_q)
    else:
        extra = sorted(q.sigma - p.sigma)
        if len(extra) != 1:
            raise ValueError(f"facet {q.describe()} of {p.describe()} jumps more than one stratum")
        u = x.ambient.ray_image(p.sigma, extra[0])
        pi = x.ambient.quotient_map(p.sigma, q.sigma)
        images = [[sum(pi[i][k] * b[k] for k in range(n)) for i in range(len(pi))] for b in basis_p]
        lifts = []
        for target in basis_q:
            coeffs = dense_solve([[img[i] for img in images] for i in range(len(pi))], list(target),
                                 len(basis_p))
            if coeffs is None:
                raise ValueError(f"{q.describe()} is not a projection of {p.describe()}")
            lifts.append([sum(c * b[k] for c, b in zip(coeffs, basis_p)) for k in range(n)])
        vectors = [[-c for c in u]] + lifts
    coords = _coordinates(basis_p, vectors, n)
    return _sign_of([[coords[j][i] for j in range(len(coords))] for i in range(len(basis_p))])


class CellularComplex:
    """Cellular cochains of 𝔽^p: degree q is ⊕ 𝔽^p(P) over q-cells P."""

    def __init__(self, x: WeightedComplex, p: int, sheaf: FSheaf | None = None,
                 cells: Iterable[int] | None = None):
        self.x = x
        self.p = p
        self.sheaf = sheaf or FSheaf(x, p)
        chosen = set(range(len(x.cells))) if cells is None else set(cells)
        self.cells = chosen
        self.cells_by_degree = {q: [i for i in x.cells_of_dim(q) if i in chosen] for q in range(x.dim + 1)}
        self.offsets: dict[int, dict[int, int]] = {}
        for q, cells in self.cells_by_degree.items():
            offset, table = 0, {}
            for i in cells:
                table[i] = offset
                offset += self.sheaf.dim(i)
            self.offsets[q] = table
            self.offsets[q]["__total__"] = offset

    def dim(self, q: int) -> int:
        return self.offsets.get(q, {}).get("__total__", 0)

    def block(self, q: int, cell: int) -> range:
        start = self.offsets[q][cell]
        return range(start, start + self.sheaf.dim(cell))

    @cached_property
    def complex(self) -> CochainComplex:
        dims = {q: self.dim(q) for q in self.cells_by_degree}
        differentials = {}
        for q in range(self.x.dim):
            entries = {}
            for face in self.cells_by_degree[q]:
                if not self.sheaf.dim(face):
                    continue
                for coface in self.x.cofaces(face):
                    if (coface not in self.cells or self.x.cells[coface].dim != q + 1
                            or not self.sheaf.dim(coface)):
                        continue
                    sign = incidence(self.x, coface, face)
                    m = self.sheaf.restriction(face, coface)
                    r0, c0 = self.offsets[q + 1][coface], self.offsets[q][face]
                    for i, j, v in m.items():
                        entries[(r0 + i, c0 + j)] = entries.get((r0 + i, c0 + j), 0) + sign * v
            differentials[q] = QMatrix.from_dict(entries, (dims.get(q + 1, 0), dims[q]))
        return CochainComplex(dims, differentials)


def cellular_complex(x: WeightedComplex, p: int) -> CellularComplex:
    return CellularComplex(x, p)


def hodge_table(x: WeightedComplex, pmax: int | None = None, qmax: int | None = None
                ) -> dict[tuple[int, int], int]:
    """Tropical Hodge numbers h^{p,q} of a compact complex from the cellular model."""
    if not x.is_compact:
        raise ValueError("complex is not compact; use the chain model or the AP complex of a fan")
    pmax = x.dim if pmax is None else pmax
    qmax = x.dim if qmax is None else qmax
    table = {}
    for p in range(pmax + 1):
        cx = CellularComplex(x, p).complex
        for q in range(qmax + 1):
            table[(p, q)] = cx.cohomology(q).dimension if q <= x.dim else 0
    return table


# chain model

class ChainModel:
    """Ordered chains of the face poset restricted to a set of cells, with 𝔽^p on the top cell.

    The chains avoiding a closed set D compute cohomology of the open complement;
    those starting in D give cohomology with supports in D.
    """

    def __init__(self, x: WeightedComplex, p: int, sheaf: FSheaf | None = None):
        self.x = x
        self.p = p
        self.sheaf = sheaf or FSheaf(x, p)
        above = {i: sorted(j for j in x.cofaces(i) if j != i) for i in range(len(x.cells))}
        chains: list[tuple[int, ...]] = []
        frontier = [(i,) for i in range(len(x.cells))]
        while frontier:
            chains.extend(frontier)
            frontier = [c + (j,) for c in frontier for j in above[c[-1]]]
        self.chains = chains

    def _complex(self, chains: list[tuple[int, ...]]) -> tuple[CochainComplex, dict, dict]:
        by_degree: dict[int, list] = {}
        for c in chains:
            by_degree.setdefault(len(c) - 1, []).append(c)
        offsets: dict = {}
        dims = {}
        for k, cs in by_degree.items():
            offset = 0
            for c in cs:
                offsets[c] = offset
                offset += self.sheaf.dim(c[-1])
            dims[k] = offset
        differentials = {}
        for k in by_degree:
            if k + 1 not in by_degree:
                continue
            entries = {}
            for c in by_degree[k + 1]:
                for i in range(len(c)):
                    face = c[:i] + c[i + 1:]
                    if face not in offsets:
                        continue
                    sign = -1 if i % 2 else 1
                    if i == len(c) - 1:
                        m = self.sheaf.restriction(c[-2], c[-1])
                    else:
                        m = QMatrix.identity(self.sheaf.dim(c[-1]))
                    r0, c0 = offsets[c], offsets[face]
                    for a, b, v in m.items():
                        entries[(r0 + a, c0 + b)] = entries.get((r0 + a, c0 + b), 0) + sign * v
            differentials[k] = QMatrix.from_dict(entries, (dims[k + 1], dims[k]))
        return CochainComplex(dims, differentials), offsets, by_degree

    def full(self):
        return self._complex(self.chains)

    def open_part(self, closed: set[int]):
        return self._complex([c for c in self.chains if c[0] not in closed])

    def supported(self, closed: set[int]):
        return self._complex([c for c in self.chains if c[0] in closed])


def _check_closed(x: WeightedComplex, d: Iterable[int]) -> set[int]:
    d = set(d)
    for i in d:
        missing = x.faces[i] - d
        if missing:
            j = min(missing)
            raise ValueError(f"subset is not closed: face {x.cells[j].describe()} of "
                             f"{x.cells[i].describe()} is missing")
    return d


def cell_set(x: WeightedComplex, cells) -> set[int]:
    return {c if isinstance(c, int) else x.find(c) for c in cells}


def chain_hodge(x: WeightedComplex, p: int, q: int) -> int:
    """h^{p,q} of any finite complex from the chain model (no compactness needed)."""
    return ChainModel(x, p).full()[0].cohomology(q).dimension


def open_hodge(x: WeightedComplex, d, p: int, q: int) -> int:
    """Dimension of H^{p,q} of the complement of the closed set D."""
    closed = _check_closed(x, cell_set(x, d))
    return ChainModel(x, p).open_part(closed)[0].cohomology(q).dimension


def relative_hodge(x: WeightedComplex, d, p: int, q: int) -> int:
    """dim H^{p,q}_{Trop,D}(X): cohomology of 𝔽^p with supports in the closed set D."""
    closed = _check_closed(x, cell_set(x, d))
    if not closed:
        return 0
    return ChainModel(x, p).supported(closed)[0].cohomology(q).dimension


@dataclass
class ConnectingReport:
    open_dim: int
    supported_dim: int
    rank: int
    image: QMatrix
    values: list


def connecting_map(x: WeightedComplex, d, p: int, q: int, classes: QMatrix | None = None
                   ) -> ConnectingReport:
    """The connecting map H^{p,q}(X minus D) -> H^{p,q+1}_D(X) on chain-model representatives.

    A cocycle on the complement is extended by zero and its coboundary, which is
    supported on chains starting in D, is the image.
    """
    closed = _check_closed(x, cell_set(x, d))
    model = ChainModel(x, p)
    full, full_offsets, _ = model.full()
    opened, open_offsets, open_degrees = model.open_part(closed)
    supp, supp_offsets, supp_degrees = model.supported(closed)
    group = opened.cohomology(q)
    reps = group.representatives if classes is None else classes
    extended_entries = {}
    for c in open_degrees.get(q, []):
        for k in range(model.sheaf.dim(c[-1])):
            for j in range(reps.cols):
                v = reps[(open_offsets[c] + k, j)]
                if v:
                    extended_entries[(full_offsets[c] + k, j)] = v
    extended = QMatrix.from_dict(extended_entries, (full.dim(q), reps.cols))
    image_full = full.d(q) @ extended
    rows = []
    for c in supp_degrees.get(q + 1, []):
        rows.extend(full_offsets[c] + k for k in range(model.sheaf.dim(c[-1])))
    for c in open_degrees.get(q + 1, []):
        for k in range(model.sheaf.dim(c[-1])):
            for j in range(reps.cols):
                if image_full[(full_offsets[c] + k, j)]:
                    raise AssertionError("extension by zero of a cocycle is not closed on the complement")
    image = image_full.select_rows(rows)
    target = supp.cohomology(q + 1)
    coords = target.coordinates(image)
    values = []
    for c in supp_degrees.get(q + 1, []):
        for k in range(model.sheaf.dim(c[-1])):
            values.append((c, k, [image[(supp_offsets[c] + k, j)] for j in range(reps.cols)]))
    return ConnectingReport(group.dimension, target.dimension, coords.rank(), coords, values)


# products

def convolve(a: dict[tuple[int, int], int], b: dict[tuple[int, int], int]) -> dict[tuple[int, int], int]:
    out: dict[tuple[int, int], int] = {}
    for (p, s), x in a.items():
        for (q, t), y in b.items():
            out[(p + q, s + t)] = out.get((p + q, s + t), 0) + x * y
    return out


def kunneth_check(x: WeightedComplex, y: WeightedComplex) -> tuple[bool, dict]:
    """Compare h^{r,u}(X×Y) with the convolution of the two Hodge tables."""
    hx, hy = hodge_table(x), hodge_table(y)
    expected = convolve(hx, hy)
    product = x.product(y)
    actual = hodge_table(product, x.dim + y.dim, x.dim + y.dim)
    keys = sorted(set(expected) | set(actual))
    table = {k: (actual.get(k, 0), expected.get(k, 0)) for k in keys}
    return all(a == e for a, e in table.values()), table
