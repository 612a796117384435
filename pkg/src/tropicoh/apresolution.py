"""Amini–Piquerez complexes of compactified fans, Gysin maps and the weight spectral sequence of an open pair.

A compactified fan is described by a ``FanSupport``: a unimodular ambient fan Φ and
the set of its cones making up X.  The closed stratum of X over a cone β is the
compactified star fan of β; its AP complex is the part of the AP complex of X on
cones containing β, so all strata share one set of coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterable

from .cohomology import FSheaf, CellularComplex, annihilator, multitangent_span
from .exactlin import (
    CochainComplex,
    FilteredComplex,
    QMatrix,
    Subquotient,
    contraction_matrix,
    induced_wedge_map,
    solve,
    subquotient_map,
    wedge_indices,
    wedge_of_vectors,
)
from .polyhedra import SemiOpenPolyhedron, union_difference_witness
from .troptoric import AmbientFan, Cone, ExtendedCell, WeightedComplex

EMPTY: Cone = frozenset()


def _transpose(matrix: list[list[int]], rows: int, cols: int) -> QMatrix:
    """QMatrix of the transpose of a rows × cols integer matrix."""
    return QMatrix.from_rows([[matrix[i][j] for i in range(rows)] for j in range(cols)], rows)


class FanSupport:
    """A subfan of a unimodular ambient fan, standing for its closure in the ambient toric variety."""

    def __init__(self, ambient: AmbientFan, cones: Iterable[Iterable[int]], weights: dict | None = None):
        if not ambient.is_unimodular:
            raise ValueError("ambient fan is not unimodular")
        cones = {frozenset(c) for c in cones}
        closed = set()
        for c in cones:
            ambient.normalize_cone(c)
            for k in range(len(c) + 1):
                closed.update(frozenset(f) for f in combinations(sorted(c), k))
        self.ambient = ambient
        self.cones = frozenset(closed)
        self.dim = max(len(c) for c in self.cones)
        self.weights = {frozenset(k): v for k, v in (weights or {}).items()}
        self._sheaves: dict = {}

    @classmethod
    def full(cls, ambient: AmbientFan) -> "FanSupport":
        return cls(ambient, ambient.fan.maximal_cones())

    @cached_property
    def maximal(self) -> list[Cone]:
        return sorted((c for c in self.cones if not any(c < d for d in self.cones)), key=sorted)

    def star(self, beta: Cone) -> list[Cone]:
        return sorted((c for c in self.cones if beta <= c), key=lambda c: (len(c), sorted(c)))

    def rank(self, sigma: Cone) -> int:
        return self.ambient.quotient_rank(sigma)

    def f_space(self, sigma: Cone, k: int) -> Subquotient:
        """𝔽^k(0_σ) as a quotient of ∧^k M_σ."""
        key = (sigma, k)
        if key not in self._sheaves:
            n = self.rank(sigma)
            bases = [[self.ambient.ray_image(sigma, i) for i in sorted(c - sigma)] for c in self.star(sigma)]
            span = multitangent_span(bases, n, k)
            size = len(wedge_indices(n, k))
            self._sheaves[key] = Subquotient(size, QMatrix.identity(size), annihilator(span))
        return self._sheaves[key]

    def contraction(self, tau: Cone, ray: int, k: int) -> QMatrix:
        """𝔽^k(0_τ) -> 𝔽^{k-1}(0_σ) for σ = τ + ray: right contraction by the ray, read in M_σ."""
        sigma = tau | {ray}
        n_tau, n_sigma = self.rank(tau), self.rank(sigma)
        u = self.ambient.ray_image(tau, ray)
        contract = contraction_matrix(n_tau, k, u)
        s = self.ambient.section(sigma, tau)
        restrict = induced_wedge_map(_transpose(s, n_tau, n_sigma), k - 1) if n_sigma or k == 1 else None
        if restrict is None:
            restrict = QMatrix.zeros(len(wedge_indices(n_sigma, k - 1)), contract.rows)
        return subquotient_map(self.f_space(tau, k), self.f_space(sigma, k - 1), restrict @ contract)

    # the cellular model on the same cones
    @cached_property
    def cell_complex(self) -> WeightedComplex:
        """The cubical cells (τ, C), τ ⊆ C, of the closure, as a weighted complex."""
        pairs = [(tau, c) for c in sorted(self.cones, key=lambda c: (len(c), sorted(c)))
                 for tau in self.star_faces(c)]
        cells = [ExtendedCell(tau, self.ambient.image_cone(tau, c)) for tau, c in pairs]
        index = {pc: i for i, pc in enumerate(pairs)}
        faces = {}
        for (tau, c), i in index.items():
            faces[i] = {index[(t, d)] for (t, d) in pairs if tau <= t and d <= c and t <= d}
        top = max(len(c) for c in self.cones)
        weights = {index[(EMPTY, c)]: self.weights.get(c, 1) for c in self.cones if len(c) == top}
        return WeightedComplex(self.ambient, cells, faces, weights)

    @staticmethod
    def star_faces(c: Cone) -> list[Cone]:
        return [frozenset(f) for k in range(len(c) + 1) for f in combinations(sorted(c), k)]

    def cell_index(self, tau: Cone, c: Cone) -> int:
        return self.cell_complex.find(ExtendedCell(tau, self.ambient.image_cone(tau, c)))

    def stratum_cells(self, beta: Cone) -> set[int]:
        x = self.cell_complex
        return {i for i, cell in enumerate(x.cells) if beta <= cell.sigma}


def support_of(x: WeightedComplex) -> FanSupport:
    """The cones of the ambient fan whose union is the sedentarity-zero part of a fan closure."""
    ambient = x.ambient
    finite = [c for c in x.cells if not c.sigma]
    for c in finite:
        if not c.finite.is_cone:
            raise ValueError(f"{c.describe()} is not a cone: X is not the closure of a fan")
    chosen = []
    for sigma in ambient.cones:
        polyhedron = ambient.image_cone(EMPTY, sigma)
        point = polyhedron.relative_interior_point()
        if any(c.finite.contains_point(point) for c in finite):
            if not any(c.finite.contains(polyhedron) for c in finite):
                raise ValueError(f"cone {sorted(sigma)} straddles cells of X")
            chosen.append(sigma)
    pieces = [SemiOpenPolyhedron(ambient.image_cone(EMPTY, s)) for s in chosen]
    support = [SemiOpenPolyhedron(c.finite) for c in finite]
    if union_difference_witness(support, pieces) is not None:
        raise ValueError("X is not a union of cones of the ambient fan")
    top = x.dim
    weights = {}
    for sigma in chosen:
        if len(sigma) == top:
            point = ambient.image_cone(EMPTY, sigma).relative_interior_point()
            for i in x.top_cells():
                if not x.cells[i].sigma and x.cells[i].finite.contains_point(point):
                    weights[sigma] = x.weights[i]
    return FanSupport(ambient, chosen, weights)


@dataclass
class Summand:
    cone: Cone
    k: int
    degree: int
    offset: int
    dim: int


class APComplex:
    """The AP complex of level r of the closed stratum over ``base``, away from the rays ``avoid``.

    Summands are σ ⊇ base with σ ∩ avoid = ∅, carrying 𝔽^{r-dim σ+dim base}(0_σ) in
    degree r + dim σ - dim base.
    """

    def __init__(self, support: FanSupport, r: int, base: Iterable[int] = (), avoid: Iterable[int] = ()):
        self.support = support
        self.r = r
        self.base = frozenset(base)
        self.avoid = frozenset(avoid)
        if self.base not in support.cones:
            raise ValueError(f"stratum {sorted(self.base)} is empty")
        self.summands: dict[Cone, Summand] = {}
        offsets: dict[int, int] = {}
        for sigma in support.star(self.base):
            if sigma & self.avoid:
                continue
            q = len(sigma) - len(self.base)
            k = r - q
            if k < 0:
                continue
            dim = support.f_space(sigma, k).dimension
            degree = r + q
            self.summands[sigma] = Summand(sigma, k, degree, offsets.get(degree, 0), dim)
            offsets[degree] = offsets.get(degree, 0) + dim
        self.dims = offsets

    def differential(self, degree: int) -> QMatrix:
        entries = {}
        for tau, s in self.summands.items():
            if s.degree != degree or not s.dim:
                continue
            for ray in sorted({i for c in self.support.star(tau) for i in c} - tau):
                sigma = tau | {ray}
                t = self.summands.get(sigma)
                if t is None or not t.dim:
                    continue
                m = self.support.contraction(tau, ray, s.k)
                for i, j, v in m.items():
                    entries[(t.offset + i, s.offset + j)] = v
        return QMatrix.from_dict(entries, (self.dims.get(degree + 1, 0), self.dims.get(degree, 0)))

    @cached_property
    def complex(self) -> CochainComplex:
        dims = dict(self.dims)
        return CochainComplex(dims, {d: self.differential(d) for d in dims})

    def cohomology(self, s: int):
        """H^{r,s} as the AP cohomology in degree r + s."""
        return self.complex.cohomology(self.r + s)

    def dimension(self, s: int) -> int:
        return self.cohomology(s).dimension

    def hodge_row(self) -> dict[int, int]:
        return {s: self.dimension(s) for s in range(0, self.support.dim - len(self.base) + 1)}


def build_ap(x: WeightedComplex | FanSupport, r: int) -> APComplex:
    support = x if isinstance(x, FanSupport) else support_of(x)
    return APComplex(support, r)


def ap_hodge_table(support: FanSupport, base: Cone = EMPTY, avoid: Iterable[int] = ()) -> dict:
    d = support.dim - len(base)
    out = {}
    for r in range(d + 1):
        ap = APComplex(support, r, base, avoid)
        for s in range(d + 1):
            out[(r, s)] = ap.dimension(s)
    return out


def gysin(support: FanSupport, sigma: Iterable[int], r: int, p: int, base: Iterable[int] = ()) -> QMatrix:
    """Gysin map H^{r,p}(X_σ) -> H^{r+s,p+s}(X_base), s = dim σ - dim base, on AP cohomology bases."""
    sigma, base = frozenset(sigma), frozenset(base)
    if sigma not in support.cones:
        raise ValueError(f"stratum {sorted(sigma)} is empty")
    if not base <= sigma:
        raise ValueError("Gysin map needs the base cone to be a face of σ")
    s = len(sigma) - len(base)
    small = APComplex(support, r, sigma)
    big = APComplex(support, r + s, base)
    return gysin_between(small, big, p)


def gysin_between(small: APComplex, big: APComplex, p: int) -> QMatrix:
    s = len(small.base) - len(big.base)
    degree = small.r + p
    target_degree = degree + 2 * s
    source = small.complex.cohomology(degree)
    entries = {}
    for sigma, a in small.summands.items():
        if a.degree != degree:
            continue
        b = big.summands[sigma]
        for i in range(a.dim):
            entries[(b.offset + i, a.offset + i)] = 1
    inclusion = QMatrix.from_dict(entries, (big.complex.dim(target_degree), small.complex.dim(degree)))
    images = inclusion @ source.representatives
    check = big.complex.d(target_degree) @ images
    if not check.is_zero():
        raise AssertionError("Gysin inclusion does not send cocycles to cocycles")
    return big.complex.cohomology(target_degree).coordinates(images)


# comparison with the cellular model

class Comparison:
    """Cellular cocycles of 𝔽^a on the stratum over β mapped to AP cocycles of level a.

    A cocycle is read on the cells (β, C) and evaluated as
    ω ↦ ω(b_1 ∧ ... ∧ b_k ∧ S(·)), with b_i the oriented tangent basis of the cell and
    S: N_C -> N_β the chosen section; the result lies in 𝔽^{a-k}(0_C).
    """

    def __init__(self, support: FanSupport, beta: Iterable[int], a: int):
        self.support = support
        self.beta = frozenset(beta)
        self.a = a
        x = support.cell_complex
        self.x = x
        self.cells = support.stratum_cells(self.beta)
        self.sheaf = FSheaf(x, a)
        self.cellular = CellularComplex(x, a, self.sheaf, cells=self.cells)
        self.ap = APComplex(support, a, self.beta)

    def theta(self, k: int) -> QMatrix:
        """Map from cellular degree k to AP degree a + k."""
        ambient = self.support.ambient
        entries = {}
        n_beta = ambient.quotient_rank(self.beta)
        for c, s in self.ap.summands.items():
            if len(c) - len(self.beta) != k or s.degree != self.a + k or not s.dim:
                continue
            cell = self.support.cell_index(self.beta, c)
            if not self.sheaf.dim(cell):
                continue
            basis = self.x.tangent_basis(cell)
            n_c = ambient.quotient_rank(c)
            sec = ambient.section(c, self.beta)
            lifted = [[sec[i][j] for i in range(n_beta)] for j in range(n_c)]
            rows = []
            for index in wedge_indices(n_c, self.a - k):
                rows.append(wedge_of_vectors(list(basis) + [lifted[j] for j in index], n_beta))
            size = len(wedge_indices(n_beta, self.a))
            ambient_map = QMatrix.from_rows(rows, size) if rows else QMatrix.zeros(0, size)
            m = subquotient_map(self.sheaf.stalk(cell).sheaf, self.support.f_space(c, self.a - k), ambient_map)
            r0 = s.offset
            c0 = self.cellular.offsets[k][cell]
            for i, j, v in m.items():
                entries[(r0 + i, c0 + j)] = v
        return QMatrix.from_dict(entries, (self.ap.complex.dim(self.a + k), self.cellular.dim(k)))

    def transfer(self, k: int) -> QMatrix:
        """Invertible matrix H^k_cell -> H^{a+k}_AP on the chosen cohomology bases."""
        cell_group = self.cellular.complex.cohomology(k)
        images = self.theta(k) @ cell_group.representatives
        if not (self.ap.complex.d(self.a + k) @ images).is_zero():
            raise AssertionError(f"comparison map does not send cocycles to cocycles (degree {k})")
        ap_group = self.ap.complex.cohomology(self.a + k)
        matrix = ap_group.coordinates(images)
        if matrix.rows != matrix.cols or matrix.rank() != matrix.rows:
            raise AssertionError(f"comparison map is not an isomorphism in degree {k}: "
                                 f"{matrix.rows} AP classes, {matrix.cols} cellular classes, rank {matrix.rank()}")
        return matrix

    def restrict_to(self, other: "Comparison", k: int) -> QMatrix:
        """Pullback to a deeper stratum on AP cohomology bases: Θ' ∘ restriction ∘ Θ^-1."""
        if not self.beta <= other.beta:
            raise ValueError("pullback goes to a deeper stratum")
        mine = self.cellular.complex.cohomology(k)
        theirs = other.cellular
        entries = {}
        for cell in other.cells:
            q = self.x.cells[cell].dim
            if q != k:
                continue
            for t in range(self.sheaf.dim(cell)):
                entries[(theirs.offsets[k][cell] + t, self.cellular.offsets[k][cell] + t)] = 1
        restriction = QMatrix.from_dict(entries, (theirs.dim(k), self.cellular.dim(k)))
        images = restriction @ mine.representatives
        coords = other.cellular.complex.cohomology(k).coordinates(images)
        return other.transfer(k) @ coords @ inverse(self.transfer(k))


def inverse(m: QMatrix) -> QMatrix:
    if m.rows == 0:
        return m
    return solve(m, QMatrix.identity(m.rows))


def pullback(support: FanSupport, base: Iterable[int], deeper: Iterable[int], a: int, b: int) -> QMatrix:
    """Restriction H^{a,b}(X_base) -> H^{a,b}(X_deeper) on AP cohomology bases."""
    return Comparison(support, base, a).restrict_to(Comparison(support, deeper, a), b)


# the weight spectral sequence of an open pair

def permutation_sign(order: list, subset: Iterable, removed) -> int:
    """sgn(o(J'), o(J)) for J = J' ∪ {j}: parity of the elements of J preceding j in the order."""
    position = {x: i for i, x in enumerate(order)}
    before = sum(1 for x in subset if position[x] < position[removed])
    return -1 if before % 2 else 1


@dataclass
class WeightSS:
    r: int
    e1: dict
    pages: dict
    limit: dict
    abutment: dict
    e1_expected: dict
    d1_square_zero: bool
    total: dict

    @property
    def ok(self) -> bool:
        totals: dict[int, int] = {}
        for (p, q), v in self.limit.items():
            totals[p + q] = totals.get(p + q, 0) + v
        degrees = set(totals) | {s + self.r for s, v in self.abutment.items() if v}
        return (self.e1 == self.e1_expected and self.d1_square_zero
                and all(totals.get(n, 0) == self.abutment.get(n - self.r, 0) for n in degrees))

    def antidiagonal_totals(self) -> dict[int, int]:
        totals: dict[int, int] = {}
        for (p, q), v in self.limit.items():
            totals[p + q - self.r] = totals.get(p + q - self.r, 0) + v
        return totals


def weight_ss_open(x: WeightedComplex | FanSupport, boundary: Iterable[int], r: int,
                   order: list | None = None) -> WeightSS:
    """Weight spectral sequence for U = X minus the boundary strata over the rays in ``boundary``.

    The total complex has summands (J, τ), J ⊆ boundary ∩ rays(τ), carrying
    𝔽^{r-dim τ}(0_τ) in degree r + dim τ - #J and filtration level -#J.  Its
    differential is (-1)^{#J} times the AP differential of D_J plus the signed
    identity maps (J, τ) -> (J minus j, τ).
    """
    support = x if isinstance(x, FanSupport) else support_of(x)
    rays = sorted(boundary)
    order = list(order) if order is not None else rays
    labels = []
    for tau in support.star(EMPTY):
        k = r - len(tau)
        if k < 0:
            continue
        dim = support.f_space(tau, k).dimension
        if not dim:
            continue
        inside = sorted(set(rays) & tau, key=order.index)
        for size in range(len(inside) + 1):
            for j in combinations(inside, size):
                labels.append((frozenset(j), tau, k, r + len(tau) - size, dim))
    offsets: dict = {}
    dims: dict[int, int] = {}
    levels: dict[int, list[int]] = {}
    for j, tau, k, degree, dim in labels:
        offsets[(j, tau)] = dims.get(degree, 0)
        dims[degree] = dims.get(degree, 0) + dim
        levels.setdefault(degree, []).extend([-len(j)] * dim)
    entries: dict[int, dict] = {d: {} for d in dims}
    for j, tau, k, degree, dim in labels:
        source = offsets[(j, tau)]
        sign = -1 if len(j) % 2 else 1
        for ray in sorted({i for c in support.star(tau) for i in c} - tau):
            sigma = tau | {ray}
            target = offsets.get((j, sigma))
            if target is None:
                continue
            m = support.contraction(tau, ray, k)
            for a, b, v in m.items():
                entries[degree][(target + a, source + b)] = sign * v
        p = -len(j)
        for removed in j:
            smaller = j - {removed}
            target = offsets[(smaller, tau)]
            sign = (-1) ** (p % 2) * permutation_sign(order, j, removed)
            for a in range(dim):
                entries[degree][(target + a, source + a)] = sign
    differentials = {d: QMatrix.from_dict(e, (dims.get(d + 1, 0), dims[d])) for d, e in entries.items()}
    total = CochainComplex(dims, differentials, check=False)
    try:
        total.check_square_zero()
        square_zero = True
    except ValueError:
        square_zero = False
    filtered = FilteredComplex(total, levels)
    pages = filtered.pages()
    expected: dict = {}
    strata = sorted({j for j, *_ in labels}, key=lambda s: (len(s), sorted(s)))
    for j in strata:
        p = -len(j)
        ap = APComplex(support, r + p, j)
        for s in range(0, support.dim + 1):
            if r + p < 0:
                continue
            value = ap.dimension(s)
            if value:
                q = s + r - p
                expected[(p, q)] = expected.get((p, q), 0) + value
    opened = APComplex(support, r, EMPTY, rays)
    abutment = {s: opened.dimension(s) for s in range(0, support.dim + 1)}
    totals_direct = {d: total.cohomology(d).dimension for d in total.degrees()} if square_zero else {}
    return WeightSS(r, pages.get(1, {}), pages, filtered.limit(), abutment, expected, square_zero, totals_direct)
