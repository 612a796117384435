"""The monodromy-weight spectral sequence of a semi-stable reduction and the eigenwave map ν.

E_1^{p,q}(r) is the sum over labels (u, J) with max(0, p) ≤ u - r and
#J = -p + 2(u - r) + 1 of H^{2r-u+p, p+q-u}(X_J).  Every term is AP cohomology of
a stratum inside the common ``FanSupport``; Gysin maps are inclusions of AP
summands and pullbacks are cellular restrictions carried over by ``Comparison``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .apresolution import APComplex, Comparison, gysin_between, permutation_sign
from .exactlin import QMatrix, column_space_basis, hstack, kernel_basis, solve
from .reduction import ConeData


@dataclass(frozen=True)
class Label:
    u: int
    j: tuple[int, ...]
    a: int
    b: int


@dataclass
class MonodromySS:
    data: ConeData
    r: int
    order: list[int]
    terms: dict[tuple[int, int], list[tuple[Label, int]]]
    d1: dict[tuple[int, int], QMatrix] = field(default_factory=dict)
    e2: dict[tuple[int, int], int] = field(default_factory=dict)
    degenerate: bool | None = None
    e_infinity: dict[tuple[int, int], int] | None = None

    def e1(self) -> dict[tuple[int, int], int]:
        return {pq: sum(d for _, d in ts) for pq, ts in self.terms.items() if sum(d for _, d in ts)}

    def dim(self, pq: tuple[int, int]) -> int:
        return sum(d for _, d in self.terms.get(pq, []))

    def offset(self, pq: tuple[int, int], label: Label) -> int:
        total = 0
        for other, d in self.terms[pq]:
            if other == label:
                return total
            total += d
        raise KeyError(label)


class _Strata:
    """Per-stratum AP complexes and comparison maps, built once and shared."""

    def __init__(self, data: ConeData):
        self.data = data
        self._ap: dict = {}
        self._cmp: dict = {}

    def cone(self, j: Sequence[int]) -> frozenset:
        return frozenset(j)

    def ap(self, j, a: int) -> APComplex:
        key = (frozenset(j), a)
        if key not in self._ap:
            self._ap[key] = APComplex(self.data.support, a, frozenset(j))
        return self._ap[key]

    def comparison(self, j, a: int) -> Comparison:
        key = (frozenset(j), a)
        if key not in self._cmp:
            c = Comparison(self.data.support, frozenset(j), a)
            c.ap = self.ap(j, a)
            self._cmp[key] = c
        return self._cmp[key]

    def dimension(self, j, a: int, b: int) -> int:
        if a < 0 or b < 0:
            return 0
        return self.ap(j, a).dimension(b)


def _strata(data: ConeData) -> _Strata:
    cache = data.__dict__.get("_strata_cache")
    if cache is None:
        cache = data.__dict__["_strata_cache"] = _Strata(data)
    return cache


def nonempty_strata(data: ConeData) -> list[tuple[int, ...]]:
    vertex_set = set(data.vertex_rays)
    return sorted((tuple(sorted(c)) for c in data.support.cones if c and c <= vertex_set),
                  key=lambda j: (len(j), j))


def monodromy_e1(data: ConeData, r: int, order: Sequence[int] | None = None) -> MonodromySS:
    """E_1 terms with their (u, J) labels."""
    strata = _strata(data)
    order = list(order) if order is not None else list(data.vertex_rays)
    d = data.base.dim
    terms: dict[tuple[int, int], list] = {}
    for j in nonempty_strata(data):
        j = tuple(sorted(j, key=order.index))
        size = len(j)
        for k in range(0, size):
            p = 2 * k + 1 - size
            if k < max(0, p):
                continue
            a = r - k + p
            if a < 0:
                continue
            for b in range(0, d + 2 - size):
                dim = strata.dimension(j, a, b)
                if not dim:
                    continue
                q = b - p + r + k
                terms.setdefault((p, q), []).append((Label(r + k, j, a, b), dim))
    for pq in terms:
        terms[pq].sort(key=lambda t: (t[0].u, len(t[0].j), [order.index(i) for i in t[0].j], t[0].b))
    return MonodromySS(data, r, order, terms)


def _pullback(strata: _Strata, j1, j2, a: int, b: int) -> QMatrix:
    return strata.comparison(j1, a).restrict_to(strata.comparison(j2, a), b)


def _gysin(strata: _Strata, j, j_small, a: int, b: int) -> QMatrix:
    return gysin_between(strata.ap(j, a), strata.ap(j_small, a + 1), b)


def monodromy_d1(ss: MonodromySS) -> MonodromySS:
    """Assemble d_1 from signed pullbacks and Gysin maps, assert d_1² = 0 and compute E_2."""
    strata = _strata(ss.data)
    order = ss.order
    d1 = {}
    for (p, q), sources in ss.terms.items():
        target_key = (p + 1, q)
        targets = ss.terms.get(target_key, [])
        if not targets:
            continue
        entries = {}
        for label, dim in sources:
            col = ss.offset((p, q), label)
            for t_label, t_dim in targets:
                row = ss.offset(target_key, t_label)
                block = None
                if t_label.u == label.u + 1 and len(t_label.j) == len(label.j) + 1 \
                        and set(label.j) < set(t_label.j):
                    added = (set(t_label.j) - set(label.j)).pop()
                    sign = (-1) ** ((p + 1) % 2) * permutation_sign(order, t_label.j, added)
                    block = _pullback(strata, label.j, t_label.j, label.a, label.b)
                elif t_label.u == label.u and len(t_label.j) == len(label.j) - 1 \
                        and set(t_label.j) < set(label.j):
                    removed = (set(label.j) - set(t_label.j)).pop()
                    sign = (-1) ** (p % 2) * permutation_sign(order, label.j, removed)
                    block = _gysin(strata, label.j, t_label.j, label.a, label.b)
                if block is None:
                    continue
                for i, jj, v in block.items():
                    entries[(row + i, col + jj)] = sign * v
        d1[(p, q)] = QMatrix.from_dict(entries, (ss.dim(target_key), ss.dim((p, q))))
    for (p, q), m in d1.items():
        nxt = d1.get((p + 1, q))
        if nxt is not None:
            composite = nxt @ m
            if not composite.is_zero():
                raise AssertionError(f"d1 squared is nonzero from E1^{(p, q)} to E1^{(p + 2, q)}")
    ss.d1 = d1
    e2 = {}
    for pq in ss.terms:
        dim = ss.dim(pq)
        if not dim:
            continue
        out_rank = d1[pq].rank() if pq in d1 else 0
        incoming = d1.get((pq[0] - 1, pq[1]))
        in_rank = incoming.rank() if incoming is not None else 0
        value = dim - out_rank - in_rank
        if value:
            e2[pq] = value
    ss.e2 = e2
    ss.degenerate = _degenerate_by_degree(e2)
    ss.e_infinity = dict(e2) if ss.degenerate else None
    return ss


def _degenerate_by_degree(page: dict[tuple[int, int], int]) -> bool:
    """True if every d_k, k ≥ 2, has zero source or zero target for degree reasons."""
    support = [pq for pq, v in page.items() if v]
    if not support:
        return True
    span = max(p for p, _ in support) - min(p for p, _ in support)
    for (p, q) in support:
        for k in range(2, span + 2):
            if page.get((p + k, q - k + 1)):
                return False
    return True


def e2_representatives(ss: MonodromySS, pq: tuple[int, int]) -> tuple[QMatrix, QMatrix]:
    """(cycle representatives of an E_2 basis, boundary basis) in E_1^{p,q} coordinates."""
    dim = ss.dim(pq)
    out = ss.d1.get(pq)
    cycles = kernel_basis(out) if out is not None else QMatrix.identity(dim)
    incoming = ss.d1.get((pq[0] - 1, pq[1]))
    boundaries = column_space_basis(incoming) if incoming is not None and incoming.cols else QMatrix.zeros(dim, 0)
    if not cycles.cols:
        return cycles, boundaries
    combined = hstack(boundaries, cycles) if boundaries.cols else cycles
    _, pivots = combined.rref()
    reps = combined.select_columns([c for c in pivots if c >= boundaries.cols])
    return reps, boundaries


def e2_coordinates(ss: MonodromySS, pq: tuple[int, int], vectors: QMatrix) -> QMatrix:
    reps, boundaries = e2_representatives(ss, pq)
    if not reps.cols:
        return QMatrix.zeros(0, vectors.cols)
    solver = hstack(boundaries, reps) if boundaries.cols else reps
    full = solve(solver, vectors)
    return full.select_rows(range(boundaries.cols, boundaries.cols + reps.cols))


@dataclass
class AbutmentReport:
    ok: bool
    residual: dict[int, tuple[int, int]]
    reason: str = ""


def abutment_check(ss: MonodromySS, hodge: dict[tuple[int, int], int]) -> AbutmentReport:
    """Compare Σ_p dim E_∞^{p, s+r-p} with h^{r,s}(X) for every s."""
    if ss.e_infinity is None:
        return AbutmentReport(False, {}, "pages beyond E_2 are not determined by degree")
    totals: dict[int, int] = {}
    for (p, q), v in ss.e_infinity.items():
        s = p + q - ss.r
        totals[s] = totals.get(s, 0) + v
    expected = {s: v for (r, s), v in hodge.items() if r == ss.r}
    keys = sorted(set(totals) | set(expected))
    residual = {s: (totals.get(s, 0), expected.get(s, 0)) for s in keys}
    return AbutmentReport(all(a == b for a, b in residual.values()), residual)


@dataclass
class EigenwaveMap:
    r: int
    blocks: dict[tuple[int, int], QMatrix]
    e2_blocks: dict[tuple[int, int], QMatrix]

    def e2_rank(self, pq: tuple[int, int]) -> int:
        m = self.e2_blocks.get(pq)
        return m.rank() if m is not None and m.rows and m.cols else 0

    def total_e2_rank(self) -> int:
        return sum(self.e2_rank(pq) for pq in self.e2_blocks)


def eigenwave(ss_r: MonodromySS, ss_lower: MonodromySS) -> EigenwaveMap:
    """ν_{E_1}: E_1^{p,q}(r) -> E_1^{p+2,q-2}(r-1), identity on common (u, J) labels; and ν_{E_2}."""
    if ss_lower.r != ss_r.r - 1:
        raise ValueError("eigenwave needs consecutive r")
    if ss_r.order != ss_lower.order:
        raise ValueError("both spectral sequences must use the same order on I")
    blocks = {}
    for (p, q), sources in ss_r.terms.items():
        target_key = (p + 2, q - 2)
        targets = {label_key(t): t for t, _ in ss_lower.terms.get(target_key, [])}
        entries = {}
        for label, dim in sources:
            if label.u - ss_r.r < max(0, p + 1):
                continue
            t = targets.get(label_key(label))
            if t is None:
                raise AssertionError(f"ν target for label {label} is missing")
            row, col = ss_lower.offset(target_key, t), ss_r.offset((p, q), label)
            for i in range(dim):
                entries[(row + i, col + i)] = 1
        blocks[(p, q)] = QMatrix.from_dict(entries, (ss_lower.dim(target_key), ss_r.dim((p, q))))
    for (p, q), nu in blocks.items():
        d_lower = ss_lower.d1.get((p + 2, q - 2))
        d_upper = ss_r.d1.get((p, q))
        nu_next = blocks.get((p + 1, q))
        left = d_lower @ nu if d_lower is not None else None
        right = nu_next @ d_upper if nu_next is not None and d_upper is not None else None
        left_zero = left is None or left.is_zero()
        right_zero = right is None or right.is_zero()
        if left is not None and right is not None:
            if left != right:
                raise AssertionError(f"ν does not commute with d1 at E1^{(p, q)}")
        elif not (left_zero and right_zero):
            raise AssertionError(f"ν does not commute with d1 at E1^{(p, q)}")
    e2_blocks = {}
    for (p, q), nu in blocks.items():
        reps, _ = e2_representatives(ss_r, (p, q))
        if not reps.cols:
            continue
        images = nu @ reps
        target = (p + 2, q - 2)
        if not ss_lower.dim(target):
            continue
        e2_blocks[(p, q)] = e2_coordinates(ss_lower, target, images)
    return EigenwaveMap(ss_r.r, blocks, e2_blocks)


def label_key(label: Label) -> tuple:
    return (label.u, tuple(sorted(label.j)), label.a, label.b)


@dataclass
class SmoothnessReport:
    ok: bool
    witnesses: list[dict]


def smoothness_vanishing_check(data: ConeData, rmax: int | None = None) -> SmoothnessReport:
    """E_1^{p,q}(r) = 0 unless q = 2r; otherwise list (r, p, q, J) of the offending summands."""
    rmax = data.base.dim if rmax is None else rmax
    witnesses = []
    for r in range(rmax + 1):
        ss = monodromy_e1(data, r)
        for (p, q), terms in ss.terms.items():
            if q == 2 * r:
                continue
            for label, dim in terms:
                witnesses.append({"r": r, "p": p, "q": q, "J": list(label.j), "u": label.u,
                                  "h": [label.a, label.b], "dim": dim})
    return SmoothnessReport(not witnesses, witnesses)
