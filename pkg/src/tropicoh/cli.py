"""Command-line front end: JSON documents in, deterministic JSON reports out.

Exit status: 0 when every checked invariant holds, 2 for malformed input or unmet
preconditions, 3 when an invariant fails on valid input, 4 when an internal assertion trips.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .apresolution import weight_ss_open
from .cohomology import hodge_table
from .monodromy import abutment_check, eigenwave, monodromy_d1, monodromy_e1, smoothness_vanishing_check
from .polyhedra import Fan, PolyComplex, Polyhedron, stratification_with_doubling
from .reduction import check_reduction, fan_over, semistable_reduction
from .troptoric import AmbientFan, ExtendedCell, WeightedComplex, check_balancing, check_regular_at_infinity
from .unimod import certify_structure, core_complex, extend_structure, finite_part, structured_complex, \
    unimodularize_compact

COMMANDS = ("check", "hodge", "weight-ss", "reduce", "ss", "eigenwave", "unimodularize", "certify")
EXIT_OK, EXIT_INPUT, EXIT_INVARIANT, EXIT_BUG = 0, 2, 3, 4


class DocumentError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class InputDocument:
    raw: dict
    n: int
    ambient: AmbientFan
    complex: WeightedComplex
    structure: PolyComplex | None = None
    k: int | None = None
    smooth: bool | None = None
    boundary: list[int] = field(default_factory=list)

    @property
    def digest(self) -> str:
        canonical = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


# parsing

def _expect(value, kind, path: str, what: str):
    if kind is int:
        ok = isinstance(value, int) and not isinstance(value, bool)
    else:
        ok = isinstance(value, kind)
    if not ok:
        raise DocumentError(path, f"expected {what}")
    return value


def _rational(value, path: str) -> Fraction:
    if isinstance(value, bool) or isinstance(value, float):
        raise DocumentError(path, "expected an integer or a \"num/den\" string")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            if "/" in value:
                num, den = value.split("/")
                return Fraction(int(num), int(den))
            return Fraction(int(value))
        except (ValueError, ZeroDivisionError):
            raise DocumentError(path, f"cannot read {value!r} as a rational") from None
    raise DocumentError(path, "expected an integer or a \"num/den\" string")


def _vector(value, length: int, path: str, integral: bool) -> tuple:
    _expect(value, list, path, "a list")
    if len(value) != length:
        raise DocumentError(path, f"has length {len(value)}, expected {length}")
    if integral:
        return tuple(_expect(x, int, f"{path}[{i}]", "an integer") for i, x in enumerate(value))
    return tuple(_rational(x, f"{path}[{i}]") for i, x in enumerate(value))


def _vectors(value, length: int, path: str, integral: bool) -> list[tuple]:
    _expect(value, list, path, "a list")
    return [_vector(v, length, f"{path}[{i}]", integral) for i, v in enumerate(value)]


def _polyhedron(obj, m: int, path: str) -> Polyhedron:
    _expect(obj, dict, path, "an object")
    if "vertices" not in obj:
        raise DocumentError(path, "missing \"vertices\"")
    vertices = _vectors(obj["vertices"], m, f"{path}.vertices", False)
    if not vertices:
        raise DocumentError(f"{path}.vertices", "needs at least one vertex")
    rays = _vectors(obj.get("rays", []), m, f"{path}.rays", True)
    lines = _vectors(obj.get("lines", []), m, f"{path}.lines", True)
    return Polyhedron.from_generators(m, vertices, rays, lines)


def _ambient(obj, n: int) -> AmbientFan:
    path = "$.ambient"
    _expect(obj, dict, path, "an object")
    rays = _vectors(obj.get("rays", []), n, f"{path}.rays", True)
    cones = []
    for i, c in enumerate(_expect(obj.get("cones", []), list, f"{path}.cones", "a list")):
        _expect(c, list, f"{path}.cones[{i}]", "a list of ray indices")
        for j, index in enumerate(c):
            _expect(index, int, f"{path}.cones[{i}][{j}]", "a ray index")
            if not 0 <= index < len(rays):
                raise DocumentError(f"{path}.cones[{i}][{j}]", f"ray index {index} out of range")
        cones.append(c)
    try:
        fan = Fan(n, rays, cones)
    except ValueError as error:
        raise DocumentError(f"{path}.rays", str(error)) from None
    ambient = AmbientFan(fan)
    flags = _expect(obj.get("flags", {}), dict, f"{path}.flags", "an object")
    checks = {"unimodular": lambda: ambient.is_unimodular, "complete": lambda: ambient.is_complete}
    for name, value in flags.items():
        if name not in checks:
            raise DocumentError(f"{path}.flags.{name}", "unknown flag")
        if _expect(value, bool, f"{path}.flags.{name}", "a boolean") != checks[name]():
            raise DocumentError(f"{path}.flags.{name}", f"declared {value} but the fan says otherwise")
    return ambient


def parse(text: str) -> InputDocument:
    """Read and validate an input document; every error names a JSON path."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as error:
        raise DocumentError("$", f"invalid JSON at line {error.lineno}: {error.msg}") from None
    _expect(raw, dict, "$", "an object")
    for key in ("lattice_rank", "ambient", "cells", "weights"):
        if key not in raw:
            raise DocumentError("$", f"missing \"{key}\"")
    n = _expect(raw["lattice_rank"], int, "$.lattice_rank", "a non-negative integer")
    if n < 0:
        raise DocumentError("$.lattice_rank", "must be non-negative")
    ambient = _ambient(raw["ambient"], n)
    cones = set(ambient.cones)
    cells = []
    for i, obj in enumerate(_expect(raw["cells"], list, "$.cells", "a list")):
        path = f"$.cells[{i}]"
        _expect(obj, dict, path, "an object")
        sed = _expect(obj.get("sedentarity", []), list, f"{path}.sedentarity", "a list of ray indices")
        sigma = frozenset(sed)
        if sigma not in cones:
            raise DocumentError(f"{path}.sedentarity", f"{sorted(sed)} is not a cone of the ambient fan")
        cells.append(ExtendedCell(sigma, _polyhedron(obj, n - len(sigma), path)))
    if not cells:
        raise DocumentError("$.cells", "needs at least one cell")
    weights_raw = raw["weights"]
    if isinstance(weights_raw, list):
        weights_raw = {str(i): w for i, w in enumerate(weights_raw)}
    _expect(weights_raw, dict, "$.weights", "an object or a list")
    weights = {}
    for key, w in weights_raw.items():
        path = f"$.weights[{key}]"
        if not key.isdigit() or int(key) >= len(cells):
            raise DocumentError(path, f"cell index {key} out of range")
        if _expect(w, int, path, "an integer") <= 0:
            raise DocumentError(path, f"weight {w} is not positive")
        weights[int(key)] = w
    missing = [i for i in range(len(cells)) if i not in weights]
    if missing:
        raise DocumentError("$.weights", f"no weight for cell {missing[0]}")
    try:
        complex_ = WeightedComplex.from_maximal(ambient, [(c, weights[i]) for i, c in enumerate(cells)])
    except ValueError as error:
        raise DocumentError("$.cells", str(error)) from None
    doc = InputDocument(raw, n, ambient, complex_)
    if "k" in raw:
        doc.k = _expect(raw["k"], int, "$.k", "a positive integer")
        if doc.k <= 0:
            raise DocumentError("$.k", "must be positive")
    if "structure" in raw:
        items = _expect(raw["structure"], list, "$.structure", "a list of cells")
        doc.structure = PolyComplex.from_maximal(
            _polyhedron(obj, n, f"$.structure[{i}]") for i, obj in enumerate(items))
    if "smooth" in raw:
        doc.smooth = _expect(raw["smooth"], bool, "$.smooth", "a boolean")
    if "boundary" in raw:
        for i, index in enumerate(_expect(raw["boundary"], list, "$.boundary", "a list of ray indices")):
            _expect(index, int, f"$.boundary[{i}]", "a ray index")
            if not 0 <= index < len(ambient.rays):
                raise DocumentError(f"$.boundary[{i}]", f"ray index {index} out of range")
        doc.boundary = sorted(raw["boundary"])
    return doc


# serialization

def _number(x) -> int | str:
    x = Fraction(x)
    return int(x) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def polyhedron_json(p: Polyhedron) -> dict:
    out: dict[str, Any] = {"vertices": [[_number(x) for x in v] for v in p.vertices]}
    if p.rays:
        out["rays"] = [[int(x) for x in r] for r in p.rays]
    if p.lines:
        out["lines"] = [[int(x) for x in l] for l in p.lines]
    return out


def to_document(x: WeightedComplex, **extra) -> dict:
    """An input document describing X by its weighted top cells."""
    fan = x.ambient.fan
    top = x.top_cells()
    cells = []
    for i in top:
        obj = {"sedentarity": sorted(x.cells[i].sigma)}
        obj.update(polyhedron_json(x.cells[i].finite))
        cells.append(obj)
    doc = {
        "lattice_rank": x.ambient.n,
        "ambient": {"rays": [list(r) for r in fan.rays], "cones": [sorted(c) for c in fan.maximal_cones()]},
        "cells": cells,
        "weights": {str(t): x.weight(i) for t, i in enumerate(top)},
    }
    doc.update(extra)
    return doc


def _table(d: dict) -> dict[str, int]:
    return {f"{a},{b}": v for (a, b), v in sorted(d.items())}


# commands

@dataclass
class Outcome:
    ok: bool
    result: dict
    lines: list[str]


def _structure_for(doc: InputDocument) -> WeightedComplex:
    if doc.structure is None:
        return doc.complex
    return structured_complex(doc.complex, doc.structure)


def _k(doc: InputDocument, flags) -> int:
    if flags.k is not None:
        return flags.k
    return doc.k if doc.k is not None else 1


def _degrees(doc: InputDocument, flags) -> list[int]:
    return [flags.r] if flags.r is not None else list(range(doc.complex.dim + 1))


def run_check(doc: InputDocument, flags) -> Outcome:
    x = doc.complex
    balanced, bal_w = check_balancing(x)
    regular, reg_w = check_regular_at_infinity(x)
    result: dict[str, Any] = {
        "balanced": balanced, "balancing_witnesses": [_witness(w) for w in bal_w],
        "regular_at_infinity": regular, "regularity_witnesses": [_witness(w) for w in reg_w],
        "structure": None,
    }
    lines = [f"balanced: {balanced}", f"regular at infinity: {regular}"]
    ok = balanced and regular
    if doc.structure is not None:
        report = certify_structure(x, doc.structure, _k(doc, flags), doc.ambient.fan)
        result["structure"] = _certificate(report)
        lines.append(f"structure certified: {report.ok}")
        ok &= report.ok
    for w in bal_w:
        lines.append(f"  unbalanced at {w.get('description', w)}")
    for w in reg_w:
        lines.append(f"  not regular at {w.get('description', w)}")
    return Outcome(ok, result, lines)


def _witness(w) -> Any:
    if isinstance(w, dict):
        return {str(k): _witness(v) for k, v in w.items()}
    if isinstance(w, (list, tuple)):
        return [_witness(v) for v in w]
    if isinstance(w, (str, bool)) or w is None:
        return w
    if hasattr(w, "numerator") and hasattr(w, "denominator"):
        return _number(Fraction(int(w.numerator), int(w.denominator)))
    return str(w)


def _grid(table: dict[tuple[int, int], int]) -> list[str]:
    if not table:
        return ["(empty)"]
    ps = sorted({p for p, _ in table})
    qs = sorted({q for _, q in table})
    lines = ["p\\q " + " ".join(f"{q:>3}" for q in qs)]
    for p in ps:
        lines.append(f"{p:>3} " + " ".join(f"{table.get((p, q), 0):>3}" for q in qs))
    return lines


def run_hodge(doc: InputDocument, flags) -> Outcome:
    table = hodge_table(doc.complex, flags.pmax, flags.qmax)
    return Outcome(True, {"hodge": _table(table)}, _grid(table))


def run_weight_ss(doc: InputDocument, flags) -> Outcome:
    if not doc.boundary:
        raise DocumentError("$.boundary", "weight-ss needs the boundary rays")
    order = _order(doc.boundary, flags)
    ok = True
    out = {}
    lines = []
    for r in _degrees(doc, flags):
        ws = weight_ss_open(doc.complex, doc.boundary, r, order)
        out[str(r)] = {"e1": _table(ws.e1), "limit": _table(ws.limit),
                       "pages": {str(k): _table(v) for k, v in sorted(ws.pages.items())},
                       "abutment": {str(s): v for s, v in sorted(ws.abutment.items())},
                       "d1_square_zero": ws.d1_square_zero, "ok": ws.ok}
        ok &= ws.ok
        lines.append(f"r={r}: E1 {_table(ws.e1)}  limit {_table(ws.limit)}  ok={ws.ok}")
    return Outcome(ok, {"boundary": doc.boundary, "order": order, "r": out}, lines)


def _order(items: list[int], flags) -> list[int]:
    order = sorted(items)
    if flags.seed is not None:
        random.Random(flags.seed).shuffle(order)
    return order


def _cone_data(doc: InputDocument, flags):
    k = _k(doc, flags)
    data = fan_over(_structure_for(doc), k)
    return data, k


def run_reduce(doc: InputDocument, flags) -> Outcome:
    data, k = _cone_data(doc, flags)
    strata = semistable_reduction(data)
    report = check_reduction(data, strata)
    rays = data.fan.rays
    emitted = []
    for s in strata:
        emitted.append({"J": [list(rays[i]) for i in s.j], "dim": s.dim,
                        "document": to_document(s.complex)})
    result = {"k": k, "rays": [list(r) for r in rays], "vertex_rays": data.vertex_rays,
              "strata": emitted,
              "checks": {"slice": report.slice_ok, "dimensions": report.dimensions_ok,
                         "balanced": report.balanced, "regular": report.regular,
                         "vertex_count": report.vertex_count_ok, "retraction": report.retraction_ok}}
    lines = [f"{len(strata)} strata, checks ok: {report.ok}"]
    lines += [f"  J={e['J']} dim={e['dim']}" for e in emitted]
    return Outcome(report.ok, result, lines)


def _spectral_sequences(doc: InputDocument, flags, degrees):
    data, _ = _cone_data(doc, flags)
    order = _order(data.vertex_rays, flags)
    return data, order, {r: monodromy_d1(monodromy_e1(data, r, order)) for r in degrees}


def run_ss(doc: InputDocument, flags) -> Outcome:
    degrees = _degrees(doc, flags)
    data, order, sss = _spectral_sequences(doc, flags, degrees)
    hodge = hodge_table(doc.complex)
    ok = True
    out = {}
    lines = []
    for r, ss in sss.items():
        report = abutment_check(ss, hodge)
        ok &= report.ok
        out[str(r)] = {"e1": _table(ss.e1()), "e2": _table(ss.e2),
                       "e_infinity": None if ss.e_infinity is None else _table(ss.e_infinity),
                       "abutment_ok": report.ok, "reason": report.reason,
                       "residual": {str(s): list(v) for s, v in sorted(report.residual.items())}}
        lines.append(f"r={r}: E1 {_table(ss.e1())}  E2 {_table(ss.e2)}  abutment ok={report.ok}")
    result = {"order": order, "r": out}
    if doc.smooth:
        smooth = smoothness_vanishing_check(data)
        result["smoothness"] = {"ok": smooth.ok, "witnesses": _witness(smooth.witnesses)}
        lines.append(f"smoothness vanishing: {smooth.ok}")
        ok &= smooth.ok
    return Outcome(ok, result, lines)


def run_eigenwave(doc: InputDocument, flags) -> Outcome:
    top = doc.complex.dim
    targets = [flags.r] if flags.r is not None else list(range(1, top + 1))
    needed = sorted({r for t in targets for r in (t, t - 1) if 0 <= r <= top})
    _, order, sss = _spectral_sequences(doc, flags, needed)
    out = {}
    lines = []
    for r in targets:
        if r - 1 not in sss or r not in sss:
            out[str(r)] = {"total_rank": 0, "blocks": {}}
            continue
        ew = eigenwave(sss[r], sss[r - 1])
        blocks = {f"{p},{q}": ew.e2_rank((p, q)) for p, q in sorted(ew.e2_blocks)}
        out[str(r)] = {"total_rank": ew.total_e2_rank(), "blocks": blocks}
        lines.append(f"r={r} -> r={r - 1}: rank {ew.total_e2_rank()} {blocks}")
    return Outcome(True, {"order": order, "r": out}, lines)


def _certificate(report) -> dict:
    return {"support": report.support_ok, "unimodular": report.unimodular_ok, "finer_than_fan": report.finer_ok,
            "support_witness": None if report.support_witness is None else [_number(x) for x in
                                                                            report.support_witness],
            "non_unimodular": [polyhedron_json(p) for p in report.non_unimodular],
            "crossing": [polyhedron_json(p) for p in report.crossing]}


def run_unimodularize(doc: InputDocument, flags) -> Outcome:
    strat = stratification_with_doubling(doc.ambient.fan, finite_part(doc.complex), flags.radius or 1)
    k, core = unimodularize_compact(core_complex(doc.complex, strat))
    lam = extend_structure(doc.complex, strat, core, k)
    report = certify_structure(doc.complex, lam, k, doc.ambient.fan)
    structure = [polyhedron_json(p) for p in lam.maximal_cells()]
    emitted = dict(doc.raw)
    emitted.update({"k": k, "structure": structure})
    result = {"k": k, "radius": _number(strat.r), "structure": structure, "certificate": _certificate(report),
              "document": emitted}
    lines = [f"k={k} r={_number(strat.r)} cells={len(structure)} certified={report.ok}"]
    return Outcome(report.ok, result, lines)


def run_certify(doc: InputDocument, flags) -> Outcome:
    if doc.structure is None:
        raise DocumentError("$.structure", "certify needs a declared structure")
    k = _k(doc, flags)
    report = certify_structure(doc.complex, doc.structure, k, doc.ambient.fan)
    lines = [f"support: {report.support_ok}", f"unimodular (k={k}): {report.unimodular_ok}",
             f"finer than the fan: {report.finer_ok}"]
    return Outcome(report.ok, {"k": k, "certificate": _certificate(report)}, lines)


RUNNERS = {"check": run_check, "hodge": run_hodge, "weight-ss": run_weight_ss, "reduce": run_reduce,
           "ss": run_ss, "eigenwave": run_eigenwave, "unimodularize": run_unimodularize, "certify": run_certify}


def run(command: str, doc: InputDocument, flags) -> dict:
    outcome = RUNNERS[command](doc, flags)
    report = {"command": command, "input_digest": doc.digest, "ok": outcome.ok, "result": outcome.result,
              "flags": {k: (_number(v) if isinstance(v, Fraction) else v) for k, v in sorted(vars(flags).items())
                        if k not in ("command", "file", "json_only")}}
    report["_lines"] = outcome.lines
    return report


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tropicoh", description="Exact tropical cohomology pipelines.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("file")
    parser.add_argument("--r", type=int)
    parser.add_argument("--pmax", type=int)
    parser.add_argument("--qmax", type=int)
    parser.add_argument("--k", type=int)
    parser.add_argument("--radius", type=Fraction)
    parser.add_argument("--json-only", action="store_true")
    parser.add_argument("--seed", type=int)
    return parser


def main(argv: list[str] | None = None) -> int:
    flags = _parser().parse_args(argv)
    try:
        with open(flags.file, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as error:
        print(json.dumps({"command": flags.command, "error": "input", "message": str(error)}))
        return EXIT_INPUT
    try:
        doc = parse(text)
        report = run(flags.command, doc, flags)
    except DocumentError as error:
        print(json.dumps({"command": flags.command, "error": "input", "path": error.path, "message": str(error)}))
        return EXIT_INPUT
    except AssertionError as error:
        print(json.dumps({"command": flags.command, "error": "internal", "message": str(error)}))
        return EXIT_BUG
    except ValueError as error:
        print(json.dumps({"command": flags.command, "error": "precondition", "message": str(error)}))
        return EXIT_INPUT
    lines = report.pop("_lines")
    if not flags.json_only:
        print(f"{flags.command} {flags.file}: {'ok' if report['ok'] else 'FAILED'}")
        for line in lines:
            print(line)
        print()
    print(json.dumps(report, sort_keys=True, indent=2))
    return EXIT_OK if report["ok"] else EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
