import json
from fractions import Fraction
from pathlib import Path

import pytest

from tropicoh import fixtures as fx
from tropicoh.cli import DocumentError, main, parse

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def corpus_file(name):
    return str(CORPUS / f"{name}.json")


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def report_of(out):
    return json.loads(out[out.index("{"):])


def test_corpus_files_are_the_generated_documents():
    documents = fx.corpus()
    assert sorted(p.stem for p in CORPUS.glob("*.json")) == sorted(documents)
    for name, doc in documents.items():
        assert (CORPUS / f"{name}.json").read_text() == json.dumps(doc, indent=2, sort_keys=True) + "\n"


def test_parse_reads_a_document():
    doc = parse((CORPUS / "tropical_line.json").read_text())
    assert doc.complex.dim == 1 and len(doc.complex.top_cells()) == 3
    assert len(doc.digest) == 64


def test_parse_accepts_rational_strings():
    doc = json.loads((CORPUS / "p1_two_vertices.json").read_text())
    doc["cells"][1]["vertices"] = [[0], ["1/2"]]
    doc["cells"][2]["vertices"] = [["1/2"]]
    x = parse(json.dumps(doc)).complex
    assert sorted(c.finite.vertices[0][0] for c in x.cells if not c.sigma and c.dim == 0) == [0, Fraction(1, 2)]


@pytest.mark.parametrize("name, path", [
    ("weight_zero", "$.weights[1]"),
    ("wrong_length", "$.cells[0].vertices[0]"),
    ("index_out_of_range", "$.ambient.cones[0][1]"),
])
def test_malformed_documents_name_the_offending_path(name, path):
    with pytest.raises(DocumentError) as info:
        parse((CORPUS / f"{name}.json").read_text())
    assert info.value.path == path


def test_invalid_json_is_an_input_error():
    with pytest.raises(DocumentError, match="invalid JSON"):
        parse("{")


@pytest.mark.parametrize("name", ["weight_zero", "wrong_length", "index_out_of_range"])
def test_malformed_input_exits_with_2(capsys, name):
    code, out = run(capsys, "check", corpus_file(name))
    assert code == 2 and json.loads(out)["error"] == "input"


def test_missing_file_exits_with_2(capsys, tmp_path):
    code, out = run(capsys, "hodge", str(tmp_path / "absent.json"))
    assert code == 2


def test_hodge_of_the_line(capsys):
    code, out = run(capsys, "hodge", corpus_file("tropical_line"), "--json-only")
    assert code == 0
    report = json.loads(out)
    assert report["command"] == "hodge" and report["ok"]


@pytest.mark.parametrize("name", ["unbalanced", "tilted_ray"])
def test_failed_checks_exit_with_3(capsys, name):
    code, out = run(capsys, "check", corpus_file(name))
    assert code == 3 and not report_of(out)["ok"]


def test_prism_spectral_sequence_exits_with_3(capsys):
    code, out = run(capsys, "ss", corpus_file("nonmatroidal_prism"), "--json-only")
    report = json.loads(out)
    assert code == 3 and not report["result"]["smoothness"]["ok"]


def test_output_is_byte_identical_across_runs(capsys):
    first = run(capsys, "ss", corpus_file("p1_two_vertices"))
    second = run(capsys, "ss", corpus_file("p1_two_vertices"))
    assert first == second and first[0] == 0


def test_json_only_prints_a_single_document(capsys):
    code, out = run(capsys, "check", corpus_file("p1"), "--json-only")
    assert code == 0 and json.loads(out)["ok"]


def test_reduced_strata_are_valid_documents(capsys, tmp_path):
    code, out = run(capsys, "reduce", corpus_file("p1_two_vertices"), "--json-only")
    assert code == 0
    strata = json.loads(out)["result"]["strata"]
    assert sorted(len(s["J"]) for s in strata) == [1, 1, 2]
    for i, s in enumerate(strata):
        path = tmp_path / f"stratum{i}.json"
        path.write_text(json.dumps(s["document"]))
        assert run(capsys, "check", str(path))[0] == 0
