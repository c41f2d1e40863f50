"""Exit codes, report shape, and rerun determinism of the command line."""

import io
import json
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

import pytest

from fpgroups.cli import dispatch

FIXTURES = Path(__file__).parent / "fixtures"


def run(*argv):
    """dispatch with --json, returning (exit code, parsed report)."""
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = dispatch([*argv, "--json"])
    lines = [l for l in out.getvalue().splitlines() if l.strip()]
    assert len(lines) == 1, "exactly one RunReport on stdout"
    return code, json.loads(lines[0])


def run_plain(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = dispatch(list(argv))
    return code, out.getvalue(), err.getvalue()


def fx(name):
    return str(FIXTURES / f"{name}.pres")


# -- plumbing -----------------------------------------------------------------


def test_every_fixture_parses():
    files = sorted(FIXTURES.glob("*.pres"))
    assert files, "fixture corpus present"
    for f in files:
        code, rep = run("parse", str(f))
        assert code == 0, f.name
        assert rep["outcome"] == "OK"
        assert list(rep["inputs"]) == [str(f)]
        assert len(next(iter(rep["inputs"].values()))) == 64  # sha256 hex


def test_unknown_verb_is_error_with_usage():
    code, out, err = run_plain("frobnicate")
    assert code == 3
    assert "usage:" in err and "frobnicate" in err


def test_no_argv_is_error():
    code, out, err = run_plain()
    assert code == 3 and "usage:" in err


def test_help_exits_zero():
    code, out, err = run_plain("--help")
    assert code == 0 and "verbs:" in out


def test_missing_file_is_error():
    code, rep = run("abelianize", str(FIXTURES / "no_such.pres"))
    assert code == 3 and rep["outcome"] == "ERROR"


def test_report_shape():
    code, rep = run("abelianize", fx("klein"))
    assert set(rep) == {"verb", "inputs", "parameters", "outcome", "payload", "wall_time_s"}
    assert rep["verb"] == "abelianize"
    assert rep["parameters"]["max_cosets"] == 100_000
    assert rep["payload"]["pretty"] == "Z/2 + Z/2"


def test_rerun_byte_identical_modulo_wall_time():
    def snap():
        code, rep = run("rips", "--m", "6", "--zero-exponent", fx("a5"))
        assert code == 0
        rep.pop("wall_time_s")
        return json.dumps(rep, sort_keys=True)

    assert snap() == snap()


# -- enumeration verbs ---------------------------------------------------------


def test_tc_closes_within_cap():
    code, rep = run("tc", "--max-cosets", "100", fx("a5"))
    assert code == 0 and rep["payload"]["index"] == 60


def test_tc_exhausts_tiny_cap():
    code, rep = run("tc", "--max-cosets", "10", fx("a5"))
    assert code == 2 and rep["outcome"] == "EXHAUSTED"
    assert rep["payload"]["max_cosets"] == 10


def test_rs_subgroup_presentation():
    code, rep = run("rs", "--subgroup", "a", "--subgroup", "b a b^-1", fx("a5"))
    assert code == 0
    assert rep["payload"]["index"] == 6
    # Schreier rank bound: n(g-1)+1 = 6*1+1
    assert rep["payload"]["generators"] == 7


def test_low_index_bp2_vacant():
    code, rep = run("low-index", "--bound", "5", fx("bp2"))
    assert code == 0
    totals = rep["payload"]["totals"]
    assert totals["1"] == 1
    assert all(totals[str(k)] == 0 for k in range(2, 6))


def test_fingerprint_single_and_compare():
    code, rep = run("fingerprint", "--bound", "5", fx("a5"))
    assert code == 0 and rep["payload"]["totals"]["5"] == 5
    code, rep = run("fingerprint", "--bound", "6", fx("baumslag25_1"), fx("baumslag25_2"))
    assert code == 0 and rep["payload"]["equal"] is True
    assert len(rep["inputs"]) == 2


def test_hom_search_bp2_only_trivial():
    code, rep = run("hom-search", "--transitive-degree", "4", fx("bp2"))
    assert code == 0
    assert rep["payload"]["nontrivial_total"] == 0
    assert all(t["complete"] for t in rep["payload"]["targets"].values())


# -- checks -------------------------------------------------------------------


def test_sc_check_exit_codes(tmp_path):
    gamma = tmp_path / "gamma.pres"
    code, rep = run("rips", "--m", "7", "--out", str(gamma), fx("a5"))
    assert code == 0 and gamma.exists()
    assert run("sc-check", "--m", "7", str(gamma))[0] == 0
    assert run("sc-check", "--m", "40", str(gamma))[0] == 1
    assert run("sc-check", "--m", "1", str(gamma))[0] == 3


def test_dehn_exit_codes(tmp_path):
    gamma = tmp_path / "gamma.pres"
    run("rips", "--m", "6", "--out", str(gamma), fx("trivial"))
    # Greendlinger: any trivial word short of half a relator is freely trivial,
    # so that is the only kind one can type on a command line
    code, rep = run("dehn", "--word", "x a1 a1^-1 x^-1", str(gamma))
    assert code == 0 and rep["payload"]["trivial"] is True
    code, rep = run("dehn", "--word", "x a1 x^-1 a1^-1", str(gamma))
    assert code == 1 and rep["payload"]["trivial"] is False


def test_dehn_refuses_weak_presentation():
    # A5 itself is nowhere near C'(1/6)
    code, rep = run("dehn", "--word", "a", fx("a5"))
    assert code == 3


def test_baumslag_iso_exit_codes():
    code, rep = run("baumslag-iso", "--modulus", "25", "--unit", "6", "--k", "2")
    assert code == 1 and rep["payload"]["isomorphic"] is False
    code, rep = run("baumslag-iso", "--modulus", "25", "--unit", "6", "--k", "1")
    assert code == 0 and rep["payload"]["isomorphic"] is True
    code, rep = run("baumslag-iso", "--modulus", "25", "--unit", "10", "--k", "2")
    assert code == 3


def test_fibre_check_instances():
    code, rep = run("fibre-check", "z6-z3")
    assert code == 0
    assert rep["payload"]["order"] == 12 and rep["payload"]["generated"] is True
    code, rep = run("fibre-check", "sl25-a5")
    assert code == 0
    assert rep["payload"]["order"] == 240 and rep["payload"]["kernel_size"] == 2


def test_evidence_exit_codes():
    assert run("evidence", "--index-bound", "5", fx("bp2"))[0] == 0
    code, rep = run("evidence", "--index-bound", "3", fx("z5"))
    assert code == 1 and rep["payload"]["verdict"] == "criterion fails"


# -- homological verbs ---------------------------------------------------------


def test_schur_verbs():
    code, rep = run("schur", fx("a5"))
    assert code == 0 and rep["payload"]["h2"] == {"free_rank": 0, "torsion": [2]}
    code, rep = run("schur", fx("free2"), "--max-cosets", "500")
    assert code == 2 and rep["outcome"] == "EXHAUSTED"


def test_l0_check_through_files(tmp_path):
    tilde = tmp_path / "tilde.pres"
    code, rep = run("uce", "--out", str(tilde), fx("a5"))
    assert code == 0 and rep["payload"]["relator_count"] == 8
    code, rep = run(
        "l0-check", "--ambient", str(tilde), "--normal", "a^2", "--quotient", fx("a5")
    )
    assert code == 0
    assert rep["payload"]["equal"] is True
    assert rep["payload"]["coinvariants"] == {"free_rank": 0, "torsion": [2]}


def test_uce_rejects_non_perfect():
    code, rep = run("uce", fx("z5"))
    assert code == 3 and "perfect" in rep["payload"]["error"]


def test_h2_rank_needs_asphericity_claim():
    assert run("h2-rank", "--aspherical", fx("bp2"))[0] == 0
    assert run("h2-rank", fx("bp2"))[0] == 3


# -- constructions through files ------------------------------------------------


def test_catalog_roundtrip(tmp_path):
    out = tmp_path / "bp2.pres"
    code, rep = run("catalog", "Bp", "2", "--out", str(out))
    assert code == 0
    assert out.read_text().strip() == Path(fx("bp2")).read_text().strip()
    assert run("parse", str(out))[0] == 0
    assert run("catalog", "nonsense")[0] == 3


def test_fibre_pairs_verb():
    code, rep = run("fibre", "--kernel", "a^2", fx("a5"))
    assert code == 0
    assert rep["payload"]["pairs"] == [["a", "a"], ["b", "b"], ["a^2", "1"]]


def test_pipeline_verb(tmp_path):
    out = tmp_path / "ext.pres"
    code, rep = run("pipeline", "--m", "6", "--out", str(out), fx("trivial"))
    assert code == 0
    counts = rep["payload"]["counts"]
    assert counts["extension_generators"] == 6
    assert counts["extension_relators"] == 45
    assert run("parse", str(out))[0] == 0
    assert run("pipeline", "--m", "6", fx("z5"))[0] == 3
