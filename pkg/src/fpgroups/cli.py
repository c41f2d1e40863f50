"""Command-line front end: one verb per invocation, one report per run.

Every verb reads presentation files in the shared grammar, runs under the
global budget flags, and emits a single RunReport.  With --json the report is
the only thing on standard output (diagnostics go to standard error), and
reruns with identical inputs and budgets are byte-identical apart from the
wall_time_s field.  Exit codes: 0 the operation succeeded (and any check it
performed came back true), 1 a check came back false, 2 a budget ran out
before an answer, 3 bad input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

from .budget import Budget, BudgetExhausted
from .cancellation import DehnSolver, check_metric
from .construct import fibre_generators, grothendieck_evidence, pipeline, rips, uce
from .cosets import fingerprint_compare, low_index, reidemeister_schreier, todd_coxeter
from .homology import (
    L0Instance,
    aspherical_h2_rank,
    baumslag_iso_test,
    lemma_l0_check,
    schur_multiplier,
)
from .permrep import (
    GroupHom,
    check_generation,
    cyclic_group,
    fibre_product_finite,
    hom_search,
    sl25_to_a5,
    transitive_groups,
)
from .presentations import catalog, parse_presentation
from .zlattice import abelianization

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_EXHAUSTED = 2
EXIT_ERROR = 3

_OUTCOME_CODE = {
    "OK": EXIT_OK,
    "NEGATIVE": EXIT_NEGATIVE,
    "EXHAUSTED": EXIT_EXHAUSTED,
    "ERROR": EXIT_ERROR,
}


def _global_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--json", action="store_true", help="emit one RunReport as JSON")
    parser.add_argument("--time-limit", type=float, default=60.0, metavar="SECONDS")
    parser.add_argument("--max-cosets", type=int, default=100_000, metavar="N")
    parser.add_argument("--max-elements", type=int, default=100_000, metavar="N")
    # randomized property drivers only; every verb below is seed-independent
    parser.add_argument("--seed", type=int, default=0, metavar="N")


def _budget(args: argparse.Namespace) -> Budget:
    return Budget(
        time_limit_s=args.time_limit,
        max_cosets=args.max_cosets,
        max_elements=args.max_elements,
    )


def _load(path: str, inputs: dict) -> "Presentation":
    with open(path, "rb") as fh:
        raw = fh.read()
    inputs[path] = hashlib.sha256(raw).hexdigest()
    return parse_presentation(raw.decode("utf-8"))


def _write_out(path: str | None, p) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(p.to_text() + "\n")


# ---------------------------------------------------------------------------
# verb handlers: (args, inputs) -> (outcome, payload)


def _cmd_parse(args, inputs):
    p = _load(args.file, inputs)
    return "OK", {
        "generators": list(p.alphabet.names),
        "relators": len(p.relators),
        "total_letters": p.total_relator_length(),
        "max_relator_length": p.max_relator_length(),
    }


def _cmd_abelianize(args, inputs):
    inv = abelianization(_load(args.file, inputs))
    return "OK", {"h1": inv.to_json(), "pretty": str(inv)}


def _cmd_sc_check(args, inputs):
    p = _load(args.file, inputs)
    report = check_metric(p, args.m)
    return ("OK" if report.verdict else "NEGATIVE"), report.to_json(p.alphabet)


def _cmd_dehn(args, inputs):
    p = _load(args.file, inputs)
    solver = DehnSolver(p)
    w = p.word(args.word)
    trivial, trace = solver.is_trivial(w)
    payload = {
        "word_length": len(w),
        "trivial": trivial,
        "steps": len(trace.steps),
        "residue_length": len(trace.final),
    }
    return ("OK" if trivial else "NEGATIVE"), payload


def _cmd_rips(args, inputs):
    q = _load(args.file, inputs)
    rr = rips(q, args.m, zero_exponent=args.zero_exponent)
    _write_out(args.out, rr.gamma)
    return "OK", rr.to_json()


def _cmd_uce(args, inputs):
    u = uce(_load(args.file, inputs))
    _write_out(args.out, u.tilde)
    return "OK", u.to_json()


def _cmd_fibre(args, inputs):
    g = _load(args.file, inputs)
    pairs = fibre_generators(g, [g.word(k) for k in args.kernel or []])
    return "OK", {
        "count": len(pairs),
        "pairs": [[u.text() or "1", v.text() or "1"] for u, v in pairs],
    }


def _cmd_pipeline(args, inputs):
    q = _load(args.file, inputs)
    pl = pipeline(q, args.m, budget=_budget(args))
    _write_out(args.out, pl.extension)
    return "OK", pl.to_json()


def _cmd_evidence(args, inputs):
    ev = grothendieck_evidence(_load(args.file, inputs), args.index_bound, _budget(args))
    outcome = "OK" if ev.verdict.startswith("criterion satisfied") else "NEGATIVE"
    return outcome, ev.to_json()


def _cmd_tc(args, inputs):
    p = _load(args.file, inputs)
    sub = tuple(p.word(w) for w in args.subgroup or [])
    table = todd_coxeter(
        p, subgroup=sub, max_cosets=args.max_cosets, time_limit_s=args.time_limit
    )
    if not table:
        return "EXHAUSTED", {
            "reason": table.reason,
            "cosets_used": table.cosets_used,
            "max_cosets": table.max_cosets,
        }
    return "OK", {"index": table.n}


def _cmd_rs(args, inputs):
    p = _load(args.file, inputs)
    sub = tuple(p.word(w) for w in args.subgroup or [])
    table = todd_coxeter(
        p, subgroup=sub, max_cosets=args.max_cosets, time_limit_s=args.time_limit
    )
    if not table:
        return "EXHAUSTED", {"reason": table.reason, "cosets_used": table.cosets_used}
    table.standardize()
    s = reidemeister_schreier(p, table)
    _write_out(args.out, s)
    return "OK", {
        "index": table.n,
        "generators": len(s.alphabet),
        "relators": len(s.relators),
        "presentation": s.to_json(),
    }


def _cmd_low_index(args, inputs):
    fp = low_index(_load(args.file, inputs), args.bound, _budget(args))
    return ("OK" if fp.complete else "EXHAUSTED"), fp.to_json()


def _cmd_fingerprint(args, inputs):
    p = _load(args.file, inputs)
    if args.file2 is None:
        fp = low_index(p, args.bound, _budget(args))
        return ("OK" if fp.complete else "EXHAUSTED"), fp.to_json()
    q = _load(args.file2, inputs)
    cmp = fingerprint_compare(p, q, args.bound, _budget(args))
    outcome = {True: "OK", False: "NEGATIVE", None: "EXHAUSTED"}[cmp.equal]
    return outcome, cmp.to_json()


def _cmd_hom_search(args, inputs):
    p = _load(args.file, inputs)
    budget = _budget(args)
    targets = []
    for d in range(2, args.transitive_degree + 1):
        targets.extend(transitive_groups(d))
    per_target = {}
    all_complete = True
    nontrivial = 0
    for t in targets:
        res = hom_search(p, t, budget)
        non = sum(
            1 for h in res.homs if any(g != tuple(range(t.degree)) for g in h.images)
        )
        nontrivial += non
        all_complete = all_complete and res.complete
        per_target[t.name] = {
            "homs": len(res.homs),
            "nontrivial": non,
            "epimorphisms": res.epi_count,
            "complete": res.complete,
        }
    payload = {
        "degree_bound": args.transitive_degree,
        "targets": per_target,
        "nontrivial_total": nontrivial,
    }
    return ("OK" if all_complete else "EXHAUSTED"), payload


_FIBRE_INSTANCES = ("z6-z3", "sl25-a5")


def _cmd_fibre_check(args, inputs):
    cap = args.max_elements
    if args.instance == "z6-z3":
        src = catalog("cyclic", (6,)).presentation
        ambient = cyclic_group(6)
        eta = GroupHom(src, [cyclic_group(3).generators[0]], 3)
        kernel_words = [src.word("a^3")]
    elif args.instance == "sl25-a5":
        ambient, eta = sl25_to_a5()
        src = eta.source
        kernel_words = [src.word("s^2")]  # s^2 = -I generates the centre
    else:
        raise ValueError(
            f"unknown instance {args.instance!r}; choose from {', '.join(_FIBRE_INSTANCES)}"
        )
    pairs = list(fibre_generators(src, kernel_words))
    ffp = fibre_product_finite(eta, ambient, cap=cap)
    generated = check_generation(ffp, pairs, cap=cap)
    payload = {
        "instance": args.instance,
        "order": len(ffp.elements),
        "kernel_size": ffp.kernel_size,
        "factor_order": ffp.factor.order(),
        "pairs": [[u.text() or "1", v.text() or "1"] for u, v in pairs],
        "generated": generated,
    }
    return ("OK" if generated else "NEGATIVE"), payload


def _cmd_schur(args, inputs):
    rep = schur_multiplier(_load(args.file, inputs), _budget(args))
    return "OK", rep.to_json()


def _cmd_l0_check(args, inputs):
    ambient = _load(args.ambient, inputs)
    quotient = _load(args.quotient, inputs)
    normal = tuple(ambient.word(w) for w in args.normal or [])
    rep = lemma_l0_check(L0Instance(ambient, normal, quotient), _budget(args))
    if rep.hypotheses_met and rep.equal:
        outcome = "OK"
    elif rep.equal is None and rep.hypotheses_met:
        outcome = "EXHAUSTED"
    else:
        outcome = "NEGATIVE"
    return outcome, rep.to_json()


def _cmd_h2_rank(args, inputs):
    rank = aspherical_h2_rank(_load(args.file, inputs), args.aspherical)
    return "OK", {"rank": rank}


def _cmd_baumslag_iso(args, inputs):
    rep = baumslag_iso_test(args.modulus, args.unit, args.k)
    return ("OK" if rep.isomorphic else "NEGATIVE"), rep.to_json()


def _cmd_catalog(args, inputs):
    entry = catalog(args.name, tuple(args.params))
    _write_out(args.out, entry.presentation)
    return "OK", {
        "name": entry.name,
        "parameters": list(entry.parameters),
        "notes": entry.notes,
        "generators": list(entry.presentation.alphabet.names),
        "relators": [r.text() for r in entry.presentation.relators],
    }


# ---------------------------------------------------------------------------
# verb table and dispatch

# name -> (handler, parser configurator, one-line help)
_VERBS = {}


def _verb(name, help_text):
    def register(configure):
        _VERBS[name] = (configure, help_text)
        return configure

    return register


@_verb("parse", "read a presentation file and summarize it")
def _p_parse(sp):
    sp.add_argument("file")
    return _cmd_parse


@_verb("abelianize", "H_1 invariant factors of a presented group")
def _p_abelianize(sp):
    sp.add_argument("file")
    return _cmd_abelianize


@_verb("sc-check", "verify the C'(1/m) small-cancellation condition")
def _p_sc_check(sp):
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("file")
    return _cmd_sc_check


@_verb("dehn", "decide triviality of a word over a C'(1/6) presentation")
def _p_dehn(sp):
    sp.add_argument("--word", required=True)
    sp.add_argument("file")
    return _cmd_dehn


@_verb("rips", "embed a presentation into a C'(1/m) group")
def _p_rips(sp):
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--zero-exponent", action="store_true")
    sp.add_argument("--out", metavar="FILE")
    sp.add_argument("file")
    return _cmd_rips


@_verb("uce", "universal central extension of a perfect presentation")
def _p_uce(sp):
    sp.add_argument("--out", metavar="FILE")
    sp.add_argument("file")
    return _cmd_uce


@_verb("fibre", "generating pairs of a fibre product over a quotient")
def _p_fibre(sp):
    sp.add_argument("--kernel", action="append", metavar="WORD")
    sp.add_argument("file")
    return _cmd_fibre


@_verb("pipeline", "rips, central extension, and doubled fibre product")
def _p_pipeline(sp):
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--out", metavar="FILE")
    sp.add_argument("file")
    return _cmd_pipeline


@_verb("evidence", "finite-quotient criteria at a bounded scale")
def _p_evidence(sp):
    sp.add_argument("--index-bound", type=int, required=True)
    sp.add_argument("file")
    return _cmd_evidence


@_verb("tc", "coset enumeration over a finitely generated subgroup")
def _p_tc(sp):
    sp.add_argument("--subgroup", action="append", metavar="WORD")
    sp.add_argument("file")
    return _cmd_tc


@_verb("rs", "subgroup presentation via Schreier rewriting")
def _p_rs(sp):
    sp.add_argument("--subgroup", action="append", metavar="WORD")
    sp.add_argument("--out", metavar="FILE")
    sp.add_argument("file")
    return _cmd_rs


@_verb("low-index", "count subgroups up to an index bound")
def _p_low_index(sp):
    sp.add_argument("--bound", type=int, required=True)
    sp.add_argument("file")
    return _cmd_low_index


@_verb("fingerprint", "subgroup-count fingerprint; compare two files")
def _p_fingerprint(sp):
    sp.add_argument("--bound", type=int, required=True)
    sp.add_argument("file")
    sp.add_argument("file2", nargs="?", default=None)
    return _cmd_fingerprint


@_verb("hom-search", "maps onto transitive permutation groups")
def _p_hom_search(sp):
    sp.add_argument("--transitive-degree", type=int, required=True)
    sp.add_argument("file")
    return _cmd_hom_search


@_verb("fibre-check", "brute-force generation check on a named instance")
def _p_fibre_check(sp):
    sp.add_argument("instance", choices=_FIBRE_INSTANCES)
    return _cmd_fibre_check


@_verb("schur", "Schur multiplier of a finite presented group")
def _p_schur(sp):
    sp.add_argument("file")
    return _cmd_schur


@_verb("l0-check", "compare kernel coinvariants with H_2 of the quotient")
def _p_l0_check(sp):
    sp.add_argument("--ambient", required=True, metavar="FILE")
    sp.add_argument("--normal", action="append", metavar="WORD")
    sp.add_argument("--quotient", required=True, metavar="FILE")
    return _cmd_l0_check


@_verb("h2-rank", "H_2 rank of an aspherical presentation by deficiency")
def _p_h2_rank(sp):
    sp.add_argument("--aspherical", action="store_true")
    sp.add_argument("file")
    return _cmd_h2_rank


@_verb("baumslag-iso", "power criterion for metabelian Baumslag pairs")
def _p_baumslag_iso(sp):
    sp.add_argument("--modulus", type=int, required=True)
    sp.add_argument("--unit", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    return _cmd_baumslag_iso


@_verb("catalog", "write a named presentation from the catalog")
def _p_catalog(sp):
    sp.add_argument("name")
    sp.add_argument("params", nargs="*", type=int)
    sp.add_argument("--out", metavar="FILE")
    return _cmd_catalog


def _usage(stream) -> None:
    print("usage: fpgroups VERB [flags] [inputs]", file=stream)
    print("verbs:", file=stream)
    for name, (_, help_text) in _VERBS.items():
        print(f"  {name:<14} {help_text}", file=stream)
    print(
        "global flags: --json --time-limit S --max-cosets N --max-elements N --seed N",
        file=stream,
    )


def _parameters(args: argparse.Namespace) -> dict:
    skip = {"json"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def dispatch(argv) -> int:
    argv = list(argv)
    if not argv:
        _usage(sys.stderr)
        return EXIT_ERROR
    if argv[0] in ("-h", "--help"):
        _usage(sys.stdout)
        return EXIT_OK
    verb = argv[0]
    if verb not in _VERBS:
        print(f"unknown verb {verb!r}", file=sys.stderr)
        _usage(sys.stderr)
        return EXIT_ERROR

    configure, help_text = _VERBS[verb]
    parser = argparse.ArgumentParser(prog=f"fpgroups {verb}", description=help_text)
    handler = configure(parser)
    _global_flags(parser)
    try:
        args = parser.parse_args(argv[1:])
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_ERROR

    inputs: dict[str, str] = {}
    started = time.perf_counter()
    try:
        outcome, payload = handler(args, inputs)
    except BudgetExhausted as e:
        outcome, payload = "EXHAUSTED", {"error": str(e)}
    except (ValueError, OSError) as e:
        outcome, payload = "ERROR", {"error": str(e)}
    wall = time.perf_counter() - started

    report = {
        "verb": verb,
        "inputs": inputs,
        "parameters": _parameters(args),
        "outcome": outcome,
        "payload": payload,
        "wall_time_s": round(wall, 6),
    }
    if args.json:
        print(json.dumps(report, sort_keys=True))
    else:
        print(f"{verb}: {outcome}  ({wall:.2f}s)")
        print(json.dumps(payload, indent=2, sort_keys=True))
    return _OUTCOME_CODE[outcome]


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
