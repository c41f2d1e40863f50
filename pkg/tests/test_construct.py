"""Small-cancellation embeddings, universal central extensions, pipeline."""

import warnings
from functools import lru_cache

import pytest

from fpgroups.budget import Budget, BudgetExhausted
from fpgroups.cancellation import DehnSolver, check_metric
from fpgroups.construct import (
    ConstructionError,
    RipsError,
    de_bruijn_bits,
    fibre_generators,
    grothendieck_evidence,
    pipeline,
    rips,
    uce,
)
from fpgroups.cosets import todd_coxeter
from fpgroups.permrep import GroupHom, check_generation, cyclic_group, fibre_product_finite
from fpgroups.presentations import catalog, parse_presentation
from fpgroups.words import Word
from fpgroups.zlattice import abelianization, exponent_matrix, is_perfect


def quiet(text):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return parse_presentation(text)


A5 = catalog("A5").presentation
BP2 = catalog("Bp", (2,)).presentation


@lru_cache(maxsize=None)
def rips_a5(m, zero):
    return rips(A5, m, zero_exponent=zero)


@lru_cache(maxsize=None)
def pipeline_a5():
    return pipeline(A5, 7)


# -- de Bruijn fillers -------------------------------------------------------


def test_de_bruijn_every_window_once():
    for d in (2, 3, 4, 6):
        bits = de_bruijn_bits(d)
        assert len(bits) == 1 << d
        wrapped = bits + bits[: d - 1]
        windows = {tuple(wrapped[i : i + d]) for i in range(1 << d)}
        assert len(windows) == 1 << d


def test_de_bruijn_rejects_nonpositive_order():
    with pytest.raises(ValueError):
        de_bruijn_bits(0)


# -- rips --------------------------------------------------------------------


def test_rips_counts_and_certificate():
    rr = rips_a5(7, False)
    assert len(rr.gamma.alphabet) == len(A5.alphabet) + 2
    assert len(rr.gamma.relators) == len(A5.relators) + 4 * len(A5.alphabet)
    assert rr.metric.verdict and rr.metric.m == 7
    assert rr.m == 7 and not rr.zero_exponent
    # the certificate is reproducible from the output alone
    assert check_metric(rr.gamma, 7).verdict


def test_rips_normal_generators_and_alphabet():
    rr = rips_a5(7, False)
    assert rr.gamma.alphabet.names[: len(A5.alphabet)] == A5.alphabet.names
    assert tuple(w.text() for w in rr.normal_gens) == ("a1", "a2")


def test_rips_alphabet_dodges_name_clash():
    q = quiet("< a1, a2 | a1^2 a2, a2^3 >")
    rr = rips(q, 6)
    assert rr.gamma.alphabet.names[-2:] == ("aa1", "aa2")
    assert tuple(w.text() for w in rr.normal_gens) == ("aa1", "aa2")


def test_rips_quotient_map_sections():
    rr = rips_a5(7, False)
    rels = rr.gamma.relators
    # input relator + filler |-> input relator
    for i, r in enumerate(A5.relators):
        assert rr.quotient_map.apply(rels[i]) == r.reduce()
    # conjugation relators |-> identity
    for w in rels[len(A5.relators) :]:
        assert not rr.quotient_map.apply(w)


def test_rips_zero_exponent_preserves_abelianization():
    assert abelianization(rips_a5(7, True).gamma).is_trivial
    for q in [
        catalog("cyclic", (6,)).presentation,
        catalog("free", (2,)).presentation,
    ]:
        rr = rips(q, 6, zero_exponent=True)
        assert abelianization(rr.gamma).to_json() == abelianization(q).to_json()
        assert rr.metric.verdict


def test_rips_zero_exponent_fillers_have_zero_sums():
    rr = rips_a5(7, True)
    nx = len(A5.alphabet)
    a1, a2 = rr.gamma.alphabet.names[nx:]
    # input relators carry no a-letters of their own, so their rows show the
    # filler sums exactly
    for i in range(len(A5.relators)):
        r = rr.gamma.relators[i]
        assert r.exponent_sum(a1) == 0 and r.exponent_sum(a2) == 0


def test_rips_perfection_propagates():
    assert is_perfect(rips_a5(6, True).gamma)
    assert is_perfect(rips_a5(6, False).gamma)  # plain mode re-checks by SNF
    assert is_perfect(rips(BP2, 6, zero_exponent=True).gamma)


def test_rips_trivial_input():
    rr = rips(quiet("< x | x >"), 6, zero_exponent=True)
    assert is_perfect(rr.gamma)
    assert len(rr.gamma.relators) == 1 + 4


def test_rips_rejects_small_m():
    with pytest.raises(RipsError, match="at least 6"):
        rips(A5, 5)


def test_rips_letter_cap():
    with pytest.raises(BudgetExhausted, match="letter"):
        rips(A5, 12, zero_exponent=True, max_letters=10_000)


def test_rips_deterministic():
    a = rips(A5, 7, zero_exponent=True)
    b = rips(A5, 7, zero_exponent=True)
    assert a.gamma.to_json() == b.gamma.to_json()
    assert a.de_bruijn_order == b.de_bruijn_order


def test_rips_to_json_shape():
    rr = rips_a5(7, False)
    j = rr.to_json()
    assert j["relator_count"] == 11 and j["metric_verdict"] is True
    assert j["m"] == 7 and j["de_bruijn_order"] >= 2
    # the worst piece stays under 1/7 of the shortest relator
    shortest = min(len(r) for r in rr.gamma.relators)
    assert 0 < j["max_piece"] * 7 < shortest


# -- uce ---------------------------------------------------------------------


def test_uce_a5_counts_and_order():
    u = uce(A5)
    assert len(u.tilde.relators) == 2 * (1 + 3) == 8
    table = todd_coxeter(u.tilde)
    assert table and table.n == 120  # the binary icosahedral group


def test_uce_witness_certificates():
    u = uce(A5)
    rows = exponent_matrix(A5).data
    for ai, c in enumerate(u.witnesses):
        total = [0, 0]
        for cj, row in zip(c, rows):
            total = [t + cj * x for t, x in zip(total, row)]
        assert total == [1 if j == ai else 0 for j in range(2)]


def test_uce_expressions_match_witnesses():
    u = uce(A5)
    for c, w in zip(u.witnesses, u.expressions):
        prod = Word.identity(A5.alphabet)
        for cj, r in zip(c, A5.relators):
            prod = prod * r**cj
        assert w == prod.reduce()


def test_uce_rank_one():
    u = uce(quiet("< a | a >"))
    assert [w.text() for w in u.tilde.relators] == ["a", "a"]
    table = todd_coxeter(u.tilde)
    assert table and table.n == 1


def test_uce_emits_no_warnings():
    with warnings.catch_warnings(record=True) as log:
        warnings.simplefilter("always")
        uce(quiet("< a | a >"))
    assert not log


def test_uce_bp2():
    u = uce(BP2)
    assert len(u.tilde.relators) == 4 * (1 + 4) == 20
    assert is_perfect(u.tilde)


def test_uce_commutator_fallback_keeps_relators_nonempty():
    # [a, a^2] is freely trivial; the conjugate fallback must kick in
    u = uce(A5)
    assert all(len(w) > 0 for w in u.tilde.relators)
    assert u.commutators[0] != Word(A5.alphabet, ())


def test_uce_expressions_trivial_in_source():
    # w_a is a literal product of relators, so Dehn reduction over a
    # C'(1/7) presentation must kill it; the first two witnesses are
    # 15- and 10-fold products, not single relators
    rr = rips_a5(7, True)
    u = uce(rr.gamma)
    assert u.witnesses[0][:3] == (-7, -5, 3)  # filler sums vanish, so the
    # relation lattice restricted to the input columns is A5's own
    solver = DehnSolver(rr.gamma)
    for w in u.expressions:
        trivial, _ = solver.is_trivial(w)
        assert trivial


def test_uce_rejects_non_perfect():
    with pytest.raises(ConstructionError, match="perfect"):
        uce(quiet("< x | x^5 >"))


def test_uce_to_json():
    j = uce(A5).to_json()
    assert j["relator_count"] == 8
    assert set(j["witnesses"]) == {"a", "b"}


# -- fibre generators --------------------------------------------------------


def test_fibre_generators_shape():
    z6 = quiet("< x | x^6 >")
    pairs = fibre_generators(z6, [z6.word("x^3")])
    assert [(u.text(), v.text()) for u, v in pairs] == [("x", "x"), ("x^3", "")]


def test_fibre_generators_reject_foreign_words():
    z6 = quiet("< x | x^6 >")
    other = quiet("< y | y^2 >")
    with pytest.raises(ConstructionError, match="alphabet"):
        fibre_generators(z6, [other.word("y")])


def test_fibre_generators_generate_brute_force():
    # Z/6 -> Z/3: the pairs {(x,x), (x^3,1)} must span all 12 elements
    z6 = quiet("< x | x^6 >")
    eta = GroupHom(z6, [cyclic_group(3).generators[0]], 3)
    ffp = fibre_product_finite(eta, cyclic_group(6))
    assert len(ffp.elements) == 12
    assert check_generation(ffp, list(fibre_generators(z6, [z6.word("x^3")])))
    # the diagonal alone is too small
    assert not check_generation(ffp, [(z6.word("x"), z6.word("x"))])


# -- pipeline ----------------------------------------------------------------


def test_pipeline_a5_counts():
    pl = pipeline_a5()
    nx, nr = len(A5.alphabet), len(A5.relators)
    assert pl.counts["extension_generators"] == 2 * (nx + 2) == 8
    assert pl.counts["extension_relators"] == (nx + 2) ** 2 + 2 * (nx + 2) * (
        1 + nr + 4 * nx
    ) == 112
    assert pl.counts["p_generators"] == nx + 2 + nr == 7
    assert len(pl.extension.relators) == pl.counts["extension_relators"]


def test_pipeline_p_generator_words_embed():
    pl = pipeline(quiet("< x | x >"), 6)
    words = pl.p_generator_words()
    assert len(words) == 4
    n = len(pl.uce_stage.tilde.alphabet)
    # diagonal pair (x, x) -> x * shifted x
    assert words[0].letters == (1, 1 + n)
    # kernel pairs live in the left factor
    assert words[1].letters == (n - 2 + 1,)  # a1
    assert all(l <= n for l in words[1].letters)


def test_pipeline_counts_depend_only_on_sizes():
    t5 = quiet("< a, b | a^2, b^3, (a b)^5 >")
    t7 = quiet("< a, b | a^2, b^3, (a b)^7 >")
    assert pipeline(t5, 6).counts == pipeline(t7, 6).counts


def test_pipeline_rejects_non_perfect():
    with pytest.raises(ConstructionError, match="perfect"):
        pipeline(quiet("< x | x^6 >"), 6)


def test_pipeline_carries_evidence():
    pl = pipeline_a5()
    assert pl.evidence.verdict == "criterion fails"  # A5 has index-5 subgroups
    assert pl.quotient is A5
    j = pl.to_json()
    assert j["counts"]["extension_relators"] == 112
    assert j["rips"]["metric_verdict"] is True


# -- finite-quotient evidence -------------------------------------------------


def test_evidence_bp2_satisfied_at_scale():
    ev = grothendieck_evidence(BP2, 5, Budget(time_limit_s=30.0, max_cosets=20_000))
    assert ev.verdict == "criterion satisfied at tested scale"
    assert ev.h1.is_trivial
    assert ev.h2 is None and "not certified finite" in ev.h2_status
    assert all(ev.subgroups.totals.get(k, 0) == 0 for k in range(2, 6))


def test_evidence_fails_on_homology():
    ev = grothendieck_evidence(quiet("< a | a^5 >"), 3)
    assert ev.verdict == "criterion fails"
    assert str(ev.h1) == "Z/5"


def test_evidence_fails_on_subgroups():
    ev = grothendieck_evidence(A5, 5)
    assert ev.verdict == "criterion fails"
    assert ev.subgroups.totals[5] == 5
    assert ev.h2 is not None and ev.h2.torsion == (2,)
    j = ev.to_json()
    assert j["verdict"] == "criterion fails" and j["h2"] == {"free_rank": 0, "torsion": [2]}
