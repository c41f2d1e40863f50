"""Finite presentations: grammar, combinators, and a catalog of test groups.

Text grammar (UTF-8, `#` starts a line comment):

    presentation := "<" gens "|" rels ">"
    gens         := NAME ("," NAME)*
    rels         := [ rel ("," rel)* ]
    rel          := word | word "=" word          -- sugar for u v^-1
    word         := term ("*"? term)*
    term         := atom ("^" INT)?
    atom         := NAME | "(" word ")" | "[" word "," word "]"

`[u,v]` abbreviates u v u^-1 v^-1; INT may be negative (`t^-1`).
JSON alternative: {"generators": ["a", ...], "relators": ["a^2", ...]}.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .words import Alphabet, Substitution, Word, WordError, commutator


class PresentationWarning(UserWarning):
    """Degenerate but legal input: empty or duplicate relators."""


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# tokenizer / parser

_SYMBOLS = set("<>|,^()[]=*")


@dataclass(frozen=True)
class _Tok:
    kind: str  # 'name' | 'int' | one of _SYMBOLS | 'eof'
    value: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_col = col
        if c in _SYMBOLS:
            toks.append(_Tok(c, c, line, start_col))
            i += 1
            col += 1
            continue
        if c.isalpha():
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(_Tok("name", text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if c.isdigit() or (c == "-" and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            toks.append(_Tok("int", text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, text: str, alphabet: Alphabet | None = None):
        self.toks = _tokenize(text)
        self.pos = 0
        self.alphabet = alphabet

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def next(self) -> _Tok:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, kind: str) -> _Tok:
        t = self.next()
        if t.kind != kind:
            got = t.value or "end of input"
            raise ParseError(f"expected {kind!r}, got {got!r}", t.line, t.col)
        return t

    def fail(self, message: str) -> None:
        t = self.peek()
        raise ParseError(message, t.line, t.col)

    # -- words ------------------------------------------------------------

    def _letters_of_atom(self) -> list[int]:
        t = self.peek()
        if t.kind == "name":
            self.next()
            assert self.alphabet is not None
            if t.value not in self.alphabet:
                raise ParseError(f"unknown generator {t.value!r}", t.line, t.col)
            return [self.alphabet.index(t.value) + 1]
        if t.kind == "(":
            self.next()
            inner = self._letters_of_word()
            self.expect(")")
            return inner
        if t.kind == "[":
            self.next()
            u = self._letters_of_word()
            self.expect(",")
            v = self._letters_of_word()
            self.expect("]")
            return u + v + [-x for x in reversed(u)] + [-x for x in reversed(v)]
        self.fail(f"expected a generator, '(' or '[', got {t.value or 'end of input'!r}")
        raise AssertionError  # unreachable

    def _letters_of_term(self) -> list[int]:
        base = self._letters_of_atom()
        if self.peek().kind == "^":
            self.next()
            t = self.expect("int")
            e = int(t.value)
            if e >= 0:
                return base * e
            return [-x for x in reversed(base)] * (-e)
        return base

    def _starts_atom(self) -> bool:
        return self.peek().kind in ("name", "(", "[")

    def _letters_of_word(self) -> list[int]:
        if not self._starts_atom():
            self.fail("expected a word")
        letters = self._letters_of_term()
        while True:
            if self.peek().kind == "*":
                self.next()
                if not self._starts_atom():
                    self.fail("expected a term after '*'")
            if not self._starts_atom():
                return letters
            letters += self._letters_of_term()

    def word(self) -> Word:
        assert self.alphabet is not None
        return Word(self.alphabet, self._letters_of_word())

    # -- presentations -----------------------------------------------------

    def presentation(self) -> "Presentation":
        self.expect("<")
        names = [self.expect("name").value]
        while self.peek().kind == ",":
            self.next()
            names.append(self.expect("name").value)
        t = self.peek()
        try:
            self.alphabet = Alphabet(names)
        except WordError as e:
            raise ParseError(str(e), t.line, t.col) from None
        self.expect("|")
        relators: list[Word] = []
        if self.peek().kind != ">":
            relators.append(self._relator())
            while self.peek().kind == ",":
                self.next()
                relators.append(self._relator())
        self.expect(">")
        self.expect("eof")
        return Presentation(self.alphabet, relators)

    def _relator(self) -> Word:
        u = self.word()
        if self.peek().kind == "=":
            self.next()
            v = self.word()
            return u * v.inverse()
        return u


def parse_word(text: str, alphabet: Alphabet) -> Word:
    """Parse a single word (same grammar as relators) over a known alphabet."""
    p = _Parser(text, alphabet)
    w = p.word()
    p.expect("eof")
    return w


def parse_presentation(text: str) -> "Presentation":
    """Parse `< gens | relators >` text; `#` comments allowed."""
    return _Parser(text).presentation()


# ---------------------------------------------------------------------------
# the Presentation value


class Presentation:
    """An alphabet plus a tuple of freely reduced, nonempty relators.

    Relators reducing to the empty word are dropped with a warning; duplicate
    relators are kept but flagged (counts matter to the constructions).
    """

    __slots__ = ("alphabet", "relators")

    def __init__(self, alphabet: Alphabet, relators: Iterable[Word] = ()):
        kept: list[Word] = []
        seen: set[tuple[int, ...]] = set()
        for i, r in enumerate(relators):
            if r.alphabet != alphabet:
                raise WordError(f"relator {i} is over a different alphabet")
            r = r.reduce()
            if not r:
                warnings.warn(f"dropping relator {i}: freely reduces to the empty word",
                              PresentationWarning, stacklevel=2)
                continue
            if r.letters in seen:
                warnings.warn(f"duplicate relator {r.text()!r} kept",
                              PresentationWarning, stacklevel=2)
            seen.add(r.letters)
            kept.append(r)
        self.alphabet = alphabet
        self.relators = tuple(kept)

    @classmethod
    def free(cls, names: Sequence[str]) -> "Presentation":
        return cls(Alphabet(names))

    # -- conveniences -------------------------------------------------------

    @property
    def generators(self) -> tuple[str, ...]:
        return self.alphabet.names

    def gen(self, name: str) -> Word:
        return self.alphabet.gen(name)

    def word(self, text: str) -> Word:
        return parse_word(text, self.alphabet)

    def max_relator_length(self) -> int:
        return max((len(r) for r in self.relators), default=0)

    def total_relator_length(self) -> int:
        return sum(len(r) for r in self.relators)

    # -- serialization ------------------------------------------------------

    def to_text(self) -> str:
        gens = ", ".join(self.alphabet.names)
        rels = ", ".join(r.text() for r in self.relators)
        return f"< {gens} | {rels} >" if rels else f"< {gens} | >"

    def to_json(self) -> dict:
        return {
            "generators": list(self.alphabet.names),
            "relators": [r.text() for r in self.relators],
        }

    @classmethod
    def from_json(cls, d: dict) -> "Presentation":
        alphabet = Alphabet(d["generators"])
        return cls(alphabet, [parse_word(t, alphabet) for t in d["relators"]])

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Presentation)
            and self.alphabet == other.alphabet
            and self.relators == other.relators
        )

    def __hash__(self) -> int:
        return hash((self.alphabet, self.relators))

    def __repr__(self) -> str:
        return f"<presentation {self.to_text()}>"


def load_presentation(text: str) -> Presentation:
    """Accept either grammar text or the JSON form (sniffed on first '{')."""
    if text.lstrip().startswith("{"):
        return Presentation.from_json(json.loads(text))
    return parse_presentation(text)


# ---------------------------------------------------------------------------
# symmetrized closure


class SymmetrizedSet:
    """All cyclic permutations of all cyclic reductions of relators and their
    inverses, deduplicated.  `origin[w]` is the index of a source relator."""

    __slots__ = ("alphabet", "elements", "origin")

    def __init__(self, alphabet: Alphabet, elements: Sequence[Word], origin: dict[Word, int]):
        self.alphabet = alphabet
        self.elements = tuple(elements)
        self.origin = origin

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[Word]:
        return iter(self.elements)

    def __contains__(self, w: object) -> bool:
        return w in self.origin


def symmetrize(p: Presentation) -> SymmetrizedSet:
    elements: list[Word] = []
    origin: dict[Word, int] = {}
    for idx, r in enumerate(p.relators):
        core, _ = r.cyclic_reduce()
        ls = core.letters
        n = len(ls)
        for base in (ls, tuple(-x for x in reversed(ls))):
            for k in range(n):
                rot = Word(p.alphabet, base[k:] + base[:k], _reduced=True)
                if rot not in origin:
                    origin[rot] = idx
                    elements.append(rot)
    return SymmetrizedSet(p.alphabet, elements, origin)


def proper_power_root(w: Word) -> tuple[Word, int]:
    """(root, k) with the cyclic core of w equal to root^k, k maximal."""
    core, _ = w.cyclic_reduce()
    ls = core.letters
    n = len(ls)
    for d in range(1, n + 1):
        if n % d == 0 and ls == ls[:d] * (n // d):
            return Word(w.alphabet, ls[:d], _reduced=True), n // d
    return core, 1  # empty core only


# ---------------------------------------------------------------------------
# combinators


def _reletter(w: Word, target: Alphabet, index_map: Sequence[int]) -> Word:
    """Transport w to `target`, sending source generator i to target generator
    index_map[i].  Pure renaming: no reduction needed."""
    ls = tuple(
        (index_map[abs(l) - 1] + 1) * (1 if l > 0 else -1) for l in w.letters
    )
    return Word(target, ls, _reduced=w.is_reduced)


def direct_product(p: Presentation, q: Presentation) -> Presentation:
    """Generators renamed g -> g_1 / g_2; relators R_p, R_q, then the
    commutators [x_1, y_2] in (p-generator major, q-generator minor) order."""
    names = [f"{n}_1" for n in p.alphabet.names] + [f"{n}_2" for n in q.alphabet.names]
    if len(set(names)) != len(names):  # pragma: no cover - suffixes keep sides apart
        raise WordError(f"suffix renaming collided: {names}")
    ab = Alphabet(names)
    np_ = len(p.alphabet)
    pmap = list(range(np_))
    qmap = [np_ + i for i in range(len(q.alphabet))]
    relators = [_reletter(r, ab, pmap) for r in p.relators]
    relators += [_reletter(r, ab, qmap) for r in q.relators]
    for i in range(np_):
        x = Word(ab, (i + 1,), _reduced=True)
        for j in range(len(q.alphabet)):
            y = Word(ab, (np_ + j + 1,), _reduced=True)
            relators.append(commutator(x, y))
    return Presentation(ab, relators)


def hnn_ascending(p: Presentation, phi: Substitution, t: str = "t") -> Presentation:
    """Ascending HNN extension: add a stable letter with t^-1 a t = phi(a),
    stored as the relators t^-1 a t phi(a)^-1, one per generator."""
    if phi.source != p.alphabet or phi.target != p.alphabet:
        raise WordError("endomorphism must map the presentation's alphabet to itself")
    if t in p.alphabet:
        raise WordError(f"stable letter {t!r} clashes with an existing generator")
    ab = Alphabet(p.alphabet.names + (t,))
    emb = list(range(len(p.alphabet)))
    tw = ab.gen(t)
    relators = [_reletter(r, ab, emb) for r in p.relators]
    for name in p.alphabet.names:
        a = ab.gen(name)
        img = _reletter(phi(p.gen(name)), ab, emb)
        relators.append(tw.inverse() * a * tw * img.inverse())
    return Presentation(ab, relators)


def amalgam(
    p: Presentation,
    q: Presentation,
    identifications: Sequence[tuple[Word, Word]] = (),
) -> Presentation:
    """Free product of p and q modulo u_i = v_i (u_i over p, v_i over q).
    Generator names must already be disjoint."""
    clash = set(p.alphabet.names) & set(q.alphabet.names)
    if clash:
        raise WordError(f"generator names shared between factors: {sorted(clash)}")
    ab = Alphabet(p.alphabet.names + q.alphabet.names)
    np_ = len(p.alphabet)
    pmap = list(range(np_))
    qmap = [np_ + i for i in range(len(q.alphabet))]
    relators = [_reletter(r, ab, pmap) for r in p.relators]
    relators += [_reletter(r, ab, qmap) for r in q.relators]
    for u, v in identifications:
        if u.alphabet != p.alphabet or v.alphabet != q.alphabet:
            raise WordError("identification words must lie over the respective factors")
        relators.append(_reletter(u, ab, pmap) * _reletter(v, ab, qmap).inverse())
    return Presentation(ab, relators)


# ---------------------------------------------------------------------------
# catalog


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    parameters: tuple[int, ...]
    presentation: Presentation
    notes: str


class CatalogError(ValueError):
    pass


def catalog(name: str, params: Sequence[int] = ()) -> CatalogEntry:
    """Named test groups; regenerating with equal parameters is bit-identical.

    Bp p          four-generator perfect aspherical family (p >= 2)
    baumslag25 k  metacyclic Z/25-by-Z pair member, conjugation exponent 6^k mod 25
    A5            alternating group on 5 points, (2,3,5) triangle quotient
    free n        free group of rank n
    cyclic n      cyclic group of order n
    """
    params = tuple(int(x) for x in params)

    def need(k: int):
        if len(params) != k:
            raise CatalogError(f"{name!r} takes {k} parameter(s), got {len(params)}")

    if name == "Bp":
        need(1)
        p = params[0]
        if p < 2:
            raise CatalogError("Bp requires p >= 2")
        text = (
            f"< a, b, alpha, beta | "
            f"b a^-{p} b^-1 a^{p + 1}, "
            f"beta alpha^-{p} beta^-1 alpha^{p + 1}, "
            f"[b a b^-1, a] beta^-1, "
            f"[beta alpha beta^-1, alpha] b^-1 >"
        )
        notes = (
            "Perfect four-generator group with an aspherical presentation; "
            "admits no nontrivial finite quotients."
        )
        return CatalogEntry(name, params, parse_presentation(text), notes)

    if name == "baumslag25":
        need(1)
        k = params[0]
        if k < 1:
            raise CatalogError("baumslag25 requires variant k >= 1")
        e = pow(6, k, 25)
        text = f"< a, t | a^25, t^-1 a t a^-{e} >"
        notes = (
            f"Z/25 extended by Z, stable letter conjugating by multiplication "
            f"by {e} = 6^{k} mod 25."
        )
        return CatalogEntry(name, params, parse_presentation(text), notes)

    if name == "A5":
        need(0)
        text = "< a, b | a^2, b^3, (a b)^5 >"
        return CatalogEntry(name, params, parse_presentation(text),
                            "Alternating group of order 60 as a (2,3,5) triangle quotient.")

    if name == "free":
        need(1)
        n = params[0]
        if n < 1:
            raise CatalogError("free requires n >= 1")
        pres = Presentation.free([f"x{i + 1}" for i in range(n)])
        return CatalogEntry(name, params, pres, f"Free group of rank {n}.")

    if name == "cyclic":
        need(1)
        n = params[0]
        if n < 1:
            raise CatalogError("cyclic requires n >= 1")
        return CatalogEntry(name, params, parse_presentation(f"< a | a^{n} >"),
                            f"Cyclic group of order {n}.")

    raise CatalogError(f"unknown catalog name {name!r}")
