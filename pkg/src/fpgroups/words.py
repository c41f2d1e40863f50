"""Words in free groups.

A word is a finite sequence of letters x^(+-1) over a fixed alphabet of
generator names.  Letters are stored as nonzero signed integers: +(i+1) is
generator i, -(i+1) its inverse, so inversion is "negate and reverse" and
free reduction is a single stack pass.

Words from different alphabets never mix: every binary operation checks that
both operands resolve against equal alphabets.
"""

from __future__ import annotations

import re
from collections import Counter
from operator import index as _as_int
from typing import Iterable, Iterator, Mapping

_NAME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")


class WordError(ValueError):
    """Alphabet mismatch or malformed letter data."""


class Alphabet:
    """An ordered tuple of distinct generator names."""

    __slots__ = ("names", "_index")

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        for n in names:
            if not _NAME_RE.match(n):
                raise WordError(f"bad generator name {n!r}")
        if len(set(names)) != len(names):
            raise WordError(f"duplicate generator names in {names}")
        self.names = names
        self._index = {n: i for i, n in enumerate(names)}

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)

    def __contains__(self, name: object) -> bool:
        return name in self._index

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise WordError(f"unknown generator {name!r}") from None

    def gen(self, name: str) -> "Word":
        """The length-1 word for a generator."""
        return Word(self, (self.index(name) + 1,))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Alphabet) and self.names == other.names

    def __hash__(self) -> int:
        return hash(self.names)

    def __repr__(self) -> str:
        return f"Alphabet({', '.join(self.names)})"


def _check_same(a: Alphabet, b: Alphabet) -> None:
    if a != b:
        raise WordError(f"alphabet mismatch: {a!r} vs {b!r}")


class Word:
    """An immutable word; equality is letter-for-letter (not group equality).

    Use free_reduce / cyclic_reduce for normal forms.
    """

    __slots__ = ("alphabet", "letters", "_reduced")

    def __init__(self, alphabet: Alphabet, letters: Iterable[int] = (), *, _reduced: bool = False):
        letters = tuple(letters)
        n = len(alphabet)
        if letters:
            # validated with C-speed passes; constructions routinely make
            # words of 10^5+ letters, so no per-letter Python loop here
            try:
                letters = tuple(map(_as_int, letters))
            except TypeError:
                bad = next(l for l in letters if not isinstance(l, int))
                raise WordError(f"letter {bad!r} out of range for {alphabet!r}") from None
            if 0 in letters or min(letters) < -n or max(letters) > n:
                bad = next(l for l in letters if l == 0 or abs(l) > n)
                raise WordError(f"letter {bad!r} out of range for {alphabet!r}")
        self.alphabet = alphabet
        self.letters = letters
        self._reduced = _reduced

    @classmethod
    def identity(cls, alphabet: Alphabet) -> "Word":
        return cls(alphabet, (), _reduced=True)

    def __len__(self) -> int:
        return len(self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Word)
            and self.alphabet == other.alphabet
            and self.letters == other.letters
        )

    def __hash__(self) -> int:
        return hash((self.alphabet, self.letters))

    def __mul__(self, other: "Word") -> "Word":
        if not isinstance(other, Word):
            return NotImplemented
        _check_same(self.alphabet, other.alphabet)
        return Word(self.alphabet, self.letters + other.letters)

    def inverse(self) -> "Word":
        return Word(
            self.alphabet,
            tuple(-l for l in reversed(self.letters)),
            _reduced=self._reduced,
        )

    __invert__ = inverse

    def __pow__(self, n: int) -> "Word":
        if n == 0:
            return Word.identity(self.alphabet)
        base = self if n > 0 else self.inverse()
        return Word(self.alphabet, base.letters * abs(n))

    @property
    def is_reduced(self) -> bool:
        if self._reduced:
            return True
        ls = self.letters
        ok = all(ls[i] != -ls[i + 1] for i in range(len(ls) - 1))
        if ok:
            self._reduced = True
        return ok

    def reduce(self) -> "Word":
        """Freely reduced form (cancel adjacent x x^-1 pairs)."""
        if self._reduced:
            return self
        out: list[int] = []
        for l in self.letters:
            if out and out[-1] == -l:
                out.pop()
            else:
                out.append(l)
        return Word(self.alphabet, out, _reduced=True)

    def cyclic_reduce(self) -> tuple["Word", "Word"]:
        """Return (core, conjugator) with self = conjugator * core * conjugator^-1
        up to free reduction, core cyclically reduced."""
        w = self.reduce()
        ls = w.letters
        i, j = 0, len(ls)
        while j - i >= 2 and ls[i] == -ls[j - 1]:
            i += 1
            j -= 1
        core = Word(self.alphabet, ls[i:j], _reduced=True)
        conj = Word(self.alphabet, ls[:i], _reduced=True)
        return core, conj

    def exponent_sum(self, name: str) -> int:
        i = self.alphabet.index(name) + 1
        return self.letters.count(i) - self.letters.count(-i)

    def exponent_vector(self) -> list[int]:
        """Exponent sums for every generator, in alphabet order."""
        v = [0] * len(self.alphabet)
        for l, c in Counter(self.letters).items():
            v[abs(l) - 1] += c if l > 0 else -c
        return v

    def syllables(self) -> Iterator[tuple[str, int]]:
        """Runs of equal letters as (generator name, signed exponent)."""
        ls = self.letters
        i = 0
        while i < len(ls):
            j = i
            while j < len(ls) and ls[j] == ls[i]:
                j += 1
            name = self.alphabet.names[abs(ls[i]) - 1]
            yield name, (j - i) * (1 if ls[i] > 0 else -1)
            i = j

    def text(self) -> str:
        """Canonical text form: space-joined syllables, '^' powers."""
        parts = []
        for name, e in self.syllables():
            parts.append(name if e == 1 else f"{name}^{e}")
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"<word {self.text() or '1'}>"


def free_reduce(w: Word) -> Word:
    return w.reduce()


def cyclic_reduce(w: Word) -> tuple[Word, Word]:
    return w.cyclic_reduce()


def exponent_sum(w: Word, name: str) -> int:
    return w.exponent_sum(name)


def commutator(u: Word, v: Word) -> Word:
    """[u, v] = u v u^-1 v^-1, not reduced."""
    _check_same(u.alphabet, v.alphabet)
    return u * v * u.inverse() * v.inverse()


class Substitution:
    """A map generator -> word over a target alphabet, applied letterwise.

    Extends to a homomorphism of free groups; apply() returns the freely
    reduced image.
    """

    def __init__(self, source: Alphabet, target: Alphabet, images: Mapping[str, Word]):
        self.source = source
        self.target = target
        self.images: dict[str, Word] = {}
        for name, w in images.items():
            if name not in source:
                raise WordError(f"image given for {name!r}, not a source generator")
            _check_same(w.alphabet, target)
            self.images[name] = w

    def apply(self, w: Word) -> Word:
        _check_same(w.alphabet, self.source)
        out: list[int] = []
        for l in w.letters:
            name = self.source.names[abs(l) - 1]
            img = self.images.get(name)
            if img is None:
                raise WordError(f"generator {name!r} has no image under this substitution")
            if l > 0:
                out.extend(img.letters)
            else:
                out.extend(-x for x in reversed(img.letters))
        return Word(self.target, out).reduce()

    def __call__(self, w: Word) -> Word:
        return self.apply(w)

    def __repr__(self) -> str:
        ims = ", ".join(f"{n} -> {w.text() or '1'}" for n, w in self.images.items())
        return f"<substitution {ims}>"


def substitute(w: Word, sub: Substitution) -> Word:
    return sub.apply(w)
