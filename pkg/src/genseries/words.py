"""Words over an indeterminate alphabet and the shuffle product.

The generating-series layer uses exactly two letters, x0 and x1 (x0 marks
plain time integration, x1 integration against the input signal).  The word
combinatorics below do not care about the alphabet size, so letters are
plain nonnegative integers; keeping that generality lets the classic
four-letter textbook identities be checked directly.

The shuffle of two words interleaves them in all order-preserving ways:

    x_a u  sh  x_b v = x_a (u sh x_b v) + x_b (x_a u sh v),    1 sh w = w.

Coefficients count interleavings, so  x^k sh x^(n-k) = C(n, k) x^n.
"""

from __future__ import annotations

from collections import Counter
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

X0: int = 0
X1: int = 1

LetterSeq = tuple[int, ...]


class Word:
    """Immutable word: a tuple of nonnegative integer letters."""

    __slots__ = ("letters",)

    def __init__(self, letters: Iterable[int] = ()):
        ls = tuple(letters)
        for l in ls:
            if not isinstance(l, int) or l < 0:
                raise ValueError(f"letters must be nonnegative integers, got {l!r}")
        object.__setattr__(self, "letters", ls)

    def __setattr__(self, name, value):
        raise AttributeError("Word is immutable")

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, i):
        return self.letters[i]

    def __hash__(self):
        return hash(self.letters)

    def __eq__(self, other):
        if isinstance(other, Word):
            return self.letters == other.letters
        return NotImplemented

    def __lt__(self, other: "Word"):
        # graded lexicographic: length first, then letters
        return (len(self.letters), self.letters) < (len(other.letters), other.letters)

    def __add__(self, other: "Word") -> "Word":
        """Concatenation."""
        return Word(self.letters + other.letters)

    def count(self, letter: int) -> int:
        return self.letters.count(letter)

    def __repr__(self):
        return f"Word({self.letters!r})"

    def __str__(self):
        if not self.letters:
            return "1"
        return "".join(f"x{l}" for l in self.letters)


EMPTY_WORD = Word()


@lru_cache(maxsize=200_000)
def _shuffle_tuples(u: LetterSeq, v: LetterSeq) -> tuple[tuple[LetterSeq, int], ...]:
    if not u:
        return ((v, 1),)
    if not v:
        return ((u, 1),)
    if v < u:  # shuffle is commutative; canonical key order halves the cache
        u, v = v, u
    out: Counter[LetterSeq] = Counter()
    for w, c in _shuffle_tuples(u[1:], v):
        out[(u[0],) + w] += c
    for w, c in _shuffle_tuples(u, v[1:]):
        out[(v[0],) + w] += c
    return tuple(sorted(out.items()))


def shuffle_words(u: Word, v: Word) -> dict[Word, int]:
    """Shuffle product of two words: {word: interleaving count}."""
    return {Word(w): c for w, c in _shuffle_tuples(u.letters, v.letters)}


class WordPolynomial:
    """Finite linear combination of words.

    Coefficients live in any commutative ring with +, *, == and bool
    (Fraction by default; exact surds and eps-graded dictionaries are used
    elsewhere).  Zero coefficients are dropped on construction.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict[Word, object] | None = None):
        clean = {}
        for w, c in (terms or {}).items():
            if not isinstance(w, Word):
                w = Word(w)
            if c:
                clean[w] = c
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("WordPolynomial is immutable")

    @classmethod
    def monomial(cls, word: Word, coeff=Fraction(1)) -> "WordPolynomial":
        return cls({word: coeff})

    @classmethod
    def zero(cls) -> "WordPolynomial":
        return cls({})

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, WordPolynomial):
            return self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other: "WordPolynomial") -> "WordPolynomial":
        out = dict(self.terms)
        for w, c in other.terms.items():
            if w in out:
                out[w] = out[w] + c
            else:
                out[w] = c
        return WordPolynomial(out)

    def __sub__(self, other: "WordPolynomial") -> "WordPolynomial":
        return self + other.scale(-1)

    def scale(self, k) -> "WordPolynomial":
        if not k:
            return WordPolynomial.zero()
        return WordPolynomial({w: k * c for w, c in self.terms.items()})

    def coefficient(self, word: Word):
        return self.terms.get(word, Fraction(0))

    def truncate(self, max_len: int) -> "WordPolynomial":
        return WordPolynomial({w: c for w, c in self.terms.items() if len(w) <= max_len})

    def map_coefficients(self, fn) -> "WordPolynomial":
        return WordPolynomial({w: fn(c) for w, c in self.terms.items()})

    def left_concat(self, prefix: Word) -> "WordPolynomial":
        """Concatenate a fixed word on the left of every monomial."""
        return WordPolynomial({prefix + w: c for w, c in self.terms.items()})

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for w in sorted(self.terms):
            parts.append(f"{self.terms[w]}*{w}")
        return " + ".join(parts)

    __repr__ = __str__


def shuffle_polynomials(p: WordPolynomial, q: WordPolynomial) -> WordPolynomial:
    """Bilinear extension of the word shuffle."""
    out: dict[Word, object] = {}
    for u, cu in p.terms.items():
        for v, cv in q.terms.items():
            cc = cu * cv
            for w, m in _shuffle_tuples(u.letters, v.letters):
                ww = Word(w)
                add = cc * m
                if ww in out:
                    out[ww] = out[ww] + add
                else:
                    out[ww] = add
    return WordPolynomial(out)


def clear_shuffle_cache() -> None:
    _shuffle_tuples.cache_clear()
