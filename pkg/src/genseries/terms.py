"""Standard-form series terms and their shuffle algebra.

Every term of the generating series of a polynomial oscillator can be put
in the alternating "chain" form

    coeff * eps-monomial * (s2/2)^noise * pole-monomial *
        F(c0) l1 F(c1) l2 ... lq F(cq)

where each letter l is x0 or x1 and each fraction F(c) = 1/(1 - c*x0) is
labelled by an integer combination c of the base poles a_1..a_p (stored as
an integer vector; the zero vector is the trivial fraction 1).  The shuffle
of two chains peels the rightmost letter of each operand:

    s' l F(b)  sh  t' m F(d)
        = [ (s' l F(b) sh t') m  +  (s' sh t' m F(d)) l ] F(b+d)

with F(b) sh F(d) = F(b+d) at the bottom: pole combinations add because the
letter-free fractions are geometric series, 1/(1-bx) sh 1/(1-dx) =
1/(1-(b+d)x).

Scalars multiply: rational coefficients multiply and the three exponent
vectors add.  The pole-monomial slot (exponents of a_1..a_p as a
multiplicative prefactor) stays zero everywhere except in the output of
`reduce_exponents`, whose defining identity

    1/(1-cx0)^a = 1/(1-cx0)^(a-1) + c*x0/((1-cx0)(1-cx0)^(a-1))

carries the pole value c out front as a scalar.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .errors import TermBudgetError, UnsupportedFormError
from .words import X0, X1, Word, WordPolynomial

Combo = tuple[int, ...]


def combo_add(a: Combo, b: Combo) -> Combo:
    return tuple(x + y for x, y in zip(a, b, strict=True))


def combo_is_zero(a: Combo) -> bool:
    return all(x == 0 for x in a)


def unit_combo(index: int, dim: int) -> Combo:
    return tuple(1 if i == index else 0 for i in range(dim))


def zero_combo(dim: int) -> Combo:
    return (0,) * dim


@dataclass(frozen=True)
class PoleFrac:
    """One fraction slot 1/(1 - c*x0)^alpha with c an integer pole combo."""

    combo: Combo
    alpha: int = 1

    def __post_init__(self):
        if self.alpha < 1:
            raise ValueError("fraction exponent must be a positive integer")

    @property
    def trivial(self) -> bool:
        return combo_is_zero(self.combo) and self.alpha == 1


@dataclass(frozen=True)
class Chain:
    """Alternating sequence fracs[0] letters[0] fracs[1] ... letters[q-1] fracs[q]."""

    fracs: tuple[PoleFrac, ...]
    letters: tuple[int, ...]

    def __post_init__(self):
        if len(self.fracs) != len(self.letters) + 1:
            raise ValueError("chain needs exactly one more fraction slot than letters")
        for l in self.letters:
            if l not in (X0, X1):
                raise ValueError(f"series letters must be x0 or x1, got {l}")

    @property
    def n_letters(self) -> int:
        return len(self.letters)

    @property
    def pole_dim(self) -> int:
        return len(self.fracs[0].combo)

    def x1_count(self) -> int:
        return sum(1 for l in self.letters if l == X1)

    def is_reduced(self) -> bool:
        return all(f.alpha == 1 for f in self.fracs)

    def all_x0(self) -> bool:
        return all(l == X0 for l in self.letters)

    def drop_last(self) -> "Chain":
        return Chain(self.fracs[:-1], self.letters[:-1])

    def append(self, letter: int, frac: PoleFrac) -> "Chain":
        return Chain(self.fracs + (frac,), self.letters + (letter,))

    def concat(self, other: "Chain") -> "Chain":
        """Concatenation; the two junction fraction slots merge by combo addition.

        Left-multiplying by an all-x0 prefactor whose trailing slot is
        trivial is the main use; exponents stay at 1 throughout.
        """
        left_tail = self.fracs[-1]
        right_head = other.fracs[0]
        if left_tail.alpha != 1 or right_head.alpha != 1:
            raise UnsupportedFormError("cannot merge fraction slots carrying exponents")
        joined = PoleFrac(combo_add(left_tail.combo, right_head.combo))
        return Chain(
            self.fracs[:-1] + (joined,) + other.fracs[1:],
            self.letters + other.letters,
        )

    def sort_key(self):
        return (
            len(self.letters),
            self.letters,
            tuple((f.combo, f.alpha) for f in self.fracs),
        )


def simple_chain(combos: list[Combo], letters: list[int]) -> Chain:
    """Chain from raw combo vectors, all fraction exponents 1."""
    return Chain(tuple(PoleFrac(tuple(c)) for c in combos), tuple(letters))


@dataclass(frozen=True)
class SeriesTerm:
    """One standard-form term: scalar times an alternating chain.

    eps holds the exponents of the nonlinear stiffness coefficients (one
    slot per polynomial power, ascending); noise counts powers of
    (sigma^2/2); pole_pow is a multiplicative monomial in the base pole
    symbols, zero everywhere except after exponent reduction.
    """

    coeff: Fraction
    eps: tuple[int, ...]
    noise: int
    chain: Chain
    pole_pow: tuple[int, ...] = ()

    def __post_init__(self):
        if not isinstance(self.coeff, Fraction):
            object.__setattr__(self, "coeff", Fraction(self.coeff))
        if self.pole_pow and not any(self.pole_pow):
            object.__setattr__(self, "pole_pow", ())
        if self.noise < 0:
            raise ValueError("noise power must be nonnegative")

    @property
    def letters(self) -> tuple[int, ...]:
        return self.chain.letters

    @property
    def fracs(self) -> tuple[PoleFrac, ...]:
        return self.chain.fracs

    def x1_count(self) -> int:
        return self.chain.x1_count()

    def eps_grade(self) -> int:
        return sum(self.eps)

    def scale(self, k) -> "SeriesTerm":
        return SeriesTerm(self.coeff * Fraction(k), self.eps, self.noise,
                          self.chain, self.pole_pow)

    def merge_key(self):
        return (self.chain, self.eps, self.noise, self.pole_pow)

    def sort_key(self):
        return (*self.chain.sort_key(), self.eps, self.noise, self.pole_pow, self.coeff)

    def __repr__(self):
        bits = [str(self.coeff)]
        for i, e in enumerate(self.eps):
            if e:
                bits.append(f"eps[{i}]^{e}")
        if self.noise:
            bits.append(f"(s2/2)^{self.noise}")
        for i, e in enumerate(self.pole_pow):
            if e:
                bits.append(f"a{i + 1}^{e}")
        body = []
        for frac, letter in itertools.zip_longest(self.chain.fracs, self.chain.letters):
            if not frac.trivial:
                body.append(f"F{frac.combo}" + (f"^{frac.alpha}" if frac.alpha > 1 else ""))
            if letter is not None:
                body.append(f"x{letter}")
        return "Term(" + " ".join(bits) + " | " + " ".join(body or ["1"]) + ")"


def term_from_chain(chain: Chain, coeff=Fraction(1), eps: tuple[int, ...] = (),
                    noise: int = 0) -> SeriesTerm:
    return SeriesTerm(Fraction(coeff), tuple(eps), noise, chain)


# ---------------------------------------------------------------------------
# shuffle product on chains

_chain_shuffle_cache: dict[tuple[Chain, Chain], tuple[tuple[Chain, int], ...]] = {}


def _shuffle_chains(c1: Chain, c2: Chain) -> tuple[tuple[Chain, int], ...]:
    if c1.n_letters == 0 and c2.n_letters == 0:
        combined = PoleFrac(combo_add(c1.fracs[0].combo, c2.fracs[0].combo))
        return ((Chain((combined,), ()), 1),)
    if c2.sort_key() < c1.sort_key():  # commutative; canonical key order
        c1, c2 = c2, c1
    key = (c1, c2)
    hit = _chain_shuffle_cache.get(key)
    if hit is not None:
        return hit
    new_frac = PoleFrac(combo_add(c1.fracs[-1].combo, c2.fracs[-1].combo))
    out: Counter[Chain] = Counter()
    if c1.n_letters:
        for ch, m in _shuffle_chains(c1.drop_last(), c2):
            out[ch.append(c1.letters[-1], new_frac)] += m
    if c2.n_letters:
        for ch, m in _shuffle_chains(c1, c2.drop_last()):
            out[ch.append(c2.letters[-1], new_frac)] += m
    result = tuple(sorted(out.items(), key=lambda kv: kv[0].sort_key()))
    _chain_shuffle_cache[key] = result
    return result


def clear_chain_cache() -> None:
    _chain_shuffle_cache.clear()


def shuffle_terms(s: SeriesTerm, t: SeriesTerm) -> list[SeriesTerm]:
    """Shuffle product of two reduced standard-form terms.

    Scalars multiply (exponent vectors add); the chain-level recursion is
    memoized.  Rejects terms over mismatched pole or eps spaces and
    non-reduced input.
    """
    if s.chain.pole_dim != t.chain.pole_dim:
        raise UnsupportedFormError("terms live over different pole spaces")
    if len(s.eps) != len(t.eps):
        raise UnsupportedFormError("terms live over different eps spaces")
    if not (s.chain.is_reduced() and t.chain.is_reduced()):
        raise UnsupportedFormError("shuffle requires reduced terms; apply reduce_exponents first")
    coeff = s.coeff * t.coeff
    eps = tuple(a + b for a, b in zip(s.eps, t.eps))
    noise = s.noise + t.noise
    pole_pow = _mul_pole_pow(s.pole_pow, t.pole_pow)
    return [
        SeriesTerm(coeff * m, eps, noise, ch, pole_pow)
        for ch, m in _shuffle_chains(s.chain, t.chain)
    ]


def _mul_pole_pow(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    if not a:
        return b
    if not b:
        return a
    return tuple(x + y for x, y in zip(a, b, strict=True))


def merge_terms(terms: list[SeriesTerm]) -> list[SeriesTerm]:
    """Combine like terms (same chain, eps, noise, pole monomial); drop
    zeros; sort into the canonical order (letters graded-lex, then pole
    combos, then scalar exponents)."""
    acc: dict[tuple, SeriesTerm] = {}
    for t in terms:
        k = t.merge_key()
        old = acc.get(k)
        if old is not None:
            acc[k] = SeriesTerm(old.coeff + t.coeff, t.eps, t.noise, t.chain, t.pole_pow)
        else:
            acc[k] = t
    out = [t for t in acc.values() if t.coeff != 0]
    out.sort(key=SeriesTerm.sort_key)
    return out


def shuffle_term_lists(a: list[SeriesTerm], b: list[SeriesTerm],
                       budget: int | None = None, order: int = 0) -> list[SeriesTerm]:
    """All pairwise shuffles of two term lists, merged."""
    out: list[SeriesTerm] = []
    for s in a:
        for t in b:
            out.extend(shuffle_terms(s, t))
            if budget is not None and len(out) > budget:
                raise TermBudgetError(order, len(out), budget)
    return merge_terms(out)


def shuffle_many(factors, arity: int | None = None) -> list[SeriesTerm]:
    """Left-fold shuffle of several terms or term lists, merged between folds.

    Associativity makes the fold order irrelevant after merging; arity 1 is
    the degenerate identity.
    """
    if not factors:
        raise ValueError("need at least one factor")
    lists: list[list[SeriesTerm]] = [f if isinstance(f, list) else [f] for f in factors]
    if arity is not None and len(lists) != arity:
        raise ValueError(f"expected {arity} factors, got {len(lists)}")
    acc = merge_terms(list(lists[0]))
    for f in lists[1:]:
        acc = shuffle_term_lists(acc, f)
    return acc


# ---------------------------------------------------------------------------
# exponent reduction

def reduce_exponents(term: SeriesTerm) -> list[SeriesTerm]:
    """Rewrite fraction slots with exponent alpha > 1 into unit-exponent form.

    Applies  1/(1-cx0)^a = 1/(1-cx0)^(a-1) + c*x0/((1-cx0)(1-cx0)^(a-1))
    at the leftmost offending slot and recurses.  The scalar factor c is a
    linear form in the base poles, so a mixed combo distributes into one
    output term per nonzero component, carried in the scalar's pole
    monomial.  The output sum is algebraically equal to the input.
    """
    chain = term.chain
    for idx, f in enumerate(chain.fracs):
        if f.alpha > 1:
            break
    else:
        return [term]

    out: list[SeriesTerm] = []
    # first branch: same slot, exponent lowered by one
    lowered = PoleFrac(f.combo, f.alpha - 1)
    c1 = Chain(chain.fracs[:idx] + (lowered,) + chain.fracs[idx + 1:], chain.letters)
    out.extend(reduce_exponents(SeriesTerm(term.coeff, term.eps, term.noise, c1,
                                           term.pole_pow)))
    # second branch: insert a unit slot and an x0 letter, scalar picks up c
    dim = chain.pole_dim
    new_fracs = chain.fracs[:idx] + (PoleFrac(f.combo), lowered) + chain.fracs[idx + 1:]
    new_letters = chain.letters[:idx] + (X0,) + chain.letters[idx:]
    c2 = Chain(new_fracs, new_letters)
    base_pow = term.pole_pow if term.pole_pow else zero_combo(dim)
    for i, ci in enumerate(f.combo):
        if ci == 0:
            continue
        pw = tuple(e + (1 if j == i else 0) for j, e in enumerate(base_pow))
        out.extend(reduce_exponents(
            SeriesTerm(term.coeff * ci, term.eps, term.noise, c2, pw)
        ))
    return merge_terms(out)


# ---------------------------------------------------------------------------
# word expansion (oracle bridge)

def expand_to_words(term: SeriesTerm, order: int, pole_values) -> WordPolynomial:
    """Truncated word expansion of a term at numeric/exact pole values.

    Each fraction 1/(1-c x0)^alpha contributes
    sum_k C(k+alpha-1, alpha-1) c^k x0^k with c = combo . pole_values; the
    term's rational coefficient and pole monomial multiply through.  eps
    and noise powers are NOT substituted; callers bucket by them.  Words
    longer than `order` letters are dropped.
    """
    if order < 0:
        raise ValueError("expansion order must be nonnegative")
    if len(pole_values) != term.chain.pole_dim:
        raise UnsupportedFormError("pole value vector has wrong dimension")

    def combo_value(c: Combo):
        acc = Fraction(0)
        for k, v in zip(c, pole_values):
            if k:
                acc = acc + k * v
        return acc

    scalar = term.coeff
    for i, e in enumerate(term.pole_pow):
        for _ in range(e):
            scalar = scalar * pole_values[i]

    partial: dict[tuple[int, ...], object] = {(): scalar}
    for frac, letter in itertools.zip_longest(term.chain.fracs, term.chain.letters):
        if frac.trivial:
            expanded = partial
        else:
            cval = combo_value(frac.combo)
            expanded = {}
            for w, coeff in partial.items():
                room = order - len(w)
                power = coeff  # coeff * cval^k, built incrementally
                for k in range(room + 1):
                    weight = comb(k + frac.alpha - 1, frac.alpha - 1)
                    contrib = power * weight if weight != 1 else power
                    key = w + (X0,) * k
                    if key in expanded:
                        expanded[key] = expanded[key] + contrib
                    else:
                        expanded[key] = contrib
                    if k < room:
                        power = power * cval
        if letter is None:
            partial = expanded
        else:
            partial = {
                w + (letter,): coeff
                for w, coeff in expanded.items()
                if len(w) < order
            }
    return WordPolynomial({Word(w): c for w, c in partial.items()})


def expand_terms_to_words(terms: list[SeriesTerm], order: int, pole_values) -> WordPolynomial:
    """Sum of truncated word expansions over a term list."""
    acc = WordPolynomial.zero()
    for t in terms:
        acc = acc + expand_to_words(t, order, pole_values)
    return acc
