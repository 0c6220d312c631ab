"""Inverse Laplace-Borel transform of reduced series terms.

A term whose chain contains only x0 letters is an ordinary commutative
rational function of x0.  This module decomposes such terms into partial
fractions and maps the pieces to closed-form time functions: finite sums
of c * t^j * exp(rate * t) atoms, plus cosine atoms for the classical
transform-table rows.  It also extracts the first-order Volterra kernel
from series terms carrying exactly one x1 letter.

Two scalar modes are supported throughout.  In exact mode every pole
value is a Fraction or quadratic Surd and the decomposition is carried
out in that field, so recombination is an identity of polynomials.  In
numeric mode pole values are floats or complexes; residues are computed
in extended precision (numpy long double) because clustered poles
amplify cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import DegenerateSpectrumError, GenseriesError, UnsupportedFormError
from .exact import Surd, as_exact
from .terms import Chain, SeriesTerm
from .words import X0 as X0_LETTER, X1

POLE_MERGE_TOL = 1e-9
IMAG_RESIDUAL_TOL = 1e-8


# ---------------------------------------------------------------------------
# time functions


@dataclass(frozen=True)
class ExpAtom:
    """One c * t^power * exp(rate * t) contribution."""

    coef: complex
    power: int
    rate: complex


@dataclass(frozen=True)
class CosAtom:
    """One amplitude * cos(omega * t) contribution."""

    amplitude: complex
    omega: float


@dataclass(frozen=True)
class TimeFunction:
    """Finite sum of exponential-polynomial atoms and cosine atoms.

    Atoms are merged on equal (power, rate) and stored in a canonical
    order, so structurally equal functions compare equal.  Coefficients
    and rates are complex; conjugate pairs cancel at evaluation time and
    the evaluator checks that they actually do.
    """

    terms: tuple[ExpAtom, ...] = ()
    cosines: tuple[CosAtom, ...] = ()

    @staticmethod
    def from_atoms(atoms=(), cosines=()) -> "TimeFunction":
        merged: dict[tuple[int, complex], complex] = {}
        for a in atoms:
            key = (a.power, complex(a.rate))
            merged[key] = merged.get(key, 0j) + complex(a.coef)
        exp_atoms = tuple(
            ExpAtom(c, p, r)
            for (p, r), c in sorted(
                merged.items(), key=lambda kv: (kv[0][1].real, kv[0][1].imag, kv[0][0])
            )
            if c != 0
        )
        cos_merged: dict[float, complex] = {}
        for c in cosines:
            cos_merged[float(c.omega)] = cos_merged.get(float(c.omega), 0j) + complex(
                c.amplitude
            )
        cos_atoms = tuple(
            CosAtom(a, w) for w, a in sorted(cos_merged.items()) if a != 0
        )
        return TimeFunction(exp_atoms, cos_atoms)

    def is_zero(self) -> bool:
        return not self.terms and not self.cosines

    def __add__(self, other: "TimeFunction") -> "TimeFunction":
        return TimeFunction.from_atoms(
            self.terms + other.terms, self.cosines + other.cosines
        )

    def scale(self, k) -> "TimeFunction":
        k = complex(k)
        return TimeFunction.from_atoms(
            (ExpAtom(a.coef * k, a.power, a.rate) for a in self.terms),
            (CosAtom(c.amplitude * k, c.omega) for c in self.cosines),
        )

    def integral(self) -> "TimeFunction":
        """Running integral from 0, still an exponential-polynomial sum."""
        if self.cosines:
            raise UnsupportedFormError("integral of cosine atoms is not supported")
        out: list[ExpAtom] = []
        for a in self.terms:
            out.extend(_integrate_atom(a.coef, a.power, a.rate))
        return TimeFunction.from_atoms(out)

    def evaluate(self, t_grid) -> np.ndarray:
        return evaluate(self, t_grid)

    def at(self, t: float) -> float:
        return float(self.evaluate(np.asarray([t], dtype=float))[0])

    def steady_value(self) -> complex:
        """Sum of constant atoms (power 0, rate 0)."""
        return sum(
            (a.coef for a in self.terms if a.power == 0 and a.rate == 0), 0j
        )


def _integrate_atom(coef: complex, power: int, rate: complex) -> list[ExpAtom]:
    if rate == 0:
        return [ExpAtom(coef / (power + 1), power + 1, 0j)]
    if power == 0:
        return [ExpAtom(coef / rate, 0, rate), ExpAtom(-coef / rate, 0, 0j)]
    head = ExpAtom(coef / rate, power, rate)
    tail = _integrate_atom(-coef * power / rate, power - 1, rate)
    return [head] + tail


def evaluate(tf: TimeFunction, t_grid) -> np.ndarray:
    """Pointwise values on a grid; raises if conjugate parts fail to cancel."""
    t = np.asarray(t_grid, dtype=float)
    acc = np.zeros(t.shape, dtype=complex)
    for a in tf.terms:
        acc += a.coef * t**a.power * np.exp(a.rate * t)
    for c in tf.cosines:
        acc += c.amplitude * np.cos(c.omega * t)
    scale = max(1.0, float(np.max(np.abs(acc.real))) if acc.size else 1.0)
    residual = float(np.max(np.abs(acc.imag))) if acc.size else 0.0
    if residual > IMAG_RESIDUAL_TOL * scale:
        raise GenseriesError(
            f"imaginary residual {residual:.3e} exceeds tolerance; "
            "conjugate atoms do not pair up"
        )
    return acc.real


def f_pole(a, alpha: int) -> TimeFunction:
    """Time image of 1/(1 - a*x0)^alpha.

    f_a^alpha(t) = [sum_{j<alpha} C(alpha-1, j) a^j t^j / j!] * exp(a*t);
    in particular f_a^1 = exp(a*t) and f_a^alpha(0) = 1.
    """
    if alpha < 1:
        raise ValueError("pole order must be a positive integer")
    rate = complex(a)
    atoms = [
        ExpAtom(math.comb(alpha - 1, j) * rate**j / math.factorial(j), j, rate)
        for j in range(alpha)
    ]
    return TimeFunction.from_atoms(atoms)


def format_time_function(tf: TimeFunction, digits: int = 4) -> str:
    """Human-readable rendering, using time constants for decaying parts."""
    if tf.is_zero():
        return "0"
    fmt = f"%.{digits}g"

    def num(x: complex) -> str:
        if abs(x.imag) <= 1e-12 * max(1.0, abs(x.real)):
            return fmt % x.real
        return "(" + (fmt % x.real) + ("%+." + str(digits) + "g") % x.imag + "j)"

    pieces: list[str] = []
    for a in tf.terms:
        body = num(a.coef)
        if a.power:
            body += f"*t^{a.power}" if a.power > 1 else "*t"
        if a.rate != 0:
            if a.rate.imag == 0 and a.rate.real < 0:
                body += "*exp(-t/" + (fmt % (-1.0 / a.rate.real)) + ")"
            else:
                body += "*exp(" + num(a.rate) + "*t)"
        pieces.append(body)
    for c in tf.cosines:
        pieces.append(num(c.amplitude) + "*cos(" + (fmt % c.omega) + "*t)")
    out = pieces[0]
    for p in pieces[1:]:
        out += " - " + p[1:] if p.startswith("-") else " + " + p
    return out


# ---------------------------------------------------------------------------
# scalar field helpers


def _is_exact_value(v) -> bool:
    return isinstance(v, (int, Rational, Surd))


def _field(v, exact: bool):
    if exact:
        return as_exact(v) if not isinstance(v, Surd) else v
    return np.clongdouble(complex(v))


def _is_zero(v, exact: bool) -> bool:
    if exact:
        return v == 0
    return abs(v) == 0.0


def _poly_mul(a: list, b: list) -> list:
    out = [a[0] * 0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] = out[i + j] + ai * bj
    return out


def _poly_divmod(num: list, den: list, exact: bool) -> tuple[list, list]:
    """Quotient and remainder for ascending-power coefficient lists."""
    num = list(num)
    dn = len(den) - 1
    lead = den[-1]
    q = [num[0] * 0] * max(1, len(num) - dn)
    for k in range(len(num) - 1, dn - 1, -1):
        c = num[k] / lead
        q[k - dn] = c
        for j in range(dn + 1):
            num[k - dn + j] = num[k - dn + j] - c * den[j]
    rem = num[:dn] if dn else []
    while len(q) > 1 and _is_zero(q[-1], exact):
        q.pop()
    while rem and _is_zero(rem[-1], exact):
        rem.pop()
    return q, rem


# ---------------------------------------------------------------------------
# partial fractions


@dataclass(frozen=True)
class PartialFractions:
    """Decomposition scalar * x0^m / prod (1 - c_k x0)^{a_k}.

    polynomial holds ascending coefficients of the polynomial part;
    residues holds (pole value, order j, residue) triples meaning
    residue / (1 - pole*x0)^j.  exact marks surd-mode scalars.
    """

    x0_power: int
    poles: tuple[tuple[object, int], ...]
    scalar: object
    polynomial: tuple
    residues: tuple[tuple[object, int, object], ...]
    exact: bool

    def original_value(self, x0: complex) -> complex:
        v = complex(self.scalar) * x0**self.x0_power
        for c, mult in self.poles:
            v /= (1 - complex(c) * x0) ** mult
        return v

    def recombined_value(self, x0: complex) -> complex:
        v = sum(complex(c) * x0**j for j, c in enumerate(self.polynomial))
        for c, order, r in self.residues:
            v += complex(r) / (1 - complex(c) * x0) ** order
        return v

    def recombination_error(self, probes=None) -> float:
        """Max relative mismatch between original and recombined values."""
        if probes is None:
            radius = min(
                (1.0 / abs(complex(c)) for c, _ in self.poles if complex(c) != 0),
                default=1.0,
            )
            probes = [0.31j * radius, 0.17 * radius, (0.11 + 0.23j) * radius,
                      -0.29 * radius, 0.05 * radius]
        worst = 0.0
        for x0 in probes:
            a = self.original_value(x0)
            b = self.recombined_value(x0)
            worst = max(worst, abs(a - b) / max(1.0, abs(a)))
        return worst

    def recombination_exact(self) -> bool:
        """Polynomial identity check; only available in exact mode."""
        if not self.exact:
            raise UnsupportedFormError("symbolic recombination needs exact scalars")
        den = [Fraction(1)]
        for c, mult in self.poles:
            for _ in range(mult):
                den = _poly_mul(den, [as_exact(1), -_field(c, True)])
        lhs = [as_exact(0)] * self.x0_power + [_field(self.scalar, True)]
        rhs = _poly_mul(list(self.polynomial) or [as_exact(0)], den)
        for c, order, r in self.residues:
            partial = [_field(r, True)]
            for c2, mult in self.poles:
                drop = order if c2 == c else 0
                for _ in range(mult - drop):
                    partial = _poly_mul(partial, [as_exact(1), -_field(c2, True)])
            rhs = [
                (rhs[i] if i < len(rhs) else as_exact(0))
                + (partial[i] if i < len(partial) else as_exact(0))
                for i in range(max(len(rhs), len(partial)))
            ]
        width = max(len(lhs), len(rhs))
        lhs += [as_exact(0)] * (width - len(lhs))
        rhs += [as_exact(0)] * (width - len(rhs))
        return all(a == b for a, b in zip(lhs, rhs))

    def to_time_function(self) -> TimeFunction:
        atoms: list[ExpAtom] = []
        for j, c in enumerate(self.polynomial):
            atoms.append(ExpAtom(complex(c) / math.factorial(j), j, 0j))
        out = TimeFunction.from_atoms(atoms)
        for c, order, r in self.residues:
            out = out + f_pole(c, order).scale(r)
        return out


def _pole_values_are_exact(pole_values) -> bool:
    return all(_is_exact_value(v) for v in pole_values)


def _group_poles(raw: list, exact: bool) -> list[tuple[object, int]]:
    """Merge equal pole values, detecting ambiguous near-collisions."""
    groups: list[list] = []
    for value, mult in raw:
        placed = False
        for g in groups:
            if exact:
                same = g[0] == value
            else:
                same = complex(g[0]) == complex(value)
                if not same and abs(complex(g[0]) - complex(value)) <= (
                    POLE_MERGE_TOL * max(1.0, abs(complex(g[0])))
                ):
                    raise DegenerateSpectrumError(
                        "two pole combinations agree within tolerance but are "
                        "not identical; rerun with exact pole values"
                    )
            if same:
                g[1] += mult
                placed = True
                break
        if not placed:
            groups.append([value, mult])
    return [(g[0], g[1]) for g in groups]


def term_rational(term: SeriesTerm, pole_values, eps_values=None, sigma2=None):
    """Scalar, x0 power and pole multiset of an all-x0 term.

    eps_values and sigma2 fold the nonlinearity and noise bookkeeping
    into the scalar; they are required when the term carries them.
    """
    if not term.chain.all_x0():
        raise UnsupportedFormError("term still contains x1 letters")
    exact = _pole_values_are_exact(pole_values) and (
        eps_values is None or all(_is_exact_value(v) for v in eps_values)
    ) and (sigma2 is None or _is_exact_value(sigma2))
    scalar = _field(term.coeff, exact)
    if term.pole_pow:
        for v, p in zip(pole_values, term.pole_pow):
            if p:
                scalar = scalar * _field(v, exact) ** p
    if any(term.eps):
        if eps_values is None:
            raise ValueError("term carries nonlinearity powers; pass eps_values")
        for v, p in zip(eps_values, term.eps):
            if p:
                scalar = scalar * _field(v, exact) ** p
    if term.noise:
        if sigma2 is None:
            raise ValueError("term carries noise powers; pass sigma2")
        scalar = scalar * (_field(sigma2, exact) / 2) ** term.noise
    raw = []
    for f in term.chain.fracs:
        value = sum(
            (k * _field(v, exact) for k, v in zip(f.combo, pole_values) if k),
            _field(0, exact),
        )
        if _is_zero(value, exact):
            continue
        raw.append((value, f.alpha))
    return scalar, term.chain.n_letters, raw, exact


def _decompose(scalar, m: int, raw_poles: list, exact: bool) -> PartialFractions:
    poles = _group_poles(raw_poles, exact)
    zero = scalar * 0
    one = _field(1, exact)
    total_order = sum(mult for _, mult in poles)
    num = [zero] * m + [scalar]
    if total_order == 0:
        return PartialFractions(m, (), scalar, tuple(num), (), exact)
    den = [one]
    for c, mult in poles:
        for _ in range(mult):
            den = _poly_mul(den, [one, -c])
    if m >= total_order:
        quotient, num = _poly_divmod(num, den, exact)
    else:
        quotient = []
    residues: list[tuple[object, int, object]] = []
    for c, mult in poles:
        series = _residue_series(num, c, mult, poles, exact)
        for j, s in enumerate(series):
            if not _is_zero(s, exact):
                residues.append((c, mult - j, s))
    return PartialFractions(
        m, tuple(poles), scalar, tuple(quotient), tuple(residues), exact
    )


def _residue_series(num: list, c, alpha: int, poles: list, exact: bool) -> list:
    """Taylor coefficients in u = 1 - c*x0 of num(x0) / prod-other-poles.

    Coefficient j gives the residue of order alpha - j at pole c.
    """
    zero = _field(0, exact)
    one = _field(1, exact)
    # numerator at x0 = (1 - u)/c, expanded in ascending u
    series = [zero] * alpha
    for j, n in enumerate(num):
        if _is_zero(n, exact):
            continue
        base = n / c**j
        for i in range(min(j, alpha - 1) + 1):
            series[i] = series[i] + base * math.comb(j, i) * (-1) ** i
    # other pole factors: (1 - c2*x0)^{-mult} at x0 = (1-u)/c
    for c2, mult in poles:
        if (c2 == c) if exact else (complex(c2) == complex(c)):
            continue
        gap = c - c2
        prefactor = (c / gap) ** mult
        beta = c2 / gap
        factor = [zero] * alpha
        for j in range(alpha):
            factor[j] = prefactor * math.comb(mult + j - 1, j) * (-beta) ** j
        out = [zero] * alpha
        for i in range(alpha):
            for j in range(alpha - i):
                out[i + j] = out[i + j] + series[i] * factor[j]
        series = out
    return series


def partial_fractions(
    term: SeriesTerm, pole_values, eps_values=None, sigma2=None
) -> PartialFractions:
    """Partial-fraction decomposition of an all-x0 series term.

    Pole values may be exact (Fraction or Surd, kept symbolic) or
    numeric (extended-precision residue arithmetic).  Repeated pole
    values merge into higher-order poles; numerically ambiguous
    near-collisions raise DegenerateSpectrumError.
    """
    scalar, m, raw, exact = term_rational(term, pole_values, eps_values, sigma2)
    return _decompose(scalar, m, raw, exact)


# ---------------------------------------------------------------------------
# transform-table layer


@dataclass(frozen=True)
class RationalShape:
    """Commutative rational expression x0^m * prod (1-c x0)^-a, or the
    oscillatory row 1/(1 + omega^2 x0^2)."""

    x0_power: int = 0
    poles: tuple[tuple[complex, int], ...] = ()
    cos_omega: float | None = None

    def __post_init__(self):
        if self.cos_omega is not None and (self.x0_power or self.poles):
            raise UnsupportedFormError(
                "oscillatory denominators cannot mix with pole factors"
            )


def inverse_shape(shape: RationalShape) -> TimeFunction:
    """Inverse transform of a rational shape."""
    if shape.cos_omega is not None:
        return TimeFunction.from_atoms((), [CosAtom(1.0, shape.cos_omega)])
    exact = _pole_values_are_exact([c for c, _ in shape.poles])
    return _decompose(
        _field(1, exact), shape.x0_power, list(shape.poles), exact
    ).to_time_function()


def identify(tf: TimeFunction, tol: float = 1e-9) -> RationalShape:
    """Recognize a single transform-table row from its time function.

    Supported rows: the unit step 1, monomials t^n/n!, the exponential
    families f_a^alpha, and cos(omega t).  Anything else raises
    UnsupportedFormError.
    """
    if tf.cosines:
        if tf.terms or len(tf.cosines) != 1:
            raise UnsupportedFormError("mixed cosine content is not a table row")
        c = tf.cosines[0]
        if abs(c.amplitude - 1) > tol:
            raise UnsupportedFormError("cosine row must have unit amplitude")
        return RationalShape(cos_omega=c.omega)
    if not tf.terms:
        raise UnsupportedFormError("zero is not a table row")
    rates = {a.rate for a in tf.terms}
    if rates == {0j}:
        if len(tf.terms) != 1:
            raise UnsupportedFormError("polynomial rows are single monomials")
        a = tf.terms[0]
        if abs(a.coef - 1 / math.factorial(a.power)) > tol:
            raise UnsupportedFormError("monomial row must be t^n/n!")
        return RationalShape(x0_power=a.power)
    if len(rates) != 1:
        raise UnsupportedFormError("several rates; not a single table row")
    rate = rates.pop()
    alpha = max(a.power for a in tf.terms) + 1
    expected = {
        j: math.comb(alpha - 1, j) * rate**j / math.factorial(j)
        for j in range(alpha)
    }
    got = {a.power: a.coef for a in tf.terms}
    for j in range(alpha):
        if abs(got.get(j, 0j) - expected[j]) > tol * max(1.0, abs(expected[j])):
            raise UnsupportedFormError("coefficients do not match an f_a^alpha row")
    return RationalShape(poles=((rate, alpha),))


# ---------------------------------------------------------------------------
# main entry points


def inverse_laplace_borel(
    obj, pole_values=None, eps_values=None, sigma2=None
) -> TimeFunction:
    """Inverse Laplace-Borel transform to a closed-form time function.

    Accepts a RationalShape, a PartialFractions decomposition, a single
    all-x0 SeriesTerm, or a list of such terms (summed).  SeriesTerm
    input needs pole_values; eps_values and sigma2 are required exactly
    when terms carry those powers.
    """
    if isinstance(obj, RationalShape):
        return inverse_shape(obj)
    if isinstance(obj, PartialFractions):
        return obj.to_time_function()
    if isinstance(obj, SeriesTerm):
        obj = [obj]
    out = TimeFunction()
    for term in obj:
        if pole_values is None:
            raise ValueError("series-term input needs pole_values")
        out = out + partial_fractions(
            term, pole_values, eps_values, sigma2
        ).to_time_function()
    return out


def substitute_step(term: SeriesTerm, amplitude) -> SeriesTerm:
    """Specialize a term to a step input of the given height.

    A constant input of height A turns every x1 letter into an x0
    integration carrying a factor A, leaving an all-x0 term ready for
    the inverse transform.
    """
    chain = term.chain
    k = chain.x1_count()
    new_chain = Chain(chain.fracs, tuple(X0_LETTER for _ in chain.letters))
    coeff = term.coeff * Fraction(amplitude) ** k
    return SeriesTerm(coeff, term.eps, term.noise, new_chain, term.pole_pow)


@dataclass(frozen=True)
class VolterraKernel1:
    """First-order Volterra kernel h1 as an exponential sum."""

    time_function: TimeFunction

    def evaluate(self, tau_grid) -> np.ndarray:
        return self.time_function.evaluate(tau_grid)

    def at_zero(self) -> float:
        return self.time_function.at(0.0)


def extract_kernel_order1(
    terms, pole_values, eps_values=None, sigma2=None
) -> VolterraKernel1:
    """First-order Volterra kernel of a series.

    Only terms with exactly one x1 letter contribute; terms with none
    are ignored and a series without any yields the zero kernel.  Terms
    with two or more x1 letters belong to higher-order kernels and are
    ignored as well.  The single x1 must be the final letter with a
    trivial trailing fraction, which holds for every series this engine
    produces.
    """
    tf = TimeFunction()
    for term in terms:
        if term.x1_count() != 1:
            continue
        if term.letters[-1] != X1 or not term.fracs[-1].trivial:
            raise UnsupportedFormError(
                "kernel extraction expects the x1 letter in final position"
            )
        reduced = SeriesTerm(
            term.coeff, term.eps, term.noise, term.chain.drop_last(), term.pole_pow
        )
        tf = tf + inverse_laplace_borel(reduced, pole_values, eps_values, sigma2)
    return VolterraKernel1(tf)
