"""Gaussian-white-noise expectation and closed-form response moments.

The ensemble average of a reduced series term follows a left-to-right
recursion: a leading x0 letter passes through, a leading adjacent x1
pair is consumed into a factor (sigma^2/2) * x0/(1 - b0*x0) that drops
the fraction between the pair, and every other configuration averages
to zero.  Surviving terms contain only x0 letters and invert to closed
form, giving the mean response <y(t)> and, via shuffle powers of the
series, equal-time moments <y(t)^n>.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .borel import TimeFunction, inverse_laplace_borel
from .errors import UnsupportedFormError
from .systems import DEFAULT_TERM_BUDGET, SystemSpec, iterate
from .terms import Chain, SeriesTerm, merge_terms, shuffle_term_lists
from .words import X0, X1


@dataclass(frozen=True)
class NoiseSpec:
    """Gaussian white noise with autocorrelation sigma^2 * delta(t - tau).

    sigma_squared is the noise power, not a variance.  An exact Fraction
    keeps the whole moment pipeline in symbolic arithmetic.
    """

    sigma_squared: Fraction | float

    def __post_init__(self):
        if self.sigma_squared < 0:
            raise ValueError("noise power must be nonnegative")


def expectation(term: SeriesTerm) -> list[SeriesTerm]:
    """White-noise ensemble average of one reduced term.

    Returns the all-x0 image (at most one term; the recursion is
    deterministic) or an empty list when the term averages to zero.
    Each consumed x1 pair raises the noise power by one, so a survivor's
    noise grading equals half its original x1 count.
    """
    chain = term.chain
    if not chain.is_reduced():
        raise UnsupportedFormError("expectation needs reduced fraction exponents")
    if chain.x1_count() % 2:
        return []
    letters = chain.letters
    fracs = chain.fracs
    out_fracs: list = []
    out_letters: list[int] = []
    pairs = 0
    i = 0
    while i < len(letters):
        if letters[i] == X0:
            out_fracs.append(fracs[i])
            out_letters.append(X0)
            i += 1
        elif i + 1 < len(letters) and letters[i + 1] == X1:
            out_fracs.append(fracs[i])
            out_letters.append(X0)
            pairs += 1
            i += 2
        else:
            return []
    out_fracs.append(fracs[-1])
    survivor = SeriesTerm(
        term.coeff,
        term.eps,
        term.noise + pairs,
        Chain(tuple(out_fracs), tuple(out_letters)),
        term.pole_pow,
    )
    return [survivor]


def expectation_series(terms) -> list[SeriesTerm]:
    """Ensemble average of a term list, merged."""
    images: list[SeriesTerm] = []
    for t in terms:
        images.extend(expectation(t))
    return merge_terms(images)


@dataclass(frozen=True)
class Survivor:
    """Audit record tying a surviving term back to its listing position.

    index is the 1-based position of the source term in the canonical
    merged listing of its grade (this engine's deterministic order, not
    any historical enumeration); total is that listing's length.
    """

    order: int
    index: int
    total: int
    term: SeriesTerm
    image: SeriesTerm


@dataclass(frozen=True)
class MomentDetail:
    """Per-grade closed forms plus the expectation audit trail."""

    noise: NoiseSpec
    per_order: tuple[TimeFunction, ...]
    survivors: tuple[Survivor, ...]

    def total(self) -> TimeFunction:
        out = TimeFunction()
        for tf in self.per_order:
            out = out + tf
        return out

    def order(self, k: int) -> TimeFunction:
        return self.per_order[k]


def _expect_and_invert(
    orders: list[list[SeriesTerm]], spec: SystemSpec, noise: NoiseSpec
) -> MomentDetail:
    per: list[TimeFunction] = []
    survivors: list[Survivor] = []
    eps = spec.eps_values()
    for k, terms in enumerate(orders):
        images: list[SeriesTerm] = []
        for idx, t in enumerate(terms, start=1):
            img = expectation(t)
            if not img:
                continue
            survivors.append(Survivor(k, idx, len(terms), t, img[0]))
            images.extend(img)
        tf = TimeFunction()
        for img in merge_terms(images):
            tf = tf + inverse_laplace_borel(
                img, spec.poles, eps, noise.sigma_squared
            )
        per.append(tf)
    return MomentDetail(noise, tuple(per), tuple(survivors))


def mean_response_detail(
    spec: SystemSpec,
    noise: NoiseSpec,
    max_order: int,
    budget: int = DEFAULT_TERM_BUDGET,
) -> MomentDetail:
    """Mean response with per-grade breakdown and survivor audit."""
    res = iterate(spec, max_order, budget)
    orders = [res.order(k) for k in range(max_order + 1)]
    return _expect_and_invert(orders, spec, noise)


def mean_response(
    spec: SystemSpec,
    noise: NoiseSpec,
    max_order: int,
    budget: int = DEFAULT_TERM_BUDGET,
) -> TimeFunction:
    """Closed-form <y(t)> through the given nonlinearity grade."""
    return mean_response_detail(spec, noise, max_order, budget).total()


def shuffle_power_orders(
    orders: list[list[SeriesTerm]],
    n: int,
    max_order: int,
    budget: int = DEFAULT_TERM_BUDGET,
) -> list[list[SeriesTerm]]:
    """Graded n-th shuffle power of a series, truncated at max_order."""
    if n < 1:
        raise ValueError("moment order must be at least 1")
    power = [list(g) for g in orders]
    for _ in range(n - 1):
        new: list[list[SeriesTerm]] = [[] for _ in range(max_order + 1)]
        for i, left in enumerate(power):
            if not left:
                continue
            for j, right in enumerate(orders):
                if i + j > max_order or not right:
                    continue
                new[i + j].extend(
                    shuffle_term_lists(left, right, budget, order=i + j)
                )
        power = [merge_terms(g) for g in new]
    return power


def equal_time_moment_detail(
    spec: SystemSpec,
    noise: NoiseSpec,
    n: int,
    max_order: int,
    budget: int = DEFAULT_TERM_BUDGET,
) -> MomentDetail:
    """Equal-time moment <y(t)^n> with per-grade breakdown.

    The series truncated at max_order is raised to its n-th shuffle
    power, graded by total nonlinearity order; grades beyond max_order
    are dropped before the ensemble average.
    """
    res = iterate(spec, max_order, budget)
    orders = [res.order(k) for k in range(max_order + 1)]
    power = shuffle_power_orders(orders, n, max_order, budget)
    return _expect_and_invert(power, spec, noise)


def equal_time_moment(
    spec: SystemSpec,
    noise: NoiseSpec,
    n: int,
    max_order: int,
    budget: int = DEFAULT_TERM_BUDGET,
) -> TimeFunction:
    """Closed-form <y(t)^n> through the given nonlinearity grade."""
    return equal_time_moment_detail(spec, noise, n, max_order, budget).total()
