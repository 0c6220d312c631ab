"""System compiler: differential equation -> fixed-point form -> series.

A single-DOF oscillator with polynomial stiffness,

    y^(n) + l_{n-1} y^(n-1) + ... + l_0 y + sum_i eps_i y^i = x(t),

integrates n times (zero initial conditions) into the generating-series
fixed point

    (1 + sum_j l_j x0^(n-j)) g + x0^n sum_i eps_i g^(sh i) = x0^(n-1) x1.

Factoring the linear operator as prod (1 - a_k x0)^(alpha_k) with
sum alpha_k = n gives the linear response

    g0 = x0^(n-1) x1 / prod (1 - a_k x0)^(alpha_k)

written as a single alternating chain (the n pole factors interleaved with
the n-1 plain integrations, then the input letter), and the recursion

    g_{i+1} = -x0^n/prod(...) * sum_i eps_i *
              sum_{v1+...+vi = i} g_{v1} sh ... sh g_{vi}

over ordered compositions.  Pole arithmetic is exact (quadratic surds) for
n <= 2 and falls back to numpy roots above that.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import zip_longest

from .errors import FactorizationError, TermBudgetError, UnsupportedFormError
from .exact import Surd, as_exact, solve_monic_quadratic, sqrt_fraction
from .terms import (
    Chain,
    PoleFrac,
    SeriesTerm,
    merge_terms,
    shuffle_term_lists,
    shuffle_terms,
    simple_chain,
    term_from_chain,
    unit_combo,
    zero_combo,
)
from .words import X0, X1

DEFAULT_TERM_BUDGET = 1_000_000

# tolerance for clustering numeric roots into multiplicities (n >= 3 path)
NUMERIC_ROOT_TOL = 1e-9

PoleValue = Surd | complex


@dataclass(frozen=True)
class SystemSpec:
    """Compiled oscillator: linear operator factorization plus nonlinear map.

    linear_coeffs holds l_0 .. l_{n-1} (l_n = 1 by scaling).  nonlinear is
    a sorted tuple of (power, coefficient) pairs for powers >= 2; the k-th
    pair owns eps exponent slot k of every SeriesTerm.  poles/mults list
    the distinct factorization roots with multiplicities summing to n.
    """

    n: int
    linear_coeffs: tuple[Fraction, ...]
    nonlinear: tuple[tuple[int, Fraction], ...]
    poles: tuple[PoleValue, ...]
    mults: tuple[int, ...]

    @property
    def pole_dim(self) -> int:
        return len(self.poles)

    @property
    def eps_dim(self) -> int:
        return len(self.nonlinear)

    @property
    def exact(self) -> bool:
        return all(isinstance(p, Surd) for p in self.poles)

    def eps_values(self) -> tuple[Fraction, ...]:
        return tuple(c for _, c in self.nonlinear)

    def eps_slot(self, power: int) -> int:
        for k, (p, _) in enumerate(self.nonlinear):
            if p == power:
                return k
        raise KeyError(f"no nonlinear coefficient for power {power}")

    def pole_complex(self) -> tuple[complex, ...]:
        return tuple(complex(p) for p in self.poles)

    def describe(self) -> str:
        nl = ", ".join(f"y^{p}: {c}" for p, c in self.nonlinear) or "none"
        ps = ", ".join(
            f"{p!r}^{m}" if m > 1 else f"{p!r}" for p, m in zip(self.poles, self.mults)
        )
        return f"order {self.n}, linear {self.linear_coeffs}, nonlinear {{{nl}}}, poles {ps}"


def _factor_linear_operator(
    n: int, linear: tuple[Fraction, ...]
) -> tuple[tuple[PoleValue, ...], tuple[int, ...]]:
    """Factor 1 + sum_j l_j z^(n-j) = prod (1 - a_k z)^(alpha_k), sum alpha = n.

    Zero poles absorb any degree deficit (l_0 = ... = 0 means pure
    integrators, factors of 1).
    """
    # polynomial coefficients in z, ascending: coeff of z^(n-j) is l_j
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[0] = Fraction(1)
    for j, l in enumerate(linear):
        coeffs[n - j] = Fraction(l)
    degree = max(k for k, c in enumerate(coeffs) if c != 0)
    n_zero_poles = n - degree

    poles: list[PoleValue] = []
    mults: list[int] = []
    if degree == 0:
        pass
    elif degree == 1:
        # 1 + c1 z = 1 - a z
        poles.append(Surd(-coeffs[1]))
        mults.append(1)
    elif degree == 2:
        # 1 + c1 z + c2 z^2 = (1 - a1 z)(1 - a2 z): a's are roots of
        # w^2 + c1 w + c2 (since a1 + a2 = -c1, a1 a2 = c2)
        r1, r2 = solve_monic_quadratic(coeffs[1], coeffs[2])
        if r1 == r2:
            poles.append(r1)
            mults.append(2)
        else:
            poles.extend([r1, r2])
            mults.extend([1, 1])
    else:
        import numpy as np

        # roots of sum c_k z^k; poles are reciprocals of the roots
        arr = np.array([float(c) for c in coeffs[: degree + 1]], dtype=float)
        roots = np.roots(arr[::-1])
        raw = [1.0 / r for r in roots]
        for r in raw:
            for i, p in enumerate(poles):
                if abs(r - p) < NUMERIC_ROOT_TOL * max(1.0, abs(p)):
                    mults[i] += 1
                    # average for stability
                    poles[i] = p + (r - p) / mults[i]
                    break
            else:
                poles.append(complex(r))
                mults.append(1)
    if n_zero_poles:
        poles.append(Surd(Fraction(0)))
        mults.append(n_zero_poles)
    return tuple(poles), tuple(mults)


def build_system(
    n: int,
    linear_coeffs,
    nonlinear: dict[int, Fraction] | None = None,
) -> SystemSpec:
    """Compile coefficients into a SystemSpec with factored poles."""
    if n < 1:
        raise ValueError("operator order n must be >= 1")
    linear = tuple(Fraction(l) for l in linear_coeffs)
    if len(linear) != n:
        raise ValueError(f"need exactly n = {n} linear coefficients l_0..l_{n-1}")
    nl: list[tuple[int, Fraction]] = []
    for power, coeff in sorted((nonlinear or {}).items()):
        if power < 2:
            raise ValueError("nonlinear powers start at 2")
        coeff = Fraction(coeff)
        if coeff != 0:
            nl.append((power, coeff))
    poles, mults = _factor_linear_operator(n, linear)
    spec = SystemSpec(n, linear, tuple(nl), poles, mults)
    check_factorization(spec)
    return spec


def check_factorization(spec: SystemSpec, tol: float = 1e-9) -> None:
    """Verify prod (1 - a_k x)^(alpha_k) == 1 + sum l_j x^(n-j); raise if not."""
    if sum(spec.mults) != spec.n:
        raise FactorizationError(
            f"pole multiplicities sum to {sum(spec.mults)}, expected n = {spec.n}"
        )
    expected = [Fraction(0)] * (spec.n + 1)
    expected[0] = Fraction(1)
    for j, l in enumerate(spec.linear_coeffs):
        expected[spec.n - j] = l
    if spec.exact:
        prod: list = [as_exact(1)]
        for p, m in zip(spec.poles, spec.mults):
            for _ in range(m):
                nxt = [as_exact(0)] * (len(prod) + 1)
                for k, c in enumerate(prod):
                    nxt[k] = nxt[k] + c
                    nxt[k + 1] = nxt[k + 1] - c * p
                prod = nxt
        for got, want in zip_longest(prod, expected, fillvalue=as_exact(0)):
            if got != as_exact(Fraction(want) if not isinstance(want, Surd) else want):
                raise FactorizationError(
                    f"factorization mismatch: expanded {prod}, expected {expected}"
                )
    else:
        prod_c: list[complex] = [1.0 + 0.0j]
        for p, m in zip(spec.poles, spec.mults):
            pc = complex(p)
            for _ in range(m):
                nxt_c = [0.0 + 0.0j] * (len(prod_c) + 1)
                for k, c in enumerate(prod_c):
                    nxt_c[k] += c
                    nxt_c[k + 1] -= c * pc
                prod_c = nxt_c
        for got, want in zip_longest(prod_c, [complex(w) for w in expected],
                                     fillvalue=0.0 + 0.0j):
            if abs(got - want) > tol * max(1.0, abs(want)):
                raise FactorizationError(
                    f"factorization mismatch beyond tolerance: {prod_c} vs {expected}"
                )


# ---------------------------------------------------------------------------
# physical parameters

@dataclass(frozen=True)
class PhysicalDuffingParams:
    """Mass-normalized oscillator m y'' + c y' + k1 y + k2 y^2 + k3 y^3 = F."""

    m: Fraction
    c: Fraction
    k1: Fraction
    k2: Fraction = Fraction(0)
    k3: Fraction = Fraction(0)

    def __post_init__(self):
        for name in ("m", "c", "k1", "k2", "k3"):
            v = getattr(self, name)
            if not isinstance(v, Fraction):
                object.__setattr__(self, name, Fraction(v))
        if self.m <= 0 or self.k1 <= 0:
            raise ValueError("mass and primary stiffness must be positive")


@dataclass(frozen=True)
class DuffingScaling:
    """Scale factors linking physical and canonical coordinates.

    tau = time_scale * t maps physical time to canonical time;
    y_phys = amplitude_scale * y_canon; x_canon = input_scale * F_phys.
    """

    time_scale: float
    amplitude_scale: Fraction
    input_scale: Fraction
    a: Fraction
    eps1: Fraction
    eps2: Fraction
    note: str = ""


def canonicalize_duffing(p: PhysicalDuffingParams) -> tuple[SystemSpec, DuffingScaling]:
    """Reduce the physical oscillator to canonical form y'' + a y' + y + e1 y^2 + e2 y^3 = x.

    Time is scaled by the natural frequency w0 = sqrt(k1/m); the amplitude
    scale Y is chosen as k1/k2 when a quadratic term exists (making eps1 =
    1), else sqrt(k1/k3), else 1.  Then a = c/sqrt(m k1), eps1 = k2 Y/k1,
    eps2 = k3 Y^2/k1, and the canonical input is F/(k1 Y).  The damping
    ratio must come out rational for an exact compilation; irrational a is
    rejected (supply canonical coefficients directly in that case).
    """
    w0_sq = p.k1 / p.m
    a_surd = Surd(p.c) / sqrt_fraction(p.m * p.k1)
    if not a_surd.is_rational:
        raise UnsupportedFormError(
            f"canonical damping a = c/sqrt(m*k1) = {a_surd!r} is irrational; "
            "build the canonical system directly from rational coefficients"
        )
    a = a_surd.p
    if p.k2 != 0:
        Y = p.k1 / p.k2
    elif p.k3 != 0:
        y_surd = sqrt_fraction(p.k1 / p.k3)
        if not y_surd.is_rational:
            raise UnsupportedFormError(
                "amplitude scale sqrt(k1/k3) is irrational; "
                "build the canonical system directly"
            )
        Y = y_surd.p
    else:
        Y = Fraction(1)
    eps1 = p.k2 * Y / p.k1
    eps2 = p.k3 * Y * Y / p.k1
    note = (
        f"canonical eps2 = k3*Y^2/k1 = {eps2}; "
        "supply nonlinear coefficients directly to override"
    )
    import math

    scaling = DuffingScaling(
        time_scale=math.sqrt(float(w0_sq)),
        amplitude_scale=Y,
        input_scale=Fraction(1) / (p.k1 * Y),
        a=a,
        eps1=eps1,
        eps2=eps2,
        note=note,
    )
    nonlinear = {}
    if eps1:
        nonlinear[2] = eps1
    if eps2:
        nonlinear[3] = eps2
    spec = build_system(2, [Fraction(1), a], nonlinear)
    return spec, scaling


def duffing_system(a, eps1, eps2) -> SystemSpec:
    """Canonical quadratic+cubic oscillator y'' + a y' + y + e1 y^2 + e2 y^3 = x."""
    nl: dict[int, Fraction] = {}
    if eps1:
        nl[2] = Fraction(eps1)
    if eps2:
        nl[3] = Fraction(eps2)
    return build_system(2, [Fraction(1), Fraction(a)], nl)


# ---------------------------------------------------------------------------
# fixed-point form

@dataclass(frozen=True)
class IntegralForm:
    """Generating-series fixed point: g = g0 - prefactor * (nonlinear terms).

    g0_terms is the linear response; prefactor_chain is the POSITIVE chain
    x0^n/prod(1-a_k x0) whose sign is applied inside iterate.
    """

    spec: SystemSpec
    g0_terms: tuple[SeriesTerm, ...]
    prefactor_chain: Chain

    def describe(self) -> str:
        eqn = " + ".join(
            f"eps_{p} x0^{self.spec.n} g^sh{p}" for p, _ in self.spec.nonlinear
        )
        lhs = f"L(x0) g" + (f" + {eqn}" if eqn else "")
        return f"{lhs} = x0^{self.spec.n - 1} x1, L factored over {len(self.spec.poles)} poles"


def _pole_slot_combos(spec: SystemSpec) -> list[tuple[int, ...]]:
    slots: list[tuple[int, ...]] = []
    for k, m in enumerate(spec.mults):
        slots.extend([unit_combo(k, spec.pole_dim)] * m)
    return slots


def to_integral_form(spec: SystemSpec) -> IntegralForm:
    """Integral fixed-point form of the oscillator under zero initial conditions.

    g0 comes out as one alternating chain: the n pole factors (repeated by
    multiplicity) separated by the n-1 plain integrations, with the input
    letter last.  Adjacent letter-free fractions multiply, so this is
    exactly x0^(n-1) x1/prod(1 - a_k x0)^(alpha_k) with no exponents above
    one anywhere.
    """
    check_factorization(spec)
    dim = spec.pole_dim
    slots = _pole_slot_combos(spec)  # length n
    z = zero_combo(dim)
    eps0 = (0,) * spec.eps_dim

    g0_chain = simple_chain(slots + [z], [X0] * (spec.n - 1) + [X1])
    g0 = term_from_chain(g0_chain, eps=eps0)

    pref_chain = simple_chain(slots + [z], [X0] * spec.n)
    return IntegralForm(spec, (g0,), pref_chain)


# ---------------------------------------------------------------------------
# iteration

@dataclass
class ExpansionResult:
    """Series orders plus the term-count bookkeeping of the run."""

    spec: SystemSpec
    orders: list[list[SeriesTerm]]
    raw_counts: list[int]
    merged_counts: list[int]

    @property
    def max_order(self) -> int:
        return len(self.orders) - 1

    def all_terms(self) -> list[SeriesTerm]:
        return [t for terms in self.orders for t in terms]

    def order(self, i: int) -> list[SeriesTerm]:
        return self.orders[i]


@dataclass(frozen=True)
class Order2Listing:
    """Order-2 expansion under the historical sub-product listing convention.

    The published order-2 tables enumerate the quadratic-bracket products
    separately for each order-1 source term (one composition ordering, so
    the same chain may appear several times with partial multipliers) while
    the cubic-bracket product is merged across source terms (again one
    ordering).  Entry coefficients are per-listing; doubling the quadratic
    entries and tripling the cubic ones (for the composition orderings)
    and merging recovers the fully merged order-2 series.
    """

    quadratic_entries: tuple[SeriesTerm, ...]
    cubic_entries: tuple[SeriesTerm, ...]

    @property
    def total(self) -> int:
        return len(self.quadratic_entries) + len(self.cubic_entries)

    def entries(self) -> list[SeriesTerm]:
        return list(self.quadratic_entries) + list(self.cubic_entries)

    def reconstruct_merged(self) -> list[SeriesTerm]:
        doubled = [t.scale(2) for t in self.quadratic_entries]
        tripled = [t.scale(3) for t in self.cubic_entries]
        return merge_terms(doubled + tripled)


def order2_listing(spec: SystemSpec) -> Order2Listing:
    """Enumerate the order-2 expansion in the sub-product listing convention.

    Requires a system with quadratic and cubic nonlinearities (powers 2 and
    3); see Order2Listing for the convention.
    """
    powers = [p for p, _ in spec.nonlinear]
    if powers != [2, 3]:
        raise UnsupportedFormError(
            "sub-product listing is defined for quadratic+cubic systems"
        )
    form = to_integral_form(spec)
    res = iterate(spec, 1)
    g0 = res.order(0)[0]
    g1 = res.order(1)

    def finish(t: SeriesTerm, slot: int) -> SeriesTerm:
        eps = tuple(e + (1 if k == slot else 0) for k, e in enumerate(t.eps))
        return SeriesTerm(-t.coeff, eps, t.noise,
                          form.prefactor_chain.concat(t.chain), t.pole_pow)

    quad: list[SeriesTerm] = []
    for t in g1:
        quad.extend(finish(u, 0) for u in merge_terms(shuffle_terms(t, g0)))
    cubic_raw: list[SeriesTerm] = []
    for t in g1:
        step = merge_terms(shuffle_terms(t, g0))
        for b in step:
            cubic_raw.extend(shuffle_terms(b, g0))
    cubic = [finish(u, 1) for u in merge_terms(cubic_raw)]
    return Order2Listing(tuple(quad), tuple(cubic))


def _ordered_compositions(total: int, parts: int):
    """All ordered tuples of `parts` nonnegative integers summing to `total`."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _ordered_compositions(total - first, parts - 1):
            yield (first,) + rest


def iterate(
    spec: SystemSpec,
    max_order: int,
    budget: int | None = DEFAULT_TERM_BUDGET,
) -> ExpansionResult:
    """Run the series recursion up to eps-grade max_order.

    g_{i+1} collects, for every nonlinear power j and every ordered
    composition v1+...+vj = i, the product g_{v1} sh ... sh g_{vj}, scaled
    by the eps symbol of power j, then left-multiplied by the negated
    prefactor.  Raw counts tally the per-composition product terms before
    cross-composition merging; the budget applies to raw counts.
    """
    if max_order < 0:
        raise ValueError("max_order must be >= 0")
    form = to_integral_form(spec)
    g0 = merge_terms(list(form.g0_terms))
    orders: list[list[SeriesTerm]] = [g0]
    raw_counts = [len(form.g0_terms)]
    merged_counts = [len(g0)]

    for i in range(max_order):
        contributions: list[SeriesTerm] = []
        raw = 0
        for slot, (power, coeff) in enumerate(spec.nonlinear):
            if coeff == 0:
                continue
            for comp in _ordered_compositions(i, power):
                prod = orders[comp[0]]
                for v in comp[1:]:
                    prod = shuffle_term_lists(prod, orders[v], budget=budget,
                                              order=i + 1)
                raw += len(prod)
                if budget is not None and raw > budget:
                    raise TermBudgetError(i + 1, raw, budget)
                # eps symbol of this nonlinearity multiplies the product
                for t in prod:
                    eps = tuple(
                        e + (1 if k == slot else 0) for k, e in enumerate(t.eps)
                    )
                    chain = form.prefactor_chain.concat(t.chain)
                    contributions.append(
                        SeriesTerm(-t.coeff, eps, t.noise, chain, t.pole_pow)
                    )
        nxt = merge_terms(contributions)
        orders.append(nxt)
        raw_counts.append(raw)
        merged_counts.append(len(nxt))
    return ExpansionResult(spec, orders, raw_counts, merged_counts)
