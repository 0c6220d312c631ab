"""Cross-validation suite tying the symbolic engine to its numeric oracles.

Three independent checks, each attacking a different failure mode:

* `fixed_point_residual` verifies, in exact arithmetic at the word level,
  that the truncated series satisfies the defining functional equation of
  the oscillator.  This catches combinatorial mistakes in the shuffle
  iteration (wrong multiplicities, dropped terms, bad pole bookkeeping).

* `oracle_triangle` compares closed-form step responses against the
  Runge-Kutta integrator across a ladder of nonlinearity strengths and
  measures the empirical convergence slope of the truncation error.  This
  catches errors in the inverse Laplace-Borel transform and in scalar
  normalization, which word-level checks cannot see.

* `mc_consistency` compares the white-noise mean response against a
  seeded Euler-Maruyama ensemble in units of the ensemble standard error.
  This catches mistakes in the expectation rewrite rule and in the
  noise-power bookkeeping.

All three return small report dataclasses with a `passed` flag and the
measured numbers, so callers (the command-line `validate` subcommand and
the test suite) can print one-line summaries without recomputing.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .borel import inverse_laplace_borel, substitute_step
from .moments import NoiseSpec, mean_response
from .oracles import SimulationConfig, integrate_ode, monte_carlo_mean
from .systems import ExpansionResult, SystemSpec, iterate
from .words import X0, X1, Word, WordPolynomial, shuffle_polynomials
from .terms import expand_terms_to_words

EpsGrade = tuple[int, ...]


# ---------------------------------------------------------------------------
# check 1: word-level fixed-point residual


@dataclass(frozen=True)
class ResidualReport:
    """Exact residual of the defining equation, bucketed by grade.

    A grade is `exercised` when at least one side of its equation had
    nonzero words before cancellation; grades whose terms are all longer
    than the word cutoff pass vacuously and are reported as such.
    """

    word_length: int
    max_order: int
    residuals: dict[EpsGrade, WordPolynomial]
    exercised: dict[EpsGrade, bool]

    @property
    def passed(self) -> bool:
        return all(not p for p in self.residuals.values())

    def exercised_grades(self) -> list[EpsGrade]:
        return sorted(g for g, live in self.exercised.items() if live)

    def offending(self) -> list[tuple[EpsGrade, Word, object]]:
        """Every (grade, word, coefficient) where the residual is nonzero."""
        out = []
        for grade, poly in sorted(self.residuals.items()):
            for w in sorted(poly.terms):
                out.append((grade, w, poly.terms[w]))
        return out

    def summary(self) -> str:
        live = len(self.exercised_grades())
        if self.passed:
            return (
                f"fixed-point residual: 0 at all {len(self.residuals)} grades "
                f"({live} exercised, orders <= {self.max_order}, "
                f"words <= {self.word_length}) in exact arithmetic"
            )
        bad = self.offending()
        g, w, c = bad[0]
        return (
            f"fixed-point residual: {len(bad)} nonzero word coefficients, "
            f"first at grade {g}, word {w}: {c}"
        )


def _grade_buckets(
    result: ExpansionResult, word_length: int
) -> dict[EpsGrade, WordPolynomial]:
    """Word expansion of every computed order, keyed by eps exponent tuple."""
    buckets: dict[EpsGrade, list] = {}
    for terms in result.orders:
        for t in terms:
            buckets.setdefault(t.eps, []).append(t)
    return {
        grade: expand_terms_to_words(terms, word_length, result.spec.poles)
        for grade, terms in buckets.items()
    }


def fixed_point_residual(
    spec: SystemSpec,
    result: ExpansionResult | None = None,
    max_order: int = 2,
    word_length: int = 6,
) -> ResidualReport:
    """Exact residual of the oscillator's integral fixed-point equation.

    Writing D(x0) = 1 + sum_m l_{n-m} x0^m for the integrated linear
    operator, the truncated series must satisfy, grade by grade in the
    nonlinear coefficients,

        D g_e + x0^n * sum_k sum_{e1+...+e_pk = e - unit_k}
                        g_{e1} sh ... sh g_{e_pk}
            = delta_{e,0} x0^(n-1) x1

    on every word of length <= word_length.  Grades up to total degree
    `max_order` are checked; the input spec must be exact (surd poles) so
    the residual is computed with no rounding at all.
    """
    if not spec.exact:
        raise ValueError("fixed-point residual needs exact pole values")
    if result is None:
        result = iterate(spec, max_order)
    L = word_length
    n = spec.n
    grades = _grade_buckets(result, L)

    def grade_poly(e: EpsGrade) -> WordPolynomial:
        return grades.get(e, WordPolynomial.zero())

    # D(x0) applied by left concatenation: 1*g + sum_m l_{n-m} x0^m g.
    def apply_linear(poly: WordPolynomial) -> WordPolynomial:
        out = poly
        for m in range(1, n + 1):
            l_coeff = Fraction(1) if m == n else spec.linear_coeffs[n - m]
            if not l_coeff:
                continue
            shifted = poly.truncate(L - m).left_concat(Word((X0,) * m))
            out = out + shifted.scale(l_coeff)
        return out

    def shuffle_block(parts: tuple[EpsGrade, ...]) -> WordPolynomial:
        acc = grade_poly(parts[0]).truncate(L - n)
        for e in parts[1:]:
            if not acc:
                return acc
            acc = shuffle_polynomials(acc, grade_poly(e).truncate(L - n))
            acc = acc.truncate(L - n)
        return acc

    def compositions(e: EpsGrade, parts: int):
        """Ordered splits of the exponent tuple into `parts` summands."""
        ranges = [range(x + 1) for x in e]
        slots = len(e)
        if parts == 1:
            yield (e,)
            return
        for head in product(*ranges):
            rest = tuple(x - h for x, h in zip(e, head))
            for tail in compositions(rest, parts - 1):
                yield (head,) + tail

    checked: dict[EpsGrade, WordPolynomial] = {}
    exercised: dict[EpsGrade, bool] = {}
    zero = (0,) * spec.eps_dim
    for grade in sorted(grades):
        if sum(grade) > max_order:
            continue
        linear_part = apply_linear(grade_poly(grade).truncate(L))
        res = linear_part
        live = bool(linear_part) or grade == zero
        for k, (power, _coeff) in enumerate(spec.nonlinear):
            lowered = list(grade)
            lowered[k] -= 1
            if lowered[k] < 0:
                continue
            block = WordPolynomial.zero()
            for parts in compositions(tuple(lowered), power):
                block = block + shuffle_block(parts)
            live = live or bool(block)
            res = res + block.left_concat(Word((X0,) * n))
        if grade == zero:
            res = res - WordPolynomial.monomial(Word((X0,) * (n - 1) + (X1,)))
        checked[grade] = res.truncate(L)
        exercised[grade] = live
    return ResidualReport(L, max_order, checked, exercised)


# ---------------------------------------------------------------------------
# check 2: deterministic oracle triangle


@dataclass(frozen=True)
class TriangleReport:
    """Truncation-error scaling of closed-form step responses vs the ODE."""

    eps_ladder: tuple[float, ...]
    residuals: tuple[float, ...]
    slope: float
    expected_slope: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return abs(self.slope - self.expected_slope) <= self.tolerance

    def summary(self) -> str:
        pairs = ", ".join(
            f"eps={e:g}: {r:.3e}" for e, r in zip(self.eps_ladder, self.residuals)
        )
        verdict = "pass" if self.passed else "FAIL"
        return (
            f"oracle triangle: residuals [{pairs}], slope "
            f"{self.slope:.3f} vs {self.expected_slope:g} "
            f"+/- {self.tolerance:g} ({verdict})"
        )


def oracle_triangle(
    build_spec,
    eps_ladder: tuple[float, ...] = (0.02, 0.01, 0.005),
    order: int = 2,
    amplitude: float = 1.0,
    cfg: SimulationConfig | None = None,
    expected_slope: float | None = None,
    tolerance: float = 0.5,
) -> TriangleReport:
    """Step-response truncation error across a nonlinearity ladder.

    `build_spec(eps)` must return an exact SystemSpec whose nonlinear
    coefficients all scale linearly with eps.  The closed-form response of
    the series truncated at `order` then differs from the true solution by
    O(eps^(order+1)), so the max-norm residual against the Runge-Kutta
    oracle must fall with log-log slope order+1 along the ladder.

    The expansion's term structure is independent of the coefficient
    values (grading is formal), so the series is built and inverted once
    per grade and only rescaled along the ladder; the ODE oracle runs for
    every rung.
    """
    if cfg is None:
        cfg = SimulationConfig(dt=0.005, t_end=10.0)
    if expected_slope is None:
        expected_slope = order + 1.0
    grid = cfg.grid()

    spec0 = build_spec(eps_ladder[0])
    result = iterate(spec0, order)
    buckets: dict[EpsGrade, list] = {}
    for t in result.all_terms():
        buckets.setdefault(t.eps, []).append(substitute_step(t, amplitude))
    ones = tuple(Fraction(1) for _ in range(spec0.eps_dim))
    base = {
        grade: inverse_laplace_borel(terms, spec0.poles, ones, None)
        for grade, terms in buckets.items()
    }

    residuals = []
    for eps in eps_ladder:
        spec = build_spec(eps)
        if spec.poles != spec0.poles:
            raise ValueError("eps ladder must keep the linear part fixed")
        vals = spec.eps_values()
        series_y = np.zeros_like(grid)
        for grade, tf in base.items():
            factor = Fraction(1)
            for v, e in zip(vals, grade):
                factor = factor * Fraction(v) ** e
            series_y = series_y + tf.scale(factor).evaluate(grid)
        ode = integrate_ode(spec, lambda t: amplitude, cfg)
        residuals.append(float(np.abs(series_y - ode.y).max()))
    slope, _ = np.polyfit(
        np.log([float(e) for e in eps_ladder]), np.log(residuals), 1
    )
    return TriangleReport(
        tuple(float(e) for e in eps_ladder),
        tuple(residuals),
        float(slope),
        float(expected_slope),
        float(tolerance),
    )


# ---------------------------------------------------------------------------
# check 3: Monte-Carlo consistency


@dataclass(frozen=True)
class ConsistencyReport:
    """Symbolic mean response vs seeded ensemble, in standard-error units."""

    times: np.ndarray
    symbolic: np.ndarray
    ensemble_mean: np.ndarray
    standard_error: np.ndarray
    z_scores: np.ndarray
    threshold: float
    diverged: int
    ensemble_size: int

    @property
    def max_z(self) -> float:
        return float(self.z_scores.max())

    @property
    def passed(self) -> bool:
        return bool((self.z_scores <= self.threshold).all())

    def summary(self) -> str:
        verdict = "pass" if self.passed else "FAIL"
        return (
            f"Monte-Carlo consistency: max |z| = {self.max_z:.2f} over "
            f"{self.times.size} times (threshold {self.threshold:g}, "
            f"{self.ensemble_size} paths, {self.diverged} diverged) "
            f"({verdict})"
        )


def mc_consistency(
    spec: SystemSpec,
    sigma_squared: float,
    order: int = 2,
    cfg: SimulationConfig | None = None,
    n_times: int = 50,
    threshold: float = 3.0,
) -> ConsistencyReport:
    """Mean response vs Euler-Maruyama ensemble at uniformly spaced times.

    The symbolic mean is evaluated exactly at `n_times` points spanning
    [0, t_end]; the ensemble mean and its standard error are interpolated
    from the simulation grid.  Near t = 0 the ensemble variance is still
    identically zero (noise has not propagated into the position) while
    the symbolic mean evaluates to float roundoff rather than exact zero,
    so the standard error is floored at 1e-12 of the response scale
    before dividing; the floor is far below any achievable ensemble
    resolution and cannot mask a real discrepancy.
    """
    if cfg is None:
        cfg = SimulationConfig(dt=0.0025, t_end=10.0, ensemble_size=100_000)
    closed = mean_response(spec, NoiseSpec(sigma_squared), order)
    ensemble = monte_carlo_mean(spec, sigma_squared, cfg)
    times = np.linspace(0.0, cfg.t_end, n_times)
    symbolic = closed.evaluate(times)
    mc_mean = np.interp(times, ensemble.t, ensemble.mean)
    stderr = np.interp(times, ensemble.t, ensemble.stderr)
    diff = np.abs(mc_mean - symbolic)
    floor = 1e-12 * (1.0 + float(np.abs(symbolic).max()))
    z = diff / np.maximum(stderr, floor)
    return ConsistencyReport(
        times,
        symbolic,
        mc_mean,
        stderr,
        z,
        float(threshold),
        ensemble.diverged,
        cfg.ensemble_size,
    )
