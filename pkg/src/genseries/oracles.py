"""Independent numerical ground truth for the symbolic pipeline.

Three oracles: a classical fixed-step 4th-order integrator for the
deterministic oscillator, an iterated-integral quadrature that evaluates
truncated series responses directly from their chains, and an Euler-
scheme Monte-Carlo ensemble for white-noise statistics.  None of them
reuse the symbolic expansion machinery beyond the closed-form f_a^alpha
factors, so agreement is meaningful evidence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .borel import f_pole
from .errors import BlowUpError, QuadratureDepthError, UnsupportedFormError
from .systems import SystemSpec
from .terms import SeriesTerm
from .words import X0, X1

MAX_QUADRATURE_DEPTH = 3
MC_CHUNK = 4096


@dataclass(frozen=True)
class SimulationConfig:
    """Shared numerical settings; identical configs give identical output."""

    dt: float = 0.005
    t_end: float = 10.0
    ensemble_size: int = 1
    rng_seed: int = 0
    blow_up_bound: float = 1e6

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("step size must be positive")
        if self.t_end < self.dt:
            raise ValueError("horizon must cover at least one step")
        if self.ensemble_size < 1:
            raise ValueError("ensemble needs at least one path")

    def grid(self) -> np.ndarray:
        steps = int(round(self.t_end / self.dt))
        return np.linspace(0.0, steps * self.dt, steps + 1)


@dataclass(frozen=True)
class TimeSeries:
    t: np.ndarray
    y: np.ndarray


def _input_values(signal, grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Input samples on the grid and at half steps (for the RK stages)."""
    if callable(signal):
        full = np.asarray([float(signal(t)) for t in grid])
        half = np.asarray(
            [float(signal(t)) for t in (grid[:-1] + grid[1:]) / 2]
        )
        return full, half
    full = np.asarray(signal, dtype=float)
    if full.shape != grid.shape:
        raise ValueError(
            f"sampled input needs {grid.size} samples, got {full.size}"
        )
    half = (full[:-1] + full[1:]) / 2
    return full, half


def _drift(spec: SystemSpec, state: np.ndarray, x: float) -> np.ndarray:
    """Companion-form derivative of (y, y', ..., y^(n-1))."""
    out = np.empty_like(state)
    out[:-1] = state[1:]
    top = x
    for m, l in enumerate(spec.linear_coeffs):
        top -= float(l) * state[m]
    for power, coeff in spec.nonlinear:
        top -= float(coeff) * state[0] ** power
    out[-1] = top
    return out


def integrate_ode(spec: SystemSpec, signal, cfg: SimulationConfig) -> TimeSeries:
    """Deterministic response by the classical 4th-order fixed-step method.

    Zero initial conditions.  Raises BlowUpError with the failure time
    when the response exceeds the configured bound.
    """
    grid = cfg.grid()
    x_full, x_half = _input_values(signal, grid)
    n = spec.n
    state = np.zeros(n)
    y = np.empty(grid.size)
    y[0] = 0.0
    dt = cfg.dt
    for i in range(grid.size - 1):
        k1 = _drift(spec, state, x_full[i])
        k2 = _drift(spec, state + dt / 2 * k1, x_half[i])
        k3 = _drift(spec, state + dt / 2 * k2, x_half[i])
        k4 = _drift(spec, state + dt * k3, x_full[i + 1])
        state = state + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.isfinite(state[0]) or abs(state[0]) > cfg.blow_up_bound:
            raise BlowUpError(grid[i + 1], cfg.blow_up_bound)
        y[i + 1] = state[0]
    return TimeSeries(grid, y)


def _trapezoid_convolution(f: np.ndarray, a: np.ndarray, dt: float) -> np.ndarray:
    """(f conv a)(t_i) = integral_0^{t_i} f(t_i - s) a(s) ds, trapezoid rule."""
    n = f.size
    full = np.convolve(f, a)[:n] * dt
    return full - dt / 2 * (f * a[0] + f[0] * a)


def _term_scalar(term: SeriesTerm, pole_values, eps_values) -> complex:
    scalar = complex(term.coeff)
    if term.noise:
        raise UnsupportedFormError(
            "deterministic quadrature cannot evaluate noise-graded terms"
        )
    for v, p in zip(pole_values, term.pole_pow):
        if p:
            scalar *= complex(v) ** p
    for v, p in zip(eps_values, term.eps):
        if p:
            scalar *= complex(v) ** p
    return scalar


def volterra_response(
    terms, signal, cfg: SimulationConfig, pole_values, eps_values
) -> TimeSeries:
    """Iterated-integral response of a truncated series on a time grid.

    Each chain's nested integral factorizes into a sequence of
    one-dimensional convolutions against the f_a^alpha factors,
    evaluated with the trapezoid rule (O(dt^2)).  Terms with more than
    MAX_QUADRATURE_DEPTH x1 letters are rejected: the response is a
    depth-fold multilinear functional of the input and its quadrature
    cost and error compound accordingly.
    """
    grid = cfg.grid()
    x_full, _ = _input_values(signal, grid)
    total = np.zeros(grid.size, dtype=complex)
    for term in terms:
        depth = term.x1_count()
        if depth > MAX_QUADRATURE_DEPTH:
            raise QuadratureDepthError(
                f"term has {depth} input letters; nested quadrature beyond "
                f"depth {MAX_QUADRATURE_DEPTH} is rejected (cost and error "
                "grow multiplicatively with depth)"
            )
        fracs = term.fracs
        letters = term.letters

        def combo_value(f) -> complex:
            return sum(k * complex(v) for k, v in zip(f.combo, pole_values) if k)

        # innermost factor: trailing fraction evaluated on the grid
        acc = f_pole(combo_value(fracs[-1]), fracs[-1].alpha).evaluate(grid).astype(
            complex
        )
        # walk letters right to left; each letter applies its input
        # factor pointwise, then convolves with the fraction to its left
        for pos in range(len(letters) - 1, -1, -1):
            if letters[pos] == X1:
                acc = acc * x_full
            f_vals = f_pole(combo_value(fracs[pos]), fracs[pos].alpha).evaluate(grid)
            acc = _trapezoid_convolution(f_vals.astype(complex), acc, cfg.dt)
        total += _term_scalar(term, pole_values, eps_values) * acc
    return TimeSeries(grid, total.real)


@dataclass(frozen=True)
class EnsembleResult:
    t: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    diverged: int
    total: int


def monte_carlo_mean(
    spec: SystemSpec, sigma_squared: float, cfg: SimulationConfig
) -> EnsembleResult:
    """Ensemble mean response under Gaussian white noise.

    Euler scheme with Ito increments of variance sigma^2 * dt on the top
    state, noise switched on at t = 0, zero initial conditions.  Each
    path draws from its own stream spawned from the seed by path index,
    so chunked, serial and parallel executions agree exactly.  Paths
    that blow up are dropped from the statistics; the run fails if more
    than 0.1% diverge.
    """
    if sigma_squared < 0:
        raise ValueError("noise power must be nonnegative")
    grid = cfg.grid()
    steps = grid.size - 1
    dt = cfg.dt
    n = spec.n
    lin = np.array([float(l) for l in spec.linear_coeffs])
    powers = [(p, float(c)) for p, c in spec.nonlinear]
    scale = np.sqrt(sigma_squared * dt)
    seeds = np.random.SeedSequence(cfg.rng_seed).spawn(cfg.ensemble_size)

    total = np.zeros(grid.size)
    total_sq = np.zeros(grid.size)
    diverged = 0
    for start in range(0, cfg.ensemble_size, MC_CHUNK):
        chunk = seeds[start:start + MC_CHUNK]
        m = len(chunk)
        if scale:
            noise = np.empty((m, steps))
            for k, seq in enumerate(chunk):
                noise[k] = np.random.default_rng(seq).standard_normal(steps)
            noise *= scale
        else:
            noise = np.zeros((m, steps))
        state = np.zeros((m, n))
        alive = np.ones(m, dtype=bool)
        path_y = np.zeros((m, grid.size))
        for i in range(steps):
            drift = np.empty_like(state)
            drift[:, :-1] = state[:, 1:]
            acc = -state @ lin
            for p, c in powers:
                acc -= c * state[:, 0] ** p
            drift[:, -1] = acc
            state = state + dt * drift
            state[:, -1] += noise[:, i]
            bad = ~np.isfinite(state[:, 0]) | (np.abs(state[:, 0]) > cfg.blow_up_bound)
            if bad.any():
                alive &= ~bad
                state[bad] = 0.0
            path_y[:, i + 1] = np.where(alive, state[:, 0], 0.0)
        diverged += int((~alive).sum())
        total += path_y[alive].sum(axis=0)
        total_sq += (path_y[alive] ** 2).sum(axis=0)
    kept = cfg.ensemble_size - diverged
    if diverged > 0.001 * cfg.ensemble_size:
        raise BlowUpError(
            float("nan"),
            cfg.blow_up_bound,
            f"{diverged} of {cfg.ensemble_size} ensemble paths diverged "
            "(limit 0.1%)",
        )
    mean = total / max(kept, 1)
    if kept > 1:
        var = (total_sq - kept * mean**2) / (kept - 1)
        stderr = np.sqrt(np.maximum(var, 0.0) / kept)
    else:
        stderr = np.zeros_like(mean)
    return EnsembleResult(grid, mean, stderr, diverged, cfg.ensemble_size)
