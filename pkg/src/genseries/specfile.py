"""Flat `key = value` description files for oscillator systems.

Two mutually exclusive styles describe a system:

canonical coefficients (any operator order, any polynomial stiffness)::

    # y'' + 3 y' + y + y^2 + 1/2 y^3 = x
    n = 2
    linear = 1 3
    nonlinear.2 = 1
    nonlinear.3 = 1/2

physical quadratic-cubic oscillator, m y'' + c y' + k1 y + k2 y^2
+ k3 y^3 = F, reduced to canonical form on load::

    physical.m = 1
    physical.c = 3
    physical.k1 = 1
    physical.k2 = 1
    physical.k3 = 1/2

`linear` lists l_0 .. l_{n-1} (the leading coefficient is 1 by scaling);
`nonlinear.<p>` gives the coefficient of y^p.  All values are exact
rationals: integers, fractions like `3/10`, or finite decimals.  Lines
starting with `#` and blank lines are ignored; `#` also starts an inline
comment.  Duplicate keys, unknown keys, and mixing the two styles are
errors that carry the offending line number.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .errors import SpecParseError
from .systems import (
    DuffingScaling,
    PhysicalDuffingParams,
    SystemSpec,
    build_system,
    canonicalize_duffing,
)

_PHYSICAL_KEYS = ("m", "c", "k1", "k2", "k3")
_PHYSICAL_REQUIRED = ("m", "c", "k1")


@dataclass(frozen=True)
class ParsedSpec:
    """A compiled system plus, for physical input, the scaling that made it."""

    spec: SystemSpec
    physical: PhysicalDuffingParams | None = None
    scaling: DuffingScaling | None = None
    source: str = "<string>"


def _parse_fraction(text: str, line: int, key: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise SpecParseError(
            f"value {text!r} for {key} is not an exact rational: {exc}", line
        ) from None


def parse_spec_text(text: str, source: str = "<string>") -> ParsedSpec:
    entries: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecParseError(f"expected `key = value`, got {raw.strip()!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise SpecParseError(f"empty key or value in {raw.strip()!r}", lineno)
        if key in entries:
            raise SpecParseError(
                f"duplicate key {key!r} (first given on line {entries[key][1]})",
                lineno,
            )
        entries[key] = (value, lineno)

    if not entries:
        raise SpecParseError("empty spec: no key = value lines found")

    physical_keys = [k for k in entries if k.startswith("physical.")]
    canonical_keys = [k for k in entries if not k.startswith("physical.")]
    if physical_keys and canonical_keys:
        k, (_, lineno) = next(
            (k, entries[k]) for k in entries if k in canonical_keys
        )
        raise SpecParseError(
            f"{k!r} mixes canonical keys with a physical.* block; use one style",
            lineno,
        )

    if physical_keys:
        values: dict[str, Fraction] = {}
        for key in physical_keys:
            text_value, lineno = entries[key]
            field = key[len("physical."):]
            if field not in _PHYSICAL_KEYS:
                raise SpecParseError(
                    f"unknown key {key!r}; physical fields are "
                    + ", ".join(f"physical.{f}" for f in _PHYSICAL_KEYS),
                    lineno,
                )
            values[field] = _parse_fraction(text_value, lineno, key)
        missing = [f for f in _PHYSICAL_REQUIRED if f not in values]
        if missing:
            raise SpecParseError(
                "physical block is missing " + ", ".join(f"physical.{f}" for f in missing)
            )
        params = PhysicalDuffingParams(**values)
        spec, scaling = canonicalize_duffing(params)
        return ParsedSpec(spec, params, scaling, source)

    n_entry = entries.pop("n", None)
    if n_entry is None:
        raise SpecParseError("canonical spec needs `n = <operator order>`")
    try:
        n = int(n_entry[0])
    except ValueError:
        raise SpecParseError(f"n must be an integer, got {n_entry[0]!r}", n_entry[1])

    linear_entry = entries.pop("linear", None)
    if linear_entry is None:
        raise SpecParseError("canonical spec needs `linear = l_0 .. l_{n-1}`")
    linear_text, linear_line = linear_entry
    linear = [
        _parse_fraction(tok, linear_line, "linear") for tok in linear_text.split()
    ]
    if len(linear) != n:
        raise SpecParseError(
            f"linear lists {len(linear)} coefficients, need n = {n}", linear_line
        )

    nonlinear: dict[int, Fraction] = {}
    for key, (value, lineno) in entries.items():
        prefix, _, power_text = key.partition(".")
        if prefix != "nonlinear" or not power_text:
            raise SpecParseError(
                f"unknown key {key!r}; expected n, linear, nonlinear.<power>, "
                "or a physical.* block",
                lineno,
            )
        try:
            power = int(power_text)
        except ValueError:
            raise SpecParseError(
                f"nonlinear power {power_text!r} is not an integer", lineno
            )
        if power < 2:
            raise SpecParseError("nonlinear powers start at 2", lineno)
        nonlinear[power] = _parse_fraction(value, lineno, key)

    try:
        spec = build_system(n, linear, nonlinear)
    except ValueError as exc:
        raise SpecParseError(str(exc)) from None
    return ParsedSpec(spec, source=source)


def load_spec(path: str | Path) -> ParsedSpec:
    path = Path(path)
    return parse_spec_text(path.read_text(encoding="utf-8"), source=str(path))


def serialize_spec(spec: SystemSpec) -> str:
    """Canonical-style text whose parse compiles back to the same system."""
    lines = [
        f"n = {spec.n}",
        "linear = " + " ".join(str(c) for c in spec.linear_coeffs),
    ]
    for power, coeff in spec.nonlinear:
        lines.append(f"nonlinear.{power} = {coeff}")
    return "\n".join(lines) + "\n"
