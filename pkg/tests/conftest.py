"""Shared fixtures for the test suite.

The canonical system used throughout is the single-DOF oscillator
y'' + 3 y' + y + e1 y^2 + e2 y^3 = x with e1 = 1 and e2 = 1/2, whose
linear poles are a1 = (-3 + sqrt(5))/2 and a2 = (-3 - sqrt(5))/2.
Expensive expansions are computed once per session.
"""

from __future__ import annotations

from fractions import Fraction

import pytest

from genseries import ExpansionResult, SystemSpec, duffing_system, iterate


@pytest.fixture(scope="session")
def duffing() -> SystemSpec:
    return duffing_system(3, 1, Fraction(1, 2))


@pytest.fixture(scope="session")
def linear_spec() -> SystemSpec:
    from genseries import build_system

    return build_system(2, [Fraction(1), Fraction(3)], {})


@pytest.fixture(scope="session")
def expansion2(duffing) -> ExpansionResult:
    """Order-2 expansion of the canonical system, shared across tests."""
    return iterate(duffing, 2)


@pytest.fixture(scope="session")
def poles(duffing):
    """Exact pole values (a1, a2) in slot order."""
    return duffing.poles
