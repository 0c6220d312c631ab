"""Generating-series engine for polynomial-stiffness oscillators.

Builds the rational generating series of single-degree-of-freedom systems
with polynomial nonlinearities, manipulates them through the shuffle
product, inverts them to closed-form time responses via the inverse
Laplace-Borel transform, and computes white-noise response statistics.
Symbolic results are cross-checked by built-in numerical oracles.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    BlowUpError,
    DegenerateSpectrumError,
    FactorizationError,
    GenseriesError,
    QuadratureDepthError,
    SpecParseError,
    TermBudgetError,
    UnsupportedFormError,
)
from .exact import Surd, solve_monic_quadratic, sqrt_fraction
from .words import (
    X0,
    X1,
    Word,
    WordPolynomial,
    shuffle_polynomials,
    shuffle_words,
)
from .terms import (
    Chain,
    PoleFrac,
    SeriesTerm,
    expand_to_words,
    merge_terms,
    reduce_exponents,
    shuffle_many,
    shuffle_term_lists,
    shuffle_terms,
    simple_chain,
    term_from_chain,
)
from .render import combo_label, dump_terms, multiplier_label, parse_dump, term_array
from .systems import (
    DuffingScaling,
    ExpansionResult,
    IntegralForm,
    Order2Listing,
    PhysicalDuffingParams,
    SystemSpec,
    build_system,
    canonicalize_duffing,
    duffing_system,
    iterate,
    order2_listing,
    to_integral_form,
)
from .borel import (
    PartialFractions,
    RationalShape,
    TimeFunction,
    VolterraKernel1,
    evaluate,
    extract_kernel_order1,
    f_pole,
    format_time_function,
    identify,
    inverse_laplace_borel,
    inverse_shape,
    partial_fractions,
    substitute_step,
)
from .moments import (
    MomentDetail,
    NoiseSpec,
    Survivor,
    equal_time_moment,
    equal_time_moment_detail,
    expectation,
    expectation_series,
    mean_response,
    mean_response_detail,
    shuffle_power_orders,
)
from .diagrams import (
    ExpansionTerm,
    SourceTerm,
    Tree,
    TreeDiagram,
    expand_consolidated,
    expand_shapes,
    render_dot,
    term_to_diagram,
    vertex_sources,
)
from .oracles import (
    EnsembleResult,
    SimulationConfig,
    TimeSeries,
    integrate_ode,
    monte_carlo_mean,
    volterra_response,
)
from .checks import (
    ConsistencyReport,
    ResidualReport,
    TriangleReport,
    fixed_point_residual,
    mc_consistency,
    oracle_triangle,
)
from .specfile import (
    ParsedSpec,
    load_spec,
    parse_spec_text,
    serialize_spec,
)
