"""Textual views of series terms.

Two formats:

* the two-row "array" view used in the tables of the source domain
  (letters on top, pole labels underneath, scalar multiplier in front) --
  note the printed pole entries are the NEGATED stored combos, so the
  fraction 1/(1 - a1*x0) prints as "-a1";
* a line-oriented machine dump that round-trips through `parse_dump`.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import SpecParseError
from .terms import Chain, Combo, PoleFrac, SeriesTerm


def combo_label(combo: Combo, negate: bool = True, symbols: tuple[str, ...] | None = None) -> str:
    """Render an integer pole combination, optionally negated for display."""
    if symbols is None:
        symbols = tuple(f"a{i + 1}" for i in range(len(combo)))
    parts: list[str] = []
    for k, name in zip(combo, symbols):
        if k == 0:
            continue
        if negate:
            k = -k
        sign = "-" if k < 0 else "+"
        mag = abs(k)
        body = name if mag == 1 else f"{mag}{name}"
        parts.append((sign, body))
    if not parts:
        return "0"
    first_sign, first_body = parts[0]
    text = (first_sign if first_sign == "-" else "") + first_body
    for sign, body in parts[1:]:
        text += sign + body
    return text


def eps_symbol(slot: int) -> str:
    """Display name of the nonlinear coefficient in eps slot `slot`.

    Slot k corresponds to the stiffness power k+2 and is displayed e1, e2,
    ... (the quadratic coefficient is e1, the cubic e2)."""
    return f"e{slot + 1}"


def multiplier_label(term: SeriesTerm) -> str:
    """Scalar prefix: signed rational times eps monomial times noise power."""
    c = term.coeff
    bits: list[str] = []
    for slot, e in enumerate(term.eps):
        if e == 1:
            bits.append(eps_symbol(slot))
        elif e > 1:
            bits.append(f"{eps_symbol(slot)}^{e}")
    if term.noise == 1:
        bits.append("(s2/2)")
    elif term.noise > 1:
        bits.append(f"(s2/2)^{term.noise}")
    for i, e in enumerate(term.pole_pow):
        if e == 1:
            bits.append(f"a{i + 1}")
        elif e > 1:
            bits.append(f"a{i + 1}^{e}")
    if c == 1 and bits:
        return "*".join(bits)
    if c == -1 and bits:
        return "-" + "*".join(bits)
    head = str(c)
    return "*".join([head] + bits)


def term_array(term: SeriesTerm, symbols: tuple[str, ...] | None = None) -> str:
    """Two-row array rendering of one term.

    Column k pairs letter l_k with the fraction that PRECEDES it, printed
    in negated convention; a trailing trivial fraction is not printed, a
    trailing non-trivial one gets its own letterless column.
    """
    chain = term.chain
    cols: list[tuple[str, str]] = []
    for i, letter in enumerate(chain.letters):
        f = chain.fracs[i]
        label = combo_label(f.combo, negate=True, symbols=symbols)
        if f.alpha > 1:
            label = f"({label})^{f.alpha}"
        cols.append((f"x{letter}", label))
    tail = chain.fracs[-1]
    if not tail.trivial:
        label = combo_label(tail.combo, negate=True, symbols=symbols)
        if tail.alpha > 1:
            label = f"({label})^{tail.alpha}"
        cols.append(("", label))
    if not cols:
        return multiplier_label(term) + " [ 1 ]"
    widths = [max(len(a), len(b)) for a, b in cols]
    top = "  ".join(a.ljust(w) for (a, _), w in zip(cols, widths))
    bot = "  ".join(b.ljust(w) for (_, b), w in zip(cols, widths))
    head = multiplier_label(term)
    pad = " " * (len(head) + 3)
    return f"{head}  [ {top.rstrip()} ]\n{pad}[ {bot.rstrip()} ]"


def render_term_list(terms: list[SeriesTerm], symbols: tuple[str, ...] | None = None) -> str:
    return "\n".join(term_array(t, symbols) for t in terms)


# ---------------------------------------------------------------------------
# machine dump

def dump_term(term: SeriesTerm, order: int | None = None) -> str:
    fields = []
    if order is not None:
        fields.append(f"order={order}")
    fields.append(f"coeff={term.coeff}")
    fields.append("eps=" + (",".join(str(e) for e in term.eps) if term.eps else "-"))
    fields.append(f"noise={term.noise}")
    fields.append("polepow=" + (",".join(str(e) for e in term.pole_pow)
                                if term.pole_pow else "-"))
    fields.append("letters=" + ("".join(str(l) for l in term.letters) or "-"))
    fracs = []
    for f in term.fracs:
        s = ",".join(str(k) for k in f.combo)
        if f.alpha > 1:
            s += f"^{f.alpha}"
        fracs.append(f"({s})")
    fields.append("fracs=" + ";".join(fracs))
    return " ".join(fields)


def dump_terms(terms: list[SeriesTerm], order: int | None = None) -> str:
    return "\n".join(dump_term(t, order) for t in terms)


def parse_dump_line(line: str) -> tuple[int | None, SeriesTerm]:
    """Inverse of dump_term. Returns (order or None, term)."""
    order: int | None = None
    kv: dict[str, str] = {}
    for field in line.split():
        if "=" not in field:
            raise SpecParseError(f"malformed dump field {field!r}")
        k, v = field.split("=", 1)
        kv[k] = v
    try:
        if "order" in kv:
            order = int(kv["order"])
        coeff = Fraction(kv["coeff"])
        eps = () if kv["eps"] == "-" else tuple(int(x) for x in kv["eps"].split(","))
        noise = int(kv["noise"])
        pole_pow = () if kv.get("polepow", "-") == "-" else tuple(
            int(x) for x in kv["polepow"].split(","))
        letters = () if kv["letters"] == "-" else tuple(int(c) for c in kv["letters"])
        fracs: list[PoleFrac] = []
        for part in kv["fracs"].split(";"):
            part = part.strip()
            if not (part.startswith("(") and ")" in part):
                raise SpecParseError(f"malformed fraction {part!r}")
            inner, _, exp = part[1:].partition(")")
            alpha = int(exp[1:]) if exp.startswith("^") else 1
            combo = tuple(int(x) for x in inner.split(","))
            fracs.append(PoleFrac(combo, alpha))
    except (KeyError, ValueError) as exc:
        raise SpecParseError(f"bad dump line {line!r}: {exc}") from exc
    chain = Chain(tuple(fracs), letters)
    return order, SeriesTerm(coeff, eps, noise, chain, pole_pow)


def parse_dump(text: str) -> list[tuple[int | None, SeriesTerm]]:
    out = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        out.append(parse_dump_line(line))
    return out
