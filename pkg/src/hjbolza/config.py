"""Flat ``key = value`` problem files.

Format reference (UTF-8, one ``key = value`` per line, ``#`` starts a
comment, blank lines ignored)::

    name             = step                # identifier, required
    dimension        = 1                   # positive integer, required
    kinetic_power    = 2                   # p > 1, default 2
    kinetic_coef     = 0.5                 # c > 0, default 0.5; K(u) = c|u|^p
    potential_kind   = step                # none | step | quadratic, default none
    potential_params = height=1, threshold=0, axis=0
    terminal_kind    = quadratic           # zero | quadratic | ball, default zero
    terminal_params  = coef=1, center=0
    continuity_class = LowerSemicontinuousLocallyBounded

Parameter lists are comma separated ``k=v`` pairs.  Accepted parameters:
``step``: height, threshold, axis; ``quadratic`` potential: coef;
``quadratic`` terminal: coef, center; ``ball``: center, radius.
Unknown keys or parameters are errors.  ``continuity_class`` defaults to
the class implied by the potential.
"""

from __future__ import annotations

from pathlib import Path

from .errors import ConfigError
from .problems import (
    BallIndicator,
    ContinuityClass,
    Kinetic,
    Problem,
    QuadraticPotential,
    QuadraticTerminal,
    StepPotential,
    ZeroPotential,
    ZeroTerminal,
    catalog_names,
    get_problem,
)

KEYS = (
    "name",
    "dimension",
    "kinetic_power",
    "kinetic_coef",
    "potential_kind",
    "potential_params",
    "terminal_kind",
    "terminal_params",
    "continuity_class",
)

_POTENTIAL_PARAMS = {"none": set(), "step": {"height", "threshold", "axis"}, "quadratic": {"coef"}}
_TERMINAL_PARAMS = {"zero": set(), "quadratic": {"coef", "center"}, "ball": {"center", "radius"}}


def _params(text: str, allowed: set[str], kind: str) -> dict[str, float]:
    out: dict[str, float] = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        if "=" not in item:
            raise ConfigError(f"malformed parameter {item!r} (expected k=v)")
        k, v = (s.strip() for s in item.split("=", 1))
        if k not in allowed:
            raise ConfigError(f"unknown parameter {k!r} for kind {kind!r}")
        try:
            out[k] = float(v)
        except ValueError:
            raise ConfigError(f"parameter {k!r} is not a number: {v!r}") from None
    return out


def parse_problem(text: str) -> Problem:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    for key in ("name", "dimension"):
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")
    try:
        dimension = int(raw["dimension"])
        kinetic = Kinetic(float(raw.get("kinetic_power", 2.0)), float(raw.get("kinetic_coef", 0.5)))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if dimension < 1:
        raise ConfigError("dimension must be a positive integer")

    pkind = raw.get("potential_kind", "none")
    if pkind not in _POTENTIAL_PARAMS:
        raise ConfigError(f"unknown potential_kind {pkind!r}")
    pp = _params(raw.get("potential_params", ""), _POTENTIAL_PARAMS[pkind], pkind)
    if pkind == "step":
        axis = int(pp.get("axis", 0))
        if not 0 <= axis < dimension:
            raise ConfigError("step axis out of range")
        potential = StepPotential(pp.get("height", 1.0), pp.get("threshold", 0.0), axis)
        default_class = ContinuityClass.LSC_LOCALLY_BOUNDED
    elif pkind == "quadratic":
        potential = QuadraticPotential(pp.get("coef", 0.5))
        default_class = ContinuityClass.CONTINUOUS
    else:
        potential = ZeroPotential()
        default_class = ContinuityClass.CONTINUOUS

    tkind = raw.get("terminal_kind", "zero")
    if tkind not in _TERMINAL_PARAMS:
        raise ConfigError(f"unknown terminal_kind {tkind!r}")
    tp = _params(raw.get("terminal_params", ""), _TERMINAL_PARAMS[tkind], tkind)
    if tkind == "quadratic":
        terminal = QuadraticTerminal(tp.get("coef", 1.0), tp.get("center", 0.0))
    elif tkind == "ball":
        terminal = BallIndicator(tp.get("center", 0.0), tp.get("radius", 0.1))
    else:
        terminal = ZeroTerminal()

    if "continuity_class" in raw:
        try:
            cls = ContinuityClass(raw["continuity_class"])
        except ValueError:
            raise ConfigError(f"unknown continuity_class {raw['continuity_class']!r}") from None
    else:
        cls = default_class
    return Problem(raw["name"], dimension, kinetic, potential, terminal, cls)


def dump_problem(problem: Problem) -> str:
    """Inverse of :func:`parse_problem` for catalog-family problems."""
    lines = [
        f"name = {problem.name}",
        f"dimension = {problem.dimension}",
        f"kinetic_power = {problem.kinetic.power!r}",
        f"kinetic_coef = {problem.kinetic.coef!r}",
    ]
    pot = problem.potential
    if isinstance(pot, StepPotential):
        lines += ["potential_kind = step",
                  f"potential_params = height={pot.height!r}, threshold={pot.threshold!r}, axis={pot.axis}"]
    elif isinstance(pot, QuadraticPotential):
        lines += ["potential_kind = quadratic", f"potential_params = coef={pot.coef!r}"]
    elif isinstance(pot, ZeroPotential):
        lines += ["potential_kind = none"]
    else:
        raise ConfigError(f"potential {type(pot).__name__} has no file representation")
    term = problem.terminal
    if isinstance(term, QuadraticTerminal):
        lines += ["terminal_kind = quadratic", f"terminal_params = coef={term.coef!r}, center={term.center!r}"]
    elif isinstance(term, BallIndicator):
        lines += ["terminal_kind = ball", f"terminal_params = center={term.center!r}, radius={term.radius!r}"]
    else:
        lines += ["terminal_kind = zero"]
    lines.append(f"continuity_class = {problem.continuity_class.value}")
    return "\n".join(lines) + "\n"


def load_problem(spec: str, dimension: int = 1) -> Problem:
    """Resolve a catalog name or a path to a problem file."""
    if spec in catalog_names():
        return get_problem(spec, dimension)
    path = Path(spec)
    if not path.is_file():
        raise ConfigError(f"{spec!r} is neither a catalog problem ({', '.join(catalog_names())}) nor a file")
    return parse_problem(path.read_text(encoding="utf-8"))
