"""
Job configuration parsing.

A job is described either by ``key=value`` statements separated by ``;`` or
newlines (``#`` starts a comment), or by a YAML mapping with the same keys.
Both produce a :class:`JobConfig`.

Ring expressions use integers, the generator ``z`` (cyclotomic) or ``b``
(complex mode), ``+ - *``, unary minus, parentheses and integer powers::

    beta=1+z^1+z^4
    beta=-(1+z^1+z^4)
    beta=(1+z^1+z^4)^2

Translation and seed sets are sums of set terms, each optionally scaled::

    maps=roots_of_unity(10)+{0}
    maps=roots_of_unity(5)+(z^1+z^4)*roots_of_unity(5)
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import yaml

from . import settings
from .errors import ParseError, QuasilatticeError, ValidationError
from .ifs import IfsSpec, make_ifs, roots_of_unity
from .ring import COMPLEX_PISOT, CYCLOTOMIC, FieldSpec, RingElement, check_pisot_unit, make_field

logger = logging.getLogger(__name__)

COMPACT = "compact"
SEEDS = "seeds"
WINDOWS = (COMPACT, SEEDS)
FORMATS = ("csv", "json")

KEYS = (
    "name",
    "field",
    "beta",
    "maps",
    "window",
    "seeds",
    "rho",
    "N",
    "core_radius_factor",
    "budget",
    "max_points",
    "format",
    "out",
    "view",
    "depth",
)

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\S))", re.S)


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "name", "op" or "end"
    text: str
    offset: int


@dataclass(frozen=True)
class Location:
    """1-based line and column of a value in the configuration text."""

    line: int = 1
    column: int = 1

    def shift(self, text: str, offset: int) -> "Location":
        """Location of ``text[offset]`` when ``text`` starts here."""
        before = text[:offset]
        newlines = before.count("\n")
        if newlines:
            return Location(self.line + newlines, offset - before.rfind("\n"))
        return Location(self.line, self.column + offset)


def tokenize(text: str) -> List[Token]:
    tokens = []
    position = 0
    while position < len(text):
        match = _TOKEN.match(text, position)
        if match is None or match.end() == position:
            break
        number, name, op = match.groups()
        start = match.start(match.lastindex) if match.lastindex else match.end()
        if number is not None:
            tokens.append(Token("int", number, start))
        elif name is not None:
            tokens.append(Token("name", name, start))
        elif op is not None:
            tokens.append(Token("op", op, start))
        position = match.end()
    tokens.append(Token("end", "", len(text.rstrip())))
    return tokens


class ExpressionParser:
    """
    Recursive-descent parser for ring and set expressions over one field.

    Grammar::

        set_expr := set_term ('+' set_term)*
        set_term := set_atom | unary '*' set_atom
        set_atom := 'roots_of_unity' '(' INT ')' | '{' expr (',' expr)* '}'
        expr     := term (('+' | '-') term)*
        term     := unary ('*' unary)*
        unary    := '-' unary | power
        power    := primary ('^' ['-'] INT)?
        primary  := INT | SYMBOL | '(' expr ')'
    """

    def __init__(self, text: str, field_spec: FieldSpec, location: Location = Location()):
        self.text = text
        self.field = field_spec
        self.location = location
        self.tokens = tokenize(text)
        self.index = 0

    # token helpers

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def error(self, message: str, token: Optional[Token] = None) -> ParseError:
        token = token or self.current
        where = self.location.shift(self.text, token.offset)
        return ParseError(message, where.line, where.column)

    def advance(self) -> Token:
        token = self.current
        self.index += 1
        return token

    def accept(self, text: str) -> bool:
        if self.current.kind == "op" and self.current.text == text:
            self.index += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not (self.current.kind == "op" and self.current.text == text):
            found = self.current.text or "end of input"
            raise self.error(f"Expected '{text}', found '{found}'")
        return self.advance()

    def expect_int(self) -> int:
        if self.current.kind != "int":
            found = self.current.text or "end of input"
            raise self.error(f"Expected an integer, found '{found}'")
        return int(self.advance().text)

    def finish(self) -> None:
        if self.current.kind != "end":
            raise self.error(f"Unexpected '{self.current.text}'")

    # ring expressions

    def expression(self) -> RingElement:
        value = self.term()
        while True:
            if self.accept("+"):
                value = value + self.term()
            elif self.accept("-"):
                value = value - self.term()
            else:
                return value

    def term(self) -> RingElement:
        value = self.unary()
        while self.accept("*"):
            value = value * self.unary()
        return value

    def unary(self) -> RingElement:
        if self.accept("-"):
            return -self.unary()
        return self.power()

    def power(self) -> RingElement:
        base = self.primary()
        if self.accept("^"):
            token = self.current
            negative = self.accept("-")
            exponent = self.expect_int()
            exponent = -exponent if negative else exponent
            try:
                return base**exponent
            except QuasilatticeError as exc:
                where = self.location.shift(self.text, token.offset)
                raise type(exc)(f"line {where.line}, column {where.column}: {exc}") from exc
        return base

    def primary(self) -> RingElement:
        token = self.current
        if token.kind == "int":
            self.advance()
            return self.field.from_int(int(token.text))
        if token.kind == "name":
            if token.text != self.field.symbol:
                raise self.error(f"Unknown symbol '{token.text}' for {self.field}; use '{self.field.symbol}'")
            self.advance()
            return self.field.generator
        if self.accept("("):
            value = self.expression()
            self.expect(")")
            return value
        found = token.text or "end of input"
        raise self.error(f"Expected a number, '{self.field.symbol}' or '(', found '{found}'")

    # set expressions

    def set_expression(self) -> List[RingElement]:
        values = self.set_term()
        while self.accept("+"):
            values += self.set_term()
        return values

    def set_term(self) -> List[RingElement]:
        if self._at_set_atom():
            return self.set_atom()
        factor = self.unary()
        self.expect("*")
        return [factor * value for value in self.set_atom()]

    def _at_set_atom(self) -> bool:
        token = self.current
        return (token.kind == "op" and token.text == "{") or (
            token.kind == "name" and token.text == "roots_of_unity"
        )

    def set_atom(self) -> List[RingElement]:
        token = self.current
        if token.kind == "name" and token.text == "roots_of_unity":
            self.advance()
            self.expect("(")
            order_token = self.current
            order = self.expect_int()
            self.expect(")")
            try:
                return roots_of_unity(self.field, order)
            except ValidationError as exc:
                where = self.location.shift(self.text, order_token.offset)
                raise ValidationError(f"line {where.line}, column {where.column}: {exc}") from exc
        self.expect("{")
        values = [self.expression()]
        while self.accept(","):
            values.append(self.expression())
        self.expect("}")
        return values


def parse_ring_expression(text: str, field_spec: FieldSpec, location: Location = Location()) -> RingElement:
    """
    Parse one ring expression.

    Example:
        >>> str(parse_ring_expression("(1+z^1+z^4)^2", cyclotomic_field(5)))  # doctest: +SKIP
        '1-z^2-z^3'
    """
    parser = ExpressionParser(text, field_spec, location)
    value = parser.expression()
    parser.finish()
    return value


def parse_set_expression(text: str, field_spec: FieldSpec, location: Location = Location()) -> List[RingElement]:
    """Parse a translation or seed set such as ``roots_of_unity(10)+{0}``."""
    parser = ExpressionParser(text, field_spec, location)
    values = parser.set_expression()
    parser.finish()
    return values


def parse_field(text: str, location: Location = Location()) -> FieldSpec:
    """Parse ``cyclotomic(n)`` or ``complex_pisot(a0,a1,...,1)``."""
    tokens = tokenize(text)

    def fail(message: str, token: Token) -> ParseError:
        where = location.shift(text, token.offset)
        return ParseError(message, where.line, where.column)

    head = tokens[0]
    if head.kind != "name" or head.text not in (CYCLOTOMIC, COMPLEX_PISOT):
        raise fail(f"Expected cyclotomic(n) or complex_pisot(a0,...), found '{head.text}'", head)
    index = 1
    if tokens[index].text != "(":
        raise fail("Expected '('", tokens[index])
    index += 1
    values = []
    while True:
        sign = 1
        if tokens[index].text == "-":
            sign = -1
            index += 1
        if tokens[index].kind != "int":
            raise fail("Expected an integer", tokens[index])
        values.append(sign * int(tokens[index].text))
        index += 1
        if tokens[index].text == ",":
            index += 1
            continue
        if tokens[index].text != ")":
            raise fail("Expected ',' or ')'", tokens[index])
        index += 1
        break
    if tokens[index].kind != "end":
        raise fail(f"Unexpected '{tokens[index].text}'", tokens[index])

    try:
        if head.text == CYCLOTOMIC:
            if len(values) != 1:
                raise fail("cyclotomic takes exactly one argument", head)
            return make_field(CYCLOTOMIC, values[0])
        return make_field(COMPLEX_PISOT, values)
    except ValidationError as exc:
        raise type(exc)(f"line {location.line}, column {location.column}: {exc}") from exc


def ifs_from_texts(field_text: str, beta_text: str, translation_texts: Sequence[str]) -> IfsSpec:
    """Build an IFS from the string forms of its field, factor and translations."""
    field_spec = parse_field(field_text)
    beta = parse_ring_expression(beta_text, field_spec)
    return make_ifs(field_spec, beta, [parse_ring_expression(t, field_spec) for t in translation_texts])


@dataclass(frozen=True)
class JobConfig:
    """
    A validated job: the IFS, the window variant and the run parameters.

    Equality compares the mathematical content, so the canonical form written
    by :func:`emit_config` parses back to an equal job.
    """

    field: FieldSpec
    beta: RingElement
    translations: Tuple[RingElement, ...]
    name: str = "job"
    window: str = COMPACT
    seeds: Tuple[RingElement, ...] = ()
    rho: float = settings.DEFAULT_RHO
    N: Optional[int] = None
    core_radius_factor: float = 1.0
    budget: int = settings.LATTICE_BUDGET
    max_points: int = settings.POINT_BUDGET
    format: str = "csv"
    out: Optional[str] = None
    view: Optional[Tuple[float, float, float, float]] = None
    depth: Optional[int] = None
    ifs: IfsSpec = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.ifs is None:
            object.__setattr__(self, "ifs", make_ifs(self.field, self.beta, self.translations))


def _split_statements(text: str) -> List[Tuple[str, Location, str, Location]]:
    """Split key=value text into (key, key location, value, value location)."""
    statements = []
    line, column = 1, 1
    depth = 0
    start = 0
    start_location = Location(1, 1)
    chunks = []

    position = 0
    while position < len(text):
        char = text[position]
        if char == "#":
            end = text.find("\n", position)
            end = len(text) if end == -1 else end
            column += end - position
            position = end
            continue
        if char in "({":
            depth += 1
        elif char in ")}":
            depth -= 1
        if (char == ";" and depth == 0) or char == "\n":
            chunks.append((text[start:position], start_location))
            start = position + 1
            if char == "\n":
                line, column = line + 1, 1
                depth = 0
            else:
                column += 1
            start_location = Location(line, column)
            position += 1
            continue
        position += 1
        column += 1
    chunks.append((text[start:], start_location))

    for chunk, location in chunks:
        body = chunk.split("#", 1)[0]
        if not body.strip():
            continue
        if "=" not in body:
            lead = len(body) - len(body.lstrip())
            where = location.shift(body, lead)
            raise ParseError(f"Expected key=value, found '{body.strip()}'", where.line, where.column)
        key_part, value_part = body.split("=", 1)
        key_offset = len(key_part) - len(key_part.lstrip())
        value_offset = len(key_part) + 1 + len(value_part) - len(value_part.lstrip())
        statements.append(
            (
                key_part.strip(),
                location.shift(body, key_offset),
                value_part.strip(),
                location.shift(body, value_offset),
            )
        )
    return statements


def _yaml_statements(text: str) -> List[Tuple[str, Location, str, Location]]:
    try:
        node = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        problem = getattr(exc, "problem", None) or str(exc)
        if mark is not None:
            raise ParseError(problem, mark.line + 1, mark.column + 1) from exc
        raise ParseError(problem) from exc
    if node is None:
        return []
    if not isinstance(node, yaml.MappingNode):
        raise ParseError("Expected a mapping of configuration keys", node.start_mark.line + 1, node.start_mark.column + 1)

    statements = []
    for key_node, value_node in node.value:
        key_location = Location(key_node.start_mark.line + 1, key_node.start_mark.column + 1)
        value_location = Location(value_node.start_mark.line + 1, value_node.start_mark.column + 1)
        if not isinstance(key_node, yaml.ScalarNode):
            raise ParseError("Keys must be plain names", key_location.line, key_location.column)
        if isinstance(value_node, yaml.ScalarNode):
            value = value_node.value
        elif isinstance(value_node, yaml.SequenceNode) and all(
            isinstance(item, yaml.ScalarNode) for item in value_node.value
        ):
            items = ",".join(item.value for item in value_node.value)
            value = "{" + items + "}" if key_node.value in ("maps", "seeds") else items
        else:
            raise ParseError(
                f"Value of '{key_node.value}' must be a scalar or a list of scalars "
                "(quote expressions that start with '{')",
                value_location.line,
                value_location.column,
            )
        statements.append((key_node.value, key_location, str(value), value_location))
    return statements


def _looks_like_key_value(text: str) -> bool:
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        return re.match(r"^[A-Za-z_]\w*\s*=", line) is not None
    return True


def _number(value: str, location: Location, kind=float):
    try:
        return kind(value)
    except ValueError:
        raise ParseError(f"Expected {'an integer' if kind is int else 'a number'}, found '{value}'",
                         location.line, location.column) from None


def _located(exc: ValidationError, location: Location) -> ValidationError:
    return type(exc)(f"line {location.line}, column {location.column}: {exc}")


def parse_config(text: str) -> JobConfig:
    """
    Parse and validate a job description.

    Args:
        text: ``key=value`` statements or a YAML mapping

    Returns:
        Validated JobConfig

    Raises:
        ParseError: For malformed text or expressions, with line and column
        ValidationError: For mathematically invalid jobs (NotPisot, NotAUnit,
            ...), with the location of the offending value

    Example:
        >>> job = parse_config("field=cyclotomic(5); beta=1+z^1+z^4; maps=roots_of_unity(5)")
        >>> job.ifs.m
        5
    """
    statements = _split_statements(text) if _looks_like_key_value(text) else _yaml_statements(text)
    values: Dict[str, Tuple[str, Location]] = {}
    for key, key_location, value, value_location in statements:
        if key not in KEYS:
            raise ParseError(f"Unknown key '{key}'; known keys are {', '.join(KEYS)}",
                             key_location.line, key_location.column)
        if key in values:
            raise ParseError(f"Duplicate key '{key}'", key_location.line, key_location.column)
        values[key] = (value, value_location)

    field_text, field_location = values.get("field", ("cyclotomic(5)", Location()))
    field_spec = parse_field(field_text, field_location)

    if "beta" not in values:
        raise ParseError("Missing required key 'beta'")
    beta_text, beta_location = values["beta"]
    beta = parse_ring_expression(beta_text, field_spec, beta_location)
    try:
        check_pisot_unit(beta)
    except ValidationError as exc:
        raise _located(exc, beta_location) from exc

    if "maps" not in values:
        raise ParseError("Missing required key 'maps'")
    maps_text, maps_location = values["maps"]
    translations = tuple(parse_set_expression(maps_text, field_spec, maps_location))

    options = {}
    if "name" in values:
        options["name"] = values["name"][0]
    if "window" in values:
        window, location = values["window"]
        if window not in WINDOWS:
            raise ParseError(f"window must be one of {WINDOWS}, found '{window}'", location.line, location.column)
        options["window"] = window
    if "seeds" in values:
        seeds_text, location = values["seeds"]
        options["seeds"] = tuple(parse_set_expression(seeds_text, field_spec, location))
    if "format" in values:
        fmt, location = values["format"]
        if fmt not in FORMATS:
            raise ParseError(f"format must be one of {FORMATS}, found '{fmt}'", location.line, location.column)
        options["format"] = fmt
    if "out" in values:
        options["out"] = values["out"][0]

    for key, kind, minimum in (
        ("rho", float, None),
        ("core_radius_factor", float, None),
        ("N", int, 1),
        ("budget", int, 1),
        ("max_points", int, 1),
        ("depth", int, 0),
    ):
        if key not in values:
            continue
        text_value, location = values[key]
        number = _number(text_value, location, kind)
        if minimum is None and not number > 0:
            raise ValidationError(f"line {location.line}, column {location.column}: {key} must be positive, got {number}")
        if minimum is not None and number < minimum:
            raise ValidationError(
                f"line {location.line}, column {location.column}: {key} must be at least {minimum}, got {number}"
            )
        options[key] = number

    if "view" in values:
        view_text, location = values["view"]
        parts = [part.strip() for part in view_text.strip("[]() ").split(",")]
        if len(parts) != 4:
            raise ParseError("view needs xmin,xmax,ymin,ymax", location.line, location.column)
        view = tuple(_number(part, location) for part in parts)
        if not (view[0] < view[1] and view[2] < view[3]):
            raise ValidationError(f"line {location.line}, column {location.column}: view {view} is empty")
        options["view"] = view

    if options.get("window") == SEEDS and not options.get("seeds"):
        raise ValidationError("window=seeds needs a seeds list")

    try:
        ifs = make_ifs(field_spec, beta, translations)
    except ValidationError as exc:
        raise _located(exc, maps_location) from exc

    job = JobConfig(field=field_spec, beta=beta, translations=translations, ifs=ifs, **options)
    logger.debug("Parsed job %s: %d maps on %s", job.name, ifs.m, field_spec)
    return job


def _set_text(elements: Sequence[RingElement]) -> str:
    return "{" + ",".join(str(x) for x in elements) + "}"


def _float_text(value: float) -> str:
    return repr(float(value))


def emit_config(job: JobConfig) -> str:
    """
    Canonical ``key=value`` form of a job, one statement per line.

    Translations and seeds are written as explicit element lists, so parsing
    the result gives an equal JobConfig.
    """
    lines = [
        f"name={job.name}",
        f"field={job.field}",
        f"beta={job.beta}",
        f"maps={_set_text(job.translations)}",
        f"window={job.window}",
    ]
    if job.seeds:
        lines.append(f"seeds={_set_text(job.seeds)}")
    lines.append(f"rho={_float_text(job.rho)}")
    if job.N is not None:
        lines.append(f"N={job.N}")
    if job.core_radius_factor != 1.0:
        lines.append(f"core_radius_factor={_float_text(job.core_radius_factor)}")
    if job.budget != settings.LATTICE_BUDGET:
        lines.append(f"budget={job.budget}")
    if job.max_points != settings.POINT_BUDGET:
        lines.append(f"max_points={job.max_points}")
    lines.append(f"format={job.format}")
    if job.out:
        lines.append(f"out={job.out}")
    if job.view:
        lines.append("view=" + ",".join(_float_text(v) for v in job.view))
    if job.depth is not None:
        lines.append(f"depth={job.depth}")
    return "\n".join(lines) + "\n"


__all__ = [
    "COMPACT",
    "SEEDS",
    "KEYS",
    "Location",
    "Token",
    "tokenize",
    "ExpressionParser",
    "parse_ring_expression",
    "parse_set_expression",
    "parse_field",
    "ifs_from_texts",
    "JobConfig",
    "parse_config",
    "emit_config",
]
