"""A small line-oriented description language for optical benches.

One stage per line: a keyword, an optional bare variant token, then
``name=value`` parameters.  ``#`` starts a comment, blank lines are
ignored, and numbers accept a ``deg`` suffix (stored as radians).  The
canonical heralded-preparation bench reads::

    source spdc
    filter smf side=bob
    qplate q=1 alpha0=0 side=bob
    herald basis=H side=alice

Exactly one ``source`` stage must come first and at most one ``herald``
is allowed.  Parsing resolves defaults, so :func:`serialize` followed by
:func:`parse` reproduces the AST structurally; comments are not preserved.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field

from . import experiment
from .elements import (
    QPlateSpec,
    dove_pair_op,
    mirror_op,
    qplate_op,
    smf_filter_op,
    waveplate_op,
)
from .qstate import BipartiteState, PhotonState, apply, apply_alice, apply_bob

_TWO_PI = 2 * math.pi

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_NUMBER_RE = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?(deg)?\Z")


class ParseError(Exception):
    """Syntax or schema violation, located in the source text."""

    def __init__(self, line: int, column: int, kind: str, message: str):
        super().__init__(f"line {line}, column {column}: {message} [{kind}]")
        self.line = line
        self.column = column
        self.kind = kind
        self.message = message


class CompileError(Exception):
    """Semantically invalid bench, located by stage line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: str  # "number" or "ident"
    required: bool = False
    default: object = None
    angle: bool = False
    choices: tuple[str, ...] | None = None


@dataclass(frozen=True)
class StageSchema:
    params: tuple[ParamSpec, ...]
    default_side: str
    kind_choices: tuple[str, ...] | None = None  # bare variant token, if any
    kind_default: str | None = None


SCHEMAS: dict[str, StageSchema] = {
    "source": StageSchema(
        params=(), default_side="both", kind_choices=("spdc",), kind_default="spdc"
    ),
    "filter": StageSchema(
        params=(), default_side="bob", kind_choices=("smf",), kind_default="smf"
    ),
    "qplate": StageSchema(
        params=(
            ParamSpec("q", "number", required=True),
            ParamSpec("alpha0", "number", default=0.0, angle=True),
        ),
        default_side="bob",
    ),
    "qwp": StageSchema(
        params=(ParamSpec("theta", "number", required=True, angle=True),),
        default_side="bob",
    ),
    "hwp": StageSchema(
        params=(ParamSpec("theta", "number", required=True, angle=True),),
        default_side="bob",
    ),
    "dove": StageSchema(
        params=(ParamSpec("alpha", "number", required=True, angle=True),),
        default_side="bob",
    ),
    "mirror": StageSchema(params=(), default_side="bob"),
    "herald": StageSchema(
        params=(
            ParamSpec(
                "basis", "ident", default="H", choices=("H", "V", "L", "R")
            ),
        ),
        default_side="alice",
    ),
}

_SIDES = ("alice", "bob", "both")


@dataclass(frozen=True)
class Stage:
    """One resolved bench stage; line numbers are carried but not compared."""

    keyword: str
    params: dict
    side: str
    line: int = field(compare=False, default=0)


@dataclass(frozen=True)
class BenchAst:
    stages: tuple[Stage, ...]


def reduce_angle(value: float) -> float:
    """Canonical angle representative in (-pi, pi], stable under re-parsing."""
    r = math.remainder(value, _TWO_PI)
    return 0.0 if r == 0.0 else r  # fold -0.0


def _parse_number(token: str, line: int, column: int) -> float:
    m = _NUMBER_RE.match(token)
    if not m:
        raise ParseError(line, column, "bad-number", f"expected a number, got {token!r}")
    if m.group(3) == "deg":
        return math.radians(float(token[:-3]))
    return float(token)


def _tokenize(raw_line: str) -> list[tuple[str, int]]:
    """(token, 1-based column) pairs; text after '#' is a comment."""
    text = raw_line.split("#", 1)[0]
    out = []
    for m in re.finditer(r"\S+", text):
        out.append((m.group(), m.start() + 1))
    return out


def _parse_stage(tokens: list[tuple[str, int]], line_no: int) -> Stage:
    keyword, kw_col = tokens[0]
    schema = SCHEMAS.get(keyword)
    if schema is None:
        raise ParseError(line_no, kw_col, "unknown-keyword", f"unknown stage {keyword!r}")

    params: dict = {}
    side = None
    rest = tokens[1:]

    if rest and "=" not in rest[0][0]:
        token, col = rest[0]
        if schema.kind_choices is None:
            raise ParseError(
                line_no, col, "unknown-keyword",
                f"stage {keyword!r} takes no positional token",
            )
        if token not in schema.kind_choices:
            raise ParseError(
                line_no, col, "unknown-keyword",
                f"unknown {keyword} variant {token!r}",
            )
        params["kind"] = token
        rest = rest[1:]
    elif schema.kind_choices is not None:
        params["kind"] = schema.kind_default

    by_name = {p.name: p for p in schema.params}
    for token, col in rest:
        if "=" not in token:
            raise ParseError(
                line_no, col, "unknown-keyword",
                f"expected name=value, got bare token {token!r}",
            )
        name, value = token.split("=", 1)
        value_col = col + len(name) + 1
        if name == "side":
            if side is not None:
                raise ParseError(line_no, col, "duplicate-param", "side given twice")
            if value not in _SIDES:
                raise ParseError(
                    line_no, value_col, "unknown-keyword", f"unknown side {value!r}"
                )
            side = value
            continue
        spec = by_name.get(name)
        if spec is None:
            raise ParseError(
                line_no, col, "unknown-keyword",
                f"unknown parameter {name!r} for stage {keyword!r}",
            )
        if name in params:
            raise ParseError(
                line_no, col, "duplicate-param", f"parameter {name!r} given twice"
            )
        if spec.kind == "number":
            num = _parse_number(value, line_no, value_col)
            params[name] = reduce_angle(num) if spec.angle else num
        else:
            if not _IDENT_RE.match(value):
                raise ParseError(
                    line_no, value_col, "unknown-keyword",
                    f"expected an identifier, got {value!r}",
                )
            if spec.choices is not None and value not in spec.choices:
                raise ParseError(
                    line_no, value_col, "unknown-keyword",
                    f"{name!r} must be one of {spec.choices}, got {value!r}",
                )
            params[name] = value

    for spec in schema.params:
        if spec.name not in params:
            if spec.required:
                raise ParseError(
                    line_no, kw_col, "missing-param",
                    f"stage {keyword!r} requires parameter {spec.name!r}",
                )
            value = spec.default
            if spec.kind == "number" and spec.angle:
                value = reduce_angle(float(value))
            params[spec.name] = value

    return Stage(
        keyword=keyword,
        params=params,
        side=side if side is not None else schema.default_side,
        line=line_no,
    )


def parse(text: str) -> BenchAst:
    """Parse bench text into an AST; raises ParseError at the first fault."""
    stages = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        tokens = _tokenize(raw)
        if not tokens:
            continue
        stages.append(_parse_stage(tokens, line_no))

    if not stages:
        raise ParseError(1, 1, "missing-param", "bench has no source stage")
    if stages[0].keyword != "source":
        raise ParseError(
            stages[0].line, 1, "misplaced-stage", "first stage must be the source"
        )
    for stage in stages[1:]:
        if stage.keyword == "source":
            raise ParseError(
                stage.line, 1, "misplaced-stage", "only one source stage is allowed"
            )
    heralds = [s for s in stages if s.keyword == "herald"]
    if len(heralds) > 1:
        raise ParseError(
            heralds[1].line, 1, "misplaced-stage", "at most one herald stage is allowed"
        )
    return BenchAst(stages=tuple(stages))


def _fmt_value(value) -> str:
    if isinstance(value, str):
        return value
    return f"{float(value):.17g}"


def serialize(ast: BenchAst) -> str:
    """Canonical text form; parse(serialize(ast)) equals ast structurally."""
    lines = []
    for stage in ast.stages:
        schema = SCHEMAS[stage.keyword]
        parts = [stage.keyword]
        if schema.kind_choices is not None:
            parts.append(str(stage.params["kind"]))
        for spec in schema.params:
            parts.append(f"{spec.name}={_fmt_value(stage.params[spec.name])}")
        parts.append(f"side={stage.side}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class PipelineResult:
    """Outcome of running a bench: the prepared states and bookkeeping."""

    bipartite: BipartiteState | None
    bob: PhotonState | None
    herald_probability: float | None
    filter_weight: float
    analyzer_m: int | None


@dataclass(frozen=True)
class BenchPipeline:
    """A semantically checked bench, ready to execute."""

    ast: BenchAst
    m_max: int

    def run(self) -> PipelineResult:
        state: BipartiteState | None = None
        bob: PhotonState | None = None
        herald_prob: float | None = None
        weight = 1.0

        for stage in self.ast.stages:
            if stage.keyword == "source":
                state = experiment.spdc_source(self.m_max)
                continue
            if stage.keyword == "herald":
                outcome = experiment.herald(state, stage.params["basis"])
                bob = outcome.state
                herald_prob = outcome.probability
                continue
            op = _stage_op(stage, self.m_max)
            if bob is not None:
                bob = apply(op, bob)
                if stage.keyword == "filter":
                    w = bob.norm() ** 2
                    weight *= w
                    if w > 0:
                        bob = bob.normalize()
                continue
            if stage.side == "alice":
                state = apply_alice(op, state)
            else:
                state = apply_bob(op, state)
            if stage.keyword == "filter":
                w = state.norm() ** 2
                weight *= w
                if w > 0:
                    state = state.normalize()

        analyzer_m = None
        probe = bob if bob is not None else None
        if probe is None and state is not None:
            # Bob-side OAM support of the bipartite state.
            probe = PhotonState(self.m_max, state.matrix.sum(axis=0))
        if probe is not None and probe.norm() > 0:
            magnitudes = {abs(m) for m in probe.oam_support()}
            if len(magnitudes) == 1:
                only = magnitudes.pop()
                analyzer_m = only if only > 0 else None
        return PipelineResult(
            bipartite=state,
            bob=bob,
            herald_probability=herald_prob,
            filter_weight=weight,
            analyzer_m=analyzer_m,
        )


def _stage_op(stage: Stage, m_max: int):
    if stage.keyword == "filter":
        return smf_filter_op(m_max)
    if stage.keyword == "qplate":
        return qplate_op(QPlateSpec(stage.params["q"], stage.params["alpha0"]), m_max)
    if stage.keyword in ("qwp", "hwp"):
        return waveplate_op(stage.keyword, stage.params["theta"])
    if stage.keyword == "dove":
        return dove_pair_op(stage.params["alpha"], m_max)
    if stage.keyword == "mirror":
        return mirror_op(m_max)
    raise CompileError(stage.line, f"stage {stage.keyword!r} is not an element")


_SPIN_ONLY = ("qwp", "hwp", "mirror")


def compile_bench(ast: BenchAst, m_max: int | None = None) -> BenchPipeline:
    """Check stage semantics and fix the truncation; raises CompileError.

    The truncation defaults to the widest single-pass bound over the
    bench's q-plates.
    """
    herald_seen = False
    qplate_bounds = []
    has_filter = False
    for stage in ast.stages:
        if stage.keyword == "source":
            continue
        if stage.keyword == "herald":
            if stage.side != "alice":
                raise CompileError(stage.line, "herald must act on side=alice")
            herald_seen = True
            continue
        if stage.side == "both":
            raise CompileError(
                stage.line, f"element stage {stage.keyword!r} needs side=alice or side=bob"
            )
        if herald_seen and stage.side != "bob":
            raise CompileError(
                stage.line, "stages after the herald act on Bob's photon only"
            )
        if stage.side == "alice" and stage.keyword not in _SPIN_ONLY:
            raise CompileError(
                stage.line,
                f"{stage.keyword!r} involves OAM and cannot act on Alice's photon",
            )
        if stage.keyword == "filter":
            has_filter = True
        if stage.keyword == "qplate":
            spec = QPlateSpec(stage.params["q"], stage.params["alpha0"])
            qplate_bounds.append(experiment.default_m_max(spec.q))

    if qplate_bounds and not has_filter:
        warnings.warn(
            "bench has a q-plate but no mode filter; an ideal source carries "
            "no OAM, so the output is unchanged",
            stacklevel=2,
        )
    if m_max is None:
        m_max = max(qplate_bounds, default=2)
    return BenchPipeline(ast=ast, m_max=m_max)
