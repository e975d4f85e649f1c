"""Circuit model, line-oriented text format, and static validation.

A circuit document is UTF-8 text:

    # leading comment lines become the circuit description
    lmax 4
    photon A
    photon B
    paths a1 a2 b1 b2 c d
    stage p_cos photon=A paths=a1,b1 q=1/2
    stage sppm photon=A paths=a1

Directives may be preceded/followed by blank lines and ``#`` comments.
``lmax`` (default 4) and the two ``photon`` lines (default A, B) are
optional; ``paths`` must precede any stage that uses them. Stage lines
take ``photon=`` and ``paths=`` plus kind-specific ``key=value`` pairs;
unknown kinds and unknown keys are rejected with a line/column diagnostic.

Angles are written either as decimal numbers or as rational multiples of
pi (``pi/8``, ``-pi/4``, ``3pi/4``); the pi forms are preserved exactly
and round-trip through the canonical printer.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple

from .errors import CircuitSemanticError, CircuitSyntaxError
from .state import DEFAULT_LMAX, ModeSpace

__all__ = [
    "PiAngle",
    "angle_value",
    "Stage",
    "Circuit",
    "parse_circuit",
    "print_circuit",
    "ValidationIssue",
    "ValidationReport",
    "validate",
    "BUILTIN_CIRCUITS",
    "builtin_document",
    "FIG2_NAME",
]

PHOTONS = ("A", "B")

PRIMITIVE_KINDS = ("qwp", "hwp", "qp", "spp", "dp", "pp", "mirror", "bs", "pbs", "oam_sorter", "dl")
COMPOSITE_KINDS = ("p_cos", "o_cps", "oh", "dp_stage", "sppm")
STAGE_KINDS = PRIMITIVE_KINDS + COMPOSITE_KINDS

#: value-type tag and required flag per stage kind and key
_SCHEMA: dict[str, dict[str, tuple[str, bool]]] = {
    "qwp": {},
    "hwp": {"theta": ("angle", True)},
    "qp": {"q": ("fraction", True)},
    "spp": {"l": ("int", True)},
    "dp": {"alpha": ("angle", True)},
    "pp": {"phi": ("angle", True), "pol": ("pol", False), "oam": ("int", False)},
    "mirror": {},
    "bs": {},
    "pbs": {},
    "oam_sorter": {},
    "dl": {},
    "p_cos": {"q": ("fraction", False)},
    "o_cps": {},
    "oh": {},
    "dp_stage": {},
    "sppm": {},
}

#: canonical key print order per kind (impl is appended when non-default)
_KEY_ORDER: dict[str, tuple[str, ...]] = {
    "hwp": ("theta",),
    "qp": ("q",),
    "spp": ("l",),
    "dp": ("alpha",),
    "pp": ("phi", "pol", "oam"),
    "p_cos": ("q",),
}

_TWO_PATH_KINDS = {"bs", "pbs", "oam_sorter", "o_cps"}
_ONE_PATH_KINDS = {"sppm"}


class PiAngle(NamedTuple):
    """An angle stored exactly as a rational multiple of pi."""

    coeff: Fraction


def angle_value(value) -> float:
    """Numeric value (radians) of an angle parameter."""
    import math

    if isinstance(value, PiAngle):
        return float(value.coeff) * math.pi
    return float(value)


@dataclass(frozen=True)
class Stage:
    """One placed stage of a circuit."""

    kind: str
    photon: str
    paths: tuple[str, ...]
    params: dict = field(default_factory=dict)
    impl: str = "canonical"
    line: int = 0

    def header(self) -> str:
        return f"{self.kind} photon={self.photon} paths={','.join(self.paths)}"


@dataclass(frozen=True)
class Circuit:
    """Parsed circuit: declarations plus the ordered stage list."""

    lmax: int
    paths: tuple[str, ...]
    stages: tuple[Stage, ...]
    photons: tuple[str, str] = PHOTONS
    description: tuple[str, ...] = ()

    def space(self) -> ModeSpace:
        return ModeSpace(self.lmax, self.paths)

    def sppm_stages(self) -> list[Stage]:
        return [s for s in self.stages if s.kind == "sppm"]


# -- parsing ------------------------------------------------------------

_TOKEN_RE = re.compile(r"\S+")
_PATH_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")
_PI_RE = re.compile(r"^([+-]?)(\d+)?pi(?:/(\d+))?$")


def _tokens(line: str) -> list[tuple[str, int]]:
    """Non-space tokens with their 1-based start columns, comment stripped."""
    cut = line.find("#")
    if cut >= 0:
        line = line[:cut]
    return [(m.group(0), m.start() + 1) for m in _TOKEN_RE.finditer(line)]


def _parse_value(tag: str, text: str, lineno: int, col: int):
    if tag == "angle":
        m = _PI_RE.match(text)
        if m:
            sign = -1 if m.group(1) == "-" else 1
            num = int(m.group(2)) if m.group(2) else 1
            den = int(m.group(3)) if m.group(3) else 1
            if den == 0:
                raise CircuitSemanticError("zero denominator in angle", lineno, col)
            return PiAngle(Fraction(sign * num, den))
        try:
            return float(text)
        except ValueError:
            raise CircuitSyntaxError(
                f"bad angle {text!r}; expected a number or a pi fraction like pi/8",
                lineno,
                col,
            ) from None
    if tag == "fraction":
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise CircuitSyntaxError(
                f"bad fraction {text!r}; expected forms like 1/2 or 2", lineno, col
            ) from None
    if tag == "int":
        try:
            return int(text)
        except ValueError:
            raise CircuitSyntaxError(
                f"bad integer {text!r}", lineno, col
            ) from None
    if tag == "pol":
        if text not in ("H", "V"):
            raise CircuitSemanticError(
                f"bad polarization {text!r}; expected H or V", lineno, col
            )
        return text
    if tag == "impl":
        if text not in ("canonical", "decomposed"):
            raise CircuitSemanticError(
                f"bad impl {text!r}; expected canonical or decomposed", lineno, col
            )
        return text
    raise AssertionError(tag)  # pragma: no cover


def _format_value(value) -> str:
    if isinstance(value, PiAngle):
        coeff = value.coeff
        if coeff == 0:
            return "0"
        sign = "-" if coeff < 0 else ""
        coeff = abs(coeff)
        num = "" if coeff.numerator == 1 else str(coeff.numerator)
        den = "" if coeff.denominator == 1 else f"/{coeff.denominator}"
        return f"{sign}{num}pi{den}"
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_stage(tokens: list[tuple[str, int]], lineno: int, declared: tuple[str, ...]) -> Stage:
    if len(tokens) < 2:
        raise CircuitSyntaxError(
            "missing stage kind; expected one of: " + ", ".join(STAGE_KINDS),
            lineno,
            tokens[0][1] + len(tokens[0][0]),
        )
    kind, kind_col = tokens[1]
    if kind not in STAGE_KINDS:
        raise CircuitSyntaxError(
            f"unknown stage kind {kind!r}; expected one of: " + ", ".join(STAGE_KINDS),
            lineno,
            kind_col,
        )
    schema = _SCHEMA[kind]
    allow_impl = kind in COMPOSITE_KINDS
    allowed = set(schema) | {"photon", "paths"} | ({"impl"} if allow_impl else set())

    photon: str | None = None
    paths: tuple[str, ...] | None = None
    params: dict = {}
    impl = "canonical"
    seen: set[str] = set()

    for text, col in tokens[2:]:
        if "=" not in text:
            raise CircuitSyntaxError(
                f"expected key=value, got {text!r}", lineno, col
            )
        key, _, raw = text.partition("=")
        val_col = col + len(key) + 1
        if key not in allowed:
            raise CircuitSyntaxError(
                f"unknown key {key!r} for stage {kind}; expected one of: "
                + ", ".join(sorted(allowed)),
                lineno,
                col,
            )
        if key in seen:
            raise CircuitSyntaxError(f"duplicate key {key!r}", lineno, col)
        seen.add(key)
        if key == "photon":
            if raw not in PHOTONS:
                raise CircuitSemanticError(
                    f"unknown photon {raw!r}; expected A or B", lineno, val_col
                )
            photon = raw
        elif key == "paths":
            parts = raw.split(",")
            if any(not p for p in parts):
                raise CircuitSyntaxError(
                    f"bad path list {raw!r}; expected comma-separated labels",
                    lineno,
                    val_col,
                )
            for p in parts:
                if p not in declared:
                    raise CircuitSemanticError(
                        f"path {p!r} is not declared (declared: {', '.join(declared) or 'none'})",
                        lineno,
                        val_col,
                    )
            paths = tuple(parts)
        elif key == "impl":
            impl = _parse_value("impl", raw, lineno, val_col)
        else:
            params[key] = _parse_value(schema[key][0], raw, lineno, val_col)

    if photon is None:
        raise CircuitSyntaxError("missing required key photon=", lineno, tokens[0][1])
    if paths is None:
        raise CircuitSyntaxError("missing required key paths=", lineno, tokens[0][1])
    for key, (_, required) in schema.items():
        if required and key not in params:
            raise CircuitSyntaxError(
                f"missing required key {key}= for stage {kind}", lineno, tokens[0][1]
            )

    if kind in _TWO_PATH_KINDS and len(paths) != 2:
        raise CircuitSemanticError(
            f"stage {kind} needs exactly two paths, got {len(paths)}", lineno, tokens[0][1]
        )
    if kind in _TWO_PATH_KINDS and paths[0] == paths[1]:
        raise CircuitSemanticError(
            f"stage {kind} placed on the same path twice ({paths[0]})", lineno, tokens[0][1]
        )
    if kind in _ONE_PATH_KINDS and len(paths) != 1:
        raise CircuitSemanticError(
            f"stage {kind} needs exactly one path, got {len(paths)}", lineno, tokens[0][1]
        )
    if kind in ("qp", "p_cos"):
        q = params.get("q", Fraction(1, 2))
        if (2 * Fraction(q)).denominator != 1:
            raise CircuitSemanticError(
                f"q must be an integer or half-integer, got {q}", lineno, tokens[0][1]
            )

    return Stage(kind, photon, paths, params, impl, lineno)


def parse_circuit(text: str) -> Circuit:
    """Parse a circuit document.

    Raises:
        CircuitSyntaxError: token-level problems, with line/column and the
            expected tokens.
        CircuitSemanticError: well-formed lines with invalid content
            (undeclared path, unknown photon, out-of-range parameter).
    """
    lmax: int | None = None
    paths: tuple[str, ...] | None = None
    photons_seen: list[str] = []
    stages: list[Stage] = []
    description: list[str] = []
    in_preamble = True

    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if in_preamble and stripped.startswith("#"):
            description.append(stripped.lstrip("#").strip())
            continue
        toks = _tokens(line)
        if not toks:
            continue
        in_preamble = False
        head, head_col = toks[0]

        if head == "lmax":
            if lmax is not None:
                raise CircuitSemanticError("duplicate lmax directive", lineno, head_col)
            if len(toks) != 2:
                raise CircuitSyntaxError("expected: lmax <positive integer>", lineno, head_col)
            value = _parse_value("int", toks[1][0], lineno, toks[1][1])
            if value < 1:
                raise CircuitSemanticError("lmax must be >= 1", lineno, toks[1][1])
            lmax = value
        elif head == "photon":
            if len(toks) != 2:
                raise CircuitSyntaxError("expected: photon <A|B>", lineno, head_col)
            label, col = toks[1]
            if label not in PHOTONS:
                raise CircuitSemanticError(
                    f"unknown photon {label!r}; expected A or B", lineno, col
                )
            if label in photons_seen:
                raise CircuitSemanticError(f"duplicate photon {label}", lineno, col)
            if label == "B" and "A" not in photons_seen:
                raise CircuitSemanticError("photon B declared before photon A", lineno, col)
            photons_seen.append(label)
        elif head == "paths":
            if paths is not None:
                raise CircuitSemanticError("duplicate paths directive", lineno, head_col)
            if len(toks) < 2:
                raise CircuitSyntaxError("expected: paths <label> [<label> ...]", lineno, head_col)
            labels = []
            for text_tok, col in toks[1:]:
                if not _PATH_RE.match(text_tok):
                    raise CircuitSyntaxError(
                        f"bad path label {text_tok!r}; expected letters/digits/underscore",
                        lineno,
                        col,
                    )
                if text_tok in labels:
                    raise CircuitSemanticError(
                        f"duplicate path label {text_tok!r}", lineno, col
                    )
                labels.append(text_tok)
            paths = tuple(labels)
        elif head == "stage":
            stages.append(_parse_stage(toks, lineno, paths or ()))
        else:
            raise CircuitSyntaxError(
                f"unknown directive {head!r}; expected one of: lmax, photon, paths, stage",
                lineno,
                head_col,
            )

    while description and not description[-1]:
        description.pop()
    return Circuit(
        lmax=lmax if lmax is not None else DEFAULT_LMAX,
        paths=paths or (),
        stages=tuple(stages),
        description=tuple(description),
    )


# -- canonical printing -------------------------------------------------


def print_circuit(circuit: Circuit) -> str:
    """Canonical serialization; parse(print(parse(x))) == parse(x)."""
    out: list[str] = []
    for line in circuit.description:
        out.append(f"# {line}" if line else "#")
    out.append(f"lmax {circuit.lmax}")
    for photon in circuit.photons:
        out.append(f"photon {photon}")
    if circuit.paths:
        out.append("paths " + " ".join(circuit.paths))
    for stage in circuit.stages:
        parts = [f"stage {stage.kind}", f"photon={stage.photon}", f"paths={','.join(stage.paths)}"]
        order = _KEY_ORDER.get(stage.kind, tuple(sorted(_SCHEMA[stage.kind])))
        for key in order:
            if key in stage.params:
                parts.append(f"{key}={_format_value(stage.params[key])}")
        for key in sorted(stage.params):
            if key not in order:
                parts.append(f"{key}={_format_value(stage.params[key])}")
        if stage.impl != "canonical":
            parts.append(f"impl={stage.impl}")
        out.append(" ".join(parts))
    return "\n".join(out) + "\n"


# -- static validation --------------------------------------------------


@dataclass(frozen=True)
class ValidationIssue:
    severity: str  # "error" | "warning" | "note"
    stage_index: int | None
    message: str

    def __str__(self) -> str:
        where = f"stage {self.stage_index + 1}: " if self.stage_index is not None else ""
        return f"{self.severity}: {where}{self.message}"


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[ValidationIssue, ...]

    @property
    def ok(self) -> bool:
        return not any(i.severity == "error" for i in self.issues)

    def __str__(self) -> str:
        if not self.issues:
            return "validation: clean"
        return "\n".join(str(i) for i in self.issues)


_SIGN_DOMAIN_KINDS = {"o_cps", "oh", "oam_sorter", "sppm"}


def validate(circuit: Circuit) -> ValidationReport:
    """Static checks: placements, and OAM bounds for the reference inputs.

    The OAM analysis tracks the set of reachable OAM values per
    (photon, path), starting from l=0 on every declared path (the
    analyzer's input class), and flags any stage that could push an index
    past the bound or feed a sign-domain device outside l=+1/-1.
    Never raises; problems are returned as issues.
    """
    issues: list[ValidationIssue] = []
    declared = set(circuit.paths)

    reach: dict[tuple[str, str], set[int]] = {
        (photon, path): {0} for photon in circuit.photons for path in circuit.paths
    }

    def shift_set(vals: set[int], by: int, idx: int, what: str) -> set[int]:
        out = set()
        for v in vals:
            n = v + by
            if abs(n) > circuit.lmax:
                issues.append(
                    ValidationIssue(
                        "error",
                        idx,
                        f"{what} drives OAM {v:+d} to {n:+d}, outside lmax={circuit.lmax}",
                    )
                )
            else:
                out.add(n)
        return out or vals

    for idx, stage in enumerate(circuit.stages):
        for p in stage.paths:
            if p not in declared:
                issues.append(
                    ValidationIssue("error", idx, f"path {p!r} is not declared")
                )
        if stage.photon not in circuit.photons:
            issues.append(
                ValidationIssue("error", idx, f"photon {stage.photon!r} is not declared")
            )
        if stage.kind in _TWO_PATH_KINDS and len(stage.paths) == 2 and stage.paths[0] == stage.paths[1]:
            issues.append(
                ValidationIssue("error", idx, f"{stage.kind} placed twice on {stage.paths[0]!r}")
            )
        if any(p not in declared for p in stage.paths) or stage.photon not in circuit.photons:
            continue

        keys = [(stage.photon, p) for p in stage.paths]
        if stage.kind in ("mirror", "dp", "dp_stage"):
            for k in keys:
                reach[k] = {-v for v in reach[k]}
        elif stage.kind == "spp":
            for k in keys:
                reach[k] = shift_set(reach[k], int(stage.params["l"]), idx, "spiral plate")
        elif stage.kind in ("qp", "p_cos"):
            q = Fraction(stage.params.get("q", Fraction(1, 2)))
            s = int(2 * q)
            for k in keys:
                up = shift_set(reach[k], s, idx, stage.kind)
                down = shift_set(reach[k], -s, idx, stage.kind)
                reach[k] = up | down
        elif stage.kind in ("bs", "pbs"):
            union = reach[keys[0]] | reach[keys[1]]
            reach[keys[0]] = reach[keys[1]] = set(union)
        elif stage.kind in ("o_cps", "oam_sorter"):
            a, b = keys
            bad = (reach[a] | reach[b]) - {1, -1}
            if bad:
                issues.append(
                    ValidationIssue(
                        "warning",
                        idx,
                        f"{stage.kind} may receive OAM outside +1/-1 "
                        f"({sorted(bad)}) for the reference inputs",
                    )
                )
            new_a = ({1} & reach[a]) | ({-1} & reach[b]) | bad
            new_b = ({1} & reach[b]) | ({-1} & reach[a]) | bad
            reach[a], reach[b] = new_a or reach[a], new_b or reach[b]
            issues.append(
                ValidationIssue(
                    "note", idx, f"{stage.kind} domain restricted to l=+1/-1"
                )
            )
        elif stage.kind == "oh":
            for k in keys:
                bad = reach[k] - {1, -1}
                if bad:
                    issues.append(
                        ValidationIssue(
                            "warning",
                            idx,
                            f"oh may receive OAM outside +1/-1 ({sorted(bad)}) "
                            "for the reference inputs",
                        )
                    )
                reach[k] = (reach[k] & {1, -1}) | {1, -1} if reach[k] & {1, -1} else reach[k]
            issues.append(ValidationIssue("note", idx, "oh domain restricted to l=+1/-1"))
        elif stage.kind == "sppm":
            bad = reach[keys[0]] - {1, -1}
            if bad:
                issues.append(
                    ValidationIssue(
                        "warning",
                        idx,
                        f"sppm may receive OAM outside +1/-1 ({sorted(bad)}) "
                        "for the reference inputs",
                    )
                )
        # qwp/hwp/pp/dl leave OAM untouched

    used = {p for s in circuit.stages for p in s.paths}
    for p in circuit.paths:
        if p not in used:
            issues.append(
                ValidationIssue(
                    "note",
                    None,
                    f"path {p!r} is declared but not used by any stage "
                    "(reserved for measurement internals)",
                )
            )
    return ValidationReport(tuple(issues))


# -- built-in circuits --------------------------------------------------

FIG2_NAME = "fig2"

_FIG2_TEXT = """\
# Deterministic polarization Bell-state analyzer over OAM and path modes.
# Photon A enters on a1/b1 and photon B on a2/b2; paths c and d are
# reserved for the measurement blocks and carry no light before them.
lmax 4
photon A
photon B
paths a1 a2 b1 b2 c d
stage p_cos photon=A paths=a1,b1 q=1/2
stage p_cos photon=B paths=a2,b2 q=1/2
stage o_cps photon=A paths=a1,b1
stage o_cps photon=B paths=a2,b2
stage dp_stage photon=B paths=a2,b2
stage oh photon=A paths=a1,b1
stage oh photon=B paths=a2,b2
stage hwp photon=A paths=a1,b1 theta=pi/8
stage hwp photon=B paths=a2,b2 theta=pi/8
stage sppm photon=A paths=a1
stage sppm photon=A paths=b1
stage sppm photon=B paths=a2
stage sppm photon=B paths=b2
"""

BUILTIN_CIRCUITS: dict[str, str] = {FIG2_NAME: _FIG2_TEXT}


def builtin_document(name: str) -> str:
    """Text of a built-in circuit document (KeyError if unknown)."""
    return BUILTIN_CIRCUITS[name]
