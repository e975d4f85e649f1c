"""Circuit text format: parsing, canonical printing, static validation.

The malformed fixtures in tests/data each hold exactly one defect; the
table below pins the error class, position, and message fragment the
parser must report for them.
"""

from fractions import Fraction
from pathlib import Path

import pytest

from bellsim.circuit import (
    Circuit,
    PiAngle,
    Stage,
    angle_value,
    builtin_document,
    parse_circuit,
    print_circuit,
    validate,
)
from bellsim.errors import CircuitSemanticError, CircuitSyntaxError

DATA = Path(__file__).parent / "data"


def test_builtin_round_trips_byte_for_byte():
    text = builtin_document("fig2")
    circuit = parse_circuit(text)
    assert print_circuit(circuit) == text
    assert parse_circuit(print_circuit(circuit)) == circuit


def test_custom_fixture_round_trips():
    text = (DATA / "custom_mini.circ").read_text()
    circuit = parse_circuit(text)
    assert print_circuit(circuit) == text


def test_printer_is_idempotent():
    messy = "paths  a   b\nstage   hwp  photon=A  paths=a  theta=0.5\n"
    once = print_circuit(parse_circuit(messy))
    assert print_circuit(parse_circuit(once)) == once


def test_defaults():
    circuit = parse_circuit("paths a\nstage qwp photon=A paths=a\n")
    assert circuit.lmax == 4
    assert circuit.photons == ("A", "B")
    assert circuit.description == ()


def test_leading_comments_become_description():
    text = "# first line\n# second\n\nlmax 2\npaths a\n"
    circuit = parse_circuit(text)
    assert circuit.description == ("first line", "second")
    # later comments are ignored, not appended
    text2 = "lmax 2\n# not description\npaths a\n"
    assert parse_circuit(text2).description == ()


@pytest.mark.parametrize(
    "token,coeff",
    [
        ("pi", Fraction(1)),
        ("pi/8", Fraction(1, 8)),
        ("-pi/4", Fraction(-1, 4)),
        ("3pi/4", Fraction(3, 4)),
        ("2pi", Fraction(2)),
        ("-5pi/2", Fraction(-5, 2)),
    ],
)
def test_pi_angle_grammar(token, coeff):
    circuit = parse_circuit(f"paths a\nstage hwp photon=A paths=a theta={token}\n")
    value = circuit.stages[0].params["theta"]
    assert value == PiAngle(coeff)
    assert angle_value(value) == pytest.approx(float(coeff) * 3.141592653589793)


def test_float_angles_survive():
    circuit = parse_circuit("paths a\nstage dp photon=A paths=a alpha=0.5\n")
    assert circuit.stages[0].params["alpha"] == 0.5
    assert "alpha=0.5" in print_circuit(circuit)


def test_fraction_charge_forms():
    c1 = parse_circuit("paths a b\nstage p_cos photon=A paths=a,b q=1/2\n")
    assert c1.stages[0].params["q"] == Fraction(1, 2)
    c2 = parse_circuit("paths a\nstage qp photon=A paths=a q=2\n")
    assert c2.stages[0].params["q"] == Fraction(2)
    assert "q=2" in print_circuit(c2)


def test_impl_flag_parsing_and_printing():
    text = "paths a b\nstage o_cps photon=A paths=a,b impl=decomposed\n"
    circuit = parse_circuit(text)
    assert circuit.stages[0].impl == "decomposed"
    assert "impl=decomposed" in print_circuit(circuit)
    # canonical impl is the default and is not echoed
    plain = parse_circuit("paths a b\nstage o_cps photon=A paths=a,b\n")
    assert "impl" not in print_circuit(plain)


def test_impl_not_allowed_on_primitives():
    with pytest.raises(CircuitSyntaxError):
        parse_circuit("paths a\nstage qwp photon=A paths=a impl=decomposed\n")


def test_comments_and_blank_lines_ignored():
    text = (
        "paths a b   # declares\n"
        "\n"
        "stage qwp photon=A paths=a  # quarter wave\n"
    )
    circuit = parse_circuit(text)
    assert circuit.paths == ("a", "b")
    assert len(circuit.stages) == 1


# -- malformed fixture corpus -------------------------------------------

FIXTURES = [
    ("unknown_directive.circ", CircuitSyntaxError, 3, 1, "unknown directive 'lmx'"),
    ("bad_lmax_value.circ", CircuitSyntaxError, 1, 6, "bad integer"),
    ("duplicate_paths.circ", CircuitSemanticError, 3, 1, "duplicate paths"),
    ("missing_stage_kind.circ", CircuitSyntaxError, 2, 6, "missing stage kind"),
    ("unknown_stage_kind.circ", CircuitSyntaxError, 2, 7, "unknown stage kind 'warp'"),
    ("unknown_key.circ", CircuitSyntaxError, 2, 39, "unknown key 'spin'"),
    ("undeclared_path.circ", CircuitSemanticError, 2, 26, "path 'zz' is not declared"),
    ("bad_angle.circ", CircuitSyntaxError, 2, 34, "bad angle 'fast'"),
    ("fractional_charge.circ", CircuitSemanticError, 2, 1, "half-integer"),
    ("same_path_twice.circ", CircuitSemanticError, 2, 1, "same path twice"),
]


@pytest.mark.parametrize("name,exc,line,column,fragment", FIXTURES)
def test_malformed_fixture(name, exc, line, column, fragment):
    text = (DATA / name).read_text()
    with pytest.raises(exc) as info:
        parse_circuit(text)
    err = info.value
    assert err.line == line
    assert err.column == column
    assert fragment in str(err)
    assert f"line {line}, column {column}" in str(err)


@pytest.mark.parametrize(
    "text,exc,fragment",
    [
        ("paths a\nstage hwp photon=A paths=a theta=pi/8 theta=pi/4\n", CircuitSyntaxError, "duplicate key"),
        ("photon B\n", CircuitSemanticError, "photon B declared before photon A"),
        ("photon A\nphoton A\n", CircuitSemanticError, "duplicate photon"),
        ("paths a\nstage hwp paths=a theta=pi/8\n", CircuitSyntaxError, "missing required key photon="),
        ("paths a\nstage hwp photon=A theta=pi/8\n", CircuitSyntaxError, "missing required key paths="),
        ("paths a\nstage hwp photon=A paths=a\n", CircuitSyntaxError, "missing required key theta="),
        ("paths a\nstage hwp photon=C paths=a theta=0\n", CircuitSemanticError, "unknown photon 'C'"),
        ("paths 9lives\n", CircuitSyntaxError, "bad path label '9lives'"),
        ("lmax 0\n", CircuitSemanticError, "lmax must be >= 1"),
        ("paths a\nstage sppm photon=A paths=a,a\n", CircuitSemanticError, "exactly one path"),
        ("paths a b c\nstage o_cps photon=A paths=a,b,c\n", CircuitSemanticError, "exactly two paths"),
        ("paths a\nstage pp photon=A paths=a phi=pi pol=Q\n", CircuitSemanticError, "bad polarization"),
        ("paths a b\nstage o_cps photon=A paths=a,b impl=fast\n", CircuitSemanticError, "bad impl"),
        ("paths a\nstage hwp photon=A paths=a theta\n", CircuitSyntaxError, "expected key=value"),
    ],
)
def test_inline_malformed(text, exc, fragment):
    with pytest.raises(exc) as info:
        parse_circuit(text)
    assert fragment in str(info.value)
    assert info.value.line >= 1


def test_empty_fixture_parses():
    circuit = parse_circuit((DATA / "empty.circ").read_text())
    assert all(s.kind == "sppm" for s in circuit.stages)
    assert len(circuit.stages) == 4


# -- static validation --------------------------------------------------


def test_validate_builtin_is_clean_with_notes():
    report = validate(parse_circuit(builtin_document("fig2")))
    assert report.ok
    severities = [i.severity for i in report.issues]
    assert "error" not in severities
    notes = [str(i) for i in report.issues if i.severity == "note"]
    assert any("o_cps" in n for n in notes)
    assert any("oh" in n for n in notes)
    assert any("'c'" in n for n in notes) and any("'d'" in n for n in notes)


def test_validate_flags_oam_overflow():
    circuit = parse_circuit(
        "lmax 4\npaths w\n"
        "stage spp photon=A paths=w l=4\n"
        "stage spp photon=A paths=w l=4\n"
    )
    report = validate(circuit)
    assert not report.ok
    errors = [i for i in report.issues if i.severity == "error"]
    assert len(errors) == 1
    assert errors[0].stage_index == 1
    assert "outside lmax=4" in errors[0].message


def test_validate_warns_sorter_domain():
    circuit = parse_circuit(
        "paths a b\nstage oam_sorter photon=A paths=a,b\n"
    )
    report = validate(circuit)
    warnings = [i for i in report.issues if i.severity == "warning"]
    assert warnings and "outside +1/-1" in warnings[0].message
    assert report.ok  # warnings do not fail validation


def test_validate_tracks_shifts_through_prisms():
    # spp(+2) then mirror then spp(+2): -2 + 2 = 0, never overflows at lmax 2
    circuit = parse_circuit(
        "lmax 2\npaths w\n"
        "stage spp photon=A paths=w l=2\n"
        "stage mirror photon=A paths=w\n"
        "stage spp photon=A paths=w l=2\n"
    )
    assert validate(circuit).ok


def test_validate_qp_split_both_branches():
    # from l=0 a q=3/2 plate reaches +-3; a further +2 shift breaks lmax 4
    circuit = parse_circuit(
        "lmax 4\npaths w\n"
        "stage qp photon=A paths=w q=3/2\n"
        "stage spp photon=A paths=w l=2\n"
    )
    report = validate(circuit)
    assert not report.ok
    assert any(
        i.severity == "error" and i.stage_index == 1 for i in report.issues
    )


def test_stage_header_and_programmatic_circuit():
    stage = Stage("hwp", "A", ("u",), {"theta": PiAngle(Fraction(1, 8))})
    circuit = Circuit(lmax=2, paths=("u",), stages=(stage,))
    assert "hwp photon=A paths=u" == stage.header()
    assert "theta=pi/8" in print_circuit(circuit)
