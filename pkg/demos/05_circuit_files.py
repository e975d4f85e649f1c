"""Working with circuit description files.

The analyzer circuit is data, not code: a small line-oriented text
format with directives (lmax, paths) and stage lines.  This script
builds a document from scratch, round-trips it through the parser and
printer, runs the static validator, and shows what the diagnostics look
like when a document is broken.
"""

from bellsim import (
    CircuitSemanticError,
    CircuitSyntaxError,
    builtin_document,
    parse_circuit,
    print_circuit,
    validate,
)

DOC = """\
# a toy two-path document
lmax 2
paths a b
stage spp photon=A paths=a l=1
stage bs photon=A paths=a,b
stage dp photon=A paths=b alpha=pi/4
stage bs photon=A paths=a,b
stage spp photon=A paths=a l=-1
"""

BROKEN = [
    ("misspelled directive", "lmax 2\npaths a\nstag spp photon=A paths=a l=1\n"),
    ("unknown stage kind", "lmax 2\npaths a\nstage warp photon=A paths=a\n"),
    ("undeclared path", "lmax 2\npaths a\nstage spp photon=A paths=q l=1\n"),
    ("bad angle token", "lmax 2\npaths a\nstage dp photon=A paths=a alpha=soon\n"),
    (
        "fractional q-plate charge",
        "lmax 2\npaths a\nstage qp photon=A paths=a q=1/3\n",
    ),
]


def main():
    print("== parse and round-trip ==")
    circuit = parse_circuit(DOC)
    print(f"  stages: {len(circuit.stages)}")
    print(f"  mode-space dimension: {circuit.space().dimension}")
    echoed = print_circuit(circuit)
    print(f"  printer reproduces the source byte-for-byte: {echoed == DOC}\n")

    print("== static validation ==")
    report = validate(circuit)
    print(f"  ok: {report.ok}")
    for issue in report.issues:
        print(f"  [{issue.severity}] stage {issue.stage_index}: {issue.message}")
    print()

    print("== diagnostics for broken documents ==")
    for title, text in BROKEN:
        try:
            parse_circuit(text)
        except (CircuitSyntaxError, CircuitSemanticError) as exc:
            print(f"  {title}:")
            print(f"    {type(exc).__name__}: {exc}")
    print()

    print("== the built-in analyzer circuit ==")
    print(builtin_document("fig2"))


if __name__ == "__main__":
    main()
