"""Composite gates: canonical truth tables, decompositions, calibration.

Every decomposition must reproduce its canonical gate column-for-column
at 1e-12, up to one global unit scale (which turns out to be exactly 1
for all three).  The solved router calibration phases are frozen here so
a regression in the solver shows up as a value change, not just a pass.
"""

import cmath
import math
from fractions import Fraction

import numpy as np
import pytest

from bellsim.elements import apply_element, apply_elements, element_column
from bellsim.errors import CalibrationFailure, UnsortableOam
from bellsim.gates import (
    apply_oam_flip,
    apply_oam_hadamard,
    apply_path_router,
    apply_pol_shift,
    gate_equiv,
    hadamard_row_report,
    oam_flip_decomposition,
    oam_hadamard_decomposition,
    path_router_decomposition,
    path_router_stage_groups,
    pol_shift_decomposition,
    solve_calibration,
    path_router_column,
)
from bellsim.state import (
    BasisMode,
    ModeSpace,
    PhotonState,
    basis_state,
    max_amplitude_difference,
)

SPACE = ModeSpace(lmax=4, paths=("a", "b"))
TOL = 1e-12

SIGN_DOMAIN = [
    BasisMode(pol, oam, path)
    for path in ("a", "b")
    for oam in (1, -1)
    for pol in ("H", "V")
]


# -- canonical truth tables ---------------------------------------------


@pytest.mark.parametrize("pol,sign", [("H", 1), ("V", -1)])
def test_pol_shift_truth_table(pol, sign):
    """H gains 2q quanta, V loses 2q, polarization untouched."""
    for l0 in (-2, 0, 2):
        out = apply_pol_shift(basis_state(SPACE, pol, l0, "a"), Fraction(1, 2), "a")
        assert abs(out.amplitude(BasisMode(pol, l0 + sign, "a")) - 1.0) < TOL


def test_path_router_truth_table():
    for pol in ("H", "V"):
        keep = apply_path_router(basis_state(SPACE, pol, 1, "a"), "a", "b")
        assert abs(keep.amplitude(BasisMode(pol, 1, "a")) - 1.0) < TOL
        cross = apply_path_router(basis_state(SPACE, pol, -1, "a"), "a", "b")
        assert abs(cross.amplitude(BasisMode(pol, -1, "b")) - 1.0) < TOL
        back = apply_path_router(basis_state(SPACE, pol, -1, "b"), "a", "b")
        assert abs(back.amplitude(BasisMode(pol, -1, "a")) - 1.0) < TOL


def test_path_router_rejects_other_oam():
    with pytest.raises(UnsortableOam):
        apply_path_router(basis_state(SPACE, "H", 0, "a"), "a", "b")


def test_oam_hadamard_truth_table():
    s = 1 / math.sqrt(2)
    plus = apply_oam_hadamard(basis_state(SPACE, "H", 1, "a"), "a")
    assert abs(plus.amplitude(BasisMode("H", 1, "a")) - s) < TOL
    assert abs(plus.amplitude(BasisMode("H", -1, "a")) - s) < TOL
    minus = apply_oam_hadamard(basis_state(SPACE, "H", -1, "a"), "a")
    assert abs(minus.amplitude(BasisMode("H", 1, "a")) - s) < TOL
    assert abs(minus.amplitude(BasisMode("H", -1, "a")) + s) < TOL


def test_oam_hadamard_is_involutive_on_domain():
    for mode in SIGN_DOMAIN:
        st = basis_state(SPACE, *mode)
        out = apply_oam_hadamard(apply_oam_hadamard(st, ("a", "b")), ("a", "b"))
        assert max_amplitude_difference(out, st) < TOL


def test_oam_flip_truth_table():
    for l0 in (-3, -1, 0, 2):
        out = apply_oam_flip(basis_state(SPACE, "V", l0, "a"), "a")
        assert abs(out.amplitude(BasisMode("V", -l0, "a")) - 1.0) < TOL


# -- decompositions -----------------------------------------------------


def _apply_seq(elements):
    def run(state):
        return apply_elements(state, elements)

    return run


def test_pol_shift_decomposition_matches():
    elements = pol_shift_decomposition(Fraction(1, 2), ("a", "b"))
    domain = [
        BasisMode(pol, oam, path)
        for path in ("a", "b")
        for oam in (-2, -1, 0, 1, 2)
        for pol in ("H", "V")
    ]
    report = gate_equiv(
        lambda s: apply_pol_shift(s, Fraction(1, 2), ("a", "b")),
        _apply_seq(elements),
        SPACE,
        domain,
        tol=TOL,
    )
    assert report.equivalent, str(report)
    assert report.scale == pytest.approx(1.0 + 0.0j, abs=1e-12)


def test_router_decomposition_matches():
    elements, phases = path_router_decomposition("a", "b", SPACE)
    report = gate_equiv(
        lambda s: apply_path_router(s, "a", "b"),
        _apply_seq(elements),
        SPACE,
        SIGN_DOMAIN,
        tol=TOL,
    )
    assert report.equivalent, str(report)
    assert report.scale == pytest.approx(1.0 + 0.0j, abs=1e-12)


def test_router_calibration_phases_frozen():
    """Solved per-(path, OAM) correction phases, pinned as unit complexes."""
    _, phases = path_router_decomposition("a", "b", SPACE)
    expect = {
        ("a", 1): -1.0,  # e^{+-i pi}
        ("a", -1): -1.0j,  # e^{-i pi/2}
        ("b", 1): 1.0,
        ("b", -1): -1.0j,
    }
    assert set(phases) == set(expect)
    for key, ref in expect.items():
        assert cmath.exp(1j * phases[key]) == pytest.approx(ref, abs=1e-9)


def test_router_walkthrough_routes_components():
    """Midway through the interferometer the routing is already done:
    after the second beam splitter each input component sits on exactly
    one path, l=+1 inputs (lifted to +2) on their own path and l=-1
    inputs (at 0) on the other, up to a per-component phase."""
    groups = path_router_stage_groups("a", "b")
    upto_second_bs = [e for _, els in groups[:6] for e in els]
    for pol in ("H", "V"):
        for path, oam, want_path, want_oam in [
            ("a", 1, "a", 2),
            ("a", -1, "b", 0),
            ("b", 1, "b", 2),
            ("b", -1, "a", 0),
        ]:
            out = apply_elements(basis_state(SPACE, pol, oam, path), upto_second_bs)
            assert len(out.amplitudes) == 1, f"{pol},{oam},{path} not routed"
            (mode, amp), = out.amplitudes.items()
            assert mode == BasisMode(pol, want_oam, want_path)
            assert abs(abs(amp) - 1.0) < TOL


def test_router_calibration_failure_on_wrong_elements():
    groups = path_router_stage_groups("a", "b")
    # drop the arm prisms: the interferometer no longer routes cleanly
    broken = [e for name, els in groups if name != "arm dove prisms" for e in els]
    with pytest.raises(CalibrationFailure):
        solve_calibration(
            broken, path_router_column("a", "b"), SIGN_DOMAIN, SPACE
        )


def test_oam_hadamard_decomposition_matches():
    big = SPACE.extended(("anc",))
    elements = oam_hadamard_decomposition("a", "anc")
    domain = [BasisMode(pol, oam, "a") for oam in (1, -1) for pol in ("H", "V")]
    report = gate_equiv(
        lambda s: apply_oam_hadamard(s, "a"),
        _apply_seq(elements),
        big,
        domain,
        tol=TOL,
    )
    assert report.equivalent, str(report)
    assert report.scale == pytest.approx(1.0 + 0.0j, abs=1e-12)


def test_oam_hadamard_decomposition_leaves_ancilla_empty():
    big = SPACE.extended(("anc",))
    elements = oam_hadamard_decomposition("a", "anc")
    rng = np.random.default_rng(21)
    domain = [BasisMode(pol, oam, "a") for oam in (1, -1) for pol in ("H", "V")]
    for _ in range(20):
        vec = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        vec /= np.linalg.norm(vec)
        st = PhotonState(big, dict(zip(domain, map(complex, vec))))
        out = apply_elements(st, elements)
        on_ancilla = sum(
            abs(a) ** 2 for m, a in out.amplitudes.items() if m.path == "anc"
        )
        assert on_ancilla < 1e-24


def test_oam_flip_decomposition_exact_on_correlated_sector():
    """On the sector the analyzer feeds it (H at l=+1, V at l=-1, and the
    flipped images), prism + V-plate equals the phase-free flip."""
    elements = oam_flip_decomposition("a")
    sector = [BasisMode("H", 1, "a"), BasisMode("V", -1, "a")]
    report = gate_equiv(
        lambda s: apply_oam_flip(s, "a"),
        _apply_seq(elements),
        SPACE,
        sector,
        tol=TOL,
    )
    assert report.equivalent, str(report)
    assert report.scale == pytest.approx(1.0 + 0.0j, abs=1e-12)


def test_oam_flip_decomposition_differs_off_sector():
    """Outside the correlated sector the shortcut picks up signs; the
    canonical column stays the contract there."""
    elements = oam_flip_decomposition("a")
    out = apply_elements(basis_state(SPACE, "H", -1, "a"), elements)
    canon = apply_oam_flip(basis_state(SPACE, "H", -1, "a"), "a")
    assert max_amplitude_difference(out, canon) == pytest.approx(2.0, abs=1e-12)


# -- conditional row variant --------------------------------------------


def test_hadamard_rows_all_pass():
    rows = hadamard_row_report(tol=TOL)
    assert len(rows) == 4
    for row in rows:
        assert row.passed, row
        assert row.fidelity >= 1.0 - TOL
        assert row.port_probability == pytest.approx(0.5, abs=1e-12)


def test_hadamard_rows_residual_phases_frozen():
    """Per-row residual phases: 1, -i, 1, -i."""
    rows = hadamard_row_report()
    got = [cmath.exp(1j * row.residual_phase) for row in rows]
    want = [1.0, -1.0j, 1.0, -1.0j]
    for g, w in zip(got, want):
        assert g == pytest.approx(w, abs=1e-9)
