"""Composite gates: canonical truth-table contracts plus element decompositions.

Architecture: each gate has a *canonical* action (an exact sparse truth
table, used by default everywhere) and an *element decomposition* (wave
plates, prisms, beam splitters) that must reproduce the canonical action.
Calibration phase plates inside decompositions are explicit named elements,
solved once at construction and recorded, never hidden constants.

Gates:

* pol-controlled OAM shift (circuit kind ``p_cos``): H gains +2q OAM,
  V gains -2q, polarization untouched.
* OAM-controlled path router (circuit kind ``o_cps``): on a path pair,
  l=+1 keeps its path and l=-1 crosses; a two-path interferometer.
* OAM Hadamard (circuit kind ``oh``): Hadamard on the l=+1/-1 sector of
  one path, polarization untouched.
* OAM flip stage (circuit kind ``dp_stage``): phase-free l -> -l.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence, Union

from .elements import (
    ColumnFn,
    Element,
    apply_column,
    apply_elements,
    bs,
    dp,
    element_column,
    hwp,
    mirror,
    oam_sorter,
    pp,
    qp,
    qwp,
    spp,
)
from .errors import CalibrationFailure, OamOverflow, UnsortableOam
from .state import (
    POL_H,
    POL_V,
    POLARIZATIONS,
    BasisMode,
    ModeSpace,
    PhotonState,
    basis_state,
)

__all__ = [
    "GATE_KINDS",
    "pol_shift_column",
    "path_router_column",
    "oam_hadamard_column",
    "oam_flip_column",
    "apply_pol_shift",
    "apply_path_router",
    "apply_oam_hadamard",
    "apply_oam_flip",
    "pol_shift_decomposition",
    "path_router_stage_groups",
    "path_router_decomposition",
    "oam_hadamard_decomposition",
    "oam_flip_decomposition",
    "EquivalenceReport",
    "gate_equiv",
    "RowResult",
    "hadamard_row_report",
]

_INV_SQRT2 = 1.0 / math.sqrt(2.0)

#: registered composite gate names (the measurement front-end is the fourth)
GATE_KINDS = ("p_cos", "o_cps", "oh", "sppm_front")


def _paths_tuple(paths: Union[str, Iterable[str]]) -> tuple[str, ...]:
    return (paths,) if isinstance(paths, str) else tuple(paths)


# -- canonical truth tables ---------------------------------------------


def pol_shift_column(q: Union[Fraction, float, int], paths: Union[str, Iterable[str]], space: ModeSpace) -> ColumnFn:
    """Canonical pol-controlled OAM shift: |H,l> -> |H,l+2q>, |V,l> -> |V,l-2q>."""
    shift = _shift_of(q)
    scope = frozenset(_paths_tuple(paths))

    def col(mode: BasisMode) -> list[tuple[BasisMode, complex]]:
        if mode.path not in scope:
            return [(mode, 1.0 + 0.0j)]
        new = mode.oam + shift if mode.pol == POL_H else mode.oam - shift
        if abs(new) > space.lmax:
            raise OamOverflow(
                f"pol-controlled shift drives OAM {mode.oam:+d} to {new:+d}, "
                f"outside lmax={space.lmax}"
            )
        return [(BasisMode(mode.pol, new, mode.path), 1.0 + 0.0j)]

    return col


def _shift_of(q: Union[Fraction, float, int]) -> int:
    doubled = 2 * Fraction(q) if isinstance(q, (Fraction, int)) else 2.0 * float(q)
    if isinstance(doubled, Fraction):
        if doubled.denominator != 1:
            raise CalibrationFailure(f"2q must be an integer, got q={q}")
        return int(doubled)
    if abs(doubled - round(doubled)) > 1e-9:
        raise CalibrationFailure(f"2q must be an integer, got q={q}")
    return int(round(doubled))


def path_router_column(path_a: str, path_b: str) -> ColumnFn:
    """Canonical OAM-controlled router: +1 keeps its path, -1 crosses."""

    def col(mode: BasisMode) -> list[tuple[BasisMode, complex]]:
        if mode.path not in (path_a, path_b):
            return [(mode, 1.0 + 0.0j)]
        if mode.oam == 1:
            return [(mode, 1.0 + 0.0j)]
        if mode.oam == -1:
            other = path_b if mode.path == path_a else path_a
            return [(BasisMode(mode.pol, mode.oam, other), 1.0 + 0.0j)]
        raise UnsortableOam(
            f"path router on ({path_a},{path_b}) received l={mode.oam:+d}; "
            "its domain is l=+1/-1"
        )

    return col


def oam_hadamard_column(paths: Union[str, Iterable[str]]) -> ColumnFn:
    """Canonical OAM Hadamard on the l=+1/-1 sector of each placed path."""
    scope = frozenset(_paths_tuple(paths))

    def col(mode: BasisMode) -> list[tuple[BasisMode, complex]]:
        if mode.path not in scope:
            return [(mode, 1.0 + 0.0j)]
        plus = BasisMode(mode.pol, 1, mode.path)
        minus = BasisMode(mode.pol, -1, mode.path)
        if mode.oam == 1:
            return [(plus, complex(_INV_SQRT2)), (minus, complex(_INV_SQRT2))]
        if mode.oam == -1:
            return [(plus, complex(_INV_SQRT2)), (minus, complex(-_INV_SQRT2))]
        raise UnsortableOam(
            f"OAM Hadamard received l={mode.oam:+d}; its domain is l=+1/-1"
        )

    return col


def oam_flip_column(paths: Union[str, Iterable[str]]) -> ColumnFn:
    """Canonical phase-free OAM flip |l> -> |-l> on each placed path."""
    scope = frozenset(_paths_tuple(paths))

    def col(mode: BasisMode) -> list[tuple[BasisMode, complex]]:
        if mode.path not in scope:
            return [(mode, 1.0 + 0.0j)]
        return [(BasisMode(mode.pol, -mode.oam, mode.path), 1.0 + 0.0j)]

    return col


def apply_pol_shift(state: PhotonState, q, paths) -> PhotonState:
    return apply_column(state, pol_shift_column(q, paths, state.space))


def apply_path_router(state: PhotonState, path_a: str, path_b: str) -> PhotonState:
    return apply_column(state, path_router_column(path_a, path_b))


def apply_oam_hadamard(state: PhotonState, paths) -> PhotonState:
    return apply_column(state, oam_hadamard_column(paths))


def apply_oam_flip(state: PhotonState, paths) -> PhotonState:
    return apply_column(state, oam_flip_column(paths))


# -- decompositions -----------------------------------------------------


def pol_shift_decomposition(q: Union[Fraction, float, int], paths: Union[str, Iterable[str]]) -> list[Element]:
    """QWP, q-plate, QWP, plus one V-only pi phase plate.

    The sandwich maps |H,l> through |L,l> -> |R,l+2q> -> |H,l+2q| with unit
    phase, while the V branch picks up -1 (V -> iR -> iL -> -V); the
    trailing PP(pi, V) is the calibration plate that removes it.
    """
    ps = _paths_tuple(paths)
    return [qwp(ps), qp(q, ps), qwp(ps), pp(math.pi, ps, pol=POL_V)]


def path_router_stage_groups(path_a: str, path_b: str) -> list[tuple[str, list[Element]]]:
    """Uncalibrated router decomposition, grouped for walkthroughs.

    A two-path interferometer: spiral plates lift l=+1/-1 to +2/0, the
    +2 component acquires a relative pi between the arms (one dove prism
    rotated by pi/4 against the other) so the second beam splitter routes
    +2 to one port and 0 to the other, and output spiral plates restore
    l=+1/-1. Each arm holds one dove prism followed by one mirror so the
    net arm action preserves l.
    """
    a, b = path_a, path_b
    return [
        ("input spiral plates", [spp(1, a), spp(1, b)]),
        ("input phase plates", [pp(math.pi, a), pp(math.pi, b)]),
        ("first beam splitter", [bs(a, b)]),
        ("arm dove prisms", [dp(math.pi / 4, a), dp(0.0, b)]),
        ("arm mirrors", [mirror(a), mirror(b)]),
        ("second beam splitter", [bs(a, b)]),
        ("output spiral plates", [spp(-1, a), spp(-1, b)]),
    ]


def _router_probe_modes(path_a: str, path_b: str, space: ModeSpace) -> list[BasisMode]:
    return [
        BasisMode(pol, oam, path)
        for path in (path_a, path_b)
        for oam in (1, -1)
        for pol in POLARIZATIONS
    ]


def solve_calibration(
    elements: Sequence[Element],
    canonical: ColumnFn,
    probe_modes: Sequence[BasisMode],
    space: ModeSpace,
) -> dict[tuple[str, int], float]:
    """Solve per-(path, OAM) phase plates making a decomposition exact.

    Runs every probe basis mode through the element sequence, requires the
    result to be a single basis mode matching the canonical routing, and
    returns the phase each output (path, OAM) sector must receive. The two
    polarizations must agree on that phase.

    Raises:
        CalibrationFailure: output not monomial, routed to the wrong mode,
            or phases inconsistent between polarizations.
    """
    needed: dict[tuple[str, int], float] = {}
    for mode in probe_modes:
        probe = basis_state(space, *mode)
        out = apply_elements(probe, elements)
        if len(out.amplitudes) != 1:
            raise CalibrationFailure(
                f"decomposition output for {mode} is not a single mode "
                f"({len(out.amplitudes)} components); cannot calibrate with phases"
            )
        (out_mode, out_amp), = out.amplitudes.items()
        targets = canonical(mode)
        if len(targets) != 1:
            raise CalibrationFailure("canonical contract is not monomial on probe")
        target_mode, target_amp = targets[0]
        if out_mode != target_mode:
            raise CalibrationFailure(
                f"decomposition routes {mode} to {out_mode}, canonical expects {target_mode}"
            )
        ratio = target_amp / out_amp
        if abs(abs(ratio) - 1.0) > 1e-9:
            raise CalibrationFailure(f"non-unit amplitude ratio {ratio} for {mode}")
        phase = cmath.phase(ratio)
        key = (out_mode.path, out_mode.oam)
        if key in needed:
            if abs(cmath.exp(1j * needed[key]) - cmath.exp(1j * phase)) > 1e-9:
                raise CalibrationFailure(
                    f"inconsistent calibration for sector {key}: "
                    f"{needed[key]} vs {phase}"
                )
        else:
            needed[key] = phase
    return needed


def path_router_decomposition(
    path_a: str, path_b: str, space: ModeSpace
) -> tuple[list[Element], dict[tuple[str, int], float]]:
    """Full element decomposition of the router, calibration included.

    Returns:
        (elements, calibration): the ordered element list and the solved
        phase per output (path, OAM) sector (for the gate description).
    """
    base: list[Element] = []
    for _, els in path_router_stage_groups(path_a, path_b):
        base.extend(els)
    canonical = path_router_column(path_a, path_b)
    probes = _router_probe_modes(path_a, path_b, space)
    phases = solve_calibration(base, canonical, probes, space)
    plates = [
        pp(phase, path, oam=oam)
        for (path, oam), phase in sorted(phases.items())
        if abs(cmath.exp(1j * phase) - 1.0) > 1e-12
    ]
    return base + plates, phases


def oam_hadamard_decomposition(path: str, ancilla: str) -> list[Element]:
    """OAM-interferometric Hadamard using one empty ancilla path.

    The sorter splits the l=+1/-1 sectors onto (path, ancilla), a dove
    prism at pi/2 aligns the ancilla sector to l=+1, the beam splitter
    interferes the two, and the mirrored second half merges everything
    back onto ``path``. With both prisms at pi/2 the result is the exact
    Hadamard with unit global phase, so no extra calibration plate is
    needed. The ancilla must carry no light before the gate; it carries
    none after.
    """
    return [
        oam_sorter(path, ancilla),
        dp(math.pi / 2, ancilla),
        bs(path, ancilla),
        dp(math.pi / 2, ancilla),
        oam_sorter(path, ancilla),
    ]


def oam_flip_decomposition(paths: Union[str, Iterable[str]]) -> list[Element]:
    """Dove prism at -pi/4 plus a V-only pi calibration plate.

    The prism alone maps |+1> -> |-1> with unit phase but |-1> -> -|+1>.
    On the analyzer's reachable sector (H rides l=+1 and V rides l=-1 at
    this stage) the V-only plate cancels that sign, so the pair acts as
    the phase-free flip there. Outside that sector the pair is not the
    canonical flip; the canonical truth table is the contract.
    """
    ps = _paths_tuple(paths)
    return [dp(-math.pi / 4, ps), pp(math.pi, ps, pol=POL_V)]


# -- equivalence oracle -------------------------------------------------


@dataclass(frozen=True)
class EquivalenceReport:
    """Outcome of a gate-vs-gate comparison over a mode domain."""

    equivalent: bool
    scale: complex
    max_abs_diff: float
    witness: str

    def __str__(self) -> str:
        verdict = "equivalent" if self.equivalent else "NOT equivalent"
        return (
            f"{verdict} (scale {self.scale:.6f}, max |diff| {self.max_abs_diff:.3e}"
            + (f", witness {self.witness}" if self.witness else "")
            + ")"
        )


Applier = Callable[[PhotonState], PhotonState]


def gate_equiv(
    op_a: Applier,
    op_b: Applier,
    space: ModeSpace,
    domain: Sequence[BasisMode],
    tol: float = 1e-12,
) -> EquivalenceReport:
    """Compare two gates on a basis domain, up to one global unit scale.

    The scale is read off the first output amplitude where both images are
    nonzero; the report then carries the max entrywise deviation
    ``|U_a - c U_b|`` over all domain columns.
    """
    cols_a = [op_a(basis_state(space, *m)) for m in domain]
    cols_b = [op_b(basis_state(space, *m)) for m in domain]

    scale: complex | None = None
    for sa, sb in zip(cols_a, cols_b):
        for mode, amp_b in sb.items_sorted():
            amp_a = sa.amplitude(mode)
            if abs(amp_a) > 1e-9 and abs(amp_b) > 1e-9:
                scale = amp_a / amp_b
                break
        if scale is not None:
            break
    if scale is None:
        return EquivalenceReport(False, 1.0 + 0.0j, float("inf"), "no matching nonzero column")

    worst = 0.0
    witness = ""
    for probe, sa, sb in zip(domain, cols_a, cols_b):
        for mode in sa.amplitudes.keys() | sb.amplitudes.keys():
            diff = abs(sa.amplitude(mode) - scale * sb.amplitude(mode))
            if diff > worst:
                worst = diff
                witness = f"{probe} -> {mode}"
    ok = worst <= tol and abs(abs(scale) - 1.0) <= tol
    return EquivalenceReport(ok, scale, worst, witness if not ok else "")


# -- conditional row implementation of the OAM Hadamard -----------------

#: (input (pol, oam), spiral shift, extra swap plate?, selected PBS port,
#:  expected output terms on that port)
_HADAMARD_ROWS = (
    ((POL_H, 1), -1, False, POL_H, (((POL_H, 1), 1.0), ((POL_H, -1), 1.0))),
    ((POL_V, 1), -1, False, POL_V, (((POL_V, 1), 1.0), ((POL_V, -1), 1.0))),
    ((POL_H, -1), 1, True, POL_H, (((POL_H, 1), 1.0), ((POL_H, -1), -1.0))),
    ((POL_V, -1), 1, True, POL_V, (((POL_V, 1), 1.0), ((POL_V, -1), -1.0))),
)


@dataclass(frozen=True)
class RowResult:
    index: int
    input_mode: str
    fidelity: float
    residual_phase: float
    port_probability: float
    passed: bool


def hadamard_row_report(tol: float = 1e-12) -> list[RowResult]:
    """Check the four-row conditional bulk-optics OAM Hadamard.

    Each row conditions the element choice on the input sector: a q-plate
    of charge 1/2, a spiral plate whose sign depends on the input OAM, the
    working QWP, a shared calibration plate PP(-pi/2, V) (which absorbs
    the i that the pinned QWP convention puts on the l=-1 component), a
    pi/8 HWP, for the l=-1 rows an extra pi/4 HWP, and finally a PBS whose
    labeled port is kept and renormalized. Row outputs are compared up to
    a per-row global phase; the report records that residual phase and the
    (always 1/2) probability on the selected port.
    """
    space = ModeSpace(lmax=4, paths=("w",))
    results = []
    for idx, ((pol0, oam0), shift, add_swap, port, expected_terms) in enumerate(_HADAMARD_ROWS, start=1):
        seq = [
            qp(Fraction(1, 2), "w"),
            spp(shift, "w"),
            qwp("w"),
            pp(-math.pi / 2, "w", pol=POL_V),
            hwp(math.pi / 8, "w"),
        ]
        if add_swap:
            seq.append(hwp(math.pi / 4, "w"))
        out = apply_elements(basis_state(space, pol0, oam0, "w"), seq)

        kept = {m: a for m, a in out.amplitudes.items() if m.pol == port}
        port_prob = sum(abs(a) ** 2 for a in kept.values())
        if port_prob <= 0.0:
            results.append(RowResult(idx, f"|{pol0},{oam0:+d}>", 0.0, 0.0, 0.0, False))
            continue
        scale = 1.0 / math.sqrt(port_prob)
        kept = {m: a * scale for m, a in kept.items()}

        norm_exp = math.sqrt(sum(abs(c) ** 2 for _, c in expected_terms))
        expected = {
            BasisMode(p, l, "w"): c / norm_exp for (p, l), c in expected_terms
        }
        overlap = sum(expected[m].conjugate() * kept.get(m, 0.0) for m in expected)
        fid = abs(overlap) ** 2
        phase = cmath.phase(overlap) if abs(overlap) > 0 else 0.0
        results.append(
            RowResult(
                idx,
                f"|{pol0},{oam0:+d}>",
                fid,
                phase,
                port_prob,
                fid >= 1.0 - tol,
            )
        )
    return results
