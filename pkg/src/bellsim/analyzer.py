"""Bell-state analysis: inputs, classification table, verification.

The analyzer circuit maps each of the four polarization Bell states
(prepared at l=0 across the straight path pair) onto sixteen equally
likely coincidence patterns, and the four sixteen-pattern sets are
disjoint: reading one coincidence identifies the input with certainty.

``CLASSIFICATION_TABLE`` is frozen data, not derived from the
simulation, so propagating the four inputs through the circuit and
checking every support pattern against the table is a genuine
cross-check.  ``verify`` runs exactly that; ``oracle_check`` replays the
same evolution through dense per-photon matrices and compares both the
final states and the outcome distributions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .circuit import Circuit, builtin_document, parse_circuit
from .engine import Plan, assemble, compile_circuit, propagate, propagate_with_checkpoints, restrict_to_circuit
from .errors import MalformedPattern
from .measurement import (
    CoincidencePattern,
    DetectorId,
    OutcomeDistribution,
    enumerate_patterns,
    sppm_project,
)
from .state import (
    POL_H,
    POL_V,
    BasisMode,
    ModeSpace,
    TwoPhotonState,
    fidelity,
    global_phase_between,
)

__all__ = [
    "BELL_LABELS",
    "CLASSIFICATION_TABLE",
    "classification_rows",
    "classify",
    "classify_by_parity",
    "tamper_table",
    "default_circuit",
    "prepare_input",
    "reference_stage_states",
    "StageRecord",
    "stage_states",
    "analyze",
    "LabelReport",
    "VerificationReport",
    "verify",
    "OracleReport",
    "oracle_check",
    "ORACLE_SEED",
]

BELL_LABELS = ("phi+", "phi-", "psi+", "psi-")

ORACLE_SEED = 0xB5A

_SQRT2 = math.sqrt(2.0)

# -- classification table (frozen data) ---------------------------------
#
# Each row is ((oam_sign_A, pol_A), (oam_sign_B, pol_B)).  The plus-family
# rows pair equal OAM signs with equal polarizations; the minus-family
# rows are their complement.  Straight origin pairs carry the phi labels,
# crossed pairs the psi labels.

_ROWS_PLUS = (
    ((+1, POL_H), (+1, POL_H)),
    ((+1, POL_V), (+1, POL_V)),
    ((+1, POL_H), (-1, POL_V)),
    ((+1, POL_V), (-1, POL_H)),
    ((-1, POL_H), (+1, POL_V)),
    ((-1, POL_V), (+1, POL_H)),
    ((-1, POL_H), (-1, POL_H)),
    ((-1, POL_V), (-1, POL_V)),
)

_ROWS_MINUS = (
    ((+1, POL_H), (+1, POL_V)),
    ((+1, POL_V), (+1, POL_H)),
    ((+1, POL_H), (-1, POL_H)),
    ((+1, POL_V), (-1, POL_V)),
    ((-1, POL_H), (+1, POL_H)),
    ((-1, POL_V), (+1, POL_V)),
    ((-1, POL_H), (-1, POL_V)),
    ((-1, POL_V), (-1, POL_H)),
)

_STRAIGHT = (("a1", "a2"), ("b1", "b2"))
_CROSS = (("a1", "b2"), ("b1", "a2"))

_TABLE_GROUPS = {
    "phi+": (_ROWS_PLUS, _STRAIGHT),
    "phi-": (_ROWS_MINUS, _STRAIGHT),
    "psi+": (_ROWS_PLUS, _CROSS),
    "psi-": (_ROWS_MINUS, _CROSS),
}


def _build_table() -> dict[CoincidencePattern, str]:
    table: dict[CoincidencePattern, str] = {}
    for label, (rows, origin_pairs) in _TABLE_GROUPS.items():
        for (sa, pa), (sb, pb) in rows:
            for oa, ob in origin_pairs:
                pattern = CoincidencePattern(
                    DetectorId(sa, pa, oa), DetectorId(sb, pb, ob)
                )
                if pattern in table:
                    raise AssertionError(f"classification table repeats {pattern}")
                table[pattern] = label
    return table


CLASSIFICATION_TABLE: dict[CoincidencePattern, str] = _build_table()


def _validate_table() -> None:
    if len(CLASSIFICATION_TABLE) != 64:
        raise AssertionError("classification table must hold 64 patterns")
    per_label = {label: 0 for label in BELL_LABELS}
    for label in CLASSIFICATION_TABLE.values():
        per_label[label] += 1
    if any(count != 16 for count in per_label.values()):
        raise AssertionError(f"uneven classification table: {per_label}")
    full = set(enumerate_patterns(("a1", "b1"), ("a2", "b2")))
    if set(CLASSIFICATION_TABLE) != full:
        raise AssertionError("classification table does not cover the detector set")


_validate_table()


def classification_rows(
    table: dict[CoincidencePattern, str] | None = None,
) -> list[tuple[CoincidencePattern, str]]:
    """(pattern, label) pairs in canonical pattern order."""
    table = CLASSIFICATION_TABLE if table is None else table
    return [(p, table[p]) for p in enumerate_patterns(("a1", "b1"), ("a2", "b2"))]


def classify(
    pattern: CoincidencePattern, table: dict[CoincidencePattern, str] | None = None
) -> str:
    """Label for a coincidence pattern.

    Raises:
        MalformedPattern: if the pattern is not in the table.
    """
    table = CLASSIFICATION_TABLE if table is None else table
    try:
        return table[pattern]
    except KeyError:
        raise MalformedPattern(
            f"pattern {pattern} is not in the classification table"
        ) from None


def classify_by_parity(pattern: CoincidencePattern) -> str:
    """Structural restatement of the table: origin parity picks phi/psi,
    (equal signs) == (equal polarizations) picks the + branch."""
    det_a, det_b = pattern
    straight = (det_a.origin, det_b.origin) in _STRAIGHT
    plus = (det_a.oam_sign == det_b.oam_sign) == (det_a.pol == det_b.pol)
    family = "phi" if straight else "psi"
    return family + ("+" if plus else "-")


def tamper_table(
    table: dict[CoincidencePattern, str] | None = None,
) -> dict[CoincidencePattern, str]:
    """Copy of the table with exactly one pattern relabeled (test hook).

    The first pattern in canonical order moves to the next label
    cyclically, so verification must report a single misclassification.
    """
    table = dict(CLASSIFICATION_TABLE if table is None else table)
    first = enumerate_patterns(("a1", "b1"), ("a2", "b2"))[0]
    old = table[first]
    table[first] = BELL_LABELS[(BELL_LABELS.index(old) + 1) % len(BELL_LABELS)]
    return table


# -- inputs and reference states ----------------------------------------


@lru_cache(maxsize=1)
def default_circuit() -> Circuit:
    return parse_circuit(builtin_document("fig2"))


_INPUT_POL_TERMS = {
    "phi+": ((POL_H, POL_H, 1.0), (POL_V, POL_V, 1.0)),
    "phi-": ((POL_H, POL_H, 1.0), (POL_V, POL_V, -1.0)),
    "psi+": ((POL_H, POL_V, 1.0), (POL_V, POL_H, 1.0)),
    "psi-": ((POL_H, POL_V, 1.0), (POL_V, POL_H, -1.0)),
}


def _check_label(label: str) -> None:
    if label not in BELL_LABELS:
        raise ValueError(f"unknown input label {label!r}; expected one of {BELL_LABELS}")


def prepare_input(label: str, space: ModeSpace | None = None) -> TwoPhotonState:
    """Polarization Bell pair at l=0, split evenly over the straight paths.

    Photon A rides a1/b1 and photon B rides a2/b2; the path factor is
    (|a1,a2> + |b1,b2>)/sqrt(2).
    """
    _check_label(label)
    space = default_circuit().space() if space is None else space
    amps: dict = {}
    for pol_a, pol_b, sign in _INPUT_POL_TERMS[label]:
        for x, y in _STRAIGHT:
            amps[(BasisMode(pol_a, 0, x), BasisMode(pol_b, 0, y))] = sign * 0.5
    return TwoPhotonState(space, amps)


# Reference states after each stage family of the analyzer circuit, as
# (sign, pol_A, l_A, pol_B, l_B) terms over a straight or crossed path
# factor.  These are fixed expectations, not recomputed.

_H, _V = POL_H, POL_V

_STAGE_TERMS: dict[str, dict[str, tuple[str, tuple]]] = {
    "p_cos": {
        "phi+": ("straight", ((+1, _H, +1, _H, +1), (+1, _V, -1, _V, -1))),
        "phi-": ("straight", ((+1, _H, +1, _H, +1), (-1, _V, -1, _V, -1))),
        "psi+": ("straight", ((+1, _H, +1, _V, -1), (+1, _V, -1, _H, +1))),
        "psi-": ("straight", ((+1, _H, +1, _V, -1), (-1, _V, -1, _H, +1))),
    },
    "o_cps": {
        "phi+": ("straight", ((+1, _H, +1, _H, +1), (+1, _V, -1, _V, -1))),
        "phi-": ("straight", ((+1, _H, +1, _H, +1), (-1, _V, -1, _V, -1))),
        "psi+": ("cross", ((+1, _H, +1, _V, -1), (+1, _V, -1, _H, +1))),
        "psi-": ("cross", ((+1, _H, +1, _V, -1), (-1, _V, -1, _H, +1))),
    },
    "dp_stage": {
        "phi+": ("straight", ((+1, _H, +1, _H, -1), (+1, _V, -1, _V, +1))),
        "phi-": ("straight", ((+1, _H, +1, _H, -1), (-1, _V, -1, _V, +1))),
        "psi+": ("cross", ((+1, _H, +1, _V, +1), (+1, _V, -1, _H, -1))),
        "psi-": ("cross", ((+1, _H, +1, _V, +1), (-1, _V, -1, _H, -1))),
    },
    "oh": {
        "phi+": (
            "straight",
            (
                (+1, _H, +1, _H, +1), (-1, _H, +1, _H, -1),
                (+1, _H, -1, _H, +1), (-1, _H, -1, _H, -1),
                (+1, _V, +1, _V, +1), (+1, _V, +1, _V, -1),
                (-1, _V, -1, _V, +1), (-1, _V, -1, _V, -1),
            ),
        ),
        "phi-": (
            "straight",
            (
                (+1, _H, +1, _H, +1), (-1, _H, +1, _H, -1),
                (+1, _H, -1, _H, +1), (-1, _H, -1, _H, -1),
                (-1, _V, +1, _V, +1), (-1, _V, +1, _V, -1),
                (+1, _V, -1, _V, +1), (+1, _V, -1, _V, -1),
            ),
        ),
        "psi+": (
            "cross",
            (
                (+1, _H, +1, _V, +1), (+1, _H, +1, _V, -1),
                (+1, _H, -1, _V, +1), (+1, _H, -1, _V, -1),
                (+1, _V, +1, _H, +1), (-1, _V, +1, _H, -1),
                (-1, _V, -1, _H, +1), (+1, _V, -1, _H, -1),
            ),
        ),
        "psi-": (
            "cross",
            (
                (+1, _H, +1, _V, +1), (+1, _H, +1, _V, -1),
                (+1, _H, -1, _V, +1), (+1, _H, -1, _V, -1),
                (-1, _V, +1, _H, +1), (+1, _V, +1, _H, -1),
                (+1, _V, -1, _H, +1), (-1, _V, -1, _H, -1),
            ),
        ),
    },
    "hwp": {
        "phi+": (
            "straight",
            (
                (+1, _H, +1, _H, +1), (+1, _V, +1, _V, +1),
                (-1, _H, +1, _V, -1), (-1, _V, +1, _H, -1),
                (+1, _H, -1, _V, +1), (+1, _V, -1, _H, +1),
                (-1, _H, -1, _H, -1), (-1, _V, -1, _V, -1),
            ),
        ),
        "phi-": (
            "straight",
            (
                (+1, _H, +1, _V, +1), (+1, _V, +1, _H, +1),
                (-1, _H, +1, _H, -1), (-1, _V, +1, _V, -1),
                (+1, _H, -1, _H, +1), (+1, _V, -1, _V, +1),
                (-1, _H, -1, _V, -1), (-1, _V, -1, _H, -1),
            ),
        ),
        "psi+": (
            "cross",
            (
                (+1, _H, +1, _H, +1), (-1, _V, +1, _V, +1),
                (-1, _H, +1, _V, -1), (+1, _V, +1, _H, -1),
                (-1, _H, -1, _V, +1), (+1, _V, -1, _H, +1),
                (+1, _H, -1, _H, -1), (-1, _V, -1, _V, -1),
            ),
        ),
        "psi-": (
            "cross",
            (
                (+1, _H, +1, _V, +1), (-1, _V, +1, _H, +1),
                (-1, _H, +1, _H, -1), (+1, _V, +1, _V, -1),
                (-1, _H, -1, _H, +1), (+1, _V, -1, _V, +1),
                (+1, _H, -1, _V, -1), (-1, _V, -1, _H, -1),
            ),
        ),
    },
}

_FACTOR_PAIRS = {"straight": _STRAIGHT, "cross": _CROSS}


def _reference_state(space: ModeSpace, factor: str, terms: tuple) -> TwoPhotonState:
    coef = 1.0 / (_SQRT2 * math.sqrt(len(terms)))
    amps: dict = {}
    for sign, pol_a, l_a, pol_b, l_b in terms:
        for x, y in _FACTOR_PAIRS[factor]:
            key = (BasisMode(pol_a, l_a, x), BasisMode(pol_b, l_b, y))
            amps[key] = amps.get(key, 0.0) + sign * coef
    return TwoPhotonState(space, amps)


def reference_stage_states(
    label: str, space: ModeSpace | None = None
) -> dict[str, TwoPhotonState]:
    """Expected state after each stage family, keyed by checkpoint name."""
    _check_label(label)
    space = default_circuit().space() if space is None else space
    return {
        name: _reference_state(space, *per_label[label])
        for name, per_label in _STAGE_TERMS.items()
    }


@dataclass(frozen=True)
class StageRecord:
    checkpoint: str
    fidelity: float
    global_phase: complex
    state: TwoPhotonState
    reference: TwoPhotonState


def stage_states(
    label: str, impl: str | None = None, circuit: Circuit | None = None
) -> list[StageRecord]:
    """Propagate one input and compare each checkpoint to its reference."""
    _check_label(label)
    circuit = default_circuit() if circuit is None else circuit
    plan = compile_circuit(circuit, impl)
    state = prepare_input(label, circuit.space())
    _, marks = propagate_with_checkpoints(plan, state)
    refs = reference_stage_states(label, circuit.space())
    records = []
    for name, _count in plan.checkpoints:
        if name not in refs:
            continue
        got = marks[name]
        ref = refs[name]
        records.append(
            StageRecord(
                checkpoint=name,
                fidelity=fidelity(got, ref),
                global_phase=global_phase_between(got, ref),
                state=got,
                reference=ref,
            )
        )
    return records


# -- end-to-end analysis ------------------------------------------------


def _measurement_impl(plan: Plan, impl: str | None) -> str:
    if impl is not None:
        return impl
    if any(v == "decomposed" for v in plan.sppm_impl.values()):
        return "decomposed"
    return "canonical"


def analyze(
    label: str, impl: str | None = None, circuit: Circuit | None = None
) -> OutcomeDistribution:
    """Outcome distribution for one Bell input through the analyzer."""
    _check_label(label)
    circuit = default_circuit() if circuit is None else circuit
    plan = compile_circuit(circuit, impl)
    out = propagate(plan, prepare_input(label, circuit.space()))
    return sppm_project(
        out, plan.origins["A"], plan.origins["B"], _measurement_impl(plan, impl)
    )


def analyze_state(
    state: TwoPhotonState, impl: str | None = None, circuit: Circuit | None = None
) -> OutcomeDistribution:
    """Outcome distribution for an arbitrary prepared input state."""
    circuit = default_circuit() if circuit is None else circuit
    plan = compile_circuit(circuit, impl)
    out = propagate(plan, state)
    return sppm_project(
        out, plan.origins["A"], plan.origins["B"], _measurement_impl(plan, impl)
    )


# -- verification -------------------------------------------------------

UNIFORM_TOL = 1e-10


@dataclass(frozen=True)
class LabelReport:
    label: str
    success_probability: float
    support_size: int
    max_deviation: float  # worst |p - 1/16| over the 16 expected patterns
    misclassified: tuple[tuple[CoincidencePattern, str], ...]

    @property
    def ok(self) -> bool:
        return (
            self.support_size == 16
            and not self.misclassified
            and self.max_deviation <= UNIFORM_TOL
            and abs(self.success_probability - 1.0) <= UNIFORM_TOL
        )


@dataclass(frozen=True)
class VerificationReport:
    rows: tuple[LabelReport, ...]
    disjoint: bool
    cover: bool

    @property
    def ok(self) -> bool:
        return self.disjoint and self.cover and all(r.ok for r in self.rows)

    @property
    def accuracy(self) -> float:
        """Pattern-weighted identification accuracy across the four inputs."""
        return sum(r.success_probability for r in self.rows) / len(self.rows)

    def to_text(self) -> str:
        lines = []
        for r in self.rows:
            lines.append(
                f"input {r.label:<4}  success {r.success_probability:.12f}  "
                f"patterns {r.support_size:2d}  max|p-1/16| {r.max_deviation:.3e}"
            )
            for pattern, got in r.misclassified:
                lines.append(f"  misclassified: {pattern} -> {got}")
        lines.append(f"supports disjoint: {'yes' if self.disjoint else 'NO'}")
        lines.append(f"table covered:     {'yes' if self.cover else 'NO'}")
        verdict = "PASS" if self.ok else "FAIL"
        lines.append(
            f"{verdict}: accuracy {self.accuracy:.12f} over {len(self.rows)} inputs"
        )
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "inputs": [
                {
                    "label": r.label,
                    "success_probability": r.success_probability,
                    "support_size": r.support_size,
                    "max_deviation": r.max_deviation,
                    "misclassified": [
                        {"pattern": str(p), "label": got}
                        for p, got in r.misclassified
                    ],
                }
                for r in self.rows
            ],
            "disjoint": self.disjoint,
            "cover": self.cover,
            "accuracy": self.accuracy,
            "ok": self.ok,
        }


def verify(
    impl: str | None = None,
    circuit: Circuit | None = None,
    table: dict[CoincidencePattern, str] | None = None,
) -> VerificationReport:
    """Propagate all four Bell inputs and grade them against the table."""
    table = CLASSIFICATION_TABLE if table is None else table
    rows = []
    supports: dict[str, set[CoincidencePattern]] = {}
    for label in BELL_LABELS:
        dist = analyze(label, impl, circuit)
        support = dist.support()
        supports[label] = set(support)
        success = 0.0
        missed = []
        deviation = 0.0
        for pattern, p in dist.items_ordered():
            got = table.get(pattern)
            if got == label:
                success += p
            else:
                missed.append((pattern, got if got is not None else "?"))
            deviation = max(deviation, abs(p - 1.0 / 16.0))
        rows.append(
            LabelReport(label, success, len(support), deviation, tuple(missed))
        )
    all_supports = [s for s in supports.values()]
    union = set().union(*all_supports)
    disjoint = len(union) == sum(len(s) for s in all_supports)
    cover = union == set(table)
    return VerificationReport(tuple(rows), disjoint, cover)


# -- dense oracle cross-check -------------------------------------------


@dataclass(frozen=True)
class OracleReport:
    states_checked: int
    max_state_difference: float
    max_tvd: float
    max_unitarity_residual: float
    tol: float = 1e-10

    @property
    def ok(self) -> bool:
        return (
            self.max_state_difference <= self.tol
            and self.max_tvd <= self.tol
            and self.max_unitarity_residual <= self.tol
        )

    def to_text(self) -> str:
        verdict = "PASS" if self.ok else "FAIL"
        return (
            f"states checked:          {self.states_checked}\n"
            f"max state difference:    {self.max_state_difference:.3e}\n"
            f"max distribution TVD:    {self.max_tvd:.3e}\n"
            f"max unitarity residual:  {self.max_unitarity_residual:.3e}\n"
            f"{verdict}: sparse evolution matches the dense operator "
            f"within {self.tol:.0e}\n"
        )

    def to_json_dict(self) -> dict:
        return {
            "states_checked": self.states_checked,
            "max_state_difference": self.max_state_difference,
            "max_tvd": self.max_tvd,
            "max_unitarity_residual": self.max_unitarity_residual,
            "tol": self.tol,
            "ok": self.ok,
        }


def _input_sector_modes() -> list[tuple[BasisMode, BasisMode]]:
    pairs = []
    for x in ("a1", "b1"):
        for y in ("a2", "b2"):
            for pol_a in (POL_H, POL_V):
                for pol_b in (POL_H, POL_V):
                    pairs.append((BasisMode(pol_a, 0, x), BasisMode(pol_b, 0, y)))
    return pairs


def random_input_states(
    n: int, seed: int = ORACLE_SEED, space: ModeSpace | None = None
) -> list[TwoPhotonState]:
    """Random unit vectors in the l=0 input sector the analyzer accepts."""
    space = default_circuit().space() if space is None else space
    sector = _input_sector_modes()
    rng = np.random.default_rng(seed)
    states = []
    for _ in range(n):
        vec = rng.standard_normal(len(sector)) + 1j * rng.standard_normal(len(sector))
        vec /= np.linalg.norm(vec)
        states.append(
            TwoPhotonState(space, dict(zip(sector, (complex(v) for v in vec))))
        )
    return states


def oracle_check(
    impl: str | None = None,
    circuit: Circuit | None = None,
    n_random: int = 50,
    seed: int = ORACLE_SEED,
) -> OracleReport:
    """Cross-check sparse propagation against the dense matrix oracle.

    Runs the four Bell inputs plus ``n_random`` random input-sector
    states through both evolutions and reports the worst state
    difference, outcome-distribution TVD, and per-stage unitarity
    residual from the dense assembly.
    """
    circuit = default_circuit() if circuit is None else circuit
    plan = compile_circuit(circuit, impl)
    dense = assemble(plan)
    max_residual = max((r.unitarity_residual for r in dense.records), default=0.0)

    inputs = [prepare_input(label, circuit.space()) for label in BELL_LABELS]
    inputs.extend(random_input_states(n_random, seed, circuit.space()))

    meas_impl = _measurement_impl(plan, impl)
    worst_state = 0.0
    worst_tvd = 0.0
    for state in inputs:
        sparse_out = propagate(plan, state)
        dense_out = restrict_to_circuit(plan, dense.apply(state), "dense oracle output")
        diff = 0.0
        keys = set(sparse_out.amplitudes) | set(dense_out.amplitudes)
        for key in keys:
            diff = max(
                diff,
                abs(
                    sparse_out.amplitudes.get(key, 0.0)
                    - dense_out.amplitudes.get(key, 0.0)
                ),
            )
        worst_state = max(worst_state, diff)
        dist_sparse = sppm_project(sparse_out, plan.origins["A"], plan.origins["B"], meas_impl)
        dist_dense = sppm_project(dense_out, plan.origins["A"], plan.origins["B"], meas_impl)
        worst_tvd = max(worst_tvd, dist_sparse.tvd(dist_dense))
    return OracleReport(
        states_checked=len(inputs),
        max_state_difference=worst_state,
        max_tvd=worst_tvd,
        max_unitarity_residual=max_residual,
    )
