"""Compilation and propagation of circuits, plus a dense matrix oracle.

``compile_circuit`` turns a parsed :class:`~bellsim.circuit.Circuit` into a
:class:`Plan`: a flat list of single-photon column operators (canonical
gate columns or their element decompositions), the measurement origins
declared by ``sppm`` stages, and checkpoint positions after the last
stage of each kind.  ``propagate`` pushes a sparse two-photon state
through the plan; ``assemble`` independently builds dense per-photon
matrices for the same plan so the two evolutions can be cross-checked.

The dense form is kept factored as (U_A, U_B): the joint operator is
their Kronecker product, which is only materialized on request.  A
per-photon dimension cap guards against accidentally huge spaces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import elements as el
from . import gates
from .circuit import Circuit, Stage, angle_value
from .elements import ColumnFn, Element
from .errors import (
    BellSimError,
    DimensionCap,
    LeakedAmplitude,
    OamOverflow,
    UnsortableOam,
)
from .state import DROP_EPS, ModeSpace, TwoPhotonState, _clean

__all__ = [
    "CompiledOp",
    "CompiledStage",
    "Plan",
    "compile_circuit",
    "apply_column_to_photon",
    "propagate",
    "propagate_with_checkpoints",
    "restrict_to_circuit",
    "StageMatrixRecord",
    "AssembledUnitary",
    "assemble",
    "MAX_PHOTON_DIMENSION",
    "ANCILLA_PATH",
]

#: per-photon dense dimension guard (the joint space is this squared)
MAX_PHOTON_DIMENSION = 10_000

#: scoped path label for the decomposed OAM-Hadamard interferometer;
#: starts with an underscore so it can never collide with a parsed label
ANCILLA_PATH = "_mzi"

DEFAULT_ORIGINS = {"A": ("a1", "b1"), "B": ("a2", "b2")}


@dataclass(frozen=True)
class CompiledOp:
    label: str
    column: ColumnFn


@dataclass(frozen=True)
class CompiledStage:
    index: int  # position in the source stage list
    kind: str
    photon: str
    impl: str
    label: str
    ops: tuple[CompiledOp, ...]
    note: str = ""


@dataclass(frozen=True)
class Plan:
    circuit: Circuit
    space: ModeSpace  # circuit space, extended with the ancilla if needed
    ancilla: str | None
    stages: tuple[CompiledStage, ...]
    origins: dict[str, tuple[str, ...]]
    sppm_impl: dict[str, str]  # origin path -> canonical | decomposed
    checkpoints: tuple[tuple[str, int], ...]  # (kind, compiled-stage count)


def _element_ops(stage: Stage, space: ModeSpace) -> list[CompiledOp]:
    kind, paths, params = stage.kind, stage.paths, stage.params
    if kind == "qwp":
        elem = el.qwp(paths)
    elif kind == "hwp":
        elem = el.hwp(angle_value(params["theta"]), paths)
    elif kind == "qp":
        elem = el.qp(params["q"], paths)
    elif kind == "spp":
        elem = el.spp(params["l"], paths)
    elif kind == "dp":
        elem = el.dp(angle_value(params["alpha"]), paths)
    elif kind == "pp":
        elem = el.pp(
            angle_value(params["phi"]),
            paths,
            pol=params.get("pol"),
            oam=params.get("oam"),
        )
    elif kind == "mirror":
        elem = el.mirror(paths)
    elif kind == "bs":
        elem = el.bs(*paths)
    elif kind == "pbs":
        elem = el.pbs(*paths)
    elif kind == "oam_sorter":
        elem = el.oam_sorter(*paths)
    elif kind == "dl":
        elem = el.dl(paths)
    else:  # pragma: no cover
        raise AssertionError(kind)
    return [CompiledOp(elem.describe(), el.element_column(elem, space))]


def _composite_ops(stage: Stage, impl: str, space: ModeSpace) -> tuple[list[CompiledOp], str]:
    kind, paths = stage.kind, stage.paths
    note = ""
    if impl == "canonical":
        if kind == "p_cos":
            q = Fraction(stage.params.get("q", Fraction(1, 2)))
            ops = [CompiledOp(f"p_cos(q={q})", gates.pol_shift_column(q, paths, space))]
        elif kind == "o_cps":
            ops = [CompiledOp("o_cps", gates.path_router_column(paths[0], paths[1]))]
            note = "identity outside l=+1/-1"
        elif kind == "oh":
            ops = [CompiledOp("oh", gates.oam_hadamard_column(paths))]
            note = "identity outside l=+1/-1"
        elif kind == "dp_stage":
            ops = [CompiledOp("dp_stage", gates.oam_flip_column(paths))]
        else:  # pragma: no cover
            raise AssertionError(kind)
        return ops, note

    if kind == "p_cos":
        q = Fraction(stage.params.get("q", Fraction(1, 2)))
        elems = gates.pol_shift_decomposition(q, paths)
    elif kind == "o_cps":
        elems, _phases = gates.path_router_decomposition(paths[0], paths[1], space)
        note = "identity outside l=+1/-1"
    elif kind == "oh":
        elems = []
        for p in paths:
            elems.extend(gates.oam_hadamard_decomposition(p, ANCILLA_PATH))
        note = "identity outside l=+1/-1; uses ancilla path " + ANCILLA_PATH
    elif kind == "dp_stage":
        elems = gates.oam_flip_decomposition(paths)
        note = "exact on the pol/OAM-correlated subspace it is placed after"
    else:  # pragma: no cover
        raise AssertionError(kind)
    ops = [CompiledOp(e.describe(), el.element_column(e, space)) for e in elems]
    return ops, note


def compile_circuit(circuit: Circuit, impl_override: str | None = None) -> Plan:
    """Resolve every stage to concrete column operators.

    ``impl_override`` forces canonical or decomposed forms for all
    composite stages; primitive stages are unaffected.  Router
    calibration for decomposed ``o_cps`` stages runs here, so a
    calibration problem surfaces at compile time with the stage named.
    """
    if impl_override not in (None, "canonical", "decomposed"):
        raise ValueError(f"bad impl override: {impl_override!r}")

    resolved: list[tuple[Stage, int, str]] = []
    needs_ancilla = False
    for idx, stage in enumerate(circuit.stages):
        if stage.kind in ("p_cos", "o_cps", "oh", "dp_stage", "sppm"):
            impl = impl_override or stage.impl
        else:
            impl = "canonical"
        if stage.kind == "oh" and impl == "decomposed":
            needs_ancilla = True
        resolved.append((stage, idx, impl))

    space = circuit.space()
    ancilla = None
    if needs_ancilla:
        ancilla = ANCILLA_PATH
        space = space.extended((ancilla,))

    compiled: list[CompiledStage] = []
    origins: dict[str, list[str]] = {p: [] for p in circuit.photons}
    sppm_impl: dict[str, str] = {}
    for stage, idx, impl in resolved:
        label = stage.header()
        if stage.kind == "sppm":
            origins[stage.photon].append(stage.paths[0])
            sppm_impl[stage.paths[0]] = impl
            continue
        try:
            if stage.kind in ("p_cos", "o_cps", "oh", "dp_stage"):
                ops, note = _composite_ops(stage, impl, space)
            else:
                ops, note = _element_ops(stage, space), ""
        except BellSimError as exc:
            raise type(exc)(f"stage {idx + 1} ({label}): {exc}") from exc
        compiled.append(CompiledStage(idx, stage.kind, stage.photon, impl, label, tuple(ops), note))

    if not any(origins.values()):
        for photon in circuit.photons:
            fallback = tuple(p for p in DEFAULT_ORIGINS.get(photon, ()) if p in circuit.paths)
            origins[photon] = list(fallback)
            for p in fallback:
                sppm_impl.setdefault(p, "canonical")

    last_by_kind: dict[str, int] = {}
    for stage, idx, _impl in resolved:
        if stage.kind != "sppm":
            last_by_kind[stage.kind] = idx
    checkpoints = []
    for kind, src_idx in sorted(last_by_kind.items(), key=lambda kv: kv[1]):
        count = sum(1 for cs in compiled if cs.index <= src_idx)
        checkpoints.append((kind, count))

    return Plan(
        circuit=circuit,
        space=space,
        ancilla=ancilla,
        stages=tuple(compiled),
        origins={p: tuple(v) for p, v in origins.items()},
        sppm_impl=sppm_impl,
        checkpoints=tuple(checkpoints),
    )


# -- sparse propagation -------------------------------------------------


def apply_column_to_photon(state: TwoPhotonState, photon: str, column: ColumnFn) -> TwoPhotonState:
    """Apply a single-photon column operator to one factor of a pair state."""
    first = photon == "A"
    out: dict = {}
    for (ma, mb), amp in state.amplitudes.items():
        for mode, coeff in column(ma if first else mb):
            key = (mode, mb) if first else (ma, mode)
            out[key] = out.get(key, 0j) + amp * coeff
    return TwoPhotonState(state.space, _clean(out))


def _ancilla_norm(state: TwoPhotonState, ancilla: str) -> float:
    total = 0.0
    for (ma, mb), amp in state.amplitudes.items():
        if ma.path == ancilla or mb.path == ancilla:
            total += abs(amp) ** 2
    return total


def restrict_to_circuit(plan: Plan, state: TwoPhotonState, where: str = "state") -> TwoPhotonState:
    """Strip the compile-time ancilla path, checking it carries no light.

    Raises:
        LeakedAmplitude: if more than 1e-10 of the probability sits on the
            ancilla (the interferometer did not return it empty).
    """
    if plan.ancilla is None or state.space == plan.circuit.space():
        return state
    leak = _ancilla_norm(state, plan.ancilla)
    if leak > 1e-10:
        raise LeakedAmplitude(
            f"{where}: probability {leak:.3e} left on ancilla path {plan.ancilla}"
        )
    kept = {
        key: amp
        for key, amp in state.amplitudes.items()
        if key[0].path != plan.ancilla and key[1].path != plan.ancilla
    }
    return TwoPhotonState(plan.circuit.space(), kept)


def _run(plan: Plan, state: TwoPhotonState) -> "list[TwoPhotonState]":
    """States after each compiled stage (index i = after stage i+1)."""
    if state.space != plan.space:
        state = state.with_space(plan.space)
    trace = []
    for cs in plan.stages:
        for op in cs.ops:
            try:
                state = apply_column_to_photon(state, cs.photon, op.column)
            except BellSimError as exc:
                raise type(exc)(
                    f"stage {cs.index + 1} ({cs.label}), element {op.label}: {exc}"
                ) from exc
        trace.append(state)
    return trace


def propagate(plan: Plan, state: TwoPhotonState) -> TwoPhotonState:
    """Final state in the circuit's own space (ancilla checked + stripped)."""
    trace = _run(plan, state)
    final = trace[-1] if trace else state.with_space(plan.space)
    return restrict_to_circuit(plan, final, "after final stage")


def propagate_with_checkpoints(
    plan: Plan, state: TwoPhotonState
) -> tuple[TwoPhotonState, dict[str, TwoPhotonState]]:
    """Propagate and also return the state after each kind's last stage."""
    trace = _run(plan, state)
    marks: dict[str, TwoPhotonState] = {}
    for kind, count in plan.checkpoints:
        snap = trace[count - 1] if count else state.with_space(plan.space)
        marks[kind] = restrict_to_circuit(plan, snap, f"checkpoint {kind}")
    final = trace[-1] if trace else state.with_space(plan.space)
    return restrict_to_circuit(plan, final, "after final stage"), marks


# -- dense assembly oracle ----------------------------------------------


@dataclass(frozen=True)
class StageMatrixRecord:
    index: int
    kind: str
    photon: str
    impl: str
    label: str
    unitarity_residual: float
    note: str = ""


@dataclass
class AssembledUnitary:
    """Factored dense operator: joint action is kron(u_a, u_b).

    ``valid_a``/``valid_b`` mark basis columns on which the factors are
    genuinely unitary; columns killed by OAM overflow are zero and
    excluded, columns inside a sign-domain device's identity fallback are
    included (the fallback is itself unitary).
    """

    space: ModeSpace
    u_a: np.ndarray
    u_b: np.ndarray
    valid_a: np.ndarray
    valid_b: np.ndarray
    records: tuple[StageMatrixRecord, ...] = field(default_factory=tuple)

    def apply(self, state: TwoPhotonState) -> TwoPhotonState:
        if state.space != self.space:
            state = state.with_space(self.space)
        dim = self.space.dimension
        index = self.space.index
        dense = np.zeros((dim, dim), dtype=np.complex128)
        for (ma, mb), amp in state.amplitudes.items():
            dense[index(ma), index(mb)] = amp
        dense = self.u_a @ dense @ self.u_b.T
        modes = self.space.modes()
        out = {}
        for i, j in zip(*np.nonzero(np.abs(dense) > DROP_EPS)):
            out[(modes[i], modes[j])] = complex(dense[i, j])
        return TwoPhotonState(self.space, out)

    def joint_matrix(self, max_dimension: int = 48) -> np.ndarray:
        """Materialized kron(u_a, u_b); guarded, only for small spaces.

        The joint matrix is square of side dimension**2, so even modest
        per-photon spaces explode (108 -> a 11664x11664 array); the
        factored form plus :meth:`apply` covers those.
        """
        dim = self.space.dimension
        if dim > max_dimension:
            raise DimensionCap(
                f"joint matrix would be {dim * dim}x{dim * dim}; "
                f"per-photon dimension {dim} exceeds the {max_dimension} cap"
            )
        return np.kron(self.u_a, self.u_b)


def _column_matrix(column: ColumnFn, space: ModeSpace) -> tuple[np.ndarray, np.ndarray, str]:
    """Dense matrix of a column operator.

    Columns whose source mode overflows the OAM bound are zeroed and
    flagged invalid; columns a sign-domain device cannot sort fall back
    to identity and are noted.
    """
    dim = space.dimension
    index = space.index
    mat = np.zeros((dim, dim), dtype=np.complex128)
    valid = np.ones(dim, dtype=bool)
    note = ""
    for j, mode in enumerate(space.modes()):
        try:
            for out_mode, coeff in column(mode):
                mat[index(out_mode), j] = coeff
        except OamOverflow:
            mat[:, j] = 0.0
            valid[j] = False
        except UnsortableOam:
            mat[:, j] = 0.0
            mat[j, j] = 1.0
            note = "identity fallback outside the sortable OAM domain"
    return mat, valid, note


def _unitarity_residual(mat: np.ndarray, valid: np.ndarray) -> float:
    if not valid.any():
        return 0.0
    sub = mat[:, valid]
    gram = sub.conj().T @ sub
    return float(np.max(np.abs(gram - np.eye(gram.shape[0]))))


def assemble(plan: Plan, max_photon_dimension: int = MAX_PHOTON_DIMENSION) -> AssembledUnitary:
    """Dense per-photon matrices for a plan, with per-stage unitarity checks.

    Raises:
        DimensionCap: if the per-photon dimension exceeds the cap.
    """
    dim = plan.space.dimension
    if dim > max_photon_dimension:
        raise DimensionCap(
            f"per-photon dimension {dim} exceeds cap {max_photon_dimension}"
        )
    totals = {p: np.eye(dim, dtype=np.complex128) for p in plan.circuit.photons}
    valids = {p: np.ones(dim, dtype=bool) for p in plan.circuit.photons}
    records = []
    for cs in plan.stages:
        stage_mat = np.eye(dim, dtype=np.complex128)
        stage_valid = np.ones(dim, dtype=bool)
        notes = [cs.note] if cs.note else []
        for op in cs.ops:
            mat, valid, note = _column_matrix(op.column, plan.space)
            stage_mat = mat @ stage_mat
            stage_valid &= valid
            if note and note not in notes:
                notes.append(note)
        residual = _unitarity_residual(stage_mat, stage_valid)
        records.append(
            StageMatrixRecord(
                cs.index, cs.kind, cs.photon, cs.impl, cs.label, residual, "; ".join(notes)
            )
        )
        totals[cs.photon] = stage_mat @ totals[cs.photon]
        valids[cs.photon] &= stage_valid
    return AssembledUnitary(
        space=plan.space,
        u_a=totals["A"],
        u_b=totals["B"],
        valid_a=valids["A"],
        valid_b=valids["B"],
        records=tuple(records),
    )
