"""Compilation, sparse propagation, and the dense matrix oracle.

The oracle cross-check is the load-bearing test here: the same plan is
run as sparse dictionary updates and as dense per-photon matrices built
column by column from the same operators, and the two must agree on a
seeded batch of random input states.
"""

import numpy as np
import pytest

from bellsim.circuit import builtin_document, parse_circuit
from bellsim.engine import (
    ANCILLA_PATH,
    assemble,
    compile_circuit,
    propagate,
    propagate_with_checkpoints,
    restrict_to_circuit,
)
from bellsim.errors import (
    DimensionCap,
    LeakedAmplitude,
    OamOverflow,
    UnsortableOam,
)
from bellsim.state import BasisMode, ModeSpace, TwoPhotonState

FIG2 = parse_circuit(builtin_document("fig2"))
SPACE = FIG2.space()

_SECTOR = [
    (BasisMode(pa, 0, x), BasisMode(pb, 0, y))
    for x in ("a1", "b1")
    for y in ("a2", "b2")
    for pa in ("H", "V")
    for pb in ("H", "V")
]


def _random_sector_state(rng):
    vec = rng.standard_normal(len(_SECTOR)) + 1j * rng.standard_normal(len(_SECTOR))
    vec /= np.linalg.norm(vec)
    return TwoPhotonState(SPACE, dict(zip(_SECTOR, map(complex, vec))))


def _maxdiff(x, y):
    keys = set(x.amplitudes) | set(y.amplitudes)
    return max(
        abs(x.amplitudes.get(k, 0.0) - y.amplitudes.get(k, 0.0)) for k in keys
    )


# -- compilation --------------------------------------------------------


def test_plan_shape_for_builtin():
    plan = compile_circuit(FIG2)
    assert len(plan.stages) == 9  # sppm stages compile to measurement data
    assert plan.ancilla is None
    assert plan.space == SPACE
    assert plan.origins == {"A": ("a1", "b1"), "B": ("a2", "b2")}
    assert plan.sppm_impl == {p: "canonical" for p in ("a1", "b1", "a2", "b2")}
    assert plan.checkpoints == (
        ("p_cos", 2),
        ("o_cps", 4),
        ("dp_stage", 5),
        ("oh", 7),
        ("hwp", 9),
    )


def test_decomposed_plan_extends_space():
    plan = compile_circuit(FIG2, impl_override="decomposed")
    assert plan.ancilla == ANCILLA_PATH
    assert ANCILLA_PATH in plan.space.paths
    assert plan.space.dimension == SPACE.dimension + 2 * (2 * FIG2.lmax + 1)
    # far more element ops than canonical stages
    assert sum(len(s.ops) for s in plan.stages) > 50


def test_origin_fallback_without_sppm_stages():
    circuit = parse_circuit(
        "paths a1 a2 b1 b2\nstage qwp photon=A paths=a1\n"
    )
    plan = compile_circuit(circuit)
    assert plan.origins == {"A": ("a1", "b1"), "B": ("a2", "b2")}


def test_explicit_origins_respected():
    circuit = parse_circuit(
        "paths w1 w2\nstage sppm photon=A paths=w1\nstage sppm photon=B paths=w2\n"
    )
    plan = compile_circuit(circuit)
    assert plan.origins == {"A": ("w1",), "B": ("w2",)}


def test_bad_override_rejected():
    with pytest.raises(ValueError):
        compile_circuit(FIG2, impl_override="fast")


# -- propagation --------------------------------------------------------


def test_empty_plan_is_identity():
    circuit = parse_circuit("lmax 4\npaths a1 a2 b1 b2\n")
    plan = compile_circuit(circuit)
    st = TwoPhotonState(
        circuit.space(), {(_SECTOR[0][0], _SECTOR[0][1]): 1.0}
    )
    assert propagate(plan, st) == st


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_canonical_and_decomposed_agree(seed):
    rng = np.random.default_rng(seed)
    plan_c = compile_circuit(FIG2, "canonical")
    plan_d = compile_circuit(FIG2, "decomposed")
    for _ in range(5):
        st = _random_sector_state(rng)
        out_c = propagate(plan_c, st)
        out_d = propagate(plan_d, st)
        assert _maxdiff(out_c, out_d) < 1e-12


def test_checkpoint_states_agree_across_impls():
    plan_c = compile_circuit(FIG2, "canonical")
    plan_d = compile_circuit(FIG2, "decomposed")
    st = _random_sector_state(np.random.default_rng(4))
    _, marks_c = propagate_with_checkpoints(plan_c, st)
    _, marks_d = propagate_with_checkpoints(plan_d, st)
    assert set(marks_c) == {"p_cos", "o_cps", "dp_stage", "oh", "hwp"}
    for name in marks_c:
        assert _maxdiff(marks_c[name], marks_d[name]) < 1e-12


def test_propagation_error_names_stage():
    circuit = parse_circuit(
        "paths w x\nstage spp photon=A paths=w l=3\nstage spp photon=A paths=w l=3\n"
    )
    st = TwoPhotonState(
        circuit.space(),
        {(BasisMode("H", 0, "w"), BasisMode("H", 0, "x")): 1.0},
    )
    with pytest.raises(OamOverflow) as info:
        propagate(compile_circuit(circuit), st)
    assert "stage 2" in str(info.value)
    assert "spp" in str(info.value)


def test_sign_domain_error_names_stage():
    circuit = parse_circuit("paths w x\nstage o_cps photon=A paths=w,x\n")
    st = TwoPhotonState(
        circuit.space(),
        {(BasisMode("H", 0, "w"), BasisMode("H", 0, "x")): 1.0},
    )
    with pytest.raises(UnsortableOam) as info:
        propagate(compile_circuit(circuit), st)
    assert "stage 1" in str(info.value)


def test_restrict_raises_on_ancilla_light():
    plan = compile_circuit(FIG2, "decomposed")
    bad = TwoPhotonState(
        plan.space,
        {(BasisMode("H", 1, ANCILLA_PATH), BasisMode("H", 0, "a2")): 1.0},
    )
    with pytest.raises(LeakedAmplitude):
        restrict_to_circuit(plan, bad, "unit test")


# -- dense assembly -----------------------------------------------------


def test_assembly_matches_sparse_on_random_batch():
    """50 seeded random input-sector states through both evolutions."""
    rng = np.random.default_rng(0xB5A)
    plan = compile_circuit(FIG2)
    dense = assemble(plan)
    for _ in range(50):
        st = _random_sector_state(rng)
        sparse_out = propagate(plan, st)
        dense_out = dense.apply(st)
        assert _maxdiff(sparse_out, dense_out) < 1e-10


def test_assembly_unitarity_residuals():
    dense = assemble(compile_circuit(FIG2))
    assert len(dense.records) == 9
    for record in dense.records:
        assert record.unitarity_residual <= 1e-10, record


def test_assembly_decomposed_unitarity():
    dense = assemble(compile_circuit(FIG2, "decomposed"))
    for record in dense.records:
        assert record.unitarity_residual <= 1e-10, record


def test_assembly_masks_overflow_columns():
    """The polarization shift kills l=+4 H and l=-4 V columns on its
    paths; everything else stays valid for photon A."""
    dense = assemble(compile_circuit(FIG2))
    invalid = [m for m, ok in zip(SPACE.modes(), dense.valid_a) if not ok]
    expect = {
        BasisMode("H", 4, "a1"),
        BasisMode("V", -4, "a1"),
        BasisMode("H", 4, "b1"),
        BasisMode("V", -4, "b1"),
    }
    assert set(invalid) == expect
    assert int(dense.valid_a.sum()) == SPACE.dimension - 4


def test_assembly_notes_identity_fallback():
    dense = assemble(compile_circuit(FIG2))
    noted = {r.kind for r in dense.records if "identity" in r.note}
    assert "o_cps" in noted and "oh" in noted


def test_dimension_cap():
    with pytest.raises(DimensionCap):
        assemble(compile_circuit(FIG2), max_photon_dimension=50)


def test_joint_matrix_guard_and_value():
    dense = assemble(compile_circuit(FIG2))
    with pytest.raises(DimensionCap):
        dense.joint_matrix()  # 108 per photon is far past the cap

    mini = parse_circuit(
        "lmax 1\npaths u v\n"
        "stage hwp photon=A paths=u theta=pi/8\n"
        "stage bs photon=B paths=u,v\n"
    )
    plan = compile_circuit(mini)
    small = assemble(plan)
    joint = small.joint_matrix()
    dim = mini.space().dimension
    assert joint.shape == (dim * dim, dim * dim)
    assert np.allclose(joint, np.kron(small.u_a, small.u_b))
    # the joint operator is unitary outright (no overflow columns here)
    assert np.allclose(joint.conj().T @ joint, np.eye(dim * dim), atol=1e-12)
