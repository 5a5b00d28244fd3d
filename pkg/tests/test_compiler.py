"""Circuit compilation: environment tensors, monotone gate updates,
iterative layer extraction, and the grow-then-reoptimize protocol."""

import numpy as np
import pytest

from conftest import (
    random_staircase_circuit,
    random_state,
    random_unitary4,
)
from qimgload.compiler import (
    OptimizerTrace,
    _optimal_gate,
    environment_tensor,
    grow_and_optimize,
    iterative_construct,
    sweep_optimize,
    update_gate,
)
from qimgload.errors import ValidationError
from qimgload.mps import from_dense, to_dense
from qimgload.simulator import apply_gate_dense, run


def circuit_overlap(circuit, target_vec):
    return abs(np.vdot(target_vec, run(circuit).amplitudes))


def overlap_with_replacement(circuit, m, w, target_vec):
    """<target| circuit with gate m replaced by w |0>, by direct simulation."""
    gates = circuit.all_gates()
    vec = np.zeros(2**circuit.n_qubits, dtype=complex)
    vec[0] = 1.0
    for i, g in enumerate(gates):
        matrix = w if i == m - 1 else g.matrix
        vec = apply_gate_dense(vec, matrix, g.site, circuit.n_qubits)
    return np.vdot(target_vec, vec)


class TestEnvironmentTensor:
    def test_linearity_certificate(self, rng):
        # Tr[W F_m] must equal the full overlap with W substituted, for any W
        for trial in range(5):
            n = int(rng.integers(3, 7))
            circuit = random_staircase_circuit(rng, n, int(rng.integers(1, 4)))
            target = random_state(rng, n, complex_valued=True)
            m = int(rng.integers(1, len(circuit.all_gates()) + 1))
            f = environment_tensor(circuit, m, target)
            for _ in range(4):
                w = random_unitary4(rng, complex_valued=True)
                direct = overlap_with_replacement(circuit, m, w, target)
                assert abs(np.trace(w @ f.matrix) - direct) < 1e-9

    def test_gate_index_bounds(self, rng):
        circuit = random_staircase_circuit(rng, 4, 1)
        target = random_state(rng, 4)
        with pytest.raises(ValidationError):
            environment_tensor(circuit, 0, target)
        with pytest.raises(ValidationError):
            environment_tensor(circuit, 4, target)

    def test_target_dimension_checked(self, rng):
        circuit = random_staircase_circuit(rng, 4, 1)
        with pytest.raises(ValidationError):
            environment_tensor(circuit, 1, random_state(rng, 3))


class TestOptimalGate:
    def test_achieves_nuclear_norm(self, rng):
        # [DERIVED] max over unitaries of Re Tr[W F] is the nuclear norm of F
        for _ in range(10):
            f = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            w, value = _optimal_gate(f)
            nuclear = np.sum(np.linalg.svd(f, compute_uv=False))
            assert value == pytest.approx(nuclear, abs=1e-10)
            assert np.trace(w @ f).real == pytest.approx(nuclear, abs=1e-10)
            np.testing.assert_allclose(w.conj().T @ w, np.eye(4), atol=1e-12)

    def test_beats_random_unitaries(self, rng):
        f = rng.standard_normal((4, 4))
        _, value = _optimal_gate(f)
        for _ in range(20):
            w = random_unitary4(rng, complex_valued=True)
            assert np.trace(w @ f).real <= value + 1e-10

    def test_update_gate_never_decreases_overlap(self, rng):
        # replacing any single gate by its environment optimum is monotone
        for trial in range(10):
            n = int(rng.integers(3, 6))
            circuit = random_staircase_circuit(rng, n, 2)
            target = random_state(rng, n)
            m = int(rng.integers(1, len(circuit.all_gates()) + 1))
            before = circuit_overlap(circuit, target)
            f = environment_tensor(circuit, m, target)
            new_gate = update_gate(f)
            after = abs(overlap_with_replacement(circuit, m, new_gate.matrix, target))
            assert after >= before - 1e-12


class TestSweepOptimize:
    def test_overlaps_monotone_within_and_across_sweeps(self, rng):
        target, _ = from_dense(random_state(rng, 6), chi_max=8)
        circuit, _ = iterative_construct(target, 2)
        trace = OptimizerTrace()
        sweep_optimize(circuit, target, 10, trace)
        diffs = np.diff(trace.gate_overlaps)
        assert np.all(diffs >= -1e-12)

    def test_improves_on_iterative_start(self, rng):
        vec = random_state(rng, 6)
        target, _ = from_dense(vec, chi_max=8)
        circuit, _ = iterative_construct(target, 2)
        start = circuit_overlap(circuit, vec)
        optimized, trace = sweep_optimize(circuit, target, 50)
        assert trace.final_overlap > start
        assert circuit_overlap(optimized, vec) == pytest.approx(trace.final_overlap, abs=1e-9)

    def test_preserves_layer_structure(self, rng):
        target, _ = from_dense(random_state(rng, 5), chi_max=4)
        circuit, _ = iterative_construct(target, 3)
        optimized, _ = sweep_optimize(circuit, target, 3)
        assert optimized.depth == circuit.depth
        assert [g.site for g in optimized.all_gates()] == [
            g.site for g in circuit.all_gates()
        ]

    def test_early_stop_on_rel_tol(self, rng):
        target, _ = from_dense(random_state(rng, 4), chi_max=2)
        circuit, _ = iterative_construct(target, 1)
        _, trace = sweep_optimize(circuit, target, 500, rel_tol=1e-12)
        assert len(trace.records) < 500

    def test_zero_sweeps_is_identity(self, rng):
        target, _ = from_dense(random_state(rng, 4), chi_max=4)
        circuit, _ = iterative_construct(target, 1)
        same, trace = sweep_optimize(circuit, target, 0)
        assert trace.records == []
        np.testing.assert_allclose(
            run(same).amplitudes, run(circuit).amplitudes, atol=1e-15
        )


class TestIterativeConstruct:
    def test_chi2_target_is_exact_at_depth_one(self, rng):
        target, _ = from_dense(random_state(rng, 6), chi_max=2)
        circuit, trace = iterative_construct(target, 1)
        assert circuit_overlap(circuit, to_dense(target)) == pytest.approx(1.0, abs=1e-10)
        assert trace.records[-1].overlap == pytest.approx(1.0, abs=1e-10)

    def test_deeper_is_monotonically_better(self, rng):
        target, _ = from_dense(random_state(rng, 7), chi_max=8)
        vec = to_dense(target)
        overlaps = [
            circuit_overlap(iterative_construct(target, d)[0], vec) for d in (1, 2, 3, 4)
        ]
        assert all(b >= a - 1e-12 for a, b in zip(overlaps, overlaps[1:]))

    def test_trace_matches_final_overlap(self, rng):
        # the residual's vacuum amplitude after undoing all layers equals
        # the prepared-state fidelity
        target, _ = from_dense(random_state(rng, 6), chi_max=4)
        circuit, trace = iterative_construct(target, 3)
        assert trace.records[-1].overlap == pytest.approx(
            circuit_overlap(circuit, to_dense(target)), abs=1e-8
        )

    def test_depth_sets_layer_count(self, rng):
        target, _ = from_dense(random_state(rng, 5), chi_max=4)
        assert iterative_construct(target, 4)[0].depth == 4

    def test_rejects_unnormalized_target(self, rng):
        from qimgload.mps import MPS

        target, _ = from_dense(random_state(rng, 4), chi_max=2)
        bad = MPS(tuple(t * 1.1 for t in target.tensors))
        with pytest.raises(ValidationError):
            iterative_construct(bad, 1)

    def test_rejects_bad_depth(self, rng):
        target, _ = from_dense(random_state(rng, 4), chi_max=2)
        with pytest.raises(ValidationError):
            iterative_construct(target, 0)


class TestGrowAndOptimize:
    def test_beats_pure_iterative(self, rng):
        vec = random_state(rng, 6)
        target, _ = from_dense(vec, chi_max=8)
        iterative = circuit_overlap(iterative_construct(target, 3)[0], vec)
        grown, trace = grow_and_optimize(target, 3, sweeps_per_stage=30)
        assert trace.final_overlap >= iterative - 1e-12
        assert circuit_overlap(grown, vec) == pytest.approx(trace.final_overlap, abs=1e-9)

    def test_stage_count_and_depth(self, rng):
        target, _ = from_dense(random_state(rng, 5), chi_max=4)
        circuit, trace = grow_and_optimize(target, 3, sweeps_per_stage=5)
        assert circuit.depth == 3
        assert {r.stage for r in trace.records} == {1, 2, 3}

    def test_trace_monotone_within_each_stage(self, rng):
        target, _ = from_dense(random_state(rng, 6), chi_max=8)
        _, trace = grow_and_optimize(target, 2, sweeps_per_stage=10)
        for stage in (1, 2):
            overlaps = [r.overlap for r in trace.records if r.stage == stage]
            assert all(b >= a - 1e-12 for a, b in zip(overlaps, overlaps[1:]))

    def test_provenance_recorded(self, rng):
        target, _ = from_dense(random_state(rng, 4), chi_max=2)
        circuit, _ = grow_and_optimize(target, 2, sweeps_per_stage=2)
        assert circuit.provenance["method"] == "grow_and_optimize"
        assert circuit.provenance["depth"] == 2


class TestTrace:
    def test_csv_shape(self, rng):
        target, _ = from_dense(random_state(rng, 4), chi_max=4)
        circuit, _ = iterative_construct(target, 1)
        _, trace = sweep_optimize(circuit, target, 3)
        lines = trace.to_csv().splitlines()
        assert lines[0] == "stage,sweep,overlap,infidelity"
        assert len(lines) == 4

    def test_infidelity_clamped(self):
        from qimgload.compiler import TraceRecord

        assert TraceRecord(0, 1, 1.0 + 1e-12).infidelity == 0.0
