"""Circuit compilation against a target MPS.

Two routes, matching the two published constructions:

* iterative disentangling: repeatedly truncate the residual state to
  bond dimension 2 and peel off one exact staircase layer.  Each layer's
  adjoint is folded into the residual, so the first-extracted layer ends
  up applied last in the finished circuit.
* gate-by-gate sweeps: the circuit-target overlap is linear in any single
  gate, overlap = Tr[U_m F_m]; replacing U_m by the unitary factor of the
  SVD of F_m raises the overlap to the nuclear norm of F_m, so every
  update is monotone.

`grow_and_optimize` interleaves the two: grow one disentangling layer
from the residual of the optimized circuit, then re-sweep all layers.

Overlaps and environments use the dense statevector backend (N capped at
20 sites); residuals are tracked as MPS with a working bond cap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuit import CircuitLayer, LayeredCircuit, TwoQubitGate, layer_from_chi2_mps
from .errors import NumericError, ValidationError
from .image_codec import AmplitudeState
from .mps import (
    MPS,
    apply_two_qubit_gate,
    inner,
    left_canonicalize,
    to_dense,
    truncate,
)
from .simulator import StateVector, apply_gate_dense

DEFAULT_CHI_MAX = 32
DEFAULT_SWEEPS = 200


@dataclass(frozen=True)
class EnvironmentTensor:
    """4x4 matrix F for the gate at (1-based) index m: overlap = Tr[U_m F]."""

    gate_index: int
    site: int
    matrix: np.ndarray


@dataclass
class TraceRecord:
    stage: int
    sweep: int
    overlap: float

    @property
    def infidelity(self) -> float:
        return max(0.0, 1.0 - self.overlap)


@dataclass
class OptimizerTrace:
    records: list = field(default_factory=list)
    gate_overlaps: list = field(default_factory=list)

    def to_csv(self) -> str:
        lines = ["stage,sweep,overlap,infidelity"]
        for r in self.records:
            lines.append(f"{r.stage},{r.sweep},{repr(r.overlap)},{repr(r.infidelity)}")
        return "\n".join(lines) + "\n"

    @property
    def final_overlap(self) -> float:
        return self.records[-1].overlap if self.records else float("nan")


def _target_dense(target) -> np.ndarray:
    if isinstance(target, MPS):
        return to_dense(target)
    if isinstance(target, AmplitudeState):
        return np.asarray(target.amplitudes)
    if isinstance(target, StateVector):
        return np.asarray(target.amplitudes)
    return np.asarray(target)


def _environment(prefix: np.ndarray, suffix: np.ndarray, site: int, n_qubits: int) -> np.ndarray:
    """F[c, r] = sum over spectators of prefix[x, c, y] * conj(suffix[x, r, y])."""
    pre = 2**site
    post = 2 ** (n_qubits - site - 2)
    a = prefix.reshape(pre, 4, post)
    b = suffix.reshape(pre, 4, post)
    return np.einsum("xcy,xry->cr", a, np.conj(b))


def _optimal_gate(f: np.ndarray):
    """Unitary maximizing Re Tr[W F] and the achieved value (nuclear norm of F)."""
    if not np.all(np.isfinite(f)):
        raise NumericError("environment tensor has non-finite entries")
    u, s, vt = np.linalg.svd(f)
    w = (u @ vt).conj().T
    return w, float(np.sum(s))


def environment_tensor(circuit: LayeredCircuit, m: int, target) -> EnvironmentTensor:
    """Environment of gate m (1-based, application order) against the target.

    Satisfies Tr[W F_m] = <target| U_M ... W ... U_1 |0> for any 4x4 W in
    gate m's slot.
    """
    gates = circuit.all_gates()
    if not 1 <= m <= len(gates):
        raise ValidationError(f"gate index {m} out of range 1..{len(gates)}")
    n = circuit.n_qubits
    targ = _target_dense(target)
    if targ.size != 2**n:
        raise ValidationError("target dimension does not match the circuit")
    prefix = np.zeros(2**n, dtype=targ.dtype)
    prefix[0] = 1.0
    for g in gates[: m - 1]:
        prefix = apply_gate_dense(prefix, g.matrix, g.site, n)
    suffix = targ
    for g in reversed(gates[m:]):
        suffix = apply_gate_dense(suffix, g.matrix.conj().T, g.site, n)
    site = gates[m - 1].site
    return EnvironmentTensor(m, site, _environment(prefix, suffix, site, n))


def update_gate(f: EnvironmentTensor) -> TwoQubitGate:
    """Nuclear-norm-optimal replacement gate for the given environment."""
    w, _ = _optimal_gate(f.matrix)
    return TwoQubitGate(f.site, w)


def _rebuild(circuit: LayeredCircuit, gates: list) -> LayeredCircuit:
    """Reassemble a circuit from a flat gate list, keeping the layer structure."""
    layers = []
    pos = 0
    for layer in circuit.layers:
        k = len(layer.gates)
        layers.append(CircuitLayer(tuple(gates[pos : pos + k])))
        pos += k
    return LayeredCircuit(circuit.n_qubits, tuple(layers), provenance=dict(circuit.provenance))


def sweep_optimize(
    circuit: LayeredCircuit,
    target,
    n_sweeps: int,
    trace: OptimizerTrace | None = None,
    stage: int = 0,
    rel_tol: float | None = None,
):
    """Gate-by-gate sweeps in forward application order.

    Each sweep rebuilds the suffix states once (adjoint pass from the
    target), then walks gates 1..M recomputing the environment from the
    cached prefix/suffix pair and replacing the gate.  Per-update overlaps
    land in ``trace.gate_overlaps``; per-sweep overlaps in ``trace.records``.
    """
    if n_sweeps < 0:
        raise ValidationError("sweep count must be >= 0")
    targ = _target_dense(target)
    n = circuit.n_qubits
    if targ.size != 2**n:
        raise ValidationError("target dimension does not match the circuit")
    trace = trace if trace is not None else OptimizerTrace()
    gates = list(circuit.all_gates())
    m_total = len(gates)
    previous = None
    for sweep in range(1, n_sweeps + 1):
        suffix = [None] * (m_total + 1)
        suffix[m_total] = targ
        for m in range(m_total - 1, 0, -1):
            g = gates[m]
            suffix[m] = apply_gate_dense(suffix[m + 1], g.matrix.conj().T, g.site, n)
        prefix = np.zeros(2**n, dtype=targ.dtype)
        prefix[0] = 1.0
        overlap = 0.0
        for m in range(1, m_total + 1):
            site = gates[m - 1].site
            f = _environment(prefix, suffix[m], site, n)
            w, overlap = _optimal_gate(f)
            gates[m - 1] = TwoQubitGate(site, w)
            trace.gate_overlaps.append(overlap)
            prefix = apply_gate_dense(prefix, w, site, n)
        trace.records.append(TraceRecord(stage, sweep, overlap))
        if rel_tol is not None and previous is not None and overlap - previous < rel_tol:
            break
        previous = overlap
    return _rebuild(circuit, gates), trace


def _zero_amplitude(m: MPS) -> float:
    """<0...0|m>, contracted directly from the sigma=0 slices."""
    row = m.tensors[0][:, 0, :]
    for t in m.tensors[1:]:
        row = row @ t[:, 0, :]
    return abs(complex(row[0, 0]))


def _apply_layer_adjoint(residual: MPS, layer: CircuitLayer, chi_max: int) -> MPS:
    for g in reversed(layer.gates):
        residual, _ = apply_two_qubit_gate(residual, g.matrix.conj().T, g.site, chi_max)
    return residual


def _check_target(target: MPS) -> MPS:
    norm = abs(inner(target, target))
    if abs(norm - 1.0) > 1e-8:
        raise ValidationError(f"target must have unit norm, got {np.sqrt(norm)}")
    return left_canonicalize(target)


def iterative_construct(target: MPS, depth: int, chi_max: int = DEFAULT_CHI_MAX):
    """Depth-D circuit from repeated chi=2 truncation of the residual.

    Layer i is the exact staircase for the chi=2 truncation of the state
    left after undoing layers 1..i-1; the finished circuit applies the
    layers in reverse extraction order.  Returns (circuit, trace) where
    the trace holds the overlap after each extracted layer.
    """
    if depth < 1:
        raise ValidationError("depth must be >= 1")
    if chi_max < 2:
        raise ValidationError("working bond cap must be >= 2")
    residual = _check_target(target)
    trace = OptimizerTrace()
    extracted = []
    for i in range(1, depth + 1):
        truncated, _ = truncate(residual, 2)
        layer = layer_from_chi2_mps(truncated)
        extracted.append(layer)
        residual = _apply_layer_adjoint(residual, layer, chi_max)
        trace.records.append(TraceRecord(i, 0, _zero_amplitude(residual)))
    circuit = LayeredCircuit(
        target.n_sites,
        tuple(reversed(extracted)),
        provenance={"method": "iterative", "depth": depth, "chi_max": chi_max},
    )
    return circuit, trace


def grow_and_optimize(
    target: MPS,
    depth: int,
    sweeps_per_stage: int = DEFAULT_SWEEPS,
    chi_max: int = DEFAULT_CHI_MAX,
):
    """Grow-then-reoptimize protocol.

    At stage d a fresh disentangling layer is built from the residual of
    the current optimized circuit and prepended in application order, then
    all d layers are swept.  Returns the depth-D circuit and full trace.
    """
    if depth < 1:
        raise ValidationError("depth must be >= 1")
    target_canonical = _check_target(target)
    trace = OptimizerTrace()
    layers: list = []
    circuit = None
    for stage in range(1, depth + 1):
        residual = target_canonical
        for layer in reversed(layers):
            residual = _apply_layer_adjoint(residual, layer, chi_max)
        truncated, _ = truncate(residual, 2)
        layers.insert(0, layer_from_chi2_mps(truncated))
        circuit = LayeredCircuit(
            target.n_sites,
            tuple(layers),
            provenance={
                "method": "grow_and_optimize",
                "depth": depth,
                "chi_max": chi_max,
                "sweeps_per_stage": sweeps_per_stage,
            },
        )
        circuit, trace = sweep_optimize(circuit, target_canonical, sweeps_per_stage, trace, stage)
        layers = list(circuit.layers)
    return circuit, trace
