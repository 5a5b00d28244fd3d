"""Layered staircase circuits of two-qubit gates, and the exact conversion
of a bond-dimension-2 left-canonical MPS into a single circuit layer.

A layer holds one gate per adjacent qubit pair, stored in application
order.  Freshly built layers apply the gate on pair (N-2, N-1) first and
the gate on (0, 1) last, so the pair holding the most significant ladder
rung is touched last.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InputFormatError, ValidationError
from .mps import MPS, isometry_defect

CIRCUIT_FORMAT_VERSION = 1


@dataclass(frozen=True)
class TwoQubitGate:
    """4x4 unitary acting on adjacent qubits (site, site+1), site bit most significant."""

    site: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.shape != (4, 4):
            raise ValidationError("gate matrix must be 4x4")
        if np.max(np.abs(m.conj().T @ m - np.eye(4))) > 1e-10:
            raise ValidationError(f"gate at site {self.site} is not unitary within 1e-10")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def adjoint(self) -> "TwoQubitGate":
        return TwoQubitGate(self.site, self.matrix.conj().T)


@dataclass(frozen=True)
class CircuitLayer:
    """One gate per adjacent pair, in application order."""

    gates: tuple

    def __post_init__(self):
        gates = tuple(self.gates)
        if not gates:
            raise ValidationError("a layer must contain at least one gate")
        sites = sorted(g.site for g in gates)
        if sites != list(range(len(gates))):
            raise ValidationError("a layer needs exactly one gate per adjacent pair")
        object.__setattr__(self, "gates", gates)

    @property
    def n_qubits(self) -> int:
        return len(self.gates) + 1


@dataclass(frozen=True)
class LayeredCircuit:
    n_qubits: int
    layers: tuple
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ValidationError("a circuit needs at least one layer")
        for layer in layers:
            if layer.n_qubits != self.n_qubits:
                raise ValidationError("all layers must share the circuit's qubit count")
        object.__setattr__(self, "layers", layers)

    @property
    def depth(self) -> int:
        return len(self.layers)

    def all_gates(self) -> list:
        """Gates in global application order (layer 0 first)."""
        return [g for layer in self.layers for g in layer.gates]


def embed_isometry(v: np.ndarray) -> np.ndarray:
    """Complete an isometry (orthonormal columns, 2 or 4 rows) to a unitary.

    The first m columns of the result equal v; the remaining columns are
    canonical basis vectors orthonormalized against them in index order
    (Gram-Schmidt with one re-orthogonalization pass).
    """
    v = np.asarray(v)
    if v.ndim != 2 or v.shape[0] not in (2, 4) or v.shape[1] > v.shape[0]:
        raise ValidationError(f"expected a tall 2- or 4-row isometry, got shape {v.shape}")
    if np.max(np.abs(v.conj().T @ v - np.eye(v.shape[1]))) > 1e-10:
        raise ValidationError("input columns are not orthonormal within 1e-10")
    dim, m = v.shape
    if m == dim:
        return np.array(v)
    cols = [v[:, j] for j in range(m)]
    for j in range(dim):
        if len(cols) == dim:
            break
        cand = np.zeros(dim, dtype=v.dtype)
        cand[j] = 1.0
        for _ in range(2):
            for c in cols:
                cand = cand - c * (np.conj(c) @ cand)
        norm = np.linalg.norm(cand)
        if norm > 1e-6:
            cols.append(cand / norm)
    if len(cols) != dim:
        raise ValidationError("failed to complete isometry to a unitary")
    return np.stack(cols, axis=1)


def layer_from_chi2_mps(m: MPS) -> CircuitLayer:
    """Exact staircase layer preparing a left-canonical MPS with bonds <= 2.

    The gate on pair (0, 1) fuses the first two site tensors (its leading
    columns are the fused state-prep isometry); each later tensor embeds
    directly as the gate on the pair ending at its site.  Gates are
    returned in application order: pair (N-2, N-1) first, (0, 1) last.
    """
    if m.n_sites < 2:
        raise ValidationError("need at least 2 sites to build a layer")
    if m.max_bond > 2:
        raise ValidationError(f"max bond {m.max_bond} exceeds 2; truncate first")
    if isometry_defect(m) > 1e-10:
        raise ValidationError("MPS is not left-canonical within 1e-10")
    dtype = np.result_type(*(t.dtype for t in m.tensors))
    gates = []
    for k in range(m.n_sites - 2, 0, -1):
        a = m.tensors[k + 1]  # (left, 2, right)
        left, _, right = a.shape
        v = np.zeros((4, right), dtype=dtype)
        v[: 2 * left] = a.reshape(2 * left, right)
        gates.append(TwoQubitGate(k, embed_isometry(v)))
    fused = np.tensordot(m.tensors[0][0], m.tensors[1], axes=(1, 0))  # (2, 2, right)
    gates.append(TwoQubitGate(0, embed_isometry(fused.reshape(4, -1))))
    return CircuitLayer(tuple(gates))


def adjoint(c: LayeredCircuit) -> LayeredCircuit:
    """Inverse circuit: layers and within-layer order reversed, gates conjugated."""
    layers = tuple(
        CircuitLayer(tuple(g.adjoint() for g in reversed(layer.gates)))
        for layer in reversed(c.layers)
    )
    return LayeredCircuit(c.n_qubits, layers, provenance=dict(c.provenance))


def cnot_count(c: LayeredCircuit) -> int:
    """CNOT-equivalent count at 2 per staircase gate: 2 * depth * (N - 1)."""
    return 2 * c.depth * (c.n_qubits - 1)


# ---------------------------------------------------------------------------
# Serialization: versioned JSON, floats at full round-trip precision

def _matrix_to_json(m: np.ndarray) -> dict:
    entry = {"real": np.real(m).tolist()}
    if np.iscomplexobj(m) and np.any(np.imag(m) != 0):
        entry["imag"] = np.imag(m).tolist()
    return entry


def _matrix_from_json(d: dict) -> np.ndarray:
    m = np.array(d["real"], dtype=float)
    if "imag" in d:
        m = m + 1j * np.array(d["imag"], dtype=float)
    return m


def circuit_to_dict(c: LayeredCircuit) -> dict:
    return {
        "version": CIRCUIT_FORMAT_VERSION,
        "n_qubits": c.n_qubits,
        "layers": [
            [{"site": g.site, "matrix": _matrix_to_json(g.matrix)} for g in layer.gates]
            for layer in c.layers
        ],
        "provenance": dict(c.provenance),
    }


def circuit_from_dict(d: dict) -> LayeredCircuit:
    if d.get("version") != CIRCUIT_FORMAT_VERSION:
        raise InputFormatError(f"unsupported circuit format version {d.get('version')}")
    try:
        layers = tuple(
            CircuitLayer(
                tuple(TwoQubitGate(g["site"], _matrix_from_json(g["matrix"])) for g in layer)
            )
            for layer in d["layers"]
        )
        return LayeredCircuit(d["n_qubits"], layers, provenance=dict(d.get("provenance", {})))
    except (KeyError, TypeError) as exc:
        raise InputFormatError(f"corrupt circuit payload: {exc}") from None


def serialize(c: LayeredCircuit) -> bytes:
    return json.dumps(circuit_to_dict(c), indent=1).encode()


def deserialize(data: bytes) -> LayeredCircuit:
    try:
        d = json.loads(data.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InputFormatError(f"corrupt circuit payload: {exc}") from None
    return circuit_from_dict(d)


def flat_gate_list(c: LayeredCircuit) -> list:
    """(layer, site, matrix) triples in application order, for downstream transpilers."""
    return [
        {"layer": i, "site": g.site, "matrix": _matrix_to_json(g.matrix)}
        for i, layer in enumerate(c.layers)
        for g in layer.gates
    ]
