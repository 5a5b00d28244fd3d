"""Shared fixtures and independent reference implementations.

The oracles here deliberately avoid the library's own code paths: dense
gate application is built from Kronecker products, encoding from an
explicit per-pixel bit loop, so agreement is meaningful.
"""

from __future__ import annotations

import numpy as np
import pytest

from qimgload.circuit import CircuitLayer, LayeredCircuit, TwoQubitGate
from qimgload.mps import from_dense


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one PASS/FAIL line per acceptance criterion, echoed after the run so the
# lines survive pytest's output capture
acceptance_lines = []


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)


def random_state(rng, n_qubits: int, complex_valued: bool = False) -> np.ndarray:
    v = rng.standard_normal(2**n_qubits)
    if complex_valued:
        v = v + 1j * rng.standard_normal(2**n_qubits)
    return v / np.linalg.norm(v)


def random_unitary4(rng, complex_valued: bool = False) -> np.ndarray:
    a = rng.standard_normal((4, 4))
    if complex_valued:
        a = a + 1j * rng.standard_normal((4, 4))
    q, r = np.linalg.qr(a)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_chi2_mps(rng, n_qubits: int):
    """Left-canonical MPS with every bond <= 2, from a chi=2 sequential SVD."""
    m, _ = from_dense(random_state(rng, n_qubits), chi_max=2)
    return m


def random_staircase_circuit(rng, n_qubits: int, depth: int) -> LayeredCircuit:
    layers = tuple(
        CircuitLayer(
            tuple(TwoQubitGate(s, random_unitary4(rng)) for s in range(n_qubits - 2, -1, -1))
        )
        for _ in range(depth)
    )
    return LayeredCircuit(n_qubits, layers)


def oracle_apply_gate(vec: np.ndarray, gate: np.ndarray, site: int, n: int) -> np.ndarray:
    """Reference dense gate application: I ⊗ gate ⊗ I by explicit Kronecker product."""
    full = np.kron(np.kron(np.eye(2**site), gate), np.eye(2 ** (n - site - 2)))
    return full @ vec


def oracle_run(circuit: LayeredCircuit) -> np.ndarray:
    vec = np.zeros(2**circuit.n_qubits, dtype=complex)
    vec[0] = 1.0
    for g in circuit.all_gates():
        vec = oracle_apply_gate(vec, g.matrix, g.site, circuit.n_qubits)
    return vec


def oracle_encode(pixels: np.ndarray, snake: bool = False) -> np.ndarray:
    """Reference amplitude encoding via an explicit per-pixel bit loop."""
    L = pixels.shape[0]
    n_rungs = L.bit_length() - 1
    out = np.zeros(L * L)
    total = pixels.sum()
    for x in range(L):
        for y in range(L):
            index = 0
            for k in range(n_rungs):
                xk = (x >> (n_rungs - 1 - k)) & 1
                yk = (y >> (n_rungs - 1 - k)) & 1
                if snake and k % 2 == 1:
                    xk, yk = yk, xk
                index = (index << 2) | (xk << 1) | yk
            out[index] = np.sqrt(pixels[x, y] / total)
    return out / np.linalg.norm(out)
