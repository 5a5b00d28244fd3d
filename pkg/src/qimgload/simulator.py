"""Exact statevector execution of layered circuits plus seeded shot sampling.

Qubit 0 is the most significant bit of the basis index, matching the
MSB-first ladder ordering of the image codec.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import LayeredCircuit
from .errors import ValidationError
from .mps import DENSE_SITE_CAP

RNG_ALGORITHM = "numpy.random.Generator(PCG64)"


@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes)
        if a.ndim != 1 or a.size != 2**self.n_qubits:
            raise ValidationError("amplitude vector length must be 2**n_qubits")
        if abs(np.linalg.norm(a) - 1.0) > 1e-10:
            raise ValidationError("statevector must have unit norm within 1e-10")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class ShotHistogram:
    counts: np.ndarray
    shots: int
    seed: int
    rng_algorithm: str = RNG_ALGORITHM

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if int(c.sum()) != self.shots:
            raise ValidationError("histogram counts must sum to the shot total")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)


def apply_gate_dense(vec: np.ndarray, matrix: np.ndarray, site: int, n_qubits: int) -> np.ndarray:
    """Apply a 4x4 gate on adjacent qubits (site, site+1) to a dense vector."""
    pre = 2**site
    post = 2 ** (n_qubits - site - 2)
    block = vec.reshape(pre, 4, post)
    out = np.einsum("rc,pcq->prq", matrix, block)
    return out.reshape(-1)


def run(c: LayeredCircuit, site_cap: int = DENSE_SITE_CAP) -> StateVector:
    """Apply all layers in order to |0...0>."""
    if c.n_qubits > site_cap:
        raise ValidationError(f"{c.n_qubits} qubits exceeds the dense cap of {site_cap}")
    dtype = np.result_type(float, *(g.matrix.dtype for g in c.all_gates()))
    vec = np.zeros(2**c.n_qubits, dtype=dtype)
    vec[0] = 1.0
    for gate in c.all_gates():
        vec = apply_gate_dense(vec, gate.matrix, gate.site, c.n_qubits)
    return StateVector(c.n_qubits, vec)


def overlap(a: StateVector, b: StateVector) -> float:
    """|<a|b>|, the fidelity amplitude."""
    if a.n_qubits != b.n_qubits:
        raise ValidationError("qubit-count mismatch")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)))


def sample(v: StateVector, shots: int, seed: int = 0) -> ShotHistogram:
    """Multinomial draw from |amplitudes|^2 with a seeded PCG64 generator."""
    if shots < 1:
        raise ValidationError("shots must be >= 1")
    probs = v.probabilities()
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, probs)
    return ShotHistogram(counts=counts, shots=shots, seed=seed)


def histogram_to_probs(h: ShotHistogram) -> np.ndarray:
    if h.shots <= 0:
        raise ValidationError("histogram has no shots")
    return h.counts / h.shots


def histogram_to_csv(h: ShotHistogram) -> str:
    n_bits = max(int(np.log2(len(h.counts))), 1)
    lines = ["index,bitstring,count,probability"]
    probs = histogram_to_probs(h)
    for i, (count, p) in enumerate(zip(h.counts, probs)):
        lines.append(f"{i},{i:0{n_bits}b},{int(count)},{repr(float(p))}")
    return "\n".join(lines) + "\n"


def state_to_csv(v: StateVector) -> str:
    lines = ["index,amplitude"]
    for i, a in enumerate(v.amplitudes):
        value = repr(float(np.real(a))) if not np.iscomplexobj(v.amplitudes) else repr(complex(a))
        lines.append(f"{i},{value}")
    return "\n".join(lines) + "\n"
