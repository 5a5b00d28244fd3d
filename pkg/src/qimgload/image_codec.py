"""Image ingestion and the pixel <-> computational-basis-index codec.

Pixels live on an L x L grid (L a power of two) and are mapped onto a
chain of N = 2*log2(L) qubits by interleaving the bits of the x and y
coordinates, most significant rung first (the 2-leg-ladder ordering).
Amplitudes are sqrt(p_xy / norm) with all phases fixed to zero.
"""

from __future__ import annotations

import io
import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import InputFormatError, NumericError, ValidationError

SCHEME_STRAIGHT = "interleaved-straight"
SCHEME_SNAKE = "interleaved-snake"


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class BitOrdering:
    """Pixel-to-qubit bit interleaving.

    Both schemes put the most significant x/y bits on the leftmost rung
    (qubit 0 is the most significant bit of the basis index).  The
    straight path places the x bit before the y bit on every rung; the
    snake path alternates the order on successive rungs.
    """

    scheme: str = SCHEME_STRAIGHT

    def __post_init__(self):
        if self.scheme not in (SCHEME_STRAIGHT, SCHEME_SNAKE):
            raise ValidationError(f"unknown bit-ordering scheme: {self.scheme!r}")


STRAIGHT = BitOrdering(SCHEME_STRAIGHT)
SNAKE = BitOrdering(SCHEME_SNAKE)


@dataclass(frozen=True)
class ImageGrid:
    """Square grid of intensities in [0, 1], side length a power of two.

    ``pixels[x, y]`` is the intensity at row x, column y (both 0-based).
    """

    pixels: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pixels, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValidationError(f"image must be square, got shape {p.shape}")
        if not _is_power_of_two(p.shape[0]):
            raise ValidationError(
                f"side length {p.shape[0]} is not a power of two; "
                "downscale a valid input or pre-pad before loading"
            )
        if np.any(p < -1e-12) or np.any(p > 1 + 1e-12):
            raise ValidationError("pixel intensities must lie in [0, 1]")
        p = np.clip(p, 0.0, 1.0)
        p.setflags(write=False)
        object.__setattr__(self, "pixels", p)

    @property
    def side_length(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class AmplitudeState:
    """Normalized real amplitude vector plus the ordering used to build it."""

    n_qubits: int
    amplitudes: np.ndarray
    ordering: BitOrdering = field(default=STRAIGHT)

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=float)
        if a.ndim != 1 or a.size != 2**self.n_qubits:
            raise ValidationError("amplitude vector length must be 2**n_qubits")
        if np.any(a < -1e-12):
            raise ValidationError("amplitudes must be nonnegative (phases fixed to zero)")
        if abs(np.dot(a, a) - 1.0) > 1e-12:
            raise ValidationError("amplitude vector must have unit 2-norm")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)


def pixel_to_basis_index(x: int, y: int, L: int, ordering: BitOrdering = STRAIGHT) -> int:
    """Map 0-based pixel coordinates to a computational-basis index."""
    if not _is_power_of_two(L) or L < 2:
        raise ValidationError(f"L must be a power of two >= 2, got {L}")
    if not (0 <= x < L and 0 <= y < L):
        raise ValidationError(f"coordinates ({x}, {y}) out of range for L={L}")
    n = L.bit_length() - 1
    index = 0
    for k in range(n):
        xk = (x >> (n - 1 - k)) & 1
        yk = (y >> (n - 1 - k)) & 1
        if ordering.scheme == SCHEME_SNAKE and k % 2 == 1:
            xk, yk = yk, xk
        index = (index << 2) | (xk << 1) | yk
    return index


def basis_permutation(L: int, ordering: BitOrdering = STRAIGHT) -> np.ndarray:
    """(L, L) array with ``perm[x, y] = pixel_to_basis_index(x, y, L)``."""
    if not _is_power_of_two(L) or L < 2:
        raise ValidationError(f"L must be a power of two >= 2, got {L}")
    n = L.bit_length() - 1
    x = np.arange(L)[:, None]
    y = np.arange(L)[None, :]
    index = np.zeros((L, L), dtype=np.int64)
    for k in range(n):
        xk = (x >> (n - 1 - k)) & 1
        yk = (y >> (n - 1 - k)) & 1
        if ordering.scheme == SCHEME_SNAKE and k % 2 == 1:
            xk, yk = yk, xk
        index = (index << 2) | (xk << 1) | yk
    return index


def encode_amplitudes(g: ImageGrid, ordering: BitOrdering = STRAIGHT) -> AmplitudeState:
    """Amplitude-encode an image: amplitude sqrt(p_xy / sum p) at the ladder index."""
    L = g.side_length
    if L < 2:
        raise ValidationError("cannot encode a 1x1 image (needs at least one qubit per axis)")
    norm = float(g.pixels.sum())
    if norm <= 0.0:
        raise NumericError("all-zero image cannot be normalized")
    perm = basis_permutation(L, ordering)
    flat = np.zeros(L * L)
    flat[perm.ravel()] = np.sqrt(g.pixels.ravel() / norm)
    flat /= np.linalg.norm(flat)
    return AmplitudeState(n_qubits=2 * (L.bit_length() - 1), amplitudes=flat, ordering=ordering)


def decode_probabilities(probs: np.ndarray, L: int, ordering: BitOrdering = STRAIGHT) -> ImageGrid:
    """Reshape a measured probability vector back into an image.

    The result is display-normalized: the brightest pixel is rescaled to 1
    (the absolute scale is unrecoverable from a histogram).
    """
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size != L * L:
        raise ValidationError(f"probability vector length {p.size} does not match L^2={L*L}")
    if np.any(p < -1e-12):
        raise ValidationError("probabilities must be nonnegative")
    total = p.sum()
    if abs(total - 1.0) > 1e-6:
        raise ValidationError(f"probabilities must sum to 1 within 1e-6, got {total}")
    p = np.clip(p, 0.0, None) / total
    perm = basis_permutation(L, ordering)
    grid = p[perm]
    peak = grid.max()
    if peak <= 0.0:
        raise NumericError("degenerate all-zero probability vector")
    return ImageGrid(grid / peak)


def flatten_curve(obj) -> np.ndarray:
    """1D intensity/amplitude sequence in basis-index order."""
    if isinstance(obj, AmplitudeState):
        return np.array(obj.amplitudes)
    if isinstance(obj, ImageGrid):
        L = obj.side_length
        perm = basis_permutation(L, STRAIGHT)
        out = np.zeros(L * L)
        out[perm.ravel()] = obj.pixels.ravel()
        return out
    raise ValidationError(f"cannot flatten object of type {type(obj).__name__}")


def downscale(g: ImageGrid, target_L: int) -> ImageGrid:
    """Block-average down to target_L x target_L."""
    L = g.side_length
    if target_L < 1 or not _is_power_of_two(target_L):
        raise ValidationError(f"target side {target_L} must be a power of two")
    if target_L > L or L % target_L != 0:
        raise ValidationError(f"target side {target_L} must divide the current side {L}")
    b = L // target_L
    blocks = g.pixels.reshape(target_L, b, target_L, b)
    return ImageGrid(blocks.mean(axis=(1, 3)))


# ---------------------------------------------------------------------------
# File formats: PGM (P2/P5) and CSV

def _pgm_tokens(data: bytes):
    """Yield whitespace-separated header tokens, skipping # comments."""
    pos = 0
    while pos < len(data):
        c = data[pos : pos + 1]
        if c.isspace():
            pos += 1
        elif c == b"#":
            end = data.find(b"\n", pos)
            pos = len(data) if end < 0 else end + 1
        else:
            end = pos
            while end < len(data) and not data[end : end + 1].isspace():
                end += 1
            yield data[pos:end], end
            pos = end


def load_pgm(data: bytes) -> ImageGrid:
    """Parse an 8-bit grayscale PGM (P2 ascii or P5 binary)."""
    tokens = _pgm_tokens(data)
    try:
        magic, _ = next(tokens)
    except StopIteration:
        raise InputFormatError("empty PGM input") from None
    if magic not in (b"P2", b"P5"):
        raise InputFormatError(f"unsupported PGM magic {magic!r} (need P2 or P5)")
    header = []
    end = 0
    try:
        while len(header) < 3:
            tok, end = next(tokens)
            header.append(int(tok))
    except (StopIteration, ValueError):
        raise InputFormatError("malformed PGM header") from None
    width, height, maxval = header
    if width <= 0 or height <= 0:
        raise InputFormatError("non-positive PGM dimensions")
    if not (1 <= maxval <= 255):
        raise InputFormatError(f"PGM maxval {maxval} outside 8-bit range")
    count = width * height
    if magic == b"P5":
        raster = data[end + 1 : end + 1 + count]
        if len(raster) < count:
            raise InputFormatError("P5 raster truncated")
        values = np.frombuffer(raster, dtype=np.uint8).astype(float)
    else:
        try:
            values = np.array(
                [int(tok) for tok, _ in itertools.islice(tokens, count)], dtype=float
            )
        except ValueError:
            raise InputFormatError("non-integer sample in P2 raster") from None
        if values.size < count:
            raise InputFormatError("P2 raster truncated")
    if np.any(values > maxval):
        raise InputFormatError("sample exceeds declared maxval")
    pixels = values.reshape(height, width) / maxval
    if width != height:
        raise ValidationError(f"non-square image {width}x{height}; crop or pad before loading")
    return ImageGrid(pixels)


def load_csv(data: bytes) -> ImageGrid:
    """Parse a rectangular CSV of reals already scaled to [0, 1]."""
    rows = []
    for line in data.decode("utf-8", errors="strict").splitlines():
        line = line.strip()
        if not line:
            continue
        try:
            rows.append([float(v) for v in line.split(",")])
        except ValueError:
            raise InputFormatError(f"non-numeric CSV entry in line {line!r}") from None
    if not rows:
        raise InputFormatError("empty CSV input")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise InputFormatError("ragged CSV rows")
    pixels = np.array(rows)
    if pixels.shape[0] != pixels.shape[1]:
        raise ValidationError(f"non-square image {pixels.shape}; crop or pad before loading")
    return ImageGrid(pixels)


def load_image(source, fmt: str) -> ImageGrid:
    """Load a grid from bytes, a byte stream, or a path, as PGM or CSV."""
    if isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    elif isinstance(source, io.IOBase) or hasattr(source, "read"):
        data = source.read()
        if isinstance(data, str):
            data = data.encode()
    else:
        with open(source, "rb") as fh:
            data = fh.read()
    if fmt == "pgm":
        return load_pgm(data)
    if fmt == "csv":
        return load_csv(data)
    raise InputFormatError(f"unknown image format {fmt!r}")


def write_pgm(g: ImageGrid) -> bytes:
    """Serialize a grid as ascii P2 PGM with maxval 255."""
    L = g.side_length
    samples = np.rint(g.pixels * 255).astype(int)
    lines = ["P2", f"{L} {L}", "255"]
    lines += [" ".join(str(v) for v in row) for row in samples]
    return ("\n".join(lines) + "\n").encode()


def write_csv(g: ImageGrid) -> str:
    return "\n".join(",".join(repr(float(v)) for v in row) for row in g.pixels) + "\n"


def curve_to_csv(seq: np.ndarray) -> str:
    """Single-column CSV of a flattened intensity/amplitude curve."""
    return "\n".join(repr(float(v)) for v in np.asarray(seq)) + "\n"
