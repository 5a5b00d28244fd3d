"""Command-line pipeline: encode, compile, simulate, reconstruct, analyze, selftest.

Every subcommand is deterministic given its config and seed.  Options can
come from a flat key=value config file (--config); explicit flags win.
Exit codes: 0 success, 1 selftest failure, 2 input-format error,
3 validation error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, analysis, compiler
from .circuit import cnot_count, circuit_to_dict, circuit_from_dict
from .errors import InputFormatError, NumericError, ValidationError
from .image_codec import (
    SNAKE,
    STRAIGHT,
    curve_to_csv,
    decode_probabilities,
    downscale,
    encode_amplitudes,
    flatten_curve,
    load_image,
    write_pgm,
)
from .mps import from_dense, mps_to_dict
from .sample_images import get_image
from .simulator import histogram_to_csv, histogram_to_probs, run, sample, state_to_csv

EXIT_SELFTEST = 1
EXIT_INPUT_FORMAT = 2
EXIT_VALIDATION = 3
EXIT_NUMERIC = 4

_DEFAULTS = {
    "image": "builtin:sign",
    "format": "auto",
    "target_l": 16,
    "ordering": "straight",
    "chi_max": 32,
    "depth": 3,
    "sweeps": 200,
    "shots": 10000,
    "seed": 0,
    "out_dir": "out",
    "method": "grow",
}


@dataclass
class PipelineConfig:
    image: str
    format: str
    target_l: int
    ordering: str
    chi_max: int
    depth: int
    sweeps: int
    shots: int
    seed: int
    out_dir: str
    method: str

    def bit_ordering(self):
        if self.ordering == "straight":
            return STRAIGHT
        if self.ordering == "snake":
            return SNAKE
        raise ValidationError(f"unknown ordering {self.ordering!r}")

    def hash(self) -> str:
        # out_dir only says where artifacts land, not what they contain
        fields = {k: v for k, v in vars(self).items() if k != "out_dir"}
        canon = json.dumps(fields, sort_keys=True)
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _read_config_file(path: str) -> dict:
    values = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InputFormatError(f"config line without '=': {line!r}")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _build_config(args) -> PipelineConfig:
    merged = dict(_DEFAULTS)
    if getattr(args, "config", None):
        file_values = _read_config_file(args.config)
        unknown = set(file_values) - set(_DEFAULTS)
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        merged.update(file_values)
    for key in _DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    for key in ("target_l", "chi_max", "depth", "sweeps", "shots", "seed"):
        merged[key] = int(merged[key])
    return PipelineConfig(**merged)


def _provenance(cfg: PipelineConfig) -> dict:
    return {"tool": f"qimgload {__version__}", "config_hash": cfg.hash()}


def _csv_header(cfg: PipelineConfig) -> str:
    return f"# tool: qimgload {__version__}\n# config_hash: {cfg.hash()}\n"


def _load_grid(cfg: PipelineConfig):
    if cfg.image.startswith("builtin:"):
        return get_image(cfg.image.split(":", 1)[1], max(cfg.target_l, 2))
    fmt = cfg.format
    if fmt == "auto":
        suffix = Path(cfg.image).suffix.lower()
        fmt = {".pgm": "pgm", ".csv": "csv"}.get(suffix)
        if fmt is None:
            raise InputFormatError(f"cannot infer format from {cfg.image!r}; pass --format")
    return load_image(Path(cfg.image), fmt)


def _prepare_target(cfg: PipelineConfig):
    grid = _load_grid(cfg)
    if cfg.target_l < grid.side_length:
        grid = downscale(grid, cfg.target_l)
    state = encode_amplitudes(grid, cfg.bit_ordering())
    mps, report = from_dense(state, chi_max=cfg.chi_max)
    return grid, state, mps, report


def _out_dir(cfg: PipelineConfig) -> Path:
    path = Path(cfg.out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_encode(args) -> int:
    cfg = _build_config(args)
    out = _out_dir(cfg)
    grid, state, mps, report = _prepare_target(cfg)
    (out / "amplitude_state.json").write_text(
        json.dumps(
            {
                "n_qubits": state.n_qubits,
                "ordering": state.ordering.scheme,
                "amplitudes": state.amplitudes.tolist(),
                "provenance": _provenance(cfg),
            },
            indent=1,
        )
    )
    meta = {
        "ordering": state.ordering.scheme,
        "provenance": _provenance(cfg),
        "truncation": {"per_bond": list(report.discarded_weights), "total": report.total},
    }
    (out / "mps.json").write_text(json.dumps(mps_to_dict(mps, meta), indent=1))
    (out / "amplitudes.csv").write_text(_csv_header(cfg) + curve_to_csv(flatten_curve(state)))
    print(
        f"encoded {grid.side_length}x{grid.side_length} image on {state.n_qubits} qubits, "
        f"max bond {mps.max_bond}, truncation weight {report.total:.3e}"
    )
    return 0


def cmd_compile(args) -> int:
    cfg = _build_config(args)
    out = _out_dir(cfg)
    _, state, target, _ = _prepare_target(cfg)
    if cfg.method == "grow":
        circuit, trace = compiler.grow_and_optimize(target, cfg.depth, cfg.sweeps, cfg.chi_max)
    elif cfg.method == "iterative":
        circuit, trace = compiler.iterative_construct(target, cfg.depth, cfg.chi_max)
    else:
        raise ValidationError(f"unknown compile method {cfg.method!r}")
    prepared = run(circuit)
    final_infidelity = analysis.infidelity(state, prepared)
    provenance = dict(circuit.provenance)
    provenance.update(_provenance(cfg))
    provenance["target_image"] = cfg.image
    provenance["ordering"] = cfg.ordering
    circuit = type(circuit)(circuit.n_qubits, circuit.layers, provenance)
    (out / "circuit.json").write_text(json.dumps(circuit_to_dict(circuit), indent=1))
    (out / "trace.csv").write_text(_csv_header(cfg) + trace.to_csv())
    print(
        f"compiled depth-{circuit.depth} circuit on {circuit.n_qubits} qubits: "
        f"{cnot_count(circuit)} CNOT-equivalents, infidelity {final_infidelity:.3e}"
    )
    return 0


def cmd_simulate(args) -> int:
    cfg = _build_config(args)
    out = _out_dir(cfg)
    circuit = circuit_from_dict(json.loads(Path(args.circuit).read_text()))
    if circuit.n_qubits % 2:
        raise ValidationError("circuit qubit count must be even to reshape into an image")
    L = 2 ** (circuit.n_qubits // 2)
    ordering_name = circuit.provenance.get("ordering", cfg.ordering)
    ordering = STRAIGHT if ordering_name == "straight" else SNAKE
    state = run(circuit)
    exact_probs = state.probabilities()
    if args.exact:
        probs = exact_probs
    else:
        if cfg.shots < 1:
            raise ValidationError("shots must be >= 1 (or pass --exact)")
        hist = sample(state, cfg.shots, cfg.seed)
        (out / "histogram.csv").write_text(_csv_header(cfg) + histogram_to_csv(hist))
        probs = histogram_to_probs(hist)
        probs = probs / probs.sum()
    grid = decode_probabilities(probs, L, ordering)
    (out / "reconstructed.pgm").write_bytes(write_pgm(grid))
    (out / "curve.csv").write_text(_csv_header(cfg) + state_to_csv(state))
    label = "exact probabilities" if args.exact else f"{cfg.shots} shots, seed {cfg.seed}"
    print(f"simulated {circuit.n_qubits}-qubit circuit ({label}); wrote reconstructed.pgm")
    return 0


def cmd_reconstruct(args) -> int:
    cfg = _build_config(args)
    out = _out_dir(cfg)
    counts = []
    for line in Path(args.histogram).read_text().splitlines():
        if not line or line.startswith("#") or line.startswith("index"):
            continue
        counts.append(float(line.split(",")[2]))
    counts = np.array(counts)
    if counts.sum() <= 0:
        raise NumericError("histogram holds no counts")
    L = int(round(np.sqrt(len(counts))))
    if L * L != len(counts):
        raise ValidationError("histogram length is not a square")
    grid = decode_probabilities(counts / counts.sum(), L, cfg.bit_ordering())
    (out / "reconstructed.pgm").write_bytes(write_pgm(grid))
    print(f"decoded {len(counts)}-outcome histogram into {L}x{L} image")
    return 0


def cmd_analyze(args) -> int:
    cfg = _build_config(args)
    out = _out_dir(cfg)
    grid = _load_grid(cfg)
    image_id = cfg.image
    if args.sweep == "chi":
        chi_list = [int(c) for c in args.chi_list.split(",")]
        records = analysis.chi_scaling_sweep(
            grid, chi_list, ordering=cfg.bit_ordering(), image_id=image_id
        )
        name = "chi_sweep"
    elif args.sweep == "depth":
        depth_list = [int(d) for d in args.depth_list.split(",")]
        records = analysis.depth_scaling_sweep(
            grid,
            depth_list,
            method="gate_by_gate" if cfg.method == "grow" else "iterative",
            sweeps=cfg.sweeps,
            chi_max=cfg.chi_max,
            ordering=cfg.bit_ordering(),
            image_id=image_id,
        )
        name = "depth_sweep"
    elif args.sweep == "resolution":
        L_list = [int(v) for v in args.l_list.split(",")]
        records = analysis.chi_scaling_sweep(
            grid, [cfg.chi_max], L_list=L_list, ordering=cfg.bit_ordering(), image_id=image_id
        )
        name = "resolution_sweep"
    else:
        raise ValidationError(f"unknown sweep {args.sweep!r}")
    (out / f"{name}.csv").write_text(_csv_header(cfg) + analysis.records_to_csv(records))
    positive = [(r.x, r.infidelity) for r in records if r.infidelity > 0]
    if len(positive) >= 3:
        fit = analysis.fit_power_law(positive)
        (out / f"{name}_fit.json").write_text(
            json.dumps({**fit.to_dict(), "provenance": _provenance(cfg)}, indent=1)
        )
        print(f"{name}: fitted I = {fit.amplitude:.4g} / x^{fit.exponent:.4g}")
    else:
        print(f"{name}: {len(records)} records (too few positive points to fit)")
    return 0


def cmd_selftest(args) -> int:
    from .mps import to_dense, truncate
    from .simulator import overlap as sv_overlap

    checks = []

    fit = analysis.fit_power_law([(x, 3.0 * x**-1.645) for x in (2, 4, 8, 16, 32)])
    checks.append(("power-law exponent 1.645 recovered", abs(fit.exponent - 1.645) < 1e-9))
    fit = analysis.fit_power_law([(x, 0.5 * x**-0.603) for x in (2, 4, 8, 16, 32)])
    checks.append(("power-law exponent 0.603 recovered", abs(fit.exponent - 0.603) < 1e-9))

    rng = np.random.default_rng(7)
    vec = rng.standard_normal(2**6)
    vec /= np.linalg.norm(vec)
    m, _ = from_dense(vec)
    checks.append(("lossless dense round trip", np.max(np.abs(to_dense(m) - vec)) < 1e-10))

    chi2, _ = truncate(m, 2)
    from .circuit import LayeredCircuit, layer_from_chi2_mps

    circuit = LayeredCircuit(6, (layer_from_chi2_mps(chi2),))
    exact = 1.0 - abs(np.vdot(to_dense(chi2), run(circuit).amplitudes))
    checks.append(("chi=2 single-layer exactness", exact < 1e-9))

    from .circuit import CircuitLayer, TwoQubitGate

    def _staircase(n, d):
        layer = CircuitLayer(tuple(TwoQubitGate(s, np.eye(4)) for s in range(n - 2, -1, -1)))
        return LayeredCircuit(n, (layer,) * d)

    checks.append(("42 CNOT-equivalents at N=8 D=3", cnot_count(_staircase(8, 3)) == 42))
    checks.append(("180 CNOT-equivalents at N=10 D=10", cnot_count(_staircase(10, 10)) == 180))

    ok = True
    for label, passed in checks:
        print(f"{'PASS' if passed else 'FAIL'}  {label}")
        ok &= passed
    return 0 if ok else EXIT_SELFTEST


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qimgload",
        description="Compile grayscale images into shallow quantum state-preparation circuits.",
    )
    parser.add_argument("--version", action="version", version=f"qimgload {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key=value config file; flags override")
        p.add_argument("--image", help="image path or builtin:{sign,scene,digit}")
        p.add_argument("--format", choices=["auto", "pgm", "csv"])
        p.add_argument("--target-l", dest="target_l", type=int, help="downscale target side")
        p.add_argument("--ordering", choices=["straight", "snake"])
        p.add_argument("--chi-max", dest="chi_max", type=int)
        p.add_argument("--depth", type=int)
        p.add_argument("--sweeps", type=int)
        p.add_argument("--shots", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--out-dir", dest="out_dir")
        p.add_argument("--method", choices=["grow", "iterative"])

    p = sub.add_parser("encode", help="image -> amplitude state + MPS artifacts")
    common(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("compile", help="image -> layered circuit JSON + trace CSV")
    common(p)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("simulate", help="circuit -> histogram + reconstructed PGM + curve")
    common(p)
    p.add_argument("--circuit", required=True, help="circuit JSON from `compile`")
    p.add_argument("--exact", action="store_true", help="use exact probabilities (infinite shots)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="decode a histogram CSV into a PGM image")
    common(p)
    p.add_argument("--histogram", required=True)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("analyze", help="scaling sweeps and power-law fits")
    common(p)
    p.add_argument("--sweep", required=True, choices=["chi", "depth", "resolution"])
    p.add_argument("--chi-list", dest="chi_list", default="2,4,8,16,32")
    p.add_argument("--depth-list", dest="depth_list", default="2,4,6,8,10,12,14,16")
    p.add_argument("--l-list", dest="l_list", default="32,64,128,256")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("selftest", help="quick pass/fail property checks")
    common(p)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputFormatError as exc:
        print(f"input format error: {exc}", file=sys.stderr)
        return EXIT_INPUT_FORMAT
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except FileNotFoundError as exc:
        print(f"input format error: {exc}", file=sys.stderr)
        return EXIT_INPUT_FORMAT


if __name__ == "__main__":
    sys.exit(main())
