"""Command-line front end: gen, compile, verify, bench.

Exit codes: 0 success, 2 tolerance failure, 3 invalid input, 4 guard exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
from dataclasses import dataclass, field

from .cascade import ControlCascade, MNCascade, group, hadamard_mn, lower_naive, random_cascade, random_mn
from .circuit import Circuit
from .errors import BadSpec, CascadeError, GuardExceeded, TooManyQubits
from .grid2d import compile_mn_2d
from .io import (
    cascade_to_json, circuit_to_json, dumps, load_any, matrix_to_json, to_qasm, write_atomic,
)
from .parallelize import compile_exact_diagonal, compile_load_approx, compile_mn_log_depth, compile_select_exact
from .precompute import mn_precompute, precompute_identity
from .verify import check_exact, check_sampled

EXIT_OK, EXIT_TOLERANCE, EXIT_INPUT, EXIT_GUARD = 0, 2, 3, 4
PASSES = ("exact-diagonal", "select", "load", "mn-log")


@dataclass
class RunConfig:
    command: str
    inputs: list[str] = field(default_factory=list)
    kind: str | None = None
    m: int | None = None
    k: int | None = None
    family: str = "haar"
    seed: int = 0
    pass_name: str | None = None
    block_size: int = 2
    epsilon: float | None = None
    grid: bool = False
    mode: str = "exact"
    trials: int = 16
    tolerance: float = 1e-7
    out: str | None = None
    dump_parts: str | None = None
    qasm: str | None = None
    ms: list[int] = field(default_factory=list)
    ks: list[int] = field(default_factory=list)

    def validate(self) -> None:
        if self.command in ("compile", "bench"):
            if self.pass_name not in PASSES:
                raise BadSpec(f"--pass must be one of {', '.join(PASSES)}")
            if (self.pass_name == "load") != (self.epsilon is not None):
                raise BadSpec("--epsilon is required for, and only for, --pass load")
        if self.command == "compile" and len(self.inputs) != 1:
            raise BadSpec("compile takes exactly one --in file")
        if self.command == "verify" and len(self.inputs) != 2:
            raise BadSpec("verify takes exactly two --in files")


def generate(kind: str, m: int, k: int | None, family: str, seed: int) -> ControlCascade | MNCascade:
    if m is None or m < 1:
        raise BadSpec("--m must be a positive integer")
    if kind == "mn":
        if family == "hadamard":
            return hadamard_mn(m)
        if family == "haar":
            return random_mn(m, seed)
        raise BadSpec(f"unknown family {family!r}")
    if kind == "cascade":
        if k is None or k < 1:
            raise BadSpec("--k must be a positive integer for cascades")
        if family != "haar":
            raise BadSpec(f"family {family!r} is only defined for staircases")
        return random_cascade(k, m, seed)
    raise BadSpec(f"unknown kind {kind!r}")


def run_pass(cfg: RunConfig, src):
    name = cfg.pass_name
    if name == "mn-log":
        if not isinstance(src, MNCascade):
            raise BadSpec("mn-log needs a staircase input")
        if cfg.grid:
            return compile_mn_2d(src, cfg.block_size)
        return compile_mn_log_depth(src, cfg.block_size)
    if cfg.grid:
        raise BadSpec("--grid is only available for --pass mn-log")
    if isinstance(src, MNCascade):
        src = group(src, cfg.block_size)
    if name == "exact-diagonal":
        return compile_exact_diagonal(src)
    if name == "select":
        return compile_select_exact(src)
    return compile_load_approx(src, cfg.epsilon)


def _parts_json(cfg: RunConfig, src) -> dict:
    def enc(p):
        out = {"k": p.k, "p": matrix_to_json(p.p), "d": [[float(z.real), float(z.imag)] for z in p.d],
               "r_cases": [matrix_to_json(r) for r in p.r_cases], "d_wires": list(p.d_wires)}
        if p.q is not None:
            out["q"] = matrix_to_json(p.q)
        return out

    if isinstance(src, MNCascade):
        b = cfg.block_size
        groups = [src.gates[i:i + b] for i in range(0, src.m, b)]
        return {"kind": "mn", "groups": [enc(mn_precompute(g)) for g in groups]}
    return {"kind": "cascade", "blocks": [enc(precompute_identity(u0, u1)) for u0, u1 in src.blocks]}


def _as_circuit(obj) -> Circuit:
    return obj if isinstance(obj, Circuit) else lower_naive(obj)


def cmd_gen(cfg: RunConfig, stdout) -> int:
    c = generate(cfg.kind, cfg.m, cfg.k, cfg.family, cfg.seed)
    text = dumps(cascade_to_json(c))
    if cfg.out:
        write_atomic(cfg.out, text)
    else:
        stdout.write(text)
    return EXIT_OK


def cmd_compile(cfg: RunConfig, stdout) -> int:
    src = load_any(cfg.inputs[0])
    if isinstance(src, Circuit):
        raise BadSpec("compile expects a cascade file")
    circ, report = run_pass(cfg, src)
    if cfg.out:
        write_atomic(cfg.out, dumps(circuit_to_json(circ)))
    if cfg.dump_parts:
        write_atomic(cfg.dump_parts, dumps(_parts_json(cfg, src)))
    if cfg.qasm:
        write_atomic(cfg.qasm, to_qasm(circ))
    stdout.write(json.dumps(report.to_dict(), sort_keys=True) + "\n")
    return EXIT_OK


def cmd_verify(cfg: RunConfig, stdout) -> int:
    a, b = (_as_circuit(load_any(p)) for p in cfg.inputs)
    if cfg.mode == "exact":
        res = check_exact(a, b)
    elif cfg.mode == "sampled":
        res = check_sampled(a, b, cfg.trials, cfg.seed)
    else:
        raise BadSpec(f"unknown mode {cfg.mode!r}")
    text = json.dumps(res.to_dict(), sort_keys=True) + "\n"
    if cfg.out:
        write_atomic(cfg.out, text)
    stdout.write(text)
    return EXIT_OK if res.ok(cfg.tolerance) else EXIT_TOLERANCE


def cmd_bench(cfg: RunConfig, stdout) -> int:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["m", "k", "pass", "depth_basis", "gate_count", "ancilla_count"])
    kind = cfg.kind or ("mn" if cfg.pass_name == "mn-log" else "cascade")
    ks = cfg.ks or [cfg.k or 1]
    for k in ks if kind == "cascade" else [1]:
        for m in cfg.ms:
            src = generate(kind, m, k, cfg.family, cfg.seed)
            _, report = run_pass(cfg, src)
            writer.writerow([m, k, cfg.pass_name, report.depth_basis, report.gate_count, report.ancilla_count])
    if cfg.out:
        write_atomic(cfg.out, buf.getvalue())
    stdout.write(buf.getvalue())
    return EXIT_OK


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcascade", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out")

    g = sub.add_parser("gen", help="write a seeded cascade as JSON")
    g.add_argument("--kind", choices=["mn", "cascade"], required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--k", type=int)
    g.add_argument("--family", default="haar", help="haar or hadamard (staircases only)")
    common(g)

    def pass_options(p):
        p.add_argument("--pass", dest="pass_name", choices=PASSES, required=True)
        p.add_argument("--block-size", type=int, default=2)
        p.add_argument("--epsilon", type=float)
        p.add_argument("--grid", action="store_true", help="2D nearest-neighbour backend (mn-log only)")

    c = sub.add_parser("compile", help="compile a cascade file")
    c.add_argument("--in", dest="inputs", action="append", default=[], required=True)
    pass_options(c)
    c.add_argument("--dump-parts", help="write the precomputation parts as JSON")
    c.add_argument("--qasm", help="also write an OpenQASM 2 rendering")
    common(c)

    v = sub.add_parser("verify", help="compare two circuits or cascades")
    v.add_argument("--in", dest="inputs", action="append", default=[], required=True)
    v.add_argument("--mode", choices=["exact", "sampled"], default="exact")
    v.add_argument("--trials", type=int, default=16)
    v.add_argument("--tolerance", type=float, default=1e-7)
    common(v)

    b = sub.add_parser("bench", help="depth table over a range of sizes (CSV)")
    b.add_argument("--kind", choices=["mn", "cascade"])
    b.add_argument("--m", dest="ms", type=_int_list, required=True, help="comma-separated sizes")
    b.add_argument("--k", dest="ks", type=_int_list, default=[], help="comma-separated block sizes")
    b.add_argument("--family", default="haar")
    pass_options(b)
    common(b)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    known = RunConfig.__dataclass_fields__
    values = {k: v for k, v in vars(ns).items() if k in known and v is not None}
    return RunConfig(**values)


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    ns = build_parser().parse_args(argv)
    handlers = {"gen": cmd_gen, "compile": cmd_compile, "verify": cmd_verify, "bench": cmd_bench}
    try:
        cfg = config_from_args(ns)
        cfg.validate()
        return handlers[cfg.command](cfg, stdout)
    except (GuardExceeded, TooManyQubits) as exc:
        stderr.write(f"guard exceeded: {exc}\n")
        return EXIT_GUARD
    except (CascadeError, ValueError) as exc:
        stderr.write(f"invalid input: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
