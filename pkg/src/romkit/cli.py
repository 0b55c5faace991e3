"""``romkit`` command line.

Every command prints one line of JSON on stdout; logs go to stderr.  Exit
codes: 0 success, 2 infeasible LP or guard refusal, 1 any other error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import io
from .cover import minimal_feasible_solution
from .errors import GuardError, RomkitError
from .lp import INFEASIBLE
from .pauli import pauli_decompose, pauli_reconstruct, st_norm, validate_state
from .product import rom_partition, rom_symmetric_divide_conquer
from .rom import DEFAULT_K0, rom_column_generation, rom_fwht, rom_naive, rom_top_overlap
from .stabilizers import (
    default_threads,
    max_fidelity,
    overlaps_all,
    select_extremes,
)
from .states import F_STATE, H_STATE, STATE_KINDS, GenSpec, generate, pauli_vector_of

log = logging.getLogger("romkit")

EXIT_OK, EXIT_ERROR, EXIT_REFUSED = 0, 1, 2


class Infeasible(RomkitError):
    pass


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, allow_nan=False) + "\n")


def _load_b(path) -> np.ndarray:
    kind, arr = io.read_state(path)
    return pauli_vector_of(kind, arr)


def _threads(args) -> int:
    return args.threads or default_threads()


# --------------------------------------------------------------------------
# commands


def cmd_gen(args):
    spec = GenSpec(args.kind, args.n, args.copies, args.seed)
    kind, arr = generate(spec)
    out = Path(args.out)
    target = "qdm" if out.suffix == ".qdm" else "qpv" if out.suffix == ".qpv" else kind
    if target != kind:
        arr = pauli_decompose(arr) if kind == "qdm" else pauli_reconstruct(arr)
        kind = target
    io.write_state(out, kind, arr)
    _emit({"path": str(out), "kind": args.kind, "format": kind, "n": spec.total_qubits,
           "seed": args.seed})


def cmd_convert(args):
    kind, arr = io.read_state(args.input)
    out = Path(args.out)
    target = {".qdm": "qdm", ".qpv": "qpv"}.get(out.suffix, args.to or kind)
    if target != kind:
        arr = pauli_decompose(arr) if kind == "qdm" else pauli_reconstruct(arr)
    io.write_state(out, target, arr)
    _emit({"path": str(out), "from": kind, "to": target})


def cmd_info(args):
    kind, arr = io.read_state(args.input)
    b = pauli_vector_of(kind, arr)
    n = int(round(math.log(len(b), 4)))
    _emit({"n": n, "format": kind, "b0": float(b[0]), "st_norm": st_norm(b)})


def cmd_validate(args):
    b = _load_b(args.input)
    report = validate_state(b, check_psd=args.psd, tol=args.tol)
    _emit(report.as_dict())
    return EXIT_OK if report.passed else EXIT_ERROR


def cmd_overlaps(args):
    b = _load_b(args.input)
    n = int(round(math.log(len(b), 4)))
    threads = _threads(args)
    if args.top is not None:
        hi_ids, hi_vals, _, _ = select_extremes(b, args.top, 0, threads=threads)
        _emit([
            {"block": int(i) >> n, "delta": int(i) & ((1 << n) - 1), "overlap": float(v)}
            for i, v in zip(hi_ids, hi_vals)
        ])
        return
    count, lo, hi = 0, math.inf, -math.inf
    fh = open(args.dump, "wb") if args.dump else None
    try:
        for chunk in overlaps_all(b, threads=threads):
            count += chunk.values.size
            lo = min(lo, float(chunk.values.min()))
            hi = max(hi, float(chunk.values.max()))
            if fh:
                fh.write(io.overlap_records(chunk.linear_ids(n), chunk.values, n).tobytes())
    finally:
        if fh:
            fh.close()
    _emit({"n": n, "count": count, "max": hi, "min": lo, "dump": args.dump})


def cmd_fidelity(args):
    b = _load_b(args.input)
    value, sid = max_fidelity(b, threads=_threads(args))
    _emit({"fidelity_sq": value, "block": sid.block, "delta": sid.delta})


def cmd_rom(args):
    b = _load_b(args.input)
    threads = _threads(args)
    if args.method == "naive":
        res = rom_naive(b, guard=args.guard, backend=args.backend)
    elif args.method == "top":
        res = rom_top_overlap(b, args.k, include_cover=not args.no_cover,
                              backend=args.backend, threads=threads)
    elif args.method == "cg":
        n = int(round(math.log(len(b), 4)))
        k0 = args.k if args.k is not None else DEFAULT_K0.get(n)
        max_new = None if args.max_new == "auto" else int(args.max_new)
        res = rom_column_generation(b, K0=k0, d=args.d, max_new=max_new,
                                    max_iters=args.max_iters, tol_dual=args.tol_dual,
                                    backend=args.backend, threads=threads)
    else:
        res = rom_fwht(b)
    if res.status == INFEASIBLE:
        raise Infeasible("restricted LP is infeasible")
    _emit(res.as_dict())


def cmd_fwht_feasible(args):
    b = _load_b(args.input)
    dec = minimal_feasible_solution(b, check=True, keep_weights=False)
    _emit(dec.as_dict())


def cmd_rom_copies(args):
    if args.state in ("h", "f"):
        b1 = H_STATE if args.state == "h" else F_STATE
    else:
        b1 = _load_b(args.state)
    res = rom_symmetric_divide_conquer(b1, args.n, args.k, backend=args.backend)
    _emit({"value": res.values[-1], "values": res.values, "exact": res.exact,
           "candidates": res.candidates, "n": args.n, "k": args.k})


def cmd_rom_partition(args):
    states = [_load_b(p) for p in args.input]
    res = rom_partition(states, max_group_qubits=args.max_group, method=args.method,
                        backend=args.backend)
    _emit(res.as_dict())


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="romkit", description="Stabilizer overlaps, fidelity and Robustness of Magic.")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads for stabilizer sweeps (default: ROMKIT_THREADS or CPU count)")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_, description=help_)
        sp.set_defaults(func=func)
        sp.add_argument("--json", action="store_true", help="JSON output (always on)")
        return sp

    def add_in(sp):
        sp.add_argument("--in", dest="input", required=True, help=".qpv, .qdm or .json state file")

    def add_backend(sp):
        sp.add_argument("--backend", choices=["simplex", "highs"], default="simplex")

    g = add("gen", cmd_gen,
            "Generate a state. haar-mixed samples the Hilbert-Schmidt (Ginibre) measure "
            "G G^dag / Tr; haar-pure projects a normalized complex Gaussian vector.")
    g.add_argument("--kind", choices=STATE_KINDS, required=True)
    g.add_argument("--n", type=int, default=1)
    g.add_argument("--copies", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output path; the suffix picks the format")

    c = add("convert", cmd_convert, "Convert between .qdm, .qpv and JSON.")
    add_in(c)
    c.add_argument("--out", required=True)
    c.add_argument("--to", choices=["qdm", "qpv"], help="representation for JSON output")

    i = add("info", cmd_info, "Report n, b0 and the st-norm.")
    add_in(i)

    v = add("validate", cmd_validate, "Check trace, entry bounds and (optionally) positivity.")
    add_in(v)
    v.add_argument("--psd", action="store_true")
    v.add_argument("--tol", type=float, default=1e-9)

    o = add("overlaps", cmd_overlaps, "Stabilizer overlaps a^T b of every state.")
    add_in(o)
    o.add_argument("--top", type=int, help="print the K largest as a JSON array")
    o.add_argument("--dump", help="write packed (u64 block, u32 delta, f64 overlap) records")

    f = add("fidelity", cmd_fidelity, "Stabilizer fidelity max_j a_j^T b / 2^n.")
    add_in(f)

    r = add("rom", cmd_rom, "Robustness of Magic.")
    add_in(r)
    r.add_argument("--method", choices=["naive", "top", "cg", "fwht"], default="cg")
    r.add_argument("--k", type=float, default=None, help="column fraction (top: required; cg: K0)")
    r.add_argument("--d", type=float, default=0.8)
    r.add_argument("--max-new", default="auto")
    r.add_argument("--max-iters", type=int, default=100)
    r.add_argument("--tol-dual", type=float, default=1e-7)
    r.add_argument("--guard", type=int, default=4, help="largest n for the naive LP")
    r.add_argument("--no-cover", action="store_true", help="top: omit the cover columns")
    add_backend(r)

    w = add("fwht-feasible", cmd_fwht_feasible, "Cover-matrix feasible solution R_FWHT.")
    add_in(w)

    rc = add("rom-copies", cmd_rom_copies, "Divide-and-conquer RoM of n copies of a qubit state.")
    rc.add_argument("--state", required=True, help="h, f or a single-qubit state file")
    rc.add_argument("--n", type=int, required=True)
    rc.add_argument("--k", type=int, default=3)
    add_backend(rc)

    rp = add("rom-partition", cmd_rom_partition, "Best grouping of independent factors.")
    rp.add_argument("--in", dest="input", nargs="+", required=True)
    rp.add_argument("--max-group", type=int, default=4)
    rp.add_argument("--method", choices=["cg", "naive"], default="cg")
    add_backend(rp)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    if args.command == "rom" and args.method == "top" and args.k is None:
        parser.error("--method top needs --k")
    try:
        code = args.func(args)
    except (GuardError, Infeasible) as exc:
        log.error("%s", exc)
        return EXIT_REFUSED
    except (RomkitError, OSError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_ERROR
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
