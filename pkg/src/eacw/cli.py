"""``eacw`` command-line interface.

Exit codes: 0 ok, 1 input or guard error, 2 solver non-convergence,
3 a checked identity or inequality failed.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import platform
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np

from . import io
from .capacity import ConvergenceError, SolverConfig, avqc_capacity, compound_capacity, ea_capacity_single
from .channels import ChannelSet, CqChannel, counterexample_pair, depolarizing, identity, random_channel
from .linalg import ResourceError, ValidationError, random_density

EXIT_OK, EXIT_INPUT, EXIT_NONCONV, EXIT_CHECK = 0, 1, 2, 3


class CheckFailed(Exception):
    """Raised after output was produced when a verified property does not hold."""


def _version() -> str:
    try:
        return metadata.version("eacw")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _config(args) -> SolverConfig:
    return SolverConfig(tol=args.tol, max_iter=args.max_iter, restarts=args.restarts,
                        seed=args.seed, guard_dim=args.guard_dim)


def _emit(args, payload, rows=None, fields=None) -> str:
    if args.output == "csv" and rows is not None:
        return io.csv_text(rows, fields)
    return io.dumps(payload) + "\n"


def _parse_sigma(text: str, d: int, seed: int) -> np.ndarray:
    if text == "mixed":
        return np.eye(d) / d
    if text == "random":
        return random_density(d, np.random.default_rng(seed))
    if text.startswith("diag:"):
        try:
            w = np.array([float(x) for x in text[5:].split(",")])
        except ValueError:
            raise ValidationError(f"--sigma {text!r}: expected comma-separated numbers") from None
        if w.size != d:
            raise ValidationError(f"--sigma has {w.size} entries for d={d}")
        return np.diag(w)
    raise ValidationError(f"--sigma {text!r}: use mixed, random or diag:p1,p2,...")


def _qubit_pair(seed: int) -> ChannelSet:
    rng = np.random.default_rng(seed)
    return ChannelSet((random_channel(2, 2, rng, 2), random_channel(2, 2, rng, 2)), ("A", "B"))


# --------------------------------------------------------------------------
# capacity

def cmd_capacity(args) -> str:
    cs = io.load_channel_set(args.input)
    cfg = _config(args)
    if args.kind == "single":
        if len(cs) != 1:
            if args.index is None:
                raise ValidationError(f"{args.input}: set has {len(cs)} channels; pick one with --index")
        ch = cs.channels[args.index or 0]
        fn = lambda: ea_capacity_single(ch, cfg)  # noqa: E731
    elif args.kind == "compound":
        fn = lambda: compound_capacity(cs, cfg)  # noqa: E731
    else:
        fn = lambda: avqc_capacity(cs, cfg)  # noqa: E731
    try:
        res = fn()
    except ConvergenceError as exc:
        args._nonconverged = True
        res = exc.result
    out = res.to_json()
    out["kind"] = args.kind
    out["labels"] = list(cs.labels)
    return _emit(args, out, [out], ["kind", "value", "certified_gap", "iterations", "converged"])


# --------------------------------------------------------------------------
# simulations

def sim_encode_check(args) -> str:
    from .coding.encoding import build_encoding_family, verify_scrambling

    sigma = _parse_sigma(args.sigma, args.d, args.seed)
    fam = build_encoding_family(sigma, args.k)
    res = verify_scrambling(fam)
    out = {"d": args.d, "k": args.k, "alphabet_size": fam.size, "types": len(fam.types),
           "residual": res, "holds": bool(res <= 1e-9)}
    text = _emit(args, out, [out])
    return _checked(text, out["holds"])


def sim_mutual_gap(args) -> str:
    from .coding.encoding import mutual_approx_gap

    sigma = _parse_sigma(args.sigma, args.d, args.seed)
    ch = io.load_channel_set(args.input).channels[0] if args.input else depolarizing(args.gamma, args.d)
    out = mutual_approx_gap(sigma, args.k, ch, samples=args.samples, seed=args.seed)
    out = {"d": args.d, "k": args.k} | out
    return _checked(_emit(args, out, [out]), out["holds"])


def sim_counterexample(args) -> str:
    from .coding.codes import counterexample_bound, counterexample_code, counterexample_exact, evaluate_code_compound

    cs = counterexample_pair()
    code = counterexample_code(args.n)
    rep = evaluate_code_compound(code, cs)
    bound, exact = counterexample_bound(args.n), counterexample_exact(args.n)
    rows = io.report_rows(rep, args.n, code.M, code.L, cs.labels)
    for r in rows:
        r.update(bound=bound, exact=exact, rate=code.rate)
    ok = all(r["average"] <= bound + 1e-12 and abs(r["average"] - exact) <= 1e-12 for r in rows)
    out = {"n": args.n, "M": code.M, "L": code.L, "rate": code.rate, "bound": bound, "exact": exact,
           "channels": rows, "holds": ok}
    return _checked(_emit(args, out, rows, io.REPORT_FIELDS + ["bound", "exact", "rate"]), ok)


def sim_max_from_avg(args) -> str:
    from .coding.codes import evaluate_code_compound, max_from_avg, toy_code

    cs = io.load_channel_set(args.input) if args.input else \
        ChannelSet((identity(2), depolarizing(0.3, 2)), ("id", "depol0.3"))
    code = toy_code(np.random.default_rng(args.seed), d=cs.dim_in, m=args.messages, ka=args.ka)
    conv = max_from_avg(code)
    src, new = evaluate_code_compound(code, cs), evaluate_code_compound(conv, cs)
    rows, ok = [], True
    for s, label in enumerate(cs.labels):
        avg = src.by_index[s][0]
        lo, hi = new.by_index[s][0], new.by_index[s][1]
        per = _per_message(conv, cs.channels[s])
        spread = float(per.max() - per.min())
        dev = float(np.max(np.abs(per - avg)))
        ok &= spread <= 1e-12 and dev <= 1e-12
        rows.append({"label": label, "source_average": avg, "source_maximal": src.by_index[s][1],
                     "converted_average": lo, "converted_maximal": hi, "spread": spread, "deviation": dev})
    out = {"M": code.M, "L_source": code.L, "L_converted": conv.L, "channels": rows, "holds": bool(ok)}
    return _checked(_emit(args, out, rows), ok)


def _per_message(code, ch):
    from .coding.codes import message_errors

    return message_errors(code, [ch] * code.n)


def sim_robustify(args) -> str:
    from .coding.robust import robustification_sweep

    out = robustification_sweep(args.S, args.n, args.trials, args.seed)
    return _checked(_emit(args, out, [out]), out["counterexamples"] == 0)


def sim_permute_avqc(args) -> str:
    from .coding.codes import (avqc_code_from_compound, evaluate_code_avqc, evaluate_code_compound,
                               message_errors, permuted_code, random_pairs, toy_code)

    cs = io.load_channel_set(args.input) if args.input else _qubit_pair(args.seed)
    rng = np.random.default_rng(args.seed)
    code = toy_code(rng, d=cs.dim_in, m=args.messages, n=args.n, ka=args.ka)
    if args.curve:
        from .coding.codes import derandomisation_curve

        try:
            ks = [int(x) for x in args.curve.split(",")]
        except ValueError:
            raise ValidationError(f"--curve {args.curve!r}: expected comma-separated integers") from None
        rows = derandomisation_curve(code, cs, ks, args.seed)
        return _emit(args, {"n": args.n, "M": code.M, "curve": rows}, rows)
    pairs = random_pairs(args.n, code.M, args.K, args.seed)
    new = avqc_code_from_compound(code, pairs)
    comp = evaluate_code_compound(code, cs)
    rep = evaluate_code_avqc(new, cs)
    resid = 0.0
    for word in rep.by_index:
        chans = [cs.channels[s] for s in word]
        mean = np.mean([message_errors(permuted_code(code, s, a), chans) for s, a in pairs], axis=0)
        resid = max(resid, float(np.max(np.abs(mean - message_errors(new, chans)))))
    rows = io.report_rows(rep, args.n, new.M, new.L, cs.labels)
    out = {"n": args.n, "K": args.K, "M": new.M, "L": new.L,
           "source_compound_average": comp.average, "source_avqc_average": evaluate_code_avqc(code, cs).average,
           "derandomised_worst_average": rep.average, "worst_word": list(rep.worst_index),
           "identity_residual": resid, "holds": bool(resid <= 1e-10), "words": rows}
    return _checked(_emit(args, out, rows, io.REPORT_FIELDS), out["holds"])


def sim_pgm(args) -> str:
    from .coding.pgm import best_of_seeds

    plus = np.full((2, 2), 0.5)
    v = CqChannel((np.diag([1.0, 0.0]), plus))
    seed, code, rep = best_of_seeds(v, args.n, args.M, args.seeds)
    out = {"n": args.n, "M": args.M, "seeds": args.seeds, "best_seed": seed, "average": rep.average,
           "maximal": rep.maximal, "codewords": [list(w) for w in code.codewords]}
    row = {k: out[k] for k in ("n", "M", "seeds", "best_seed", "average", "maximal")}
    return _emit(args, out, [row])


def _checked(text: str, ok: bool) -> str:
    if not ok:
        raise CheckFailed(text)
    return text


# --------------------------------------------------------------------------
# distance

def cmd_distance(args) -> str:
    from .capacity import continuity_bound
    from .geometry import hausdorff_distance

    a, b = io.load_channel_set(args.set_a), io.load_channel_set(args.set_b)
    if (a.dim_in, a.dim_out) != (b.dim_in, b.dim_out):
        raise ValidationError(f"dimension mismatch: {a.dim_in}->{a.dim_out} vs {b.dim_in}->{b.dim_out}")
    cfg = _config(args)
    d = hausdorff_distance(a, b, seed=args.seed)
    cap_a, cap_b, d, bound, holds = continuity_bound(a, b, cfg, distance=d)
    out = {"distance": d, "capacity_a": cap_a, "capacity_b": cap_b, "difference": abs(cap_a - cap_b),
           "bound": bound, "holds": holds}
    return _checked(_emit(args, out, [out]), holds)


# --------------------------------------------------------------------------
# examples and manifests

def cmd_example(args) -> str:
    if args.name == "example1":
        cs = counterexample_pair()
    elif args.name == "identity2":
        cs = ChannelSet((identity(2),), ("id",))
    else:
        cs = ChannelSet((identity(2), depolarizing(args.gamma, 2)), ("id", f"depol{args.gamma:g}"))
    return json.dumps(io.channel_set_to_json(cs)) + "\n"


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _write_manifest(path, argv, args, text: str, wall: float, code: int) -> None:
    inputs = [p for p in (getattr(args, k, None) for k in ("input", "set_a", "set_b")) if p]
    manifest = {
        "command": argv,
        "inputs": {str(p): _digest(Path(p).read_bytes()) for p in inputs},
        "config": {k: getattr(args, k) for k in ("tol", "max_iter", "restarts", "seed", "guard_dim")},
        "seed": args.seed,
        "version": _version(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "wall_time": wall,
        "exit_code": code,
        "output_digest": _digest(text.encode()),
    }
    Path(path).write_text(json.dumps(manifest, indent=2))


def cmd_replay(args) -> str:
    manifest = json.loads(Path(args.manifest_file).read_text())
    for p, digest in manifest["inputs"].items():
        if _digest(Path(p).read_bytes()) != digest:
            raise ValidationError(f"input {p} changed since the manifest was written")
    code, text = run(manifest["command"])
    same = _digest(text.encode()) == manifest["output_digest"]
    out = {"reproduced": same, "exit_code": code, "expected_exit_code": manifest["exit_code"]}
    return _checked(io.dumps(out) + "\n", same and code == manifest["exit_code"])


# --------------------------------------------------------------------------
# parser

def _solver_flags(p: argparse.ArgumentParser) -> None:
    d = SolverConfig()
    p.add_argument("--tol", type=float, default=d.tol)
    p.add_argument("--max-iter", type=int, default=d.max_iter)
    p.add_argument("--restarts", type=int, default=d.restarts)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--output", choices=("json", "csv"), default="json")
    p.add_argument("--guard-dim", type=int, default=d.guard_dim)
    p.add_argument("--manifest", help="write a run manifest (inputs, config, digests) to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eacw", description=(
        "Entanglement-assisted capacities of compound and arbitrarily varying quantum channels."))
    sub = parser.add_subparsers(dest="command", required=True)

    cap = sub.add_parser("capacity", help="compute a capacity from a channel-set JSON file")
    cap.add_argument("kind", choices=("single", "compound", "avqc"))
    cap.add_argument("--input", required=True)
    cap.add_argument("--index", type=int, help="channel index for 'single' on a multi-channel set")
    _solver_flags(cap)
    cap.set_defaults(func=cmd_capacity)

    sim = sub.add_parser("simulate", help="finite-blocklength constructions and checks")
    ssub = sim.add_subparsers(dest="sim", required=True)

    p = ssub.add_parser("encode-check", help="scrambling identity of the encoding family")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--sigma", default="random", help="mixed | random | diag:p1,p2,...")
    _solver_flags(p)
    p.set_defaults(func=sim_encode_check)

    p = ssub.add_parser("mutual-gap", help="k I(sigma, N) against the Holevo quantity of the encoded cq channel")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--sigma", default="random")
    p.add_argument("--gamma", type=float, default=0.3, help="depolarizing parameter when --input is absent")
    p.add_argument("--input", help="single-use channel JSON (default: depolarizing)")
    p.add_argument("--samples", type=int, default=200)
    _solver_flags(p)
    p.set_defaults(func=sim_mutual_gap)

    p = ssub.add_parser("counterexample", help="exact errors of the counterexample code")
    p.add_argument("--n", type=int, default=3)
    _solver_flags(p)
    p.set_defaults(func=sim_counterexample)

    p = ssub.add_parser("max-from-avg", help="cyclic-shift conversion of a seeded toy code")
    p.add_argument("--input", help="channel set (default: qubit identity and depolarizing 0.3)")
    p.add_argument("--messages", type=int, default=2)
    p.add_argument("--ka", type=int, default=2)
    _solver_flags(p)
    p.set_defaults(func=sim_max_from_avg)

    p = ssub.add_parser("robustify", help="random sweep of the robustification implication")
    p.add_argument("--S", type=int, default=2)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--trials", type=int, default=1000)
    _solver_flags(p)
    p.set_defaults(func=sim_robustify)

    p = ssub.add_parser("permute-avqc", help="derandomised permutation code from a toy code")
    p.add_argument("--input", help="channel set (default: two seeded random qubit channels)")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--K", type=int, default=6)
    p.add_argument("--curve", help="comma-separated K values; report worst-word error against K")
    p.add_argument("--messages", type=int, default=2)
    p.add_argument("--ka", type=int, default=2)
    _solver_flags(p)
    p.set_defaults(func=sim_permute_avqc)

    p = ssub.add_parser("pgm", help="best-of-seeds random code with the pretty-good measurement (|0>, |+> channel)")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--M", type=int, default=2)
    p.add_argument("--seeds", type=int, default=32)
    _solver_flags(p)
    p.set_defaults(func=sim_pgm)

    p = sub.add_parser("distance", help="Hausdorff diamond distance and the continuity bound")
    p.add_argument("set_a")
    p.add_argument("set_b")
    _solver_flags(p)
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("example", help="print a built-in channel set as JSON")
    p.add_argument("name", choices=("example1", "identity2", "depolarized"))
    p.add_argument("--gamma", type=float, default=0.05)
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("replay", help="re-run a manifest and compare output digests")
    p.add_argument("manifest_file")
    p.set_defaults(func=cmd_replay)
    return parser


def run(argv) -> tuple[int, str]:
    """Execute a command; returns ``(exit_code, stdout_text)``."""
    args = build_parser().parse_args(argv)
    args._nonconverged = False
    try:
        text = args.func(args)
        code = EXIT_NONCONV if args._nonconverged else EXIT_OK
    except ConvergenceError as exc:
        text, code = io.dumps(exc.result.to_json()) + "\n", EXIT_NONCONV
        print(f"eacw: {exc}", file=sys.stderr)
    except CheckFailed as exc:
        text, code = str(exc), EXIT_CHECK
    except (ValidationError, ResourceError, ValueError) as exc:
        text, code = "", EXIT_INPUT
        print(f"eacw: error: {exc}", file=sys.stderr)
    return code, text


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    start = time.perf_counter()
    code, text = run(argv)
    sys.stdout.write(text)
    args = build_parser().parse_args(argv)
    if getattr(args, "manifest", None):
        clean = [a for i, a in enumerate(argv) if a != "--manifest" and (i == 0 or argv[i - 1] != "--manifest")]
        _write_manifest(args.manifest, clean, args, text, time.perf_counter() - start, code)
    return code


if __name__ == "__main__":
    sys.exit(main())
