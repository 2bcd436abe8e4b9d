"""Command-line entry point.

Subcommands: decompose, validate-kernel, hormander, apply, solve,
adjoint-check, maxreg-sweep, weak-type, czd-stress, selftest.  Exit codes:
0 success, 1 validation failure (a checked property failed), 2 usage or
configuration error.  Every JSON report embeds its resolved configuration,
and all numbers are rendered with 17 significant digits.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import _selftest
from ._backend import BACKEND
from .czd import decompose as czd_decompose
from .czd import verify as czd_verify
from .experiments import (TrialFamily, czd_stress, emit_plot_data,
                          maxreg_sweep, weak_width_stability)
from .kernels import (GreensKernel, load_generator_spec, model_scalar_kernel)
from .operator import (OffSupportError, adjoint_pair, apply_off_support,
                       solve_parabolic, transpose_apply)
from .spaces import (SpatialSpace, StepFunction, TimeGrid,
                     read_step_function, write_step_function)
from .validate import (hormander_integral_s, hormander_integral_t,
                       parabolic_estimate_check, validate_holder_s,
                       validate_holder_t, validate_size)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2


def fmt(x) -> str:
    return f"{float(x):.17g}"


def render_json(obj, indent: int = 0) -> str:
    """Deterministic JSON with every float rendered at 17 significant digits."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}  {json.dumps(str(k))}: {render_json(v, indent + 1)}'
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        seq = list(obj)
        if not seq:
            return "[]"
        items = [f"{pad}  {render_json(v, indent + 1)}" for v in seq]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v) or math.isinf(v):
            return json.dumps(str(v))
        return fmt(v)
    if isinstance(obj, np.ndarray):
        return render_json(obj.tolist(), indent)
    return json.dumps(str(obj))


def _write_report(path, payload: dict):
    Path(path).write_text(render_json(payload) + "\n")


class UsageError(Exception):
    pass


def _jobs(args) -> int:
    if getattr(args, "jobs", None):
        return args.jobs
    env = os.environ.get("VOLTERRA_CZ_JOBS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"VOLTERRA_CZ_JOBS={env!r} is not an integer")
    return 1


def _parse_kernel(text: str):
    """model | heat:d=D | green:spec.cfg -> kernel object or ('heat', d)."""
    if text == "model":
        return model_scalar_kernel()
    if text.startswith("heat"):
        d = 1
        if ":" in text:
            head, _, tail = text.partition(":")
            if not tail.startswith("d="):
                raise UsageError(f"malformed heat kernel spec {text!r}; use heat:d=D")
            d = int(tail[2:])
        return ("heat", d)
    if text.startswith("green:"):
        cfg = text[len("green:"):]
        return GreensKernel(load_generator_spec(cfg))
    raise UsageError(f"unknown kernel {text!r}; use model | heat:d=D | green:spec.cfg")


def _parse_trials(text: str) -> TrialFamily:
    kind, _, rest = text.partition(":")
    kwargs = {"count": 100, "seed": 0}
    params = {}
    if rest:
        for item in rest.split(","):
            key, _, val = item.partition("=")
            if not val:
                raise UsageError(f"malformed trials option {item!r}")
            if key in ("count", "seed"):
                kwargs[key] = int(val)
            elif key in ("width_cells", "modes", "bumps"):
                params[key] = int(val)
            else:
                params[key] = float(val)
    return TrialFamily(kind, seed=kwargs["seed"], count=kwargs["count"],
                       params=params)


def _parse_seeds(text: str):
    if ".." in text:
        lo, _, hi = text.partition("..")
        return range(int(lo), int(hi) + 1)
    return [int(x) for x in text.split(",") if x.strip()]


def _parse_floats(text: str):
    return [float(x) for x in text.split(",") if x.strip()]


def _resolved_config(args, skip=("func",)) -> dict:
    out = {}
    for key, val in sorted(vars(args).items()):
        if key in skip:
            continue
        if isinstance(val, Path):
            val = str(val)
        out[key] = val
    out["backend"] = BACKEND
    return out


# ---------------------------------------------------------------------------
# subcommand implementations

def _cmd_decompose(args) -> int:
    if not args.alpha > 0:
        raise UsageError("invalid --alpha: the decomposition level must be > 0")
    f = read_step_function(args.input)
    d = czd_decompose(f, args.alpha)
    report = czd_verify(d, f, args.alpha, r=f.space.r)
    payload = {
        "config": _resolved_config(args),
        "alpha": args.alpha,
        "cubes": [{"n": p.cube.n, "k": p.cube.k,
                   "a": float(p.cube.left), "b": float(p.cube.right),
                   "s": float(p.center)} for p in d.parts],
        "good_part": {"n_min": d.good.grid.n_min, "N": d.good.grid.N,
                      "m": d.good.space.m, "samples": d.good.samples},
        "properties": report.to_dict(),
    }
    if args.report:
        _write_report(args.report, payload)
    if args.emit_parts:
        out = Path(args.emit_parts)
        out.mkdir(parents=True, exist_ok=True)
        for j, p in enumerate(d.parts):
            write_step_function(p.b, out / f"bad_part_{j:04d}.csv")
    print(f"bad cubes: {len(d.parts)}; properties "
          + ("all pass" if report.ok else
             f"FAIL at {report.first_failure().name}"))
    return EXIT_OK if report.ok else EXIT_VALIDATION


def _cmd_validate_kernel(args) -> int:
    kernel = _parse_kernel(args.kernel)
    cond = args.condition
    payload = {"config": _resolved_config(args)}
    rc = EXIT_OK
    if cond.startswith("parabolic"):
        if not (isinstance(kernel, tuple) and kernel[0] == "heat"):
            raise UsageError("--condition parabolic applies to the heat kernel only")
        q = 0.0
        if ":" in cond:
            _, _, tail = cond.partition(":")
            if not tail.startswith("q="):
                raise UsageError("use --condition parabolic:q=Q")
            q = float(tail[2:])
        rep = parabolic_estimate_check(kernel[1], args.m_order, args.alpha_index, q)
        payload["parabolic"] = rep.to_dict()
        print(f"sup={fmt(rep.sup_value)} bounded={rep.bounded}")
        rc = EXIT_OK if rep.bounded or args.allow_unbounded else EXIT_VALIDATION
    elif isinstance(kernel, tuple):
        raise UsageError("the heat kernel supports only --condition parabolic:q=Q")
    elif cond == "size":
        res = validate_size(kernel)
        payload["size"] = {"M0": res.value, "diverging": res.diverging,
                           "argmax": list(res.argmax)}
        print(f"M0={fmt(res.value)}")
        rc = EXIT_VALIDATION if res.diverging else EXIT_OK
    elif cond in ("holder-s", "holder-t"):
        res = (validate_holder_s if cond == "holder-s" else validate_holder_t)(kernel)
        payload[cond] = {"M1": res.value, "diverging": res.diverging,
                         "argmax": list(res.argmax)}
        print(f"M1={fmt(res.value)}")
        rc = EXIT_VALIDATION if res.diverging else EXIT_OK
    elif cond in ("hormander-s", "hormander-t"):
        probes = []
        worst = 0.0
        diverging = False
        for delta in (1e-3, 1.0, 1e3):
            for sign in (+1.0, -1.0):
                if cond == "hormander-s":
                    s0 = 2.0 * delta
                    res = hormander_integral_s(kernel, s0 + sign * delta, s0,
                                               tol=args.tol)
                else:
                    t0 = 4.0 * delta
                    res = hormander_integral_t(kernel, t0 + sign * delta, t0,
                                               tol=args.tol)
                probes.append({"delta": delta, "sign": sign,
                               "value": res.value, "tail": res.tail})
                worst = max(worst, res.value)
                diverging = diverging or res.diverging
        payload[cond] = {"max": worst, "probes": probes, "diverging": diverging}
        print(f"{cond.replace('-', '_')}_max={fmt(worst)}")
        rc = EXIT_VALIDATION if diverging else EXIT_OK
    else:
        raise UsageError(f"unknown --condition {cond!r}")
    if args.out:
        _write_report(args.out, payload)
    return rc


def _cmd_hormander(args) -> int:
    kernel = _parse_kernel(args.kernel)
    if isinstance(kernel, tuple):
        raise UsageError("hormander integrals need an operator kernel (model|green)")
    if args.side == "s":
        res = hormander_integral_s(kernel, args.s, args.s0, tol=args.tol)
    else:
        res = hormander_integral_t(kernel, args.s, args.s0, tol=args.tol)
    print(f"integral={fmt(res.value)} tail={fmt(res.tail)}")
    if args.out:
        _write_report(args.out, {"config": _resolved_config(args),
                                 "value": res.value, "tail": res.tail,
                                 "t_max": res.t_max,
                                 "diverging": res.diverging})
    return EXIT_VALIDATION if res.diverging else EXIT_OK


def _cmd_apply(args) -> int:
    kernel = _parse_kernel(args.kernel)
    if isinstance(kernel, tuple):
        raise UsageError("apply needs an operator kernel (model|green:spec.cfg)")
    f = read_step_function(args.input)
    if args.transpose:
        out = transpose_apply(kernel, f, args.at)
    else:
        out = apply_off_support(kernel, f, args.at)
    print(" ".join(fmt(v) for v in out))
    return EXIT_OK


def _cmd_solve(args) -> int:
    spec = load_generator_spec(args.spec)
    f = read_step_function(args.input)
    sol = solve_parabolic(spec, f)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_step_function(sol.u, out / "u.csv")
    write_step_function(sol.du_dt, out / "du_dt.csv")
    write_step_function(sol.Au, out / "au.csv")
    _write_report(out / "solution.json", {
        "config": _resolved_config(args),
        "residual": sol.residual(),
        "zero_modes": sol.zero_modes,
    })
    print(f"residual={fmt(sol.residual())}")
    return EXIT_OK


def _cmd_adjoint_check(args) -> int:
    kernel = _parse_kernel(args.kernel)
    if isinstance(kernel, tuple):
        raise UsageError("adjoint-check needs an operator kernel (model|green)")
    m = kernel.domain.m
    grid = TimeGrid(-3, 32)  # T = 4
    space = SpatialSpace(m, kernel.domain.r)
    worst = 0.0
    ok = True
    for pair in range(args.pairs):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=args.seed, spawn_key=(pair,)))
        gv = np.zeros((grid.N, m))
        fv = np.zeros((grid.N, m))
        gv[0:8] = rng.normal(size=(8, m))
        fv[17:25] = rng.normal(size=(8, m))
        g = StepFunction(grid, space, gv)
        f = StepFunction(grid, space, fv)
        lhs, rhs = adjoint_pair(kernel, g, f)
        disc = abs(lhs - rhs)
        worst = max(worst, disc)
        if disc > 1e-10 * (1.0 + abs(lhs)):
            ok = False
    print(f"max_discrepancy={fmt(worst)} pairs={args.pairs}")
    return EXIT_OK if ok else EXIT_VALIDATION


def _cmd_maxreg_sweep(args) -> int:
    spec = load_generator_spec(args.spec)
    trials = _parse_trials(args.trials)
    report = maxreg_sweep(spec,
                          _parse_floats(args.p),
                          _parse_floats(args.r),
                          trials,
                          refinements=[int(x) for x in args.refine.split(",")],
                          horizon=args.horizon,
                          jobs=_jobs(args))
    report.config["cli"] = _resolved_config(args)
    if args.out:
        _write_report(args.out, report.to_dict())
    if args.csv:
        Path(args.csv).write_text("\n".join(report.csv_lines()) + "\n")
    if args.plot_data:
        emit_plot_data(args.plot_data, spec, seed=trials.seed)
    worst = max((e["constant"] for e in report.entries), default=0.0)
    print(f"entries={len(report.entries)} max_constant={fmt(worst)}")
    return EXIT_OK


def _cmd_weak_type(args) -> int:
    spec = load_generator_spec(args.spec)
    widths = [int(x) for x in args.widths.split(",")]
    out = weak_width_stability(spec, widths=widths, mass=args.mass,
                               seed=args.seed, count=args.count,
                               jobs=_jobs(args))
    for w in widths:
        print(f"width={w} constant={fmt(out['constants'][w])}")
    print(f"max_rel_change={fmt(out['max_rel_change'])}")
    if args.out:
        _write_report(args.out, {"config": _resolved_config(args), **out})
    return EXIT_OK


def _cmd_czd_stress(args) -> int:
    summary = czd_stress(_parse_seeds(args.seeds),
                         _parse_floats(args.alpha_scales),
                         N=args.N, m=args.m, kind=args.kind,
                         mutate=args.mutate, jobs=_jobs(args))
    n_seeds = len(list(_parse_seeds(args.seeds)))
    n_scales = len(_parse_floats(args.alpha_scales))
    if summary.ok:
        print(f"{n_seeds}x{n_scales} pass")
        return EXIT_OK
    print(f"{summary.failures}/{summary.runs} FAILED; first: {summary.first_failure}")
    return EXIT_VALIDATION


def _cmd_selftest(args) -> int:
    passes, failures = _selftest.run(stream=sys.stdout,
                                     name_filter=args.filter)
    print(f"selftest: {passes} passed, {failures} failed")
    return EXIT_OK if failures == 0 else EXIT_VALIDATION


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="volterra-cz",
        description="Dyadic Calderon-Zygmund decomposition, Volterra singular "
                    "kernels, and empirical maximal regularity measurements.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--jobs", type=int, default=0,
                        help="worker count (default: $VOLTERRA_CZ_JOBS or 1); "
                             "results are independent of the worker count")

    p = sub.add_parser("decompose", parents=[common],
                       help="Calderon-Zygmund decomposition of a step function")
    p.add_argument("--input", required=True, help="step function CSV (with .meta sidecar)")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--report", help="write the JSON report here")
    p.add_argument("--emit-parts", help="write each bad part as CSV into this directory")
    p.set_defaults(func=_cmd_decompose)

    p = sub.add_parser("validate-kernel", parents=[common],
                       help="sample a kernel bound and report the best constant")
    p.add_argument("--kernel", required=True, help="model | heat:d=D | green:spec.cfg")
    p.add_argument("--condition", required=True,
                   help="size | holder-s | holder-t | hormander-s | hormander-t "
                        "| parabolic:q=Q")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--m-order", type=int, default=0, help="time-derivative order")
    p.add_argument("--alpha-index", type=int, nargs="*", default=(0,),
                   help="spatial multi-index")
    p.add_argument("--allow-unbounded", action="store_true")
    p.add_argument("--out", help="write the JSON report here")
    p.set_defaults(func=_cmd_validate_kernel)

    p = sub.add_parser("hormander", parents=[common],
                       help="integrated kernel-difference bound at explicit points")
    p.add_argument("--kernel", required=True)
    p.add_argument("--s", type=float, required=True,
                   help="s (side s) or t (side t)")
    p.add_argument("--s0", type=float, required=True,
                   help="s0 (side s) or t0 (side t)")
    p.add_argument("--side", choices=("s", "t"), default="s")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_hormander)

    p = sub.add_parser("apply", parents=[common],
                       help="apply the operator (or its transpose) off-support")
    p.add_argument("--kernel", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--at", type=float, required=True)
    p.add_argument("--transpose", action="store_true")
    p.set_defaults(func=_cmd_apply)

    p = sub.add_parser("solve", parents=[common],
                       help="exact exponential-integrator parabolic solve")
    p.add_argument("--spec", required=True, help="generator config (key=value)")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("adjoint-check", parents=[common],
                       help="duality identity on random separated inputs")
    p.add_argument("--kernel", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pairs", type=int, default=1)
    p.set_defaults(func=_cmd_adjoint_check)

    p = sub.add_parser("maxreg-sweep", parents=[common],
                       help="measure regularity constants over (p, r, N)")
    p.add_argument("--spec", required=True)
    p.add_argument("--p", required=True, help="comma list, e.g. 1.5,2,4")
    p.add_argument("--r", required=True)
    p.add_argument("--trials", default="oscillatory:count=100,seed=7",
                   help="kind:key=val,... (kinds: oscillatory, spikes, "
                        "random-steps, cz-adversarial)")
    p.add_argument("--refine", default="64,128,256")
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--out")
    p.add_argument("--csv")
    p.add_argument("--plot-data", help="emit gnuplot-ready profiles here")
    p.set_defaults(func=_cmd_maxreg_sweep)

    p = sub.add_parser("weak-type", parents=[common],
                       help="weak-(1,1) constant from spikes, stability under "
                            "width halving")
    p.add_argument("--spec", required=True)
    p.add_argument("--widths", default="4,2,1")
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_weak_type)

    p = sub.add_parser("czd-stress", parents=[common],
                       help="randomized decomposition property suite")
    p.add_argument("--seeds", default="0..99", help="e.g. 0..99 or 1,2,3")
    p.add_argument("--alpha-scales", default="0.1,0.5,1,2,10")
    p.add_argument("--N", type=int, default=128)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--kind", default="random-steps")
    p.add_argument("--mutate", action="store_true",
                   help="inject faults; a run passes when the verifier flags it")
    p.set_defaults(func=_cmd_czd_stress)

    p = sub.add_parser("selftest", parents=[common],
                       help="run the built-in known-answer corpus")
    p.add_argument("--filter", default="",
                   help="run only checks whose name contains this substring")
    p.set_defaults(func=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OffSupportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
