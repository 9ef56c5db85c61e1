"""Command-line front end.

Subcommands: ``pmf`` (limit-law probabilities), ``simulate`` (convergence
experiments), ``sample-hl`` (the geometric-impulse sampler), ``verify``
(exact identity suite), ``compare`` (sup-distance between stored laws).
Exit code 0 iff every tolerance in the invocation was met.  The environment
variable ``RMT_SEED`` overrides configured seeds.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import dynamics, harness, kernels
from .limitlaw import LimitLawParams, evaluate_record
from .qcore import DiscreteLaw, dinf, fraction_from_str


def _parse_t(text: str) -> Fraction:
    if "/" in text:
        return fraction_from_str(text)
    return Fraction(text).limit_denominator(10**12)


def cmd_pmf(args) -> int:
    t = _parse_t(args.t)
    L = tuple(args.L)
    params = LimitLawParams(k=args.k, t=t, chi=args.chi)
    method = args.method
    if method == "closed":
        method = "closed_k1" if args.k == 1 else "closed_k2"
    rec = evaluate_record(params, L, method)
    print(harness.dumps(rec))
    return 0


def cmd_simulate(args) -> int:
    if args.config:
        config = harness.ExperimentConfig.from_json(args.config)
        if args.experiment and args.experiment != config.experiment:
            raise SystemExit("--experiment conflicts with the config file")
    else:
        fields = {
            "experiment": args.experiment,
            "N": args.N,
            "samples": args.samples,
            "seed": args.seed,
            "p": args.p,
            "k": args.k,
        }
        if args.s is not None:
            fields["s"] = args.s
        if args.tau is not None:
            fields["tau"] = args.tau
        if args.K is not None:
            fields["K"] = args.K
        if args.D is not None:
            fields["D"] = args.D
        if args.zeta is not None:
            fields["zeta"] = args.zeta
        config = harness.ExperimentConfig(**fields)
    report = harness.run_experiment(config)
    out = config.output or args.output
    if out:
        harness.write_report(report, out, os.path.splitext(out)[0] + ".csv")
    print(harness.dumps(report.to_json_dict()))
    return 0 if report.passed else 1


def cmd_sample_hl(args) -> int:
    t = float(_parse_t(args.t))
    rng = np.random.default_rng(int(os.environ.get("RMT_SEED", args.seed)))
    if args.alphas:
        alphas = [float(a) for a in args.alphas]
    else:
        alphas = dynamics.geometric_alphas(t)
    records = []
    for _ in range(args.samples):
        state = ()
        for _ in range(args.steps):
            state = dynamics.hl_cauchy_multi(state, alphas, args.n, t, rng)
        records.append(state)
    for state in records:
        print(harness.dumps({"parts": list(state)}))
    return 0


def cmd_verify(args) -> int:
    t = _parse_t(args.t)
    report = harness.verify_identities(t=t)
    print(harness.dumps(report))
    return 0 if report["all_passed"] else 1


def cmd_compare(args) -> int:
    def load(path):
        with open(path) as fh:
            d = json.load(fh)
        probs = {}
        for key, val in d["probs"]:
            if isinstance(val, str):
                num, _, den = val.partition("/")
                val = int(num) / int(den)
            probs[tuple(key)] = val
        return DiscreteLaw(probs)

    a, b = load(args.a), load(args.b)
    d = dinf(a, b)
    result = {"dinf": d, "a": args.a, "b": args.b}
    if args.tolerance is not None:
        result["tolerance"] = args.tolerance
        result["pass"] = d < args.tolerance
    print(harness.dumps(result))
    if args.tolerance is not None and d >= args.tolerance:
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="padic-rmt",
        description="Limit law of singular-number column counts for p-adic "
                    "matrix products, with exact Hall-Littlewood machinery and "
                    "Monte Carlo verification harness "
                    f"(kernel backend: {kernels.backend_name()}).",
    )
    sub = ap.add_subparsers(dest="command")

    p_pmf = sub.add_parser("pmf", help="evaluate the limit-law pmf at one point")
    p_pmf.add_argument("--k", type=int, required=True)
    p_pmf.add_argument("--t", required=True, help="rational like 1/2")
    p_pmf.add_argument("--chi", type=float, required=True)
    p_pmf.add_argument("--L", type=int, nargs="+", required=True)
    p_pmf.add_argument("--method", default="series",
                       choices=["series", "contour", "closed", "closed_k1",
                                "closed_k2"])
    p_pmf.set_defaults(func=cmd_pmf)

    p_sim = sub.add_parser("simulate", help="run a convergence experiment")
    p_sim.add_argument("--experiment",
                       choices=sorted(harness.EXPERIMENTS))
    p_sim.add_argument("--config", help="JSON config file")
    p_sim.add_argument("--N", type=int)
    p_sim.add_argument("--samples", type=int, default=10000)
    p_sim.add_argument("--seed", type=int, default=12345)
    p_sim.add_argument("--p", type=int, default=2)
    p_sim.add_argument("--k", type=int, default=1)
    p_sim.add_argument("--s", type=int)
    p_sim.add_argument("--tau", type=float)
    p_sim.add_argument("--K", type=int)
    p_sim.add_argument("--D", type=int)
    p_sim.add_argument("--zeta", type=float)
    p_sim.add_argument("--output", help="JSON-lines output path")
    p_sim.set_defaults(func=cmd_simulate)

    p_hl = sub.add_parser("sample-hl", help="draw from the geometric-impulse sampler")
    p_hl.add_argument("--n", type=int, required=True)
    p_hl.add_argument("--t", required=True)
    p_hl.add_argument("--steps", type=int, default=1)
    p_hl.add_argument("--samples", type=int, default=1)
    p_hl.add_argument("--alphas", type=float, nargs="*",
                      help="substep parameters; defaults to t, t^2, ...")
    p_hl.add_argument("--seed", type=int, default=0)
    p_hl.set_defaults(func=cmd_sample_hl)

    p_ver = sub.add_parser("verify", help="run the exact identity suite")
    p_ver.add_argument("--t", default="1/2")
    p_ver.set_defaults(func=cmd_verify)

    p_cmp = sub.add_parser("compare", help="sup-distance between two stored laws")
    p_cmp.add_argument("--a", required=True)
    p_cmp.add_argument("--b", required=True)
    p_cmp.add_argument("--tolerance", type=float)
    p_cmp.set_defaults(func=cmd_compare)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if not getattr(args, "func", None):
        ap.print_usage()
        return 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
