"""Benchmark the hot kernels on both backends: numba JIT vs pure NumPy/Python.

Each workload runs in a fresh subprocess (the backend is chosen at import time
through RMT_PURE_NUMPY), timing one warm-up plus one measured repetition.

Usage: python benchmarks/bench_kernels.py [--samples-scale S]
"""

import argparse
import json
import os
import subprocess
import sys
import textwrap

WORKLOADS = {
    "product_chain(N=3,s=3,p=2,K=8)": (
        "padic_rmt.padicmat", "product_chain_batch", "(3, 3, 'haar_entries', 2, 8, {n}, 1)",
        20000,
    ),
    "x_process(N=3,tau=5,K=16)": (
        "padic_rmt.padicmat", "x_process_batch", "(3, 5.0, 2, 16, {n}, 2)",
        20000,
    ),
    "walk(n=30,tau=1024)": (
        "padic_rmt.dynamics", "walk_batch", "(30, [], 1024.0, 0.5, {n}, 3)",
        5000,
    ),
    "cauchy_multi(N=20,s=64)": (
        "padic_rmt.dynamics", "cauchy_multi_batch",
        "(20, [], __import__('padic_rmt.dynamics', fromlist=['x']).geometric_alphas(0.5), 64, 0.5, {n}, 4)",
        2000,
    ),
}

CHILD = textwrap.dedent("""
    import json, time, sys
    import {module} as mod
    fn = mod.{func}
    args = {args}
    fn(*args)  # warm-up (includes JIT compilation when enabled)
    t0 = time.time()
    fn(*args)
    print(json.dumps({{"seconds": time.time() - t0}}))
""")


def run_child(module, func, args_src, pure_numpy: bool) -> float:
    env = dict(os.environ)
    if pure_numpy:
        env["RMT_PURE_NUMPY"] = "1"
    else:
        env.pop("RMT_PURE_NUMPY", None)
    code = CHILD.format(module=module, func=func, args=args_src)
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])["seconds"]


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples-scale", type=float, default=1.0,
                    help="multiply per-workload sample counts")
    args = ap.parse_args()
    print(f"{'workload':40s} {'numba':>10s} {'numpy':>10s} {'speedup':>9s}")
    for name, (module, func, args_tpl, n) in WORKLOADS.items():
        n_eff = max(100, int(n * args.samples_scale))
        args_src = args_tpl.format(n=n_eff)
        t_jit = run_child(module, func, args_src, pure_numpy=False)
        t_pure = run_child(module, func, args_src, pure_numpy=True)
        print(f"{name:40s} {t_jit:9.3f}s {t_pure:9.3f}s {t_pure / t_jit:8.1f}x"
              f"   ({n_eff} samples)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
