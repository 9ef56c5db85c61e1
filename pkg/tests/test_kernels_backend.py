"""Backend parity: the pure-NumPy fallback must sample the same streams as the
JIT path (both build every variate from the same seeded uniform generator)."""

import json
import os
import subprocess
import sys
import textwrap

import numpy as np
import pytest

from padic_rmt import kernels
from padic_rmt.dynamics import cauchy_multi_batch, walk_batch
from padic_rmt.padicmat import product_chain_batch

CHILD = textwrap.dedent("""
    import json
    from padic_rmt import kernels
    from padic_rmt.dynamics import cauchy_multi_batch, walk_batch
    from padic_rmt.padicmat import product_chain_batch

    out = {}
    out["backend"] = kernels.backend_name()
    parts, sat = product_chain_batch(3, 2, "haar_entries", 2, 8, 200, 11)
    out["chain"] = parts.tolist()
    out["sat"] = sat.tolist()
    out["walk"] = walk_batch(4, [], 6.0, 0.5, 200, 12).tolist()
    out["cauchy"] = cauchy_multi_batch(4, [], [0.5, 0.25], 3, 0.5, 200, 13).tolist()
    print(json.dumps(out))
""")


def _run_fallback():
    env = dict(os.environ)
    env["RMT_PURE_NUMPY"] = "1"
    res = subprocess.run([sys.executable, "-c", CHILD], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


@pytest.mark.skipif(not kernels.NUMBA_ENABLED, reason="already on the fallback")
def test_fallback_backend_matches_jit_streams():
    got = _run_fallback()
    assert got["backend"] == "numpy"
    parts, sat = product_chain_batch(3, 2, "haar_entries", 2, 8, 200, 11)
    assert got["chain"] == parts.tolist()
    assert got["sat"] == sat.tolist()
    assert got["walk"] == walk_batch(4, [], 6.0, 0.5, 200, 12).tolist()
    assert got["cauchy"] == cauchy_multi_batch(4, [], [0.5, 0.25], 3, 0.5,
                                               200, 13).tolist()


def test_env_flag_name_documented():
    import padic_rmt.kernels as k

    assert "RMT_PURE_NUMPY" in (k.__doc__ or "")
