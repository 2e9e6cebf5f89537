"""Time Gram assembly with the numba kernels and with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--max-n 7] [--repeat 3]

Each backend is run in a fresh process so the environment flag is honoured
from import time and numba compilation is excluded by a warm-up call.
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from parainterp import build_gram, make_preset
from parainterp.gram import _green_sum_table
from parainterp import _kernels

ns, p, repeat = json.loads(sys.argv[1])
rng = np.random.default_rng(0)
build_gram(make_preset("green", q=0.3, p=p, sites=2), (0, 1))  # warm-up / jit
out = {"backend": _kernels.backend()}
for n in ns:
    q = rng.uniform(-0.9, 0.9, size=(n, n)); q = (q + q.T) / 2
    spec = make_preset("multiparam", q=q, p=p)
    best = float("inf")
    for _ in range(repeat):
        _green_sum_table.cache_clear()
        t = time.perf_counter()
        g = build_gram(spec, tuple(range(n)))
        best = min(best, time.perf_counter() - t)
    out[str(n)] = [best, float(np.abs(g.entries).sum())]
print(json.dumps(out))
"""


def run(flag: str | None, ns, p, repeat) -> dict:
    env = dict(os.environ)
    env.pop("PARAINTERP_DISABLE_NUMBA", None)
    if flag:
        env["PARAINTERP_DISABLE_NUMBA"] = flag
    res = subprocess.run([sys.executable, "-c", WORKER, json.dumps([ns, p, repeat])],
                         capture_output=True, text=True, env=env, check=True)
    return json.loads(res.stdout)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-n", type=int, default=7)
    ap.add_argument("--p", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    ns = list(range(3, args.max_n + 1))
    fast = run(None, ns, args.p, args.repeat)
    slow = run("1", ns, args.p, args.repeat)
    print(f"p={args.p}  {fast['backend']:>10} {slow['backend']:>10}  speedup  checksum-match")
    for n in ns:
        tf, cf = fast[str(n)]
        ts, cs = slow[str(n)]
        same = abs(cf - cs) <= 1e-9 * max(1.0, abs(cs))
        print(f"n={n}  {tf:10.4f} {ts:10.4f}  {ts / tf:7.1f}x  {same}")


if __name__ == "__main__":
    main()
