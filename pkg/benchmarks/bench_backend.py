"""Compare the gmpy2 and pure-Fraction coefficient backends.

Each backend runs in a fresh interpreter because the choice is fixed at
import time by ``COMMUTANT_PURE``.

    python3 benchmarks/bench_backend.py [--repeat 3]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, time
from commutant import BACKEND, PotentialSpec, build_pair, verify_commutant, wp_series
from commutant.models import functional_equation_check

def timed(fn):
    t = time.perf_counter()
    fn()
    return time.perf_counter() - t

def a4():
    L, P = build_pair("A", 4, PotentialSpec(C=1))
    assert verify_commutant(L, P).zero

def b2():
    L, P = build_pair("B", 2, PotentialSpec(C="C", C0=1))
    assert verify_commutant(L, P).zero

def wp():
    assert functional_equation_check(3, wp_series(N=12)).holds

print(json.dumps({"backend": BACKEND, "A4 commutator": timed(a4), "B2 symbolic": timed(b2), "series N=12": timed(wp)}))
"""


def run(pure: bool) -> dict:
    env = dict(os.environ, COMMUTANT_PURE="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", WORKLOAD], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=1)
    args = ap.parse_args()
    results = {False: [], True: []}
    for _ in range(args.repeat):
        for pure in (False, True):
            results[pure].append(run(pure))
    names = [k for k in results[False][0] if k != "backend"]
    fast, slow = results[False], results[True]
    print(f"{'workload':<16} {fast[0]['backend']:>10} {slow[0]['backend']:>10} {'ratio':>7}")
    for k in names:
        a = min(r[k] for r in fast)
        b = min(r[k] for r in slow)
        print(f"{k:<16} {a:>9.3f}s {b:>9.3f}s {b / a:>6.2f}x")


if __name__ == "__main__":
    main()
