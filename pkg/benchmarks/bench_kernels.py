"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--n 60] [--batch 200]
"""

import argparse

from stochdist.bench import run_benchmarks


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=60)
    ap.add_argument("--batch", type=int, default=200)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    rows = run_benchmarks(args.n, args.batch, args.seed)
    speed = {}
    print(f"{'kernel':16} {'backend':8} {'n':>4} {'m':>5} {'batch':>6} {'seconds':>9} {'per sec':>10}  same")
    for r in rows:
        speed[(r.kernel, r.backend)] = r.per_second
        print(f"{r.kernel:16} {r.backend:8} {r.n:4d} {r.m:5d} {r.batch:6d} {r.seconds:9.4f} {r.per_second:10.1f}  {r.identical}")
    for k in sorted({r.kernel for r in rows}):
        if (k, "cython") in speed:
            print(f"{k}: cython is {speed[(k, 'cython')] / speed[(k, 'python')]:.1f}x the python fallback")


if __name__ == "__main__":
    main()
