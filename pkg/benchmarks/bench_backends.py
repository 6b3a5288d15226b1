"""Compiled kernels vs the numpy fallback.

    python benchmarks/bench_backends.py [--repeat 5] [--out bench.csv]

Times the Gaussian generator, Householder QR and one end-to-end
approximation under each backend and writes CSV rows
``kernel,size,backend,median_seconds,speedup``.
"""

import argparse
import csv
import statistics
import sys
import time

from brp import _backend, _fallback, randgen
from brp.lowrank import SketchConfig, approximate
from brp.randgen import gaussian_matrix

try:
    from brp import _kernels
except ImportError:
    _kernels = None


def median_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def use(kernels):
    _backend.householder_qr = kernels.householder_qr
    randgen._kernel = kernels


def cases():
    a_qr = gaussian_matrix(1000, 400, 1)
    a_small = gaussian_matrix(200, 150, 2)
    x = gaussian_matrix(2000, 2000, 3)
    cfg = SketchConfig(rank=100, oversample=5, power=1)
    return [
        ("normals", "1e6", lambda k: k.standard_normals(7, 1_000_000)),
        ("householder_qr", "1000x400", lambda k: k.householder_qr(a_qr)),
        ("householder_qr", "200x150", lambda k: k.householder_qr(a_small)),
        ("approximate q=1", "2000x2000 k=105", lambda k: approximate(x, cfg)),
    ]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--out", default="-")
    args = parser.parse_args(argv)
    if _kernels is None:
        print("compiled extension not built; nothing to compare", file=sys.stderr)
        return 1
    rows = []
    original = _backend.kernels
    try:
        for name, size, fn in cases():
            timings = {}
            for label, kernels in (("compiled", _kernels), ("python", _fallback)):
                use(kernels)
                fn(kernels)  # warm-up
                timings[label] = median_time(lambda: fn(kernels), args.repeat)
            speedup = timings["python"] / timings["compiled"]
            for label, t in timings.items():
                rows.append([name, size, label, f"{t:.6f}", f"{speedup:.2f}" if label == "compiled" else "1.00"])
    finally:
        use(original)
    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["kernel", "size", "backend", "median_seconds", "speedup"])
    writer.writerows(rows)
    if out is not sys.stdout:
        out.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
