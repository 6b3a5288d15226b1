"""Command-line experiment runner.

Every subcommand writes CSV rows with the header
``experiment,n,m,rank,oversample,q,seed,metric,value,wall_time_seconds``.
Exit codes: 0 success, 1 acceptance failure, 2 usage/config error, 3 I/O error.
"""

import argparse
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from brp import _backend, io, selftest
from brp._version import __version__
from brp.bounds import monte_carlo_check
from brp.errors import BRPError, ConfigError, FormatError, HypothesisError, ShapeError
from brp.lowrank import SketchConfig, approximate, approximation_error, materialize, truncated_svd
from brp.randgen import check_seed, derive_seed, gaussian_matrix
from brp.synthetic import face_images, low_rank_product, matrix_with_spectrum, parse_spectrum

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
RECOVERY_TOL = 1e-10


def _record(experiment, m, n, rank, oversample, q, seed, metric, value, wall=0.0):
    return dict(experiment=experiment, n=n, m=m, rank=rank, oversample=oversample, q=q, seed=seed,
                metric=metric, value=value, wall_time_seconds=wall)


def _timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _seed(text):
    try:
        return check_seed(int(text, 10))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def cmd_recover(args):
    m = args.n if args.m is None else args.m
    if not 1 <= args.rank <= min(m, args.n):
        raise ConfigError(f"--rank must be in [1, {min(m, args.n)}], got {args.rank}")
    records, ok = [], True
    for t in range(args.trials):
        seed = derive_seed(args.seed, 0x5EC, t)
        x = low_rank_product(args.n, args.rank, derive_seed(seed, 0xA), m=m)
        cfg = SketchConfig(rank=args.rank, oversample=0, power=0, scheme="correlated", seed=seed,
                           pinv_fallback=args.pinv_fallback)
        f, wall = _timed(approximate, x, cfg)
        err = approximation_error(x, f, "frobenius", relative=True)
        ok &= err <= RECOVERY_TOL
        records.append(_record("recover", m, args.n, args.rank, 0, 0, seed, "rel_fro_error", err, wall))
    io.write_records(records, args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_error_curve(args):
    n = args.n
    for r in args.ranks:
        if not 1 <= r <= n:
            raise ConfigError(f"ranks must lie in [1, {n}], got {r}")
    metric = "rel_fro_error" if args.norm == "frobenius" else "rel_spec_error"
    x = gaussian_matrix(n, n, derive_seed(args.seed, 0x11))
    records = []
    (_, svd), svd_wall = _timed(truncated_svd, x, 1)
    for r in args.ranks:
        base, _ = truncated_svd(x, r)
        records.append(_record("svd_baseline", n, n, r, 0, 0, args.seed, metric,
                               approximation_error(x, base, args.norm, relative=True), svd_wall))
        p = min(args.oversample, n - r)
        for q in args.q_list:
            for t in range(args.trials):
                seed = derive_seed(args.seed, 0xEC, t)
                cfg = SketchConfig(rank=r, oversample=p, power=q, scheme=args.scheme, seed=seed,
                                   pinv_fallback=args.pinv_fallback)
                f, wall = _timed(approximate, x, cfg)
                records.append(_record("error_curve", n, n, r, p, q, seed, metric,
                                       approximation_error(x, f, args.norm, relative=True), wall))
    io.write_records(records, args.out)
    return EXIT_OK


def _load_spectrum(args):
    if args.spectrum_file:
        values = np.loadtxt(args.spectrum_file, delimiter=None, ndmin=1, dtype=np.float64)
        spectrum = np.sort(np.abs(values.ravel()))[::-1]
        if spectrum.size == 0 or not np.isfinite(spectrum).all():
            raise FormatError("spectrum file must hold finite values", args.spectrum_file)
        return spectrum
    if args.spectrum:
        return parse_spectrum(args.spectrum)
    raise ConfigError("one of --spectrum or --spectrum-file is required")


def cmd_bounds(args):
    spectrum = _load_spectrum(args)
    n = spectrum.size
    r, p, q = args.rank, args.oversample, args.q
    cfg = SketchConfig(rank=r, oversample=p, power=q, scheme="correlated", seed=args.seed,
                       pinv_fallback=args.pinv_fallback, cond_limit=args.cond_limit)
    cfg.check_shape((n, n))
    x = matrix_with_spectrum(spectrum, derive_seed(args.seed, 0xB0))
    rep, wall = _timed(monte_carlo_check, x, cfg, args.trials, args.u, args.t)
    scale = spectrum[0] if spectrum[0] > 0 else 1.0

    def rec(experiment, metric, value, seed=args.seed, w=0.0):
        return _record(experiment, n, n, r, p, q, seed, metric, value, w)

    from brp.bounds import trial_seed

    records = []
    for i, err in enumerate(rep.observed_errors):
        s = trial_seed(args.seed, i)
        records.append(rec("bounds_trial", "rel_spec_error", err / scale, s))
        if rep.deterministic is not None:
            records.append(rec("bounds_trial", "bound_det", rep.deterministic[i] / scale, s))
    records += [
        rec("bounds_observed_mean", "rel_spec_error", rep.mean / scale, w=wall),
        rec("bounds_observed_max", "rel_spec_error", rep.max / scale),
        rec("bounds_observed_stderr", "rel_spec_error", rep.stderr / scale),
    ]
    if rep.deterministic is not None:
        records.append(rec("bounds_exceedances", "bound_det", float(rep.deterministic_exceedances)))
    if rep.average is not None:
        records.append(rec("bounds", "bound_avg", rep.average / scale))
    if rep.deviation_value is not None:
        records += [rec("bounds", "bound_dev", rep.deviation_value / scale),
                    rec("bounds", "fail_prob", rep.deviation_fail_prob),
                    rec("bounds_exceedances", "bound_dev", float(rep.deviation_exceedances))]
    for name in sorted(rep.skipped):
        records.append(rec("bounds_skipped", name, None))
        if not args.quiet:
            print(f"skipped {name}: {rep.skipped[name]}", file=sys.stderr)
    if "bound_dev" in rep.skipped:
        records.append(rec("bounds_skipped", "fail_prob", None))
    io.write_records(records, args.out)
    return EXIT_OK


def cmd_compress(args):
    paths = io.list_pgms(args.input_dir)
    if not paths:
        raise FormatError("no .pgm files found", args.input_dir)
    stack = io.read_pgm_stack(paths)
    x = stack.as_matrix
    m, n = x.shape
    r = args.rank
    if not 1 <= r <= min(m, n):
        raise ConfigError(f"--rank must be in [1, {min(m, n)}], got {r}")
    p = min(args.oversample, min(m, n) - r)
    cfg = SketchConfig(rank=r, oversample=p, power=args.q, scheme="correlated", seed=args.seed,
                       pinv_fallback=args.pinv_fallback)
    (svd_f, _), svd_wall = _timed(truncated_svd, x, r)
    brp_f, brp_wall = _timed(approximate, x, cfg)
    records = [
        _record("compress_svd", m, n, r, 0, 0, args.seed, "rel_fro_error",
                approximation_error(x, svd_f, "frobenius", relative=True), svd_wall),
        _record("compress_brp", m, n, r, p, args.q, args.seed, "rel_fro_error",
                approximation_error(x, brp_f, "frobenius", relative=True), brp_wall),
    ]
    if args.out_dir:
        out = Path(args.out_dir)
        for name, f in (("svd", svd_f), ("brp", brp_f)):
            io.write_pgm_stack(io.ImageStack(materialize(f), stack.height, stack.width, stack.names), out / name)
    io.write_records(records, args.report)
    return EXIT_OK


def cmd_make_faces(args):
    images = face_images(count=args.count, height=args.height, width=args.width,
                         individuals=args.individuals, seed=args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for i, img in enumerate(images):
        io.write_pgm(img, out / f"face_{i:04d}.pgm")
    return EXIT_OK


def cmd_selftest(args):
    results = selftest.run()
    for name, passed in results.items():
        print(f"{'ok  ' if passed else 'FAIL'} {name}")
    print(f"backend: {_backend.BACKEND}")
    failed = [k for k, v in results.items() if not v]
    if failed:
        print("failed checks: " + ", ".join(failed), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_version(args):
    print(__version__)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="brp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_flag="--out"):
        p.add_argument("--seed", type=_seed, default=0)
        p.add_argument("--pinv-fallback", action="store_true",
                       help="use a pseudo-inverse when A2^T Y1 is singular")
        if out_flag:
            p.add_argument(out_flag, default="-", help="CSV path, '-' for stdout")

    p = sub.add_parser("recover", help="exact recovery of seeded rank-r products")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=None, help="rows (default: n)")
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--trials", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("error-curve", help="relative error vs rank for several q, with SVD baseline")
    p.add_argument("--n", type=int, default=400)
    p.add_argument("--ranks", type=_int_list, required=True)
    p.add_argument("--q-list", type=_int_list, default=[0, 1, 2, 3])
    p.add_argument("--oversample", type=int, default=5)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--scheme", choices=("correlated", "independent"), default="correlated")
    p.add_argument("--norm", choices=("frobenius", "spectral"), default="frobenius")
    common(p)
    p.set_defaults(func=cmd_error_curve)

    p = sub.add_parser("bounds", help="Monte-Carlo check of the error bounds on a synthetic spectrum")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--spectrum", help="geometric:RATIO:N or power:ALPHA:N")
    src.add_argument("--spectrum-file", help="text file of singular values")
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--oversample", type=int, default=5)
    p.add_argument("--q", type=int, default=0)
    p.add_argument("--u", type=float, default=2.0)
    p.add_argument("--t", type=float, default=2.0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--cond-limit", type=float, default=float("inf"),
                   help="condition limit for A2^T Y1 (default: no limit)")
    p.add_argument("--quiet", action="store_true")
    common(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("compress", help="rank-r compression of a directory of PGM images")
    p.add_argument("--input-dir", required=True)
    p.add_argument("--rank", type=int, default=60)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--oversample", type=int, default=5)
    p.add_argument("--out-dir", default=None, help="write reconstructed images here")
    common(p, out_flag="--report")
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("make-faces", help="write synthetic face-like PGMs")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--count", type=int, default=700)
    p.add_argument("--height", type=int, default=40)
    p.add_argument("--width", type=int, default=40)
    p.add_argument("--individuals", type=int, default=100)
    p.add_argument("--seed", type=_seed, default=0)
    p.set_defaults(func=cmd_make_faces)

    p = sub.add_parser("selftest", help="fast invariant checks")
    p.set_defaults(func=cmd_selftest)
    p = sub.add_parser("version", help="print the version")
    p.set_defaults(func=cmd_version)
    return parser


def _thread_limit():
    try:
        n = int(os.environ.get("BRP_THREADS", "0"))
    except ValueError:
        n = 0
    return max(1, n)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with threadpool_limits(limits=_thread_limit()):
            return args.func(args)
    except (FormatError, OSError) as exc:
        print(f"brp: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, HypothesisError, ShapeError, BRPError, ValueError) as exc:
        print(f"brp: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
