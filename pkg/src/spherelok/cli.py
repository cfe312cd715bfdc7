"""Command-line interface: plans, transforms, filtering, reports, benchmarks.

Exit codes: 0 success, 2 usage, 3 malformed file, 4 numeric-contract
violation.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import _fastcheb as fc
from .approximation import (
    EigenvalueWindow,
    SpectralSummary,
    chebyshev_bound,
    filter_coeffs,
    markov_bound,
)
from .errors import FormatError, NumericError
from .jacobi_blocks import build_block, eigendecompose
from .sphere_basis import (
    BandParams,
    HarmonicCoeffs,
    LocalizedCoeffs,
    SphereGrid,
    evaluate_basis_on_grid,
    evaluate_on_grid,
    load_coeffs,
    mean_value,
    save_coeffs,
)
from .transform import (
    TransformPlan,
    analyze,
    analyze_fast,
    load_plan,
    save_plan,
    synthesize,
)

_WINDOW_HELP = (
    "window grammar: intervals '[x,y]' (closed) or '(x,y)' (open), mixed "
    "brackets allowed, joined by 'u'; whitespace ignored. "
    "Example: \"[-1,-0.6]u[-0.2,0.2]u[0.6,1]\""
)


# ---------------------------------------------------------------------------
# benchmark helpers (importable; the bench subcommand prints them)


def time_call(fn, min_time: float = 1e-3, repeats: int = 3) -> float:
    """Best average seconds per call over several timed batches.

    Batch length adapts until a batch lasts at least ``min_time``; the
    minimum over ``repeats`` batches discards scheduler noise.
    """
    fn()  # warm up
    n_iter = 1
    while True:
        t0 = time.perf_counter()
        for _ in range(n_iter):
            fn()
        dt = time.perf_counter() - t0
        if dt >= min_time:
            break
        n_iter *= 4
    best = dt / n_iter
    for _ in range(repeats - 1):
        t0 = time.perf_counter()
        for _ in range(n_iter):
            fn()
        dt = time.perf_counter() - t0
        best = min(best, dt / n_iter)
    return best


def fit_loglog(sizes, times) -> float:
    """Least-squares slope of log(time) against log(size)."""
    return float(np.polyfit(np.log(np.asarray(sizes, float)), np.log(times), 1)[0])


def bench_dense_band(n: int, m: int, rng=None) -> tuple[float, int]:
    """Seconds per dense analysis of the full band, streamed block by block.

    Blocks for +k and -k share the same matrix; each distinct |k| is timed
    once and counted with its multiplicity.
    """
    rng = rng or np.random.default_rng(0)
    total = 0.0
    ops = 0
    for k in range(n + 1):
        eb = eigendecompose(build_block(n, m, k))
        vt = eb.vectors.T.copy()
        c = rng.standard_normal(eb.size) + 1j * rng.standard_normal(eb.size)
        mult = 1 if k == 0 else 2
        total += mult * time_call(lambda: vt @ c)
        ops += mult * (2 * eb.size - 1) * eb.size
    return total, ops


def bench_fast_band(n: int, m: int, ndct: str = "auto", rng=None) -> float:
    """Seconds per fast analysis of the full band (precompute excluded)."""
    rng = rng or np.random.default_rng(0)
    plan = TransformPlan.build(n, m, mode="fast", ndct=ndct, validate=False)
    from .transform import _fast_block_apply

    total = 0.0
    for k in range(n + 1):
        c = rng.standard_normal(plan.params.block_size(k))
        c = c + 1j * rng.standard_normal(len(c))
        plan._fast_block(k)  # force precompute outside the timer
        mult = 1 if k == 0 else 2
        total += mult * time_call(lambda: _fast_block_apply(plan, k, c))
    return total


def bench_fast_block(size: int, rng=None) -> float:
    """Seconds per fast pipeline application for one block of the given size.

    Uses the deepest (alpha = 0) family: nodes and scaling come straight
    from the Gauss-Legendre rule of matching order.
    """
    rng = rng or np.random.default_rng(0)
    nodes, weights = np.polynomial.legendre.leggauss(size)
    theta = np.arccos(nodes[::-1].copy())
    kappa = np.sqrt(weights[::-1] / 2.0)
    cascade = fc.build_cascade(0, size)
    ndct = fc.build_ndct(theta, size)
    c = rng.standard_normal(size) + 1j * rng.standard_normal(size)

    def pipeline():
        cheb = fc.apply_cascade(cascade, c)
        return kappa * fc.apply_ndct(ndct, cheb)

    return time_call(pipeline)


# ---------------------------------------------------------------------------
# subcommands


def _load_harmonic(path) -> HarmonicCoeffs:
    coeffs = load_coeffs(path)
    if not isinstance(coeffs, HarmonicCoeffs):
        raise FormatError(f"{path}: expected kind=harmonic coefficients")
    return coeffs


def _load_localized(path) -> LocalizedCoeffs:
    coeffs = load_coeffs(path)
    if not isinstance(coeffs, LocalizedCoeffs):
        raise FormatError(f"{path}: expected kind=localized coefficients")
    return coeffs


def cmd_plan(args) -> int:
    out = Path(args.out)
    if out.exists():
        plan = load_plan(out)
        if (plan.params.n, plan.params.m) != (args.n, args.m):
            raise FormatError(
                f"{out}: existing cache is for n={plan.params.n} m={plan.params.m}"
            )
        print(f"verified existing plan cache {out}")
    else:
        plan = TransformPlan.build(args.n, args.m)
        save_plan(out, plan)
        print(f"wrote plan cache {out}")
    params = plan.params
    sizes = " ".join(str(params.block_size(k)) for k in params.orders())
    print(f"n={params.n} m={params.m} dimension={params.dimension}")
    print(f"block sizes (k = {params.n} .. {-params.n}): {sizes}")
    return 0


def cmd_analyze(args) -> int:
    plan = load_plan(args.plan, mode=args.mode, ndct=args.ndct)
    coeffs = _load_harmonic(args.input)
    if args.mode == "fast":
        result = analyze_fast(plan, coeffs)
    else:
        result = analyze(plan, coeffs)
    save_coeffs(args.out, result)
    print(f"analyzed {args.input} -> {args.out} (norm {result.norm():.12g})")
    return 0


def cmd_synthesize(args) -> int:
    plan = load_plan(args.plan)
    coeffs = _load_localized(args.input)
    result = synthesize(plan, coeffs)
    save_coeffs(args.out, result)
    print(f"synthesized {args.input} -> {args.out} (norm {result.norm():.12g})")
    return 0


def cmd_filter(args) -> int:
    plan = load_plan(args.plan)
    coeffs = _load_harmonic(args.input)
    window = EigenvalueWindow.from_string(args.window)
    kept, removed = filter_coeffs(plan, coeffs, window)
    save_coeffs(args.out_kept, kept)
    save_coeffs(args.out_removed, removed)
    kept_sq = kept.norm() ** 2
    removed_sq = removed.norm() ** 2
    print(f"window: {window}")
    print(f"|kept|^2 = {kept_sq:.15g}")
    print(f"|removed|^2 = {removed_sq:.15g}")
    print(f"|input|^2 = {coeffs.norm() ** 2:.15g}")
    print(f"mean(kept) = {mean_value(kept):.12g}")
    print(f"mean(removed) = {mean_value(removed):.12g}")
    if abs(coeffs.norm() - 1.0) <= 1e-10:
        tail = window.tail_shape()
        centered = window.centered_shape()
        if tail is not None:
            bound, actual = markov_bound(plan, coeffs, tail[1], tail[0])
            print(f"{tail[0]}-tail bound: residual {actual:.6g} <= {bound:.6g}")
        elif centered is not None and abs(centered[0] - mean_value(coeffs)) <= 1e-9:
            bound, actual = chebyshev_bound(plan, coeffs, centered[1])
            print(f"centered bound: residual {actual:.6g} <= {bound:.6g}")
    return 0


def cmd_spectrum(args) -> int:
    plan = load_plan(args.plan)
    summary = SpectralSummary.from_plan(plan)
    n_vals = len(summary.eigenvalues)
    payload = {
        "n": plan.params.n,
        "m": plan.params.m,
        "dimension": plan.params.dimension,
        "count": n_vals,
        "sum_x": summary.moment(1),
        "mean_x2": summary.moment(2) / n_vals,
        "min": float(summary.eigenvalues.min()),
        "max": float(summary.eigenvalues.max()),
        "fraction_in_0_0.5": summary.counting(0.0, 0.5),
        "moments": [float(v) for v in summary.moments],
        "histogram_counts": [int(c) for c in summary.hist_counts],
        "histogram_edges": [float(e) for e in summary.hist_edges],
    }
    if args.json:
        print(json.dumps(payload))
    else:
        for key in (
            "n",
            "m",
            "dimension",
            "count",
            "sum_x",
            "mean_x2",
            "min",
            "max",
            "fraction_in_0_0.5",
        ):
            print(f"{key} = {payload[key]}")
    return 0


def cmd_grid(args) -> int:
    plan = load_plan(args.plan)
    params = plan.params
    p_res = args.theta_res if args.theta_res else params.n + 1
    q_res = args.phi_res if args.phi_res else 2 * params.n + 2
    grid = SphereGrid.for_degree(params.n, theta_res=p_res, phi_res=q_res)
    if args.psi is not None:
        k, i = args.psi
        if abs(k) > params.n or not 1 <= i <= params.block_size(k):
            raise ValueError(f"no basis function for order {k}, index {i}")
        field = evaluate_basis_on_grid(params, plan.blocks, k, i, grid)
    else:
        if args.input is None:
            raise ValueError("grid needs either --in coefficients or --psi K I")
        field = evaluate_on_grid(_load_harmonic(args.input), grid)
    lines = ["theta,phi,re,im"]
    for p, th in enumerate(grid.theta):
        for q, ph in enumerate(grid.phi):
            v = field[p, q]
            lines.append(f"{th:.17g},{ph:.17g},{v.real:.17g},{v.imag:.17g}")
    Path(args.out).write_text("\n".join(lines) + "\n")
    print(f"wrote {len(grid.theta)}x{len(grid.phi)} grid to {args.out}")
    return 0


def cmd_bench(args) -> int:
    payload: dict = {}
    if args.blocks:
        sizes = [int(s) for s in args.blocks.split(",")]
        times = [bench_fast_block(sz) for sz in sizes]
        payload["block_sizes"] = sizes
        payload["block_seconds"] = times
        if len(sizes) > 1:
            payload["block_exponent"] = fit_loglog(sizes, times)
        if not args.json:
            for sz, t in zip(sizes, times):
                print(f"fast block N={sz:6d}: {t * 1e3:10.4f} ms")
            if len(sizes) > 1:
                print(f"fast per-block exponent: {payload['block_exponent']:.3f}")
    if args.n_list:
        ns = [int(s) for s in args.n_list.split(",")]
        dense_t, fast_t, ops = [], [], []
        for n in ns:
            if args.mode in ("dense", "both"):
                t, op = bench_dense_band(n, args.m)
                dense_t.append(t)
                ops.append(op)
                if not args.json:
                    print(f"dense n={n:4d}: {t * 1e3:10.4f} ms  ops={op}")
            if args.mode in ("fast", "both"):
                t = bench_fast_band(n, args.m)
                fast_t.append(t)
                if not args.json:
                    print(f"fast  n={n:4d}: {t * 1e3:10.4f} ms")
        payload["n_list"] = ns
        payload["m"] = args.m
        if dense_t:
            payload["dense_seconds"] = dense_t
            payload["dense_ops"] = ops
            if len(ns) > 1:
                payload["dense_exponent"] = fit_loglog(ns, dense_t)
                if not args.json:
                    print(f"dense exponent: {payload['dense_exponent']:.3f}")
        if fast_t:
            payload["fast_seconds"] = fast_t
            if len(ns) > 1:
                payload["fast_exponent"] = fit_loglog(ns, fast_t)
                if not args.json:
                    print(f"fast exponent: {payload['fast_exponent']:.3f}")
    if not args.blocks and not args.n_list:
        raise ValueError("bench needs --n-list and/or --blocks")
    if args.json:
        print(json.dumps(payload))
    return 0


def _selftest_checks():
    import math

    from .sphere_basis import embed_block
    from .ultraspherical import (
        UltrasphericalFamily,
        christoffel_darboux_closed,
        christoffel_darboux_sum,
        recurrence_coefficient,
    )

    rng = np.random.default_rng(1234)

    def check_recurrence():
        assert abs(recurrence_coefficient(0, 0) - 1.0) < 1e-15
        assert abs(recurrence_coefficient(0, 1) - 1.0 / math.sqrt(3)) < 1e-15
        assert abs(recurrence_coefficient(16, 1) - 1.0 / math.sqrt(35)) < 1e-15

    def check_eigen():
        eb = eigendecompose(build_block(2, 0, 1))
        target = recurrence_coefficient(1, 1)
        assert np.allclose(np.abs(eb.eigenvalues), target)

    def check_cd_identity():
        fam = UltrasphericalFamily.build(1, 16)
        direct = christoffel_darboux_sum(fam, 3, 6, 0.2, 0.8)
        closed = christoffel_darboux_closed(fam, 3, 6, 0.2, 0.8)
        assert abs(direct - closed) <= 1e-10 * max(1.0, abs(direct))

    def check_roundtrip():
        plan = TransformPlan.build(12, 3)
        c = HarmonicCoeffs.random_unit(plan.params, rng)
        back = synthesize(plan, analyze(plan, c))
        assert np.abs(back.values - c.values).max() < 1e-12

    def check_parseval():
        plan = TransformPlan.build(10, 0)
        c = HarmonicCoeffs.random_unit(plan.params, rng)
        assert abs(analyze(plan, c).norm() - 1.0) < 1e-12

    def check_bounds():
        plan = TransformPlan.build(8, 0)
        for _ in range(25):
            c = HarmonicCoeffs.random_unit(plan.params, rng)
            bound, actual = markov_bound(plan, c, 0.5, "upper")
            assert actual <= bound + 1e-12
            bound, actual = chebyshev_bound(plan, c, 0.4)
            assert actual <= bound + 1e-12

    def check_eigenbasis():
        plan = TransformPlan.build(6, 2)
        eb = plan.blocks[3]
        c = embed_block(plan.params, 3, eb.vectors[:, 0])
        d = analyze(plan, c)
        idx = d.index_of(3, 1)
        ref = np.zeros(plan.params.dimension)
        ref[idx] = 1.0
        assert np.abs(d.values - ref).max() < 1e-12

    def check_mean_value():
        params = BandParams(4, 0)
        c = HarmonicCoeffs.from_blocks(
            params, {0: np.array([1.0, 1.0, 0, 0, 0]) / np.sqrt(2)}
        )
        assert abs(mean_value(c) - 1.0 / math.sqrt(3)) < 1e-14

    return [
        ("recurrence coefficients", check_recurrence),
        ("two-by-two eigenvalues", check_eigen),
        ("kernel identity", check_cd_identity),
        ("transform round trip", check_roundtrip),
        ("norm preservation", check_parseval),
        ("window bounds", check_bounds),
        ("eigenbasis delta", check_eigenbasis),
        ("mean value quadratic form", check_mean_value),
    ]


def cmd_selftest(args) -> int:
    checks = _selftest_checks()
    passed = 0
    for name, fn in checks:
        try:
            fn()
        except Exception as exc:  # noqa: BLE001 - report and count
            print(f"FAIL {name}: {exc}")
        else:
            passed += 1
            print(f"ok   {name}")
    print(f"selftest passed {passed}/{len(checks)}")
    return 0 if passed == len(checks) else 4


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spherelok",
        description="Localized bases for band-limited functions on the sphere.",
        epilog=_WINDOW_HELP,
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("plan", help="build or verify a plan cache")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plan)

    for name, fn in (("analyze", cmd_analyze), ("synthesize", cmd_synthesize)):
        p = sub.add_parser(name, help=f"{name} coefficients through a plan")
        p.add_argument("--plan", required=True)
        p.add_argument("--in", dest="input", required=True)
        p.add_argument("--out", required=True)
        if name == "analyze":
            p.add_argument("--mode", choices=("dense", "fast"), default="dense")
            p.add_argument(
                "--ndct", choices=("auto", "direct", "windowed"), default="auto"
            )
        p.set_defaults(func=fn)

    p = sub.add_parser("filter", help="split by an eigenvalue window")
    p.add_argument("--plan", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--window", required=True, help=_WINDOW_HELP)
    p.add_argument("--out-kept", required=True)
    p.add_argument("--out-removed", required=True)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("spectrum", help="eigenvalue-distribution report")
    p.add_argument("--plan", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("grid", help="export samples on a latitude/longitude grid")
    p.add_argument("--plan", required=True)
    p.add_argument("--in", dest="input")
    p.add_argument(
        "--psi",
        nargs=2,
        type=int,
        metavar=("K", "I"),
        help="export one basis function (order K, index I)",
    )
    p.add_argument("--theta-res", type=int)
    p.add_argument("--phi-res", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("bench", help="timing and scaling report")
    p.add_argument("--n-list", help="comma-separated band limits for full bands")
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--blocks", help="comma-separated sizes for per-block timing")
    p.add_argument("--mode", choices=("dense", "fast", "both"), default="both")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("selftest", help="run built-in invariant checks")
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 4
    except (ValueError, IndexError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
