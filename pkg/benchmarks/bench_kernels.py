"""Time the dense power kernel on both backends.

    python3 benchmarks/bench_kernels.py [--repeat N]

Cases: the flag-variety section at r=3, p=13 (3 variables, 13^3 cells) and
the Grassmannian section at r=2, p=11 (4 variables).  Each case checks that
both backends return the same split coefficient before reporting timings.
"""
import argparse
import time

from frobsplit import flagchart, grtower, kernels
from frobsplit.gfpoly import as_cap, to_dense, truncate, power_box, _pow_plan, box_cells


def flag_sigma(r, p):
    cfg = flagchart.standard_config(r, p)
    chart = flagchart.generic_chart(r, p, cfg)
    return flagchart.sigma_lemma59(chart, cfg)[0]


def tower_sigma(r, p):
    return grtower.corollary45_pipeline(r, p)[0]


def coefficient(sigma, impl):
    p, n = sigma.p, sigma.nvars
    e = p - 1
    caps = as_cap(e, n)
    box = to_dense(truncate(sigma, caps), caps)
    plan = _pow_plan(max(1, len(sigma.terms)), e // 2, box_cells(caps))
    half = power_box(box, e // 2, p, plan, impl=impl)
    return impl.top_pairing(half, p)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    cases = [("flag r=3 p=13", flag_sigma(3, 13)), ("tower r=2 p=11", tower_sigma(2, 11))]
    backends = kernels.backends()
    print(f"default backend: {kernels.BACKEND}")
    for name, sigma in cases:
        results, times = {}, {}
        for bname, impl in backends.items():
            best = float("inf")
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                results[bname] = coefficient(sigma, impl)
                best = min(best, time.perf_counter() - t0)
            times[bname] = best
        if len(set(results.values())) != 1:
            raise SystemExit(f"{name}: backends disagree {results}")
        cols = "  ".join(f"{b}={t * 1e3:9.2f} ms" for b, t in times.items())
        speed = ""
        if "cython" in times:
            speed = f"  speedup={times['python'] / times['cython']:.1f}x"
        print(f"{name:16s} coefficient={results['python']}  {cols}{speed}")


if __name__ == "__main__":
    main()
