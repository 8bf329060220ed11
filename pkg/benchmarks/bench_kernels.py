"""Timing comparison of the compiled batch kernels against the numpy fallback.

Run from the repository root:

    python3 benchmarks/bench_kernels.py --draws 20000

Reports the best of --repeats wall-clock timings per kernel and backend, plus
the speedup of the compiled core when it is available.
"""

import argparse
import time

import numpy as np

from risprop import _kernels
from risprop._kernels import _fallback
from risprop.geometry import default_scenario
from risprop.lpu import AngleUncertainty


def best_time(fn, repeats):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--draws", type=int, default=20000)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    sc = default_scenario()
    geo = (sc.p_tx, sc.p_rx, sc.p_c, sc.ris.element_offsets, sc.frequency)
    rng = np.random.default_rng(0)
    q = rng.normal(0.0, 0.01, (args.draws, 3))
    cfg = rng.uniform(0.0, 2.0 * np.pi, sc.ris.element_count)
    qvar = AngleUncertainty.from_std_degrees(0.49, 0.48, 0.18).as_array()

    cases = {
        "amp_phase": lambda impl: impl.batch_amp_phase(*geo, q),
        "heff": lambda impl: impl.batch_heff(*geo, cfg, q),
        "chain": lambda impl: impl.batch_chain(*geo, cfg, q, qvar),
    }

    backends = [("numpy", _fallback)]
    if _kernels.BACKEND == "compiled":
        from risprop._kernels import _core

        backends.append(("compiled", _core))
    else:
        print("compiled core not available; timing the fallback only")

    print(f"{args.draws} draws x {sc.ris.element_count} elements, "
          f"best of {args.repeats}")
    print(f"{'kernel':<12} {'backend':<10} {'seconds':>10} {'Mdraw-elem/s':>14}")
    work = args.draws * sc.ris.element_count / 1e6
    timings = {}
    for name, case in cases.items():
        for label, impl in backends:
            case(impl)  # warm up
            t = best_time(lambda: case(impl), args.repeats)
            timings[(name, label)] = t
            print(f"{name:<12} {label:<10} {t:>10.4f} {work / t:>14.1f}")
    if len(backends) == 2:
        for name in cases:
            ratio = timings[(name, "numpy")] / timings[(name, "compiled")]
            print(f"{name}: compiled is {ratio:.1f}x the numpy fallback")


if __name__ == "__main__":
    main()
