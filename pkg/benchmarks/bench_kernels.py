"""Time the numba kernels against their pure-numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat N]

Both implementations are called directly, whatever QDISCORD_PURE_NUMPY
says, and their outputs are compared before timing.
"""

import argparse
import time

import numpy as np

from qdiscord import evolution, information, special
from qdiscord._accel import HAVE_NUMBA


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    z = np.ascontiguousarray(np.logspace(-6, 6, 200_000))
    yield ("bessel i0e/i1e, 2e5 points",
           lambda: special._scaled_i0_i1_numba(z),
           lambda: special._scaled_i0_i1_numpy(z))

    rho0 = evolution.initial_state()
    lam, om, t = 3.0, 10.0, 20.0
    steps = evolution.default_steps(lam, om, t)
    yield (f"rk4, {steps} steps",
           lambda: evolution._rk4_loop(rho0, lam, om, t, steps),
           lambda: evolution._rk4_numpy(rho0, lam, om, t, steps))

    tt = np.linspace(0.0, 50.0, 1_000_000)
    r11, r22, r23, r14, _ = evolution.closed_form_elements(0.1, 1.0, tt, exact=True)
    a14 = np.abs(r14)
    out = np.empty_like(tt)

    def run(kernel):
        kernel(r11, r22, r23, a14, False, out)
        return out.copy()

    yield ("discord kernel, 1e6 times",
           lambda: run(information._discord_elements_loop),
           lambda: run(information._discord_elements_numpy))


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if not HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    print(f"{'kernel':34s} {'numba [s]':>11s} {'numpy [s]':>11s} {'speedup':>8s} {'max diff':>10s}")
    for name, fast, slow in cases():
        a = np.asarray(fast())  # also triggers compilation
        b = np.asarray(slow())
        if isinstance(a, np.ndarray) and a.dtype == object:
            a, b = np.concatenate(a), np.concatenate(b)
        diff = float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
        tf = best_of(fast, args.repeat)
        ts = best_of(slow, args.repeat)
        print(f"{name:34s} {tf:11.4g} {ts:11.4g} {ts / tf:8.2f} {diff:10.2g}")


if __name__ == "__main__":
    main()
