"""Time the numba kernels against their numpy forms.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is called once first so numba compilation is excluded. Outputs are
checked for agreement before timing.
"""
import argparse
import time

import numpy as np

from gbsm import kernels
from gbsm._accel import HAVE_NUMBA


def _inputs(rng):
    n = 200_000
    xi = rng.uniform(-1, 1, n)
    weights = rng.uniform(0, 1, 256 * 256)
    phase = rng.uniform(-np.pi, np.pi, (256 * 256, 2))
    amp = rng.normal(size=(256 * 256, 2))
    m = 500_000
    amp_t, amp_r = rng.normal(size=(m, 2, 2)), rng.normal(size=(m, 2, 2))
    ph_t, ph_r = rng.uniform(-np.pi, np.pi, (m, 2)), rng.uniform(-np.pi, np.pi, (m, 2))
    pols_r, pols_t = np.array([0, 0, 1, 1]), np.array([0, 1, 0, 1])
    w = np.array([1.0, 0.13, 0.08, 0.63])
    h = (rng.normal(size=(100_000, 2, 2)) + 1j * rng.normal(size=(100_000, 2, 2))) / np.sqrt(2)
    return {
        "dipole_factor": ((xi,), "200k directions"),
        "phased_gram": ((weights, phase, amp), "65k nodes, 2 elements"),
        "mc_moments": ((amp_t, ph_t, amp_r, ph_r, pols_t, pols_r, w), "500k scatterers, 2x2"),
        "capacity_batch": ((h, 5.0), "100k 2x2 draws"),
    }


def _best(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def _agree(a, b):
    if isinstance(a, tuple):
        return all(_agree(x, y) for x, y in zip(a, b))
    return np.allclose(a, b, rtol=1e-9, atol=1e-12)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    if not HAVE_NUMBA:
        raise SystemExit("numba is not installed")
    cases = _inputs(np.random.default_rng(0))
    print(f"{'kernel':<16}{'workload':<26}{'numpy ms':>10}{'numba ms':>10}{'speedup':>9}  agree")
    for name, (call_args, label) in cases.items():
        f_np = getattr(kernels, f"{name}_numpy")
        f_nb = getattr(kernels, f"{name}_numba")
        ok = _agree(f_np(*call_args), f_nb(*call_args))  # also warms the jit
        t_np = _best(f_np, call_args, args.repeat)
        t_nb = _best(f_nb, call_args, args.repeat)
        print(f"{name:<16}{label:<26}{1e3 * t_np:>10.2f}{1e3 * t_nb:>10.2f}{t_np / t_nb:>8.1f}x  {ok}")


if __name__ == "__main__":
    main()
