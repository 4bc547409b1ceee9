"""Compare compiled and NumPy kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--n 20000] [--repeat 20]
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from dipole_flux import _pykernels

try:
    from dipole_flux import _ckernels
except ImportError:
    _ckernels = None


def cases(n):
    rng = np.random.default_rng(0)
    om = np.sort(rng.uniform(0, 100, n))
    wt = np.full(n, 100.0 / n)
    h = om**2
    return {
        "pole_sum": lambda m: m.pole_sum(om, wt, h, 1.0, 1.0, 50.0),
        "direct_sum": lambda m: m.direct_sum(om, wt, h, -1.0, 50.0),
        "sinc_pair_sum": lambda m: m.sinc_pair_sum(om, wt, h, 1.0, 50.0),
        "avg_sinc_pair_sum": lambda m: m.avg_sinc_pair_sum(om, wt, h, 1.0, 500.0),
        "lorentz_pair_sum": lambda m: m.lorentz_pair_sum(om, wt, h, 1.0, 1e-3),
    }


def end_to_end(backend):
    code = (
        "import time, numpy as np\n"
        "from dipole_flux import flux as fx\n"
        "from dipole_flux.spectrum import DipoleSpectrum, Level\n"
        "s = DipoleSpectrum([Level('g', 0), Level('e', 1)], {('e', 'g'): [0, 0, 1]}, 'e')\n"
        "t = time.perf_counter()\n"
        "fx.virtual_flux_series(s, 1 + np.linspace(0, 200, 200))\n"
        "print(time.perf_counter() - t)\n"
    )
    env = dict(os.environ, DIPOLE_FLUX_BACKEND=backend)
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    print(f"{'kernel':<20}{'python [ms]':>14}{'compiled [ms]':>16}{'speedup':>10}")
    for name, fn in cases(args.n).items():
        tp = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=args.repeat)) * 1e3
        if _ckernels is None:
            print(f"{name:<20}{tp:>14.3f}{'n/a':>16}{'':>10}")
            continue
        tc = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<20}{tp:>14.3f}{tc:>16.3f}{tp / tc:>9.2f}x")
    tp = end_to_end("python")
    line = f"{'virtual series x200':<20}{tp * 1e3:>14.1f}"
    if _ckernels is not None:
        tc = end_to_end("compiled")
        line += f"{tc * 1e3:>16.1f}{tp / tc:>9.2f}x"
    print(line)


if __name__ == "__main__":
    main()
