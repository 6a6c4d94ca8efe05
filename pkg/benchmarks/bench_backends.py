"""Compare the compiled kernel core against the NumPy fallback.

Run: python benchmarks/bench_backends.py
"""

import os
import subprocess
import sys
import time

import numpy as np

from degrade_forge.backend import _pykernels

try:
    from degrade_forge.backend import _ckernels
except ImportError:
    _ckernels = None


def timeit(fn, *args, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_correlate(backend, h=480, w=480, k=21):
    rng = np.random.default_rng(0)
    padded = np.ascontiguousarray(rng.random((h + k - 1, w + k - 1)))
    kernel = np.ascontiguousarray(rng.random((k, k)))
    kernel /= kernel.sum()
    return timeit(backend.correlate2d, padded, k, k, kernel)


def bench_resample(backend, h=1920, w=1440, out=480, taps=10):
    rng = np.random.default_rng(1)
    src = np.ascontiguousarray(rng.random((h, w)))
    idx = np.ascontiguousarray(
        np.clip(np.linspace(0, h - taps, out).astype(np.int64)[:, None]
                + np.arange(taps)[None, :], 0, h - 1)
    )
    wts = np.ascontiguousarray(rng.random((out, taps)))
    wts /= wts.sum(axis=1, keepdims=True)
    return timeit(backend.resample_rows, src, idx, wts)


def bench_end_to_end(pure: bool):
    script = (
        "import time, numpy as np\n"
        "from degrade_forge.config import DegradationConfig\n"
        "from degrade_forge.pipeline import degrade\n"
        "hr = np.random.default_rng(0).random((480, 480, 3))\n"
        "degrade(hr, DegradationConfig(scale=4), seed=0)\n"
        "best = min(\n"
        "    (lambda t0: (degrade(hr, DegradationConfig(scale=4), seed=s),"
        " time.perf_counter() - t0)[1])(time.perf_counter())\n"
        "    for s in range(1, 6)\n"
        ")\n"
        "print(best)\n"
    )
    env = dict(os.environ)
    env["DEGRADE_FORGE_PURE_PYTHON"] = "1" if pure else "0"
    out = subprocess.run([sys.executable, "-c", script], env=env,
                         capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main():
    rows = []
    rows.append(("correlate2d 480x480 k=21 (python)", bench_correlate(_pykernels)))
    if _ckernels is not None:
        rows.append(("correlate2d 480x480 k=21 (compiled)", bench_correlate(_ckernels)))
    rows.append(("resample 1920x1440->480 t=10 (python)", bench_resample(_pykernels)))
    if _ckernels is not None:
        rows.append(("resample 1920x1440->480 t=10 (compiled)", bench_resample(_ckernels)))
    rows.append(("degrade 480x480 x4, best of 5 (python)", bench_end_to_end(True)))
    if _ckernels is not None:
        rows.append(("degrade 480x480 x4, best of 5 (compiled)", bench_end_to_end(False)))

    width = max(len(name) for name, _ in rows)
    for name, seconds in rows:
        print(f"{name:<{width}}  {seconds * 1e3:9.2f} ms")
    if _ckernels is None:
        print("\ncompiled backend not built; showing fallback only")


if __name__ == "__main__":
    main()
