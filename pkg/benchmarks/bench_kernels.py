"""Compare the compiled kernels with the numpy fallback.

Usage::

    python benchmarks/bench_kernels.py [--repeat 200]

Part one times each kernel directly from both modules. Part two times a
full training epoch in a subprocess per backend (``GENEMUT_PURE_PYTHON=1``
forces the fallback), which is what matters in practice.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from genemut.numkernel import _pykernels

try:
    from genemut.numkernel import _ckernels
except ImportError:
    _ckernels = None

EPOCH_SNIPPET = """
import time, warnings
warnings.simplefilter("ignore")
import numpy as np
from genemut.numkernel import BACKEND
from genemut.datagen import SynthConfig, generate_dataset
from genemut.pipeline.config import RunConfig
from genemut.pipeline.train import train_model
ds = generate_dataset(SynthConfig(seed=0, num_slides=100))
cfg = RunConfig(d=32, epochs=1, lr=1e-3)
train_model(cfg, ds, np.arange(10))  # warm-up
t = time.perf_counter()
_, _, steps = train_model(cfg, ds, np.arange(100))
print(BACKEND, steps, (time.perf_counter() - t) / steps)
"""


def cases(rng):
    for K, n in ((30, 16), (30, 64), (256, 256)):
        x = rng.normal(size=(K, n))
        y = _pykernels.softmax_rows(x)
        g = rng.normal(size=(K, n))
        gain, bias = rng.uniform(0.5, 1.5, n), rng.normal(size=n)
        _, xhat, rstd = _pykernels.layer_norm_forward(x, gain, bias, 1e-5)
        yield f"softmax_rows {K}x{n}", lambda k, x=x: k.softmax_rows(x)
        yield f"softmax_backward {K}x{n}", lambda k, y=y, g=g: k.softmax_rows_backward(y, g)
        yield (f"layer_norm_forward {K}x{n}",
               lambda k, x=x, a=gain, b=bias: k.layer_norm_forward(x, a, b, 1e-5))
        yield (f"layer_norm_backward {K}x{n}",
               lambda k, g=g, xh=xhat, r=rstd, a=gain: k.layer_norm_backward(g, xh, r, a))
    for size in (20_000, 200_000):
        p, g = rng.normal(size=size), rng.normal(size=size)
        m, v = np.zeros(size), np.zeros(size)
        yield (f"adam_update n={size}",
               lambda k, p=p, g=g, m=m, v=v: k.adam_update(p, g, m, v, 1e-4, 0.9, 0.999, 1e-8, 0.1, 0.001, 1e-5))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--skip-epoch", action="store_true")
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':32s} {'numpy us':>10s} {'cython us':>10s} {'speedup':>8s}")
    for name, fn in cases(rng):
        t_py = min(timeit.repeat(lambda: fn(_pykernels), number=args.repeat, repeat=3)) / args.repeat
        if _ckernels is None:
            print(f"{name:32s} {t_py * 1e6:10.2f} {'n/a':>10s}")
            continue
        t_c = min(timeit.repeat(lambda: fn(_ckernels), number=args.repeat, repeat=3)) / args.repeat
        print(f"{name:32s} {t_py * 1e6:10.2f} {t_c * 1e6:10.2f} {t_py / t_c:8.2f}x")
    if args.skip_epoch:
        return
    print("\nper-slide training step (K=30, d=32, 100 slides)")
    for pure in ("0", "1"):
        env = dict(os.environ, GENEMUT_PURE_PYTHON=pure)
        out = subprocess.run([sys.executable, "-c", EPOCH_SNIPPET], env=env, capture_output=True,
                             text=True, check=True).stdout.split()
        print(f"  backend={out[0]:7s} {float(out[2]) * 1e3:.3f} ms/step over {out[1]} steps")


if __name__ == "__main__":
    main()
