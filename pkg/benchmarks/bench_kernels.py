"""Time the JIT kernels against the pure-numpy fallback.

Each mode runs in its own interpreter because the switch is read at import::

    python benchmarks/bench_kernels.py [--repeat N]

Reports the median wall time of one bulk assembly, one contact evaluation
(both half-passes) and one full assembly of the desk-scale cap model.
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

WORKER = r"""
import json, sys, time
import numpy as np
from adhfric._accel import USE_NUMBA
from adhfric.contact import two_half_pass
from adhfric.scenarios import default_config, build_scenario

repeat = int(sys.argv[1])
cfg = default_config("cap")
model, _ = build_scenario(cfg)
u = np.random.default_rng(0).normal(scale=1e-3, size=model.ndof)
f0 = np.zeros(model.ndof)
model.initialize_contact(np.zeros(model.ndof))
x = model.current(u)

cases = {
    "contact": lambda: two_half_pass(model.pairs, x, model.X, model.ndof),
    "assemble": lambda: model.assemble(u, f0, frozen=False),
}
out = {"numba": USE_NUMBA, "elements": int(sum(b.mesh.n_elements for b in model.bodies))}
for name, fn in cases.items():
    fn()  # warm-up, includes compilation
    ts = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t)
    out[name] = float(np.median(ts))
print(json.dumps(out))
"""


def measure(disable: bool, repeat: int) -> dict:
    env = dict(os.environ, ADHFRIC_DISABLE_NUMBA="1" if disable else "0")
    t = time.perf_counter()
    proc = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env,
                          capture_output=True, text=True, check=True)
    res = json.loads(proc.stdout.strip().splitlines()[-1])
    res["process"] = time.perf_counter() - t
    return res


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    jit = measure(False, args.repeat)
    ref = measure(True, args.repeat)
    print(f"cap model, {jit['elements']} elements, median of {args.repeat}")
    print(f"{'case':<10}{'numba [s]':>12}{'numpy [s]':>12}{'speed-up':>10}")
    for key in ("contact", "assemble"):
        print(f"{key:<10}{jit[key]:>12.4f}{ref[key]:>12.4f}{ref[key] / jit[key]:>10.1f}")
    print(f"{'process':<10}{jit['process']:>12.2f}{ref['process']:>12.2f}")


if __name__ == "__main__":
    main()
