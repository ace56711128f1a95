"""Compare the compiled and numpy kernel backends.

Times propagation-matrix assembly and the PAT loss/gradient on the three
named arrays, plus one full 150-iteration solve per array. Checks that both
backends agree before timing.

    python benchmarks/bench_kernels.py [--repeat 20]
"""

import argparse
import time

import numpy as np

from phaseholo import _backend
from phaseholo.field import AIR
from phaseholo.geometry import NAMED_ARRAYS, default_roi, generate_random_geometry, named_array


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def solve(mod, G, phi, targets, iters=150):
    # Adam inlined so the loop cost is the kernel plus a few vector ops
    m = np.zeros_like(phi)
    v = np.zeros_like(phi)
    for t in range(1, iters + 1):
        _, g, _, _ = mod.pat_loss_grad(G, phi, targets, 1e-12)
        m = 0.9 * m + 0.1 * g
        v = 0.999 * v + 0.001 * g * g
        phi = phi - 0.1 * (m / (1 - 0.9 ** t)) / (np.sqrt(v / (1 - 0.999 ** t)) + 1e-8)
    return phi


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--points", type=int, default=32)
    args = ap.parse_args()

    try:
        cy = _backend.get("cython")
    except ImportError:
        raise SystemExit("compiled kernels are not built; run `pip install --no-build-isolation -e .`")
    np_mod = _backend.get("numpy")
    rng = np.random.default_rng(0)

    print(f"{'array':<16} {'M':>5} {'kernel':<20} {'cython ms':>10} {'numpy ms':>10} {'speedup':>8}")
    for label in NAMED_ARRAYS:
        layout = named_array(label)
        geo = generate_random_geometry(rng, default_roi(layout), args.points, 1000.0)
        inputs = (layout.positions, layout.normals, layout.radii, layout.p_ref, geo.positions, AIR.k)
        G = cy.propagation_matrix(*inputs)
        np.testing.assert_allclose(G, np_mod.propagation_matrix(*inputs), rtol=1e-12)
        phi = rng.uniform(0, 2 * np.pi, len(layout))
        a, b = cy.pat_loss_grad(G, phi, geo.amplitudes), np_mod.pat_loss_grad(G, phi, geo.amplitudes)
        np.testing.assert_allclose(a[1], b[1], rtol=1e-9, atol=1e-9 * np.abs(b[1]).max())

        cases = [
            ("propagation_matrix", lambda m: m.propagation_matrix(*inputs), args.repeat),
            ("pat_loss_grad", lambda m: m.pat_loss_grad(G, phi, geo.amplitudes), args.repeat * 10),
            ("150-iteration solve", lambda m: solve(m, G, phi, geo.amplitudes), max(1, args.repeat // 5)),
        ]
        for name, fn, rep in cases:
            tc = best_of(lambda: fn(cy), rep) * 1e3
            tn = best_of(lambda: fn(np_mod), rep) * 1e3
            print(f"{label:<16} {len(layout):>5} {name:<20} {tc:>10.3f} {tn:>10.3f} {tn / tc:>7.1f}x")


if __name__ == "__main__":
    main()
