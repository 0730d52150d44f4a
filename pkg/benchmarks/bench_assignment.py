"""Benchmark the compiled assignment solver against the pure-Python fallback.

Run:  python3 benchmarks/bench_assignment.py [--sizes 256,512,1024] [--repeats 3]

Both backends implement the same shortest-augmenting-path algorithm and
return identical matchings; this script reports wall time per solve and the
speedup, plus a cross-check that the optimal costs agree bit for bit.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from widegauss.ot.lap import available_backends, solve_assignment


def _solve_cost(cost: np.ndarray, backend: str) -> tuple[float, float]:
    started = time.perf_counter()
    cols = solve_assignment(cost, backend=backend)
    elapsed = time.perf_counter() - started
    value = float(np.add.reduce(cost[np.arange(cost.shape[0]), cols]))
    return value, elapsed


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="128,256,512,1024,2048")
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    backends = available_backends()
    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(args.seed)

    print(f"backends available: {', '.join(backends)}")
    header = f"{'N':>6}" + "".join(f"{b:>14}" for b in backends)
    if set(backends) == {"compiled", "python"}:
        header += f"{'speedup':>10}"
    print(header)

    for n in sizes:
        x = rng.standard_normal((n, 3))
        y = rng.standard_normal((n, 3))
        cost = np.linalg.norm(x[:, None, :] - y[None, :, :], axis=2)
        times = {}
        values = {}
        for backend in backends:
            runs = [_solve_cost(cost, backend) for _ in range(args.repeats)]
            values[backend], times[backend] = min(runs, key=lambda pair: pair[1])
        line = f"{n:>6}" + "".join(f"{times[b] * 1e3:>12.1f}ms" for b in backends)
        if set(backends) == {"compiled", "python"}:
            if values["compiled"] != values["python"]:
                raise AssertionError(
                    f"backend disagreement at N={n}: {values}"
                )
            line += f"{times['python'] / times['compiled']:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
