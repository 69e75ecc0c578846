"""Compare the pure-Python and numba enumeration kernels on the hot
instances: exponential-style transformation enumerations over the
truncated simplicial models.

Run from the repository root:

    python3 benchmarks/bench_backends.py

The numba kernel is warmed once before timing so JIT compilation is not
billed to the first measurement.
"""

import time

from toposcheck import backend
from toposcheck import shapes as sh
from toposcheck import topos_ops as ops
from toposcheck.modelzoo import builtin_model


def instances():
    sset2 = builtin_model("sset2")
    sset3 = builtin_model("sset3")
    i2, i3 = sset2.interval, sset3.interval
    yield ("sset2  Nat(Delta2, I)", sh.simplex(i2, 2).domain, i2.presheaf,
           None)
    yield ("sset2  Nat(Delta2 x I, I)",
           ops.product(sh.simplex(i2, 2).domain, i2.presheaf).presheaf,
           i2.presheaf, None)
    yield ("sset3  Nat(Delta2, I)", sh.simplex(i3, 2).domain, i3.presheaf,
           None)
    yield ("sset3  Nat(Delta3, I)", sh.simplex(i3, 3).domain, i3.presheaf,
           20_000_000)
    yield ("sset3  Nat(horn x I, I)",
           ops.product(sh.horn(i3).presheaf, i3.presheaf).presheaf,
           i3.presheaf, 20_000_000)


def bench(problem, name, max_nodes, repeats=3):
    best = float("inf")
    n_sols = 0
    for _ in range(repeats):
        t0 = time.perf_counter()
        sols = backend.solve(problem, max_nodes=max_nodes, backend=name)
        best = min(best, time.perf_counter() - t0)
        n_sols = len(sols)
    return best, n_sols


def main():
    rows = []
    for label, F, G, max_nodes in instances():
        problem = backend.build_problem(F, G)
        if backend.HAS_NUMBA:
            backend.solve(problem, max_nodes=max_nodes,
                          backend="numba")  # JIT warmup
        t_py, n = bench(problem, "python", max_nodes)
        if backend.HAS_NUMBA:
            t_nb, n_nb = bench(problem, "numba", max_nodes)
            assert n == n_nb, "backends disagree on %s" % label
            rows.append((label, n, t_py, t_nb, t_py / t_nb))
        else:
            rows.append((label, n, t_py, None, None))

    print("%-28s %10s %12s %12s %9s" % ("instance", "solutions",
                                        "python [s]", "numba [s]",
                                        "speedup"))
    for label, n, t_py, t_nb, ratio in rows:
        if t_nb is None:
            print("%-28s %10d %12.4f %12s %9s" % (label, n, t_py, "-",
                                                  "-"))
        else:
            print("%-28s %10d %12.4f %12.4f %8.1fx" % (label, n, t_py,
                                                       t_nb, ratio))
    if not backend.HAS_NUMBA:
        print("(numba not importable: python kernel only)")


if __name__ == "__main__":
    main()
