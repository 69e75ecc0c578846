"""Flat-array kernel for enumerating natural transformations.

This is the one hot loop in the package: every exponential object, locality
check and unique-extension search bottoms out in "enumerate all natural
maps F -> G, possibly with some components pinned".  The instance is
flattened to int64 arrays (element tables, contravariant action tables in
CSR form, a constraint graph) and solved by iterative backtracking with
forward propagation of naturality.

Two interchangeable implementations are provided: a pure-Python reference
and a numba-compiled port of the same algorithm, selected by the
TOPOSCHECK_BACKEND environment variable ("python" or "numba"; default is
numba when importable).  Both emit solutions in ascending lexicographic
order of the assignment vector: decisions always pick the lowest
unassigned element and try values in ascending order, and propagation is
a deterministic function of the partial assignment.
"""

import contextlib
import os

import numpy as np

from .report import BudgetExceededError

try:
    from numba import njit
    HAS_NUMBA = True
except Exception:  # pragma: no cover - environment without numba
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]

        def wrap(f):
            return f
        return wrap

# defaults for the CLI budget flags
DEFAULT_MAX_NODES = 10 ** 6
DEFAULT_MAX_ELEMENTS = 10 ** 5

# mutable global budgets (the CLI overrides these from its flags)
MAX_NODES = DEFAULT_MAX_NODES
MAX_ELEMENTS = DEFAULT_MAX_ELEMENTS


@contextlib.contextmanager
def budget(max_nodes=None, max_elements=None):
    """Temporarily override the global enumeration budgets."""
    global MAX_NODES, MAX_ELEMENTS
    saved = (MAX_NODES, MAX_ELEMENTS)
    if max_nodes is not None:
        MAX_NODES = int(max_nodes)
    if max_elements is not None:
        MAX_ELEMENTS = int(max_elements)
    try:
        yield
    finally:
        MAX_NODES, MAX_ELEMENTS = saved

OK = 0
BUDGET = 1

_BACKEND = None


def active_backend():
    """Currently selected kernel: "python" or "numba"."""
    global _BACKEND
    if _BACKEND is None:
        name = os.environ.get("TOPOSCHECK_BACKEND", "").strip().lower()
        if name in ("python", "numba"):
            if name == "numba" and not HAS_NUMBA:
                name = "python"
            _BACKEND = name
        else:
            _BACKEND = "numba" if HAS_NUMBA else "python"
    return _BACKEND


def set_backend(name):
    global _BACKEND
    if name not in ("python", "numba"):
        raise ValueError("backend must be 'python' or 'numba'")
    if name == "numba" and not HAS_NUMBA:
        raise ValueError("numba is not importable in this environment")
    _BACKEND = name


class NatProblem:
    """Flattened "enumerate Nat(F, G)" instance.

    nf:        number of F-elements across all objects
    obj_of:    object index of each F-element
    g_sizes:   |G(c)| per object
    pre:       initial assignment per F-element (-1 = free)
    cons_*:    CSR constraint lists: assigning element e forces element
               cons_elt[k] (for k in cons_ptr[e]:cons_ptr[e+1]) to the
               value gact of morphism cons_mor[k] applied to e's value
    gact_*:    CSR value-remap tables per morphism (G's actions)
    """

    __slots__ = ("nf", "obj_of", "g_sizes", "pre",
                 "cons_ptr", "cons_elt", "cons_mor",
                 "gact_ptr", "gact_val")

    def __init__(self, nf, obj_of, g_sizes, pre,
                 cons_ptr, cons_elt, cons_mor, gact_ptr, gact_val):
        self.nf = nf
        self.obj_of = obj_of
        self.g_sizes = g_sizes
        self.pre = pre
        self.cons_ptr = cons_ptr
        self.cons_elt = cons_elt
        self.cons_mor = cons_mor
        self.gact_ptr = gact_ptr
        self.gact_val = gact_val


def build_problem(F, G, pre_assign=None):
    """Flatten the instance "all natural transformations F -> G".

    F and G are Presheaf objects over the same base.  pre_assign, if given,
    is a per-object list of arrays with -1 for free components.
    """
    C = F.base
    n_obj = C.n_obj
    f_sizes = [F.sizes[c] for c in range(n_obj)]
    f_off = np.zeros(n_obj + 1, dtype=np.int64)
    for c in range(n_obj):
        f_off[c + 1] = f_off[c] + f_sizes[c]
    nf = int(f_off[n_obj])

    obj_of = np.empty(nf, dtype=np.int64)
    for c in range(n_obj):
        obj_of[f_off[c]:f_off[c + 1]] = c

    g_sizes = np.asarray([G.sizes[c] for c in range(n_obj)], dtype=np.int64)

    pre = np.full(nf, -1, dtype=np.int64)
    if pre_assign is not None:
        for c in range(n_obj):
            arr = pre_assign[c]
            if arr is None:
                continue
            for x, v in enumerate(arr):
                if v >= 0:
                    pre[f_off[c] + x] = v

    # constraints: one per (non-identity morphism m: c -> d, x in F(d))
    by_src = [[] for _ in range(nf)]
    idset = set(int(i) for i in C.identity)
    for m in range(C.n_mor):
        if m in idset:
            continue
        c = int(C.mor_src[m])
        d = int(C.mor_tgt[m])
        amap = F.action[m]
        for x in range(f_sizes[d]):
            e = int(f_off[d]) + x
            e2 = int(f_off[c]) + int(amap[x])
            by_src[e].append((e2, m))

    cons_ptr = np.zeros(nf + 1, dtype=np.int64)
    total = 0
    for e in range(nf):
        total += len(by_src[e])
        cons_ptr[e + 1] = total
    cons_elt = np.empty(total, dtype=np.int64)
    cons_mor = np.empty(total, dtype=np.int64)
    k = 0
    for e in range(nf):
        for e2, m in by_src[e]:
            cons_elt[k] = e2
            cons_mor[k] = m
            k += 1

    gact_ptr = np.zeros(C.n_mor + 1, dtype=np.int64)
    for m in range(C.n_mor):
        gact_ptr[m + 1] = gact_ptr[m] + G.sizes[int(C.mor_tgt[m])]
    gact_val = np.empty(int(gact_ptr[C.n_mor]), dtype=np.int64)
    for m in range(C.n_mor):
        a = G.action[m]
        gact_val[gact_ptr[m]:gact_ptr[m + 1]] = a

    return NatProblem(nf, obj_of, g_sizes, pre,
                      cons_ptr, cons_elt, cons_mor, gact_ptr, gact_val)


def _solve_py(nf, pre, cons_ptr, cons_elt, cons_mor,
              gact_ptr, gact_val, obj_of, g_sizes, max_nodes):
    """Pure-Python reference solver.  Returns (status, list of vectors)."""
    if nf == 0:
        return OK, [np.empty(0, dtype=np.int64)]
    assign = pre.copy()
    trail = np.empty(nf, dtype=np.int64)
    queue = np.empty(nf, dtype=np.int64)

    def propagate(e, t_len):
        """Close the forced consequences of assign[e]; returns
        (ok, new_t_len).  New assignments are recorded on the trail."""
        qh, qt = 0, 0
        queue[qt] = e
        qt += 1
        while qh < qt:
            a = int(queue[qh])
            qh += 1
            va = assign[a]
            for k in range(cons_ptr[a], cons_ptr[a + 1]):
                b = int(cons_elt[k])
                m = int(cons_mor[k])
                vb = gact_val[gact_ptr[m] + va]
                if assign[b] < 0:
                    assign[b] = vb
                    trail[t_len] = b
                    t_len += 1
                    queue[qt] = b
                    qt += 1
                elif assign[b] != vb:
                    return False, t_len
        return True, t_len

    t_len = 0
    for e in range(nf):
        if assign[e] >= 0:
            ok, t_len = propagate(e, t_len)
            if not ok:
                return OK, []

    sols = []
    dec_e, dec_v, dec_t = [], [], []
    nodes = 0
    scan = 0
    while True:
        e = scan
        while e < nf and assign[e] >= 0:
            e += 1
        if e < nf:
            dec_e.append(e)
            dec_v.append(-1)
            dec_t.append(t_len)
        else:
            sols.append(assign.copy())
        # advance the most recent decision (or finish)
        placed = False
        while dec_e:
            e0 = dec_e[-1]
            t0 = dec_t[-1]
            while t_len > t0:
                assign[trail[t_len - 1]] = -1
                t_len -= 1
            v = dec_v[-1] + 1
            sz = int(g_sizes[obj_of[e0]])
            while v < sz:
                nodes += 1
                if max_nodes and nodes > max_nodes:
                    return BUDGET, sols
                assign[e0] = v
                trail[t_len] = e0
                new_t = t_len + 1
                ok, new_t = propagate(e0, new_t)
                if ok:
                    dec_v[-1] = v
                    t_len = new_t
                    placed = True
                    break
                while new_t > t0:
                    assign[trail[new_t - 1]] = -1
                    new_t -= 1
                v += 1
            if placed:
                scan = e0 + 1
                break
            dec_e.pop()
            dec_v.pop()
            dec_t.pop()
        if not placed:
            return OK, sols


@njit(cache=True)
def _solve_nb(nf, pre, cons_ptr, cons_elt, cons_mor,
              gact_ptr, gact_val, obj_of, g_sizes, max_nodes):
    """numba port of _solve_py; same order of solutions.
    Returns (status, flat solution array, n_solutions)."""
    if nf == 0:
        return OK, np.empty(0, dtype=np.int64), 1
    assign = pre.copy()
    trail = np.empty(nf, dtype=np.int64)
    queue = np.empty(nf, dtype=np.int64)
    dec_e = np.empty(nf, dtype=np.int64)
    dec_v = np.empty(nf, dtype=np.int64)
    dec_t = np.empty(nf, dtype=np.int64)
    n_dec = 0

    cap = 64 * nf
    sols = np.empty(cap, dtype=np.int64)
    n_sol = 0

    t_len = 0
    # initial propagation
    for e in range(nf):
        if assign[e] >= 0:
            qh, qt = 0, 1
            queue[0] = e
            ok = True
            while qh < qt:
                a = queue[qh]
                qh += 1
                va = assign[a]
                for k in range(cons_ptr[a], cons_ptr[a + 1]):
                    b = cons_elt[k]
                    m = cons_mor[k]
                    vb = gact_val[gact_ptr[m] + va]
                    if assign[b] < 0:
                        assign[b] = vb
                        trail[t_len] = b
                        t_len += 1
                        queue[qt] = b
                        qt += 1
                    elif assign[b] != vb:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                return OK, sols[:0], 0

    nodes = 0
    scan = 0
    while True:
        e = scan
        while e < nf and assign[e] >= 0:
            e += 1
        if e < nf:
            dec_e[n_dec] = e
            dec_v[n_dec] = -1
            dec_t[n_dec] = t_len
            n_dec += 1
        else:
            if (n_sol + 1) * nf > cap:
                new_cap = cap * 2
                grown = np.empty(new_cap, dtype=np.int64)
                grown[:cap] = sols
                sols = grown
                cap = new_cap
            base = n_sol * nf
            for i in range(nf):
                sols[base + i] = assign[i]
            n_sol += 1
        placed = False
        while n_dec > 0:
            e0 = dec_e[n_dec - 1]
            t0 = dec_t[n_dec - 1]
            while t_len > t0:
                assign[trail[t_len - 1]] = -1
                t_len -= 1
            v = dec_v[n_dec - 1] + 1
            sz = g_sizes[obj_of[e0]]
            while v < sz:
                nodes += 1
                if max_nodes and nodes > max_nodes:
                    return BUDGET, sols[:n_sol * nf], n_sol
                assign[e0] = v
                trail[t_len] = e0
                new_t = t_len + 1
                qh, qt = 0, 1
                queue[0] = e0
                ok = True
                while qh < qt:
                    a = queue[qh]
                    qh += 1
                    va = assign[a]
                    for k in range(cons_ptr[a], cons_ptr[a + 1]):
                        b = cons_elt[k]
                        m = cons_mor[k]
                        vb = gact_val[gact_ptr[m] + va]
                        if assign[b] < 0:
                            assign[b] = vb
                            trail[new_t] = b
                            new_t += 1
                            queue[qt] = b
                            qt += 1
                        elif assign[b] != vb:
                            ok = False
                            break
                    if not ok:
                        break
                if ok:
                    dec_v[n_dec - 1] = v
                    t_len = new_t
                    placed = True
                    break
                while new_t > t0:
                    assign[trail[new_t - 1]] = -1
                    new_t -= 1
                v += 1
            if placed:
                scan = e0 + 1
                break
            n_dec -= 1
        if not placed:
            return OK, sols[:n_sol * nf], n_sol


def solve(problem, max_nodes=None, backend=None):
    """Run the selected kernel.  Returns an (n_solutions, nf) int64 array
    in ascending lexicographic order; raises BudgetExceededError when the
    node budget is exhausted."""
    if max_nodes is None:
        max_nodes = MAX_NODES
    if backend is None:
        backend = active_backend()
    if backend == "numba":
        status, flat, n = _solve_nb(
            problem.nf, problem.pre, problem.cons_ptr, problem.cons_elt,
            problem.cons_mor, problem.gact_ptr, problem.gact_val,
            problem.obj_of, problem.g_sizes, max_nodes)
        if status == BUDGET:
            raise BudgetExceededError(
                "natural-transformation enumeration exceeded %d nodes"
                % max_nodes)
        if problem.nf == 0:
            return np.empty((n, 0), dtype=np.int64)
        return flat.reshape(n, problem.nf).copy()
    status, sols = _solve_py(
        problem.nf, problem.pre, problem.cons_ptr, problem.cons_elt,
        problem.cons_mor, problem.gact_ptr, problem.gact_val,
        problem.obj_of, problem.g_sizes, max_nodes)
    if status == BUDGET:
        raise BudgetExceededError(
            "natural-transformation enumeration exceeded %d nodes" % max_nodes)
    if not sols:
        return np.empty((0, problem.nf), dtype=np.int64)
    return np.stack(sols)
