"""Compiled kernels against the numpy fallback on the exact-solve hot path.

    python benchmarks/bench_kernels.py [--ppp 32] [--eps 0.05] [--repeat 3]

Times element stiffness, one CSR product and a full PCG solve for the rough
channel at one ε, with each backend.
"""
import argparse
import time

import numpy as np

from roughwall import _fallback
from roughwall.fem import apply_bc, assemble
from roughwall.geometry import TWO_PI, DomainSpec, RoughProfile, build_rough_mesh
from roughwall.harness import Resolution

try:
    from roughwall import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ppp", type=int, default=32)
    ap.add_argument("--eps", type=float, default=0.05)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    spec = DomainSpec(TWO_PI, args.eps, 1.0, RoughProfile.default())
    mesh = build_rough_mesh(spec, *Resolution(args.ppp).mesh_args(spec))
    bc = apply_bc(assemble(mesh, 1.0), dirichlet=[("GammaEps", 0.0), ("Gamma1", 0.0)],
                  periodic=True)
    A = bc.A
    csr = (A.row_offsets, A.col_indices, A.values)
    tri = np.ascontiguousarray(mesh.triangles, dtype=np.int64)
    x = np.random.default_rng(0).standard_normal(A.n)
    print(f"eps={args.eps} ppp={args.ppp}: {mesh.n_vertices} vertices, "
          f"{len(tri)} triangles, {A.n} dofs, nnz={A.nnz}")

    backends = [("python", _fallback)] + ([("cython", _kernels)] if _kernels else [])
    times = {}
    for name, k in backends:
        times[name] = {
            "stiffness": best_of(lambda: k.p1_stiffness(mesh.vertices, tri), args.repeat),
            "matvec": best_of(lambda: k.csr_matvec(*csr, x), args.repeat),
            "pcg": best_of(lambda: k.pcg(*csr, bc.b, np.zeros(A.n), 1e-10, 20 * A.n),
                           args.repeat),
        }
    print(f"{'kernel':<10}" + "".join(f"{n:>12}" for n, _ in backends)
          + ("     speedup" if _kernels else ""))
    for kern in ("stiffness", "matvec", "pcg"):
        row = f"{kern:<10}" + "".join(f"{times[n][kern] * 1e3:>10.2f}ms" for n, _ in backends)
        if _kernels:
            row += f"{times['python'][kern] / times['cython'][kern]:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
