import os
import subprocess
import sys

import numpy as np
import pytest

from roughwall import _fallback
from roughwall._core import BACKEND
from roughwall.geometry import TWO_PI, DomainSpec, RoughProfile, build_rough_mesh
from roughwall.fem import apply_bc, assemble

compiled = pytest.importorskip("roughwall._kernels")


@pytest.fixture(scope="module")
def system():
    mesh = build_rough_mesh(DomainSpec(TWO_PI, 0.2, 1.0, RoughProfile.default()), 16, 12)
    bc = apply_bc(assemble(mesh, 1.0), dirichlet=[("GammaEps", 0.0), ("Gamma1", 0.0)],
                  periodic=True)
    return mesh, bc


def test_compiled_backend_selected():
    assert BACKEND == "cython"


def test_stiffness_kernels_agree(system):
    mesh, _ = system
    t = np.ascontiguousarray(mesh.triangles, dtype=np.int64)
    ka, aa = compiled.p1_stiffness(mesh.vertices, t)
    kb, ab = _fallback.p1_stiffness(mesh.vertices, t)
    assert np.allclose(ka, kb, rtol=1e-13, atol=1e-13) and np.allclose(aa, ab, rtol=1e-14)


def test_matvec_and_pcg_agree(system):
    _, bc = system
    A = bc.A
    x = np.random.default_rng(0).standard_normal(A.n)
    args = (A.row_offsets, A.col_indices, A.values)
    assert np.allclose(compiled.csr_matvec(*args, x), _fallback.csr_matvec(*args, x),
                       rtol=1e-13, atol=1e-13)
    xa, xb = np.zeros(A.n), np.zeros(A.n)
    sa = compiled.pcg(*args, bc.b, xa, 1e-12, 10000)
    sb = _fallback.pcg(*args, bc.b, xb, 1e-12, 10000)
    assert sa[0] == sb[0] == 0
    assert abs(sa[1] - sb[1]) <= 1
    assert np.allclose(xa, xb, rtol=1e-9, atol=1e-12)


def test_pure_env_forces_fallback():
    env = dict(os.environ, ROUGHWALL_PURE="1")
    out = subprocess.run([sys.executable, "-c",
                          "import roughwall; print(roughwall.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
