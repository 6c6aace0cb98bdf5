"""Algebra on symmetric traceless 3x3 order tensors.

A tensor Q is stored as five coordinates in a fixed orthonormal basis of the
space of symmetric traceless matrices. Symmetry and tracelessness then hold
by construction, and |Q|^2 is a plain sum of squared coefficients, which
keeps both linear constraints exact during gradient flow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FrameError

__all__ = [
    "BASIS",
    "QTensor",
    "EigenSystem",
    "OrderParams",
    "coeffs_to_matrices",
    "matrices_to_coeffs",
    "trace_invariants",
    "eigenvalues_desc",
    "rotate_coeffs",
    "uniaxial_coeffs",
    "make_biaxial",
    "invariants",
    "eigensystem",
    "order_params",
    "biaxiality",
    "in_physical_triangle",
    "norm_and_region",
]

LAMBDA_MIN = -1.0 / 3.0
LAMBDA_MAX = 2.0 / 3.0


def _build_basis() -> np.ndarray:
    x, y, z = np.eye(3)
    basis = np.empty((5, 3, 3))
    basis[0] = np.sqrt(1.5) * (np.outer(z, z) - np.eye(3) / 3.0)
    basis[1] = np.sqrt(0.5) * (np.outer(x, x) - np.outer(y, y))
    basis[2] = np.sqrt(0.5) * (np.outer(x, y) + np.outer(y, x))
    basis[3] = np.sqrt(0.5) * (np.outer(x, z) + np.outer(z, x))
    basis[4] = np.sqrt(0.5) * (np.outer(y, z) + np.outer(z, y))
    basis.setflags(write=False)
    return basis


#: Orthonormal basis of symmetric traceless 3x3 matrices under the Frobenius inner product.
BASIS = _build_basis()


def coeffs_to_matrices(coeffs) -> np.ndarray:
    """Map coefficient vectors of shape (..., 5) to matrices of shape (..., 3, 3)."""
    return np.einsum("...c,cij->...ij", np.asarray(coeffs, dtype=float), BASIS)


def matrices_to_coeffs(mats) -> np.ndarray:
    """Project matrices of shape (..., 3, 3) onto the basis, returning (..., 5).

    General input is projected onto its symmetric traceless part, so a tensor
    rebuilt from the result is traceless regardless of roundoff in the input.
    """
    return np.einsum("...ij,cij->...c", np.asarray(mats, dtype=float), BASIS)


def trace_invariants(coeffs) -> tuple[np.ndarray, np.ndarray]:
    """Return (tr Q^2, tr Q^3) for coefficient vectors of shape (..., 5)."""
    c = np.asarray(coeffs, dtype=float)
    tr2 = np.einsum("...c,...c->...", c, c)
    m = coeffs_to_matrices(c)
    tr3 = np.einsum("...ij,...jk,...ki->...", m, m, m)
    return tr2, tr3


def eigenvalues_desc(coeffs) -> np.ndarray:
    """Eigenvalues of the reconstructed tensors, sorted descending; shape (..., 3)."""
    return np.linalg.eigvalsh(coeffs_to_matrices(coeffs))[..., ::-1]


def rotate_coeffs(coeffs, rot) -> np.ndarray:
    """Conjugate coefficient vectors by a rotation matrix: Q -> R Q R^T."""
    rot = np.asarray(rot, dtype=float)
    mats = coeffs_to_matrices(coeffs)
    return matrices_to_coeffs(np.einsum("ip,...pq,jq->...ij", rot, mats, rot))


def uniaxial_coeffs(s, director) -> np.ndarray:
    """Coefficients of s * (n x n - I/3) for scalar or array-valued s."""
    n = np.asarray(director, dtype=float)
    if abs(n @ n - 1.0) > 1e-12:
        raise FrameError("director must be a unit vector")
    base = matrices_to_coeffs(np.outer(n, n) - np.eye(3) / 3.0)
    return np.asarray(s, dtype=float)[..., None] * base


@dataclass(frozen=True)
class QTensor:
    """Symmetric traceless order tensor held as five orthonormal-basis coefficients."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).reshape(5)
        if not np.all(np.isfinite(c)):
            raise ValueError("QTensor coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zero(cls) -> "QTensor":
        return cls(np.zeros(5))

    @classmethod
    def from_matrix(cls, mat) -> "QTensor":
        return cls(matrices_to_coeffs(mat))

    @property
    def matrix(self) -> np.ndarray:
        return coeffs_to_matrices(self.coeffs)

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.coeffs @ self.coeffs))


@dataclass(frozen=True)
class EigenSystem:
    """Descending eigenvalues and the matching orthonormal eigenvectors (as rows)."""

    lambdas: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class OrderParams:
    """Canonical scalar order parameters s = l1 - l3, r = l2 - l3 (so 0 <= r <= s)."""

    s: float
    r: float
    region: str


def make_biaxial(s: float, r: float, e1, e2) -> QTensor:
    """Build s*(e1 x e1 - I/3) + r*(e2 x e2 - I/3) from an orthonormal pair.

    r = 0 gives the uniaxial tensor with director e1. Raises FrameError when
    e1, e2 are not unit length and mutually orthogonal to within 1e-12.
    """
    e1 = np.asarray(e1, dtype=float)
    e2 = np.asarray(e2, dtype=float)
    if abs(e1 @ e1 - 1.0) > 1e-12 or abs(e2 @ e2 - 1.0) > 1e-12:
        raise FrameError("e1 and e2 must be unit vectors")
    if abs(e1 @ e2) > 1e-12:
        raise FrameError("e1 and e2 must be orthogonal")
    eye3 = np.eye(3) / 3.0
    mat = s * (np.outer(e1, e1) - eye3) + r * (np.outer(e2, e2) - eye3)
    return QTensor.from_matrix(mat)


def invariants(q: QTensor) -> tuple[float, float, float]:
    """Return (tr Q^2, tr Q^3, |Q|) with tr Q^2 = |Q|^2 exact by construction."""
    tr2, tr3 = trace_invariants(q.coeffs)
    return float(tr2), float(tr3), float(np.sqrt(tr2))


def eigensystem(q: QTensor) -> EigenSystem:
    """Full eigendecomposition, eigenvalues sorted descending.

    Degenerate eigenvalues receive an arbitrary orthonormal completion of the
    eigenspace; a fixed sign convention (largest-magnitude component positive)
    keeps the output deterministic for identical inputs.
    """
    lam, vec = np.linalg.eigh(q.matrix)
    lam = lam[::-1].copy()
    rows = vec[:, ::-1].T.copy()
    for i in range(3):
        j = int(np.argmax(np.abs(rows[i])))
        if rows[i, j] < 0.0:
            rows[i] = -rows[i]
    lam.setflags(write=False)
    rows.setflags(write=False)
    return EigenSystem(lambdas=lam, vectors=rows)


def order_params(q: QTensor) -> OrderParams:
    """Canonical (s, r) from descending eigenvalues; always lands in 0 <= r <= s."""
    lam = eigenvalues_desc(q.coeffs)
    s = max(float(lam[0] - lam[2]), 0.0)
    r = max(float(lam[1] - lam[2]), 0.0)
    _, region = norm_and_region(s, r)
    return OrderParams(s=s, r=r, region=region)


def biaxiality(q: QTensor) -> float:
    """Biaxiality parameter 1 - 6 (tr Q^3)^2 / (tr Q^2)^3.

    The exact value lies in [0, 1]: it vanishes for uniaxial tensors and
    equals one when the eigenvalues are (l, 0, -l). Floating-point roundoff
    may exceed the endpoints by a few ulps near them. Undefined at Q = 0.
    """
    tr2, tr3 = trace_invariants(q.coeffs)
    if tr2 == 0.0:
        raise ValueError("biaxiality is undefined at Q = 0")
    return float(1.0 - 6.0 * tr3 * tr3 / tr2**3)


def in_physical_triangle(q: QTensor, tol: float = 0.0) -> bool:
    """True when every eigenvalue lies in [-1/3 - tol, 2/3 + tol].

    This is the eigenvalue form of membership of (s, r) in the physical
    triangle, up to the six-fold eigenvalue-relabeling symmetry.
    """
    if tol < 0.0:
        raise ValueError("tol must be nonnegative")
    lam = eigenvalues_desc(q.coeffs)
    return bool(lam[0] <= LAMBDA_MAX + tol and lam[2] >= LAMBDA_MIN - tol)


def norm_and_region(s: float, r: float) -> tuple[float, str]:
    """Return |Q|^2 = (2/3)(s^2 + r^2 - s r) and the (s, r)-plane region label.

    Regions: R1 = {s, r >= 0}, R2 = {s <= 0, r >= s}, R3 = {r <= 0, r <= s};
    boundary points go to the lowest-index matching region. Labels are only
    meaningful for externally labeled (s, r) pairs, since sorting eigenvalues
    always produces a pair in R1.
    """
    norm2 = (2.0 / 3.0) * (s * s + r * r - s * r)
    if s >= 0.0 and r >= 0.0:
        region = "R1"
    elif s <= 0.0 and r >= s:
        region = "R2"
    elif r <= 0.0 and r <= s:
        region = "R3"
    else:  # unreachable: the three regions cover the plane
        raise AssertionError("region partition failed to match")
    return norm2, region
