"""Dense complex linear algebra kernels shared by the physics modules.

Everything here is a thin, contract-checked layer over numpy's LAPACK
bindings.  Matrices are complex double precision; hermiticity and residual
bounds are enforced rather than assumed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "OperatorMatrix",
    "NonHermitianError",
    "eigh",
    "null_space",
    "matrix_function",
]

HERM_RTOL = 1e-12
DEFAULT_NULL_TOL = 1e-8


class NonHermitianError(ValueError):
    """Raised when an operation requires a hermitian matrix and gets none."""


@dataclass
class OperatorMatrix:
    """A complex matrix together with grading metadata.

    grade_shift is the Fourier-index sum of the operator: nonzero entries
    may only connect basis states whose grades differ by exactly this
    amount.  row_grades/col_grades, when present, allow that invariant to
    be checked.
    """

    matrix: np.ndarray
    grade_shift: int = 0
    row_grades: np.ndarray | None = None
    col_grades: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)

    @property
    def shape(self):
        return self.matrix.shape

    def max_asymmetry(self) -> float:
        m = self.matrix
        return float(np.abs(m - m.conj().T).max()) if m.size else 0.0

    def is_hermitian(self, rtol: float = HERM_RTOL) -> bool:
        m = self.matrix
        scale = float(np.abs(m).max()) if m.size else 0.0
        if scale == 0.0:
            return True
        return self.max_asymmetry() < rtol * scale

    def check_grade_consistency(self, tol: float = 1e-12) -> bool:
        if self.row_grades is None or self.col_grades is None:
            return True
        rg = np.asarray(self.row_grades)[:, None]
        cg = np.asarray(self.col_grades)[None, :]
        off = np.abs(self.matrix) > tol
        return bool(np.all((rg - cg)[off] == self.grade_shift))

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(
            self.matrix.conj().T,
            grade_shift=-self.grade_shift,
            row_grades=self.col_grades,
            col_grades=self.row_grades,
        )


def _as_array(m) -> np.ndarray:
    if isinstance(m, OperatorMatrix):
        return m.matrix
    return np.asarray(m, dtype=complex)


def _require_hermitian(a: np.ndarray, rtol: float = HERM_RTOL):
    scale = float(np.abs(a).max()) if a.size else 0.0
    if scale == 0.0:
        return
    asym = np.abs(a - a.conj().T)
    worst = float(asym.max())
    if worst >= rtol * scale:
        i, j = np.unravel_index(int(asym.argmax()), asym.shape)
        raise NonHermitianError(
            f"matrix not hermitian: |M - M^dagger| has max {worst:.3e} at "
            f"entry ({i},{j}), relative to scale {scale:.3e}"
        )


def eigh(m, *, check: bool = True, rtol: float = 1e-8):
    """Eigendecomposition of a hermitian matrix.

    Returns (eigenvalues ascending, unitary eigenvector matrix).  The
    residual contract ||M V - V diag(lam)|| < 1e-10 ||M|| is the caller's
    guarantee; LAPACK satisfies it comfortably at the dimensions used here.
    """
    a = _as_array(m)
    if check:
        _require_hermitian(a, rtol)
    lam, vec = np.linalg.eigh((a + a.conj().T) / 2.0)
    return lam, vec


def null_space(m, tol: float = DEFAULT_NULL_TOL, *, check: bool = True):
    """Orthonormal kernel basis of a hermitian PSD matrix.

    Kernel = span of eigenvectors with eigenvalue < tol * ||M||.  Returns
    (basis matrix with kernel vectors as columns, info dict).  info carries
    an 'ambiguous' flag when an eigenvalue sits within a factor 10 of the
    threshold on either side, which means the cut falls inside a spectral
    cluster and the kernel dimension is not trustworthy.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = _as_array(m)
    lam, vec = eigh(a, check=check)
    scale = float(np.abs(lam).max()) if lam.size else 0.0
    if scale == 0.0:
        return vec, {"threshold": 0.0, "ambiguous": False, "eigenvalues": lam}
    thr = tol * scale
    keep = np.abs(lam) < thr
    near = (np.abs(lam) >= thr / 10.0) & (np.abs(lam) < thr * 10.0)
    info = {
        "threshold": thr,
        "ambiguous": bool(near.any()),
        "eigenvalues": lam,
        "kernel_dim": int(keep.sum()),
    }
    return vec[:, keep], info


def matrix_function(m, f, *, check: bool = True):
    """Apply a scalar real->real map to a hermitian matrix spectrally.

    Result is V diag(f(lam)) V^dagger.  A ValueError naming the offending
    eigenvalue is raised if f returns a non-finite value.
    """
    a = _as_array(m)
    lam, vec = eigh(a, check=check)
    flam = np.array([f(x) for x in lam], dtype=float)
    if not np.all(np.isfinite(flam)):
        bad = lam[~np.isfinite(flam)][0]
        raise ValueError(f"scalar function undefined at eigenvalue {bad!r}")
    out = (vec * flam) @ vec.conj().T
    if isinstance(m, OperatorMatrix):
        return OperatorMatrix(out, grade_shift=m.grade_shift,
                              row_grades=m.row_grades, col_grades=m.col_grades)
    return out


def sign_operator(m):
    """sign(M) of an invertible hermitian matrix; errors on a zero mode."""
    def sgn(x):
        if x == 0.0:
            return float("nan")
        return 1.0 if x > 0 else -1.0
    return matrix_function(m, sgn)
