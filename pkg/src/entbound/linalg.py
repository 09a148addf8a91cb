"""Dense complex linear algebra for bipartite operators.

Composite index convention: |a>_A |b>_B maps to row a*d_B + b (row-major).
All logarithms elsewhere in the package are base 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDimsError, InvalidStateError, NumericError

HERMITICITY_ATOL = 1e-12
RANK_TOL = 1e-9


def _as_complex(mat) -> np.ndarray:
    arr = np.asarray(mat, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidDimsError(f"expected a square matrix, got shape {arr.shape}")
    return arr


def hermitize(mat: np.ndarray) -> np.ndarray:
    """Return (m + m†)/2 without validating how asymmetric m was."""
    return 0.5 * (mat + mat.conj().T)


class HermitianMatrix:
    """Square complex matrix certified Hermitian at construction.

    Entries with |m - m†| above 1e-12 (per entry) are rejected; smaller
    asymmetry is removed by symmetrization so it cannot drift through
    downstream arithmetic.
    """

    __slots__ = ("_mat",)

    def __init__(self, mat):
        arr = _as_complex(mat)
        asym = float(np.max(np.abs(arr - arr.conj().T))) if arr.size else 0.0
        if asym > HERMITICITY_ATOL:
            raise InvalidStateError(
                f"matrix is not Hermitian: max |m - m†| = {asym:.3e} > {HERMITICITY_ATOL:.0e}"
            )
        sym = hermitize(arr)
        sym.setflags(write=False)
        self._mat = sym

    @property
    def mat(self) -> np.ndarray:
        return self._mat

    @property
    def dim(self) -> int:
        return self._mat.shape[0]

    def __repr__(self) -> str:
        return f"HermitianMatrix(dim={self.dim})"


@dataclass(frozen=True)
class BipartiteDims:
    d_a: int
    d_b: int

    def __post_init__(self):
        if self.d_a < 1 or self.d_b < 1:
            raise InvalidDimsError(f"subsystem dims must be >= 1, got {(self.d_a, self.d_b)}")

    @property
    def total(self) -> int:
        return self.d_a * self.d_b


TRACE_ATOL = 1e-8
PSD_ATOL = 1e-9


@dataclass(frozen=True)
class BipartiteState:
    """Validated density operator on A⊗B."""

    rho: HermitianMatrix
    dims: BipartiteDims

    def __post_init__(self):
        if self.rho.dim != self.dims.total:
            raise InvalidDimsError(
                f"state dim {self.rho.dim} != d_A*d_B = {self.dims.total}"
            )
        tr = float(np.real(np.trace(self.rho.mat)))
        if abs(tr - 1.0) > TRACE_ATOL:
            raise InvalidStateError(f"trace(rho) = {tr!r}, off by {abs(tr - 1.0):.3e} > {TRACE_ATOL:.0e}")
        lmin = float(np.linalg.eigvalsh(self.rho.mat)[0])
        if lmin < -PSD_ATOL:
            raise InvalidStateError(f"rho is not PSD: min eigenvalue = {lmin:.3e} < -{PSD_ATOL:.0e}")

    @property
    def mat(self) -> np.ndarray:
        return self.rho.mat

    @property
    def d_a(self) -> int:
        return self.dims.d_a

    @property
    def d_b(self) -> int:
        return self.dims.d_b


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted descending with matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)


def make_state(mat, d_a: int, d_b: int) -> BipartiteState:
    """Wrap a raw array as a validated BipartiteState."""
    return BipartiteState(HermitianMatrix(mat), BipartiteDims(d_a, d_b))


def kron(a: HermitianMatrix, b: HermitianMatrix) -> HermitianMatrix:
    """Kronecker product; entry ((i*db+k),(j*db+l)) = a[i,j]*b[k,l]."""
    return HermitianMatrix(np.kron(a.mat, b.mat))


def ptranspose_arr(mat: np.ndarray, d_a: int, d_b: int) -> np.ndarray:
    """Partial transpose over the B factor of a raw (d_a*d_b)-dim array."""
    n = d_a * d_b
    if mat.shape != (n, n):
        raise InvalidDimsError(f"matrix shape {mat.shape} does not match dims {(d_a, d_b)}")
    return (
        mat.reshape(d_a, d_b, d_a, d_b)
        .transpose(0, 3, 2, 1)
        .reshape(n, n)
    )


def partial_transpose(m: HermitianMatrix, dims: BipartiteDims) -> HermitianMatrix:
    """Transpose the B indices: output[(a,b),(c,d)] = m[(a,d),(c,b)]."""
    if m.dim != dims.total:
        raise InvalidDimsError(f"matrix dim {m.dim} != d_A*d_B = {dims.total}")
    return HermitianMatrix(ptranspose_arr(m.mat, dims.d_a, dims.d_b))


def eigh_desc(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian eigendecomposition with eigenvalues sorted descending."""
    try:
        vals, vecs = np.linalg.eigh(mat)
    except np.linalg.LinAlgError as exc:
        res = float(np.linalg.norm(mat - mat.conj().T))
        raise NumericError(f"eigendecomposition failed (asymmetry residual {res:.3e}): {exc}") from exc
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]


def hermitian_eig(m: HermitianMatrix) -> Spectrum:
    vals, vecs = eigh_desc(m.mat)
    return Spectrum(eigenvalues=vals, eigenvectors=vecs)


def trace_norm_arr(mat: np.ndarray) -> float:
    return float(np.sum(np.abs(np.linalg.eigvalsh(mat))))


def trace_norm(m: HermitianMatrix) -> float:
    """Sum of absolute eigenvalues."""
    return trace_norm_arr(m.mat)


def op_norm_arr(mat: np.ndarray) -> float:
    vals = np.linalg.eigvalsh(mat)
    return float(np.max(np.abs(vals)))


def op_norm(m: HermitianMatrix) -> float:
    """Largest absolute eigenvalue."""
    return op_norm_arr(m.mat)


def support_projector(rho: BipartiteState, rank_tol: float = RANK_TOL) -> HermitianMatrix:
    """Projector onto eigenvectors with eigenvalue > rank_tol * largest."""
    if rank_tol <= 0:
        raise InvalidStateError(f"rank_tol must be positive, got {rank_tol}")
    vals, vecs = eigh_desc(rho.mat)
    cutoff = rank_tol * max(float(vals[0]), 0.0)
    keep = vecs[:, vals > cutoff]
    return HermitianMatrix(keep @ keep.conj().T)


def negative_projector(m: HermitianMatrix) -> HermitianMatrix:
    """Projector onto eigenvectors with eigenvalue < -rank_tol * max|eig|; zero for PSD input."""
    vals, vecs = eigh_desc(m.mat)
    cutoff = RANK_TOL * float(np.max(np.abs(vals))) if vals.size else 0.0
    keep = vecs[:, vals < -cutoff]
    if keep.shape[1] == 0:
        return HermitianMatrix(np.zeros_like(m.mat))
    return HermitianMatrix(keep @ keep.conj().T)


def real_embedding(m: HermitianMatrix) -> np.ndarray:
    """Real symmetric [[Re m, -Im m],[Im m, Re m]]; doubles each eigenvalue's multiplicity."""
    re, im = m.mat.real, m.mat.imag
    return np.block([[re, -im], [im, re]])
