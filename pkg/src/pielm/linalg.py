"""Dense minimum-norm least squares and a block-sparse assembly/solve path.

The dense solvers wrap LAPACK (via scipy.linalg.lstsq); the contract is
the minimum-norm least-squares solution with a relative singular-value
cutoff, not a particular factorization.  The block-sparse path exists so
cell-decomposed systems with thousands of cells never materialize a
dense matrix unless asked to.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from ._accel import NUMBA_ENABLED, maybe_njit

SOLVE_METHODS = ("svd", "qr", "ridge")
BLOCK_METHODS = ("densify_svd", "iterative_lsqr")


@dataclass(frozen=True)
class LeastSquaresSolution:
    coefficients: np.ndarray
    residual_norm: float
    effective_rank: int
    method_used: str
    converged: bool = True
    iterations: int = 0


def _check_matrix(a, name="matrix"):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def default_cutoff(rows: int, cols: int) -> float:
    """Relative singular-value cutoff: max(rows, cols) * machine epsilon."""
    return max(rows, cols) * np.finfo(np.float64).eps


def solve_least_squares(H, K, method: str = "svd", tolerance: float | None = None) -> LeastSquaresSolution:
    """Minimum-norm least-squares solve of H c = K.

    method "svd": truncated-SVD pseudo-inverse; singular values below
    tolerance * sigma_max are dropped (default cutoff max(rows, cols) * eps).
    method "qr": rank-revealing QR (LAPACK gelsy) with the same cutoff.
    method "ridge": minimizes ||Hc - K||^2 + lambda ||c||^2 with
    lambda = tolerance, via the augmented system [H; sqrt(lambda) I].

    An all-zero H is not an error: the minimum-norm solution is c = 0 with
    residual ||K||.
    """
    H = _check_matrix(H, "H")
    K = np.asarray(K, dtype=np.float64).ravel()
    rows, cols = H.shape
    if K.size != rows:
        raise ValueError(f"rhs length {K.size} does not match {rows} rows")
    if not np.all(np.isfinite(K)):
        raise ValueError("rhs contains non-finite entries")
    if method not in SOLVE_METHODS:
        raise ValueError(f"method must be one of {SOLVE_METHODS}, got {method!r}")
    if tolerance is not None and tolerance <= 0:
        raise ValueError(f"tolerance must be > 0, got {tolerance}")

    if method == "ridge":
        lam = 1e-12 if tolerance is None else tolerance
        aug = np.vstack([H, np.sqrt(lam) * np.eye(cols)])
        rhs = np.concatenate([K, np.zeros(cols)])
        coeff, _, _, _ = scipy.linalg.lstsq(aug, rhs, lapack_driver="gelsd")
        # The augmented system always has full column rank.
        rank = min(rows, cols)
    else:
        cond = default_cutoff(rows, cols) if tolerance is None else tolerance
        driver = "gelsd" if method == "svd" else "gelsy"
        coeff, _, rank, _ = scipy.linalg.lstsq(H, K, cond=cond, lapack_driver=driver)

    residual = float(np.linalg.norm(H @ coeff - K))
    return LeastSquaresSolution(coeff, residual, int(rank), method)


def matmul(A, B) -> np.ndarray:
    A = _check_matrix(A, "A")
    B = _check_matrix(B, "B")
    if A.shape[1] != B.shape[0]:
        raise ValueError(f"cannot multiply {A.shape} by {B.shape}")
    return A @ B


def hadamard_scale_columns(A, v) -> np.ndarray:
    """result[i, j] = A[i, j] * v[j]."""
    A = _check_matrix(A, "A")
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.size != A.shape[1]:
        raise ValueError(f"scale length {v.size} does not match {A.shape[1]} columns")
    return A * v


@maybe_njit
def _block_matvec_jit(vals, r0, nrows, c0, ncols, offs, x, out):
    for b in range(r0.size):
        base = offs[b]
        nc = ncols[b]
        cb = c0[b]
        rb = r0[b]
        for i in range(nrows[b]):
            s = 0.0
            row = base + i * nc
            for j in range(nc):
                s += vals[row + j] * x[cb + j]
            out[rb + i] += s


@maybe_njit
def _block_rmatvec_jit(vals, r0, nrows, c0, ncols, offs, y, out):
    for b in range(r0.size):
        base = offs[b]
        nc = ncols[b]
        cb = c0[b]
        rb = r0[b]
        for i in range(nrows[b]):
            yi = y[rb + i]
            row = base + i * nc
            for j in range(nc):
                out[cb + j] += vals[row + j] * yi


class BlockSparseSystem:
    """Least-squares system stored as dense blocks on a cell column layout.

    blocks: sequence of (row_start, row_stop, col_start, col_stop, values)
    with the column ranges drawn from a partition of [0, total_cols) into
    per-cell ranges.  Immutable after construction.
    """

    def __init__(self, blocks, total_rows: int, total_cols: int, rhs):
        self.total_rows = int(total_rows)
        self.total_cols = int(total_cols)
        self.rhs = np.asarray(rhs, dtype=np.float64).ravel()
        if self.rhs.size != self.total_rows:
            raise ValueError(f"rhs length {self.rhs.size} != total_rows {self.total_rows}")
        norm = []
        col_ranges = set()
        for r0, r1, c0, c1, vals in blocks:
            vals = _check_matrix(vals, "block")
            if not (0 <= r0 < r1 <= self.total_rows and 0 <= c0 < c1 <= self.total_cols):
                raise ValueError(f"block range ({r0}:{r1}, {c0}:{c1}) exceeds bounds")
            if vals.shape != (r1 - r0, c1 - c0):
                raise ValueError(f"block shape {vals.shape} does not match its range")
            norm.append((int(r0), int(r1), int(c0), int(c1), np.ascontiguousarray(vals)))
            col_ranges.add((int(c0), int(c1)))
        for (a0, a1) in col_ranges:
            for (b0, b1) in col_ranges:
                if (a0, a1) != (b0, b1) and a0 < b1 and b0 < a1:
                    raise ValueError("block column ranges overlap; expected a per-cell partition")
        covered = sum(c1 - c0 for c0, c1 in col_ranges)
        if covered != self.total_cols:
            raise ValueError("block column ranges do not cover all columns")
        self.blocks = tuple(norm)
        # Packed layout for the matvec kernels.
        self._vals = np.concatenate([b[4].ravel() for b in self.blocks]) if self.blocks else np.zeros(0)
        self._r0 = np.array([b[0] for b in self.blocks], dtype=np.int64)
        self._nrows = np.array([b[1] - b[0] for b in self.blocks], dtype=np.int64)
        self._c0 = np.array([b[2] for b in self.blocks], dtype=np.int64)
        self._ncols = np.array([b[3] - b[2] for b in self.blocks], dtype=np.int64)
        sizes = self._nrows * self._ncols
        self._offs = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)

    def materialize(self) -> np.ndarray:
        dense = np.zeros((self.total_rows, self.total_cols))
        for r0, r1, c0, c1, vals in self.blocks:
            dense[r0:r1, c0:c1] += vals
        return dense

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64).ravel()
        out = np.zeros(self.total_rows)
        if NUMBA_ENABLED:
            _block_matvec_jit(self._vals, self._r0, self._nrows, self._c0, self._ncols, self._offs, x, out)
        else:
            for r0, r1, c0, c1, vals in self.blocks:
                out[r0:r1] += vals @ x[c0:c1]
        return out

    def rmatvec(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64).ravel()
        out = np.zeros(self.total_cols)
        if NUMBA_ENABLED:
            _block_rmatvec_jit(self._vals, self._r0, self._nrows, self._c0, self._ncols, self._offs, y, out)
        else:
            for r0, r1, c0, c1, vals in self.blocks:
                out[c0:c1] += vals.T @ y[r0:r1]
        return out

    def column_norms(self) -> np.ndarray:
        sq = np.zeros(self.total_cols)
        for r0, r1, c0, c1, vals in self.blocks:
            sq[c0:c1] += np.sum(vals * vals, axis=0)
        return np.sqrt(sq)


def solve_block_sparse(
    system: BlockSparseSystem,
    method: str = "densify_svd",
    tolerance: float | None = None,
    max_iter: int | None = None,
) -> LeastSquaresSolution:
    """Solve a block-sparse least-squares system.

    densify_svd materializes the matrix and defers to solve_least_squares,
    so it matches the dense path exactly.  iterative_lsqr runs LSQR on the
    block matvecs with column-norm scaling; running out of iterations is
    reported via `converged`, not raised.
    """
    if method not in BLOCK_METHODS:
        raise ValueError(f"method must be one of {BLOCK_METHODS}, got {method!r}")
    if method == "densify_svd":
        return solve_least_squares(system.materialize(), system.rhs, "svd", tolerance)

    scale = system.column_norms()
    scale[scale == 0.0] = 1.0
    d = 1.0 / scale
    op = scipy.sparse.linalg.LinearOperator(
        (system.total_rows, system.total_cols),
        matvec=lambda x: system.matvec(d * x),
        rmatvec=lambda y: d * system.rmatvec(y),
    )
    tol = 1e-12 if tolerance is None else tolerance
    iters = 8 * system.total_cols if max_iter is None else int(max_iter)
    result = scipy.sparse.linalg.lsqr(op, system.rhs, atol=tol, btol=tol, iter_lim=iters)
    coeff = d * result[0]
    istop, itn = result[1], result[2]
    residual = float(np.linalg.norm(system.matvec(coeff) - system.rhs))
    rank = min(system.total_rows, system.total_cols)
    return LeastSquaresSolution(coeff, residual, rank, "iterative_lsqr", converged=istop != 7, iterations=int(itn))
