"""Column-incremental Householder QR for tall-skinny least squares.

Q is never formed. The reflectors are kept in compact WY form
(``H_1 ... H_j = I - V T V^T``) so transforming a new column costs two
matrix-vector products, and the right-hand side is carried along already
transformed.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

from .errors import ColumnLimitError, InvalidArgumentError, RankDeficientError


def _householder(x: np.ndarray) -> tuple[np.ndarray, float, float]:
    """Reflector ``I - beta v v^T`` (``v[0] == 1``) mapping ``x`` to ``mu e_1``, ``mu >= 0``."""
    v = x.copy()
    sigma = float(np.dot(x[1:], x[1:]))
    x0 = float(x[0])
    v[0] = 1.0
    if sigma == 0.0:
        if x0 >= 0.0:
            return v, 0.0, x0
        return v, 2.0, -x0
    mu = np.sqrt(x0 * x0 + sigma)
    v0 = x0 - mu if x0 <= 0.0 else -sigma / (x0 + mu)
    beta = 2.0 * v0 * v0 / (sigma + v0 * v0)
    v[1:] /= v0
    return v, beta, mu


class IncrementalQR:
    """Least-squares state grown one basis column at a time.

    Parameters
    ----------
    rhs : array_like
        Right-hand side of length ``n_rows``.
    capacity : int, optional
        Initial column capacity; storage doubles on demand.
    """

    def __init__(self, rhs, capacity: int = 32):
        rhs = np.array(rhs, dtype=np.float64).ravel()
        if rhs.size == 0:
            raise InvalidArgumentError("right-hand side must be non-empty")
        if not np.all(np.isfinite(rhs)):
            raise InvalidArgumentError("right-hand side must be finite")
        self.n_rows = rhs.size
        self.n_cols = 0
        self.rhs_norm_sq = float(np.dot(rhs, rhs))
        self._z = rhs  # H_j ... H_1 rhs
        cap = max(1, min(capacity, self.n_rows))
        self._V = np.zeros((self.n_rows, cap))
        self._T = np.zeros((cap, cap))
        self._R = np.zeros((cap, cap))
        self._pending: list[np.ndarray] = []

    # -- views -----------------------------------------------------------
    @property
    def r_factor(self) -> np.ndarray:
        return self._R[: self.n_cols, : self.n_cols]

    @property
    def qty(self) -> np.ndarray:
        return self._z[: self.n_cols]

    @property
    def rhs_tail_sq(self) -> float:
        tail = self._z[self.n_cols:]
        return float(np.dot(tail, tail))

    def residual_rms(self) -> float:
        return float(np.sqrt(self.rhs_tail_sq / self.n_rows))

    def snapshot(self) -> tuple:
        return (self.n_cols, self.r_factor.copy(), self.qty.copy(), self._z.copy())

    # -- updates ---------------------------------------------------------
    def _grow(self):
        cap = self._R.shape[0]
        new = min(2 * cap, self.n_rows)
        V = np.zeros((self.n_rows, new))
        V[:, :cap] = self._V
        T = np.zeros((new, new))
        T[:cap, :cap] = self._T
        R = np.zeros((new, new))
        R[:cap, :cap] = self._R
        self._V, self._T, self._R = V, T, R

    def apply_qt(self, column) -> np.ndarray:
        """Return ``Q_j^T column`` for the current reflectors."""
        j = self.n_cols
        w = np.array(column, dtype=np.float64).ravel()
        if j:
            V = self._V[:, :j]
            w -= V @ (self._T[:j, :j].T @ (V.T @ w))
        return w

    def append(self, column) -> "IncrementalQR":
        """Add one column; the matching :meth:`drop_last` restores the prior state exactly."""
        j = self.n_cols
        if j >= self.n_rows:
            raise ColumnLimitError(f"already {j} columns for {self.n_rows} rows")
        column = np.asarray(column, dtype=np.float64).ravel()
        if column.size != self.n_rows:
            raise InvalidArgumentError("column length does not match the right-hand side")
        if not np.all(np.isfinite(column)):
            raise InvalidArgumentError("column must be finite")
        if j == self._R.shape[0]:
            self._grow()
        w = self.apply_qt(column)
        v, beta, mu = _householder(w[j:])
        self._pending.append(self._z[j:].copy())
        self._R[:j, j] = w[:j]
        self._R[j, j] = mu
        self._V[:, j] = 0.0
        self._V[j:, j] = v
        if j:
            V = self._V[:, :j]
            self._T[:j, j] = -beta * (self._T[:j, :j] @ (V.T @ self._V[:, j]))
        self._T[j, j] = beta
        tail = self._z[j:]
        self._z[j:] = tail - beta * np.dot(v, tail) * v
        self.n_cols = j + 1
        return self

    def drop_last(self) -> "IncrementalQR":
        if self.n_cols == 0 or not self._pending:
            raise InvalidArgumentError("no column to drop")
        j = self.n_cols - 1
        self._z[j:] = self._pending.pop()
        self._R[:, j] = 0.0
        self._R[j, :] = 0.0
        self._T[:, j] = 0.0
        self._V[:, j] = 0.0
        self.n_cols = j
        return self

    def commit(self) -> None:
        """Forget rollback snapshots for the columns appended so far."""
        self._pending.clear()

    # -- queries ---------------------------------------------------------
    def solve(self) -> np.ndarray:
        if self.n_cols == 0:
            raise InvalidArgumentError("no columns to solve for")
        R = self.r_factor
        if np.any(np.diag(R) <= 0.0):
            raise RankDeficientError("zero diagonal entry in R")
        return solve_triangular(R, self.qty, lower=False, check_finite=False)

    def condition_estimate(self) -> float:
        """Ratio of the extreme absolute diagonal entries of R (``inf`` if one is zero)."""
        if self.n_cols == 0:
            raise InvalidArgumentError("empty state has no condition estimate")
        diag = np.abs(np.diag(self.r_factor))
        lo = diag.min()
        if lo == 0.0:
            return float("inf")
        return float(diag.max() / lo)


# functional aliases matching the documented operation names
def qr_init(rhs) -> IncrementalQR:
    return IncrementalQR(rhs)


def qr_append_column(state: IncrementalQR, column) -> IncrementalQR:
    return state.append(column)


def qr_drop_last(state: IncrementalQR) -> IncrementalQR:
    return state.drop_last()


def qr_solve(state: IncrementalQR) -> np.ndarray:
    return state.solve()


def qr_condition_estimate(state: IncrementalQR) -> float:
    return state.condition_estimate()
