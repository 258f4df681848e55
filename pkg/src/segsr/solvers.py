"""Greedy sparse solvers: OMP, OMP with partially known support, and TOMPP.

All three share one loop built on an incrementally grown orthonormal basis of
the selected columns, so residuals are exact orthogonal projections and the
final coefficients come from a triangular solve.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import RankDeficientSupport

RANK_RTOL = 1e-10
# residual below this fraction of ||y|| means y is fully explained
EXHAUSTED_RTOL = 1e-12


@dataclass(frozen=True)
class SolverParams:
    """Stopping parameters.

    ``zeta1``/``zeta2`` are absolute residual-decrease thresholds. When left as
    ``None`` they default to ``zeta1_rel * ||y||`` and ``zeta2_ratio * zeta1``.
    """

    zeta1: float | None = None
    zeta2: float | None = None
    zeta1_rel: float = 0.1
    zeta2_ratio: float = 0.2
    max_atoms: int | None = None
    residual_tol: float = 0.0
    correlation_tol: float | None = None

    def __post_init__(self):
        if self.zeta1 is not None and self.zeta2 is not None and not self.zeta2 < self.zeta1:
            raise ValueError("zeta2 must be smaller than zeta1")
        if not 0 < self.zeta2_ratio < 1:
            raise ValueError("zeta2_ratio must lie in (0, 1)")
        if self.zeta1_rel < 0:
            raise ValueError("zeta1_rel must be non-negative")

    def thresholds(self, y) -> tuple[float, float]:
        z1 = self.zeta1 if self.zeta1 is not None else self.zeta1_rel * float(np.linalg.norm(y))
        z2 = self.zeta2 if self.zeta2 is not None else self.zeta2_ratio * z1
        return z1, z2


@dataclass
class SparseEstimate:
    support: np.ndarray
    values: np.ndarray
    n_cols: int
    residual_norm: float
    residual_trace: list = field(default_factory=list)
    stop_reason: str = ""
    known_size: int = 0
    selection_order: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    phase1_size: int | None = None  # atoms held after phase 1 (TOMPP only)

    @property
    def iterations(self) -> int:
        return len(self.residual_trace) - 1

    @property
    def x(self) -> np.ndarray:
        out = np.zeros(self.n_cols)
        out[self.support] = self.values
        return out


class _Basis:
    """Orthonormal basis of selected columns with the matching R factor."""

    def __init__(self, A, y, capacity):
        m = A.shape[0]
        cap = max(1, capacity)
        self.A = A
        self.Q = np.zeros((m, cap))
        self.R = np.zeros((cap, cap))
        self.idx: list[int] = []
        self.qty = np.zeros(cap)
        self.r = np.array(y, dtype=float)
        self.y = self.r.copy()

    @property
    def k(self):
        return len(self.idx)

    def add(self, j) -> bool:
        k = self.k
        if k >= self.Q.shape[1]:
            return False
        v = self.A[:, j]
        vn = np.linalg.norm(v)
        if vn == 0:
            return False
        Qk = self.Q[:, :k]
        c = Qk.T @ v
        w = v - Qk @ c
        c2 = Qk.T @ w  # second pass keeps Q orthonormal to working precision
        w -= Qk @ c2
        c += c2
        wn = np.linalg.norm(w)
        if wn <= RANK_RTOL * vn:
            return False
        q = w / wn
        self.Q[:, k] = q
        self.R[:k, k] = c
        self.R[k, k] = wn
        self.qty[k] = q @ self.y
        self.r -= q * (q @ self.r)
        self.idx.append(int(j))
        return True

    def coefficients(self):
        k = self.k
        if k == 0:
            return np.zeros(0)
        return solve_triangular(self.R[:k, :k], self.qty[:k])

    def residual_norm(self):
        return float(np.linalg.norm(self.r))


def least_squares_on_support(A, y, support) -> np.ndarray:
    """Minimise ``||y - A[:, support] v||`` through a QR factorisation."""
    support = np.asarray(support, dtype=int)
    if support.size == 0:
        return np.zeros(0)
    As = A[:, support]
    sv = np.linalg.svd(As, compute_uv=False)
    if sv[-1] <= RANK_RTOL * sv[0] or support.size > As.shape[0]:
        raise RankDeficientSupport(f"columns {support.tolist()} are linearly dependent")
    Q, R = np.linalg.qr(As)
    return solve_triangular(R, Q.T @ y)


def _init(A, y, known, params):
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    basis = _Basis(A, y, A.shape[0])
    known = np.unique(np.asarray([] if known is None else known, dtype=int))
    for j in known:
        if not basis.add(j):
            raise RankDeficientSupport(f"known support column {j} is dependent on the others")
    return A, y, basis, known.size


def _greedy_phase(basis, limit, zeta, params, trace, y_norm):
    """Add atoms from columns ``[0, limit)`` until a stopping rule fires.

    Returns the stop reason; ``"threshold"`` means the residual decrease of the
    latest atom was at most ``zeta`` (the atom is kept).
    """
    A = basis.A
    max_atoms = params.max_atoms if params.max_atoms is not None else A.shape[0]
    while True:
        rn = trace[-1]
        if rn <= EXHAUSTED_RTOL * y_norm or rn == 0.0:
            return "exhausted"
        if rn <= params.residual_tol:
            return "residual_tol"
        corr = A.T @ basis.r
        if params.correlation_tol is not None and np.max(np.abs(corr)) <= params.correlation_tol:
            return "correlation_tol"
        if basis.k >= max_atoms:
            return "max_atoms"
        j = int(np.argmax(np.abs(corr[:limit])))  # first maximum: lowest index wins ties
        if j in basis.idx or not basis.add(j):
            return "no_progress"
        trace.append(basis.residual_norm())
        if zeta is not None and trace[-2] - trace[-1] <= zeta:
            return "threshold"


def _finish(basis, n_cols, trace, reason, known_size, phase1_size=None):
    values = basis.coefficients()
    selected = np.asarray(basis.idx, dtype=int)
    order = np.argsort(selected, kind="stable")
    return SparseEstimate(
        selected[order], values[order], n_cols, trace[-1], trace, reason, known_size,
        selected, phase1_size,
    )


def omp(A, y, params: SolverParams | None = None) -> SparseEstimate:
    """Orthogonal matching pursuit.

    Stops on ``||r|| <= residual_tol``, ``||A^T r||_inf <= correlation_tol`` (if
    set), ``max_atoms`` atoms, or when the chosen atom adds nothing new.
    """
    params = params or SolverParams()
    A, y, basis, _ = _init(A, y, None, params)
    trace = [basis.residual_norm()]
    reason = _greedy_phase(basis, A.shape[1], None, params, trace, float(np.linalg.norm(y)))
    return _finish(basis, A.shape[1], trace, reason, 0)


def omp_pks(A, y, known_support, params: SolverParams | None = None) -> SparseEstimate:
    """OMP started from a known support, stopping once an atom lowers the
    residual norm by no more than zeta1."""
    params = params or SolverParams()
    A, y, basis, n_known = _init(A, y, known_support, params)
    zeta1, _ = params.thresholds(y)
    trace = [basis.residual_norm()]
    reason = _greedy_phase(basis, A.shape[1], zeta1, params, trace, float(np.linalg.norm(y)))
    return _finish(basis, A.shape[1], trace, reason, n_known)


def known_support_from(prev_estimate, shift: int) -> np.ndarray:
    """Support of the previous window's estimate that overlaps the current one,
    in current-window coordinates."""
    if prev_estimate is None:
        return np.array([], dtype=int)
    return np.flatnonzero(np.asarray(prev_estimate)[shift:])


def tompp(A, y_virt, prev_estimate, config, params: SolverParams | None = None, slide=None) -> SparseEstimate:
    """Two-step OMP process for one segment.

    Phase 1 selects over all columns until the residual decrease drops to
    zeta1; phase 2 continues over columns ``[0, Ncols - Np)`` (away from the
    backward interference) until the decrease drops to zeta2. ``slide`` is the
    number of pulse blocks between the previous window and this one (defaults
    to ``config.W``).
    """
    params = params or SolverParams()
    Np = config.Np
    slide = config.W if slide is None else slide
    known = known_support_from(prev_estimate, slide * Np)
    A, y, basis, n_known = _init(A, y_virt, known, params)
    zeta1, zeta2 = params.thresholds(y)
    y_norm = float(np.linalg.norm(y))
    trace = [basis.residual_norm()]
    reason = _greedy_phase(basis, A.shape[1], zeta1, params, trace, y_norm)
    phase1 = basis.k
    if reason == "threshold":
        reason = _greedy_phase(basis, A.shape[1] - Np, zeta2, params, trace, y_norm)
    return _finish(basis, A.shape[1], trace, reason, n_known, phase1)
