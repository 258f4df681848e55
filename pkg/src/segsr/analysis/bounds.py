"""Virtual-noise bounds, support-recovery conditions and least-squares error bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import MissingRipOrder
from .rip import RipEstimate, rip_bruteforce


class RipTable:
    """Lazy cache of brute-force RIP constants of one matrix, keyed by order.

    Built with :meth:`fixed` it only answers the orders it was given and raises
    :class:`MissingRipOrder` for anything else.
    """

    def __init__(self, matrix=None):
        self.matrix = None if matrix is None else np.asarray(getattr(matrix, "A", matrix), float)
        self._cache: dict[int, float] = {}

    @classmethod
    def fixed(cls, deltas: dict) -> "RipTable":
        t = cls()
        t._cache.update({int(k): float(v) for k, v in deltas.items()})
        return t

    def __getitem__(self, k: int) -> float:
        k = int(k)
        if k <= 0:
            return 0.0
        if k not in self._cache:
            if self.matrix is None:
                raise MissingRipOrder(f"RIP constant of order {k} not available")
            k_eff = min(k, self.matrix.shape[1])
            self._cache[k] = rip_bruteforce(self.matrix, k_eff).delta
        return self._cache[k]


@dataclass(frozen=True)
class NoiseBounds:
    eps2: float
    eps_inf: float
    a2: float = 0.0
    b2: float = 0.0
    a_inf: float = 0.0
    b_inf: float = 0.0


def theorem1_bounds(views, l: int, sigma, prev_error=None, rip=None) -> NoiseBounds:
    """l2 and l-inf bounds on the virtual noise of segment ``l`` (1-based).

    Parameters
    ----------
    views : list of SegmentView
    sigma : true coefficient vector (length N); supplies the next-block values.
    prev_error : true minus estimated values of the slid-out block of segment l-1.
    rip : optional mapping segment index -> RipTable; defaults to brute force on
        each view's sub-matrix.
    """
    L = len(views)
    view = views[l - 1]
    if rip is None:
        rip = {}

    def table(i):
        if i not in rip:
            rip[i] = RipTable(views[i - 1].sub_matrix)
        return rip[i]

    a2 = a_inf = b2 = b_inf = 0.0
    if l > 1:
        if prev_error is None:
            raise ValueError("prev_error is required for l > 1")
        d = np.asarray(prev_error, dtype=float)
        k = int(np.count_nonzero(d))
        if k:
            nd = float(np.linalg.norm(d))
            t = table(l - 1)
            a2 = math.sqrt(1.0 + t[k]) * nd
            a_inf = t[k + 1] * nd
    if l < L and not view.is_last:
        q0, q1 = view.next_range
        nxt = np.asarray(sigma, dtype=float)[q0:q1]
        k = int(np.count_nonzero(nxt))
        if k:
            nn = float(np.linalg.norm(nxt))
            t = table(l + 1)
            b2 = math.sqrt(1.0 + t[k]) * nn
            b_inf = t[k + 1] * nn
    return NoiseBounds(a2 + b2, a_inf + b_inf, a2, b2, a_inf, b_inf)


@dataclass(frozen=True)
class RecoveryConditions:
    condition_ok: bool
    min_magnitude_l2: float
    min_magnitude_linf: float


def recovery_conditions(delta, support_size: int, eps2: float, eps_inf: float) -> RecoveryConditions:
    """Sufficient conditions for OMP to find the exact support under bounded noise.

    ``delta`` is delta_{|G|+1} (a float, a RipEstimate, or a RipTable).
    Thresholds are infinite when the RIP condition fails.
    """
    K = int(support_size)
    if isinstance(delta, RipTable):
        delta = delta[K + 1]
    elif isinstance(delta, RipEstimate):
        delta = delta.delta
    delta = float(delta)
    rk = math.sqrt(K)
    ok = delta < 1.0 / (rk + 1.0)
    denom = 1.0 - (rk + 1.0) * delta
    if not ok or denom <= 0:
        return RecoveryConditions(False, math.inf, math.inf)
    c = math.sqrt(1.0 + delta) + 1.0
    return RecoveryConditions(True, c * eps2 / denom, c * rk * eps_inf / denom)


@dataclass(frozen=True)
class AmplitudeBound:
    alpha: float
    beta: np.ndarray  # per s = 1..S
    bound: np.ndarray  # per s = 1..S
    delta_bar: float
    K_bar: int | None = None


def theorem4_bounds(delta_bar: float, S: int, prev_error_norm=None, next_block_norm=None,
                    K_bar: int | None = None) -> AmplitudeBound:
    """Per-block bound on the oracle-support least-squares error of one segment.

    ``prev_error_norm=None`` marks the first segment and ``next_block_norm=None``
    the last one. beta is summed term by term so alpha = 1 needs no special case.
    """
    if not 0 <= delta_bar < 1:
        raise ValueError(f"delta_bar = {delta_bar} must lie in [0, 1)")
    alpha = delta_bar / (1.0 - delta_bar)
    s = np.arange(1, S + 1)
    beta = np.array([sum(alpha ** (si + 2 * t) for t in range(S - si + 1)) for si in s])
    bound = np.zeros(S)
    if prev_error_norm is not None:
        bound += beta * float(prev_error_norm)
    if next_block_norm is not None:
        bound += alpha ** (S - s + 1) * float(next_block_norm)
    return AmplitudeBound(alpha, beta, bound, float(delta_bar), K_bar)


@dataclass(frozen=True)
class DeltaBar:
    delta: float
    K_bar: int
    scale: float
    columns: np.ndarray


def delta_bar(A, config, sigma, l: int) -> DeltaBar:
    """Common RIP constant for segments l-1, l, l+1 on the columns they use.

    Takes every support column in the windows of segments l-1..l+1 and returns
    the Gram-eigenvalue spread of that set at the global column scale that
    minimises it. Every sub-support in the least-squares error analysis is a
    subset of this set, so by interlacing its constant dominates theirs.
    """
    from ..segment import segment_starts

    A = np.asarray(getattr(A, "A", A), dtype=float)
    starts = segment_starts(config)
    L, Np, S = config.L, config.Np, config.S
    lo = starts[max(l - 2, 0)] * Np
    hi = (starts[min(l, L - 1)] + S) * Np
    sig = np.asarray(sigma, dtype=float)
    cols = lo + np.flatnonzero(sig[lo:hi])
    if cols.size == 0:
        return DeltaBar(0.0, 0, 1.0, cols)
    ev = np.linalg.eigvalsh(A[:, cols].T @ A[:, cols])
    lmin, lmax = float(ev[0]), float(ev[-1])
    return DeltaBar((lmax - lmin) / (lmax + lmin), int(cols.size), math.sqrt(2.0 / (lmax + lmin)), cols)
