"""Restricted isometry constants by exhaustive or sampled subset enumeration.

``delta_k = max over k-subsets G of max(lmax(A_G^T A_G) - 1, 1 - lmin(A_G^T A_G))``,
with the columns used exactly as given (no normalisation).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..errors import TooLarge

MAX_SUBSETS = 2_000_000
_CHUNK = 4096


@dataclass(frozen=True)
class RipEstimate:
    k: int
    delta: float
    method: str  # "exact" or "sampled"
    lam_min: float
    lam_max: float
    n_subsets: int
    worst_subset: tuple = ()

    @property
    def is_lower_bound(self) -> bool:
        return self.method == "sampled"

    def at_scale(self, c: float) -> float:
        """delta_k of ``c * A``."""
        c2 = c * c
        return max(c2 * self.lam_max - 1.0, 1.0 - c2 * self.lam_min)

    @property
    def optimal_scale(self) -> float:
        """Global column scale minimising delta_k."""
        return math.sqrt(2.0 / (self.lam_max + self.lam_min))

    @property
    def delta_scaled(self) -> float:
        return (self.lam_max - self.lam_min) / (self.lam_max + self.lam_min)


def _extremes(G, subsets):
    """Min/max Gram eigenvalue and per-subset delta for a batch of index tuples."""
    idx = np.asarray(subsets, dtype=np.intp)
    sub = G[idx[:, :, None], idx[:, None, :]]
    ev = np.linalg.eigvalsh(sub)
    return ev[:, 0], ev[:, -1]


def _scan(G, subsets_iter):
    lo, hi = math.inf, -math.inf
    worst, worst_d, count = (), -math.inf, 0
    while True:
        batch = list(itertools.islice(subsets_iter, _CHUNK))
        if not batch:
            break
        lmin, lmax = _extremes(G, batch)
        count += len(batch)
        lo = min(lo, float(lmin.min()))
        hi = max(hi, float(lmax.max()))
        d = np.maximum(lmax - 1.0, 1.0 - lmin)
        i = int(np.argmax(d))
        if d[i] > worst_d:
            worst_d, worst = float(d[i]), tuple(int(v) for v in batch[i])
    return lo, hi, worst, count


def rip_bruteforce(Amat, k: int, max_subsets: int = MAX_SUBSETS) -> RipEstimate:
    """Exact delta_k over every k-column subset."""
    A = np.asarray(getattr(Amat, "A", Amat), dtype=float)
    n = A.shape[1]
    if not 1 <= k <= n:
        raise ValueError(f"order k = {k} outside 1..{n}")
    total = math.comb(n, k)
    if total > max_subsets:
        raise TooLarge(f"C({n}, {k}) = {total} subsets exceeds the limit {max_subsets}; use rip_sampled")
    G = A.T @ A
    lo, hi, worst, count = _scan(G, itertools.combinations(range(n), k))
    return RipEstimate(k, max(hi - 1.0, 1.0 - lo), "exact", lo, hi, count, worst)


def _random_subsets(rng, n, k, count):
    done = 0
    while done < count:
        m = min(_CHUNK, count - done)
        keys = rng.random((m, n))
        for row in np.argsort(keys, axis=1, kind="stable")[:, :k]:
            yield tuple(sorted(int(v) for v in row))
        done += m


def rip_sampled(Amat, k: int, n_samples: int, seed=None) -> RipEstimate:
    """Lower bound on delta_k from ``n_samples`` random k-subsets.

    Draws are prefix-consistent: with a fixed seed, a larger ``n_samples``
    scans a superset of the subsets, so the estimate never decreases. When
    ``n_samples`` reaches the number of subsets, every subset is enumerated.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    A = np.asarray(getattr(Amat, "A", Amat), dtype=float)
    n = A.shape[1]
    if not 1 <= k <= n:
        raise ValueError(f"order k = {k} outside 1..{n}")
    if n_samples >= math.comb(n, k):
        est = rip_bruteforce(A, k, max_subsets=n_samples)
        return RipEstimate(k, est.delta, "sampled", est.lam_min, est.lam_max, est.n_subsets, est.worst_subset)
    G = A.T @ A
    rng = np.random.default_rng(seed)
    lo, hi, worst, count = _scan(G, _random_subsets(rng, n, k, n_samples))
    return RipEstimate(k, max(hi - 1.0, 1.0 - lo), "sampled", lo, hi, count, worst)


def normalize_columns(A) -> np.ndarray:
    A = np.asarray(getattr(A, "A", A), dtype=float)
    norms = np.linalg.norm(A, axis=0)
    return A / np.where(norms > 0, norms, 1.0)


@dataclass(frozen=True)
class Lemma1Report:
    k: int
    k_prime: int
    n_pairs: int
    deltas: dict
    max_violation: dict  # property -> max(lhs - rhs), <= 0 when satisfied

    @property
    def ok(self) -> bool:
        return all(v <= 1e-10 for v in self.max_violation.values())


def lemma1_checks(Amat, k: int, k_prime: int, n_pairs: int = 100, seed=0) -> Lemma1Report:
    """Check the four standard RIP consequences on random disjoint supports.

    (1) |<A u, A v>| <= delta_{k+k'} |u| |v|
    (2) ||A_G^T A_G'||_2 <= delta_{k+k'}
    (3) ||(A_G^T A_G)^{-1}||_2 <= 1 / (1 - delta_k)   (only when delta_k < 1)
    (4) delta_j <= delta_{j+1} for j < k + k'
    """
    A = np.asarray(getattr(Amat, "A", Amat), dtype=float)
    n = A.shape[1]
    if k + k_prime > n:
        raise ValueError("k + k' exceeds the number of columns")
    deltas = {j: rip_bruteforce(A, j).delta for j in range(1, k + k_prime + 1)}
    d_k, d_kk = deltas[k], deltas[k + k_prime]
    rng = np.random.default_rng(seed)
    viol = {"p1": -math.inf, "p2": -math.inf, "p3": -math.inf, "p4": -math.inf}
    for _ in range(n_pairs):
        perm = rng.permutation(n)
        g, gp = perm[:k], perm[k : k + k_prime]
        u = rng.standard_normal(k)
        v = rng.standard_normal(k_prime)
        lhs = abs((A[:, g] @ u) @ (A[:, gp] @ v))
        viol["p1"] = max(viol["p1"], lhs - d_kk * np.linalg.norm(u) * np.linalg.norm(v))
        cross = np.linalg.norm(A[:, g].T @ A[:, gp], 2)
        viol["p2"] = max(viol["p2"], cross - d_kk)
        if d_k < 1:
            inv = np.linalg.norm(np.linalg.inv(A[:, g].T @ A[:, g]), 2)
            viol["p3"] = max(viol["p3"], inv - 1.0 / (1.0 - d_k))
    for j in range(1, k + k_prime):
        viol["p4"] = max(viol["p4"], deltas[j] - deltas[j + 1])
    return Lemma1Report(k, k_prime, n_pairs, deltas, viol)


@dataclass(frozen=True)
class NaiveBlock:
    rows: tuple
    cols: tuple
    sigma_min: float
    delta2_raw: float
    delta2_unit: float


@dataclass(frozen=True)
class NaiveDiagnostic:
    naive: list
    segsr: list  # (segment index, delta2 of sub-matrix, delta2 of parent columns)

    @property
    def worst_naive_delta2(self) -> float:
        return max(b.delta2_unit for b in self.naive)

    @property
    def segsr_inherits(self) -> bool:
        return all(abs(a - b) <= 1e-12 * max(1.0, abs(b)) for _, a, b in self.segsr)


def _delta2(A):
    if A.shape[1] < 2:
        return rip_bruteforce(A, 1).delta if A.shape[1] else 0.0
    return rip_bruteforce(A, 2).delta


def naive_segmentation_diagnostic(Amat, config, rows_per_block: int | None = None) -> NaiveDiagnostic:
    """Compare a non-overlapping split of the rows against the overlapping windows.

    The naive split cuts ``y`` into consecutive blocks of ``S*Mp`` rows and keeps
    every column that touches a block, so the last columns lose most of their
    band. ``delta2_unit`` is computed on unit-norm columns, which exposes the
    near-collinear truncated columns independently of the raw column scale.
    """
    from ..sampler import band_bounds
    from ..segment import segment_views

    A = np.asarray(getattr(Amat, "A", Amat), dtype=float)
    M, N = A.shape
    step = rows_per_block or config.S * config.Mp
    first, last = band_bounds(config, np.arange(N))
    naive = []
    for r0 in range(0, M, step):
        r1 = min(r0 + step, M)
        cols = np.flatnonzero((first <= r1 - 1) & (last >= r0))
        sub = A[r0:r1][:, cols]
        keep = np.linalg.norm(sub, axis=0) > 0
        sv = np.linalg.svd(sub, compute_uv=False)
        smin = float(sv[-1]) if sub.shape[1] <= sub.shape[0] else 0.0
        naive.append(
            NaiveBlock((r0, r1), (int(cols[0]), int(cols[-1]) + 1), smin,
                       _delta2(sub), _delta2(normalize_columns(sub[:, keep])))
        )
    segsr = []
    for view in segment_views(A, None, config):
        c0, c1 = view.coeff_range
        segsr.append((view.index, _delta2(view.sub_matrix), _delta2(A[:, c0:c1])))
    return NaiveDiagnostic(naive, segsr)
