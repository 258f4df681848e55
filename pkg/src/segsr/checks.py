"""Randomised verification suites for the virtual-noise and error bounds.

Each suite draws small instances (so that RIP constants can be enumerated
exactly), evaluates the bound next to the measured quantity and returns a
summary with the number of violations.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .analysis.bounds import delta_bar, recovery_conditions, theorem1_bounds, theorem4_bounds
from .analysis.rip import rip_bruteforce
from .pipeline import segsr_run
from .radar import RadarConfig, lfm_waveform
from .sampler import build_measurement_matrix, make_chipping
from .segment import oracle_virtual_noise, segment_starts, segment_views, virtual_measurement
from .solvers import SolverParams, least_squares_on_support, omp

REL_TOL = 1e-9
ABS_TOL = 1e-12


@dataclass
class SuiteResult:
    name: str
    trials: int
    checks: int = 0
    violations: int = 0
    skipped: int = 0
    max_ratio: float = 0.0
    notes: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.violations == 0 and self.trials > 0

    def as_dict(self) -> dict:
        d = asdict(self)
        d["ok"] = self.ok
        return d


@dataclass(frozen=True)
class SmallInstance:
    Np: int = 6
    R: int = 2
    P: int = 6
    S: int = 3
    W: int = 1
    p: float = 0.1
    max_support: int = 3

    def config(self) -> RadarConfig:
        return RadarConfig.from_counts(self.Np, self.R, self.P, self.S, self.W)


def _draw(inst: SmallInstance, rng):
    """Matrix and scene with at most ``max_support`` nonzeros in any window."""
    cfg = inst.config()
    A = build_measurement_matrix(cfg, lfm_waveform(cfg), make_chipping(cfg, rng)).A
    win = cfg.seg_cols
    while True:
        mask = rng.random(cfg.N) < inst.p
        counts = np.convolve(mask.astype(int), np.ones(win + cfg.Np, int), mode="valid")
        if counts.size == 0 or counts.max() <= inst.max_support:
            break
    sigma = np.where(mask, 1.0 - rng.random(cfg.N), 0.0)
    return cfg, A, sigma


def _exceeds(measured, bound):
    return measured > bound * (1.0 + REL_TOL) + ABS_TOL


def theorem1_suite(trials: int = 200, seed=0, inst: SmallInstance | None = None,
                   params: SolverParams | None = None) -> SuiteResult:
    """Measured virtual noise of every segment against its l2 / l-inf bound.

    The previous-segment error comes from an actual TOMPP sweep on the
    noiseless instance.
    """
    inst = inst or SmallInstance()
    rng = np.random.default_rng(seed)
    res = SuiteResult("theorem1", trials)
    for _ in range(trials):
        cfg, A, sigma = _draw(inst, rng)
        y = A @ sigma
        run = segsr_run(A, y, cfg, "tompp", params)
        views = segment_views(A, y, cfg)
        rip: dict = {}
        for l, view in enumerate(views, start=1):
            prev = run.forwarded[l - 2] if l > 1 else None
            noise = oracle_virtual_noise(view, sigma, prev)
            prev_err = None
            if l > 1:
                p0, p1 = view.prev_range
                prev_err = sigma[p0:p1] - prev
            b = theorem1_bounds(views, l, sigma, prev_err, rip)
            m2 = float(np.linalg.norm(noise.n_virt))
            mi = float(np.max(np.abs(view.sub_matrix.T @ noise.n_virt)))
            res.checks += 1
            if _exceeds(m2, b.eps2) or _exceeds(mi, b.eps_inf):
                res.violations += 1
            if b.eps2 > 0:
                res.max_ratio = max(res.max_ratio, m2 / b.eps2)
            if b.eps_inf > 0:
                res.max_ratio = max(res.max_ratio, mi / b.eps_inf)
    return res


def theorem4_suite(trials: int = 200, seed=0, inst: SmallInstance | None = None) -> SuiteResult:
    """Oracle-support least-squares error per block against its bound.

    Each segment is solved by least squares on its true support, with the
    virtual measurement formed from the previous segment's oracle estimate.
    Segments whose common RIP constant is not below one carry no bound and are
    counted as skipped.
    """
    inst = inst or SmallInstance()
    rng = np.random.default_rng(seed)
    res = SuiteResult("theorem4", trials)
    alpha_checks = 0
    for _ in range(trials):
        cfg, A, sigma = _draw(inst, rng)
        y = A @ sigma
        Np, S = cfg.Np, cfg.S
        starts = segment_starts(cfg)
        prev = None
        for l, view in enumerate(segment_views(A, y, cfg), start=1):
            yv = virtual_measurement(view, prev).y_virt
            c0, c1 = view.coeff_range
            support = np.flatnonzero(sigma[c0:c1])
            est = np.zeros(c1 - c0)
            if support.size:
                est[support] = least_squares_on_support(view.sub_matrix, yv, support)
            err = sigma[c0:c1] - est
            prev_err = None
            if l > 1:
                p0, p1 = view.prev_range
                prev_err = float(np.linalg.norm(sigma[p0:p1] - prev))
            nxt = None
            if not view.is_last:
                q0, q1 = view.next_range
                nxt = float(np.linalg.norm(sigma[q0:q1]))
            prev = est[: Np * (starts[l] - starts[l - 1])] if l < cfg.L else None
            db = delta_bar(A, cfg, sigma, l)
            if db.delta >= 1.0:
                res.skipped += 1
                continue
            bound = theorem4_bounds(db.delta, S, prev_err, nxt, db.K_bar)
            if db.delta < 1.0 / 3.0:
                alpha_checks += 1
                if not (bound.alpha < 0.5 and np.all(bound.beta < 1.0)):
                    res.violations += 1
            for s in range(S):
                m = float(np.linalg.norm(err[s * Np : (s + 1) * Np]))
                res.checks += 1
                if _exceeds(m, bound.bound[s]):
                    res.violations += 1
                if bound.bound[s] > 0 and m > ABS_TOL:
                    res.max_ratio = max(res.max_ratio, m / bound.bound[s])
    res.notes["alpha_beta_checks"] = alpha_checks
    return res


# -- exact-support recovery under bounded noise --------------------------------------


def paley_hadamard_12() -> np.ndarray:
    """12 x 12 Hadamard matrix from the quadratic residues mod 11."""
    q = 11
    residues = {(i * i) % q for i in range(1, q)}
    chi = np.array([0] + [1 if k in residues else -1 for k in range(1, q)])
    Q = np.array([[chi[(j - i) % q] for j in range(q)] for i in range(q)])
    S = np.zeros((q + 1, q + 1), dtype=int)
    S[0, 1:] = 1
    S[1:, 0] = -1
    S[1:, 1:] = Q
    return np.eye(q + 1, dtype=int) + S


def incoherent_dictionary(rng, n_cols: int = 20) -> np.ndarray:
    """Randomly rotated, sign-flipped subset of the identity / Hadamard union.

    The union of the two orthonormal bases has coherence 1/sqrt(12), so every
    three columns have RIP constant at most sqrt(2/12) < 1/(sqrt(2)+1).
    """
    H = paley_hadamard_12() / math.sqrt(12.0)
    D = np.hstack([np.eye(12), H])
    Q, R = np.linalg.qr(rng.standard_normal((12, 12)))
    Q = Q * np.sign(np.diag(R))
    cols = rng.choice(D.shape[1], n_cols, replace=False)
    signs = rng.choice([-1.0, 1.0], n_cols)
    return (Q @ D[:, cols]) * signs


def recovery_suite(theorem: int, trials: int = 50, seed=0, K: int = 2, level: float = 0.05,
                   noise_fraction: float = 1.0) -> SuiteResult:
    """Exact support recovery by OMP when every amplitude clears the threshold.

    ``theorem=2`` bounds the noise by ``||n||_2 <= eps2`` and stops on
    ``||r||_2 <= eps2``; ``theorem=3`` bounds it by ``||A^T n||_inf <= eps_inf``
    and stops on ``||A^T r||_inf <= eps_inf``. ``level`` is the bound and the
    injected noise has size ``noise_fraction * level`` in the same norm.

    ``notes["first_k_exact"]`` counts trials whose first K selections were
    exactly the true support, whatever the stopping rule did afterwards.
    """
    if theorem not in (2, 3):
        raise ValueError("theorem must be 2 or 3")
    if not 0 < noise_fraction <= 1:
        raise ValueError("noise_fraction must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    res = SuiteResult(f"theorem{theorem}", trials)
    first_k = supersets = 0
    for _ in range(trials):
        A = incoherent_dictionary(rng)
        d = rip_bruteforce(A, K + 1).delta
        direction = rng.standard_normal(A.shape[0])
        if theorem == 2:
            n = direction / np.linalg.norm(direction)
            eps2, eps_inf = level, 0.0
        else:
            n = direction / np.max(np.abs(A.T @ direction))
            eps2, eps_inf = 0.0, level
        n *= noise_fraction * level
        cond = recovery_conditions(d, K, eps2, eps_inf)
        if not cond.condition_ok:
            res.skipped += 1
            continue
        thr = cond.min_magnitude_l2 if theorem == 2 else cond.min_magnitude_linf
        support = np.sort(rng.choice(A.shape[1], K, replace=False))
        sigma = np.zeros(A.shape[1])
        sigma[support] = thr * (1.0 + rng.random(K)) * rng.choice([-1.0, 1.0], K)
        y = A @ sigma + n
        if theorem == 2:
            params = SolverParams(residual_tol=eps2)
        else:
            params = SolverParams(correlation_tol=eps_inf)
        est = omp(A, y, params)
        first = np.sort(omp(A, y, SolverParams(max_atoms=K)).support)
        first_k += int(np.array_equal(first, support))
        res.checks += 1
        if not np.array_equal(est.support, support):
            res.violations += 1
            supersets += int(set(support) <= set(est.support.tolist()))
        res.max_ratio = max(res.max_ratio, d * (math.sqrt(K) + 1.0))
    res.notes.update(first_k_exact=first_k, superset_failures=supersets, noise_fraction=noise_fraction)
    return res
