"""Block-recursive pseudoinverse of a column-partitioned matrix.

For ``U = [U_1, ..., U_S]`` of full column rank and
``C_i = (I - P_{1..i-1}) U_i`` (``P`` the projector onto the earlier blocks)::

    [U_1..U_i]^+ = [ [U_1..U_{i-1}]^+ (I - U_i C_i^+) ;  C_i^+ ]

holds without further assumptions. When blocks at distance two or more are
mutually orthogonal, the product telescopes so that block row s equals
``C_s^+ (I - U_{s+1} C_{s+1}^+ + U_{s+1} C_{s+1}^+ U_{s+2} C_{s+2}^+ - ...)``
with ``C_1 = U_1``.
"""
from __future__ import annotations

import numpy as np

from ..errors import OrthogonalityViolated, RankDeficient

ORTH_TOL = 1e-10
RANK_TOL = 1e-10


def _check_rank(U):
    sv = np.linalg.svd(U, compute_uv=False)
    if U.shape[1] > U.shape[0] or sv.size == 0 or sv[-1] <= RANK_TOL * sv[0]:
        raise RankDeficient("partitioned matrix is not of full column rank")


def check_orthogonality(blocks, min_gap: int = 2, all_gaps: bool = False) -> float:
    """Largest relative |U_s^T U_t| over the block pairs that must be orthogonal.

    By default only pairs (s, s+min_gap) are checked; ``all_gaps`` extends the
    check to every pair at distance >= min_gap.
    """
    worst = 0.0
    S = len(blocks)
    for s in range(S):
        for t in range(s + min_gap, S if all_gaps else min(S, s + min_gap + 1)):
            a, b = blocks[s], blocks[t]
            scale = np.linalg.norm(a) * np.linalg.norm(b)
            if scale == 0:
                continue
            worst = max(worst, float(np.max(np.abs(a.T @ b))) / scale)
    return worst


def complement_blocks(blocks):
    """``C_1 = U_1`` and ``C_i = (I - P_{1..i-1}) U_i`` for i >= 2."""
    C = [np.asarray(blocks[0], float)]
    for i in range(1, len(blocks)):
        prev = np.hstack(blocks[:i])
        Q, _ = np.linalg.qr(prev)
        Ui = np.asarray(blocks[i], float)
        C.append(Ui - Q @ (Q.T @ Ui))
    return C


def _recursive(blocks, C):
    P = np.linalg.pinv(blocks[0])
    for i in range(1, len(blocks)):
        Ci = np.linalg.pinv(C[i])
        P = np.vstack([P - P @ blocks[i] @ Ci, Ci])
    return P


def _expanded(blocks, C):
    S = len(blocks)
    Cp = [np.linalg.pinv(c) for c in C]
    rows = []
    for s in range(S):
        term = Cp[s]
        acc = term.copy()
        sign = 1.0
        for i in range(s + 1, S):
            term = term @ blocks[i] @ Cp[i]
            sign = -sign
            acc += sign * term
        rows.append(acc)
    return np.vstack(rows)


def partitioned_pinv(blocks, form: str = "recursive", check: bool = True) -> np.ndarray:
    """Pseudoinverse of ``[U_1, ..., U_S]`` assembled block by block.

    ``form="recursive"`` is exact for any full-column-rank partition;
    ``form="expanded"`` uses the telescoped series, which additionally needs
    U_s orthogonal to U_t whenever |s - t| >= 2. With ``check`` the
    U_s / U_{s+2} orthogonality precondition is verified for S >= 3 (and all
    distant pairs for the expanded form).
    """
    blocks = [np.atleast_2d(np.asarray(b, dtype=float)) for b in blocks]
    if not blocks:
        raise ValueError("need at least one block")
    if len({b.shape[0] for b in blocks}) != 1:
        raise ValueError("blocks must have the same number of rows")
    U = np.hstack(blocks)
    _check_rank(U)
    if check and len(blocks) >= 3:
        worst = check_orthogonality(blocks, 2, all_gaps=(form == "expanded"))
        if worst > ORTH_TOL:
            raise OrthogonalityViolated(f"distant blocks not orthogonal (max relative product {worst:.3g})")
    C = complement_blocks(blocks)
    if form == "recursive":
        return _recursive(blocks, C)
    if form == "expanded":
        return _expanded(blocks, C)
    raise ValueError(f"unknown form {form!r}")
