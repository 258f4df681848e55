"""Reconstruction quality metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, ZeroReference
from ..radar import synthesize_nyquist

DB_CAP = 300.0


def to_db(num: float, den: float, cap: float = DB_CAP) -> float:
    """``10 log10(num / den)`` clipped to ``[-cap, cap]``; ``x / 0`` maps to ``cap``."""
    if den <= 0:
        return cap if num > 0 else math.nan
    if num <= 0:
        return -cap
    return float(np.clip(10.0 * math.log10(num / den), -cap, cap))


def _pair(sigma, sigma_hat):
    s = np.asarray(sigma, dtype=float)
    h = np.asarray(sigma_hat, dtype=float)
    if s.shape != h.shape:
        raise DimensionMismatch(f"shapes differ: {s.shape} vs {h.shape}")
    return s, h


def relative_error(sigma, sigma_hat) -> float:
    s, h = _pair(sigma, sigma_hat)
    ns = float(np.linalg.norm(s))
    if ns == 0:
        raise ZeroReference("relative error undefined for an all-zero reference")
    return float(np.linalg.norm(h - s)) / ns


def correct_discovery_rate(sigma, sigma_hat) -> float:
    s, h = _pair(sigma, sigma_hat)
    true = np.flatnonzero(s)
    if true.size == 0:
        raise ZeroReference("discovery rate undefined for an empty support")
    return float(np.count_nonzero(h[true])) / true.size


def rsnr_parts(sigma, sigma_hat, waveform, config) -> tuple[float, float]:
    """Numerator ``||Psi sigma||^2`` and denominator ``||Psi (sigma_hat - sigma)||^2``."""
    s, h = _pair(sigma, sigma_hat)
    num = float(np.sum(synthesize_nyquist(s, waveform, config) ** 2))
    if num == 0:
        raise ZeroReference("RSNR undefined for an all-zero reference")
    den = float(np.sum(synthesize_nyquist(h - s, waveform, config) ** 2))
    return num, den


@dataclass(frozen=True)
class SvnrParts:
    """Signal energy in one window and the energies of its virtual-noise parts."""

    signal: float
    total: float
    forward: float
    backward: float

    def db(self, cap: float = DB_CAP) -> dict:
        return {
            "svnr_o": to_db(self.signal, self.total, cap),
            "svnr_a": to_db(self.signal, self.forward, cap),
            "svnr_b": to_db(self.signal, self.backward, cap),
        }


def svnr_parts(view, sigma, noise) -> SvnrParts:
    """Energies entering the signal-to-virtual-noise ratios of ``view``.

    ``noise`` is a :class:`~segsr.segment.VirtualNoise` for the same view.
    """
    c0, c1 = view.coeff_range
    sig = view.sub_matrix @ np.asarray(sigma, float)[c0:c1]
    return SvnrParts(
        float(sig @ sig),
        float(noise.n_virt @ noise.n_virt),
        float(noise.forward_part @ noise.forward_part),
        float(noise.backward_part @ noise.backward_part),
    )


@dataclass(frozen=True)
class MetricsReport:
    er: float
    cdr: float
    rsnr_num: float
    rsnr_den: float
    svnr: SvnrParts | None = None
    isnr_db: float | None = None
    seconds: float | None = None

    @property
    def rsnr_db(self) -> float:
        return to_db(self.rsnr_num, self.rsnr_den)


def metrics(sigma, sigma_hat, waveform, config, svnr: SvnrParts | None = None,
            isnr_db: float | None = None, seconds: float | None = None) -> MetricsReport:
    """Er, CDR and the RSNR parts of one reconstruction.

    Raises :class:`ZeroReference` when ``sigma`` is identically zero.
    """
    er = relative_error(sigma, sigma_hat)
    cdr = correct_discovery_rate(sigma, sigma_hat)
    num, den = rsnr_parts(sigma, sigma_hat, waveform, config)
    return MetricsReport(er, cdr, num, den, svnr, isnr_db, seconds)
