"""Storage and operation counts of full versus segmented reconstruction."""
from __future__ import annotations

from dataclasses import dataclass

_UNITS = ("B", "KiB", "MiB", "GiB", "TiB", "PiB")


def format_binary(n_bytes: float) -> str:
    """Human-readable size with 1024-step prefixes and two decimals."""
    value = float(n_bytes)
    unit = 0
    while value >= 1024.0 and unit < len(_UNITS) - 1:
        value /= 1024.0
        unit += 1
    if unit == 0:
        return f"{int(n_bytes)} B"
    return f"{value:.2f} {_UNITS[unit]}"


@dataclass(frozen=True)
class ResourceReport:
    P: int
    Mp: int
    Np: int
    S: int
    bytes_full: int
    bytes_segsr: int
    flops_full: int
    flops_segsr: int

    @property
    def full_human(self) -> str:
        return format_binary(self.bytes_full)

    @property
    def segsr_human(self) -> str:
        return format_binary(self.bytes_segsr)


def resource_accounting(config=None, *, P=None, Mp=None, Np=None, S=None,
                        K: int = 1, K_seg: int = 1) -> ResourceReport:
    """Dense float64 storage and OMP cost orders for one problem size.

    ``flops_full = K*M*N`` and ``flops_segsr = K_seg*M_seg*N_seg``; with the
    default K = 1 they are the per-atom costs.
    """
    if config is not None:
        P, Mp, Np = config.P, config.Mp, config.Np
        S = config.S if S is None else S
    vals = {"P": P, "Mp": Mp, "Np": Np, "S": S}
    for name, v in vals.items():
        if v is None or int(v) != v or v < 1:
            raise ValueError(f"{name} must be a positive integer, got {v!r}")
    P, Mp, Np, S = (int(v) for v in (P, Mp, Np, S))
    M, N = P * Mp, (P - 1) * Np
    Ms, Ns = (S + 1) * Mp, S * Np
    return ResourceReport(P, Mp, Np, S, 8 * M * N, 8 * Ms * Ns, K * M * N, K_seg * Ms * Ns)
