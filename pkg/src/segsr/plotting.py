"""PNG rendering of the figure tables produced by :mod:`segsr.experiment`."""
from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .experiment import FIGURES, figure_table  # noqa: E402

_Y = {"fig5b": ("svnr_o_db", "dB"), "fig6": ("er", "Er"), "fig8": ("er", "Er"), "fig9": ("seconds", "seconds"),
      "fig10": ("rsnr_db", "RSNR (dB)")}


def _label(row, keys):
    parts = []
    for k in keys:
        v = row.get(k)
        if v is not None:
            parts.append(f"{k}={v}" if k != "solver" else str(v))
    return " ".join(parts)


def _series(rows, x, keys):
    out = defaultdict(list)
    for r in rows:
        out[_label(r, keys)].append((r[x], r))
    return {k: sorted(v, key=lambda t: t[0]) for k, v in out.items()}


def render_figure(report, figure_id: str, out_dir=None) -> Path:
    """Draw one figure as ``<figure_id>.png``; raises MissingSeries if unavailable."""
    fields, rows = figure_table(report, figure_id)
    out = Path(out_dir) if out_dir is not None else report.out_dir
    out.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 4))
    if figure_id == "fig5a":
        idx = [r["row"] for r in rows]
        for name in ("abs_n_virt", "abs_forward", "abs_backward"):
            ax.plot(idx, [r[name] for r in rows], label=name[4:])
        ax.set_xlabel("row of virtual measurement")
        ax.set_ylabel("amplitude")
    elif figure_id == "fig7":
        for label, pts in _series(rows, "s", ["solver", "p", "isnr_db", "S", "W"]).items():
            ax.plot([p for p, _ in pts], [r["err_norm"] for _, r in pts], marker="o", label=label)
        ax.set_xlabel("block s")
        ax.set_ylabel("error norm")
    else:
        col, ylabel = _Y[figure_id]
        x = "p"
        ps = {r["p"] for r in rows}
        if len(ps) <= 1 and len({r["isnr_db"] for r in rows}) > 1:
            x = "isnr_db"
        keys = [k for k in ("solver", "S", "W", "isnr_db" if x == "p" else "p") if k in fields]
        for label, pts in _series(rows, x, keys).items():
            ys = [r[col] for _, r in pts]
            ax.plot([p for p, _ in pts], ys, marker="o", label=label)
            if figure_id == "fig5b":
                ax.plot([p for p, _ in pts], [r["svnr_a_db"] for _, r in pts], ls="--", label=f"{label} forward")
                ax.plot([p for p, _ in pts], [r["svnr_b_db"] for _, r in pts], ls=":", label=f"{label} backward")
        ax.set_xlabel(x)
        ax.set_ylabel(ylabel)
    ax.set_title(figure_id)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    path = out / f"{figure_id}.png"
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path


def render_all(report, out_dir=None, figures=FIGURES) -> dict:
    """Render every figure the report has data for. Returns ``{id: path or error}``."""
    from .errors import MissingSeries

    done = {}
    for f in figures:
        try:
            done[f] = render_figure(report, f, out_dir)
        except MissingSeries as exc:
            done[f] = exc
    return done
