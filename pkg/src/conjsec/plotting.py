"""Figures for bench reports, written next to report.json."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .bench import BenchReport  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.dpi": 100,
    "savefig.dpi": 150,
    # keeps the PNG bytes stable between runs
    "svg.hashsalt": "conjsec",
}


def render_report(report: BenchReport, out_dir: Path, name: str = "report") -> list[Path]:
    """Two panels: step counts against n (with the fitted polynomial), and
    H's success rate and failure rate.  Returns the written paths."""
    stats = report.per_length
    ns = np.array([s.n for s in stats], dtype=float)
    with plt.rc_context(STYLE):
        fig, (ax_t, ax_b) = plt.subplots(1, 2, figsize=(8.0, 3.2))
        ax_t.plot(ns, [s.h for s in stats], "o-", label="h(n)")
        ax_t.plot(ns, [s.d for s in stats], "s-", label="d(n)")
        ax_t.plot(ns, [s.e for s in stats], "^-", label="e(n)")
        ax_t.plot(ns, [s.composite_mean for s in stats], "x--", label="H||D mean")
        if report.fit is not None and len(ns) > 1:
            grid = np.linspace(ns.min(), ns.max(), 100)
            ax_t.plot(grid, report.fit.predict(grid), ":", color="grey",
                      label=f"degree-{report.fit.degree} fit")
        ax_t.set_xlabel("n")
        ax_t.set_ylabel("steps")
        ax_t.legend(frameon=False)

        ax_b.plot(ns, [s.b for s in stats], "o-", color="C2", label="b (%)")
        ax_b.set_ylim(-5, 105)
        ax_b.set_xlabel("n")
        ax_b.set_ylabel("H success (%)")
        ax_q = ax_b.twinx()
        q = np.array([s.failure_rate for s in stats])
        mask = q > 0
        if mask.any():
            ax_q.semilogy(ns[mask], q[mask], "v--", color="C3", label="failure rate")
        ax_q.set_ylabel("failure rate")
        ax_b.set_title(report.genericity.classification, fontsize=9)
        fig.suptitle(report.platform, fontsize=9)
        fig.tight_layout()
        path = Path(out_dir) / f"{name}.png"
        fig.savefig(path, metadata={"Software": None})
        plt.close(fig)
    return [path]
