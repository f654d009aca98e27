"""Batch report: a CSV of per-seed outcomes plus a few figures."""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

STATUS_COLORS = {"success": "tab:green", "planning-failure": "tab:red", "budget-exhausted": "tab:orange"}
FIELDS = ("seed", "status", "primitives", "replans", "seconds", "diagnostic")


def write_summary_csv(path, results) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(FIELDS)
        for r in results:
            w.writerow([r.seed, r.status, r.primitives, r.replans, f"{r.seconds:.4f}", r.diagnostic])


def plot_outcomes(path, results) -> None:
    fig, ax = plt.subplots(figsize=(max(4.0, 0.18 * len(results) + 2), 3))
    seeds = [r.seed for r in results]
    ax.bar(seeds, [r.primitives for r in results],
           color=[STATUS_COLORS.get(r.status, "grey") for r in results])
    ax.set_xlabel("seed")
    ax.set_ylabel("primitive actions")
    ok = sum(r.status == "success" for r in results)
    ax.set_title(f"{ok}/{len(results)} succeeded")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_layout(path, scn, outcome=None) -> None:
    """Top-down view: regions, true objects, and the base path of one run."""
    fig, ax = plt.subplots(figsize=(5, 5))
    for name, reg in sorted(scn.world.regions.items()):
        lo, hi = reg.lo, reg.hi
        ax.add_patch(Rectangle((lo[0], lo[1]), hi[0] - lo[0], hi[1] - lo[1], fill=False, lw=1.2))
        ax.annotate(name, (lo[0], hi[1]), fontsize=8, va="bottom")
    for oid, ob in sorted(scn.world.objects.items()):
        ax.plot(ob.pose[0], ob.pose[1], "o", color=matplotlib.colors.hsv_to_rgb(ob.hsv), mec="k")
        ax.annotate(oid, (ob.pose[0], ob.pose[1]), fontsize=7, xytext=(3, 3), textcoords="offset points")
    if outcome is not None:
        path_xy = []
        for rec in outcome.trace.records:
            b = rec["belief"]["base"]
            if not path_xy or path_xy[-1] != (b[0], b[1]):
                path_xy.append((b[0], b[1]))
        xs, ys = zip(*path_xy)
        ax.plot(xs, ys, "-x", color="tab:blue", lw=1, label=f"base path, seed {outcome.trace.seed}")
        ax.legend(fontsize=7, loc="best")
    ax.set_aspect("equal")
    ax.autoscale_view()
    ax.margins(0.1)
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_title(scn.name)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_stack(path, outcome) -> None:
    """Plan-stack depth over the trace of one run, with replans marked."""
    recs = outcome.trace.records
    fig, ax = plt.subplots(figsize=(6, 2.8))
    ax.step([r["step"] for r in recs], [r["stack_depth"] for r in recs], where="post", color="k", lw=1)
    for kind, marker, color in (("action", "|", "tab:blue"), ("replan", "v", "tab:red")):
        pts = [r for r in recs if r["kind"] == kind]
        ax.plot([r["step"] for r in pts], [r["stack_depth"] for r in pts], marker, color=color,
                ls="none", label=kind)
    ax.set_xlabel("trace record")
    ax.set_ylabel("stack depth")
    ax.set_title(f"seed {outcome.trace.seed}: {outcome.status}")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_report(directory, scn, results: Sequence, outcomes: Sequence[Optional[object]]) -> list[Path]:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / "summary.csv", out / "outcomes.png", out / "layout.png"]
    write_summary_csv(written[0], results)
    plot_outcomes(written[1], results)
    first = next((o for o in outcomes if o is not None), None)
    plot_layout(written[2], scn, first)
    if first is not None:
        written.append(out / "stack.png")
        plot_stack(written[-1], first)
    return written
