"""SVG figures for traces and batch campaigns.

Output is byte-stable: the SVG hash salt is fixed and the date stamp dropped.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .dynamics import CAPTURE, Trace  # noqa: E402
from .geometry import AllowedRegion, build_embedding, locate  # noqa: E402

STYLE = {
    "svg.hashsalt": "puppychase",
    "svg.fonttype": "none",
    "font.size": 8,
    "axes.linewidth": 0.6,
}
MAX_PANELS = 12


def _save(fig, path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _draw_region(ax, emb, region: AllowedRegion) -> None:
    for e in sorted(emb.edges):
        p, q = emb.point_at(e, 0), emb.point_at(e, 1)
        ax.plot([float(p.x), float(q.x)], [float(p.y), float(q.y)], color="0.78", lw=2.2, zorder=1,
                solid_capstyle="butt")
    for e, (a, b) in region.items():
        p, q = emb.point_at(e, a), emb.point_at(e, b)
        ax.plot([float(p.x), float(q.x)], [float(p.y), float(q.y)], color="black", lw=1.4, zorder=2,
                solid_capstyle="butt")
    for v in sorted(emb.vertices):
        pt = emb.vertices[v]
        ax.plot([float(pt.x)], [float(pt.y)], marker=".", color="black", ms=3, zorder=3)


def _paths(emb, events):
    human, puppy = [], []
    for ev in events:
        human.append(locate(emb, ev.human))
        for leg in ev.legs:
            puppy.append(locate(emb, leg.start))
            puppy.append(locate(emb, leg.end))
        puppy.append(locate(emb, ev.puppy))
    return human, puppy


def _draw_paths(ax, emb, events, captured_at=None) -> None:
    human, puppy = _paths(emb, events)
    if human:
        ax.plot([float(p.x) for p in human], [float(p.y) for p in human], color="tab:blue", lw=1.0,
                marker="o", ms=2.5, zorder=4, label="human")
        ax.plot([float(human[0].x)], [float(human[0].y)], marker="o", color="tab:blue", ms=6, mfc="none", zorder=5)
    if puppy:
        ax.plot([float(p.x) for p in puppy], [float(p.y) for p in puppy], color="tab:orange", lw=1.0,
                ls="--", marker="s", ms=2.5, zorder=4, label="puppy")
        ax.plot([float(puppy[0].x)], [float(puppy[0].y)], marker="s", color="tab:orange", ms=6, mfc="none", zorder=5)
    if captured_at is not None:
        ax.plot([float(captured_at.x)], [float(captured_at.y)], marker="*", color="tab:red", ms=10, zorder=6,
                label="capture")


def _frame(ax, emb) -> None:
    xs = [float(p.x) for p in emb.vertices.values()]
    ys = [float(p.y) for p in emb.vertices.values()]
    pad = max(max(xs) - min(xs), max(ys) - min(ys), 1.0) * 0.06
    ax.set_xlim(min(xs) - pad, max(xs) + pad)
    ax.set_ylim(min(ys) - pad, max(ys) + pad)
    ax.set_aspect("equal")
    ax.tick_params(length=2)


def _epochs(trace: Trace, emb):
    """(region, events) per epoch; the pruning at index k closes epoch k."""
    region = AllowedRegion.full(emb)
    start = 0
    out = []
    for p in trace.prunings:
        out.append((region, trace.events[start:p.event_index]))
        region, start = p.region, p.event_index
    out.append((region, trace.events[start:]))
    return out


def render_trace(trace: Trace, path, title: str | None = None) -> None:
    """One panel per epoch: allowed part in black, pruned part gray, paths overlaid."""
    emb = build_embedding(trace.header["embedding"])
    epochs = _epochs(trace, emb)
    if len(epochs) > MAX_PANELS:
        picks = sorted({round(i * (len(epochs) - 1) / (MAX_PANELS - 1)) for i in range(MAX_PANELS)})
    else:
        picks = list(range(len(epochs)))
    cols = min(len(picks), 3)
    rows = math.ceil(len(picks) / cols)
    xs = [p.x for p in emb.vertices.values()]
    ys = [p.y for p in emb.vertices.values()]
    ratio = float((max(ys) - min(ys) + 1) / (max(xs) - min(xs) + 1))
    panel = min(max(3.2 * ratio, 1.3), 3.6) + 0.6
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(rows, cols, figsize=(3.2 * cols, panel * rows + 0.4), squeeze=False)
        for slot, ax in enumerate(axes.flat):
            if slot >= len(picks):
                ax.set_axis_off()
                continue
            k = picks[slot]
            region, events = epochs[k]
            _draw_region(ax, emb, region)
            last = events[-1] if events else None
            caught = locate(emb, last.human) if last is not None and last.kind == CAPTURE else None
            _draw_paths(ax, emb, events, caught)
            _frame(ax, emb)
            ax.set_title(f"epoch {k} of {len(epochs) - 1}")
            if slot == 0 and events:
                ax.legend(loc="best", fontsize=6, frameon=False)
        heading = title or f"{trace.header.get('policy', '?')} puppy: {trace.outcome}"
        fig.suptitle(heading)
        fig.tight_layout()
        _save(fig, path)


def render_embedding(emb, path, title: str = "") -> None:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(3.6, 3.4))
        _draw_region(ax, emb, AllowedRegion.full(emb))
        _frame(ax, emb)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        _save(fig, path)


def render_campaign(rows: list[dict], path) -> None:
    """Prunings and elementary moves against edge count, one marker per policy."""
    markers = {"first": "o", "random": "^", "adversarial": "s"}
    with plt.rc_context(STYLE):
        fig, (left, right) = plt.subplots(1, 2, figsize=(7.0, 3.0))
        for pol in sorted({r["policy"] for r in rows}):
            sel = [r for r in rows if r["policy"] == pol]
            left.plot([r["edges"] for r in sel], [r["prunings"] for r in sel], ls="none",
                      marker=markers.get(pol, "x"), ms=3, mfc="none", label=pol)
            right.plot([r["edges"] for r in sel], [r["moves"] for r in sel], ls="none",
                       marker=markers.get(pol, "x"), ms=3, mfc="none", label=pol)
        if rows:
            top = max(r["edges"] for r in rows)
            left.plot([0, top], [0, top], color="0.5", lw=0.8, ls=":", label="|E|")
            left.legend(fontsize=6, frameon=False)
        left.set_xlabel("edges")
        left.set_ylabel("prunings")
        right.set_xlabel("edges")
        right.set_ylabel("elementary moves")
        fig.tight_layout()
        _save(fig, path)


__all__ = ["render_trace", "render_embedding", "render_campaign", "STYLE"]
