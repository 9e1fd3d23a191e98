"""Report rendering for the CLI: JSON, aligned text, and figures.

Figures land next to the delimited output so a report directory is
self-contained.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics import N_TYPES, CorpusStats, format_stats_table

VARIANT_NAMES = {
    1: "repetition",
    2: "progression",
    3: "transformation",
    4: "expansion/compression",
    5: "inversion",
}


def write_eval_report(
    stats: CorpusStats,
    out_dir: Path,
    name: str = "corpus",
    reference: dict | None = None,
) -> dict[str, Path]:
    """Emit report.json, report.txt, and report.png for one corpus."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "report.json"
    txt_path = out_dir / "report.txt"
    png_path = out_dir / "report.png"

    payload = {"name": name, **stats.as_dict()}
    if reference:
        payload["reference"] = reference
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
    with open(txt_path, "w", encoding="utf-8") as fh:
        fh.write(format_stats_table(stats, name=name))

    fig, (ax_vp, ax_vd) = plt.subplots(
        1, 2, figsize=(9, 3.5), gridspec_kw={"width_ratios": [3, 1]}
    )
    xs = range(1, N_TYPES + 1)
    ax_vp.bar([x - 0.2 for x in xs], stats.vp, width=0.4, label=name, color="#4878cf")
    if reference and "vp" in reference:
        ax_vp.bar(
            [x + 0.2 for x in xs], reference["vp"], width=0.4,
            label=reference.get("name", "reference"), color="#d65f5f",
        )
        ax_vp.legend(fontsize=8)
    ax_vp.set_xticks(list(xs))
    ax_vp.set_xticklabels([f"type {i}" for i in xs], fontsize=8)
    ax_vp.set_ylabel("variant proportion")
    ax_vp.set_ylim(0, 1)

    if stats.vd is not None:
        ax_vd.bar([0], [stats.vd], width=0.5, color="#4878cf")
        if reference and reference.get("vd") is not None:
            ax_vd.axhline(reference["vd"], color="#d65f5f", linestyle="--", linewidth=1)
        ax_vd.set_xticks([0])
        ax_vd.set_xticklabels(["distance"], fontsize=8)
        ax_vd.set_ylabel("beats between regions")
    else:
        ax_vd.text(0.5, 0.5, "distance\nundefined", ha="center", va="center", fontsize=8)
        ax_vd.set_xticks([])
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)
    return {"json": json_path, "txt": txt_path, "png": png_path}


def write_loss_log(traces: dict[str, list], path: Path) -> Path:
    """Plain-text loss log: epoch, model name, mean NLL per line."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("epoch\tmodel\tnll\n")
        for name, trace in traces.items():
            for entry in trace:
                fh.write(f"{entry.epoch}\t{name}\t{entry.nll:.6f}\n")
    return path


def write_loss_figure(traces: dict[str, list], path: Path) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for name, trace in traces.items():
        ax.plot([e.epoch for e in trace], [e.nll for e in trace], label=name, linewidth=1)
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean NLL")
    ax.set_yscale("log")
    if traces:
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def write_label_report(
    per_clip: dict[str, dict[int, int]],
    path: Path,
    warnings: dict[str, list[str]] | None = None,
) -> Path:
    """JSON sidecar for the labeler: per-clip and total counts by type,
    plus motif-criteria warnings when any label looks suspect."""
    totals = {j: 0 for j in range(1, N_TYPES + 1)}
    for counts in per_clip.values():
        for j, n in counts.items():
            totals[int(j)] += n
    payload = {
        "clips": {
            name: {VARIANT_NAMES[int(j)]: n for j, n in sorted(counts.items())}
            for name, counts in sorted(per_clip.items())
        },
        "totals": {VARIANT_NAMES[j]: totals[j] for j in totals},
    }
    if warnings:
        payload["warnings"] = {k: sorted(v) for k, v in sorted(warnings.items())}
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
    return path
