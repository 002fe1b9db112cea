"""Deterministic report files: JSON summaries, CSV curves, SVG overlays.

Same inputs always produce byte-identical files: keys are sorted, floats
use repr (shortest round-trip), and NaN/inf are mapped to JSON-safe
markers.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from .evaluate import AuditEntry, Curve, EvalReport, SweepPoint
from . import svgplot


def json_safe(obj):
    """Recursively replace NaN/inf floats with JSON-portable markers."""
    if isinstance(obj, float):
        if math.isnan(obj):
            return None
        if math.isinf(obj):
            return "Infinity" if obj > 0 else "-Infinity"
        return obj
    if isinstance(obj, dict):
        return {k: json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_safe(v) for v in obj]
    return obj


def dump_json(obj, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(json_safe(obj), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def report_dict(report: EvalReport) -> dict:
    d = {
        "model_id": report.model_id,
        "seed": report.seed,
        "k": report.k,
        "n_documents": report.n_documents,
        "notes": list(report.notes),
    }
    if report.boolean is not None:
        b = report.boolean
        d["boolean_point"] = {
            "tp": b.tp,
            "fp": b.fp,
            "fn": b.fn,
            "tn": b.tn,
            "precision": b.precision,
            "recall": b.recall,
            "fpr": b.fpr,
            "notes": list(b.notes),
        }
        d["auc_roc"] = None
        d["auc_pr"] = None
    if report.has_curves:
        d["auc_roc"] = report.roc.auc
        d["auc_pr"] = report.pr.auc
        d["average_precision"] = report.average_precision
        d["fold_auc_roc"] = list(report.fold_auc_roc)
        d["fold_auc_pr"] = list(report.fold_auc_pr)
        d["operating_points"] = [
            {
                "cutoff": p.cutoff,
                "precision": p.precision,
                "recall": p.recall,
                "fpr": p.fpr,
            }
            for p in report.points
        ]
        w = report.workload_result
        d["workload"] = {
            "target_recall": w.target_recall,
            "cutoff": w.cutoff,
            "flagged_count": w.flagged_count,
            "achieved_recall": w.achieved_recall,
            "precision_at": w.precision_at,
            "reading_reduction": w.reading_reduction,
            "notes": list(w.notes),
        }
    return d


def write_curve_csv(curve: Curve, path: str | Path) -> None:
    """One row per curve point: cutoff, x, y."""
    x_name, y_name = ("fpr", "tpr") if curve.kind == "roc" else ("recall", "precision")
    lines = [f"cutoff,{x_name},{y_name}"]
    for cutoff, (x, y) in zip(curve.cutoffs, curve.points):
        lines.append(f"{cutoff!r},{x!r},{y!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_eval_outputs(
    reports: list[EvalReport], out_dir: str | Path, seed: int, svg: bool = False
) -> list[Path]:
    """All files for one evaluate run; returns the paths written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for report in reports:
        base = f"{report.model_id}_seed{seed}"
        path = out_dir / f"report_{base}.json"
        dump_json(report_dict(report), path)
        written.append(path)
        if report.has_curves:
            roc_path = out_dir / f"roc_{base}.csv"
            write_curve_csv(report.roc, roc_path)
            pr_path = out_dir / f"pr_{base}.csv"
            write_curve_csv(report.pr, pr_path)
            written.extend([roc_path, pr_path])
    if svg:
        roc_series = []
        pr_series = []
        for report in reports:
            if report.has_curves:
                roc_series.append((report.model_id, list(report.roc.points)))
                pr_series.append((report.model_id, list(report.pr.points)))
            elif report.boolean is not None:
                b = report.boolean
                if not math.isnan(b.fpr) and not math.isnan(b.tpr):
                    roc_series.append((report.model_id, [(b.fpr, b.tpr)]))
                if not math.isnan(b.recall) and not math.isnan(b.precision):
                    pr_series.append((report.model_id, [(b.recall, b.precision)]))
        if roc_series:
            path = out_dir / f"roc_overlay_seed{seed}.svg"
            svgplot.write_chart(
                path,
                roc_series,
                "ROC curves",
                "false positive rate",
                "true positive rate",
                x_range=(0.0, 1.0),
                y_range=(0.0, 1.0),
            )
            written.append(path)
        if pr_series:
            path = out_dir / f"pr_overlay_seed{seed}.svg"
            svgplot.write_chart(
                path,
                pr_series,
                "Precision-recall curves",
                "recall",
                "precision",
                x_range=(0.0, 1.0),
                y_range=(0.0, 1.0),
            )
            written.append(path)
    return written


def write_sensitivity_outputs(
    points: list[SweepPoint],
    model_id: str,
    out_dir: str | Path,
    seed: int,
    svg: bool = False,
) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    base = f"sensitivity_{model_id}_seed{seed}"
    written = []
    lines = ["fraction,mean_auc_roc,mean_auc_pr,n_failed"]
    for p in points:
        lines.append(f"{p.fraction!r},{p.mean_auc_roc!r},{p.mean_auc_pr!r},{p.n_failed}")
    csv_path = out_dir / f"{base}.csv"
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    written.append(csv_path)
    json_path = out_dir / f"{base}.json"
    dump_json(
        [
            {
                "fraction": p.fraction,
                "mean_auc_roc": p.mean_auc_roc,
                "mean_auc_pr": p.mean_auc_pr,
                "auc_roc": list(p.auc_roc),
                "auc_pr": list(p.auc_pr),
                "n_failed": p.n_failed,
            }
            for p in points
        ],
        json_path,
    )
    written.append(json_path)
    if svg:
        ok = [p for p in points if not math.isnan(p.mean_auc_roc)]
        svg_path = out_dir / f"{base}.svg"
        svgplot.write_chart(
            svg_path,
            [
                ("AUC-ROC", [(p.fraction, p.mean_auc_roc) for p in ok]),
                ("AUC-PR", [(p.fraction, p.mean_auc_pr) for p in ok]),
            ],
            "Training-size sensitivity",
            "training fraction",
            "mean AUC",
            y_range=(0.0, 1.0),
        )
        written.append(svg_path)
    return written


def write_ranked_csv(rows: list[tuple[str, float]], path: str | Path) -> None:
    """(doc_id, p_hat) sorted by p_hat descending, ties by doc_id."""
    ordered = sorted(rows, key=lambda r: (-r[1], r[0]))
    lines = ["doc_id,p_hat"]
    for doc_id, p_hat in ordered:
        lines.append(f"{doc_id},{p_hat!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_token_ranking_csv(ranking, path: str | Path) -> None:
    """(token, t_stat, rank) rows in rank order, for inspection."""
    lines = ["token,t_stat,rank"]
    for score in ranking.scores:
        lines.append(f"{score.token},{score.t_stat!r},{score.abs_rank}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_audit_csv(entries: list[AuditEntry], path: str | Path) -> None:
    lines = ["doc_id,label,p_hat,direction"]
    for e in entries:
        lines.append(f'{e.doc_id},{e.label},{e.p_hat!r},"{e.direction}"')
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
