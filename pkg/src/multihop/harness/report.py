"""Report emission: results.csv, summary.md, trace.json and curve CSVs."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from ..metrics import aggregate_splits

RESULT_COLUMNS = ("method", "repeat", "metric", "value")
METRIC_ORDER = ("accuracy", "wgi", "cross_entropy", "mse", "SAC", "CAC", "SCC", "CCC", "n_corrected")


def fmt(value) -> str:
    # 17 significant digits round-trips every double
    return format(float(value), ".17g")


def _metric_order(rows):
    seen = {r[2] for r in rows}
    known = [m for m in METRIC_ORDER if m in seen]
    return known + sorted(seen - set(known))


def write_results_csv(bundle, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for method, repeat, metric, value in bundle.rows:
            w.writerow((method, repeat, metric, fmt(value)))


def summary_markdown(bundle) -> str:
    metrics = _metric_order(bundle.rows)
    lines = [f"# {bundle.name}", ""]
    if not bundle.rows:
        lines.append("No results.")
        return "\n".join(lines) + "\n"
    repeats = sorted({r[1] for r in bundle.rows})
    lines.append(f"Mean ± sample std over {len(repeats)} repeat(s).")
    lines.append("")
    lines.append("| method | " + " | ".join(metrics) + " |")
    lines.append("|---" * (len(metrics) + 1) + "|")
    for method in bundle.methods:
        cells = []
        for metric in metrics:
            vals = bundle.values(method, metric)
            if not vals:
                cells.append("")
                continue
            rep = aggregate_splits(vals, metric)
            cells.append(f"{rep.mean:.4f} ± {rep.std:.4f}")
        lines.append(f"| {method} | " + " | ".join(cells) + " |")
    if bundle.label_mapping:
        lines += ["", "Label mapping: " + ", ".join(f"{k!r} → {v}" for k, v in bundle.label_mapping.items())]
    return "\n".join(lines) + "\n"


def write_curve(columns, data, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in np.asarray(data):
            w.writerow(fmt(v) for v in row)


def emit_report(bundle, out_dir) -> list:
    """Write the report files into ``out_dir`` and return their paths."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "curves").mkdir(exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create report directory {out}: {exc}") from exc
    paths = [out / "results.csv", out / "summary.md", out / "trace.json"]
    write_results_csv(bundle, paths[0])
    paths[1].write_text(summary_markdown(bundle), encoding="utf-8")
    trace = {"name": bundle.name, "config": bundle.config, "label_mapping": bundle.label_mapping,
             "repeats": bundle.traces}
    paths[2].write_text(json.dumps(trace, indent=2, sort_keys=False) + "\n", encoding="utf-8")
    for name, (cols, data) in bundle.curves.items():
        p = out / "curves" / f"{name}.csv"
        write_curve(cols, data, p)
        paths.append(p)
    if bundle.models:
        import joblib
        for r, models in bundle.models.items():
            d = out / "models" / f"repeat_{r}"
            d.mkdir(parents=True, exist_ok=True)
            for label, model in models.items():
                if label == "__test__":
                    np.savez(d / "test.npz", X=model[0], y=model[1])
                    paths.append(d / "test.npz")
                    continue
                joblib.dump(model, d / f"{label}.joblib")
                paths.append(d / f"{label}.joblib")
    return paths
