"""Delimited report emission and figure rendering for the CLI."""

from __future__ import annotations

import csv
import json
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

__all__ = [
    "write_csv",
    "write_json",
    "read_csv_rows",
    "scatter_figure",
    "intervals_figure",
]

_METHOD_COLORS = {
    "nodcc": "#555555",
    "sqrt": "#1f77b4",
    "sqrt2": "#17becf",
    "cholesky": "#2ca02c",
    "eigen": "#d62728",
    "eigen2": "#ff7f0e",
}


def write_csv(path, header, rows, provenance: str | None = None) -> None:
    """Write rows with a header; provenance goes first as a comment line."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if provenance:
            fh.write(f"# provenance: {provenance}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def append_csv_comments(path, lines) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        for line in lines:
            fh.write(f"# {line}\n")


def write_json(path, payload: dict, provenance: dict | None = None) -> None:
    if provenance is not None:
        payload = dict(payload)
        payload["provenance"] = provenance
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def read_csv_rows(path) -> tuple[list, list]:
    """Header and data rows, skipping comment lines."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    return rows[0], rows[1:]


def scatter_figure(rows, path) -> None:
    """LLIS-LLOOS scatter; color by decomposition, open markers for rejects.

    ``rows`` are dicts with keys method, llis, lloos, corr_test.
    """
    fig, ax = plt.subplots(figsize=(7.0, 5.5))
    methods = sorted({r["method"] for r in rows})
    for method in methods:
        color = _METHOD_COLORS.get(method, "#9467bd")
        for passed, marker, fill in ((True, "o", color), (False, "x", "none")):
            pts = [
                (float(r["llis"]), float(r["lloos"]))
                for r in rows
                if r["method"] == method and (r["corr_test"] == "T") == passed
            ]
            if not pts:
                continue
            xs, ys = zip(*pts)
            label = f"{method} ({'pass' if passed else 'reject'})"
            if marker == "o":
                ax.scatter(xs, ys, s=14, c=color, alpha=0.6, label=label, linewidths=0)
            else:
                ax.scatter(xs, ys, s=18, marker="x", c=color, alpha=0.8, label=label)
    ax.set_xlabel("average in-sample log-likelihood")
    ax.set_ylabel("average out-of-sample log-likelihood")
    ax.legend(fontsize=7, loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def intervals_figure(rows, path) -> None:
    """Error-bar chart of residual correlations with bootstrap intervals.

    ``rows`` are dicts with keys pair, method, point, lower, upper.
    """
    pairs = sorted({r["pair"] for r in rows})
    methods = sorted({r["method"] for r in rows})
    fig, ax = plt.subplots(figsize=(7.5, 4.5))
    width = 0.8 / max(len(methods), 1)
    for mi, method in enumerate(methods):
        xs, ys, lo, hi = [], [], [], []
        for pi, pair in enumerate(pairs):
            for r in rows:
                if r["method"] == method and r["pair"] == pair:
                    xs.append(pi + (mi - len(methods) / 2) * width)
                    ys.append(float(r["point"]))
                    lo.append(float(r["point"]) - float(r["lower"]))
                    hi.append(float(r["upper"]) - float(r["point"]))
        if xs:
            ax.errorbar(
                xs,
                ys,
                yerr=[lo, hi],
                fmt="o",
                ms=3,
                capsize=2,
                label=method,
                color=_METHOD_COLORS.get(method, "#9467bd"),
            )
    ax.axhline(0.0, color="black", lw=0.6)
    ax.set_xticks(range(len(pairs)))
    ax.set_xticklabels(pairs)
    ax.set_ylabel("correlation")
    ax.legend(fontsize=7, ncol=3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def ensure_dir(path) -> None:
    os.makedirs(path, exist_ok=True)
