"""Per-ETF overlay plots: actual closes, combined predicted closes over
the walk-forward test region, and the daily sentiment trace on a second
axis.

Each image gets a sidecar ``.data.json`` holding exactly the series
that were drawn. Golden tests compare the sidecar, not pixels, so they
survive renderer version changes.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .errors import MissingArchiveError
from .evaluation.ablation import ARCHIVE_COLUMNS, ComboResult, SeriesViews


def load_archive_rows(path: str | Path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        raise MissingArchiveError(f"prediction archive missing: {path}")
    rows = []
    with path.open(newline="", encoding="utf-8") as handle:
        for row in csv.DictReader(handle):
            rows.append({
                "etf": row["etf"],
                "date": row["date"],
                "actual_delta": float(row["actual_delta"]),
                "predicted_magnitude": float(row["predicted_magnitude"]),
                "predicted_direction": int(row["predicted_direction"]),
                "combined_delta": float(row["combined_delta"]),
                "actual_close": float(row["actual_close"]),
                "predicted_close": float(row["predicted_close"]),
            })
    return rows


def _combo_rows(combo: ComboResult) -> list[dict]:
    if combo.status != "ok":
        raise MissingArchiveError(
            f"combo {combo.combo_name()} is {combo.status}: {combo.error}")
    if combo.archive_rows:
        return combo.archive_rows
    if combo.archive_path:
        return load_archive_rows(combo.archive_path)
    raise MissingArchiveError(f"combo {combo.combo_name()} has no archive")


def plot_combo(views: SeriesViews, combo: ComboResult,
               out_path: str | Path) -> Path:
    """Render one overlay image and its data sidecar; returns the image path."""
    rows = _combo_rows(combo)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)

    series = views.series
    all_dates = [d.isoformat() for d in series.dates]
    actual_closes = [float(c) for c in views.closes[1:]]
    sentiments = [float(s) for s in series.sentiments]
    pred_dates = [r["date"] for r in rows]
    pred_closes = [r["predicted_close"] for r in rows]

    payload = {
        "etf": series.etf.symbol,
        "combo": combo.combo_name(),
        "dates": all_dates,
        "actual_close": actual_closes,
        "predicted_dates": pred_dates,
        "predicted_close": pred_closes,
        "sentiment": sentiments,
    }
    sidecar = out_path.with_suffix(".data.json")
    sidecar.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n",
                       encoding="utf-8")

    fig, ax = plt.subplots(figsize=(10, 5))
    ax.plot(all_dates, actual_closes, label="actual close", color="tab:blue",
            linewidth=1.2)
    ax.plot(pred_dates, pred_closes, label="predicted close",
            color="tab:orange", linewidth=1.2, linestyle="--")
    ax.set_ylabel("close")
    ax.set_xlabel("date")
    tick_step = max(1, len(all_dates) // 8)
    ax.set_xticks(all_dates[::tick_step])
    ax.tick_params(axis="x", rotation=45, labelsize=8)

    ax2 = ax.twinx()
    ax2.plot(all_dates, sentiments, label="sentiment", color="tab:green",
             linewidth=0.8, alpha=0.6)
    ax2.set_ylabel("sentiment")
    ax2.set_ylim(-10.5, 10.5)

    handles1, labels1 = ax.get_legend_handles_labels()
    handles2, labels2 = ax2.get_legend_handles_labels()
    ax.legend(handles1 + handles2, labels1 + labels2, loc="upper left",
              fontsize=8)
    ax.set_title(f"{series.etf.symbol}: "
                 f"{combo.classifier_family} x {combo.regressor_family} "
                 f"({combo.variant})")
    fig.tight_layout()
    fig.savefig(out_path, dpi=110)
    plt.close(fig)
    return out_path


__all__ = ["ARCHIVE_COLUMNS", "load_archive_rows", "plot_combo"]
