"""Summary table over combo results: classifier rows, regressor
sub-rows, sentiment variants side by side, best and second-best cells
marked per metric column.

Cell values are unweighted means across the ETFs whose combo succeeded;
partially failed cells carry an n_ok/n_total annotation, fully failed
cells render as a FAILED sentinel, and the regressor rows without a
sentiment variant stay blank.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import IncompleteRunError
from .ablation import ComboResult

CM_DISPLAY = {
    "ALL_DOWN": "Baseline (always down)",
    "ALL_UP": "Baseline (always up)",
    "DTREE": "Decision Tree",
    "LOGREG": "Logistic Regression",
    "LSTMCLF": "LSTM",
    "RFOREST": "Random Forest",
    "SVM_RBF": "SVM-RBF",
    "GBTCLF": "XGBoost",
}

RM_DISPLAY = {
    "ARIMA": "ARIMA",
    "SARIMAX": "ARIMA",
    "LSTMREG": "LSTM",
    "MA5": "MA5",
    "SVR": "SVM",
    "GBTREG": "XGBoost",
}

TABLE_VARIANTS = ("price_only", "with_sentiment")
VARIANT_HEADINGS = {"price_only": "w/o Sentiment",
                    "with_sentiment": "with Sentiment"}


@dataclass
class VariantCell:
    status: str = "blank"
    mse: float | None = None
    mae: float | None = None
    n_ok: int = 0
    n_total: int = 0
    mse_mark: str = ""
    mae_mark: str = ""


@dataclass
class SummaryRow:
    cm_family: str
    cm_display: str
    rm_family: str
    rm_display: str
    cells: dict[str, VariantCell] = field(default_factory=dict)


@dataclass
class SummaryTable:
    space: str
    rows: list[SummaryRow]


def _display(mapping: dict[str, str], family: str) -> str:
    return mapping.get(family, family)


def build_summary(combos: list[ComboResult], space: str = "price") -> SummaryTable:
    if space not in ("price", "delta"):
        raise ValueError(f"unknown evaluation space {space!r}")
    if not any(c.status == "ok" for c in combos):
        raise IncompleteRunError("no combo succeeded; nothing to summarize")

    grouped: dict[tuple[str, str, str], list[ComboResult]] = {}
    for combo in combos:
        if combo.variant not in TABLE_VARIANTS:
            continue
        key = (combo.classifier_family, combo.regressor_family, combo.variant)
        grouped.setdefault(key, []).append(combo)

    cm_families = sorted({k[0] for k in grouped},
                         key=lambda f: _display(CM_DISPLAY, f))
    rm_families = sorted({k[1] for k in grouped},
                         key=lambda f: _display(RM_DISPLAY, f))

    rows: list[SummaryRow] = []
    for cm in cm_families:
        for rm in rm_families:
            row = SummaryRow(cm_family=cm, cm_display=_display(CM_DISPLAY, cm),
                             rm_family=rm, rm_display=_display(RM_DISPLAY, rm))
            for variant in TABLE_VARIANTS:
                cell = VariantCell()
                combos_here = grouped.get((cm, rm, variant), [])
                if combos_here:
                    cell.n_total = len(combos_here)
                    ok = [c for c in combos_here if c.status == "ok"]
                    cell.n_ok = len(ok)
                    if not ok:
                        cell.status = "failed"
                    else:
                        cell.status = "ok"
                        metric = [c.aggregate_price if space == "price"
                                  else c.aggregate_delta for c in ok]
                        cell.mse = float(np.mean([m.mse for m in metric]))
                        cell.mae = float(np.mean([m.mae for m in metric]))
                row.cells[variant] = cell
            rows.append(row)

    for variant in TABLE_VARIANTS:
        for attr, mark_attr in (("mse", "mse_mark"), ("mae", "mae_mark")):
            ranked = sorted(
                (r for r in rows if r.cells[variant].status == "ok"),
                key=lambda r: getattr(r.cells[variant], attr))
            if ranked:
                setattr(ranked[0].cells[variant], mark_attr, "best")
            if len(ranked) > 1:
                setattr(ranked[1].cells[variant], mark_attr, "second")

    return SummaryTable(space=space, rows=rows)


def _format_value(value: float | None) -> str:
    if value is None:
        return ""
    if abs(value) >= 1.0:
        return f"{value:.2f}"
    return f"{value:.4f}"


def _render_cell_value(cell: VariantCell, attr: str) -> str:
    if cell.status == "blank":
        return ""
    if cell.status == "failed":
        return "FAILED"
    text = _format_value(getattr(cell, attr))
    mark = getattr(cell, f"{attr}_mark")
    if mark == "best":
        text = f"*{text}*"
    elif mark == "second":
        text = f"_{text}_"
    if cell.n_ok < cell.n_total:
        text = f"{text} ({cell.n_ok}/{cell.n_total})"
    return text


def render_summary_text(table: SummaryTable) -> str:
    headers = ["CM", "RM"]
    for variant in TABLE_VARIANTS:
        heading = VARIANT_HEADINGS[variant]
        headers += [f"{heading} MSE", f"{heading} MAE"]
    body: list[list[str]] = []
    previous_cm = None
    for row in table.rows:
        cm = row.cm_display if row.cm_display != previous_cm else ""
        previous_cm = row.cm_display
        cells = [cm, row.rm_display]
        for variant in TABLE_VARIANTS:
            cell = row.cells[variant]
            cells.append(_render_cell_value(cell, "mse"))
            cells.append(_render_cell_value(cell, "mae"))
        body.append(cells)

    widths = [max(len(headers[i]), *(len(r[i]) for r in body)) if body
              else len(headers[i]) for i in range(len(headers))]
    lines = [
        f"Combined two-stage results, {table.space} space "
        "(*best*, _second best_)",
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
        "  ".join("-" * w for w in widths),
    ]
    for cells in body:
        lines.append("  ".join(c.ljust(widths[i]) for i, c in enumerate(cells)))
    return "\n".join(lines) + "\n"


SUMMARY_CSV_COLUMNS = (
    "cm", "rm",
    "wo_mse", "wo_mae", "with_mse", "with_mae",
    "wo_mse_mark", "wo_mae_mark", "with_mse_mark", "with_mae_mark",
    "wo_status", "with_status",
    "wo_n_ok", "wo_n_total", "with_n_ok", "with_n_total",
)


def summary_csv_rows(table: SummaryTable) -> list[dict[str, str]]:
    rows = []
    for row in table.rows:
        wo = row.cells["price_only"]
        with_ = row.cells["with_sentiment"]
        rows.append({
            "cm": row.cm_display,
            "rm": row.rm_display,
            "wo_mse": _format_value(wo.mse) if wo.status == "ok" else "",
            "wo_mae": _format_value(wo.mae) if wo.status == "ok" else "",
            "with_mse": _format_value(with_.mse) if with_.status == "ok" else "",
            "with_mae": _format_value(with_.mae) if with_.status == "ok" else "",
            "wo_mse_mark": wo.mse_mark,
            "wo_mae_mark": wo.mae_mark,
            "with_mse_mark": with_.mse_mark,
            "with_mae_mark": with_.mae_mark,
            "wo_status": wo.status,
            "with_status": with_.status,
            "wo_n_ok": str(wo.n_ok),
            "wo_n_total": str(wo.n_total),
            "with_n_ok": str(with_.n_ok),
            "with_n_total": str(with_.n_total),
        })
    return rows


def write_summary_csv(table: SummaryTable, path) -> None:
    import csv
    from pathlib import Path

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=SUMMARY_CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(summary_csv_rows(table))
