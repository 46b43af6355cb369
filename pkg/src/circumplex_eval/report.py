"""Tables and radar-chart data for a :class:`~circumplex_eval.pipeline.StudyResult`.

Display rules: scores and statistics at 3 decimals; p-values at 3 decimals,
4 decimals between 1e-4 and 1e-3, and one significant digit in scientific
form below 1e-4.  ``**`` marks p < 0.01 and ``*`` marks 0.01 <= p < 0.05.

CSV output keeps full precision (shortest round-trip repr) and writes the
significance marker of every p-value column in an adjacent ``<name> sig``
column, so a parsed CSV reproduces the rendered table exactly.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .circumplex import Axis, PaqAttribute, axis_of
from .errors import SelectionError
from .pipeline import AttributeAnalysis, OmnibusResult, StudyResult
from .ranktests import Method
from .scoring import COMBINED, RADAR_CRITERIA, Criterion

STAR_LEVELS = ((0.01, "**"), (0.05, "*"))


def stars(p: float | None) -> str:
    if p is None or math.isnan(p):
        return ""
    for level, mark in STAR_LEVELS:
        if p < level:
            return mark
    return ""


def format_p(p: float) -> str:
    if p == 0.0:
        return "0"
    if p < 1e-4:
        return f"{p:.0e}"
    if p < 1e-3:
        return f"{p:.4f}"
    return f"{p:.3f}"


def format_value(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.3f}"


@dataclass(frozen=True)
class Column:
    name: str
    kind: str = "label"  # label | value | p


@dataclass(frozen=True)
class RenderedTable:
    title: str
    columns: tuple[Column, ...]
    rows: tuple[tuple, ...]

    def display(self, row: int, col: int) -> str:
        value = self.rows[row][col]
        kind = self.columns[col].kind
        if value is None:
            return ""
        if kind == "label":
            return str(value)
        if kind == "p":
            return stars(value) + format_p(value)
        return format_value(value)

    def star(self, row: int, col: int) -> str:
        return stars(self.rows[row][col]) if self.columns[col].kind == "p" else ""

    def find(self, **labels: str) -> list[tuple]:
        """Rows whose named label columns equal the given values."""
        idx = {c.name: i for i, c in enumerate(self.columns)}
        out = []
        for row in self.rows:
            if all(row[idx[k]] == v for k, v in labels.items()):
                out.append(row)
        return out

    def column_index(self, name: str) -> int:
        for i, c in enumerate(self.columns):
            if c.name == name:
                return i
        raise KeyError(name)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        header = []
        for c in self.columns:
            header.append(c.name)
            if c.kind == "p":
                header.append(f"{c.name} sig")
        writer.writerow(header)
        for row in self.rows:
            out = []
            for c, v in zip(self.columns, row):
                if v is None:
                    out.append("")
                elif c.kind == "label":
                    out.append(str(v))
                else:
                    out.append(repr(float(v)))
                if c.kind == "p":
                    out.append(stars(v))
            writer.writerow(out)
        return buf.getvalue()

    def to_markdown(self) -> str:
        lines = [f"**{self.title}**", ""]
        lines.append("| " + " | ".join(c.name for c in self.columns) + " |")
        lines.append("|" + "|".join("---" if c.kind == "label" else "---:" for c in self.columns) + "|")
        for i in range(len(self.rows)):
            cells = [self.display(i, j).replace("|", "\\|") for j in range(len(self.columns))]
            lines.append("| " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        grid = [[c.name for c in self.columns]]
        grid += [[self.display(i, j) for j in range(len(self.columns))] for i in range(len(self.rows))]
        widths = [max(len(r[j]) for r in grid) for j in range(len(self.columns))]
        lines = [self.title]
        for r in grid:
            lines.append("  ".join(cell.ljust(w) if self.columns[j].kind == "label" else cell.rjust(w)
                                   for j, (cell, w) in enumerate(zip(r, widths))).rstrip())
        return "\n".join(lines) + "\n"


ALL_CRITERIA = (Criterion.APPR, Criterion.UNDR, Criterion.CLAR, Criterion.ORTH, Criterion.ANTO,
                Criterion.NCON, Criterion.CONN, Criterion.IBAL)


def render_mean_scores(study: StudyResult) -> RenderedTable:
    countries = study.countries
    cols = [Column("Attribute"), Column("Criterion"), Column("Candidate"), Column(COMBINED, "value")]
    cols += [Column(c, "value") for c in countries]
    rows = []
    for a in study.analyses:
        for crit in a.criteria:
            for cand in a.candidates:
                means = a.mean_table[cand]
                row = [a.attribute.value, crit.value, cand, means[COMBINED].get(crit)]
                row += [means[c].get(crit) if c in means else None for c in countries]
                rows.append(tuple(row))
    return RenderedTable("Mean evaluation scores", tuple(cols), tuple(rows))


def _test_name(results: Sequence[OmnibusResult]) -> str:
    methods = {r.omnibus.method for r in results if not r.omnibus.degenerate}
    methods = methods or {r.omnibus.method for r in results}
    return "/".join(sorted(m.value for m in methods))


def _notes(results: Sequence[OmnibusResult]) -> str:
    notes = []
    for r in results:
        if r.omnibus.degenerate:
            notes.append(f"{r.criterion.value}: degenerate")
        elif r.omnibus.flags:
            notes.append(f"{r.criterion.value}: " + "; ".join(r.omnibus.flags))
    return " | ".join(notes)


def _cross_national(study: StudyResult) -> RenderedTable:
    cols = [Column("Attribute"), Column("Test")] + [Column(c.value, "p") for c in ALL_CRITERIA] + [Column("Notes")]
    rows = []
    for a in study.analyses:
        if a.cross_national_skipped:
            rows.append((a.attribute.value, "skipped") + (None,) * len(ALL_CRITERIA)
                        + (a.cross_national_skipped,))
            continue
        results = list(a.cross_national.values())
        ps = tuple(a.cross_national[c].omnibus.p_value if c in a.cross_national else None for c in ALL_CRITERIA)
        rows.append((a.attribute.value, _test_name(results)) + ps + (_notes(results),))
    return RenderedTable("Cross-national omnibus tests (p-values)", tuple(cols), tuple(rows))


def _posthoc_mww(study: StudyResult) -> RenderedTable:
    countries = study.countries
    cols = [Column("Attribute"), Column("Criterion"), Column("Candidate"), Column("Comparison"),
            Column("U", "value"), Column("p raw", "p"), Column("p adjusted", "p")]
    cols += [Column(f"mean {c}", "value") for c in countries]
    rows = []
    for a in study.analyses:
        for crit in a.criteria:
            res = a.cross_national.get(crit)
            if res is None or res.posthoc is None:
                continue
            for pr in res.posthoc:
                means = a.mean_table[pr.block]
                row = [a.attribute.value, crit.value, pr.block, f"{pr.pair[0]} vs {pr.pair[1]}",
                       pr.statistic, pr.p_raw, pr.p_adjusted]
                row += [means[c].get(crit) if c in means else None for c in countries]
                rows.append(tuple(row))
    return RenderedTable("Posthoc Mann-Whitney-Wilcoxon tests, cross-national", tuple(cols), tuple(rows))


_INTRA_COLUMNS = (Column("Attribute"), Column("Criterion"), Column("CCR"), Column("Test"), Column("Comparison"),
                  Column("Statistic", "value"), Column("eta2", "value"), Column("Effect"),
                  Column("p raw", "p"), Column("p adjusted", "p"))


def _intra_rows(a: AttributeAnalysis, res: OmnibusResult, ccr: str) -> list[tuple]:
    om = res.omnibus
    eff = om.effect_size
    rows = [(a.attribute.value, res.criterion.value, ccr, om.method.value, "",
             om.statistic, eff.eta_sq if eff else None, eff.band.value if eff else "",
             om.p_value, None)]
    for pr in res.posthoc or ():
        rows.append((a.attribute.value, res.criterion.value, ccr, Method.CONOVER_IMAN.value,
                     f"{pr.pair[0]} - {pr.pair[1]}", pr.statistic, None, "", pr.p_raw, pr.p_adjusted))
    return rows


def _intra_country(study: StudyResult) -> RenderedTable:
    rows = []
    for a in study.analyses:
        for crit in a.criteria:
            for ccr in a.countries:
                if ccr in a.intra_country:
                    rows += _intra_rows(a, a.intra_country[ccr][crit], ccr)
    return RenderedTable("Intra-country Kruskal-Wallis and posthoc Conover-Iman tests", _INTRA_COLUMNS, tuple(rows))


def _combined(study: StudyResult) -> RenderedTable:
    rows = []
    for a in study.analyses:
        if a.combined:
            for crit in a.criteria:
                rows += _intra_rows(a, a.combined[crit], COMBINED)
    return RenderedTable("Combined-population Kruskal-Wallis and posthoc Conover-Iman tests",
                         _INTRA_COLUMNS, tuple(rows))


def render_pvalue_tables(study: StudyResult) -> list[RenderedTable]:
    """Cross-national omnibus, posthoc MWW and intra-country tables.

    A fourth table with the combined-population tests is appended when the
    study was run in combined mode.
    """
    tables = [_cross_national(study), _posthoc_mww(study), _intra_country(study)]
    if any(a.combined for a in study.analyses):
        tables.append(_combined(study))
    return tables


# ---------------------------------------------------------------------------
# radar output

RADAR_SIZE = (960, 520)
RADAR_RADIUS = 170.0
RADAR_CENTRES = {Axis.MAIN: (240.0, 250.0), Axis.DERIVED: (720.0, 250.0)}
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")


@dataclass(frozen=True)
class RadarSeries:
    attribute: PaqAttribute
    candidate: str
    axis: Axis
    points: tuple[tuple[Criterion, float], ...]


def radar_series(study: StudyResult, selection: Mapping[str | PaqAttribute, str]) -> list[RadarSeries]:
    series = []
    chosen = []
    for key, cand in selection.items():
        try:
            attr = PaqAttribute.parse(key) if isinstance(key, str) else key
        except ValueError as exc:
            raise SelectionError(str(exc)) from None
        chosen.append((attr, cand))
    order = {a.attribute: i for i, a in enumerate(study.analyses)}
    for attr, cand in sorted(chosen, key=lambda ac: order.get(ac[0], len(order))):
        try:
            analysis = study.analysis(attr)
        except KeyError:
            raise SelectionError(f"attribute {attr.value!r} not in the study") from None
        if cand not in analysis.mean_table:
            raise SelectionError(f"unknown candidate {cand!r} for {attr.value}; "
                                 f"choose from {list(analysis.candidates)}")
        means = analysis.mean_table[cand][COMBINED]
        axis = axis_of(attr)
        pts = tuple((c, means.get(c)) for c in RADAR_CRITERIA[axis])
        series.append(RadarSeries(attr, cand, axis, pts))
    return series


def radar_csv(series: Sequence[RadarSeries]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(["attribute", "candidate", "axis", "criterion", "mean"])
    for s in series:
        for crit, value in s.points:
            writer.writerow([s.attribute.value, s.candidate, s.axis.value, crit.value, repr(float(value))])
    return buf.getvalue()


def _xy(centre, radius, k, n):
    # spoke 0 points up, the rest follow clockwise
    theta = 2.0 * math.pi * k / n
    return centre[0] + radius * math.sin(theta), centre[1] - radius * math.cos(theta)


def _f(v: float) -> str:
    return f"{v:.3f}"


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def radar_svg(series: Sequence[RadarSeries]) -> str:
    """Two radar panels (main axis left, derived axis right) as standalone SVG 1.1."""
    w, h = RADAR_SIZE
    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}" font-family="Helvetica, Arial, sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>',
    ]
    colour = 0
    for axis, title in ((Axis.MAIN, "Main axis"), (Axis.DERIVED, "Derived axis")):
        centre = RADAR_CENTRES[axis]
        crits = RADAR_CRITERIA[axis]
        n = len(crits)
        out.append(f'<g id="{axis.value.lower()}">')
        out.append(f'<text x="{_f(centre[0])}" y="{_f(24.0)}" text-anchor="middle" font-size="15">{title}</text>')
        for level in (0.25, 0.5, 0.75, 1.0):
            out.append(f'<circle cx="{_f(centre[0])}" cy="{_f(centre[1])}" r="{_f(level * RADAR_RADIUS)}" '
                       f'fill="none" stroke="#bbbbbb" stroke-width="0.8"/>')
            lx, ly = _xy(centre, level * RADAR_RADIUS, 0, n)
            out.append(f'<text x="{_f(lx + 4)}" y="{_f(ly - 3)}" fill="#888888" font-size="10">{level:.2f}</text>')
        for k, crit in enumerate(crits):
            x, y = _xy(centre, RADAR_RADIUS, k, n)
            out.append(f'<line x1="{_f(centre[0])}" y1="{_f(centre[1])}" x2="{_f(x)}" y2="{_f(y)}" '
                       f'stroke="#bbbbbb" stroke-width="0.8"/>')
            tx, ty = _xy(centre, RADAR_RADIUS + 18.0, k, n)
            anchor = "middle" if abs(tx - centre[0]) < 1.0 else ("start" if tx > centre[0] else "end")
            out.append(f'<text x="{_f(tx)}" y="{_f(ty + 4)}" text-anchor="{anchor}">{crit.value}</text>')
        legend_y = centre[1] + RADAR_RADIUS + 45.0
        for s in (s for s in series if s.axis is axis):
            stroke = PALETTE[colour % len(PALETTE)]
            colour += 1
            pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in
                           (_xy(centre, v * RADAR_RADIUS, k, n) for k, (_, v) in enumerate(s.points)))
            label = _esc(f"{s.attribute.value}: {s.candidate}")
            out.append(f'<polygon points="{pts}" fill="{stroke}" fill-opacity="0.15" stroke="{stroke}" '
                       f'stroke-width="2"><title>{label}</title></polygon>')
            out.append(f'<rect x="{_f(centre[0] - 150)}" y="{_f(legend_y - 9)}" width="10" height="10" fill="{stroke}"/>')
            out.append(f'<text x="{_f(centre[0] - 135)}" y="{_f(legend_y)}">{label}</text>')
            legend_y += 16.0
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_radar(study: StudyResult, selection: Mapping[str | PaqAttribute, str], fmt: str = "svg") -> str:
    series = radar_series(study, selection)
    if fmt.lower() == "csv":
        return radar_csv(series)
    if fmt.lower() == "svg":
        return radar_svg(series)
    raise ValueError(f"unknown radar format {fmt!r}")
