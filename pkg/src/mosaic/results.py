"""Summaries of per-region bounds: safe set, worst case over a query box,
volume histogram, and CSV / JSON / SVG export."""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Sequence

from .errors import BadBins, DimMismatch, Uncovered
from .geometry import Box, box_intersects, box_volume
from .refinement import RegionResult
from .spatial_index import RStarTree


def safe_set(results: Sequence[RegionResult], p_safe: float) -> list[Box]:
    """Boxes whose bound is strictly below ``p_safe``."""
    return [r.box for r in results if r.upper_bound < p_safe]


def safe_volume(results: Sequence[RegionResult], p_safe: float) -> float:
    return sum(box_volume(b) for b in safe_set(results, p_safe))


def worst_case(results: Sequence[RegionResult], query: Box) -> float:
    """Largest bound among regions meeting ``query`` (closed intersection).

    Raises :class:`Uncovered` if part of ``query`` lies outside every region.
    """
    if not results:
        raise Uncovered("no analysed regions")
    if query.n != results[0].box.n:
        raise DimMismatch(f"query dimension {query.n} != region dimension {results[0].box.n}")
    idx = RStarTree(query.n)
    for r in results:
        idx.insert(r.box, r)
    hits = idx.window_query(query)
    if not hits:
        raise Uncovered(f"{query} lies outside the analysed regions")
    gaps = idx.coverage_gaps(query, hits)
    if gaps:
        raise Uncovered(f"{query} is not covered; first gap {gaps[0]}")
    return max(h.payload.upper_bound for h in hits)


def _check_bins(edges):
    edges = [float(e) for e in edges]
    if len(edges) < 2:
        raise BadBins("need at least two bin edges")
    if any(b <= a for a, b in zip(edges, edges[1:])):
        raise BadBins(f"bin edges must increase strictly: {edges}")
    if edges[0] > 0.0 or edges[-1] < 1.0:
        raise BadBins(f"bin edges must cover [0, 1]: {edges}")
    return edges


def volume_histogram(results: Sequence[RegionResult], bin_edges) -> list[tuple[tuple[float, float], float]]:
    """Total region volume per bound bin.

    Bins are left-closed and right-open except the last, which is closed.
    """
    edges = _check_bins(bin_edges)
    totals = [0.0] * (len(edges) - 1)
    for r in results:
        ub = r.upper_bound
        for i in range(len(totals)):
            last = i == len(totals) - 1
            if edges[i] <= ub and (ub < edges[i + 1] or (last and ub <= edges[i + 1])):
                totals[i] += box_volume(r.box)
                break
    return [((edges[i], edges[i + 1]), totals[i]) for i in range(len(totals))]


# -- export ----------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(x, ".17g")


def _ordered(results):
    return sorted(results, key=lambda r: (r.box.lo, r.box.hi))


def to_csv(results: Sequence[RegionResult]) -> str:
    if not results:
        return ""
    n = results[0].box.n
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"dim{d}_{s}" for d in range(n) for s in ("lo", "hi")]
               + ["upper_bound", "verdict", "generation"])
    for r in _ordered(results):
        row = []
        for lo, hi in zip(r.box.lo, r.box.hi):
            row += [_fmt(lo), _fmt(hi)]
        w.writerow(row + [_fmt(r.upper_bound), r.verdict, r.refinement_generation])
    return buf.getvalue()


def to_json(results: Sequence[RegionResult]) -> str:
    rows = [{"box": r.box.pairs(), "upper_bound": r.upper_bound, "verdict": r.verdict,
             "generation": r.refinement_generation} for r in _ordered(results)]
    return json.dumps({"regions": rows}, indent=1) + "\n"


def from_json(text: str) -> list[RegionResult]:
    return [RegionResult(Box.from_pairs(r["box"]), r["upper_bound"], r["verdict"], r["generation"])
            for r in json.loads(text)["regions"]]


def bound_colour(p: float) -> str:
    """Linear blue (0) to red (1) ramp."""
    p = min(max(p, 0.0), 1.0)
    return "#{:02x}00{:02x}".format(round(255 * p), round(255 * (1 - p)))


def to_svg(results: Sequence[RegionResult], labels=("x0", "x1"), size: int = 480) -> str:
    """Heatmap of a 2-D region set in native coordinates."""
    if not results or results[0].box.n != 2:
        raise DimMismatch("heatmap export needs 2-D regions")
    xlo = min(r.box.lo[0] for r in results)
    xhi = max(r.box.hi[0] for r in results)
    ylo = min(r.box.lo[1] for r in results)
    yhi = max(r.box.hi[1] for r in results)
    pad = 50
    sx = size / (xhi - xlo)
    sy = size / (yhi - ylo)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size + 2 * pad}" '
           f'height="{size + 2 * pad}">',
           "<!-- colour = upper bound on failure probability, linear scale from "
           "0 (#0000ff, blue) to 1 (#ff0000, red): rgb(255p, 0, 255(1-p)) -->"]
    for r in _ordered(results):
        x = pad + (r.box.lo[0] - xlo) * sx
        y = pad + (yhi - r.box.hi[1]) * sy
        w = (r.box.hi[0] - r.box.lo[0]) * sx
        h = (r.box.hi[1] - r.box.lo[1]) * sy
        out.append(f'<rect x="{x:.3f}" y="{y:.3f}" width="{w:.3f}" height="{h:.3f}" '
                   f'fill="{bound_colour(r.upper_bound)}" stroke="#ffffff" stroke-width="0.3">'
                   f"<title>{_fmt(r.upper_bound)} ({r.verdict})</title></rect>")
    mid = pad + size / 2
    out.append(f'<text x="{mid}" y="{size + pad + 30}" text-anchor="middle">{labels[0]} '
               f"[{xlo:.4g}, {xhi:.4g}]</text>")
    out.append(f'<text x="15" y="{mid}" transform="rotate(-90 15 {mid})" '
               f'text-anchor="middle">{labels[1]} [{ylo:.4g}, {yhi:.4g}]</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_results(results: Sequence[RegionResult], out_dir, labels=None) -> list[Path]:
    """Write ``regions.csv``, ``regions.json`` and, for 2-D regions, ``heatmap.svg``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [out_dir / "regions.csv", out_dir / "regions.json"]
    paths[0].write_text(to_csv(results))
    paths[1].write_text(to_json(results))
    if results and results[0].box.n == 2:
        svg = out_dir / "heatmap.svg"
        svg.write_text(to_svg(results, labels or ("x0", "x1")))
        paths.append(svg)
    return paths


def total_volume(results: Sequence[RegionResult]) -> float:
    return sum(box_volume(r.box) for r in results)


def regions_meeting(results: Sequence[RegionResult], query: Box) -> list[RegionResult]:
    return [r for r in results if box_intersects(r.box, query)]
