"""Output writers: report.json, RFC-4180 CSV files and self-contained SVG plots."""

import csv
import json
import math
import os
from typing import Dict, List, Optional, Sequence, Tuple

from tqdm import tqdm

from src.config import REPORT_FILE, logger
from src.models import VerificationReport


def ensure_dir(out_dir: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    return out_dir


def write_report(report: VerificationReport, out_dir: str, filename: str = REPORT_FILE) -> Optional[str]:
    """Write the schema-versioned JSON report.

    Returns:
        str: Path to the report, or None if an error occurred
    """
    path = os.path.join(ensure_dir(out_dir), filename)
    try:
        with open(path, 'w') as f:
            json.dump(report.to_dict(), f, indent=2, sort_keys=True)
            f.write('\n')
        logger.info(f"Wrote report to {path}")
        return path
    except (IOError, TypeError) as e:
        logger.error(f"Error writing report: {e}")
        return None


def read_report(path: str) -> VerificationReport:
    with open(path, 'r') as f:
        return VerificationReport.from_dict(json.load(f))


def write_csv(rows: Sequence[Dict], headers: Sequence[str], path: str, config_hash: str,
              desc: str = "Exporting rows", progress: bool = True) -> Optional[str]:
    """Write rows to a CSV file with a config_hash column.

    Args:
        rows: Row dictionaries keyed by the header names (config_hash is filled in)
        headers: Column order
        path: Output file
        config_hash: Hash of the run configuration

    Returns:
        str: Path to the generated CSV file, or None if an error occurred
    """
    logger.info(f"Starting CSV export to {path}")
    ensure_dir(os.path.dirname(path) or '.')
    try:
        with open(path, 'w', newline='') as csvfile:
            writer = csv.DictWriter(csvfile, fieldnames=list(headers), lineterminator='\r\n')
            writer.writeheader()
            rows_written = 0
            with tqdm(total=len(rows), desc=desc, unit="rows", disable=not progress) as pbar:
                for row in rows:
                    writer.writerow({**row, 'config_hash': config_hash})
                    rows_written += 1
                    pbar.update(1)
        logger.info(f"CSV export completed. Wrote {rows_written} rows to {path}")
        return path
    except IOError as e:
        logger.error(f"Error writing to CSV file: {e}")
        return None


def _ticks(lo: float, hi: float, log: bool) -> List[float]:
    if log:
        return [10.0 ** k for k in range(math.floor(lo), math.ceil(hi) + 1)]
    step = (hi - lo) / 4 if hi > lo else 1.0
    return [lo + i * step for i in range(5)]


def svg_plot(series: Dict[str, Sequence[Tuple[float, float]]], title: str = '', xlabel: str = '',
             ylabel: str = '', logx: bool = False, logy: bool = False, scatter: bool = False,
             width: int = 640, height: int = 400) -> str:
    """Line (or scatter) plot of named (x, y) series as an SVG document string."""
    colors = ['#1f77b4', '#d62728', '#2ca02c', '#ff7f0e', '#9467bd', '#8c564b', '#17becf']
    margin = 60

    def tx(v):
        return math.log10(v) if logx else v

    def ty(v):
        return math.log10(v) if logy else v

    points = [(tx(x), ty(y)) for pts in series.values() for x, y in pts
              if (not logx or x > 0) and (not logy or y > 0) and math.isfinite(x) and math.isfinite(y)]
    if points:
        x0, x1 = min(p[0] for p in points), max(p[0] for p in points)
        y0, y1 = min(p[1] for p in points), max(p[1] for p in points)
    else:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def px(v):
        return margin + (v - x0) / (x1 - x0) * (width - 2 * margin)

    def py(v):
        return height - margin - (v - y0) / (y1 - y0) * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{_escape(title)}</text>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{height - 15}" text-anchor="middle">{_escape(xlabel)}</text>',
        f'<text x="15" y="{height / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 15 {height / 2:.1f})">{_escape(ylabel)}</text>',
    ]
    for v in _ticks(x0, x1, logx):
        lv = math.log10(v) if logx else v
        if x0 <= lv <= x1:
            parts.append(f'<text x="{px(lv):.1f}" y="{height - margin + 16}" text-anchor="middle">{v:.3g}</text>')
    for v in _ticks(y0, y1, logy):
        lv = math.log10(v) if logy else v
        if y0 <= lv <= y1:
            parts.append(f'<text x="{margin - 6}" y="{py(lv) + 4:.1f}" text-anchor="end">{v:.3g}</text>')
    for k, (name, pts) in enumerate(series.items()):
        color = colors[k % len(colors)]
        coords = [(px(tx(x)), py(ty(y))) for x, y in pts
                  if (not logx or x > 0) and (not logy or y > 0) and math.isfinite(x) and math.isfinite(y)]
        if scatter:
            parts.extend(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="2.5" fill="{color}"/>' for a, b in coords)
        elif coords:
            path = ' '.join(f'{a:.2f},{b:.2f}' for a, b in coords)
            parts.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{width - margin + 4}" y="{margin + 14 * k}" fill="{color}">{_escape(name)}</text>')
    parts.append('</svg>')
    return '\n'.join(parts) + '\n'


def _escape(text: str) -> str:
    return str(text).replace('&', '&amp;').replace('<', '&lt;').replace('>', '&gt;')


def write_svg(path: str, series: Dict[str, Sequence[Tuple[float, float]]], **kwargs) -> Optional[str]:
    ensure_dir(os.path.dirname(path) or '.')
    try:
        with open(path, 'w') as f:
            f.write(svg_plot(series, **kwargs))
        logger.info(f"Wrote plot to {path}")
        return path
    except IOError as e:
        logger.error(f"Error writing plot: {e}")
        return None
