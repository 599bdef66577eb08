"""Density CSV files and distances between densities."""
from __future__ import annotations

import csv
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DisjointGrids, MalformedCSV

HEADER = ("x", "rho", "converged", "iterations")


def fmt(v) -> str:
    """12 significant digits; ``nan`` for missing values."""
    v = float(v)
    if not np.isfinite(v):
        return "nan"
    s = f"{v:.12g}"
    return "0" if s == "-0" else s


def write_density_csv(path, grid, rho, converged=None, iterations=None):
    grid = np.asarray(grid)
    if converged is None:
        converged = np.ones(len(grid), dtype=bool)
    if iterations is None:
        iterations = np.zeros(len(grid), dtype=np.int64)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(HEADER) + "\n")
        for x, r, c, it in zip(grid, rho, converged, iterations):
            fh.write(f"{fmt(x)},{fmt(r)},{int(bool(c))},{int(it)}\n")


def read_density_csv(path):
    """Returns ``(x, rho)`` arrays. Rows must be strictly ascending in x."""
    xs, rs = [], []
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header[:2]] != ["x", "rho"]:
                raise MalformedCSV(f"{path}: header must start with 'x,rho'")
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                try:
                    xs.append(float(row[0]))
                    rs.append(float(row[1]))
                except (ValueError, IndexError):
                    raise MalformedCSV(f"{path}:{lineno}: bad row {row!r}") from None
    except OSError as exc:
        raise MalformedCSV(f"{path}: {exc}") from exc
    x = np.array(xs)
    if len(x) < 2:
        raise MalformedCSV(f"{path}: need at least two rows")
    if np.any(np.diff(x) <= 0):
        raise MalformedCSV(f"{path}: x column is not strictly ascending")
    return x, np.array(rs)


@dataclass(frozen=True)
class CompareReport:
    metric: str
    value: float
    xmin: float
    xmax: float
    dx: float
    points: int

    def to_dict(self):
        return asdict(self)


def _spacing(x):
    return float(np.median(np.diff(x)))


def compare_densities(xa, ra, xb, rb, metric="L1") -> CompareReport:
    """Distance between two sampled densities on their common range.

    Both are interpolated linearly onto a uniform grid over the overlap,
    spaced by the finer of the two input spacings. L1 uses the trapezoid
    rule; Linf is the largest pointwise gap. NaN samples count as zero.
    """
    metric = metric.upper().replace("LINF", "Linf")
    if metric not in ("L1", "Linf"):
        raise ValueError(f"unknown metric {metric!r}")
    lo = max(xa[0], xb[0])
    hi = min(xa[-1], xb[-1])
    dx = min(_spacing(xa), _spacing(xb))
    if hi - lo < dx * (1 - 1e-9):
        raise DisjointGrids(f"grids overlap on [{lo}, {hi}], less than one step {dx}")
    count = int(np.floor((hi - lo) / dx + 1e-9)) + 1
    x = lo + dx * np.arange(count)
    x[-1] = min(x[-1], hi)
    a = np.interp(x, xa, np.nan_to_num(ra))
    b = np.interp(x, xb, np.nan_to_num(rb))
    diff = np.abs(a - b)
    value = float(np.trapezoid(diff, x)) if metric == "L1" else float(diff.max())
    return CompareReport(metric, value, float(x[0]), float(x[-1]), float(dx), int(count))


def compare(path_a, path_b, metric="L1") -> CompareReport:
    xa, ra = read_density_csv(path_a)
    xb, rb = read_density_csv(path_b)
    return compare_densities(xa, ra, xb, rb, metric)
