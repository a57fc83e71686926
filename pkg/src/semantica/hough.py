"""Wall-line extraction from occupancy grids by a two-level Hough transform.

Lines are (rho, theta) in the normal form x*cos(theta) + y*sin(theta) = rho
with theta in [0, pi) and rho signed, in world coordinates. Extraction is
greedy: every coarse accumulator peak above the support threshold is
refined (fine theta/rho scan, then an iterated total-least-squares fit),
the refined candidate with the most inlier cells is emitted, its inliers
are removed, and the scan repeats. Selecting on refined support keeps
long walls from aliasing into spurious diagonal lines.

Binning contract (shared with the brute-force oracle used in tests):
theta bins are t*theta_step for integer t; a point votes for rho bin
floor((x*cos + y*sin + rho_max) / rho_step).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import OccupancyGrid


@dataclass(frozen=True)
class HoughConfig:
    coarse_theta_deg: float = 4.0
    coarse_rho_factor: float = 4.0   # x resolution
    fine_theta_deg: float = 0.5
    fine_rho_factor: float = 1.0     # x resolution
    min_support_m: float = 0.5       # occupied-cell run length worth of votes
    snap_deg: float = 2.0            # near-axis snap window
    merge_theta_deg: float = 1.0
    merge_rho_factor: float = 2.0    # x resolution
    inlier_factor: float = 1.5       # x resolution, distance-to-line cut
    fit_band_factor: float = 1.2     # x resolution, first-pass fit band

    def min_support_cells(self, resolution: float) -> int:
        return max(1, round(self.min_support_m / resolution))


@dataclass(frozen=True)
class WallLine:
    rho: float
    theta: float
    support: int
    extent: tuple[tuple[float, float], tuple[float, float]]

    def distance(self, x, y):
        return np.abs(np.asarray(x) * math.cos(self.theta)
                      + np.asarray(y) * math.sin(self.theta) - self.rho)

    def projection(self, x, y):
        """Coordinate along the line direction (-sin, cos)."""
        return -np.asarray(x) * math.sin(self.theta) + np.asarray(y) * math.cos(self.theta)


def canonical_line(rho: float, theta: float) -> tuple[float, float]:
    """Fold theta into [0, pi), flipping rho's sign when wrapping."""
    while theta >= math.pi:
        theta -= math.pi
        rho = -rho
    while theta < 0.0:
        theta += math.pi
        rho = -rho
    return rho, theta


def rho_bound(grid: OccupancyGrid) -> float:
    xmin, ymin, xmax, ymax = grid.extent
    return math.hypot(max(abs(xmin), abs(xmax)), max(abs(ymin), abs(ymax))) + 1.0


def occupied_points(grid: OccupancyGrid) -> np.ndarray:
    """(N, 2) world centers of occupied cells, row-major order."""
    ii, jj = np.nonzero(grid.occupied_mask())
    xs = grid.origin.x + (jj + 0.5) * grid.resolution
    ys = grid.origin.y + (ii + 0.5) * grid.resolution
    return np.column_stack([xs, ys])


def detect_walls(grid: OccupancyGrid, config: HoughConfig | None = None) -> list[WallLine]:
    cfg = config or HoughConfig()
    points = occupied_points(grid)
    lines = extract_lines(points, grid.resolution, rho_bound(grid), cfg)
    lines = merge_collinear(lines, grid.resolution, cfg)
    return sorted(lines, key=lambda l: (-l.support, l.theta, l.rho))


def extract_lines(points: np.ndarray, resolution: float, rho_max: float,
                  cfg: HoughConfig) -> list[WallLine]:
    if len(points) == 0:
        return []
    min_support = cfg.min_support_cells(resolution)
    coarse_theta = math.radians(cfg.coarse_theta_deg)
    fine_theta = math.radians(cfg.fine_theta_deg)
    coarse_rho = cfg.coarse_rho_factor * resolution
    fine_rho = cfg.fine_rho_factor * resolution
    n_theta = round(math.pi / coarse_theta)
    thetas = [t * coarse_theta for t in range(n_theta)]
    # scalar trig so vectorized and per-point arithmetic agree bit-for-bit
    cos_c = np.array([math.cos(t) for t in thetas])
    sin_c = np.array([math.sin(t) for t in thetas])
    k_range = range(-round(coarse_theta / fine_theta), round(coarse_theta / fine_theta) + 1)

    def refine(remaining, bins, t_idx, r_idx):
        """Fine scan + line fit for one coarse candidate; returns
        (support, inlier_mask, rho, theta)."""
        window = remaining[np.abs(bins[:, t_idx] - r_idx) <= 1]
        theta0 = thetas[t_idx]
        fine: dict[tuple[int, int], int] = {}
        rms: dict[tuple[int, int], float] = {}
        for k in k_range:
            theta_f = theta0 + k * fine_theta
            c, s = math.cos(theta_f), math.sin(theta_f)
            rho_f = window[:, 0] * c + window[:, 1] * s
            fbins = np.floor((rho_f + rho_max) / fine_rho).astype(np.int64)
            vals, counts = np.unique(fbins, return_counts=True)
            for v, n in zip(vals.tolist(), counts.tolist()):
                fine[(k, v)] = n
                center = (v + 0.5) * fine_rho - rho_max
                dev = rho_f[fbins == v] - center
                rms[(k, v)] = round(float(np.sum(dev * dev) / n), 12)
        top = max(fine.values())
        # among count-tied bins the true angle packs its cells tightest
        k_best, r_best = min((key for key, n in fine.items() if n == top),
                             key=lambda key: (rms[key], key))
        theta = theta0 + k_best * fine_theta
        rho_center = (r_best + 0.5) * fine_rho - rho_max
        rho_center, theta = canonical_line(rho_center, theta)

        # the winning bin locates the line to a fraction of a degree; two
        # total-least-squares passes polish it: a wide band first (captures
        # the whole raster staircase, unbiased) then a narrow refit around
        # that fit (trims crossing-wall cells without running away)
        band = window[:0]
        for band_factor in (cfg.fit_band_factor, cfg.fit_band_factor / 2.0):
            c, s = math.cos(theta), math.sin(theta)
            rho_w = window[:, 0] * c + window[:, 1] * s
            band = window[np.abs(rho_w - rho_center) <= band_factor * resolution]
            if len(band) < 2:
                break
            rho_center, theta = _fit_line(band)
        theta = _snap_axis(theta, math.radians(cfg.snap_deg))
        c, s = math.cos(theta), math.sin(theta)
        if len(band) >= 2:
            rho_center = float(np.mean(band[:, 0] * c + band[:, 1] * s))
        rho_center, theta = canonical_line(rho_center, theta)

        c, s = math.cos(theta), math.sin(theta)
        rho_pts = remaining[:, 0] * c + remaining[:, 1] * s
        inlier_mask = np.abs(rho_pts - rho_center) <= cfg.inlier_factor * resolution
        support = int(inlier_mask.sum())
        if support:
            dev = rho_pts[inlier_mask] - rho_center
            fit_rms = round(float(np.sum(dev * dev) / support), 12)
        else:
            fit_rms = 0.0
        return support, fit_rms, inlier_mask, rho_pts, theta

    remaining = points.copy()
    out: list[WallLine] = []
    while len(remaining) >= min_support:
        rho_all = remaining[:, 0:1] * cos_c + remaining[:, 1:2] * sin_c  # (N, T)
        bins = np.floor((rho_all + rho_max) / coarse_rho).astype(np.int64)
        n_rho = int(math.ceil(2.0 * rho_max / coarse_rho)) + 2
        acc = np.zeros((n_theta, n_rho), dtype=np.int64)
        np.add.at(acc, (np.broadcast_to(np.arange(n_theta), bins.shape).ravel(), bins.ravel()), 1)
        if int(acc.max()) < min_support:
            break
        # refine every candidate peak and emit the best: most inliers,
        # then tightest fit. Support keeps shallow diagonal aliases (many
        # coarse votes, few line inliers) from beating the walls whose
        # cells they borrow; the residual keeps tilted window-truncated
        # fits from beating the straight one.
        best = None
        for t_idx, r_idx in _peak_bins(acc, min_support):
            support, fit_rms, inlier_mask, rho_pts, theta = refine(remaining, bins, t_idx, r_idx)
            key = (-support, fit_rms)
            if best is None or key < best[0]:
                best = (key, inlier_mask, rho_pts, theta)
        (neg_support, _), inlier_mask, rho_pts, theta = best
        support = -neg_support
        if support < min_support:
            break
        rho = float(np.sum(rho_pts[inlier_mask]) / support)
        c, s = math.cos(theta), math.sin(theta)
        inliers = remaining[inlier_mask]
        proj = -inliers[:, 0] * s + inliers[:, 1] * c
        smin, smax = float(proj.min()), float(proj.max())
        extent = ((rho * c - smin * s, rho * s + smin * c),
                  (rho * c - smax * s, rho * s + smax * c))
        out.append(WallLine(rho=rho, theta=theta, support=support, extent=extent))
        remaining = remaining[~inlier_mask]
    return out


def _peak_bins(acc: np.ndarray, min_support: int) -> list[tuple[int, int]]:
    """Accumulator bins at or above threshold that are 8-neighborhood maxima.

    Theta wraps (theta = 0 and theta = pi index the same orientations), so
    the neighborhood comparison wraps around the theta axis too.
    """
    n_theta, n_rho = acc.shape
    out = []
    for t, r in np.argwhere(acc >= min_support).tolist():
        v = acc[t, r]
        is_peak = True
        for dt in (-1, 0, 1):
            for dr in (-1, 0, 1):
                if dt == 0 and dr == 0:
                    continue
                tt = (t + dt) % n_theta
                rr = r + dr
                if 0 <= rr < n_rho and acc[tt, rr] > v:
                    is_peak = False
                    break
            if not is_peak:
                break
        if is_peak:
            out.append((t, r))
    return out


def _snap_axis(theta: float, snap: float) -> float:
    for axis in (0.0, math.pi / 2, math.pi):
        if abs(theta - axis) <= snap:
            return 0.0 if axis == math.pi else axis
    return theta


def _fit_line(points: np.ndarray) -> tuple[float, float]:
    """Total-least-squares line through points: normal-form (rho, theta).

    The normal direction is the minor axis of the point scatter; the
    major-axis angle comes from the closed-form 2x2 eigen solution.
    """
    mx = float(np.mean(points[:, 0]))
    my = float(np.mean(points[:, 1]))
    dx = points[:, 0] - mx
    dy = points[:, 1] - my
    sxx = float(np.sum(dx * dx))
    syy = float(np.sum(dy * dy))
    sxy = float(np.sum(dx * dy))
    major = 0.5 * math.atan2(2.0 * sxy, sxx - syy)
    theta = major + math.pi / 2.0
    rho = mx * math.cos(theta) + my * math.sin(theta)
    return canonical_line(rho, theta)


def merge_collinear(lines: list[WallLine], resolution: float, cfg: HoughConfig) -> list[WallLine]:
    """Collapse near-duplicate lines, keeping the best-supported one."""
    merge_theta = math.radians(cfg.merge_theta_deg)
    merge_rho = cfg.merge_rho_factor * resolution
    kept: list[WallLine] = []
    for line in sorted(lines, key=lambda l: (-l.support, l.theta, l.rho)):
        duplicate = False
        for other in kept:
            dt = abs(line.theta - other.theta)
            drho = abs(line.rho - other.rho)
            dt_wrap = math.pi - dt
            drho_wrap = abs(line.rho + other.rho)
            if (dt <= merge_theta and drho <= merge_rho) or \
               (dt_wrap <= merge_theta and drho_wrap <= merge_rho):
                duplicate = True
                break
        if not duplicate:
            kept.append(line)
    return kept
