import math

import numpy as np
import pytest

from semantica.geometry import Pose2D
from semantica.grid import FREE, OCCUPIED, OccupancyGrid
from semantica.hough import (
    HoughConfig,
    WallLine,
    canonical_line,
    detect_walls,
    occupied_points,
    rho_bound,
)

# ---------------------------------------------------------------------------
# Brute-force oracle: the same extraction contract, written as plain Python
# loops with per-point voting. Used here and by the acceptance suite.
# ---------------------------------------------------------------------------


def oracle_detect(points, resolution, rho_max, cfg: HoughConfig):
    points = [tuple(p) for p in points]
    min_support = cfg.min_support_cells(resolution)
    coarse_theta = math.radians(cfg.coarse_theta_deg)
    fine_theta = math.radians(cfg.fine_theta_deg)
    coarse_rho = cfg.coarse_rho_factor * resolution
    fine_rho = cfg.fine_rho_factor * resolution
    n_theta = round(math.pi / coarse_theta)
    thetas = [t * coarse_theta for t in range(n_theta)]
    k_max = round(coarse_theta / fine_theta)

    def refine(remaining, t_idx, r_idx):
        theta0 = thetas[t_idx]

        def coarse_bin(p):
            rho = p[0] * math.cos(theta0) + p[1] * math.sin(theta0)
            return math.floor((rho + rho_max) / coarse_rho)

        window = [p for p in remaining if abs(coarse_bin(p) - r_idx) <= 1]
        fine = {}
        dev2 = {}
        for k in range(-k_max, k_max + 1):
            theta_f = theta0 + k * fine_theta
            c, s = math.cos(theta_f), math.sin(theta_f)
            for x, y in window:
                rho_f = x * c + y * s
                b = math.floor((rho_f + rho_max) / fine_rho)
                fine[(k, b)] = fine.get((k, b), 0) + 1
                center = (b + 0.5) * fine_rho - rho_max
                dev2[(k, b)] = dev2.get((k, b), 0.0) + (rho_f - center) ** 2
        top = max(fine.values())
        k_best, r_best = min((key for key, n in fine.items() if n == top),
                             key=lambda key: (round(dev2[key] / top, 12), key))
        theta = theta0 + k_best * fine_theta
        rho_center = (r_best + 0.5) * fine_rho - rho_max
        rho_center, theta = canonical_line(rho_center, theta)

        band = []
        for band_factor in (cfg.fit_band_factor, cfg.fit_band_factor / 2.0):
            c, s = math.cos(theta), math.sin(theta)
            band = [p for p in window
                    if abs(p[0] * c + p[1] * s - rho_center) <= band_factor * resolution]
            if len(band) < 2:
                break
            mx = sum(p[0] for p in band) / len(band)
            my = sum(p[1] for p in band) / len(band)
            sxx = sum((p[0] - mx) ** 2 for p in band)
            syy = sum((p[1] - my) ** 2 for p in band)
            sxy = sum((p[0] - mx) * (p[1] - my) for p in band)
            major = 0.5 * math.atan2(2.0 * sxy, sxx - syy)
            rho_center, theta = canonical_line(
                mx * math.cos(major + math.pi / 2) + my * math.sin(major + math.pi / 2),
                major + math.pi / 2)
        for axis in (0.0, math.pi / 2, math.pi):
            if abs(theta - axis) <= math.radians(cfg.snap_deg):
                theta = 0.0 if axis == math.pi else axis
                break
        c, s = math.cos(theta), math.sin(theta)
        if len(band) >= 2:
            rho_center = sum(p[0] * c + p[1] * s for p in band) / len(band)
        rho_center, theta = canonical_line(rho_center, theta)

        c, s = math.cos(theta), math.sin(theta)
        inliers = [p for p in remaining
                   if abs(p[0] * c + p[1] * s - rho_center) <= cfg.inlier_factor * resolution]
        if inliers:
            dev2 = sum((p[0] * c + p[1] * s - rho_center) ** 2 for p in inliers)
            fit_rms = round(dev2 / len(inliers), 12)
        else:
            fit_rms = 0.0
        return len(inliers), fit_rms, inliers, theta

    remaining = list(points)
    lines = []
    while len(remaining) >= min_support:
        acc = {}
        for x, y in remaining:
            for t, theta in enumerate(thetas):
                rho = x * math.cos(theta) + y * math.sin(theta)
                b = math.floor((rho + rho_max) / coarse_rho)
                acc[(t, b)] = acc.get((t, b), 0) + 1
        if max(acc.values()) < min_support:
            break
        peaks = []
        for (t, r), v in acc.items():
            if v < min_support:
                continue
            neighbors = [acc.get(((t + dt) % n_theta, r + dr), 0)
                         for dt in (-1, 0, 1) for dr in (-1, 0, 1)
                         if not (dt == 0 and dr == 0)]
            if all(v >= nv for nv in neighbors):
                peaks.append((t, r))
        best = None
        for t_idx, r_idx in sorted(peaks):
            support, fit_rms, inliers, theta = refine(remaining, t_idx, r_idx)
            key = (-support, fit_rms)
            if best is None or key < best[0]:
                best = (key, inliers, theta)
        (neg_support, _), inliers, theta = best
        support = -neg_support
        if support < min_support:
            break
        c, s = math.cos(theta), math.sin(theta)
        rho = sum(p[0] * c + p[1] * s for p in inliers) / len(inliers)
        projs = [-p[0] * s + p[1] * c for p in inliers]
        smin, smax = min(projs), max(projs)
        lines.append(WallLine(rho=rho, theta=theta, support=len(inliers),
                              extent=((rho * c - smin * s, rho * s + smin * c),
                                      (rho * c - smax * s, rho * s + smax * c))))
        inset = set(inliers)
        remaining = [p for p in remaining if p not in inset]

    # duplicate suppression, best support first
    merged = []
    for line in sorted(lines, key=lambda l: (-l.support, l.theta, l.rho)):
        dup = False
        for other in merged:
            dt = abs(line.theta - other.theta)
            if (dt <= math.radians(cfg.merge_theta_deg)
                    and abs(line.rho - other.rho) <= cfg.merge_rho_factor * resolution):
                dup = True
            if (math.pi - dt <= math.radians(cfg.merge_theta_deg)
                    and abs(line.rho + other.rho) <= cfg.merge_rho_factor * resolution):
                dup = True
        if not dup:
            merged.append(line)
    return sorted(merged, key=lambda l: (-l.support, l.theta, l.rho))


def make_grid(shape=(100, 100), resolution=0.05, walls=()):
    """Free map with rasterized wall segments: (rho, theta, smin, smax).

    The segment interval is along s = -x*sin(theta) + y*cos(theta).
    """
    h, w = shape
    cells = np.full((h, w), FREE, dtype=np.uint8)
    ys = (np.arange(h)[:, None] + 0.5) * resolution
    xs = (np.arange(w)[None, :] + 0.5) * resolution
    for rho, theta, smin, smax in walls:
        d = np.abs(xs * math.cos(theta) + ys * math.sin(theta) - rho)
        s = -xs * math.sin(theta) + ys * math.cos(theta)
        mask = (d <= resolution / 2) & (s >= smin) & (s <= smax)
        cells[mask] = OCCUPIED
    return OccupancyGrid(cells=cells, resolution=resolution, origin=Pose2D(0, 0, 0))


def s_range(theta, width_m, height_m):
    """Along-line coordinate range of the map rectangle for a given angle."""
    corners = [(0, 0), (width_m, 0), (0, height_m), (width_m, height_m)]
    vals = [-x * math.sin(theta) + y * math.cos(theta) for x, y in corners]
    return min(vals), max(vals)


def assert_same_lines(got, expected):
    assert len(got) == len(expected)
    for a, b in zip(got, expected):
        assert a.support == b.support
        assert a.theta == pytest.approx(b.theta, abs=1e-12)
        assert a.rho == pytest.approx(b.rho, abs=1e-12)


class TestDetectWalls:
    def test_empty_map(self):
        grid = make_grid()
        assert detect_walls(grid) == []

    def test_single_horizontal_wall(self):
        # occupied row at world y = 2.0 spanning x in [1, 5]
        grid = make_grid(walls=[(2.025, math.pi / 2, -5.0, -1.0)])
        lines = detect_walls(grid)
        assert len(lines) == 1
        line = lines[0]
        assert line.theta == pytest.approx(math.pi / 2)
        assert abs(line.rho - 2.0) <= 0.05
        assert line.support >= 70

    def test_two_perpendicular_walls(self):
        grid = make_grid(walls=[(2.025, math.pi / 2, -4.5, -0.5),
                                (3.025, 0.0, 0.5, 4.5)])
        lines = detect_walls(grid)
        assert len(lines) == 2
        thetas = sorted(l.theta for l in lines)
        assert thetas[0] == pytest.approx(0.0)
        assert thetas[1] == pytest.approx(math.pi / 2)

    def test_diagonal_wall(self):
        theta = math.radians(40.0)
        grid = make_grid(walls=[(2.0, theta, -1.0, 3.0)])
        lines = detect_walls(grid)
        assert len(lines) == 1
        assert abs(lines[0].theta - theta) <= math.radians(0.5)
        assert abs(lines[0].rho - 2.0) <= 0.05

    def test_near_axis_snap(self):
        # a short wall drawn 1 degree off vertical snaps to the exact axis
        theta = math.radians(1.0)
        grid = make_grid(walls=[(2.0, theta, 0.5, 2.0)])
        lines = detect_walls(grid)
        assert len(lines) == 1
        assert lines[0].theta == 0.0

    def test_extent_endpoints_on_line(self):
        grid = make_grid(walls=[(2.025, math.pi / 2, -5.0, -1.0)])
        line = detect_walls(grid)[0]
        for x, y in line.extent:
            assert float(line.distance(x, y)) <= 0.025 + 1e-9

    def test_long_wall_produces_no_diagonal_aliases(self):
        # a full-width wall must yield exactly one line even though diagonal
        # bins crossing it collect above-threshold vote counts
        grid = make_grid(shape=(100, 100),
                         walls=[(2.525, math.pi / 2, -5.0, 0.0)])
        lines = detect_walls(grid)
        assert len(lines) == 1

    def test_deterministic(self):
        grid = make_grid(walls=[(2.025, math.pi / 2, -5.0, -1.0), (1.025, 0.0, 0.0, 4.0)])
        a = detect_walls(grid)
        b = detect_walls(grid)
        assert a == b

    def test_support_sorted_descending(self):
        grid = make_grid(walls=[(2.025, math.pi / 2, -2.0, -1.0),
                                (3.025, 0.0, 0.5, 4.5)])
        lines = detect_walls(grid)
        supports = [l.support for l in lines]
        assert supports == sorted(supports, reverse=True)


class TestOracleAgreement:
    def test_matches_brute_force_on_random_maps(self):
        rng = np.random.default_rng(77)
        cfg = HoughConfig()
        for trial in range(8):
            n_walls = int(rng.integers(1, 5))
            walls = []
            for _ in range(n_walls):
                axis = rng.integers(0, 3)
                if axis == 0:
                    theta = 0.0
                elif axis == 1:
                    theta = math.pi / 2
                else:
                    theta = float(rng.uniform(math.radians(15), math.radians(75)))
                rho = float(rng.uniform(0.8, 3.8))
                lo, hi = s_range(theta, 5.0, 5.0)
                length = float(rng.uniform(1.2, 3.0))
                start = float(rng.uniform(lo, hi - length))
                walls.append((rho, theta, start, start + length))
            grid = make_grid(shape=(100, 100), walls=walls)
            got = detect_walls(grid, cfg)
            expected = oracle_detect(occupied_points(grid), grid.resolution,
                                     rho_bound(grid), cfg)
            assert_same_lines(got, expected)
