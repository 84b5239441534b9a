"""Kriging probability surfaces over the embedded map and their contours.

Each surface interpolates the indicator of one linguistic means for one
doculect by ordinary kriging with an exponential covariance, on a square
lattice over the map's bounding box padded by 5%. Contours at fixed
probability levels become closed polygons used for containment tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SurfaceError",
    "KrigSurface",
    "fit_surface",
    "contour",
    "contains",
    "polygon_area",
    "null_heat",
    "DEFAULT_LEVELS",
]

DEFAULT_LEVELS = (0.35, 0.32, 0.29)
PAD_FRACTION = 0.05


class SurfaceError(ValueError):
    pass


@dataclass
class KrigSurface:
    means_label: str
    xs: np.ndarray
    ys: np.ndarray
    prob: np.ndarray              # shape (len(ys), len(xs)), clamped to [0, 1]
    levels: tuple[float, ...]
    contours: dict[float, list[np.ndarray]] = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def region_mask(self, level: float) -> np.ndarray:
        return self.prob >= level

    def verify_nesting(self) -> bool:
        """Grid-node check that higher-level regions nest inside lower ones."""
        lv = sorted(self.levels, reverse=True)
        for hi, lo in zip(lv, lv[1:]):
            if np.any(self.region_mask(hi) & ~self.region_mask(lo)):
                return False
        return True

    def grid_to_tsv(self, path, header: str | None = None) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            if header:
                fh.write(f"# {header}\n")
            fh.write("x\ty\tprob\n")
            for iy, y in enumerate(self.ys):
                for ix, x in enumerate(self.xs):
                    fh.write(f"{x:.6f}\t{y:.6f}\t{self.prob[iy, ix]:.6f}\n")

    def contours_to_tsv(self, path, header: str | None = None) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            if header:
                fh.write(f"# {header}\n")
            fh.write("level\tpolygon\tx\ty\n")
            for level in self.levels:
                for pi, poly in enumerate(self.contours.get(level, [])):
                    for x, y in poly:
                        fh.write(f"{level:g}\t{pi}\t{x:.6f}\t{y:.6f}\n")


def _grid_axes(points: np.ndarray, grid: int) -> tuple[np.ndarray, np.ndarray]:
    x0, y0 = points.min(axis=0)
    x1, y1 = points.max(axis=0)
    spanx = (x1 - x0) or 1.0
    spany = (y1 - y0) or 1.0
    xs = np.linspace(x0 - PAD_FRACTION * spanx, x1 + PAD_FRACTION * spanx, grid)
    ys = np.linspace(y0 - PAD_FRACTION * spany, y1 + PAD_FRACTION * spany, grid)
    return xs, ys


def fit_surface(points, labels, target_means: str, grid: int = 200,
                levels: tuple[float, ...] = DEFAULT_LEVELS,
                rho: float | None = None, nugget_frac: float = 0.05,
                with_contours: bool = True) -> KrigSurface:
    """Ordinary kriging of the indicator for one means.

    The indicator is 1 where a point's label equals ``target_means`` and
    0 elsewhere (NULL labels are the string "NULL" and may be targeted
    like any other means). The covariance is sigma^2 * exp(-h / rho)
    with a nugget of ``nugget_frac * sigma^2``; rho defaults to the
    median pairwise distance between the labeled points. Predictions are
    clamped to [0, 1].
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise SurfaceError("points must be an (n, 2) array")
    n = pts.shape[0]
    if n < 5:
        raise SurfaceError("need at least 5 labeled points")
    labels = list(labels)
    if len(labels) != n:
        raise SurfaceError("labels must cover every point")
    z = np.array([1.0 if lab == target_means else 0.0 for lab in labels])
    if z.sum() < 1:
        raise SurfaceError(f"target means {target_means!r} never occurs")

    dists = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    if rho is None:
        iu = np.triu_indices(n, k=1)
        rho = float(np.median(dists[iu]))
        if rho <= 0.0:
            raise SurfaceError("degenerate configuration")
    sigma2 = float(z.var())
    if sigma2 < 1e-12:
        # constant indicator field; kriging weights are scale-invariant
        sigma2 = 1.0
    nugget = nugget_frac * sigma2

    cov = sigma2 * np.exp(-dists / rho)
    a = np.zeros((n + 1, n + 1))
    a[:n, :n] = cov + nugget * np.eye(n)
    a[n, :n] = 1.0
    a[:n, n] = 1.0

    xs, ys = _grid_axes(pts, grid)
    gx, gy = np.meshgrid(xs, ys)
    nodes = np.column_stack([gx.ravel(), gy.ravel()])
    node_d = np.sqrt(((nodes[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    b = np.empty((n + 1, nodes.shape[0]))
    b[:n] = sigma2 * np.exp(-node_d.T / rho)
    b[n] = 1.0

    weights = None
    for jitter in (0.0, 1e-8 * sigma2, 1e-6 * sigma2):
        try:
            aj = a.copy()
            aj[:n, :n] += jitter * np.eye(n)
            sol = np.linalg.solve(aj, b)
            if np.all(np.isfinite(sol)):
                weights = sol
                break
        except np.linalg.LinAlgError:
            continue
    if weights is None:
        raise SurfaceError("degenerate configuration")

    pred = z @ weights[:n]
    prob = np.clip(pred.reshape(len(ys), len(xs)), 0.0, 1.0)
    surf = KrigSurface(
        means_label=target_means, xs=xs, ys=ys, prob=prob,
        levels=tuple(levels),
        params={"covariance": "exponential", "rho": rho, "nugget": nugget,
                "sigma2": sigma2, "grid": grid},
    )
    if with_contours:
        for level in levels:
            surf.contours[level] = contour(surf, level)
    return surf


def predict_at(points, labels, target_means: str, where,
               rho: float | None = None, nugget_frac: float = 0.05) -> np.ndarray:
    """Kriging prediction at arbitrary locations (shares fit_surface math)."""
    pts = np.asarray(points, dtype=float)
    n = pts.shape[0]
    labels = list(labels)
    z = np.array([1.0 if lab == target_means else 0.0 for lab in labels])
    dists = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    if rho is None:
        iu = np.triu_indices(n, k=1)
        rho = float(np.median(dists[iu]))
        if rho <= 0.0:
            raise SurfaceError("degenerate configuration")
    sigma2 = float(z.var())
    if sigma2 < 1e-12:
        sigma2 = 1.0
    nugget = nugget_frac * sigma2
    a = np.zeros((n + 1, n + 1))
    a[:n, :n] = sigma2 * np.exp(-dists / rho) + nugget * np.eye(n)
    a[n, :n] = 1.0
    a[:n, n] = 1.0
    where = np.atleast_2d(np.asarray(where, dtype=float))
    node_d = np.sqrt(((where[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    b = np.empty((n + 1, where.shape[0]))
    b[:n] = sigma2 * np.exp(-node_d.T / rho)
    b[n] = 1.0
    sol = np.linalg.solve(a, b)
    return np.clip(z @ sol[:n], 0.0, 1.0)


# ---------------------------------------------------------------------------
# marching squares


def _interp(p1, p2, v1, v2, level):
    t = (level - v1) / (v2 - v1)
    return (p1[0] + t * (p2[0] - p1[0]), p1[1] + t * (p2[1] - p1[1]))


def contour(surface: KrigSurface, level: float) -> list[np.ndarray]:
    """Closed iso-polygons of the probability field at one level.

    Marching squares runs over the grid extended by one below-level ring,
    so every iso-line closes; segments that leave the map are clamped to
    the bounding box, which closes boundary-clipped regions along the
    boundary. Vertices on the level are treated as inside.
    """
    if not 0.0 < level < 1.0:
        raise SurfaceError("level must be in (0, 1)")
    xs, ys, prob = surface.xs, surface.ys, surface.prob
    gx = np.concatenate([[2 * xs[0] - xs[1]], xs, [2 * xs[-1] - xs[-2]]])
    gy = np.concatenate([[2 * ys[0] - ys[1]], ys, [2 * ys[-1] - ys[-2]]])
    vals = np.full((len(gy), len(gx)), level - 1.0)
    vals[1:-1, 1:-1] = prob

    segments: list[tuple[tuple[float, float], tuple[float, float]]] = []
    inside = vals >= level
    for iy in range(len(gy) - 1):
        for ix in range(len(gx) - 1):
            # corners: 0 bottom-left, 1 bottom-right, 2 top-right, 3 top-left
            c = [
                (gx[ix], gy[iy]), (gx[ix + 1], gy[iy]),
                (gx[ix + 1], gy[iy + 1]), (gx[ix], gy[iy + 1]),
            ]
            v = [
                vals[iy, ix], vals[iy, ix + 1],
                vals[iy + 1, ix + 1], vals[iy + 1, ix],
            ]
            b = (
                (1 if inside[iy, ix] else 0)
                | (2 if inside[iy, ix + 1] else 0)
                | (4 if inside[iy + 1, ix + 1] else 0)
                | (8 if inside[iy + 1, ix] else 0)
            )
            if b in (0, 15):
                continue
            # edge midpoints by crossing: 0 bottom, 1 right, 2 top, 3 left
            def cross(edge):
                i1, i2 = [(0, 1), (1, 2), (2, 3), (3, 0)][edge]
                return _interp(c[i1], c[i2], v[i1], v[i2], level)

            # segments oriented with the inside region on the left
            table = {
                1: [(3, 0)], 2: [(0, 1)], 3: [(3, 1)], 4: [(1, 2)],
                6: [(0, 2)], 7: [(3, 2)], 8: [(2, 3)], 9: [(2, 0)],
                11: [(2, 1)], 12: [(1, 3)], 13: [(1, 0)], 14: [(0, 3)],
            }
            if b == 5:
                center = sum(v) / 4.0
                pairs = [(3, 2), (1, 0)] if center >= level else [(3, 0), (1, 2)]
            elif b == 10:
                center = sum(v) / 4.0
                pairs = [(0, 3), (2, 1)] if center >= level else [(0, 1), (2, 3)]
            else:
                pairs = table[b]
            for e1, e2 in pairs:
                segments.append((cross(e1), cross(e2)))

    polys = _assemble(segments)
    x0, x1 = xs[0], xs[-1]
    y0, y1 = ys[0], ys[-1]
    clipped = []
    for poly in polys:
        arr = np.array(poly)
        arr[:, 0] = np.clip(arr[:, 0], x0, x1)
        arr[:, 1] = np.clip(arr[:, 1], y0, y1)
        arr = _dedupe(arr)
        if arr.shape[0] >= 3:
            clipped.append(arr)
    return clipped


def _key(p, scale):
    return (round(p[0] / scale), round(p[1] / scale))


def _assemble(segments) -> list[list[tuple[float, float]]]:
    if not segments:
        return []
    span = max(
        max(abs(p[0]) for s in segments for p in s),
        max(abs(p[1]) for s in segments for p in s),
        1.0,
    )
    scale = span * 1e-9
    start_of: dict = {}
    for seg in segments:
        start_of.setdefault(_key(seg[0], scale), []).append(seg)
    used = [False] * len(segments)
    index = {id(seg): i for i, seg in enumerate(segments)}
    polys = []
    for i, seg in enumerate(segments):
        if used[i]:
            continue
        chain = [seg[0], seg[1]]
        used[i] = True
        guard = 0
        while _key(chain[-1], scale) != _key(chain[0], scale):
            nxts = start_of.get(_key(chain[-1], scale), [])
            nxt = None
            for cand in nxts:
                if not used[index[id(cand)]]:
                    nxt = cand
                    break
            if nxt is None:
                break  # open chain; drop (cannot happen with the padded ring)
            used[index[id(nxt)]] = True
            chain.append(nxt[1])
            guard += 1
            if guard > len(segments) + 1:
                break
        if _key(chain[-1], scale) == _key(chain[0], scale) and len(chain) > 3:
            polys.append(chain[:-1])
    return polys


def _dedupe(arr: np.ndarray) -> np.ndarray:
    keep = [0]
    span = max(float(np.abs(arr).max()), 1.0)
    tol = span * 1e-12
    for i in range(1, arr.shape[0]):
        if abs(arr[i, 0] - arr[keep[-1], 0]) > tol or abs(arr[i, 1] - arr[keep[-1], 1]) > tol:
            keep.append(i)
    while len(keep) > 1 and (
        abs(arr[keep[-1], 0] - arr[keep[0], 0]) <= tol
        and abs(arr[keep[-1], 1] - arr[keep[0], 1]) <= tol
    ):
        keep.pop()
    return arr[keep]


def polygon_area(poly: np.ndarray) -> float:
    x = poly[:, 0]
    y = poly[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def contains(polygons: list[np.ndarray], point) -> bool:
    """Even-odd containment over a polygon set; boundary counts as inside."""
    px, py = float(point[0]), float(point[1])
    if not polygons:
        return False
    span = max(max(float(np.abs(p).max()) for p in polygons), 1.0)
    eps = span * 1e-9
    crossings = 0
    for poly in polygons:
        n = poly.shape[0]
        for i in range(n):
            x1, y1 = poly[i]
            x2, y2 = poly[(i + 1) % n]
            # boundary check: distance from point to the segment
            dx, dy = x2 - x1, y2 - y1
            seg2 = dx * dx + dy * dy
            if seg2 > 0:
                t = ((px - x1) * dx + (py - y1) * dy) / seg2
                t = min(1.0, max(0.0, t))
                cx, cy = x1 + t * dx, y1 + t * dy
            else:
                cx, cy = x1, y1
            if (px - cx) ** 2 + (py - cy) ** 2 <= eps * eps:
                return True
            if (y1 > py) != (y2 > py):
                x_at = x1 + (py - y1) * dx / dy
                if x_at > px:
                    crossings += 1
    return crossings % 2 == 1


def null_heat(matrix) -> list[int]:
    """Per usage point, how many doculects realize it with NULL."""
    return [sum(1 for cell in row if cell is None) for row in matrix.cells]
