"""Domain descriptors with signed-distance queries, bubble sets with spatial
indexing, boundary sampling, and inward-offset exhaustions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .rand import substream, unit_vectors

BOUNDARY_PROJECTION_TOL = 1e-9


class Domain:
    """Base class for bounded domains with a signed distance to the boundary
    (negative inside, positive outside).

    For unions and intersections the min/max composition is exact outside and
    on disjoint pieces, and a conservative lower bound on the true interior
    clearance otherwise; walk-on-spheres and clearance audits only need a
    positive lower bound, so conservatism is acceptable.
    """

    kind = "abstract"

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def sdf(self, point) -> float:
        """Scalar convenience wrapper around :meth:`signed_distance`."""
        p = np.asarray(point, dtype=float)
        return float(self.signed_distance(p[None, :])[0])

    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def contains(self, points: np.ndarray) -> np.ndarray:
        return self.signed_distance(points) < 0.0

    def to_dict(self) -> dict:
        raise NotImplementedError

    @property
    def dim(self) -> int:
        lo, _ = self.bounding_box()
        return int(lo.shape[0])


@dataclass(frozen=True)
class Ball(Domain):
    center: tuple
    radius: float
    kind = "ball"

    def signed_distance(self, points):
        c = np.asarray(self.center, dtype=float)
        return np.linalg.norm(points - c, axis=-1) - self.radius

    def bounding_box(self):
        c = np.asarray(self.center, dtype=float)
        return c - self.radius, c + self.radius

    def to_dict(self):
        return {"kind": "ball", "center": list(self.center), "radius": self.radius}


@dataclass(frozen=True)
class Box(Domain):
    lo: tuple
    hi: tuple
    kind = "box"

    def signed_distance(self, points):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        center = (lo + hi) / 2.0
        half = (hi - lo) / 2.0
        q = np.abs(points - center) - half
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=-1)
        inside = np.minimum(np.max(q, axis=-1), 0.0)
        return outside + inside

    def bounding_box(self):
        return np.asarray(self.lo, dtype=float), np.asarray(self.hi, dtype=float)

    def to_dict(self):
        return {"kind": "box", "lo": list(self.lo), "hi": list(self.hi)}


@dataclass(frozen=True)
class Union(Domain):
    parts: tuple
    kind = "union"

    def signed_distance(self, points):
        return np.min([p.signed_distance(points) for p in self.parts], axis=0)

    def bounding_box(self):
        boxes = [p.bounding_box() for p in self.parts]
        lo = np.min([b[0] for b in boxes], axis=0)
        hi = np.max([b[1] for b in boxes], axis=0)
        return lo, hi

    def to_dict(self):
        return {"kind": "union", "parts": [p.to_dict() for p in self.parts]}


@dataclass(frozen=True)
class Intersection(Domain):
    parts: tuple
    kind = "intersection"

    def signed_distance(self, points):
        return np.max([p.signed_distance(points) for p in self.parts], axis=0)

    def bounding_box(self):
        boxes = [p.bounding_box() for p in self.parts]
        lo = np.max([b[0] for b in boxes], axis=0)
        hi = np.min([b[1] for b in boxes], axis=0)
        return lo, hi

    def to_dict(self):
        return {"kind": "intersection", "parts": [p.to_dict() for p in self.parts]}


def domain_from_dict(data: dict) -> Domain:
    kind = data["kind"]
    if kind == "ball":
        return Ball(center=tuple(data["center"]), radius=float(data["radius"]))
    if kind == "box":
        return Box(lo=tuple(data["lo"]), hi=tuple(data["hi"]))
    if kind == "union":
        return Union(parts=tuple(domain_from_dict(p) for p in data["parts"]))
    if kind == "intersection":
        return Intersection(parts=tuple(domain_from_dict(p) for p in data["parts"]))
    raise ValueError(f"unknown domain kind {kind!r}")


def lshape(arm: float = 1.0, thickness: float = 0.6) -> Union:
    """Planar L-shaped domain: union of two overlapping axis-aligned boxes."""
    return Union(
        parts=(
            Box(lo=(0.0, 0.0), hi=(arm, thickness)),
            Box(lo=(0.0, 0.0), hi=(thickness, arm)),
        )
    )


def distance_to_boundary(domain: Domain, point) -> float:
    """Signed distance to the domain boundary: negative inside, positive
    outside, zero on the boundary."""
    return domain.sdf(point)


# ---------------------------------------------------------------------------
# Bubble sets


@dataclass(frozen=True)
class Bubble:
    center: np.ndarray
    radius: float
    layer_id: int
    boundary_clearance: float = math.inf


class _Stratum:
    """Bubbles sharing one radius: a KD-tree for batched nearest queries and
    a uniform-grid hash for the contract-level scalar query.

    The grid cell size is the largest of the bubble diameter, the observed
    center spacing, and a fraction of the stratum extent, so occupied cells
    hold few bubbles while shell expansion from far probes stays short.
    """

    def __init__(self, centers: np.ndarray, radius: float):
        self.centers = centers
        self.radius = radius
        self.tree = cKDTree(centers)
        spacing = 2.0 * radius
        if len(centers) > 1:
            sample = centers[:: max(1, len(centers) // 2048)]
            nn = self.tree.query(sample, k=2)[0][:, 1]
            spacing = max(spacing, float(np.median(nn)))
            extent = float(np.max(centers.max(axis=0) - centers.min(axis=0)))
            spacing = max(spacing, extent / 64.0)
        self.cell = spacing if spacing > 0 else 1.0
        self.grid: dict = {}
        keys = np.floor(centers / self.cell).astype(np.int64)
        for i, key in enumerate(map(tuple, keys)):
            self.grid.setdefault(key, []).append(i)

    def nearest_grid(self, point: np.ndarray, stop_beyond: float = math.inf):
        """Exact nearest center via expanding shells of grid cells; gives up
        once no center closer than stop_beyond can remain."""
        d = point.shape[0]
        base = np.floor(point / self.cell).astype(np.int64)
        best = math.inf
        best_i = -1
        shell = 0
        while True:
            # Any cell in shell k is at least (k-1)*cell away from the point.
            if (shell - 1) * self.cell > min(best, stop_beyond):
                break
            for key in _shell_keys(tuple(base), shell, d):
                ids = self.grid.get(key)
                if not ids:
                    continue
                pts = self.centers[ids]
                dist = np.linalg.norm(pts - point, axis=1)
                j = int(np.argmin(dist))
                if dist[j] < best:
                    best = float(dist[j])
                    best_i = ids[j]
            shell += 1
        return best - self.radius, best_i


def _shell_keys(base: tuple, shell: int, d: int):
    if shell == 0:
        yield base
        return
    rng = range(-shell, shell + 1)
    if d == 2:
        bx, by = base
        for dx in rng:
            for dy in rng:
                if max(abs(dx), abs(dy)) == shell:
                    yield (bx + dx, by + dy)
    else:
        from itertools import product

        for off in product(rng, repeat=d):
            if max(abs(o) for o in off) == shell:
                yield tuple(b + o for b, o in zip(base, off))


class BubbleSet:
    """A finite union of closed balls with uniform radius per layer, indexed
    for nearest-surface queries.

    Query strata group bubbles by radius (many layers can share one), so a
    batched query costs one tree lookup per distinct radius rather than per
    layer."""

    def __init__(self, centers: np.ndarray, radii: np.ndarray, layer_ids: np.ndarray, dim: int = None):
        centers = np.asarray(centers, dtype=float)
        radii = np.asarray(radii, dtype=float)
        layer_ids = np.asarray(layer_ids, dtype=np.int64)
        if len(centers) == 0:
            if dim is None:
                raise ValueError("empty BubbleSet needs an explicit dim")
            centers = centers.reshape(0, dim)
        if centers.ndim != 2 or len(centers) != len(radii) or len(radii) != len(layer_ids):
            raise ValueError("centers, radii, layer_ids must have matching lengths")
        self.centers = centers
        self.radii = radii
        self.layer_ids = layer_ids
        self.strata: List[_Stratum] = []
        if len(centers) == 0:
            return
        for lid in np.unique(layer_ids):
            r = radii[layer_ids == lid]
            if (r.max() - r.min()) > 1e-15 * max(1.0, r.max()):
                raise ValueError(f"layer {lid} has non-uniform bubble radii")
        for rv in np.unique(radii):
            chunk = np.flatnonzero(radii == rv)
            st = _Stratum(centers[chunk], float(rv))
            st.global_ids = chunk
            self.strata.append(st)

    @classmethod
    def empty(cls, dim: int) -> "BubbleSet":
        return cls(np.zeros((0, dim)), np.zeros(0), np.zeros(0, dtype=np.int64), dim=dim)

    def __len__(self) -> int:
        return len(self.centers)

    @property
    def dim(self) -> int:
        return int(self.centers.shape[1])

    def nearest_batch(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Distances to the nearest bubble surface (negative if inside a
        bubble) and ids of the minimizing bubbles, for a batch of points."""
        if not self.strata:
            n = len(points)
            return np.full(n, math.inf), np.full(n, -1, dtype=np.int64)
        best = np.full(len(points), math.inf)
        best_id = np.full(len(points), -1, dtype=np.int64)
        for st in self.strata:
            dist, local = st.tree.query(points)
            surf = dist - st.radius
            better = surf < best
            best[better] = surf[better]
            best_id[better] = st.global_ids[local[better]]
        return best, best_id

    def nearest_surface_batch(self, points: np.ndarray) -> np.ndarray:
        """Distances only; the cheap variant for walk stepping."""
        if not self.strata:
            return np.full(len(points), math.inf)
        best = np.full(len(points), math.inf)
        for st in self.strata:
            dist = st.tree.query(points)[0]
            np.minimum(best, dist - st.radius, out=best)
        return best

    def nearest(self, point) -> Tuple[float, int]:
        """Scalar nearest-surface query via the uniform-grid index."""
        p = np.asarray(point, dtype=float)
        if not self.strata:
            return math.inf, -1
        best = math.inf
        best_id = -1
        for st in self.strata:
            surf, local = st.nearest_grid(p, stop_beyond=best + st.radius)
            if local >= 0 and surf < best:
                best = surf
                best_id = int(st.global_ids[local])
        return best, best_id

    def nearest_bruteforce(self, point) -> Tuple[float, int]:
        p = np.asarray(point, dtype=float)
        if len(self.centers) == 0:
            return math.inf, -1
        dist = np.linalg.norm(self.centers - p, axis=1) - self.radii
        i = int(np.argmin(dist))
        return float(dist[i]), i

    def overlapping_pairs(self) -> List[Tuple[int, int]]:
        """All pairs of distinct bubbles whose closed balls intersect,
        found per stratum pair with the exact radius sum threshold."""
        pairs = []
        for a in range(len(self.strata)):
            sa = self.strata[a]
            for i, j in sa.tree.query_pairs(2.0 * sa.radius):
                pairs.append((int(sa.global_ids[i]), int(sa.global_ids[j])))
            for b in range(a + 1, len(self.strata)):
                sb = self.strata[b]
                hits = sa.tree.query_ball_tree(sb.tree, sa.radius + sb.radius)
                for i, js in enumerate(hits):
                    for j in js:
                        pairs.append((int(sa.global_ids[i]), int(sb.global_ids[j])))
        return sorted(set(tuple(sorted(p)) for p in pairs))

    def overlapping_pairs_bruteforce(self) -> List[Tuple[int, int]]:
        n = len(self.centers)
        pairs = []
        for i in range(n):
            d = np.linalg.norm(self.centers[i + 1 :] - self.centers[i], axis=1)
            bad = np.flatnonzero(d < self.radii[i] + self.radii[i + 1 :])
            pairs.extend((i, int(i + 1 + j)) for j in bad)
        return pairs

    def bubble(self, i: int) -> Bubble:
        return Bubble(
            center=self.centers[i].copy(),
            radius=float(self.radii[i]),
            layer_id=int(self.layer_ids[i]),
        )


def nearest_bubble_distance(bubbles: BubbleSet, point) -> Tuple[float, int]:
    """Distance from the point to the nearest bubble surface and its id;
    reported <= 0 with the containing bubble's id when inside a bubble."""
    return bubbles.nearest(point)


# ---------------------------------------------------------------------------
# Boundary sampling and exhaustions


def sample_boundary(domain: Domain, count: int, seed: int) -> np.ndarray:
    """Quasi-uniform sample of the domain boundary.

    Rejection-samples points in a thin band around the boundary and projects
    them along the numerical gradient of the signed distance; every returned
    point satisfies |signed distance| < 1e-9.
    """
    rng = substream(seed, 0xB0D7)
    lo, hi = domain.bounding_box()
    d = len(lo)
    span = float(np.max(hi - lo))
    band = 0.05 * span
    pad = band
    out = []
    need = count
    attempts = 0
    while need > 0 and attempts < 400:
        attempts += 1
        m = max(4 * need, 256)
        pts = rng.uniform(lo - pad, hi + pad, size=(m, d))
        sd = domain.signed_distance(pts)
        cand = pts[np.abs(sd) < band]
        if len(cand) == 0:
            band *= 1.5
            continue
        proj = _project_to_boundary(domain, cand)
        ok = np.abs(domain.signed_distance(proj)) < BOUNDARY_PROJECTION_TOL
        good = proj[ok]
        take = good[:need]
        if len(take):
            out.append(take)
            need -= len(take)
    if need > 0:
        raise RuntimeError(f"boundary sampling failed to converge for {domain.kind}")
    return np.vstack(out)


def _project_to_boundary(domain: Domain, pts: np.ndarray, iters: int = 40) -> np.ndarray:
    pts = pts.copy()
    h = 1e-7
    d = pts.shape[1]
    for _ in range(iters):
        sd = domain.signed_distance(pts)
        if np.all(np.abs(sd) < BOUNDARY_PROJECTION_TOL):
            break
        grad = np.zeros_like(pts)
        for ax in range(d):
            e = np.zeros(d)
            e[ax] = h
            grad[:, ax] = (domain.signed_distance(pts + e) - domain.signed_distance(pts - e)) / (2 * h)
        norms = np.linalg.norm(grad, axis=1)
        norms[norms == 0.0] = 1.0
        pts -= (sd / norms**2)[:, None] * grad
    return pts


@dataclass
class Exhaustion:
    """Nested bounded open sets V_1 c V_2 c ... increasing to the domain,
    with the per-level gap parameters d_n.

    d_n = min{dist(boundary V_n, boundary V_{n-1} u boundary V_{n+1}), 1/n},
    with V_0 empty and V_{N+1} taken to be the domain itself.
    """

    domain: Domain
    levels: List[Domain]
    offsets: List[float]
    gaps: List[float] = field(default_factory=list)

    def __len__(self):
        return len(self.levels)


def inward_offset(domain: Domain, eps: float) -> Domain:
    """Inward offset of a domain by eps.

    Exact for balls and boxes; for unions, the union of offset parts (an
    inner approximation that is still a valid open subset).
    """
    if eps < 0:
        raise ValueError("offset must be >= 0")
    if isinstance(domain, Ball):
        if domain.radius - eps <= 0:
            raise ValueError(f"offset {eps} collapses ball of radius {domain.radius}")
        return Ball(center=domain.center, radius=domain.radius - eps)
    if isinstance(domain, Box):
        lo = np.asarray(domain.lo) + eps
        hi = np.asarray(domain.hi) - eps
        if np.any(hi - lo <= 0):
            raise ValueError(f"offset {eps} collapses box {domain.lo}..{domain.hi}")
        return Box(lo=tuple(lo), hi=tuple(hi))
    if isinstance(domain, Union):
        parts = []
        for p in domain.parts:
            try:
                parts.append(inward_offset(p, eps))
            except ValueError:
                continue  # collapsed piece drops out of the offset
        if not parts:
            raise ValueError(f"offset {eps} collapses all parts of the union")
        return Union(parts=tuple(parts))
    raise ValueError(f"inward offset not supported for {domain.kind}")


def _connected(domain: Domain, resolution: int = None) -> bool:
    """Flood-fill connectivity check on a raster of the bounding box."""
    lo, hi = domain.bounding_box()
    d = len(lo)
    if resolution is None:
        resolution = 160 if d == 2 else 40
    axes = [np.linspace(lo[k], hi[k], resolution) for k in range(d)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    inside = (domain.signed_distance(pts) < 0).reshape([resolution] * d)
    total = int(inside.sum())
    if total == 0:
        return False
    # BFS from the first interior cell, axis-aligned neighbors only.
    start = tuple(int(v) for v in np.argwhere(inside)[0])
    seen = np.zeros_like(inside, dtype=bool)
    seen[start] = True
    stack = [start]
    while stack:
        cell = stack.pop()
        for ax in range(d):
            for step in (-1, 1):
                nxt = list(cell)
                nxt[ax] += step
                if not (0 <= nxt[ax] < resolution):
                    continue
                nxt = tuple(nxt)
                if inside[nxt] and not seen[nxt]:
                    seen[nxt] = True
                    stack.append(nxt)
    return int(seen.sum()) == total


def make_exhaustion(
    domain: Domain,
    levels: int,
    offsets: Optional[Sequence[float]] = None,
    seed: int = 0,
    boundary_samples: int = 2000,
    check_connectivity: bool = True,
) -> Exhaustion:
    """Exhaustion of the domain by inward offsets.

    Offsets default to a geometric schedule halving toward the boundary.
    Levels that disconnect the domain are rejected, as are non-nested ones.
    """
    if offsets is None:
        inradius = float(np.max(-domain.signed_distance(_interior_grid(domain, 64))))
        offsets = [inradius * 2.0 ** (-n - 1) for n in range(1, levels + 1)]
    offsets = [float(e) for e in offsets]
    if len(offsets) != levels:
        raise ValueError("need one offset per level")
    if any(b >= a for a, b in zip(offsets, offsets[1:])):
        raise ValueError("offsets must be strictly decreasing")
    lvls = [inward_offset(domain, e) for e in offsets]
    if check_connectivity:
        for n, v in enumerate(lvls, start=1):
            if not _connected(v):
                raise ValueError(f"offset {offsets[n-1]} disconnects level {n}")
    ex = Exhaustion(domain=domain, levels=lvls, offsets=offsets)
    ex.gaps = _level_gaps(ex, seed=seed, samples=boundary_samples)
    for n, g in enumerate(ex.gaps, start=1):
        if g <= 0:
            raise ValueError(f"exhaustion level {n} is not strictly nested (d_{n} = {g})")
    return ex


def _interior_grid(domain: Domain, resolution: int) -> np.ndarray:
    lo, hi = domain.bounding_box()
    axes = [np.linspace(lo[k], hi[k], resolution) for k in range(len(lo))]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _level_gaps(ex: Exhaustion, seed: int, samples: int) -> List[float]:
    """d_n by dense boundary sampling of each level against its neighbors."""
    gaps = []
    n_levels = len(ex.levels)
    boundary_pts = [
        sample_boundary(v, samples, seed=seed + 101 + i) for i, v in enumerate(ex.levels)
    ]
    for n in range(1, n_levels + 1):
        pts = boundary_pts[n - 1]
        dists = []
        if n - 2 >= 0:
            dists.append(np.abs(ex.levels[n - 2].signed_distance(pts)))
        nxt = ex.levels[n] if n < n_levels else ex.domain
        dists.append(np.abs(nxt.signed_distance(pts)))
        d_n = float(np.min(np.concatenate(dists)))
        gaps.append(min(d_n, 1.0 / n))
    return gaps
