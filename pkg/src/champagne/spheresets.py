"""Finite point sets on spheres with prescribed covering radius beta and
packing radius beta/3: equal spacing on circles, greedy maximal separated
subsets of quasi-uniform lattices on higher-dimensional spheres."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.spatial import cKDTree

from .kernels import capacity_phi
from .rand import circle_points, sphere_fibonacci, substream, unit_vectors

# Admissible bands for the count ratio #X * beta^(d-1), recorded per
# dimension from measured constructions on spheres of radius about 1.
# The ratio scales like R^(d-1); layer radii here stay within (1/2, 1].
CARDINALITY_BANDS = {2: (1.0, 6.0), 3: (4.0, 40.0)}
_FALLBACK_BAND = (1e-2, 1e4)

# Candidate-lattice density: at least this many candidates per beta^(1-d)
# so that maximal (2 beta/3)-separated subsets also cover at radius beta.
CANDIDATE_DENSITY = 100


@dataclass(frozen=True)
class SpherePointSet:
    """Points on the sphere of radius R with covering radius <= beta and
    pairwise distances >= 2*beta/3."""

    R: float
    d: int
    beta: float
    points: np.ndarray
    covering_radius_measured: float
    min_pairwise_distance: float
    seed: int

    def __len__(self):
        return len(self.points)


def design_sphere_points(
    R: float,
    beta: float,
    d: int,
    seed: int = 0,
    coverage_samples: int = 100_000,
) -> SpherePointSet:
    """Point set on the sphere of radius R such that balls of radius beta
    centered at the points cover the sphere while balls of radius beta/3 are
    pairwise disjoint.  Deterministic given the seed.

    The circle case uses equal angular spacing with the count adjusted until
    both properties hold; for d >= 3 a maximal (2*beta/3)-separated subset of
    a dense quasi-uniform candidate set is taken, whose maximality forces the
    covering property.
    """
    if d < 2:
        raise ValueError("dimension must be >= 2")
    # The circle construction stays meaningful (>= 3 points) up to the
    # quarter circumference; in higher dimensions the candidate density law
    # degenerates already at beta = R.
    beta_max = math.pi * R / 2.0 if d == 2 else R
    if not (0 < beta < beta_max):
        raise ValueError(
            f"covering degenerates: need 0 < beta < {beta_max:.6g} for d={d}, R={R}"
        )
    rng = substream(seed, 0x5D, d)
    if d == 2:
        pts = _design_circle(R, beta, rng)
    else:
        pts = _design_greedy(R, beta, d, rng)
    covering = _measure_covering(pts, R, d, seed, coverage_samples)
    min_pair = _measure_min_pairwise(pts)
    ps = SpherePointSet(
        R=R,
        d=d,
        beta=beta,
        points=pts,
        covering_radius_measured=covering,
        min_pairwise_distance=min_pair,
        seed=seed,
    )
    if covering > beta:
        raise RuntimeError(
            f"covering radius {covering} exceeds beta={beta} after construction"
        )
    if min_pair < 2.0 * beta / 3.0:
        raise RuntimeError(
            f"min pairwise distance {min_pair} below 2*beta/3={2*beta/3}"
        )
    return ps


def _design_circle(R: float, beta: float, rng) -> np.ndarray:
    offset = rng.uniform(0.0, 2.0 * math.pi)
    M = max(3, math.ceil(math.pi * (R / beta)))
    for _ in range(64):
        covering = 2.0 * R * math.sin(math.pi / (2.0 * M))
        packing = 2.0 * R * math.sin(math.pi / M)
        if covering > beta:
            M += 1
        elif packing < 2.0 * beta / 3.0 and M > 3:
            M -= 1
        else:
            break
    covering = 2.0 * R * math.sin(math.pi / (2.0 * M))
    packing = 2.0 * R * math.sin(math.pi / M)
    if covering > beta or packing < 2.0 * beta / 3.0:
        raise RuntimeError(f"no admissible circle count near M={M} for beta={beta}")
    return circle_points(M, radius=R, offset=offset)


def _design_greedy(R: float, beta: float, d: int, rng) -> np.ndarray:
    sep = 2.0 * beta / 3.0
    rel = beta / R
    n_cand = max(2000, math.ceil(CANDIDATE_DENSITY * rel ** (1 - d)))
    for attempt in range(4):
        cands = _candidate_lattice(n_cand, R, d, rng)
        chosen = _greedy_separated(cands, sep)
        # Maximality covers the candidates at radius sep; candidate fineness
        # must close the gap to beta.  Verify on an independent sample.
        probe = _sphere_samples(R, d, seed=int(rng.integers(2**31)), count=20_000)
        tree = cKDTree(chosen)
        cov = float(tree.query(probe)[0].max())
        if cov <= beta * 0.999:
            return chosen
        n_cand *= 2
    raise RuntimeError(f"greedy construction failed to cover at beta={beta}")


def _candidate_lattice(n: int, R: float, d: int, rng) -> np.ndarray:
    if d == 3:
        return sphere_fibonacci(n, radius=R, offset=float(rng.uniform(0, 1)))
    # Higher dimensions: seeded uniform points, dense enough to act as a
    # quasi-uniform lattice at this scale (best effort).
    return R * unit_vectors(rng, n, d)


def _greedy_separated(cands: np.ndarray, sep: float) -> np.ndarray:
    """Maximal subset with pairwise distances >= sep, greedy in input order,
    using a hashed uniform grid with cell size sep.

    The hot loop runs in plain Python over coordinate tuples; candidate sets
    come in spatially coherent order, so rejected candidates usually conflict
    within their own cell and exit early.
    """
    from itertools import product

    d = cands.shape[1]
    keys = np.floor(cands / sep).astype(np.int64)
    sep2 = sep * sep
    chosen: list = []
    grid: dict = {}
    if d <= 3 and np.abs(keys).max(initial=0) < (1 << 20):
        # Injective bit-packed cell keys; neighbor cells differ by fixed
        # deltas.  Own cell first: most rejections resolve there.
        packed = np.zeros(len(cands), dtype=np.int64)
        for ax in range(d):
            packed = (packed << 21) | (keys[:, ax] + (1 << 20))
        packed_list = packed.tolist()
        offsets = sorted(
            (sum(o << (21 * (d - 1 - ax)) for ax, o in enumerate(off)) for off in product((-1, 0, 1), repeat=d)),
            key=abs,
        )
        rows = list(map(tuple, cands.tolist()))
        grid_get = grid.get
        for i, p in enumerate(rows):
            key = packed_list[i]
            ok = True
            for delta in offsets:
                cell = grid_get(key + delta)
                if cell:
                    for q in cell:
                        s = 0.0
                        for a, b in zip(p, q):
                            t = a - b
                            s += t * t
                        if s < sep2:
                            ok = False
                            break
                    if not ok:
                        break
            if ok:
                if key in grid:
                    grid[key].append(p)
                else:
                    grid[key] = [p]
                chosen.append(i)
    else:
        key_tuples = list(map(tuple, keys.tolist()))
        offsets = sorted(product((-1, 0, 1), repeat=d), key=lambda o: sum(abs(x) for x in o))
        rows = list(map(tuple, cands.tolist()))
        grid_get = grid.get
        for i, p in enumerate(rows):
            base = key_tuples[i]
            ok = True
            for off in offsets:
                cell = grid_get(tuple(b + o for b, o in zip(base, off)))
                if cell:
                    for q in cell:
                        s = 0.0
                        for a, b in zip(p, q):
                            t = a - b
                            s += t * t
                        if s < sep2:
                            ok = False
                            break
                    if not ok:
                        break
            if ok:
                grid.setdefault(base, []).append(p)
                chosen.append(i)
    return cands[np.array(chosen, dtype=np.int64)]


def _sphere_samples(R: float, d: int, seed: int, count: int) -> np.ndarray:
    """Quasi-uniform test sample of the sphere used for covering checks."""
    if d == 2:
        # Irrational rotation keeps the sample from aligning with any design.
        offset = 2.0 * math.pi * ((seed % 997) / 997.0 + 1.0 / math.sqrt(2))
        return circle_points(count, radius=R, offset=offset)
    if d == 3:
        return sphere_fibonacci(count, radius=R, offset=(seed % 1009) / 1009.0)
    return R * unit_vectors(substream(seed, 0xC0FE), count, d)


def _measure_covering(pts: np.ndarray, R: float, d: int, seed: int, count: int) -> float:
    probe = _sphere_samples(R, d, seed=seed + 1, count=count)
    tree = cKDTree(pts)
    return float(tree.query(probe)[0].max())


def _measure_min_pairwise(pts: np.ndarray) -> float:
    if len(pts) < 2:
        return math.inf
    tree = cKDTree(pts)
    return float(tree.query(pts, k=2)[0][:, 1].min())


def radius_from_spacing(beta: float, rho: float, d: int) -> float:
    """Invert the spacing law beta = (phi(r) * rho)^(1/(d-1)) for r."""
    if d == 2:
        return math.exp(-rho / beta)
    return beta ** ((d - 1) / (d - 2)) * rho ** (-1.0 / (d - 2))


def cardinality_check(ps: SpherePointSet, rho: float) -> Tuple[float, float, bool]:
    """Measured count ratios for a point set: #X * beta^(d-1) directly, and
    #X * phi(r) * rho through the spacing law; flags whether the direct ratio
    lies in the recorded dimension band."""
    ratio_area = len(ps) * ps.beta ** (ps.d - 1)
    r = radius_from_spacing(ps.beta, rho, ps.d)
    ratio_capacity = len(ps) * capacity_phi(r, ps.d) * rho
    lo, hi = CARDINALITY_BANDS.get(ps.d, _FALLBACK_BAND)
    return ratio_area, ratio_capacity, (lo <= ratio_area <= hi)
