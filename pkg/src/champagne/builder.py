"""Bubble-set constructions: single sphere layers, the log-squared ladder of
concentric layers, the budgeted unit-ball build, annulus fills, and
general-domain builds over exhaustions; plus the product lower bound and the
configuration audit."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .geometry import Ball, BubbleSet, Domain, Exhaustion, sample_boundary
from .kernels import GaugeSet, capacity_phi
from .spheresets import SpherePointSet, design_sphere_points, _greedy_separated, _sphere_samples
from .rand import substream

# Measured count constants for predicted layer sizes (see spheresets bands).
_COUNT_COEFF = {2: 3.3, 3: 24.0}
_RADIUS_FLOOR = 5e-300
DEFAULT_MAX_POINTS_PER_LAYER = 500_000


class BuildInfeasibleError(RuntimeError):
    """A construction cannot be realized at desk scale: either the bubble
    radius search hits the floating-point floor, or the bubble count needed
    to meet a budget exceeds the configured cap."""

    def __init__(self, message: str, layer_index: Optional[int] = None):
        super().__init__(message)
        self.layer_index = layer_index


def rho0_threshold(rho: float, d: int) -> float:
    """Radius threshold below which the spacing law gives r < beta/3:
    min{rho/3, 3^(1-d) * rho} for d >= 3 and min{rho/3, rho^2/18} in the
    plane."""
    if not (0 < rho < 1 / 3):
        raise ValueError(f"rho must lie in (0, 1/3), got {rho}")
    if d == 2:
        return min(rho / 3.0, rho * rho / 18.0)
    if d >= 3:
        return min(rho / 3.0, 3.0 ** (1 - d) * rho)
    raise ValueError(f"dimension must be >= 2, got {d}")


def spacing_beta(r: float, rho: float, d: int) -> float:
    """Spacing law beta = (phi(r) * rho)^(1/(d-1))."""
    return (capacity_phi(r, d) * rho) ** (1.0 / (d - 1))


def ladder_bound(kappas: Iterable[float]) -> float:
    """Lower bound 1 - prod(1 - kappa_j) on the overall hitting probability,
    computed in log space."""
    total = 0.0
    for k in kappas:
        if not (0.0 <= k <= 1.0):
            raise ValueError(f"kappa must lie in [0,1], got {k}")
        if k == 1.0:
            return 1.0
        total += math.log1p(-k)
    return -math.expm1(total)


# ---------------------------------------------------------------------------
# Layers


@dataclass(frozen=True)
class SphereLayer:
    """One layer of equal-radius bubbles centered on a sphere: radius R, gap
    parameter rho, bubble radius r, spacing beta from the spacing law, and
    the point set realizing covering beta / packing beta/3."""

    R: float
    rho: float
    r: float
    beta: float
    d: int
    points: SpherePointSet
    capacity_sum: float
    weighted_sum: float

    def __post_init__(self):
        beta_law = spacing_beta(self.r, self.rho, self.d)
        if not math.isclose(self.beta, beta_law, rel_tol=1e-12):
            raise ValueError(f"spacing law violated: beta={self.beta} vs {beta_law}")
        if not self.r < self.beta / 3.0:
            raise ValueError(f"need r < beta/3: r={self.r}, beta={self.beta}")
        if not self.r < rho0_threshold(self.rho, self.d):
            raise ValueError(
                f"need r < rho0 threshold {rho0_threshold(self.rho, self.d)}, got r={self.r}"
            )

    def __len__(self):
        return len(self.points)


def build_layer(
    R: float,
    rho: float,
    r: float,
    gauges: GaugeSet,
    seed: int = 0,
    coverage_samples: int = 20_000,
) -> SphereLayer:
    """Layer of bubbles of radius r on the sphere of radius R with gap rho.

    Rejects r at or above the admissible threshold, naming the violated
    bound.  The capacity sum of the layer lands near 1/rho by the spacing
    law; the weighted sum applies the increasing majorant of the gauge.
    """
    d = gauges.d
    if not (0 < rho < 1 / 3):
        raise ValueError(f"rho must lie in (0, 1/3), got {rho}")
    thr = rho0_threshold(rho, d)
    if not (0 < r < thr):
        raise ValueError(
            f"bubble radius r={r} violates r < rho0_threshold(rho={rho}, d={d}) = {thr}"
        )
    beta = spacing_beta(r, rho, d)
    pts = design_sphere_points(R, beta, d, seed=seed, coverage_samples=coverage_samples)
    m = len(pts)
    phi = capacity_phi(r, d)
    return SphereLayer(
        R=R,
        rho=rho,
        r=r,
        beta=beta,
        d=d,
        points=pts,
        capacity_sum=m * phi,
        weighted_sum=m * phi * gauges.majorant(r),
    )


@dataclass
class LayerRecord:
    """Flat, serializable record of one built layer (a sphere layer, or one
    sub-layer of an annulus fill in final coordinates)."""

    layer_id: int
    kind: str  # "sphere" | "annulus-sub"
    center: tuple
    R: float
    rho: float
    r: float
    beta: float
    count: int
    capacity_sum: float
    weighted_sum: float
    meta: dict = field(default_factory=dict)


@dataclass
class ChampagneConfig:
    """A built champagne configuration: the domain, the gauge, the capacity
    budget, the per-layer records, and the full bubble set."""

    d: int
    domain: Domain
    gauges: GaugeSet
    delta: Optional[float]
    seed: int
    build: dict
    layers: List[LayerRecord]
    bubbles: BubbleSet
    totals: dict

    @property
    def total_weighted_sum(self) -> float:
        return self.totals["weighted_sum"]

    def layer_bubble_ids(self, layer_id: int) -> np.ndarray:
        return np.flatnonzero(self.bubbles.layer_ids == layer_id)

    def bubbles_for_layers(self, layer_ids: Sequence[int]) -> BubbleSet:
        mask = np.isin(self.bubbles.layer_ids, np.asarray(layer_ids))
        return BubbleSet(
            self.bubbles.centers[mask],
            self.bubbles.radii[mask],
            self.bubbles.layer_ids[mask],
            dim=self.d,
        )


def _assemble_config(
    d, domain, gauges, delta, seed, build_meta, records, centers, radii, layer_ids
) -> ChampagneConfig:
    bubbles = BubbleSet(
        np.asarray(centers, dtype=float),
        np.asarray(radii, dtype=float),
        np.asarray(layer_ids, dtype=np.int64),
        dim=d,
    )
    capacity = math.fsum(rec.capacity_sum for rec in records)
    weighted = math.fsum(
        rec.count * capacity_phi(rec.r, d) * gauges.h(rec.r) for rec in records
    )
    weighted_majorant = math.fsum(rec.weighted_sum for rec in records)
    totals = {
        "bubble_count": len(bubbles),
        "capacity_sum": capacity,
        "weighted_sum": weighted,
        "weighted_sum_majorant": weighted_majorant,
    }
    cfg = ChampagneConfig(
        d=d,
        domain=domain,
        gauges=gauges,
        delta=delta,
        seed=seed,
        build=build_meta,
        layers=records,
        bubbles=bubbles,
        totals=totals,
    )
    if delta is not None and not weighted < delta:
        raise BuildInfeasibleError(
            f"total weighted sum {weighted} does not come in under delta={delta}"
        )
    return cfg


# ---------------------------------------------------------------------------
# Budgeted radius search


def _predict_count(R: float, beta: float, d: int) -> float:
    coeff = _COUNT_COEFF.get(d, 40.0)
    return max(3.0, coeff * (R / beta) ** (d - 1))


def _search_radius(
    R_rel: float,
    rho_rel: float,
    cap_rel: float,
    budget: float,
    gauges: GaugeSet,
    scale: float,
    layer_index: int,
    max_points: int,
) -> float:
    """Largest halving of the admissible cap whose predicted layer weight
    lands under the budget; the weight is evaluated at the final scale."""
    d = gauges.d
    r = cap_rel * 0.999
    for _ in range(4000):
        beta_rel = spacing_beta(r, rho_rel, d)
        count = _predict_count(R_rel, beta_rel, d)
        if count > max_points:
            raise BuildInfeasibleError(
                f"layer {layer_index}: meeting budget {budget:.3g} needs about "
                f"{count:.3g} bubbles, over the cap {max_points}",
                layer_index=layer_index,
            )
        s = scale * r
        weight = count * capacity_phi(s, d) * gauges.majorant(s)
        if weight < budget:
            return r
        r *= 0.5
        if r < _RADIUS_FLOOR:
            raise BuildInfeasibleError(
                f"layer {layer_index}: no admissible bubble radius above the "
                f"floating-point floor meets budget {budget:.3g}",
                layer_index=layer_index,
            )
    raise BuildInfeasibleError(
        f"layer {layer_index}: radius search did not converge", layer_index=layer_index
    )


# ---------------------------------------------------------------------------
# Unit-ball build


def build_unit_ball(
    gauges: GaugeSet,
    delta: float,
    radii: Sequence[float],
    seed: int = 0,
    max_points_per_layer: int = DEFAULT_MAX_POINTS_PER_LAYER,
    coverage_samples: int = 20_000,
) -> ChampagneConfig:
    """Layered construction in the unit ball: one bubble layer per sphere
    radius R_1 < ... < R_K, gaps rho_k = (R_{k+1} - R_k)/2, and bubble radii
    halved from their admissible caps until each layer's weighted sum falls
    under 2^-k * delta, so the total telescopes below delta.

    ``radii`` supplies R_1..R_{K+1} (strictly increasing inside (1/2, 1));
    the last entry only sets the outermost gap.  R_0 is fixed at 1/2.
    """
    d = gauges.d
    radii = [float(R) for R in radii]
    if len(radii) < 2:
        raise ValueError("need at least two radii (K >= 1 layers)")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly increasing")
    if radii[0] <= 0.5 or radii[-1] >= 1.0:
        raise ValueError("radii must lie strictly inside (1/2, 1)")
    if delta <= 0:
        raise ValueError("delta must be positive")
    K = len(radii) - 1
    records: List[LayerRecord] = []
    centers, rads, ids = [], [], []
    prev_R = 0.5
    for k in range(1, K + 1):
        R_k, R_next = radii[k - 1], radii[k]
        rho_k = (R_next - R_k) / 2.0
        cap = min(rho0_threshold(rho_k, d), (R_k - prev_R) / 2.0)
        budget = 2.0 ** (-k) * delta
        r_k = _search_radius(
            R_k, rho_k, cap, budget, gauges, 1.0, k, max_points_per_layer
        )
        layer = None
        for _ in range(64):
            layer = build_layer(
                R_k, rho_k, r_k, gauges, seed=_layer_seed(seed, k),
                coverage_samples=coverage_samples,
            )
            if layer.weighted_sum < budget:
                break
            r_k *= 0.5  # prediction was optimistic; halve on actual counts
            if r_k < _RADIUS_FLOOR:
                raise BuildInfeasibleError(
                    f"layer {k}: no admissible radius above the floating-point floor",
                    layer_index=k,
                )
        else:
            raise BuildInfeasibleError(
                f"layer {k}: budget unreachable by halving", layer_index=k
            )
        records.append(
            LayerRecord(
                layer_id=k - 1,
                kind="sphere",
                center=(0.0,) * d,
                R=R_k,
                rho=rho_k,
                r=r_k,
                beta=layer.beta,
                count=len(layer),
                capacity_sum=layer.capacity_sum,
                weighted_sum=layer.weighted_sum,
                meta={"k": k, "R_prev": prev_R, "R_next": R_next, "budget": budget},
            )
        )
        centers.append(layer.points.points)
        rads.append(np.full(len(layer), r_k))
        ids.append(np.full(len(layer), k - 1, dtype=np.int64))
        prev_R = R_k
    build_meta = {
        "kind": "unit-ball",
        "radii": radii,
        "max_points_per_layer": max_points_per_layer,
    }
    return _assemble_config(
        d,
        Ball(center=(0.0,) * d, radius=1.0),
        gauges,
        delta,
        seed,
        build_meta,
        records,
        np.vstack(centers),
        np.concatenate(rads),
        np.concatenate(ids),
    )


def geometric_radii(K: int) -> List[float]:
    """R_k = 1 - 2^-(k+1) for k = 1..K+1."""
    return [1.0 - 2.0 ** (-k - 1) for k in range(1, K + 2)]


def equispaced_radii(K: int, lo: float = 0.55, hi: float = 0.95) -> List[float]:
    """K+1 equally spaced radii in [lo, hi] inside (1/2, 1)."""
    return list(np.linspace(lo, hi, K + 1))


def _layer_seed(seed: int, *path: int) -> int:
    return int(substream(seed, 0x11A, *path).integers(1 << 62))


# ---------------------------------------------------------------------------
# Concentric layers at R_k = 1 - sum_{j >= k} (j log^2 j)^{-1}


_TAIL_EXTRA = 2_000_000


def log_ladder_tail(k_lo: int, k_hi: int) -> np.ndarray:
    """Tail sums sum_{j >= k} 1/(j log^2 j) for k = k_lo..k_hi+1, by direct
    longdouble summation out to k_hi + 2e6 plus a midpoint integral remainder
    (absolute error well under 1e-12)."""
    if k_lo < 2:
        raise ValueError("tail sums need k >= 2 (log term vanishes at 1)")
    J = k_hi + _TAIL_EXTRA
    j = np.arange(k_lo, J + 1, dtype=np.longdouble)
    terms = 1.0 / (j * np.log(j) ** 2)
    suffix = np.flip(np.cumsum(np.flip(terms)))
    remainder = 1.0 / math.log(J + 0.5)
    out = suffix[: k_hi - k_lo + 2].astype(float) + remainder
    return out


def one_bubble_params(k: int, d: int) -> dict:
    """The per-index layer parameters of the concentric construction:
    rho = 1/(3 log^2 k), beta = rho/k, and r = e^-k (plane) or
    k^-((d-1)/(d-2)) * rho (d >= 3)."""
    if k < 3:
        raise ValueError("k must be >= 3")
    rho = 1.0 / (3.0 * math.log(k) ** 2)
    beta = rho / k
    if d == 2:
        r = math.exp(-k)
    else:
        r = k ** (-(d - 1) / (d - 2)) * rho
    return {"rho": rho, "beta": beta, "r": r}


def one_bubble_conditions(K: int, d: int) -> List[str]:
    """Violated start-index conditions for the concentric construction
    (empty when K is admissible)."""
    bad = []
    if K < 3 ** (d - 1):
        bad.append(f"K={K} is below 3^(d-1) = {3 ** (d - 1)}")
    if K >= 3:
        tail = float(log_ladder_tail(K, K)[0])
        if not tail < 0.5:
            bad.append(f"tail sum at K={K} is {tail:.6f}, not below 1/2")
        # the ratio e^-k * 9k log^2 k decreases in k, so checking K suffices
        if not math.exp(-K) < 1.0 / (9.0 * K * math.log(K) ** 2):
            bad.append(f"e^-K is not below (9 K log^2 K)^-1 at K={K}")
        # layers must also clear the sufficient radius threshold; the margin
        # e^-k * 162 log^4 k decreases in k, so checking K suffices
        p = one_bubble_params(K, d)
        if not p["r"] < rho0_threshold(p["rho"], d):
            bad.append(
                f"layer radius at K={K} misses the sufficient threshold "
                f"rho0 = {rho0_threshold(p['rho'], d):.3g}"
            )
    else:
        bad.append(f"K={K} is below 3")
    return bad


def min_valid_k0(d: int) -> int:
    k = max(3, 3 ** (d - 1))
    while one_bubble_conditions(k, d):
        k += 1
        if k > 10_000:
            raise RuntimeError("no admissible start index found")
    return k


def build_one_bubble_sequence(
    k_lo: int,
    k_hi: int,
    d: int,
    seed: int = 0,
    epsilon: float = 1.5,
    delta: Optional[float] = None,
    max_points_per_layer: int = DEFAULT_MAX_POINTS_PER_LAYER,
    coverage_samples: int = 20_000,
) -> ChampagneConfig:
    """Concentric layers at R_k = 1 - sum_{j>=k} (j log^2 j)^{-1} for
    k = k_lo..k_hi, with the fixed per-index parameters of
    :func:`one_bubble_params`.

    Records sum_k #X_k * phi(r_k)^(1+epsilon) for the supplied exponent; if
    ``delta`` is given the build fails unless that sum comes in under it.
    """
    if k_hi < k_lo:
        raise ValueError("k_hi must be >= k_lo")
    bad = one_bubble_conditions(k_lo, d)
    if bad:
        raise ValueError("start index rejected: " + "; ".join(bad))
    from .kernels import phi_eps_gauge

    gauges = phi_eps_gauge(d, epsilon)
    tails = log_ladder_tail(k_lo, k_hi)
    records: List[LayerRecord] = []
    centers, rads, ids = [], [], []
    power_sum = 0.0
    for i, k in enumerate(range(k_lo, k_hi + 1)):
        p = one_bubble_params(k, d)
        R_k = 1.0 - float(tails[i])
        R_next = 1.0 - float(tails[i + 1])
        if not (0.5 < R_k < R_next < 1.0):
            raise RuntimeError(f"radius ladder broken at k={k}")
        predicted = _predict_count(R_k, p["beta"], d)
        if predicted > max_points_per_layer:
            raise BuildInfeasibleError(
                f"layer k={k}: about {predicted:.3g} bubbles exceed the cap "
                f"{max_points_per_layer}",
                layer_index=k,
            )
        layer = build_layer(
            R_k, p["rho"], p["r"], gauges, seed=_layer_seed(seed, k),
            coverage_samples=coverage_samples,
        )
        if not p["r"] / (1.0 - R_k) < 1.0 / 9.0:
            raise RuntimeError(f"clearance ratio r/(1-R) >= 1/9 at k={k}")
        phi = capacity_phi(p["r"], d)
        power_sum += len(layer) * phi ** (1.0 + epsilon)
        records.append(
            LayerRecord(
                layer_id=i,
                kind="sphere",
                center=(0.0,) * d,
                R=R_k,
                rho=p["rho"],
                r=p["r"],
                beta=layer.beta,
                count=len(layer),
                capacity_sum=layer.capacity_sum,
                weighted_sum=layer.weighted_sum,
                meta={"k": k, "R_next": R_next},
            )
        )
        centers.append(layer.points.points)
        rads.append(np.full(len(layer), p["r"]))
        ids.append(np.full(len(layer), i, dtype=np.int64))
    build_meta = {
        "kind": "one-bubble",
        "k_lo": k_lo,
        "k_hi": k_hi,
        "epsilon": epsilon,
        "capacity_power_sum": power_sum,
        "max_points_per_layer": max_points_per_layer,
    }
    cfg = _assemble_config(
        d,
        Ball(center=(0.0,) * d, radius=1.0),
        gauges,
        delta,
        seed,
        build_meta,
        records,
        np.vstack(centers),
        np.concatenate(rads),
        np.concatenate(ids),
    )
    if delta is not None and not power_sum < delta:
        raise BuildInfeasibleError(
            f"capacity power sum {power_sum} not below delta={delta}; start the "
            "ladder at a larger K"
        )
    return cfg


# ---------------------------------------------------------------------------
# Annulus fill and general domains


@dataclass
class AnnulusFill:
    """Scaled-and-translated layer stack inside the annulus a' < |x-y| < a,
    driving the hitting probability on the inner ball up to gamma."""

    center: np.ndarray
    a: float
    a_prime: float
    gamma: float
    delta_y: float
    kappa_hat: float
    n_layers: int
    records: List[LayerRecord]
    centers: np.ndarray
    radii: np.ndarray


def annulus_layer_count(gamma: float, kappa_hat: float) -> int:
    """Layers needed so that (1 - kappa)^L <= 1 - gamma."""
    if not (0 < gamma < 1):
        raise ValueError("gamma must lie in (0,1)")
    if not (0 < kappa_hat < 1):
        raise ValueError("kappa_hat must lie in (0,1)")
    return max(1, math.ceil(math.log(1.0 - gamma) / math.log(1.0 - kappa_hat)))


def fill_annulus(
    y,
    a: float,
    a_prime: float,
    gamma: float,
    delta_y: float,
    kappa_hat: float,
    gauges: GaugeSet,
    seed: int = 0,
    layer_id_start: int = 0,
    level: int = 0,
    max_layers: int = 12,
    max_points_per_layer: int = DEFAULT_MAX_POINTS_PER_LAYER,
    coverage_samples: int = 8_000,
) -> AnnulusFill:
    """Stack of bubble layers inside the annulus around y with outer radius a
    and protected inner radius a', built at unit scale and then scaled and
    translated, so the geometry is independent of y.

    The number of layers comes from the product rule at the measured
    kappa_hat; each layer's weighted sum (at final scale) is budgeted at
    2^-j * delta_y.
    """
    d = gauges.d
    y = np.asarray(y, dtype=float)
    if not (0 < a_prime < a):
        raise ValueError("need 0 < a_prime < a")
    L = annulus_layer_count(gamma, kappa_hat)
    if L > max_layers:
        raise BuildInfeasibleError(
            f"annulus fill needs {L} layers at kappa_hat={kappa_hat}, over the "
            f"cap {max_layers}"
        )
    tau = a_prime / a
    grid = [tau + (1.0 - tau) * j / (L + 2.0) for j in range(L + 2)]
    records: List[LayerRecord] = []
    all_centers, all_radii = [], []
    for j in range(1, L + 1):
        R_rel, R_next = grid[j], grid[j + 1]
        rho_rel = (R_next - R_rel) / 2.0
        cap = min(rho0_threshold(rho_rel, d), (R_rel - grid[j - 1]) / 2.0)
        budget = 2.0 ** (-j) * delta_y
        r_rel = _search_radius(
            R_rel, rho_rel, cap, budget, gauges, a, j, max_points_per_layer
        )
        s = a * r_rel
        layer = None
        for _ in range(64):
            layer = build_layer(
                R_rel, rho_rel, r_rel, gauges, seed=_layer_seed(seed, level, j),
                coverage_samples=coverage_samples,
            )
            s = a * r_rel
            actual = len(layer) * capacity_phi(s, d) * gauges.majorant(s)
            if actual < budget:
                break
            r_rel *= 0.5
            if r_rel < _RADIUS_FLOOR:
                raise BuildInfeasibleError(
                    f"annulus layer {j}: no admissible radius above the float floor",
                    layer_index=j,
                )
        else:
            raise BuildInfeasibleError(
                f"annulus layer {j}: budget unreachable", layer_index=j
            )
        scaled_centers = y + a * layer.points.points
        phi_s = capacity_phi(s, d)
        records.append(
            LayerRecord(
                layer_id=layer_id_start + j - 1,
                kind="annulus-sub",
                center=tuple(y),
                R=a * R_rel,
                rho=a * rho_rel,
                r=s,
                beta=a * layer.beta,
                count=len(layer),
                capacity_sum=len(layer) * phi_s,
                weighted_sum=len(layer) * phi_s * gauges.majorant(s),
                meta={
                    "level": level,
                    "a": a,
                    "a_prime": a_prime,
                    "gamma": gamma,
                    "delta_y": delta_y,
                    "budget": budget,
                    "R_rel": R_rel,
                    "rho_rel": rho_rel,
                    "r_rel": r_rel,
                    "beta_rel": layer.beta,
                },
            )
        )
        all_centers.append(scaled_centers)
        all_radii.append(np.full(len(layer), s))
    total = math.fsum(rec.weighted_sum for rec in records)
    if not total < delta_y:
        raise BuildInfeasibleError(
            f"annulus fill weighted sum {total} not below delta_y={delta_y}"
        )
    return AnnulusFill(
        center=y,
        a=a,
        a_prime=a_prime,
        gamma=gamma,
        delta_y=delta_y,
        kappa_hat=kappa_hat,
        n_layers=L,
        records=records,
        centers=np.vstack(all_centers),
        radii=np.concatenate(all_radii),
    )


def boundary_net(
    level: Domain, d_n: float, seed: int, sample_count: Optional[int] = None
) -> np.ndarray:
    """Finite subset of the level boundary whose d_n/2 balls cover it while
    the d_n/6 balls stay pairwise disjoint: a greedy maximal d_n/3-separated
    subset of a dense boundary sample."""
    lo, hi = level.bounding_box()
    span = float(np.sum(hi - lo))
    if sample_count is None:
        sample_count = int(max(4000, 40 * span / d_n))
    for attempt in range(3):
        sample = sample_boundary(level, sample_count, seed=seed + attempt)
        net = _greedy_separated(sample, d_n / 3.0)
        probe = sample_boundary(level, sample_count, seed=seed + 71 + attempt)
        from scipy.spatial import cKDTree

        cov = float(cKDTree(net).query(probe)[0].max())
        if cov <= d_n / 2.0:
            return net
        sample_count *= 2
    raise RuntimeError("boundary net failed to reach covering radius d_n/2")


def build_general(
    domain: Domain,
    exhaustion: Exhaustion,
    gauges: GaugeSet,
    delta: float,
    kappa_hat: float,
    seed: int = 0,
    max_layers_per_fill: int = 12,
    max_points_per_layer: int = DEFAULT_MAX_POINTS_PER_LAYER,
) -> ChampagneConfig:
    """General-domain construction over an exhaustion: for each level n a
    boundary net Y_n at separation d_n/3, and around every net point an
    annulus fill with a' = d_n/7, a = d_n/6, gamma = 1/2, and budget
    delta / (#Y_n * 2^n)."""
    d = gauges.d
    if delta <= 0:
        raise ValueError("delta must be positive")
    for n, g in enumerate(exhaustion.gaps, start=1):
        if not g > 0:
            raise ValueError(f"exhaustion level {n} has gap d_{n} = {g}")
    records: List[LayerRecord] = []
    centers, rads, ids = [], [], []
    next_layer_id = 0
    nets = []
    for n, level in enumerate(exhaustion.levels, start=1):
        d_n = exhaustion.gaps[n - 1]
        net = boundary_net(level, d_n, seed=_layer_seed(seed, 0x7E7, n))
        nets.append(net)
        delta_y = delta / (len(net) * 2.0**n)
        for m, y in enumerate(net):
            fill = fill_annulus(
                y,
                a=d_n / 6.0,
                a_prime=d_n / 7.0,
                gamma=0.5,
                delta_y=delta_y,
                kappa_hat=kappa_hat,
                gauges=gauges,
                seed=_layer_seed(seed, n, m),
                layer_id_start=next_layer_id,
                level=n,
                max_layers=max_layers_per_fill,
                max_points_per_layer=max_points_per_layer,
            )
            next_layer_id += fill.n_layers
            records.extend(fill.records)
            centers.append(fill.centers)
            rads.append(fill.radii)
            for rec in fill.records:
                ids.append(np.full(rec.count, rec.layer_id, dtype=np.int64))
    build_meta = {
        "kind": "general",
        "levels": len(exhaustion.levels),
        "offsets": list(exhaustion.offsets),
        "gaps": list(exhaustion.gaps),
        "net_sizes": [len(net) for net in nets],
        "kappa_hat": kappa_hat,
        "max_points_per_layer": max_points_per_layer,
    }
    return _assemble_config(
        d,
        domain,
        gauges,
        delta,
        seed,
        build_meta,
        records,
        np.vstack(centers),
        np.concatenate(rads),
        np.concatenate(ids),
    )


# ---------------------------------------------------------------------------
# Audit


@dataclass
class AuditReport:
    ok: bool
    violations: List[str]
    stats: dict


def audit_config(config: ChampagneConfig, bruteforce_limit: int = 2000) -> AuditReport:
    """Recompute every geometric and budget invariant of a built config.

    Checks global pairwise disjointness (index-based, cross-checked against
    brute force on small configs), the spacing law and radius threshold per
    layer, the kind-specific boundary clearance factors (6 inside the unit
    ball, 9 for the concentric ladder, 18 for general domains), per-layer
    budgets, and the recomputed weighted totals.
    """
    v: List[str] = []
    d = config.d
    bubbles = config.bubbles
    kind = config.build.get("kind", "unknown")

    pairs = bubbles.overlapping_pairs()
    for i, j in pairs[:20]:
        v.append(f"bubbles {i} and {j} overlap")
    if len(bubbles) <= bruteforce_limit:
        if pairs != bubbles.overlapping_pairs_bruteforce():
            v.append("index-based overlap scan disagrees with brute force")

    for rec in config.layers:
        if rec.kind == "sphere":
            r, rho, beta = rec.r, rec.rho, rec.beta
        else:
            r, rho, beta = rec.meta["r_rel"], rec.meta["rho_rel"], rec.meta["beta_rel"]
        law = spacing_beta(r, rho, d)
        if not math.isclose(beta, law, rel_tol=1e-12):
            v.append(f"layer {rec.layer_id}: spacing law violated ({beta} vs {law})")
        if not r < beta / 3.0:
            v.append(f"layer {rec.layer_id}: r >= beta/3")
        if not r < rho0_threshold(rho, d):
            v.append(f"layer {rec.layer_id}: r >= rho0 threshold")
        ids = config.layer_bubble_ids(rec.layer_id)
        if len(ids) != rec.count:
            v.append(
                f"layer {rec.layer_id}: bubble count {len(ids)} != recorded {rec.count}"
            )
        phi = capacity_phi(rec.r, d)
        if not math.isclose(rec.capacity_sum, rec.count * phi, rel_tol=1e-12):
            v.append(f"layer {rec.layer_id}: capacity sum mismatch")
        if "budget" in rec.meta and not rec.weighted_sum < rec.meta["budget"]:
            v.append(f"layer {rec.layer_id}: weighted sum exceeds its budget")

    # Clearance factors by build kind.
    norms_plus_r = None
    if kind in ("unit-ball", "one-bubble"):
        norms = np.linalg.norm(bubbles.centers, axis=1)
        norms_plus_r = norms + bubbles.radii
        if np.any(norms_plus_r >= 1.0):
            v.append("a bubble touches or crosses the unit sphere")
    if kind == "unit-ball":
        clear = 1.0 - np.linalg.norm(bubbles.centers, axis=1)
        bad = np.flatnonzero(bubbles.radii >= clear / 6.0)
        for i in bad[:10]:
            v.append(f"bubble {i}: radius >= (1-|x|)/6")
    elif kind == "one-bubble":
        for rec in config.layers:
            if not rec.r / (1.0 - rec.R) < 1.0 / 9.0:
                v.append(f"layer {rec.layer_id}: r/(1-R) >= 1/9")
    elif kind == "general":
        depth = -config.domain.signed_distance(bubbles.centers)
        bad = np.flatnonzero(bubbles.radii >= depth / 18.0)
        for i in bad[:10]:
            v.append(f"bubble {i}: radius >= dist(x, boundary)/18")
        # per-fill containment: s_x < (a - |x-y|)/6
        for rec in config.layers:
            ids = config.layer_bubble_ids(rec.layer_id)
            yy = np.asarray(rec.center)
            a = rec.meta["a"]
            gap = (a - np.linalg.norm(bubbles.centers[ids] - yy, axis=1)) / 6.0
            if np.any(bubbles.radii[ids] >= gap):
                v.append(f"layer {rec.layer_id}: bubble radius >= (a - |x-y|)/6")
        # per-fill budgets
        fills: dict = {}
        for rec in config.layers:
            key = (rec.meta["level"], rec.center)
            fills.setdefault(key, []).append(rec)
        for (level, _y), recs in fills.items():
            total = math.fsum(rec.weighted_sum for rec in recs)
            if not total < recs[0].meta["delta_y"]:
                v.append(f"fill at level {level}: weighted sum exceeds delta_y")

    weighted = math.fsum(
        rec.count * capacity_phi(rec.r, d) * config.gauges.h(rec.r)
        for rec in config.layers
    )
    if not math.isclose(weighted, config.totals["weighted_sum"], rel_tol=1e-12):
        v.append("recomputed weighted sum disagrees with stored total")
    if config.delta is not None and not weighted < config.delta:
        v.append(f"weighted sum {weighted} not below delta {config.delta}")

    stats = {
        "bubble_count": len(bubbles),
        "layer_count": len(config.layers),
        "weighted_sum": weighted,
        "capacity_sum": config.totals["capacity_sum"],
        "overlaps": len(pairs),
    }
    return AuditReport(ok=not v, violations=v, stats=stats)
