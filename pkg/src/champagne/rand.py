"""Reproducible counter-based random streams (Philox) keyed by a seed plus
an index path, so independent substreams can be derived deterministically."""

from __future__ import annotations

import math

import numpy as np

_MASK64 = (1 << 64) - 1
_MASK128 = (1 << 128) - 1
_GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


def substream(seed: int, *path: int) -> np.random.Generator:
    """Generator for the substream identified by (seed, *path).

    Uses a 128-bit Philox key mixed from the seed and the path indices, so
    the same (seed, path) always yields the same stream and distinct paths
    yield independent streams.
    """
    words = [seed & _MASK64, (seed >> 64) & _MASK64]
    for p in path:
        words.append(p & _MASK64)
    key = 0x243F6A8885A308D3
    for w in words:
        key = ((key * 0x9E3779B97F4A7C15) ^ w) & _MASK128
        key = ((key << 51 | key >> 77) * 0xDA942042E4DD58B5 + 1) & _MASK128
    return np.random.Generator(np.random.Philox(key=key))


def unit_vectors(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    """n uniform directions on the unit sphere in R^d (normalized Gaussians)."""
    v = rng.standard_normal((n, d))
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    # All-zero draws are measure zero; regenerate defensively.
    while np.any(norms == 0.0):
        bad = norms[:, 0] == 0.0
        v[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(v, axis=1, keepdims=True)
    return v / norms


def sphere_fibonacci(n: int, radius: float = 1.0, offset: float = 0.0) -> np.ndarray:
    """Spherical Fibonacci lattice of n points on the 2-sphere of the given
    radius; quasi-uniform, deterministic up to the longitude offset."""
    i = np.arange(n, dtype=float)
    z = 1.0 - (2.0 * i + 1.0) / n
    theta = 2.0 * np.pi * (i / _GOLDEN + offset)
    rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    pts = np.column_stack([rho * np.cos(theta), rho * np.sin(theta), z])
    return radius * pts


def circle_points(n: int, radius: float = 1.0, offset: float = 0.0) -> np.ndarray:
    """n equally spaced points on the circle of the given radius, rotated by
    the offset angle (radians)."""
    ang = offset + 2.0 * np.pi * np.arange(n) / n
    return radius * np.column_stack([np.cos(ang), np.sin(ang)])


def sphere_surface(rng: np.random.Generator, n: int, d: int, radius: float = 1.0) -> np.ndarray:
    """n independent uniform points on the sphere of the given radius."""
    return radius * unit_vectors(rng, n, d)
