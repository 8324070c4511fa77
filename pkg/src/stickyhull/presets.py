"""Named initial data sets on the interval [-4, 4]."""

from __future__ import annotations

import numpy as np

from .grid import GridFunction
from .particles import InitialData

DOMAIN = (-4.0, 4.0)
PRESETS = (
    "uniform-block",
    "two-block-headon",
    "triangular",
    "riemann-shear",
    "random-bump",
    "narrow-headon",
)


def _block(x: np.ndarray, h: float, a: float, b: float, height: float) -> np.ndarray:
    """Cell averages of ``height * 1[a, b]`` over ``[x - h/2, x + h/2]``.

    The trapezoid mass of the samples equals ``height * (b - a)`` exactly.
    """
    overlap = np.clip(np.minimum(x + 0.5 * h, b) - np.maximum(x - 0.5 * h, a), 0.0, None)
    return height * overlap / h


def _random_bump(x: np.ndarray, h: float, eps: float, seed: int):
    rng = np.random.default_rng(seed)
    window = np.clip(1.0 - (x / 2.0) ** 2, 0.0, None) ** 2
    centers = rng.uniform(-1.0, 1.0, 3)
    widths = rng.uniform(0.3, 0.6, 3)
    weights = rng.uniform(0.5, 1.0, 3)
    bumps = sum(w * np.exp(-0.5 * ((x - c) / s) ** 2) for w, c, s in zip(weights, centers, widths))
    rho = window * bumps
    rho /= np.sum(rho) * h
    if eps > 0:
        cap = 0.8 / eps
        flat = window / (np.sum(window) * h)
        if flat.max() >= cap:
            raise ValueError(f"random-bump cannot satisfy the packing bound for eps={eps}")
        a = 0.0
        while (1 - a) * rho.max() + a * flat.max() > cap and a < 1.0:
            a = min(1.0, a + 0.05)
        rho = (1 - a) * rho + a * flat
        rho /= np.sum(rho) * h
    amp = rng.uniform(-1.0, 1.0, 3)
    phase = rng.uniform(0.0, 2 * np.pi, 3)
    u = sum(a_k * np.sin((k + 1) * np.pi * x / 2.0 + p) for k, (a_k, p) in enumerate(zip(amp, phase)))
    # a converging component so that every seed produces collisions
    u = u / np.max(np.abs(u[np.abs(x) <= 2.0])) - 0.5 * x
    inside = np.abs(x) <= 2.0
    u = np.where(inside, u / np.max(np.abs(u[inside])), 0.0)
    return rho, u


def make_preset(name: str, eps: float, n: int = 4096, seed: int = 0) -> InitialData:
    """Build a preset on the ``n``-cell grid of ``[-4, 4]``.

    ``n`` should be a power of two so block edges fall on nodes.
    """
    lo, hi = DOMAIN
    x = np.linspace(lo, hi, n + 1)
    h = (hi - lo) / n
    if name == "uniform-block":
        rho = _block(x, h, 0.0, 1.0, 1.0)
        u = np.full_like(x, 0.5)
    elif name == "two-block-headon":
        rho = _block(x, h, -3.0, -1.0, 0.25) + _block(x, h, 1.0, 3.0, 0.25)
        u = np.sign(-x)
    elif name == "triangular":
        rho = np.clip(1.0 - np.abs(x), 0.0, None)
        u = -x
    elif name == "riemann-shear":
        rho = _block(x, h, -1.0, 1.0, 0.5)
        u = np.where(x < 0, 1.0, -0.5)
    elif name == "random-bump":
        rho, u = _random_bump(x, h, eps, seed)
    elif name == "narrow-headon":
        rho = _block(x, h, -1.0625, -0.9375, 4.0) + _block(x, h, 0.9375, 1.0625, 4.0)
        u = np.sign(-x)
    else:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return InitialData(GridFunction(lo, hi, rho), GridFunction(lo, hi, u), eps)
