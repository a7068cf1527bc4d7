"""Smooth same-constraint perturbation families around a q-Gaussian.

Used to certify the variational characterizations: multiply the reference
density by (1 + a b(x)) with b a windowed Fourier bump supported strictly
inside the (effective) support, renormalize, then restore the constraint
(alpha-moment or entropy power) exactly by dilation, both constraints having
known scaling laws (moment ~ c^alpha, N_q ~ c^2 under x -> c x).
"""

from __future__ import annotations

import numpy as np

from .core import Axis, GridDensity, normalize
from .info_measures import entropy_power, moment_abs
from .qgaussian import QGaussianParams, pdf, support_radius, tail_radius

#: number of cos/sin modes in a bump
N_MODES = 8
#: amplitude range of the default perturbation ladder
AMPLITUDE_RANGE = (0.01, 0.2)
#: effective-radius tail mass for unbounded supports
BUMP_TAIL = 1e-9


def fourier_bump(rng: np.random.Generator, n_modes: int = N_MODES):
    """Random smooth bump on [-1, 1]: the first n_modes cos and sin modes
    under a cos^2 window vanishing at the ends, normalized to max |b| = 1."""
    coef = rng.uniform(-1.0, 1.0, size=(2, n_modes))

    def raw(u):
        u = np.asarray(u, dtype=float)
        inside = np.abs(u) < 1.0
        acc = np.zeros_like(u)
        for j in range(1, n_modes + 1):
            acc += coef[0, j - 1] * np.cos(j * np.pi * u) + coef[1, j - 1] * np.sin(j * np.pi * u)
        window = np.where(inside, np.cos(np.pi * u / 2.0) ** 2, 0.0)
        return window * acc

    probe = np.linspace(-1.0, 1.0, 4001)
    peak = float(np.max(np.abs(raw(probe))))
    if peak <= 0:  # pragma: no cover - measure-zero draw
        return lambda u: np.zeros_like(np.asarray(u, dtype=float))
    return lambda u: raw(u) / peak


def amplitude_ladder(n_levels: int, lo: float = AMPLITUDE_RANGE[0],
                     hi: float = AMPLITUDE_RANGE[1]) -> np.ndarray:
    return np.geomspace(lo, hi, n_levels)


def perturbed_density(p: QGaussianParams, bump, amplitude: float, constraint: str,
                      target: float, count: int = 8001) -> GridDensity:
    """Reference density times (1 + amplitude * bump(x / R_eff)), renormalized,
    then dilated so the named constraint ('moment' for E||X||^alpha,
    'entropy_power' for N_q) is restored to `target` exactly."""
    if not 0 <= amplitude < 1:
        raise ValueError(f"amplitude must be in [0, 1), got {amplitude}")
    if p.dim != 1:
        raise ValueError("perturbation families are 1-D")
    r_eff = support_radius(p) if p.q > 1 else tail_radius(p, BUMP_TAIL)
    r_grid = tail_radius(p) * 1.05 if p.q <= 1 else support_radius(p) * 1.05

    def raw(x):
        return pdf(p, x) * (1.0 + amplitude * bump(x / r_eff))

    ax = Axis(-r_grid, r_grid, count)
    base = normalize(GridDensity((ax,), raw(ax.nodes())))
    if constraint == "moment":
        current = moment_abs(base, p.alpha)
        c = (target / current) ** (1.0 / p.alpha)
    elif constraint == "entropy_power":
        current = entropy_power(base, p.q)
        c = np.sqrt(target / current)
    else:
        raise ValueError(f"unknown constraint {constraint!r}")
    ax_c = Axis(ax.lo * c, ax.hi * c, count)
    # exact dilation: f_c(x) = f(x/c)/c, evaluated from the callable on the
    # scaled grid (no interpolation)
    values = raw(ax_c.nodes() / c) / c
    return normalize(GridDensity((ax_c,), values))
