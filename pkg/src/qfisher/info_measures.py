"""Scalar information functionals on grid densities.

Covers the information generating function M_q = int f^q, Tsallis and Renyi
entropies, the entropy power N_q, the two generalized Fisher functionals

    phi(beta, q)[f] = int f^(beta(q-1)+1) (|grad f| / f)^beta dx
    I(beta, q)[f]   = phi(beta, q)[f] / M_q[f]^beta

and the escort transform g ~ f^(1/q).  All integrals are composite Simpson
on the density's grid; nodes where f = 0 contribute exactly 0 (the integrand
is evaluated as f^(beta(q-1)+1-beta) |grad f|^beta to avoid 0/0 at support
boundaries).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Axis, GridDensity, gradient, integrate, normalize

#: |q - 1| below this dispatches to the q = 1 (Shannon) branches, where the
#: (M_q - 1)/(1 - q) form loses precision catastrophically.
Q_ONE_WINDOW = 1e-6


@dataclass(frozen=True)
class InfoIndices:
    """Index bundle (q, beta) with alpha always derived as beta/(beta-1)."""

    q: float
    beta: float
    dim: int = 1

    def __post_init__(self):
        if self.q <= 0:
            raise ValueError(f"q must be positive, got {self.q}")
        if self.beta <= 1:
            raise ValueError(f"beta must exceed 1, got {self.beta}")

    @property
    def alpha(self) -> float:
        return self.beta / (self.beta - 1.0)


def _masked_power(f: GridDensity, expo: float) -> np.ndarray:
    """f^expo on the support, 0 outside (handles expo <= 0 and f = 0)."""
    out = np.zeros_like(f.values)
    m = f.support_mask
    out[m] = f.values[m] ** expo
    return out


def m_q(f: GridDensity, q: float) -> float:
    """Information generating function M_q = int f^q dx (M_0 = |support|)."""
    if q < 0:
        raise ValueError(f"q must be >= 0, got {q}")
    return integrate(f, _masked_power(f, q))


def shannon_entropy(f: GridDensity) -> float:
    """Differential entropy -int f ln f (0 ln 0 = 0)."""
    arr = np.zeros_like(f.values)
    m = f.support_mask
    arr[m] = -f.values[m] * np.log(f.values[m])
    return integrate(f, arr)


def tsallis_entropy(f: GridDensity, q: float) -> float:
    """S_q = (M_q - 1)/(1 - q); Shannon entropy in the q -> 1 limit."""
    if abs(q - 1.0) < Q_ONE_WINDOW:
        return shannon_entropy(f)
    return (m_q(f, q) - 1.0) / (1.0 - q)


def renyi_entropy(f: GridDensity, q: float) -> float:
    """H_q = ln(M_q)/(1 - q); Shannon entropy at q = 1."""
    if abs(q - 1.0) < Q_ONE_WINDOW:
        return shannon_entropy(f)
    return float(np.log(m_q(f, q)) / (1.0 - q))


def entropy_power(f: GridDensity, q: float, dim: int | None = None) -> float:
    """N_q = M_q^((2/n)/(1-q)) = exp((2/n) H_q).

    Both expressions are evaluated and must agree to 1e-10 relative.
    """
    n = f.dim if dim is None else dim
    if abs(q - 1.0) < Q_ONE_WINDOW:
        return float(np.exp(2.0 / n * shannon_entropy(f)))
    mq = m_q(f, q)
    via_m = mq ** (2.0 / n / (1.0 - q))
    via_h = float(np.exp(2.0 / n * renyi_entropy(f, q)))
    if abs(via_m - via_h) > 1e-10 * max(abs(via_m), abs(via_h)):
        raise ArithmeticError(
            f"entropy-power expressions disagree: {via_m!r} vs {via_h!r}"
        )  # pragma: no cover
    return float(via_m)


def _phi_integrand(f: GridDensity, q: float, beta: float) -> np.ndarray:
    grads = gradient(f)
    gnorm2 = np.zeros_like(f.values)
    for g in grads:
        gnorm2 += g * g
    # overflow to inf is the divergence signal handled by the callers
    with np.errstate(over="ignore", invalid="ignore"):
        w = _masked_power(f, beta * (q - 1.0) + 1.0 - beta)
        return w * gnorm2 ** (beta / 2.0)


def phi_fisher(f: GridDensity, q: float, beta: float) -> float:
    """Generalized Fisher functional phi(beta, q)[f]; nonnegative.

    The classical Fisher information int (f')^2 / f is the case
    q = 1, beta = 2.
    """
    if beta <= 1:
        raise ValueError(f"beta must exceed 1, got {beta}")
    return integrate(f, _phi_integrand(f, q, beta))


def i_fisher(f: GridDensity, q: float, beta: float) -> float:
    """Normalized Fisher functional I(beta, q) = phi(beta, q) / M_q^beta.

    At q = 1, M_1 = 1 for any normalized density, so I coincides with phi
    exactly (the quadrature reading of M_1 is not re-applied).
    """
    if abs(q - 1.0) < Q_ONE_WINDOW:
        return phi_fisher(f, q, beta)
    return phi_fisher(f, q, beta) / m_q(f, q) ** beta


@dataclass
class PhiDiagnostic:
    value: float
    diverged: bool
    trace: tuple[float, ...]  # phi at grid spacings 4h, 2h, h


def phi_fisher_refined(f: GridDensity, q: float, beta: float,
                       growth_ratio: float = 1.5) -> PhiDiagnostic:
    """phi with a divergence diagnostic: the integral is re-evaluated on the
    2x and 4x coarsened grids; if the three readings have not stabilized
    (max/min spread above `growth_ratio`), the boundary integrand is treated
    as non-integrable on this family and flagged divergent instead of
    trusted.  (For a divergent edge power the value is dominated by the
    distance of the nearest node to the singularity, which moves erratically
    across coarsenings; a convergent integral agrees across all three.)

    Requires node counts congruent to 1 mod 4 so the coarsenings stay
    Simpson-compatible.
    """
    for a in f.axes:
        if (a.count - 1) % 4 != 0:
            raise ValueError("refinement diagnostic needs counts = 4k + 1 per axis")
    vals = []
    for stride in (4, 2, 1):
        axes = tuple(Axis(a.lo, a.hi, (a.count - 1) // stride + 1) for a in f.axes)
        sl = tuple(slice(None, None, stride) for _ in f.axes)
        sub = GridDensity(axes, f.values[sl])
        vals.append(phi_fisher(sub, q, beta))
    fine = vals[-1]
    top, bot = max(vals), min(vals)
    if not all(np.isfinite(v) for v in vals):
        diverged = True
    elif top == 0.0:
        diverged = False
    else:
        diverged = bot <= 0.0 or top / bot > growth_ratio
    return PhiDiagnostic(value=float(fine), diverged=bool(diverged), trace=tuple(vals))


class EscortDivergenceError(ValueError):
    pass


def escort(f: GridDensity, q: float) -> GridDensity:
    """Escort distribution g ~ f^(1/q), renormalized.

    Raises EscortDivergenceError when the grid visibly truncates a
    non-integrable f^(1/q) tail (f has decayed at the domain edge but f^(1/q)
    has not).
    """
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    if q == 1.0:
        return normalize(f)
    w = _masked_power(f, 1.0 / q)
    _check_escort_tail(f, w)
    return normalize(GridDensity(f.axes, w))


def escort_inverse(g: GridDensity, q: float) -> GridDensity:
    """Inverse escort map f ~ g^q, renormalized (round-trips with escort)."""
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    if q == 1.0:
        return normalize(g)
    return normalize(GridDensity(g.axes, _masked_power(g, q)))


def _check_escort_tail(f: GridDensity, w: np.ndarray):
    """Heuristic truncation check: if f itself carries no boundary mass (a
    genuine tail, not a by-design compact box) while f^(1/q) is still large at
    the boundary, the escort integral diverges off-grid."""
    edge = np.zeros(f.values.shape, dtype=bool)
    for ax in range(f.dim):
        sl0 = [slice(None)] * f.dim
        sl1 = [slice(None)] * f.dim
        sl0[ax] = 0
        sl1[ax] = -1
        edge[tuple(sl0)] = True
        edge[tuple(sl1)] = True
    f_edge = float(f.values[edge].max(initial=0.0))
    w_edge = float(w[edge].max(initial=0.0))
    f_peak = float(f.values.max())
    w_peak = float(w.max())
    if f_peak <= 0 or w_peak <= 0:
        raise ValueError("escort of an identically-zero density")
    if f_edge < 1e-10 * f_peak and w_edge > 1e-6 * w_peak:
        raise EscortDivergenceError(
            "escort integral does not converge on this grid: "
            f"f^(1/q) at the domain edge is {w_edge / w_peak:.3g} of its peak "
            f"while f itself has decayed to {f_edge / max(f_peak, 1e-300):.3g}"
        )


def variance(f: GridDensity) -> float:
    """Scalar variance (1-D) or total variance E||X - EX||^2 (2-D)."""
    coords = f.node_coords()
    means = [integrate(f, c * f.values) for c in coords]
    tot = 0.0
    for c, mu in zip(coords, means):
        tot += integrate(f, (c - mu) ** 2 * f.values)
    return tot


def mean_vector(f: GridDensity) -> np.ndarray:
    coords = f.node_coords()
    return np.array([integrate(f, c * f.values) for c in coords])


def recenter(f: GridDensity, tol: float = 1e-9):
    """Shift the grid axes so the density has zero mean; returns
    (density, shift_applied)."""
    mu = mean_vector(f)
    if np.all(np.abs(mu) <= tol):
        return f, np.zeros(f.dim)
    axes = tuple(Axis(a.lo - m, a.hi - m, a.count) for a, m in zip(f.axes, mu))
    return GridDensity(axes, f.values), mu


def moment_abs(f: GridDensity, alpha: float) -> float:
    """E ||X||^alpha on the grid."""
    coords = f.node_coords()
    r2 = np.zeros_like(f.values)
    for c in coords:
        r2 += c * c
    return integrate(f, r2 ** (alpha / 2.0) * f.values)
