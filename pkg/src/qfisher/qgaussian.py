"""Generalized q-Gaussian densities and the Barenblatt self-similar profile.

The family, on R^n with entropic index q > 0, exponent alpha > 1 and scale
gamma > 0:

    G(x) = Z^-1 (1 - (q-1) gamma ||x||^alpha)_+^(1/(q-1))      q != 1
    G(x) = Z^-1 exp(-gamma ||x||^alpha)                        q  = 1

Compact support for q > 1, power tails for q < 1 (integrable when
alpha/(1-q) > n), stretched exponential at q = 1.  Normalizations and
alpha-moments are closed Beta/Gamma integrals; every closed form is
cross-checked against adaptive radial quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate as sp_integrate
from scipy import interpolate as sp_interpolate
from scipy import optimize as sp_optimize
from scipy import special as sp_special

from .core import Axis, GridDensity, normalize, sphere_surface

#: tail mass left outside sampling / gridding windows
DEFAULT_TAIL_MASS = 1e-12
#: knots of the tabulated radial CDF used by the sampler
CDF_KNOTS = 4096


@dataclass(frozen=True)
class QGaussianParams:
    """Parameters (q, alpha, gamma, dim) of a generalized q-Gaussian."""

    q: float
    alpha: float
    gamma: float
    dim: int = 1

    def __post_init__(self):
        if self.q <= 0:
            raise ValueError(f"q must be positive, got {self.q}")
        if self.alpha <= 1:
            raise ValueError(f"alpha must exceed 1, got {self.alpha}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.q < 1 and self.alpha / (1.0 - self.q) <= self.dim:
            raise ValueError(
                f"not integrable: q < 1 requires alpha/(1-q) > n, "
                f"got alpha/(1-q) = {self.alpha / (1.0 - self.q):g} <= n = {self.dim}"
            )

    @property
    def beta(self) -> float:
        """Hoelder conjugate of alpha."""
        return self.alpha / (self.alpha - 1.0)


def support_radius(p: QGaussianParams) -> float:
    """Radius of the support: finite only for q > 1."""
    if p.q > 1:
        return ((p.q - 1.0) * p.gamma) ** (-1.0 / p.alpha)
    return math.inf


def tail_radius(p: QGaussianParams, tail_mass: float = DEFAULT_TAIL_MASS) -> float:
    """Radius enclosing all probability mass except `tail_mass`, from the
    analytic radial CDF (incomplete Beta/Gamma)."""
    n_a = p.dim / p.alpha
    if p.q > 1:
        u = sp_special.betaincinv(n_a, 1.0 / (p.q - 1.0) + 1.0, 1.0 - tail_mass)
        return float((u / ((p.q - 1.0) * p.gamma)) ** (1.0 / p.alpha))
    if p.q == 1:
        return float((sp_special.gammaincinv(n_a, 1.0 - tail_mass) / p.gamma) ** (1.0 / p.alpha))
    s_bar = 1.0 / (1.0 - p.q)
    t = sp_special.betaincinv(n_a, s_bar - n_a, 1.0 - tail_mass)
    return float((t / ((1.0 - t) * (1.0 - p.q) * p.gamma)) ** (1.0 / p.alpha))


def radial_profile(p: QGaussianParams, r) -> np.ndarray:
    """Unnormalized radial profile of the density at radius r >= 0."""
    r = np.asarray(r, dtype=float)
    if p.q == 1:
        return np.exp(-p.gamma * r ** p.alpha)
    base = 1.0 - (p.q - 1.0) * p.gamma * r ** p.alpha
    if p.q > 1:
        return np.where(base > 0, np.maximum(base, 0.0) ** (1.0 / (p.q - 1.0)), 0.0)
    return base ** (1.0 / (p.q - 1.0))


@lru_cache(maxsize=256)
def normalization(p: QGaussianParams) -> float:
    """Normalization constant Z = int (profile) dx, in closed Beta/Gamma form,
    cross-checked against adaptive radial quadrature to 1e-8 relative."""
    n, a, g, q = p.dim, p.alpha, p.gamma, p.q
    omega = sphere_surface(n)
    if q > 1:
        z = omega / a * ((q - 1.0) * g) ** (-n / a) * sp_special.beta(n / a, 1.0 / (q - 1.0) + 1.0)
    elif q == 1:
        z = omega / a * g ** (-n / a) * sp_special.gamma(n / a)
    else:
        s_bar = 1.0 / (1.0 - q)
        z = omega / a * ((1.0 - q) * g) ** (-n / a) * sp_special.beta(n / a, s_bar - n / a)
    z_quad = _radial_mass_quad(p)
    if abs(z - z_quad) > 1e-8 * abs(z):
        raise ArithmeticError(
            f"normalization cross-check failed: closed form {z!r} vs quadrature {z_quad!r}"
        )
    return float(z)


def _radial_mass_quad(p: QGaussianParams) -> float:
    omega = sphere_surface(p.dim)
    upper = support_radius(p)
    if not math.isfinite(upper):
        upper = np.inf

    def integrand(r):
        return radial_profile(p, r) * r ** (p.dim - 1)

    val, _ = sp_integrate.quad(integrand, 0.0, upper, limit=200)
    return omega * val


def pdf(p: QGaussianParams, x) -> np.ndarray:
    """Density at points x.  For dim 1, x is scalar or any array of abscissae;
    for dim >= 2, x has shape (..., dim)."""
    x = np.asarray(x, dtype=float)
    if p.dim == 1:
        r = np.abs(x)
    else:
        if x.shape[-1] != p.dim:
            raise ValueError(f"points must have trailing dim {p.dim}, got shape {x.shape}")
        r = np.linalg.norm(x, axis=-1)
    return radial_profile(p, r) / normalization(p)


def moment_alpha(p: QGaussianParams) -> float:
    """E ||X||^alpha in closed form (Beta-integral ratio)."""
    n_a = p.dim / p.alpha
    if p.q > 1:
        return float(n_a / ((p.q - 1.0) * p.gamma * (n_a + 1.0 / (p.q - 1.0) + 1.0)))
    if p.q == 1:
        return float(p.dim / (p.alpha * p.gamma))
    s_bar = 1.0 / (1.0 - p.q)
    if s_bar - n_a - 1.0 <= 0:
        raise ValueError(
            f"divergent moment: q < 1 requires alpha/(1-q) > n + alpha, "
            f"got alpha/(1-q) = {p.alpha * s_bar:g} <= n + alpha = {p.dim + p.alpha:g}"
        )
    return float(n_a / ((1.0 - p.q) * p.gamma * (s_bar - n_a - 1.0)))


def gamma_for_moment(p: QGaussianParams, target_moment: float) -> float:
    """Scale gamma such that E||X||^alpha = target (root find on the monotone
    map gamma -> moment; the scaling law moment ~ 1/gamma makes this 1-D)."""
    if target_moment <= 0:
        raise ValueError("target moment must be positive")
    base = moment_alpha(QGaussianParams(p.q, p.alpha, 1.0, p.dim))

    def residual(g):
        return moment_alpha(QGaussianParams(p.q, p.alpha, g, p.dim)) - target_moment

    guess = base / target_moment
    lo, hi = guess / 8.0, guess * 8.0
    gamma = sp_optimize.brentq(residual, lo, hi, xtol=1e-14, rtol=1e-14)
    return float(gamma)


def grid_axis_for(p: QGaussianParams, count: int = 4001, tail_mass: float = DEFAULT_TAIL_MASS,
                  margin: float = 1.05) -> Axis:
    """Symmetric axis covering the support (q > 1) or the 1-tail_mass bulk,
    with a small margin so the support edge is interior to the grid."""
    r = tail_radius(p, tail_mass) * margin
    return Axis(-r, r, count)


def grid_density(p: QGaussianParams, count: int = 4001, tail_mass: float = DEFAULT_TAIL_MASS,
                 margin: float = 1.05) -> GridDensity:
    """The density sampled on a suitable tensor grid (dim 1 or 2), normalized."""
    ax = grid_axis_for(p, count, tail_mass, margin)
    if p.dim == 1:
        f = GridDensity((ax,), pdf(p, ax.nodes()))
    elif p.dim == 2:
        xs, ys = np.meshgrid(ax.nodes(), ax.nodes(), indexing="ij")
        pts = np.stack([xs, ys], axis=-1)
        f = GridDensity((ax, ax), pdf(p, pts))
    else:
        raise ValueError("tensor grids support dim 1 or 2 only")
    return normalize(f)


def _radial_inverse_cdf(p: QGaussianParams):
    """Monotone-cubic inverse of the radial CDF, tabulated on CDF_KNOTS."""
    r_max = tail_radius(p, DEFAULT_TAIL_MASS)
    r = np.linspace(0.0, r_max, CDF_KNOTS)
    dens = radial_profile(p, r) * r ** (p.dim - 1)
    cdf = sp_integrate.cumulative_trapezoid(dens, r, initial=0.0)
    cdf /= cdf[-1]
    # keep strictly increasing knots for the interpolant
    keep = np.concatenate([[True], np.diff(cdf) > 0])
    return sp_interpolate.PchipInterpolator(cdf[keep], r[keep])


def params_to_config(p: QGaussianParams) -> str:
    """Flat key = value text block (the CLI configuration format)."""
    return f"q = {p.q!r}\nalpha = {p.alpha!r}\ngamma = {p.gamma!r}\nn = {p.dim}\n"


def params_from_config(text: str) -> QGaussianParams:
    fields = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, val = (t.strip() for t in line.split("=", 1))
        fields[key] = val
    return QGaussianParams(q=float(fields["q"]), alpha=float(fields["alpha"]),
                           gamma=float(fields["gamma"]), dim=int(fields.get("n", 1)))


def samples_to_csv(points: np.ndarray) -> str:
    """One point per row, 17 significant digits."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    return "\n".join(",".join(f"{x:.17g}" for x in row) for row in points) + "\n"


def sample(p: QGaussianParams, seed: int, count: int) -> np.ndarray:
    """i.i.d. draws, shape (count, dim): radius by inverse-CDF on the
    tabulated radial law, direction uniform on the sphere."""
    rng = np.random.default_rng(seed)
    if count == 0:
        return np.empty((0, p.dim))
    inv = _radial_inverse_cdf(p)
    u = rng.uniform(0.0, 1.0, size=count)
    r = np.asarray(inv(u))
    if p.dim == 1:
        sign = rng.choice([-1.0, 1.0], size=count)
        return (r * sign)[:, None]
    vec = rng.normal(size=(count, p.dim))
    vec /= np.linalg.norm(vec, axis=1, keepdims=True)
    return r[:, None] * vec


# ---------------------------------------------------------------------------
# Closed-form information functionals of the family (independent references
# for the grid-quadrature routes)
# ---------------------------------------------------------------------------

def closed_form_m_q(p: QGaussianParams) -> float:
    """M_q = int G^q dx = Z^(1-q) (1 - (q-1) gamma m_alpha) with m_alpha the
    alpha-moment (integrate u^(s+1) = u * u^s against the profile)."""
    if p.q == 1:
        return 1.0
    if p.q < 1 and p.alpha * p.q / (1.0 - p.q) <= p.dim:
        raise ValueError(f"M_q diverges: q alpha/(1-q) = {p.alpha * p.q / (1.0 - p.q):g} <= n")
    z = normalization(p)
    return float(z ** (1.0 - p.q) * (1.0 - (p.q - 1.0) * p.gamma * moment_alpha(p)))


def closed_form_phi_fisher(p: QGaussianParams) -> float:
    """phi(beta, q)[G] = (gamma alpha)^beta Z^(-beta(q-1)) m_alpha, for beta
    the Hoelder conjugate of the family's own alpha (the exponent algebra
    collapses the boundary powers: (alpha-1) beta = alpha)."""
    z = normalization(p)
    return float((p.gamma * p.alpha) ** p.beta * z ** (-p.beta * (p.q - 1.0)) * moment_alpha(p))


def closed_form_i_fisher(p: QGaussianParams) -> float:
    """I(beta, q)[G] = (gamma alpha)^beta m_alpha / (1 - (q-1) gamma m_alpha)^beta."""
    m_a = moment_alpha(p)
    return float((p.gamma * p.alpha) ** p.beta * m_a / (1.0 - (p.q - 1.0) * p.gamma * m_a) ** p.beta)


def closed_form_entropy_power(p: QGaussianParams) -> float:
    """N_q[G]; at q = 1 via the Shannon entropy ln Z + n/alpha."""
    if p.q == 1:
        h = math.log(normalization(p)) + p.dim / p.alpha
        return float(math.exp(2.0 * h / p.dim))
    return float(closed_form_m_q(p) ** (2.0 / p.dim / (1.0 - p.q)))


def closed_form_stam_product(p: QGaussianParams) -> float:
    """I(beta, q)[G]^(1/beta) N_q[G]^(1/2) -- the reference side of the Stam
    inequality (scale invariant: I ~ c^-beta and N ~ c^2 under dilation)."""
    return float(closed_form_i_fisher(p) ** (1.0 / p.beta)
                 * closed_form_entropy_power(p) ** 0.5)


def gamma_for_entropy_power(p: QGaussianParams, target_n: float) -> float:
    """Scale gamma so N_q[G] = target (root find; N ~ gamma^(-2/alpha))."""
    if target_n <= 0:
        raise ValueError("target entropy power must be positive")
    base = closed_form_entropy_power(QGaussianParams(p.q, p.alpha, 1.0, p.dim))

    def residual(log_g):
        gam = math.exp(log_g)
        return closed_form_entropy_power(QGaussianParams(p.q, p.alpha, gam, p.dim)) - target_n

    guess = (base / target_n) ** (p.alpha / 2.0)
    lo, hi = math.log(guess / 8.0), math.log(guess * 8.0)
    log_g = sp_optimize.brentq(residual, lo, hi, xtol=1e-13, rtol=1e-13)
    return float(math.exp(log_g))


# ---------------------------------------------------------------------------
# Doubly nonlinear diffusion: parameters and the Barenblatt profile
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiffusionParams:
    """Parameters of f_t = div(|grad f^m|^(beta-2) grad f^m) on R^n.

    Derived quantities: alpha = beta/(beta-1) (Hoelder conjugate),
    q = m + 1 - alpha/beta, delta = n(beta-1)m + beta - n, and the profile
    constants of the self-similar solution
        f(x, t) = t^(-n/delta) B(x t^(-1/delta)),
        B(x) = (C - k |x|^alpha)_+^(1/(q-1))          (q != 1)
        B(x) = C exp(-rate |x|^alpha)                 (q  = 1)
    with k = (m(beta-1) - 1) / (m beta) * delta^(-1/(beta-1)) and
    rate = (beta-1) / (m beta) * delta^(-1/(beta-1)).  (Direct substitution
    in the PDE fixes the 1/m factor; at m = 1, beta = 2 these reduce to the
    familiar heat-kernel constants.)
    """

    m: float
    beta: float
    dim: int = 1

    def __post_init__(self):
        if self.beta <= 1:
            raise ValueError(f"beta must exceed 1, got {self.beta}")
        if self.m <= 0:
            raise ValueError(f"m must be positive, got {self.m}")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.delta <= 0:
            raise ValueError(f"self-similarity requires delta > 0, got {self.delta}")
        if self.m * (self.beta - 1.0) + self.beta / self.dim - 1.0 <= 0:
            raise ValueError("Barenblatt existence requires m(beta-1) + beta/n - 1 > 0")

    @property
    def alpha(self) -> float:
        return self.beta / (self.beta - 1.0)

    @property
    def q(self) -> float:
        return self.m + 1.0 - self.alpha / self.beta

    @property
    def delta(self) -> float:
        return self.dim * (self.beta - 1.0) * self.m + self.beta - self.dim

    @property
    def k(self) -> float:
        return ((self.m * (self.beta - 1.0) - 1.0) / (self.m * self.beta)
                * self.delta ** (-1.0 / (self.beta - 1.0)))

    @property
    def profile_rate(self) -> float:
        """Decay rate of the exponential branch (q = 1, i.e. m(beta-1) = 1)."""
        return ((self.beta - 1.0) / (self.m * self.beta)
                * self.delta ** (-1.0 / (self.beta - 1.0)))

    @property
    def is_q1(self) -> bool:
        return abs(self.m * (self.beta - 1.0) - 1.0) < 1e-12


def barenblatt_profile(dp: DiffusionParams, C: float, xi) -> np.ndarray:
    """Self-similar profile B at similarity coordinate xi."""
    xi = np.asarray(xi, dtype=float)
    r = np.abs(xi) if dp.dim == 1 else np.linalg.norm(xi, axis=-1)
    if dp.is_q1:
        return C * np.exp(-dp.profile_rate * r ** dp.alpha)
    base = C - dp.k * r ** dp.alpha
    expo = 1.0 / (dp.q - 1.0)
    if dp.q > 1:
        return np.where(base > 0, np.maximum(base, 0.0) ** expo, 0.0)
    return base ** expo


def barenblatt(dp: DiffusionParams, C: float, x, t: float) -> np.ndarray:
    """Self-similar solution f(x, t) = t^(-n/delta) B(x t^(-1/delta))."""
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    x = np.asarray(x, dtype=float)
    scale = t ** (1.0 / dp.delta)
    return t ** (-dp.dim / dp.delta) * barenblatt_profile(dp, C, x / scale)


def barenblatt_mass(dp: DiffusionParams, C: float) -> float:
    """Total mass of the profile B, by adaptive radial quadrature."""
    if C <= 0:
        raise ValueError("C must be positive")
    omega = sphere_surface(dp.dim)
    if dp.is_q1 or dp.q < 1:
        upper = np.inf
    else:
        upper = (C / dp.k) ** (1.0 / dp.alpha)

    def integrand(r):
        return float(barenblatt_profile(dp, C, r) * r ** (dp.dim - 1))

    val, _ = sp_integrate.quad(integrand, 0.0, upper, limit=200)
    return omega * val


def barenblatt_mass_constant(dp: DiffusionParams, mass: float = 1.0) -> float:
    """The constant C giving the profile total mass `mass`, by 1-D root
    finding on the monotone map C -> mass(C) (tolerance 1e-10 on mass)."""
    if mass <= 0:
        raise ValueError("mass must be positive")

    def residual(log_c):
        return barenblatt_mass(dp, math.exp(log_c)) - mass

    lo, hi = -2.0, 2.0
    for _ in range(60):
        if residual(lo) * residual(hi) < 0:
            break
        lo -= 2.0
        hi += 2.0
    else:
        raise ArithmeticError(
            f"mass root-finding failed to bracket: C in [{math.exp(lo):g}, {math.exp(hi):g}]"
        )
    log_c = sp_optimize.brentq(residual, lo, hi, xtol=1e-15, rtol=1e-15)
    c = float(math.exp(log_c))
    resid = barenblatt_mass(dp, c) - mass
    if abs(resid) > 1e-10:
        raise ArithmeticError(f"mass residual {resid:g} exceeds 1e-10 at C = {c!r}")
    return c


def barenblatt_density(dp: DiffusionParams, t: float, axis: Axis, C: float | None = None) -> GridDensity:
    """Unit-mass (by default) Barenblatt solution sampled at time t on `axis`."""
    if dp.dim != 1:
        raise ValueError("gridded Barenblatt densities are 1-D")
    if C is None:
        C = barenblatt_mass_constant(dp)
    return GridDensity((axis,), barenblatt(dp, C, axis.nodes(), t))


def barenblatt_equivalent_qgaussian(dp: DiffusionParams, C: float, t: float) -> QGaussianParams:
    """The q-Gaussian parameters matching the Barenblatt solution's shape at
    fixed time t (q != 1 branch): gamma = k t^(-alpha/delta) / (C (q-1))."""
    if dp.is_q1:
        raise ValueError("q = 1 branch: use the exponential generalized Gaussian directly")
    gamma = dp.k * t ** (-dp.alpha / dp.delta) / (C * (dp.q - 1.0))
    return QGaussianParams(dp.q, dp.alpha, gamma, dp.dim)
