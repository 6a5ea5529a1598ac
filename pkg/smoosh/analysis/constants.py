"""
Special functions and closed-form bounds.

K₀ (modified Bessel function of the second kind, order zero), the pair-capture
constant 𝔭, the resulting mixing-time bound m/𝔭 + c₁√m, and the moment
bounds of the geometric stage duration ζ*.

All formulas are stated on the unit table; larger square tables are rescaled
first (see Table.rescaled_to_unit).
"""

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy import integrate

from smoosh.core.errors import ParameterError, QuadratureError
from smoosh.models.geometry import lens_area

EULER_GAMMA = 0.57721566490153286061
K0_SERIES_LIMIT = 2.0
K0_ASYMPTOTIC_LIMIT = 50.0
# Trapezoid error on the cosh integral is ~exp(-π²/h).
K0_TRAPEZOID_STEP = 0.05
# Integrand cut-off: exp(-z (cosh t - 1)) below exp(-K0_TAIL).
K0_TAIL = 45.0
RESOLVENT_REL_TOLERANCE = 1e-9


def _k0_series(z: float) -> float:
    q = 0.25 * z * z
    term = 1.0
    harmonic = 0.0
    i0 = 1.0
    tail = 0.0
    for k in range(1, 60):
        term *= q / (k * k)
        harmonic += 1.0 / k
        i0 += term
        tail += term * harmonic
        if term * harmonic < 1e-18 * abs(tail):
            break
    return -(math.log(0.5 * z) + EULER_GAMMA) * i0 + tail


def _k0_trapezoid(z: float) -> float:
    upper = math.acosh(1.0 + K0_TAIL / z)
    n = int(math.ceil(upper / K0_TRAPEZOID_STEP))
    t = np.arange(n + 1) * K0_TRAPEZOID_STEP
    values = np.exp(-z * (np.cosh(t) - 1.0))
    return math.exp(-z) * K0_TRAPEZOID_STEP * (values.sum() - 0.5 * values[0])


def _k0_asymptotic(z: float) -> float:
    total = 1.0
    term = 1.0
    for k in range(1, 60):
        term *= -((2 * k - 1) ** 2) / (8.0 * k * z)
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
    return math.sqrt(math.pi / (2.0 * z)) * math.exp(-z) * total


def _k0_scalar(z: float) -> float:
    if not z > 0 or not math.isfinite(z):
        raise ParameterError(f"K0 needs a positive finite argument, got {z}")
    if z <= K0_SERIES_LIMIT:
        return _k0_series(z)
    if z <= K0_ASYMPTOTIC_LIMIT:
        return _k0_trapezoid(z)
    return _k0_asymptotic(z)


def bessel_k0(z):
    """
    Modified Bessel function K₀ for z > 0.

    Power series for z <= 2, trapezoidal rule on ∫₀^∞ exp(-z cosh t) dt up to
    z = 50, asymptotic expansion beyond. Relative accuracy 1e-10 or better on
    [1e-3, 50]. Accepts scalars or arrays.
    """
    arr = np.asarray(z, dtype=float)
    if arr.ndim == 0:
        return _k0_scalar(float(arr))
    return np.vectorize(_k0_scalar, otypes=[float])(arr)


def bessel_k0_quadrature(z: float) -> float:
    """Independent K₀ oracle: adaptive quadrature of ∫₀^∞ exp(-z cosh t) dt."""
    if not z > 0:
        raise ParameterError(f"K0 needs a positive argument, got {z}")
    out = integrate.quad(lambda t: math.exp(-z * (math.cosh(t) - 1.0)) if t < 700 else 0.0,
                         0.0, math.inf, epsabs=0.0, epsrel=1e-13, limit=400, full_output=1)
    if len(out) > 3:
        raise QuadratureError(f"K0 oracle at z={z}: {out[3]}", out[1])
    return math.exp(-z) * out[0]


def _check_model(delta: float, p: float, sigma2: float) -> None:
    if not delta > 0:
        raise ParameterError(f"delta must be positive, got {delta}")
    if not (0.0 < p < 1.0):
        raise ParameterError(f"p must lie strictly between 0 and 1, got {p}")
    if not sigma2 > 0:
        raise ParameterError(f"sigma2 must be positive, got {sigma2}")


def resolvent_rate(delta: float, p: float, sigma2: float) -> float:
    """c = 1 / (2σ²p(1-p)πδ²)."""
    _check_model(delta, p, sigma2)
    return 1.0 / (2.0 * sigma2 * p * (1.0 - p) * math.pi * delta * delta)


def _k0_argument(delta: float, p: float, sigma2: float) -> float:
    return (math.sqrt(2.0) + 2.0 * delta) / (math.sqrt(sigma2) * delta * math.sqrt(math.pi * p * (1.0 - p)))


def frak_p(delta: float, p: float, sigma2: float) -> float:
    """
    Lower bound 𝔭 on the probability that one gather captures a given pair.

    𝔭 = δ² / (2pπσ²(1+2δ)²) · K₀((√2 + 2δ) / (σδ√(πp(1-p))))

    Example:
        >>> round(frak_p(0.3, 0.5, 0.5) * 1e7, 2)
        1.88
    """
    _check_model(delta, p, sigma2)
    prefactor = delta * delta / (2.0 * p * math.pi * sigma2 * (1.0 + 2.0 * delta) ** 2)
    return prefactor * bessel_k0(_k0_argument(delta, p, sigma2))


class ResolventCheck(NamedTuple):
    lhs: float
    rhs: float
    lhs_error: float


def resolvent_bound_check(delta: float, p: float, sigma2: float) -> ResolventCheck:
    """
    Compare the resolvent integral with its closed-form lower bound.

    lhs = (1/π) ∫_{|z|<2δ} K₀(√(2c)|v - z|) φ(|z|) dz at |v| = √2, by 2D
    adaptive quadrature in polar coordinates (θ folded onto [0, π]).
    rhs = K₀(√(2c)(√2 + 2δ)) πδ⁴.

    Raises:
        QuadratureError: If the 2D quadrature does not converge
    """
    _check_model(delta, p, sigma2)
    rate = math.sqrt(2.0 * resolvent_rate(delta, p, sigma2))
    root2 = math.sqrt(2.0)

    def integrand(theta: float, r: float) -> float:
        dist = math.sqrt(max(2.0 + r * r - 2.0 * root2 * r * math.cos(theta), 0.0))
        return bessel_k0(max(rate * dist, 1e-300)) * lens_area(r, delta) * r

    value, err = integrate.dblquad(integrand, 0.0, 2.0 * delta, lambda r: 0.0, lambda r: math.pi,
                                   epsabs=0.0, epsrel=RESOLVENT_REL_TOLERANCE)
    if not math.isfinite(value):
        raise QuadratureError(f"resolvent integral for delta={delta} is not finite", err)
    lhs = 2.0 * value / math.pi
    rhs = bessel_k0(rate * (root2 + 2.0 * delta)) * math.pi * delta ** 4
    return ResolventCheck(lhs, rhs, 2.0 * err / math.pi)


def capture_chain_bound(delta: float, p: float, sigma2: float) -> float:
    """
    End of the capture-probability chain before the final simplification.

    rhs / (2σ²pπδ²(1+2δ)²) = δ² K₀(·) / (2σ²p(1+2δ)²), which is π·𝔭; the
    displayed 𝔭 is the smaller, more conservative value.
    """
    _check_model(delta, p, sigma2)
    rhs = bessel_k0(_k0_argument(delta, p, sigma2)) * math.pi * delta ** 4
    return rhs / (2.0 * sigma2 * p * math.pi * delta ** 2 * (1.0 + 2.0 * delta) ** 2)


def mixing_bound(m: int, delta: float, p: float, sigma2: float, c1: float = 0.0) -> float:
    """Mixing-time bound m/𝔭 + c₁√m for m cards."""
    if m < 2:
        raise ParameterError(f"mixing_bound needs m >= 2, got {m}")
    return m / frak_p(delta, p, sigma2) + c1 * math.sqrt(m)


def lattice_mixing_bound(N: int, m: int, p: float, C: float = 1.0) -> float:
    """C·N³·m/p for the lattice model; C = 1 gives the coefficient of the unknown constant."""
    if N < 2 or m < 1 or not (0.0 < p <= 1.0):
        raise ParameterError("lattice_mixing_bound needs N >= 2, m >= 1 and 0 < p <= 1")
    return C * N ** 3 * m / p


class ZetaMoments(NamedTuple):
    mean: float
    mgf_bound: float


def zeta_moments(frak_p_value: float, alpha: float = 0.0) -> ZetaMoments:
    """
    Mean 1/𝔭 of ζ* and the bound √(𝔭/𝔮)(1 - √(𝔮/(1-α)))⁻¹ on E exp(αζ*).

    Raises:
        ParameterError: Unless 0 < 𝔭 < 1 and 0 <= α < 𝔭
    """
    if not (0.0 < frak_p_value < 1.0):
        raise ParameterError(f"frak_p must lie strictly between 0 and 1, got {frak_p_value}")
    if not (0.0 <= alpha < frak_p_value):
        raise ParameterError(f"the moment generating function is bounded only for 0 <= alpha < {frak_p_value}")
    q = 1.0 - frak_p_value
    bound = math.sqrt(frak_p_value / q) / (1.0 - math.sqrt(q / (1.0 - alpha)))
    return ZetaMoments(1.0 / frak_p_value, bound)


def simulate_zeta_abstract(frak_p_value: float, rng: np.random.Generator, size: Optional[int] = None):
    """
    Sample ζ* = ϱ₁ + ... + ϱ_J, ϱ_i ~ Exp(1), J ~ Geometric(𝔭), J independent of the ϱ.

    A sum of J unit exponentials is Gamma(J, 1), which is how it is drawn.
    """
    if not (0.0 < frak_p_value <= 1.0):
        raise ParameterError(f"frak_p must lie in (0, 1], got {frak_p_value}")
    stages = rng.geometric(frak_p_value, size=size)
    return rng.gamma(stages, 1.0)


def zeta_variance(samples) -> float:
    """Empirical variance b² of ζ* samples."""
    arr = np.asarray(samples, dtype=float)
    if arr.size < 2:
        raise ParameterError("need at least two samples for a variance")
    return float(np.var(arr, ddof=1))


def chebyshev_c1(b2: float, epsilon: float = 0.25) -> float:
    """c₁ = b/√ε, so that P(S_m > m/𝔭 + c₁√m) <= ε by Chebyshev."""
    if b2 < 0 or not (0.0 < epsilon < 1.0):
        raise ParameterError("chebyshev_c1 needs b2 >= 0 and 0 < epsilon < 1")
    return math.sqrt(b2 / epsilon)


@dataclass(frozen=True)
class BoundReport:
    delta: float
    p: float
    sigma2: float
    frak_p: float
    q: float
    resolvent_rate: float
    chain_bound: float
    m: int
    c1: float
    mixing_time: float
    zeta_mean: float
    alpha: float
    mgf_bound: float
    table_side: float = 1.0

    def to_dict(self) -> dict:
        return asdict(self)


def bound_report(delta: float, p: float, sigma2: float, m: int = 52, c1: float = 0.0,
                 alpha: Optional[float] = None, table_side: float = 1.0) -> BoundReport:
    """
    Collect every closed-form quantity for one parameter set.

    Args:
        delta: Palm radius on the given table
        p: Follow probability
        sigma2: Direction variance σ²
        m: Deck size for the mixing bound
        c1: Coefficient of √m
        alpha: MGF argument, default 𝔭/2
        table_side: Side of the square table delta refers to; rescaled to the unit table

    Returns:
        BoundReport
    """
    if not table_side > 0:
        raise ParameterError(f"table_side must be positive, got {table_side}")
    delta = delta / table_side
    value = frak_p(delta, p, sigma2)
    alpha = value / 2.0 if alpha is None else alpha
    moments = zeta_moments(value, alpha)
    return BoundReport(
        delta=delta,
        p=p,
        sigma2=sigma2,
        frak_p=value,
        q=1.0 - value,
        resolvent_rate=resolvent_rate(delta, p, sigma2),
        chain_bound=capture_chain_bound(delta, p, sigma2),
        m=m,
        c1=c1,
        mixing_time=mixing_bound(m, delta, p, sigma2, c1),
        zeta_mean=moments.mean,
        alpha=alpha,
        mgf_bound=moments.mgf_bound,
        table_side=table_side,
    )
