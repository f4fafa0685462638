"""Closed-form predictions for random 2-SAT (and k-SAT) reduction structure.

Everything here is a pure function of the model parameters: the fixed point
theta that governs core/kernel sizes, Poisson mass/tail helpers, census and
size predictions with their deviation scales, scaling-window probabilities,
the pure-literal threshold for k >= 3 and the classical/cloning model
equivalence constants.  Asymptotic o(1) corrections are dropped throughout;
consumers absorb them in tolerances.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

__all__ = [
    "FixedPoint",
    "Prediction",
    "theta_fixed_point",
    "poisson_pmf",
    "poisson_tail",
    "predict_core",
    "predict_kernel",
    "predict_census",
    "window_sub_probs",
    "pla_threshold",
    "equiv_constants",
]

_BISECT_ITERS = 200  # bracket width 2^-200: converges to an fp-adjacent pair


@dataclass(frozen=True)
class FixedPoint:
    """Largest root theta in [0,1] of theta^(1/(k-1)) = 1 - exp(-theta*lam);
    0 when no positive root exists."""

    lam: float
    k: int
    theta: float

    @property
    def mu(self) -> float:
        """Poisson argument theta*lam used by the census predictions."""
        return self.theta * self.lam

    def residual(self) -> float:
        if self.theta == 0.0:
            return 0.0
        return self.theta ** (1.0 / (self.k - 1)) - 1.0 + math.exp(-self.theta * self.lam)


@dataclass(frozen=True)
class Prediction:
    """A predicted metric value together with its deviation scale (the
    standard-deviation order, e.g. (theta*n)^(1/2))."""

    name: str
    value: float
    scale: float


def _bisect(f, lo: float, hi: float) -> float:
    flo = f(lo)
    if flo == 0.0:
        return lo
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if (f(mid) > 0.0) == (flo > 0.0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def theta_fixed_point(lam: float, k: int = 2) -> FixedPoint:
    """Largest solution of theta^(1/(k-1)) - 1 + e^(-theta*lam) = 0.

    k=2: the root is unique and positive exactly when lam > 1 (bracket
    [tiny, 1] and bisect; f > 0 near 0, f(1) < 0).  k>=3: positive roots
    exist iff lam >= lambda(k); the largest one lies in [rho*/lam, 1] where
    the sign changes exactly once.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    if k < 2:
        raise ValueError("k must be >= 2")
    if k == 2:
        if lam <= 1.0:
            return FixedPoint(lam, k, 0.0)
        f = lambda t: -math.expm1(-t * lam) - t  # 1 - e^(-t*lam) - t
        theta = _bisect(f, 1e-12, 1.0)
        return FixedPoint(lam, k, theta)
    thr = pla_threshold(k)
    if lam < thr["lambda_k"]:
        return FixedPoint(lam, k, 0.0)
    g = lambda t: t ** (1.0 / (k - 1)) - 1.0 + math.exp(-t * lam)
    lo = thr["rho_star"] / lam
    if g(lo) > 0.0:  # lam numerically at the threshold; no resolvable root
        return FixedPoint(lam, k, 0.0)
    theta = _bisect(lambda t: -g(t), lo, 1.0)  # g<0 at lo, g(1)=e^-lam>0
    return FixedPoint(lam, k, theta)


def poisson_pmf(l: int, mu: float) -> float:
    """P_l(mu) = Pr[Poi(mu) = l], evaluated in log space."""
    if l < 0:
        raise ValueError("l must be >= 0")
    if mu < 0:
        raise ValueError("mu must be >= 0")
    if mu == 0.0:
        return 1.0 if l == 0 else 0.0
    return math.exp(-mu + l * math.log(mu) - math.lgamma(l + 1))


def poisson_tail(l: int, mu: float) -> float:
    """Q_l(mu) = Pr[Poi(mu) >= l] = 1 - sum_{l' < l} P_l'(mu), clamped to [0,1]."""
    if l < 0:
        raise ValueError("l must be >= 0")
    if mu < 0:
        raise ValueError("mu must be >= 0")
    if l == 0:
        return 1.0
    acc = sum(poisson_pmf(i, mu) for i in range(l))
    return min(1.0, max(0.0, 1.0 - acc))


def _require_supercritical(lam: float):
    if lam <= 1.0:
        raise ValueError("prediction degenerate for lam <= 1 (theta = 0)")


def predict_core(n: int, lam: float) -> dict:
    """Core size: theta^2*n variables and theta^2*lam*n clauses, deviation
    scale (theta*n)^(1/2)."""
    _require_supercritical(lam)
    t = theta_fixed_point(lam).theta
    scale = math.sqrt(t * n)
    return {
        "core_vars": Prediction("core_vars", t * t * n, scale),
        "core_clauses": Prediction("core_clauses", t * t * lam * n, scale),
    }


def predict_kernel(n: int, lam: float) -> dict:
    """Kernel size: theta^2(1-lam^2 e^(-2 theta lam))n variables and
    theta^2 lam (1-lam e^(-2 theta lam))n clauses, scale (theta^3 n)^(1/2)."""
    _require_supercritical(lam)
    t = theta_fixed_point(lam).theta
    e2 = math.exp(-2.0 * t * lam)
    scale = math.sqrt(t ** 3 * n)
    return {
        "kernel_vars": Prediction("kernel_vars", t * t * (1.0 - lam * lam * e2) * n, scale),
        "kernel_clauses": Prediction("kernel_clauses", t * t * lam * (1.0 - lam * e2) * n, scale),
    }


def predict_census(n: int, lam: float, i: int, j: int) -> dict:
    """Census predictions at Poisson argument mu = theta*lam:

    C_ij           -> P_i P_j n            (exact-type count)
    D_union_ij     -> (2 Q_i Q_j - Q_a^2) n, a = max(i,j)  (vars >= (i,j) or (j,i))
    M_ij           -> theta lam (Q_{i-1} Q_j + Q_i Q_{j-1}) n  (degree sum)

    Deviation scale theta^(i+j-3) (theta^3 n)^(1/2).
    """
    _require_supercritical(lam)
    if i < 1 or j < 1:
        raise ValueError("census predictions need (i,j) >= (1,1)")
    t = theta_fixed_point(lam).theta
    mu = t * lam
    P = poisson_pmf
    Q = poisson_tail
    hi, lo = max(i, j), min(i, j)
    scale = t ** (i + j - 3) * math.sqrt(t ** 3 * n)
    return {
        "C_ij": Prediction(f"C_{i}{j}", P(i, mu) * P(j, mu) * n, scale),
        "D_union_ij": Prediction(
            f"D_union_{i}{j}",
            (2.0 * Q(hi, mu) * Q(lo, mu) - Q(hi, mu) ** 2) * n,
            scale,
        ),
        "M_ij": Prediction(
            f"M_{i}{j}",
            mu * (Q(i - 1, mu) * Q(j, mu) + Q(i, mu) * Q(j - 1, mu)) * n,
            scale,
        ),
    }


def window_sub_probs(n: int, sigma: float) -> dict:
    """Subcritical window (lam = 1 - sigma): Pr[kernel nonempty] = 15/(16 s^3 n)
    and Pr[UNSAT] = 1/(16 s^3 n); multiplicative tolerances absorb the o(1)."""
    if not 0.0 < sigma < 1.0:
        raise ValueError("sigma must be in (0,1)")
    s3n = sigma ** 3 * n
    if s3n < 10.0:
        warnings.warn(f"sigma^3*n = {s3n:.3g} is small; window formulas need sigma^3*n >> 1")
    p_k = 15.0 / (16.0 * s3n)
    p_u = 1.0 / (16.0 * s3n)
    return {
        "p_kernel_nonempty": Prediction("p_kernel_nonempty", p_k, p_k),
        "p_unsat": Prediction("p_unsat", p_u, p_u),
    }


def pla_threshold(k: int) -> dict:
    """lambda(k) = min over rho > 0 of rho / (1 - e^(-rho))^(k-1), located by
    golden-section search on (0, 10k) to 1e-10; the objective is unimodal
    there for k >= 3."""
    if k < 3:
        raise ValueError("pla_threshold is defined for k >= 3")

    def h(rho: float) -> float:
        return rho / (-math.expm1(-rho)) ** (k - 1)

    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = 1e-9, 10.0 * k
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = h(c), h(d)
    while b - a > 1e-10:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = h(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = h(d)
    rho = 0.5 * (a + b)
    return {"lambda_k": h(rho), "rho_star": rho}


def _lchoose(a: int, b: int) -> float:
    return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)


def equiv_constants(n: int, p: float, k: int = 2) -> dict:
    """Classical/Poisson-cloning sandwich constants (o(1) terms dropped):

    c1 = sqrt(k) exp((p/n) C(k,2) C(2n,k) + (p^2/2) C(2n,k))
    c2 = exp((p(1-1/k)/(2n)) C(k,2) C(2n,k)) * (k/(k-1)) * ((k-1) c1)^(1/k)

    Binomials are evaluated in log space so n up to 1e6 is safe.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if p < 0:
        raise ValueError("p must be >= 0")
    lc_2n_k = _lchoose(2 * n, k)
    ck2 = math.comb(k, 2)
    exp1 = (p / n) * ck2 * math.exp(lc_2n_k) + (p * p / 2.0) * math.exp(lc_2n_k)
    log_c1 = 0.5 * math.log(k) + exp1
    exp2 = (p * (1.0 - 1.0 / k) / (2.0 * n)) * ck2 * math.exp(lc_2n_k)
    log_c2 = exp2 + math.log(k / (k - 1.0)) + (math.log(k - 1.0) + log_c1) / k
    try:
        c1 = math.exp(log_c1)
    except OverflowError:
        c1 = math.inf
    try:
        c2 = math.exp(log_c2)
    except OverflowError:
        c2 = math.inf
    return {"c1": c1, "c2": c2}
