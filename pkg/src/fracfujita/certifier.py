"""Iteration lower bound for ``w(t)`` and the necessary condition on the datum.

With ``a_1 = C1 r1`` and ``a_{k+1} = C2 r2 a_k^p (p-1)/(p^k-1)`` the iterated
lower bound reads

    w(t) >= a_k M^(p^(k-1)) t^(q_k) (rho^(2/alpha))^(r_k) t^(-alpha N/2)
            [log(t/rho^(2/alpha))]^((p^(k-1)-1)/(p-1))

and, writing ``a_k = exp(-p^k b_k)``, its ``p^(k-1)``-th root tends to the
divergence base ``B = K^p M X^(N/2)`` with ``K = exp(-sup_k b_k)`` and
``X = t^(alpha-1) rho^(2(1-alpha)/alpha) log(t/rho^(2/alpha))``.
``B <= 1`` is the same statement as ``M <= bound_rhs(gamma = K^-p)``.

Everything runs in log space; exponents such as ``p^59`` overflow doubles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .field import BallQuery, Field, ball_integral
from .propagators import AlphaParams
from .special_functions import DomainError, r1_r2

__all__ = [
    "CertifierConstants",
    "IterationTable",
    "NecessaryConditionReport",
    "bound_rhs",
    "check_necessary_condition",
    "divergence_base",
    "gamma_alpha",
    "iteration_table",
    "log_lower_bound_w",
    "lower_bound_w",
]

K_MAX = 60


@dataclass(frozen=True)
class CertifierConstants:
    """Proof constants. ``None`` picks the documented default.

    ``C1 = C2 = (16 pi)^(-N/2)`` by default. ``C3 = None`` derives
    ``C3 = exp(-sup_k b_k)`` from the recursion itself, which makes the
    divergence criterion sharp; with the default ``C4 = 0`` the factor
    ``(r1/r2)^C4`` drops out.
    """

    C1: float | None = None
    C2: float | None = None
    C3: float | None = None
    C4: float = 0.0
    r: float = 1.0

    def __post_init__(self) -> None:
        for name in ("C1", "C2", "C3"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise DomainError(f"{name} must be positive, got {v}")
        if not self.C4 >= 0:
            raise DomainError(f"C4 must be nonnegative, got {self.C4}")
        if not self.r > 0:
            raise DomainError(f"r must be positive, got {self.r}")

    def resolved(self, params: AlphaParams) -> dict[str, float]:
        """Numeric values of all constants for this ``(alpha, N)``."""
        N = params.dim
        c1 = self.C1 if self.C1 is not None else (16.0 * math.pi) ** (-N / 2)
        c2 = self.C2 if self.C2 is not None else (16.0 * math.pi) ** (-N / 2)
        r1, r2 = r1_r2(params.alpha, self.r)
        c3 = self.C3 if self.C3 is not None else math.exp(-_b_sup(params.p, c1 * r1, c2 * r2))
        return {"C1": c1, "C2": c2, "C3": c3, "C4": self.C4, "r": self.r,
                "r1": float(r1), "r2": float(r2)}


def _check_ratio(alpha: float, T: float, rho: float) -> float:
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho}")
    if not T > 0:
        raise DomainError(f"T must be positive, got {T}")
    log_ratio = math.log(T) - (2.0 / alpha) * math.log(rho)
    if not log_ratio > 0:
        raise DomainError(f"need rho^(2/alpha) < T (rho={rho}, T={T}, alpha={alpha})")
    return log_ratio


def bound_rhs(alpha: float, N: int, T: float, rho: float, gamma: float) -> float:
    """``gamma (T/rho^(2/alpha))^((1-alpha)N/2) [log(T/rho^(2/alpha))]^(-N/2)``."""
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    lr = _check_ratio(alpha, T, rho)
    return gamma * math.exp((1.0 - alpha) * N / 2 * lr - N / 2 * math.log(lr))


def _sum_sp(p: float) -> float:
    # S_p = sum_{k>=1} p^(-k-1) log((p^k - 1)/(p - 1)); terms fall like k p^-k
    s, k = 0.0, 1
    while True:
        term = p ** (-k - 1) * math.log((p**k - 1.0) / (p - 1.0))
        s += term
        if k > 1 and term < 1e-18 * s:
            return s
        k += 1


def _b_sup(p: float, c1r1: float, c2r2: float) -> float:
    """``lim b_k``. The increments are positive once ``C2 r2 <= 1``, so this is the supremum."""
    return -math.log(c1r1) / p - math.log(c2r2) / (p * (p - 1.0)) + _sum_sp(p)


@dataclass(frozen=True)
class IterationTable:
    k_max: int
    log_a: np.ndarray
    q: np.ndarray
    r_seq: np.ndarray
    b: np.ndarray
    b_sup: float
    constants: dict = field(default_factory=dict)

    @property
    def a(self) -> np.ndarray:
        """``a_k`` itself; underflows to 0 for large ``k``."""
        with np.errstate(under="ignore"):
            return np.exp(self.log_a)

    def q_closed(self, alpha: float, p: float) -> np.ndarray:
        k = np.arange(1, self.k_max + 1)
        return (alpha - 1.0) * (p ** (k - 1.0) - 1.0) / (p - 1.0)

    def r_closed(self, alpha: float, p: float) -> np.ndarray:
        k = np.arange(1, self.k_max + 1)
        return (1.0 - alpha) * (p ** (k - 1.0) - 1.0) / (p - 1.0)


def iteration_table(params: AlphaParams, consts: CertifierConstants | None = None,
                    k_max: int = K_MAX) -> IterationTable:
    if not 1 <= k_max <= K_MAX:
        raise DomainError(f"k_max must lie in [1, {K_MAX}], got {k_max}")
    consts = consts or CertifierConstants()
    c = consts.resolved(params)
    p, alpha = params.p, params.alpha
    log_c2r2 = math.log(c["C2"] * c["r2"])
    log_a = np.empty(k_max)
    q = np.empty(k_max)
    rs = np.empty(k_max)
    log_a[0] = math.log(c["C1"] * c["r1"])
    q[0] = rs[0] = 0.0
    for k in range(1, k_max):
        # array slot k holds the coefficient a_{k+1} (the recursion starts at a_1)
        log_a[k] = log_c2r2 + p * log_a[k - 1] + math.log((p - 1.0) / (p**k - 1.0))
        q[k] = p * q[k - 1] + (alpha - 1.0)
        rs[k] = p * rs[k - 1] + (1.0 - alpha)
    kk = np.arange(1, k_max + 1, dtype=float)
    b = -log_a * p ** (-kk)
    return IterationTable(k_max, log_a, q, rs, b,
                          _b_sup(p, c["C1"] * c["r1"], c["C2"] * c["r2"]), c)


def log_lower_bound_w(params: AlphaParams, consts: CertifierConstants | None, M: float,
                      rho: float, t: float, k: int) -> float:
    """Natural log of :func:`lower_bound_w`; ``-inf`` when ``M = 0``."""
    if not M >= 0:
        raise DomainError(f"M must be nonnegative, got {M}")
    alpha, N, p = params.alpha, params.dim, params.p
    lr = _check_ratio(alpha, t, rho)
    if not 1 <= k <= K_MAX:
        raise DomainError(f"k must lie in [1, {K_MAX}], got {k}")
    if M == 0:
        return -math.inf
    tab = iteration_table(params, consts, k)
    i = k - 1
    pk1 = p ** (k - 1)
    log_rho_s = (2.0 / alpha) * math.log(rho)
    return float(tab.log_a[i] + pk1 * math.log(M) + tab.q[i] * math.log(t)
                 + tab.r_seq[i] * log_rho_s - alpha * N / 2 * math.log(t)
                 + (pk1 - 1.0) / (p - 1.0) * math.log(lr))


def lower_bound_w(params: AlphaParams, consts: CertifierConstants | None, M: float,
                  rho: float, t: float, k: int) -> float:
    """The ``k``-th iterated lower bound for ``w(t)``, saturating to 0 or ``inf``."""
    v = log_lower_bound_w(params, consts, M, rho, t, k)
    if v > 709.0:
        return math.inf
    return math.exp(v)


def gamma_alpha(params: AlphaParams, consts: CertifierConstants | None = None) -> float:
    """``[C3 (r1/r2)^C4]^(-p)``."""
    c = (consts or CertifierConstants()).resolved(params)
    return (c["C3"] * (c["r1"] / c["r2"]) ** c["C4"]) ** (-params.p)


def divergence_base(params: AlphaParams, consts: CertifierConstants | None, M: float,
                    rho: float, t: float) -> float:
    """``B = [C3 (r1/r2)^C4]^p M X^(N/2)``; the bound sequence blows up when ``B > 1``."""
    if not M >= 0:
        raise DomainError(f"M must be nonnegative, got {M}")
    alpha, N = params.alpha, params.dim
    lr = _check_ratio(alpha, t, rho)
    if M == 0:
        return 0.0
    log_x = (alpha - 1.0) * math.log(t) + (2.0 * (1.0 - alpha) / alpha) * math.log(rho) + math.log(lr)
    log_b = -math.log(gamma_alpha(params, consts)) + math.log(M) + N / 2 * log_x
    return math.exp(log_b) if log_b < 709.0 else math.inf


@dataclass
class NecessaryConditionReport:
    rows: list[dict]
    gamma: float
    constants: dict

    @property
    def max_implied_gamma(self) -> float:
        return max(r["implied_gamma"] for r in self.rows)

    @property
    def holds(self) -> bool:
        return self.max_implied_gamma <= self.gamma


def check_necessary_condition(u0: Field, params: AlphaParams, T: float,
                              lattice: list[BallQuery],
                              consts: CertifierConstants | None = None) -> NecessaryConditionReport:
    """Evaluate ``M(z, rho) / bound_rhs(gamma=1)`` over a lattice of balls.

    The maximum is the smallest ``gamma`` for which the condition holds for
    ``u0``. ``B`` is reported at ``t = T``.
    """
    if not lattice:
        raise DomainError("empty lattice")
    if u0.grid.dim != params.dim:
        raise DomainError("field dimension does not match params.dim")
    c = (consts or CertifierConstants()).resolved(params)
    rows = []
    for q in lattice:
        M = ball_integral(u0, q)
        bound = bound_rhs(params.alpha, params.dim, T, q.radius, 1.0)
        rows.append({"z": q.center, "rho": q.radius, "M": M, "bound": bound,
                     "implied_gamma": M / bound,
                     "B": divergence_base(params, consts, max(M, 0.0), q.radius, T)})
    return NecessaryConditionReport(rows, gamma_alpha(params, consts), c)
