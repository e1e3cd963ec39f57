"""Multiscale parameter system: exponent windows, scale tables, theorem bound.

Scale quantities grow doubly exponentially, so they are carried as base-10
logarithms and only rendered directly when representable.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace


def derive_K(d: int, nu: int, zeta: float) -> float:
    if d < 1 or nu < 1 or not zeta > 0:
        raise ValueError("need d, nu >= 1 and zeta > 0")
    return max(d / nu, zeta)


@dataclass(frozen=True)
class ScheduleParams:
    d: int
    nu: int
    zeta: float
    sigma: float
    R: int
    alpha: float
    gamma: float
    eta: float
    tau: float
    p: float
    q: float
    beta: float
    R_v: int = 0
    R_e: int = 0
    mu_0: float = 1.0
    L_0: int = 10
    C: float = 1.0 / 50.0
    C_kappa: float = 0.01

    @property
    def K(self) -> float:
        return derive_K(self.d, self.nu, self.zeta)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Violation:
    name: str
    text: str
    lhs: float
    rhs: float

    def __str__(self) -> str:
        return f"{self.name}: {self.text} fails ({self.lhs!r} vs {self.rhs!r})"


def _eta_floor(alpha: float, gamma: float, R: float) -> float:
    return gamma / (gamma - 1.0) * (1.0 + 2.0 * alpha * R * (gamma + R) / (gamma - R))


def _tau_ceiling(R: float, K: float, sigma: float, C: float) -> float:
    """Upper end of the 1/tau window, (1 + R^2 K sigma) / C."""
    return (1.0 + R * R * K * sigma) / C


def tau_window(params: ScheduleParams) -> tuple[float, float]:
    """Open interval of admissible tau given alpha, gamma and C."""
    lo = 1.0 / _tau_ceiling(params.R, params.K, params.sigma, params.C)
    hi = 1.0 / _eta_floor(params.alpha, params.gamma, params.R)
    return lo, hi


def validate(params: ScheduleParams) -> list[Violation]:
    """Every violated strict inequality of the parameter chain (empty when valid)."""
    P = params
    K, R, s = P.K, P.R, P.sigma
    out: list[Violation] = []

    def need(name, text, lhs, rhs):
        if not lhs > rhs:
            out.append(Violation(name, text, float(lhs), float(rhs)))

    need("alpha", "alpha > sigma R K", P.alpha, s * R * K)
    need("gamma-upper", "alpha/(sigma K) > gamma", P.alpha / (s * K), P.gamma)
    need("gamma-lower", "gamma > R", P.gamma, R)
    if P.gamma > R and P.gamma > 1:
        floor = _eta_floor(P.alpha, P.gamma, R)
        need("tau-upper", "(1 + R^2 K sigma)/C > 1/tau", _tau_ceiling(R, K, s, P.C), 1.0 / P.tau)
        need("tau-lower", "1/tau > gamma/(gamma-1) (1 + 2 alpha R (gamma+R)/(gamma-R))", 1.0 / P.tau, floor)
        need("eta-upper", "1/tau > eta", 1.0 / P.tau, P.eta)
        need("eta-lower", "eta > gamma/(gamma-1) (1 + 2 alpha R (gamma+R)/(gamma-R))", P.eta, floor)
        p_floor = 2.0 * R * (P.gamma + R) / (P.gamma - R)
        need("p-upper", "((gamma-1) eta - gamma)/(alpha gamma) > p",
             ((P.gamma - 1) * P.eta - P.gamma) / (P.alpha * P.gamma), P.p)
        need("p-lower", "p > 2R (gamma+R)/(gamma-R)", P.p, p_floor)
    need("q-upper", "((gamma-1) eta - p alpha gamma)/gamma > q",
         ((P.gamma - 1) * P.eta - P.p * P.alpha * P.gamma) / P.gamma, P.q)
    need("q-lower", "q > 1", P.q, 1.0)
    need("beta-lower", "beta > 0", P.beta, 0.0)
    need("beta-upper", "1 - 1/gamma > beta", 1.0 - 1.0 / P.gamma, P.beta)
    return out


def suggest(d: int, nu: int, zeta: float, sigma: float, R: int, *, C: float = 1.0 / 50.0,
            mu_0: float = 1.0, L_0: int = 10, C_kappa: float = 0.01,
            R_v: int = 0, R_e: int = 0) -> ScheduleParams:
    """gamma = 2R, alpha = 4 R K sigma, remaining exponents at window midpoints."""
    if min(d, nu, R) < 1 or not (zeta > 0 and sigma > 0 and C > 0):
        raise ValueError("inputs must be positive")
    K = derive_K(d, nu, zeta)
    gamma = 2.0 * R
    alpha = 4.0 * R * K * sigma
    floor = _eta_floor(alpha, gamma, R)
    ceiling = _tau_ceiling(R, K, sigma, C)
    if not floor < ceiling:
        raise ValueError(f"empty eta window ({floor}, {ceiling}); lower C is too large")
    eta = 0.5 * (floor + ceiling)
    tau = 1.0 / (0.5 * (eta + ceiling))
    p_lo = 2.0 * R * (gamma + R) / (gamma - R)
    p_hi = ((gamma - 1) * eta - gamma) / (alpha * gamma)
    p = 0.5 * (p_lo + p_hi)
    q_hi = ((gamma - 1) * eta - p * alpha * gamma) / gamma
    q = 0.5 * (1.0 + q_hi)
    beta = 0.5 * (1.0 - 1.0 / gamma)
    params = ScheduleParams(d, nu, zeta, sigma, R, alpha, gamma, eta, tau, p, q, beta,
                            R_v=R_v, R_e=R_e, mu_0=mu_0, L_0=L_0, C=C, C_kappa=C_kappa)
    bad = validate(params)
    if bad:
        raise ArithmeticError("suggested parameters fail validation: " + "; ".join(map(str, bad)))
    return params


def theorem_bound(params: ScheduleParams) -> float:
    """C / (1 + R^2 sigma K): the largest stretching exponent the decay theorem covers."""
    return params.C / (1.0 + params.R ** 2 * params.sigma * params.K)


@dataclass(frozen=True)
class ScaleRow:
    k: int
    log10_L: float
    log10_T: float
    log10_eps: float
    mu: float

    @staticmethod
    def _direct(log10_v: float) -> float | None:
        return 10.0 ** log10_v if abs(log10_v) < 300 else None

    @property
    def L(self) -> float | None:
        return self._direct(self.log10_L)

    @property
    def T(self) -> float | None:
        return self._direct(self.log10_T)

    @property
    def eps(self) -> float | None:
        return self._direct(self.log10_eps)


@dataclass(frozen=True)
class ScaleTable:
    rows: tuple[ScaleRow, ...]
    log10_kappa: float

    @property
    def kappa(self) -> float:
        return 10.0 ** self.log10_kappa

    @property
    def mu(self) -> list[float]:
        return [r.mu for r in self.rows]


def scale_table(params: ScheduleParams, L_0: int | None = None, mu_0: float | None = None,
                k_max: int = 4) -> ScaleTable:
    """Rows k = 0..k_max of L_k = L_0^(gamma^k), T_k = L_k^eta, eps_k = L_k^-alpha, mu_k."""
    L_0 = params.L_0 if L_0 is None else L_0
    mu_0 = params.mu_0 if mu_0 is None else mu_0
    if L_0 < 2:
        raise ValueError("L_0 must be at least 2")
    if k_max < 0:
        raise ValueError("k_max must be nonnegative")
    rows = []
    log_L = math.log10(L_0)
    mu = mu_0
    for k in range(k_max + 1):
        if k > 0:
            log_L = params.gamma * log_L
            # 1 - L^-beta, without forming L
            mu = mu * -math.expm1(-params.beta * log_L * math.log(10.0))
        rows.append(ScaleRow(k, log_L, params.eta * log_L, -params.alpha * log_L, mu))
    log10_kappa = math.log10(params.C_kappa) - params.alpha * math.log10(L_0)
    return ScaleTable(tuple(rows), log10_kappa)


def with_overrides(params: ScheduleParams, **kw) -> ScheduleParams:
    return replace(params, **kw)
