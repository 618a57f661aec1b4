"""Optimal (pi, kappa) for each friction regime via the case-by-case
characterizations, with regime labels and optimality certificates.

Every scalar root here is a bracketing bisection on a function that is
monotone by construction: h(kappa; .) is strictly decreasing in kappa, the
all-risky allocation map pi(xi).1 is strictly decreasing in the shadow rate,
and the large-investor position pi(m) is strictly increasing in m.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (BracketError, CaseMismatch, NoInteriorSolution, NoRoot,
                     NoSolution, NoThreshold, SOCViolation)
from .hamiltonian import (Certificate, DEFAULT_CERT_TOL, ObjectiveEval,
                          certify, eval_objective)
from .jumps import JumpFunctionals
from .models import (BetaJumps, DifferentialRates, FrictionSpec, Frictionless,
                     JumpLaw, LargeInvestor, LinearPremium, MarketModel,
                     Policy, PortfolioPremium, PremiumSchedule, SmoothG,
                     Utility, require_valid)
from .rootfind import bisect, expand_bracket

CORNER_TIE = 1e-12
KAPPA_XTOL = 1e-10
XI_XTOL = 1e-11          # keeps |pi.1 - 1| <= 1e-8 in case iii
ETA_XTOL = 1e-8


@dataclass(frozen=True)
class SolveReport:
    """Solver output: certified policy plus regime diagnostics.

    xi_star is the shadow rate in [r, R] for differential rates, the active
    price-pressure m in [m+, m-] for the large investor, and None otherwise.
    """
    policy: Policy
    case_label: str
    xi_star: float | None
    objective: ObjectiveEval
    certificate: Certificate
    iterations: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)


def _kappa_upper(jumps: JumpLaw, eta: float) -> tuple[float, bool]:
    """Upper end of the kappa search interval.

    The kappa = 1 corner is excluded a priori when the Beta functional
    E[Y/(1-Y)^eta] diverges (eta >= beta with lambda > 0).
    """
    if jumps.lam > 0 and isinstance(jumps.law, BetaJumps) \
            and eta >= jumps.law.beta:
        return 1.0 - 1e-9, False
    return 1.0, True


def _solve_kappa(h, jumps: JumpLaw, eta: float):
    """Root of the strictly decreasing h on [0, 1] with corner handling.

    Returns (kappa, tag, iterations, residual); tag is "lo"/"hi" for strict
    corners, "tie" when h vanishes at a corner (labeled as the interior
    case) and "interior" otherwise.
    """
    hi, corner_ok = _kappa_upper(jumps, eta)
    h0 = h(0.0)
    if h0 < -CORNER_TIE:
        return 0.0, "lo", 0, h0
    if abs(h0) <= CORNER_TIE:
        return 0.0, "tie", 0, h0
    h1 = h(hi)
    if corner_ok and h1 > CORNER_TIE:
        return 1.0, "hi", 0, h1
    if corner_ok and abs(h1) <= CORNER_TIE:
        return 1.0, "tie", 0, h1
    if h1 >= 0.0:
        # corner excluded (eta >= beta); the root is within 1e-9 of 1
        return hi, "interior", 0, h1
    res = bisect(h, 0.0, hi, xtol=KAPPA_XTOL, flo=h0, fhi=h1)
    return res.root, "interior", res.iterations, res.residual


_ROMAN = {("i", "interior"): "i", ("i", "tie"): "i",
          ("i", "lo"): "iv", ("i", "hi"): "vi",
          ("ii", "interior"): "ii", ("ii", "tie"): "ii",
          ("ii", "lo"): "v", ("ii", "hi"): "vii"}


def _case_label(prefix: str, family: str, tag: str) -> str:
    if family == "iii":
        return f"{prefix}-iii"
    return f"{prefix}-{_ROMAN[(family, tag)]}"


def _corner_consistency(obj: ObjectiveEval, premium: PremiumSchedule,
                        kappa: float, tol: float = 1e-9) -> float:
    """Corner optimality inequalities, returned as a violation magnitude."""
    if kappa <= 0.0:
        return max(obj.dH_dkappa - premium.derivative(0.0), 0.0)
    if kappa >= 1.0:
        return max(premium.derivative(1.0) - obj.dH_dkappa, 0.0)
    return 0.0


# ---------------------------------------------------------------------------
# Differential borrowing/lending rates
# ---------------------------------------------------------------------------

class _DiffRatesKernel:
    """kappa(xi) and pi(xi) maps shared by the solver and threshold search."""

    def __init__(self, model: MarketModel, jumps: JumpLaw,
                 premium: PremiumSchedule, cache: JumpFunctionals):
        self.model = model
        self.jumps = jumps
        self.premium = premium
        self.cache = cache
        self.ones = np.ones(model.d)
        self.SST = model.sigma @ model.sigma.T
        self.hedge_dir = np.linalg.solve(model.sigma.T, model.rho) * model.b
        self.rho2 = float(model.rho @ model.rho)

    def kappa_of_xi(self, xi: float, eta: float):
        m = self.model
        lam = self.jumps.lam
        bB = m.b * float(m.rho @ np.linalg.solve(m.sigma,
                                                 m.mu - xi * self.ones))
        slope = eta * m.b * m.b * (1.0 - self.rho2)

        def h(k):
            jump = lam * self.cache.psi(k, eta) if lam > 0 else 0.0
            return bB - slope * k - jump - self.premium.derivative(k)

        return _solve_kappa(h, self.jumps, eta)

    def pi_of_xi(self, xi: float, eta: float):
        kappa, tag, iters, hres = self.kappa_of_xi(xi, eta)
        pi = np.linalg.solve(self.SST, self.model.mu - xi * self.ones) / eta \
            + self.hedge_dir * kappa
        return pi, kappa, tag, iters, hres

    def pi_sum(self, xi: float, eta: float) -> float:
        return float(self.pi_of_xi(xi, eta)[0].sum())


def solve_diff_rates(model: MarketModel, jumps: JumpLaw,
                     premium: PremiumSchedule, utility: Utility,
                     cert_tol: float = DEFAULT_CERT_TOL,
                     cache: JumpFunctionals | None = None,
                     _friction: FrictionSpec | None = None,
                     _label_prefix: str = "DiffRates") -> SolveReport:
    """Differential-rates regime: own funds (i), leverage (ii) or all-risky
    with a shadow rate (iii), with kappa corners labeled iv-vii."""
    friction = _friction or DifferentialRates(premium)
    require_valid(model, jumps, friction, utility)
    cache = cache or JumpFunctionals(jumps)
    eta = utility.eta
    kern = _DiffRatesKernel(model, jumps, premium, cache)
    r, R = model.r, model.R
    iterations: dict = {}
    residuals: dict = {}

    pi_r, k_r, tag_r, it_r, hres_r = kern.pi_of_xi(r, eta)
    s_r = float(pi_r.sum())
    if s_r < 1.0:
        family, xi_star = "i", r
        pi_hat, k_hat, tag = pi_r, k_r, tag_r
        iterations["kappa"] = it_r
        residuals["h"] = hres_r
    else:
        pi_R, k_R, tag_R, it_R, hres_R = kern.pi_of_xi(R, eta)
        s_R = float(pi_R.sum())
        if s_R > 1.0:
            family, xi_star = "ii", R
            pi_hat, k_hat, tag = pi_R, k_R, tag_R
            iterations["kappa"] = it_R
            residuals["h"] = hres_R
        else:
            family = "iii"
            if R - r <= XI_XTOL:
                xi_star = r
            else:
                res = bisect(lambda xi: kern.pi_sum(xi, eta) - 1.0, r, R,
                             xtol=XI_XTOL, flo=s_r - 1.0, fhi=s_R - 1.0)
                xi_star = res.root
                iterations["xi"] = res.iterations
                residuals["pi_sum"] = res.residual
            pi_hat, k_hat, tag, it_s, hres_s = kern.pi_of_xi(xi_star, eta)
            iterations["kappa"] = it_s
            residuals["h"] = hres_s

    policy = Policy(pi=pi_hat, kappa=k_hat)
    obj = eval_objective(policy, model, jumps, friction, utility, cache)
    corner_violation = _corner_consistency(obj, premium, k_hat)
    residuals["corner"] = corner_violation
    cert = certify(policy, model, jumps, friction, utility, tol=cert_tol,
                   cache=cache, obj=obj)
    residuals["certificate"] = cert.residual
    if not cert.passes or corner_violation > 1e-7:
        raise NoSolution(
            f"certification failed: label={_case_label(_label_prefix, family, tag)} "
            f"residual={cert.residual:.3e} in_domain={cert.in_domain} "
            f"corner_violation={corner_violation:.3e}")
    return SolveReport(policy=policy,
                       case_label=_case_label(_label_prefix, family, tag),
                       xi_star=xi_star, objective=obj, certificate=cert,
                       iterations=iterations, residuals=residuals)


def solve_frictionless(model: MarketModel, jumps: JumpLaw,
                       premium: PremiumSchedule, utility: Utility,
                       cert_tol: float = DEFAULT_CERT_TOL,
                       cache: JumpFunctionals | None = None) -> SolveReport:
    """No portfolio friction: the R = r special case of differential rates."""
    flat = model.replace(R=model.r)
    return solve_diff_rates(flat, jumps, premium, utility, cert_tol=cert_tol,
                            cache=cache, _friction=Frictionless(premium),
                            _label_prefix="Frictionless")


def threshold_etas(model: MarketModel, jumps: JumpLaw,
                   premium: PremiumSchedule,
                   lo: float = 1e-3, hi: float | None = None,
                   xtol: float = ETA_XTOL) -> tuple[float, float]:
    """Risk-aversion thresholds (eta_R, eta_r) bracketing the all-risky band.

    eta_R solves pi(R, eta).1 = 1 and eta_r solves pi(r, eta).1 = 1.
    """
    require_valid(model, jumps, DifferentialRates(premium),
                  Utility(eta=max(lo, 1e-3)))
    if hi is None:
        if isinstance(jumps.law, BetaJumps):
            hi = jumps.law.beta - 1e-3
        else:
            hi = 64.0
    cache = JumpFunctionals(jumps)
    kern = _DiffRatesKernel(model, jumps, premium, cache)

    def threshold_at(xi: float) -> float:
        f = lambda eta: kern.pi_sum(xi, eta) - 1.0
        f_lo, f_hi = f(lo), f(hi)
        if (f_lo > 0) == (f_hi > 0):
            raise NoThreshold(
                f"pi(xi={xi}).1 - 1 has no sign change for eta in "
                f"({lo}, {hi}): endpoints {f_lo:.3e}, {f_hi:.3e}")
        return bisect(f, lo, hi, xtol=xtol, flo=f_lo, fhi=f_hi).root

    return threshold_at(model.R), threshold_at(model.r)


# ---------------------------------------------------------------------------
# Smooth strictly concave g (one risky asset)
# ---------------------------------------------------------------------------

def _normalize_smooth_g(premium: PremiumSchedule, g) -> SmoothG:
    if isinstance(g, SmoothG):
        return SmoothG(premium=premium, g=g.g, g_prime=g.g_prime,
                       g_second=g.g_second)
    g_fn, gp, gpp = g
    return SmoothG(premium=premium, g=g_fn, g_prime=gp, g_second=gpp)


def solve_smooth_g(model: MarketModel, jumps: JumpLaw,
                   premium: PremiumSchedule, g, utility: Utility,
                   cert_tol: float = DEFAULT_CERT_TOL,
                   cache: JumpFunctionals | None = None) -> SolveReport:
    """Smooth-friction regime: invert Q = eta sigma^2 pi - g' and solve the
    retained-fraction equation h(kappa) = 0, corners per the optimality
    system's kappa inequalities.

    g is a SmoothG friction or a (g, g', g'') triple of callables.
    """
    friction = _normalize_smooth_g(premium, g)
    require_valid(model, jumps, friction, utility)
    cache = cache or JumpFunctionals(jumps)
    eta = utility.eta
    mu, sig, rho = model.d1()
    b, lam = model.b, jumps.lam
    r = model.r
    iterations: dict = {}
    residuals: dict = {}

    def Q(x: float) -> float:
        return eta * sig * sig * x - float(friction.g_prime(x))

    def Q_inv(target: float) -> float:
        x0 = target / (eta * sig * sig)
        try:
            lo_b, hi_b = expand_bracket(lambda x: Q(x) - target, x0=x0,
                                        step=max(1.0, abs(x0)))
        except BracketError as exc:
            raise BracketError(
                f"argument {target:.6g} left the range of Q") from exc
        return bisect(lambda x: Q(x) - target, lo_b, hi_b, xtol=1e-12).root

    def h(k: float) -> float:
        pi_k = Q_inv(mu - r + eta * sig * rho * b * k)
        jump = lam * cache.psi(k, eta) if lam > 0 else 0.0
        return eta * b * (sig * rho * pi_k - b * k) - jump \
            - premium.derivative(k)

    k_hat, tag, it_k, hres = _solve_kappa(h, jumps, eta)
    iterations["kappa"] = it_k
    residuals["h"] = hres
    pi_hat = Q_inv(mu - r + eta * sig * rho * b * k_hat)

    policy = Policy(pi=np.array([pi_hat]), kappa=k_hat)
    obj = eval_objective(policy, model, jumps, friction, utility, cache)
    corner_violation = _corner_consistency(obj, premium, k_hat)
    residuals["corner"] = corner_violation
    cert = certify(policy, model, jumps, friction, utility, tol=cert_tol,
                   cache=cache, obj=obj)
    residuals["certificate"] = cert.residual
    if not cert.passes or corner_violation > 1e-7:
        raise NoSolution(f"smooth-g certification failed: "
                         f"residual={cert.residual:.3e} "
                         f"in_domain={cert.in_domain}")
    label = {"interior": "SmoothG-1", "tie": "SmoothG-1",
             "lo": "SmoothG-2", "hi": "SmoothG-3"}[tag]
    return SolveReport(policy=policy, case_label=label, xi_star=None,
                       objective=obj, certificate=cert,
                       iterations=iterations, residuals=residuals)


# ---------------------------------------------------------------------------
# Large investor with piecewise-constant price pressure (one risky asset)
# ---------------------------------------------------------------------------

def solve_large_investor(model: MarketModel, jumps: JumpLaw,
                         premium: PremiumSchedule, m_plus: float,
                         m_minus: float, utility: Utility,
                         cert_tol: float = DEFAULT_CERT_TOL,
                         cache: JumpFunctionals | None = None) -> SolveReport:
    """Large-investor regime: mirror of differential rates with the price
    pressure interval [m+, m-] in place of [r, R] and the hyperplane pi = 0
    in place of pi.1 = 1."""
    friction = LargeInvestor(premium=premium, m_plus=m_plus, m_minus=m_minus)
    require_valid(model, jumps, friction, utility)
    cache = cache or JumpFunctionals(jumps)
    eta = utility.eta
    mu, sig, rho = model.d1()
    b, lam = model.b, jumps.lam
    r = model.r
    iterations: dict = {}
    residuals: dict = {}

    def kappa_of_m(m: float):
        base = b * rho * (mu + m - r) / sig
        slope = eta * b * b * (1.0 - rho * rho)

        def h(k):
            jump = lam * cache.psi(k, eta) if lam > 0 else 0.0
            return base - slope * k - jump - premium.derivative(k)

        return _solve_kappa(h, jumps, eta)

    def pi_of_m(m: float):
        k, tag, it_k, hres = kappa_of_m(m)
        return (mu + m - r) / (eta * sig * sig) + rho * b * k / sig, k, tag, it_k, hres

    pi_p, k_p, tag_p, it_p, hres_p = pi_of_m(m_plus)
    if pi_p > 0.0:
        family, m_hat = "i", m_plus
        pi_hat, k_hat, tag = pi_p, k_p, tag_p
        iterations["kappa"] = it_p
        residuals["h"] = hres_p
    else:
        pi_m, k_m, tag_m, it_m, hres_m = pi_of_m(m_minus)
        if pi_m < 0.0:
            family, m_hat = "ii", m_minus
            pi_hat, k_hat, tag = pi_m, k_m, tag_m
            iterations["kappa"] = it_m
            residuals["h"] = hres_m
        else:
            family = "iii"
            if m_minus - m_plus <= XI_XTOL:
                m_hat = m_plus
            else:
                res = bisect(lambda m: pi_of_m(m)[0], m_plus, m_minus,
                             xtol=XI_XTOL, flo=pi_p, fhi=pi_m)
                m_hat = res.root
                iterations["m"] = res.iterations
                residuals["pi"] = res.residual
            _, k_hat, tag, it_s, hres_s = pi_of_m(m_hat)
            pi_hat = 0.0
            iterations["kappa"] = it_s
            residuals["h"] = hres_s

    policy = Policy(pi=np.array([pi_hat]), kappa=k_hat)
    obj = eval_objective(policy, model, jumps, friction, utility, cache)
    corner_violation = _corner_consistency(obj, premium, k_hat)
    residuals["corner"] = corner_violation
    cert = certify(policy, model, jumps, friction, utility, tol=cert_tol,
                   cache=cache, obj=obj)
    residuals["certificate"] = cert.residual
    if not cert.passes or corner_violation > 1e-7:
        raise NoSolution(f"large-investor certification failed: "
                         f"residual={cert.residual:.3e} "
                         f"in_domain={cert.in_domain}")
    return SolveReport(policy=policy,
                       case_label=_case_label("Large", family, tag),
                       xi_star=m_hat, objective=obj, certificate=cert,
                       iterations=iterations, residuals=residuals)


# ---------------------------------------------------------------------------
# Portfolio-dependent premium rate (one risky asset)
# ---------------------------------------------------------------------------

def solve_portfolio_premium(model: MarketModel, jumps: JumpLaw, q_fn,
                            utility: Utility,
                            cert_tol: float = DEFAULT_CERT_TOL,
                            cache: JumpFunctionals | None = None,
                            pi_scan: float = 50.0) -> SolveReport:
    """Interior solve for f = -(1-kappa) q(pi).

    q_fn is a PortfolioPremium friction or a (q, q') pair. The premium map
    Q(pi) = q(pi) + eta b sigma rho pi is inverted on the branch selected by
    the allocation first-order condition, whose own map is strictly
    decreasing in pi whenever q is convex, so the inversion never needs the
    global monotonicity of Q; when Q is globally monotone the two routes
    coincide, and the Q(pi) = G(kappa) identity is verified either way. The
    retained-fraction first-order condition is then bracketed on (0, 1).
    """
    if isinstance(q_fn, PortfolioPremium):
        friction = q_fn
    else:
        friction = PortfolioPremium(q=q_fn[0], q_prime=q_fn[1])
    require_valid(model, jumps, friction, utility)
    cache = cache or JumpFunctionals(jumps)
    eta = utility.eta
    mu, sig, rho = model.d1()
    b, lam = model.b, jumps.lam
    r = model.r

    grid = np.linspace(-pi_scan, pi_scan, 201)
    qp_grid = np.array([friction.q_prime(x) for x in grid])
    soc_rhs = sig * sig * eta * eta * (b * b + lam * cache.second_moment)
    soc_lhs = float(np.max((qp_grid + eta * rho * b * sig) ** 2))
    if soc_lhs >= soc_rhs:
        raise SOCViolation(
            f"second-order bound fails on the search bracket: "
            f"max (q'+eta rho b sigma)^2 = {soc_lhs:.6g} >= "
            f"sigma^2 eta^2 (b^2 + lambda E[Y^2]) = {soc_rhs:.6g}")
    q_slope = qp_grid + eta * b * sig * rho
    q_monotone = bool(np.all(q_slope > 1e-12) or np.all(q_slope < -1e-12))

    def pi_from_kappa(k: float) -> float:
        # allocation FOC: mu - r - eta sig^2 pi + eta sig rho b k
        #                 - q'(pi)(1 - k) = 0, strictly decreasing in pi
        def t(x):
            return mu - r - eta * sig * sig * x + eta * sig * rho * b * k \
                - float(friction.q_prime(x)) * (1.0 - k)
        x0 = (mu - r + eta * sig * rho * b * k) / (eta * sig * sig)
        lo_b, hi_b = expand_bracket(t, x0=x0, step=max(1.0, abs(x0)))
        return bisect(t, lo_b, hi_b, xtol=1e-12).root

    def G(k: float) -> float:
        return eta * b * b * k + lam * (cache.psi(k, eta) if lam > 0 else 0.0)

    def foc(k: float) -> float:
        # retained-fraction FOC, Q(pi(k)) - G(k) = 0
        pi_k = pi_from_kappa(k)
        return float(friction.q(pi_k)) + eta * b * sig * rho * pi_k - G(k)

    hi, _ = _kappa_upper(jumps, eta)
    ks = np.linspace(1e-9, hi - 1e-9, 129)
    vals = []
    for k in ks:
        try:
            vals.append(foc(float(k)))
        except BracketError:
            vals.append(np.nan)
    vals = np.array(vals)
    bracket = None
    for i in range(len(ks) - 1):
        if np.isnan(vals[i]) or np.isnan(vals[i + 1]):
            continue
        if (vals[i] > 0) != (vals[i + 1] > 0):
            bracket = (float(ks[i]), float(ks[i + 1]), vals[i], vals[i + 1])
            break
    if bracket is None:
        raise NoInteriorSolution(
            "first-order condition has no sign change on (0, 1)")
    res = bisect(foc, bracket[0], bracket[1], xtol=KAPPA_XTOL,
                 flo=bracket[2], fhi=bracket[3])
    k_hat = res.root
    pi_hat = pi_from_kappa(k_hat)
    qg_residual = float(friction.q(pi_hat)) + eta * b * sig * rho * pi_hat \
        - G(k_hat)

    policy = Policy(pi=np.array([pi_hat]), kappa=k_hat)
    obj = eval_objective(policy, model, jumps, friction, utility, cache)
    cert = certify(policy, model, jumps, friction, utility, tol=cert_tol,
                   cache=cache, obj=obj)
    if not cert.passes:
        raise NoSolution(f"portfolio-premium certification failed: "
                         f"residual={cert.residual:.3e} "
                         f"soc_ok={cert.in_domain}")
    return SolveReport(policy=policy, case_label="PortfolioPremium-interior",
                       xi_star=None, objective=obj, certificate=cert,
                       iterations={"kappa": res.iterations},
                       residuals={"foc": res.residual,
                                  "Q_equals_G": qg_residual,
                                  "q_monotone": float(q_monotone),
                                  "certificate": cert.residual})


# ---------------------------------------------------------------------------
# Mutual-fund separation (differential rates, linear premium)
# ---------------------------------------------------------------------------

_FAMILY = {"i": "i", "iv": "i", "vi": "i",
           "ii": "ii", "v": "ii", "vii": "ii",
           "iii": "iii"}


@dataclass(frozen=True)
class MutualFundResult:
    delta: float
    policy: Policy
    endpoint_low: SolveReport     # solved at eta1
    endpoint_high: SolveReport    # solved at eta2


def mutual_fund_combine(model: MarketModel, jumps: JumpLaw,
                        premium_linear: LinearPremium, eta1: float,
                        eta2: float, eta_bar: float,
                        cache: JumpFunctionals | None = None) -> MutualFundResult:
    """Combine the eta1 and eta2 optimal policies into one for eta_bar.

    Both endpoint solves must land in the same case family. When both
    endpoint kappas sit on the same corner the combination weight reduces to
    the harmonic-mean condition on eta and the result is exact; for interior
    kappas the scalar optimality-defect function L is bisected in delta.
    """
    if not isinstance(premium_linear, LinearPremium):
        raise ValueError("mutual-fund separation assumes a linear premium")
    if not (eta1 < eta_bar < eta2):
        raise ValueError(f"need eta1 < eta_bar < eta2, got "
                         f"{eta1}, {eta_bar}, {eta2}")
    cache = cache or JumpFunctionals(jumps)
    rep1 = solve_diff_rates(model, jumps, premium_linear, Utility(eta1),
                            cache=cache)
    rep2 = solve_diff_rates(model, jumps, premium_linear, Utility(eta2),
                            cache=cache)
    fam1 = _FAMILY[rep1.case_label.split("-")[1]]
    fam2 = _FAMILY[rep2.case_label.split("-")[1]]
    if fam1 != fam2:
        raise CaseMismatch(f"endpoint regimes differ: {rep1.case_label} vs "
                           f"{rep2.case_label}")
    pi1, k1 = rep1.policy.pi, rep1.policy.kappa
    pi2, k2 = rep2.policy.pi, rep2.policy.kappa
    xi1, xi2 = rep1.xi_star, rep2.xi_star
    friction = DifferentialRates(premium_linear)
    q = premium_linear.q
    util_bar = Utility(eta_bar)

    same_corner = (min(k1, k2) >= 1.0 - 1e-9) or (max(k1, k2) <= 1e-9)
    if same_corner:
        # corner kappa makes the kappa bracket of L slack; the remaining
        # gradient condition is the harmonic-mean equation in delta
        f = lambda d: 1.0 - eta_bar * (d / eta1 + (1.0 - d) / eta2)
    else:
        def f(d: float) -> float:
            pi_t = d * pi1 + (1.0 - d) * pi2
            k_t = d * k1 + (1.0 - d) * k2
            obj = eval_objective(Policy(pi=pi_t, kappa=k_t), model, jumps,
                                 friction, util_bar, cache)
            if fam1 == "i":
                xi = model.r
            elif fam1 == "ii":
                xi = model.R
            else:
                xi = d * xi1 + (1.0 - d) * xi2
            zeta = obj.grad_pi - (xi - model.r)
            return float(pi_t @ zeta) + k_t * (obj.dH_dkappa + q)

    try:
        res = bisect(f, 0.0, 1.0, xtol=1e-10)
    except BracketError as exc:
        raise NoRoot("combination function L has no sign change in delta; "
                     "separation hypothesis violated") from exc
    delta = res.root
    policy = Policy(pi=delta * pi1 + (1.0 - delta) * pi2,
                    kappa=delta * k1 + (1.0 - delta) * k2)
    return MutualFundResult(delta=delta, policy=policy, endpoint_low=rep1,
                            endpoint_high=rep2)


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

def solve(model: MarketModel, jumps: JumpLaw, friction: FrictionSpec,
          utility: Utility, cert_tol: float = DEFAULT_CERT_TOL,
          cache: JumpFunctionals | None = None) -> SolveReport:
    """Route to the regime solver selected by the friction variant."""
    if isinstance(friction, DifferentialRates):
        return solve_diff_rates(model, jumps, friction.premium, utility,
                                cert_tol=cert_tol, cache=cache)
    if isinstance(friction, Frictionless):
        return solve_frictionless(model, jumps, friction.premium, utility,
                                  cert_tol=cert_tol, cache=cache)
    if isinstance(friction, SmoothG):
        return solve_smooth_g(model, jumps, friction.premium, friction,
                              utility, cert_tol=cert_tol, cache=cache)
    if isinstance(friction, LargeInvestor):
        return solve_large_investor(model, jumps, friction.premium,
                                    friction.m_plus, friction.m_minus,
                                    utility, cert_tol=cert_tol, cache=cache)
    if isinstance(friction, PortfolioPremium):
        return solve_portfolio_premium(model, jumps, friction, utility,
                                       cert_tol=cert_tol, cache=cache)
    raise TypeError(f"no solver for friction {friction!r}")
