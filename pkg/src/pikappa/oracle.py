"""Brute-force grid maximizer of f + H (the solver-independent oracle) and
the parameter-sweep engine behind the reproduction tables and figures.

The oracle never calls a solver: it evaluates the objective exhaustively on
a grid with iterative zoom refinement and reports a resolution bound
(numerical Lipschitz estimate times the final cell diagonal) for comparison
slack.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass, field, replace as dc_replace

import numpy as np

from .errors import PikappaError
from .jumps import JumpFunctionals, utility_jump_curve
from .models import (DifferentialRates, FrictionSpec, Frictionless, JumpLaw,
                     LargeInvestor, LinearPremium, MarketModel, Policy,
                     PortfolioPremium, PowerPremium, SmoothG, Utility)
from . import solvers


@dataclass(frozen=True)
class GridSpec:
    """Grid geometry for the brute-force maximizer.

    pi_bounds of None auto-sizes each axis to the Merton point +- (5 |Merton|
    + 2). Refinement zooms the window by `zoom` around the incumbent each
    round. 3-D grids (two assets) are capped at cap_3d points per axis.
    """
    pi_bounds: tuple | None = None
    kappa_bounds: tuple = (0.0, 1.0)
    resolution: int = 401
    refine_resolution: int = 2001
    rounds: int = 2
    zoom: float = 10.0
    cap_3d: int = 201

    def __post_init__(self):
        if self.resolution < 3 or self.refine_resolution < 3:
            raise ValueError("grid resolution must be at least 3")


def _auto_pi_bounds(model: MarketModel, eta: float) -> list[tuple[float, float]]:
    merton = np.linalg.solve(model.sigma @ model.sigma.T,
                             model.mu - model.r * np.ones(model.d)) / eta
    out = []
    for m in merton:
        half = 5.0 * abs(float(m)) + 2.0
        out.append((float(m) - half, float(m) + half))
    return out


def _premium_curve(friction, kappas: np.ndarray) -> np.ndarray:
    prem = friction.premium
    if isinstance(prem, LinearPremium):
        return prem.q * (1.0 - kappas)
    if isinstance(prem, PowerPremium):
        return prem.q * (1.0 - kappas) ** prem.delta
    return np.array([prem.value(float(k)) for k in kappas])


def _friction_grid(friction: FrictionSpec, model: MarketModel,
                   pi_sum: np.ndarray, pi_first: np.ndarray,
                   kappas: np.ndarray) -> np.ndarray:
    """f on the (pi grid) x (kappa axis) product, broadcast-ready."""
    kshape = (1,) * pi_sum.ndim + (-1,)
    if isinstance(friction, Frictionless):
        return np.zeros(pi_sum.shape)[..., None] \
            - _premium_curve(friction, kappas).reshape(kshape)
    if isinstance(friction, DifferentialRates):
        pen = -(model.R - model.r) * np.maximum(pi_sum - 1.0, 0.0)
        return pen[..., None] - _premium_curve(friction, kappas).reshape(kshape)
    if isinstance(friction, SmoothG):
        g = np.array([friction.g(float(x)) for x in pi_first.ravel()])
        g = g.reshape(pi_first.shape)
        return g[..., None] - _premium_curve(friction, kappas).reshape(kshape)
    if isinstance(friction, LargeInvestor):
        m = np.where(pi_first >= 0.0, friction.m_plus, friction.m_minus)
        return (pi_first * m)[..., None] \
            - _premium_curve(friction, kappas).reshape(kshape)
    if isinstance(friction, PortfolioPremium):
        q = np.array([friction.q(float(x)) for x in pi_first.ravel()])
        q = q.reshape(pi_first.shape)
        return -q[..., None] * (1.0 - kappas).reshape(kshape)
    raise TypeError(f"unknown friction {friction!r}")


def _eval_grid(model: MarketModel, jumps: JumpLaw, friction: FrictionSpec,
               eta: float, axes: list[np.ndarray]) -> np.ndarray:
    """f + H on the tensor grid; last axis is kappa."""
    kappas = axes[-1]
    pi_axes = axes[:-1]
    mesh = np.meshgrid(*pi_axes, indexing="ij") if len(pi_axes) > 1 \
        else [pi_axes[0]]
    pis = np.stack([m.ravel() for m in mesh], axis=-1)   # (npts, d)
    shape = mesh[0].shape

    excess = (pis @ (model.mu - model.r)).reshape(shape)
    st = pis @ model.sigma                                # row i: pi_i^T sigma
    quad_pi = (st * st).sum(axis=-1).reshape(shape)
    pi_srho = (pis @ (model.sigma @ model.rho)).reshape(shape)
    pi_sum = pis.sum(axis=-1).reshape(shape)
    pi_first = pis[:, 0].reshape(shape)

    b = model.b
    jump_u = jumps.lam * utility_jump_curve(jumps, kappas, eta) \
        if jumps.lam > 0 else np.zeros_like(kappas)

    kshape = (1,) * len(shape) + (-1,)
    k = kappas.reshape(kshape)
    H = excess[..., None] \
        - 0.5 * eta * (quad_pi[..., None] + (b * k) ** 2
                       - 2.0 * b * k * pi_srho[..., None]) \
        + jump_u.reshape(kshape)
    f = _friction_grid(friction, model, pi_sum, pi_first, kappas)
    return H + f


def grid_maximize(model: MarketModel, jumps: JumpLaw, friction: FrictionSpec,
                  utility: Utility,
                  grid: GridSpec | None = None) -> tuple[Policy, float, float]:
    """Exhaustive maximization of f + H with zoom refinement.

    Returns (best policy, best value, resolution bound). Refinement never
    decreases the best value.
    """
    grid = grid or GridSpec()
    eta = utility.eta
    d = model.d
    pi_bounds = list(grid.pi_bounds) if grid.pi_bounds is not None \
        else _auto_pi_bounds(model, eta)
    bounds = pi_bounds + [tuple(grid.kappa_bounds)]
    res_coarse = grid.resolution
    res_fine = grid.refine_resolution
    if d >= 2:
        res_coarse = min(res_coarse, grid.cap_3d)
        res_fine = min(res_fine, grid.cap_3d)

    best_val = -np.inf
    best_pt = None
    axes = None
    cur_bounds = [tuple(b) for b in bounds]
    for rnd in range(grid.rounds + 1):
        res = res_coarse if rnd == 0 else res_fine
        axes = [np.linspace(lo, hi, res) for lo, hi in cur_bounds]
        vals = _eval_grid(model, jumps, friction, eta, axes)
        idx = np.unravel_index(np.argmax(vals), vals.shape)
        val = float(vals[idx])
        pt = [float(ax[i]) for ax, i in zip(axes, idx)]
        if val > best_val:
            best_val, best_pt = val, pt
        # zoom around the incumbent, clipped to the original bounds
        new_bounds = []
        for (lo0, hi0), (lo, hi), c in zip(bounds, cur_bounds, best_pt):
            half = (hi - lo) / grid.zoom / 2.0
            new_bounds.append((max(lo0, c - half), min(hi0, c + half)))
        cur_bounds = new_bounds

    # local Lipschitz estimate at the incumbent on the final grid
    steps = [float(ax[1] - ax[0]) if len(ax) > 1 else 0.0 for ax in axes]
    lip_sq = 0.0
    for axis, h in enumerate(steps):
        if h <= 0.0:
            continue
        lo_pt = list(best_pt)
        hi_pt = list(best_pt)
        lo_pt[axis] -= h
        hi_pt[axis] += h
        v0 = _point_value(model, jumps, friction, eta, lo_pt)
        v1 = _point_value(model, jumps, friction, eta, hi_pt)
        lip_sq += max(abs(best_val - v0), abs(v1 - best_val)) ** 2 / h ** 2
    diag = float(np.sqrt(sum(h * h for h in steps)))
    bound = float(np.sqrt(lip_sq)) * diag

    policy = Policy(pi=np.array(best_pt[:-1]), kappa=float(np.clip(best_pt[-1], 0.0, 1.0)))
    return policy, best_val, bound


def _point_value(model, jumps, friction, eta, pt) -> float:
    kappa = float(np.clip(pt[-1], 0.0, 1.0))
    axes = [np.array([p]) for p in pt[:-1]] + [np.array([kappa])]
    return float(_eval_grid(model, jumps, friction, eta, axes).ravel()[0])


# ---------------------------------------------------------------------------
# Parameter sweeps
# ---------------------------------------------------------------------------

SWEEP_PARAMS = ("eta", "rho", "R", "r", "lambda", "q", "mu", "mu1", "mu2")


@dataclass(frozen=True)
class SweepPoint:
    param_value: float
    pi: np.ndarray | None
    pi_sum: float | None
    kappa: float | None
    case_label: str
    xi_star: float | None
    objective: float | None
    cert_residual: float | None
    error: str = ""


@dataclass(frozen=True)
class SweepResult:
    parameter: str
    grid: np.ndarray
    points: tuple[SweepPoint, ...]
    metadata: dict = field(default_factory=dict)


def _with_premium(friction: FrictionSpec, premium) -> FrictionSpec:
    if isinstance(friction, PortfolioPremium):
        raise ValueError("portfolio-premium friction carries no premium schedule")
    return dc_replace(friction, premium=premium)


def _apply_param(parameter: str, v: float, model: MarketModel, jumps: JumpLaw,
                 friction: FrictionSpec, utility: Utility):
    if parameter == "eta":
        return model, jumps, friction, Utility(eta=float(v))
    if parameter == "rho":
        if model.d == 1:
            rho = np.array([float(v)])
        else:
            base = np.asarray(model.rho)
            norm = float(np.linalg.norm(base))
            if norm == 0.0:
                raise ValueError("cannot scale a zero rho vector")
            rho = base * (float(v) / norm)
        return model.replace(rho=rho), jumps, friction, utility
    if parameter == "R":
        return model.replace(R=float(v)), jumps, friction, utility
    if parameter == "r":
        return model.replace(r=float(v)), jumps, friction, utility
    if parameter == "lambda":
        return model, JumpLaw(lam=float(v), law=jumps.law), friction, utility
    if parameter == "q":
        prem = getattr(friction, "premium", None)
        if not isinstance(prem, LinearPremium):
            raise ValueError("q sweeps need a linear premium schedule")
        return model, jumps, _with_premium(friction, LinearPremium(q=float(v))), utility
    if parameter in ("mu", "mu1", "mu2"):
        idx = 0 if parameter in ("mu", "mu1") else 1
        if parameter == "mu" and model.d != 1:
            raise ValueError("mu sweeps on multi-asset models need mu1/mu2")
        mu = np.array(model.mu, copy=True)
        mu[idx] = float(v)
        return model.replace(mu=mu), jumps, friction, utility
    raise ValueError(f"unknown sweep parameter {parameter!r}; "
                     f"one of {SWEEP_PARAMS}")


def _inputs_fingerprint(model: MarketModel, jumps: JumpLaw,
                        friction: FrictionSpec, utility: Utility) -> str:
    law = jumps.law
    law_desc = repr((type(law).__name__, getattr(law, "alpha", None),
                     getattr(law, "beta", None),
                     tuple(np.asarray(getattr(law, "points", ())).tolist()),
                     tuple(np.asarray(getattr(law, "weights", ())).tolist())))
    prem = getattr(friction, "premium", None)
    prem_desc = repr((type(prem).__name__ if prem else None,
                      getattr(prem, "q", None), getattr(prem, "delta", None)))
    blob = repr((model.mu.tolist(), model.sigma.tolist(), model.r, model.R,
                 model.rho.tolist(), model.b, jumps.lam, law_desc,
                 type(friction).__name__, prem_desc,
                 getattr(friction, "m_plus", None),
                 getattr(friction, "m_minus", None), utility.eta))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def sweep(parameter: str, grid, base_model: MarketModel, jumps: JumpLaw,
          friction: FrictionSpec, utility: Utility) -> SweepResult:
    """Solve once per grid point of the swept parameter.

    Per-point failures are recorded as error strings without aborting the
    sweep. Output is a pure function of the inputs.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0.0):
        raise ValueError("sweep grid must be a nonempty strictly increasing vector")
    points = []
    for v in grid:
        try:
            m, j, f, u = _apply_param(parameter, float(v), base_model, jumps,
                                      friction, utility)
            rep = solvers.solve(m, j, f, u)
            points.append(SweepPoint(
                param_value=float(v), pi=rep.policy.pi,
                pi_sum=rep.policy.pi_sum, kappa=rep.policy.kappa,
                case_label=rep.case_label, xi_star=rep.xi_star,
                objective=rep.objective.value,
                cert_residual=rep.certificate.residual))
        except (PikappaError, ValueError) as exc:
            points.append(SweepPoint(param_value=float(v), pi=None,
                                     pi_sum=None, kappa=None,
                                     case_label=f"error({exc})",
                                     xi_star=None, objective=None,
                                     cert_residual=None, error=str(exc)))
    meta = {"parameter": parameter,
            "model_hash": _inputs_fingerprint(base_model, jumps, friction,
                                              utility)}
    return SweepResult(parameter=parameter, grid=grid, points=tuple(points),
                       metadata=meta)


def _fmt(v) -> str:
    if v is None:
        return ""
    return f"{v:.12g}"


def sweep_csv(result: SweepResult, d: int) -> str:
    """Render a sweep as CSV text (12 significant digits, '.' decimals)."""
    buf = io.StringIO()
    cols = ["param_value"] + [f"pi_{i+1}" for i in range(d)] \
        + ["pi_sum", "kappa", "case_label", "xi_star", "objective",
           "cert_residual"]
    buf.write(",".join(cols) + "\n")
    for p in result.points:
        pis = [_fmt(float(x)) for x in p.pi] if p.pi is not None else [""] * d
        row = [_fmt(p.param_value)] + pis + [
            _fmt(p.pi_sum), _fmt(p.kappa), p.case_label.replace(",", ";"),
            _fmt(p.xi_star), _fmt(p.objective), _fmt(p.cert_residual)]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()
