"""Deterministic analysis of the reinforced dynamics.

Everything here works with the noiseless preference weights
f_i(x) = (mu_i * x_i)**alpha on the interior of the probability simplex:

  * the limiting transition kernel and its stationary distribution, which has
    a closed form thanks to local (detailed) balance on symmetric graphs;
  * the potential Psi(x) = (1/(2*alpha)) * sum_ij A_ij f_i f_j whose local
    maxima are the stable rest points, with analytic gradient
    phi_i = f_i * sum_{j in N(i)} f_j / x_i;
  * the growth-rate ODE zdot_i = z_i (phi_i - sum_j z_j phi_j) and its
    time-rescaled companion xdot_i = x_i phi_i / sum_k x_k phi_k - x_i, whose
    rest points solve the fixed-point equation pi = h(pi) with
    h_i = f_i sum_{N(i)} f_j / sum_k f_k sum_{N(k)} f_l;
  * closed forms for the complete-graph case (exponent alpha in (0,1)) and
    the strong-exploration expansion around the uniform distribution;
  * the eigenvalue floor eps/m_i of the move-indicator covariance restricted
    to the zero-sum hyperplane, which quantifies how much exploration noise
    survives the simplex constraint.

Powers are evaluated in log space wherever a normalization lets the shift
cancel, so arbitrarily large exponents are safe there; the potential itself
is not shift-invariant and is intended for moderate exponents.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Graph


def _as_interior(x, m: int | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("expected a probability vector")
    if m is not None and x.size != m:
        raise ValueError(f"vector length {x.size} != node count {m}")
    if np.any(x <= 0):
        raise ValueError("boundary point rejected: all components must be > 0")
    return x


def _check_alpha(alpha: float) -> float:
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return float(alpha)


def _as_rewards(mu, m: int) -> np.ndarray:
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (m,):
        raise ValueError(f"reward vector length {mu.size} != node count {m}")
    if np.any(mu <= 0):
        raise ValueError("rewards must be positive")
    return mu


def pref_weights(x, mu, alpha: float) -> np.ndarray:
    """f_i(x) = (mu_i x_i)**alpha, evaluated directly (moderate alpha)."""
    return (np.asarray(mu, float) * np.asarray(x, float)) ** alpha


def limit_kernel(x, g: Graph, mu, alpha: float) -> np.ndarray:
    """Row-stochastic limit kernel P with P_ij proportional to f_j on N(i).

    Log-space row shifts make any positive alpha safe; rows sum to one and
    vanish off the neighborhood pattern.
    """
    alpha = _check_alpha(alpha)
    x = _as_interior(x, g.m)
    mu = _as_rewards(mu, g.m)
    logf = alpha * (np.log(mu) + np.log(x))
    rows = np.where(g.adjacency_bool, logf[None, :], -np.inf)
    rowmax = rows.max(axis=1)
    w = np.exp(rows - rowmax[:, None])
    return w / w.sum(axis=1)[:, None]


def stationary_closed_form(x, g: Graph, mu, alpha: float) -> np.ndarray:
    """Stationary distribution of the limit kernel, via local balance.

    pi_i is proportional to f_i * sum_{k in N(i)} f_k; the identity
    pi_i P_ij == pi_j P_ji holds on every edge because both sides reduce to
    f_i f_j / normalizer on symmetric graphs.
    """
    alpha = _check_alpha(alpha)
    x = _as_interior(x, g.m)
    mu = _as_rewards(mu, g.m)
    logf = alpha * (np.log(mu) + np.log(x))
    gbar = np.exp(logf - logf.max())
    w = gbar * (g.adjacency_bool @ gbar)
    return w / w.sum()


def local_balance_violation(x, g: Graph, mu, alpha: float) -> float:
    """max_edges |pi_i P_ij - pi_j P_ji| for the closed-form pi."""
    pi = stationary_closed_form(x, g, mu, alpha)
    P = limit_kernel(x, g, mu, alpha)
    flow = pi[:, None] * P
    return float(np.abs(flow - flow.T).max())


@dataclass
class PowerIterationResult:
    pi: np.ndarray
    iterations: int
    residual: float  # ||pi P - pi||_inf of the returned vector
    converged: bool


def stationary_power_iteration(P, tol: float = 1e-13,
                               max_iters: int = 1_000_000) -> PowerIterationResult:
    """Stationary distribution by plain power iteration from the uniform start.

    Independent of the closed form above: only repeated application of the
    kernel. Non-convergence within max_iters is reported, not raised.
    """
    P = np.asarray(P, dtype=float)
    m = P.shape[0]
    if P.shape != (m, m):
        raise ValueError("kernel must be square")
    pi = np.full(m, 1.0 / m)
    res = np.inf
    iters = 0
    while iters < max_iters:
        nxt = pi @ P
        nxt /= nxt.sum()
        res = float(np.abs(nxt - pi).max())
        pi = nxt
        iters += 1
        if res < tol:
            break
    final_res = float(np.abs(pi @ P - pi).max())
    return PowerIterationResult(pi=pi, iterations=iters, residual=final_res,
                                converged=res < tol)


@dataclass
class PotentialReport:
    """Potential value, its analytic gradient, and the dissipation form.

    `lyapunov` is sum_i x_i (phi_i - phibar)^2 with phibar = sum_j x_j phi_j:
    the instantaneous growth rate of the potential along the dynamics, a sum
    of squares and therefore nonnegative.
    """

    value: float
    gradient: np.ndarray
    lyapunov: float


def potential(x, g: Graph, mu, alpha: float) -> PotentialReport:
    alpha = _check_alpha(alpha)
    x = _as_interior(x, g.m)
    f = pref_weights(x, mu, alpha)
    af = g.adjacency_bool @ f
    value = float(f @ af) / (2.0 * alpha)
    grad = f * af / x
    mean = float(x @ grad)
    lyap = float(x @ (grad - mean) ** 2)
    return PotentialReport(value=value, gradient=grad, lyapunov=lyap)


def potential_value(x, g: Graph, mu, alpha: float) -> float:
    """Psi alone, usable off the simplex (finite-difference probes)."""
    f = pref_weights(np.asarray(x, float), mu, alpha)
    return float(f @ (g.adjacency_bool @ f)) / (2.0 * alpha)


def replicator_rhs(z, g: Graph, mu, alpha: float) -> np.ndarray:
    """Growth-rate dynamics zdot_i = z_i (phi_i - sum_j z_j phi_j)."""
    rep = potential(z, g, mu, alpha)
    z = np.asarray(z, dtype=float)
    return z * (rep.gradient - float(z @ rep.gradient))


def scaled_rhs(x, g: Graph, mu, alpha: float) -> np.ndarray:
    """Normalized-share dynamics xdot_i = x_i phi_i / sum_k x_k phi_k - x_i.

    This is also h(x) - x for the stationary fixed-point map h, so its sup
    norm doubles as the fixed-point residual.
    """
    rep = potential(x, g, mu, alpha)
    x = np.asarray(x, dtype=float)
    v = x * rep.gradient
    return v / v.sum() - x


def fixed_point_residual(x, g: Graph, mu, alpha: float) -> float:
    return float(np.abs(scaled_rhs(x, g, mu, alpha)).max())


def _rk4_window(rhs, z, h, steps, dt_min):
    """Fixed-step RK4 with step halving when an iterate, or an intermediate
    stage point, leaves the simplex."""
    path = np.empty((steps + 1, z.size))
    path[0] = z
    for k in range(steps):
        while True:
            try:
                k1 = rhs(z)
                k2 = rhs(z + 0.5 * h * k1)
                k3 = rhs(z + 0.5 * h * k2)
                k4 = rhs(z + h * k3)
            except ValueError:  # stage point hit the boundary
                z_new = None
            else:
                z_new = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            ok = (z_new is not None and np.isfinite(z_new).all()
                  and (z_new > 0.0).all())
            if ok:
                break
            h *= 0.5
            if h < dt_min:
                raise RuntimeError(f"RK4 step fell below dt_min={dt_min}")
        s = z_new.sum()
        if abs(s - 1.0) > 1e-12:
            z_new = z_new / s
        z = z_new
        path[k + 1] = z
    return path, h


def integrate_replicator(z0, g: Graph, mu, alpha: float, dt: float = 0.01,
                         steps: int = 1000, dt_min: float = 1e-6) -> np.ndarray:
    """RK4 path of the growth-rate dynamics from an interior start.

    Returns the (steps+1, m) sequence of iterates. A step that exits the
    simplex (or blows up) is retried with half the step size; failure below
    dt_min raises.
    """
    alpha = _check_alpha(alpha)
    z = _as_interior(z0, g.m).copy()
    path, _ = _rk4_window(lambda v: replicator_rhs(v, g, mu, alpha),
                          z, float(dt), int(steps), dt_min)
    return path


@dataclass
class FixedPointResult:
    """An equilibrium candidate with its fixed-point residual, never thresholded."""

    point: np.ndarray
    residual: float
    classification: str  # 'interior' | 'boundary'
    alpha: float
    converged: bool
    path: np.ndarray | None = None


def find_fixed_point(g: Graph, mu, alpha: float, z0=None, dt: float = 0.02,
                     window: int = 400, max_windows: int = 400,
                     residual_tol: float = 1e-8, dt_min: float = 1e-6,
                     dynamics: str = "replicator",
                     return_path: bool = False) -> FixedPointResult:
    """Locate a rest point by integrating the dynamics until the residual
    of the fixed-point map drops below residual_tol.

    Which rest point is found depends on z0 (default: uniform); no claim of
    completeness is made. The step size is adapted between windows from the
    current stiffness estimate max|phi - phibar| so the slow tail near a
    corner does not crawl; each window still uses the halving RK4 core.
    """
    alpha = _check_alpha(alpha)
    if z0 is None:
        z0 = np.full(g.m, 1.0 / g.m)
    z = _as_interior(z0, g.m).copy()
    if dynamics == "replicator":
        rhs = lambda v: replicator_rhs(v, g, mu, alpha)
    elif dynamics == "scaled":
        rhs = lambda v: scaled_rhs(v, g, mu, alpha)
    else:
        raise ValueError(f"unknown dynamics {dynamics!r}")

    pieces = [z[None, :].copy()] if return_path else None
    h = float(dt)
    res = fixed_point_residual(z, g, mu, alpha)
    converged = res < residual_tol
    w = 0
    while not converged and w < max_windows:
        h_in = h
        path, h = _rk4_window(rhs, z, h, window, dt_min)
        z = path[-1]
        if return_path:
            pieces.append(path[1:])
        res = fixed_point_residual(z, g, mu, alpha)
        converged = res < residual_tol
        if h == h_in:  # clean window: grow the step for the slow tail
            h = min(2.0 * h, 0.25)
        w += 1

    cls = "interior" if z.min() > 1e-6 else "boundary"
    return FixedPointResult(
        point=z, residual=res, classification=cls, alpha=alpha,
        converged=converged,
        path=np.concatenate(pieces, axis=0) if return_path else None)


def optimal_set(mu, rel_tol: float = 1e-12) -> np.ndarray:
    """0-based indices of maximal-reward nodes (exact ties up to rel_tol)."""
    mu = np.asarray(mu, dtype=float)
    top = mu.max()
    return np.flatnonzero(mu >= top * (1.0 - rel_tol))


def unconstrained_fixed_point(mu, alpha: float) -> np.ndarray:
    """Complete-graph rest point for alpha in (0, 1):

        x_i = mu_i**(alpha/(1-alpha)) / sum_k mu_k**(alpha/(1-alpha)),

    evaluated in log space (scale-independent in mu by construction).
    """
    alpha = _check_alpha(alpha)
    if alpha >= 1.0:
        raise ValueError("closed form requires alpha in (0, 1)")
    mu = np.asarray(mu, dtype=float)
    if np.any(mu <= 0):
        raise ValueError("rewards must be positive")
    expo = alpha / (1.0 - alpha)
    logw = expo * np.log(mu)
    w = np.exp(logw - logw.max())
    return w / w.sum()


@dataclass
class PerturbationResult:
    """Strong-exploration expansion around the uniform distribution."""

    first_order: np.ndarray
    exact: np.ndarray
    gap: float
    residual: float
    iterations: int
    converged: bool


def epsilon_perturbation(mu, alpha: float, eps: float, damping: float = 0.5,
                         tol: float = 1e-13,
                         max_iters: int = 20_000) -> PerturbationResult:
    """First-order expansion of the complete-graph rest point near eps = 1,

        x_i ~ 1/m + (1 - eps) * (mu_i**alpha / sum_k mu_k**alpha - 1/m),

    together with the exact solution of
    x_i = (1 - eps) f_i(x)/sum f(x) + eps/m found by damped fixed-point
    iteration (a contraction near eps = 1). Both are returned with the gap.
    """
    alpha = _check_alpha(alpha)
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must be in [0, 1]")
    mu = np.asarray(mu, dtype=float)
    m = mu.size
    logw = alpha * np.log(mu)
    share = np.exp(logw - logw.max())
    share /= share.sum()
    first = 1.0 / m + (1.0 - eps) * (share - 1.0 / m)

    x = first.copy()
    res = np.inf
    it = 0
    while it < max_iters:
        f = pref_weights(x, mu, alpha)
        target = (1.0 - eps) * f / f.sum() + eps / m
        res = float(np.abs(target - x).max())
        if res < tol:
            break
        x = (1.0 - damping) * x + damping * target
        it += 1
    return PerturbationResult(
        first_order=first, exact=x, gap=float(np.abs(x - first).max()),
        residual=res, iterations=it, converged=res < tol)


@dataclass
class ConcentrationEntry:
    alpha: float
    fixed_point: FixedPointResult
    optimal_mass: float


def alpha_concentration_check(g: Graph, mu, alpha_list, z0=None,
                              **fp_kwargs) -> list[ConcentrationEntry]:
    """Rest points along an increasing exponent ladder.

    For each alpha, integrates the dynamics from z0 (default uniform) and
    reports the mass the located rest point puts on the maximal-reward set.
    The time-rescaled dynamics is used by default: its speed does not decay
    with alpha, so large exponents converge too. Integration failures
    surface as unconverged entries, not exceptions.
    """
    alphas = [float(a) for a in alpha_list]
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("alpha_list must be strictly increasing")
    fp_kwargs.setdefault("dynamics", "scaled")
    d = optimal_set(mu)
    out = []
    for a in alphas:
        try:
            fp = find_fixed_point(g, mu, a, z0=z0, **fp_kwargs)
        except RuntimeError:
            nan = np.full(g.m, np.nan)
            fp = FixedPointResult(point=nan, residual=np.inf,
                                  classification="boundary", alpha=a,
                                  converged=False)
        mass = float(fp.point[d].sum()) if np.isfinite(fp.point).all() else float("nan")
        out.append(ConcentrationEntry(alpha=a, fixed_point=fp, optimal_mass=mass))
    return out


@dataclass
class EigenBoundResult:
    lam_min: float
    bound: float
    margin: float


def covariance_eigen_bound(p, eps: float, m_i: int | None = None) -> EigenBoundResult:
    """Least eigenvalue of the move-indicator covariance on the zero-sum plane.

    p is a probability vector over a neighborhood of size m_i whose entries
    all carry the exploration floor eps/m_i. The covariance diag(p) - p p^T
    restricted to {y : sum y = 0} then has smallest eigenvalue >= eps/m_i;
    the achieved eigenvalue, the floor, and their margin are returned.
    """
    p = np.asarray(p, dtype=float)
    if m_i is None:
        m_i = p.size
    if p.size != m_i or m_i < 2:
        raise ValueError("p must have length m_i >= 2")
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must be in (0, 1]")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("p must sum to 1")
    floor = eps / m_i
    if np.any(p < floor - 1e-12):
        raise ValueError("p violates the exploration floor eps/m_i")

    q = np.diag(p) - np.outer(p, p)
    basis = np.column_stack([np.ones(m_i), np.eye(m_i)[:, : m_i - 1]])
    qmat, _ = np.linalg.qr(basis)
    b = qmat[:, 1:]  # orthonormal basis of the zero-sum hyperplane
    lam = float(np.linalg.eigvalsh(b.T @ q @ b)[0])
    assert lam >= floor - 1e-12, "covariance eigenvalue fell below its floor"
    return EigenBoundResult(lam_min=lam, bound=floor, margin=lam - floor)
