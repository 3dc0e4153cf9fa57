"""Point estimators over the permissible region.

Five strategies: maximum von Neumann entropy (mvne), maximum Shannon entropy
of a chosen future measurement (mse), center of mass (com), a single uniform
random draw (random_estimator), and the ensemble average of mse over
Haar-random future bases (ensemble_mse).
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    DegenerateFrame,
    DegenerateFutureMeasurement,
    EnsembleTooSmall,
    InfeasibleRegionSuspected,
    RegionTooSmall,
)
from .measurement import future_transform
from .qcore import von_neumann_entropy
from .region import ascend_min_eig, find_feasible, min_eig_field, sample_region

BOUNDARY_EIG_THRESHOLD = 1e-3


@dataclass(frozen=True)
class OptimizerOptions:
    """Shared knobs for the entropy maximizers."""

    armijo_alpha: float = 0.25
    armijo_beta: float = 0.5
    barrier_t: float = 1e-4
    grad_tol: float = 1e-9
    max_iters: int = 5000
    hessian_quadform_tol: float = 1e-9
    continuation: bool = True

    def __post_init__(self):
        if not 0.0 < self.armijo_alpha < 0.5:
            raise ValueError("armijo_alpha must be in (0, 0.5)")
        if not 0.0 < self.armijo_beta < 1.0:
            raise ValueError("armijo_beta must be in (0, 1)")
        if self.barrier_t <= 0.0:
            raise ValueError("barrier_t must be positive")


@dataclass(frozen=True)
class Estimate:
    """Result of one estimator run."""

    method: str
    point: np.ndarray  # unmeasured-basis probabilities, length 3m
    rho: np.ndarray
    objective: float
    iterations: int
    status: str  # Converged | BoundaryOptimum | FallbackMaxMinEig | Failed
    std_error: float | None = None
    members: tuple = field(default=(), repr=False)

    def to_json(self):
        rho_pairs = [[[float(z.real), float(z.imag)] for z in row] for row in self.rho]
        return json.dumps(
            {
                "method": self.method,
                "point": [float(x) for x in self.point],
                "rho": rho_pairs,
                "objective": float(self.objective),
                "iterations": int(self.iterations),
                "status": self.status,
            }
        )


def _failed(method, prior):
    nan_p = np.full(3 * prior.m, np.nan)
    return Estimate(method, nan_p, np.full((3, 3), np.nan, dtype=complex), np.nan, 0, "Failed")


def _lambda_min_and_grad(u, prior):
    lam, vec = np.linalg.eigh(prior.rho_of_u(u))
    e = vec[:, 0]
    grad = np.real(np.einsum("jab,b,a->j", prior.D, e, e.conj()))
    return float(lam[0]), grad


def _lambda_min_grad_hess(u, prior):
    """Minimum eigenvalue with gradient and second-order perturbation Hessian.

    hess[i,j] = 2 Re sum_{k>0} <e0|D_i|e_k><e_k|D_j|e0> / (lam0 - lam_k); the
    curvature term degenerates when lam0 is (nearly) repeated, in which case
    the affected modes are dropped (the dyadic barrier term still stabilizes
    the Newton model).
    """
    lam, vec = np.linalg.eigh(prior.rho_of_u(u))
    e0 = vec[:, 0]
    A = np.einsum("a,jab,bk->jk", e0.conj(), prior.D, vec)  # (2m, 3)
    grad = np.real(A[:, 0])
    gaps = lam[0] - lam[1:]
    safe = gaps < -1e-12
    inv = np.where(safe, 1.0 / np.where(safe, gaps, 1.0), 0.0)
    hess = 2.0 * np.real(np.einsum("ik,jk,k->ij", A[:, 1:], A[:, 1:].conj(), inv))
    return float(lam[0]), grad, hess


def _vn_value_grad_hess(u, prior):
    """Entropy S, gradient, and exact Hessian in reduced coordinates.

    With rho linear in u, the second derivative of S goes through the
    divided-difference (Loewner) matrix of the logarithm on rho's spectrum.
    Returns None when the point is infeasible.
    """
    lam, vec = np.linalg.eigh(prior.rho_of_u(u))
    if lam[0] < -1e-12:
        return None
    lam_c = np.clip(lam, 1e-300, None)
    log_lam = np.log(lam_c)
    s = float(-(lam_c * log_lam).sum())
    A = np.einsum("ak,jab,bl->jkl", vec.conj(), prior.D, vec)
    grad = -np.real(np.einsum("jkk,k->j", A, log_lam))
    dl = lam_c[:, None] - lam_c[None, :]
    dlog = log_lam[:, None] - log_lam[None, :]
    near = np.abs(dl) < 1e-12
    phi = np.where(near, 2.0 / (lam_c[:, None] + lam_c[None, :]), dlog / np.where(near, 1.0, dl))
    hess = -np.real(np.einsum("ikl,jkl,kl->ij", A, A.conj(), phi))
    return s, grad, hess


def mvne(prior, opts=None, start=None):
    """Maximum von Neumann entropy estimate.

    Phase one ascends the minimum eigenvalue until the iterate is feasible
    (the piecewise objective for an arbitrary start); phase two is damped
    Newton on the entropy, with line-search probes outside the region scored
    minus infinity.  `start` seeds phase one in reduced coordinates (default:
    the uniform point); entropy is strictly concave, so every feasible start
    reaches the same maximizer.
    """
    opts = opts or OptimizerOptions()

    u = np.zeros(2 * prior.m) if start is None else np.asarray(start, dtype=float)
    feas_iters = 0
    if min_eig_field(prior.p_of_u(u), prior) < 0.0:
        u, lam0, feas_iters = ascend_min_eig(prior, u, target=0.0, max_iters=500)
        if lam0 < -1e-8 or lam0 <= 0.0:
            # point-like (or empty) region: report the max-lambda_min point
            u, lam0, extra = ascend_min_eig(prior, u, target=np.inf, max_iters=2000)
            if lam0 < -1e-8:
                return _failed("mvne", prior)
            rho = prior.rho_of_u(u)
            return Estimate(
                "mvne", prior.born_unmeasured(rho), rho, von_neumann_entropy(rho),
                feas_iters + extra, "FallbackMaxMinEig",
            )

    def s_value(u_):
        lam = np.linalg.eigvalsh(prior.rho_of_u(u_))
        if lam[0] < -1e-12:
            return -np.inf
        lam = np.clip(lam, 1e-300, None)
        return float(-(lam * np.log(lam)).sum())

    state = _vn_value_grad_hess(u, prior)
    val, grad, hess = state
    iters = feas_iters
    for _ in range(opts.max_iters):
        iters += 1
        if float(grad @ grad) <= opts.grad_tol**2:
            break
        try:
            step = -np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = grad
        if float(step @ grad) <= 0.0:
            step = grad
        if abs(float(step @ hess @ step)) <= opts.hessian_quadform_tol:
            # quadratic polish: one full Newton step squares the remaining error
            polished = _vn_value_grad_hess(u + step, prior)
            if polished is not None and polished[0] >= val:
                u = u + step
            break
        t = 1.0
        slope = float(grad @ step)
        while t > 1e-15:
            cand = s_value(u + t * step)
            if np.isfinite(cand) and cand >= val + opts.armijo_alpha * t * slope:
                break
            t *= opts.armijo_beta
        if t <= 1e-15:
            break
        state = _vn_value_grad_hess(u + t * step, prior)
        if state is None:
            break
        u = u + t * step
        improvement = state[0] - val
        val, grad, hess = state
        if improvement <= 1e-13 * (1.0 + abs(val)):
            break

    rho = prior.rho_of_u(u)
    lam = float(np.linalg.eigvalsh(rho)[0])
    status = "BoundaryOptimum" if lam <= BOUNDARY_EIG_THRESHOLD else "Converged"
    return Estimate("mvne", prior.born_unmeasured(rho), rho, von_neumann_entropy(rho), iters, status)


def _shannon_and_grad(u, work):
    """Shannon entropy of the working prior's unmeasured probabilities."""
    p = work.p_of_u(u)
    p_c = np.clip(p, 1e-300, None)
    h = float(-(p_c * np.log(p_c)).sum())
    grad = -work.lift.T @ (1.0 + np.log(p_c))
    return h, grad


def _mse_core(work, opts):
    """Barrier-augmented Shannon-entropy maximization on a working prior."""
    u = np.zeros(2 * work.m)
    if min_eig_field(work.p_of_u(u), work) >= 0.0:
        rho = work.rho_of_u(u)
        h, _ = _shannon_and_grad(u, work)
        return u, rho, h, 0, "Converged"

    try:
        u = work.u_of_p(find_feasible(work))
    except InfeasibleRegionSuspected:
        u, lam, extra = ascend_min_eig(work, u, target=np.inf, max_iters=2000)
        if lam < -1e-8:
            return None
        rho = work.rho_of_u(u)
        h, _ = _shannon_and_grad(u, work)
        return u, rho, h, extra, "FallbackMaxMinEig"

    if opts.continuation and opts.barrier_t < 1e-3:
        t_schedule = [1e-2, 1e-3, opts.barrier_t]
    else:
        t_schedule = [opts.barrier_t]

    total_iters = 0
    for t_bar in t_schedule:

        def f_value(u_):
            lam = min_eig_field(work.p_of_u(u_), work)
            if lam <= 0.0:
                return -np.inf
            h, _ = _shannon_and_grad(u_, work)
            return h + t_bar * np.log(lam)

        val = f_value(u)
        for _ in range(opts.max_iters):
            total_iters += 1
            lam, lam_grad, lam_hess = _lambda_min_grad_hess(u, work)
            h, h_grad = _shannon_and_grad(u, work)
            grad = h_grad + (t_bar / lam) * lam_grad
            p = np.clip(work.p_of_u(u), 1e-300, None)
            hess = -(work.lift.T / p) @ work.lift
            hess += (t_bar / lam) * lam_hess
            hess -= (t_bar / lam**2) * np.outer(lam_grad, lam_grad)
            try:
                step = -np.linalg.solve(hess, grad)
            except np.linalg.LinAlgError:
                step = grad
            if float(step @ grad) <= 0.0:
                step = grad
            quad = abs(float(step @ hess @ step))
            if quad <= opts.hessian_quadform_tol or float(grad @ grad) <= opts.grad_tol**2:
                break
            t = 1.0
            slope = float(grad @ step)
            while t > 1e-15:
                cand = f_value(u + t * step)
                if np.isfinite(cand) and cand >= val + opts.armijo_alpha * t * slope:
                    break
                t *= opts.armijo_beta
            if t <= 1e-15:
                break
            u = u + t * step
            new_val = f_value(u)
            improvement = new_val - val
            val = new_val
            if improvement <= 1e-13 * (1.0 + abs(val)):
                break

    rho = work.rho_of_u(u)
    lam = min_eig_field(work.p_of_u(u), work)
    h, _ = _shannon_and_grad(u, work)
    status = "BoundaryOptimum" if lam <= BOUNDARY_EIG_THRESHOLD else "Converged"
    return u, rho, h, total_iters, status


def mse(prior, future=None, opts=None, method_tag="mse"):
    """Maximum Shannon entropy estimate for a chosen future measurement.

    `future` is a sequence of orthonormal bases replacing the unmeasured
    slots (None keeps the frame's own bases).  Raises
    DegenerateFutureMeasurement when the coordinate change to the requested
    bases loses rank and the region collapses to a point.
    """
    opts = opts or OptimizerOptions()
    work = prior
    if future is not None:
        amap = future_transform(prior, future)
        if amap.degenerate:
            raise DegenerateFutureMeasurement("future bases give no new information")
        try:
            work = prior.with_future_bases(future)
        except DegenerateFrame as err:
            raise DegenerateFutureMeasurement(str(err)) from err

    result = _mse_core(work, opts)
    if result is None:
        return _failed(method_tag, prior)
    _, rho, objective, iters, status = result
    return Estimate(method_tag, prior.born_unmeasured(rho), rho, objective, iters, status)


def com(prior, n_samples=10_000, rng=None, method_tag="com", budget=10_000_000):
    """Center of mass of the permissible region by uniform Monte Carlo."""
    if n_samples < 1_000:
        raise ValueError("n_samples must be >= 1000")
    rng = rng or np.random.default_rng()
    try:
        P = sample_region(prior, n_samples, rng, budget=budget)
    except (RegionTooSmall, InfeasibleRegionSuspected):
        return _failed(method_tag, prior)
    point = P.mean(axis=0)
    std_error = float(np.linalg.norm(P.std(axis=0, ddof=1)) / np.sqrt(n_samples))
    rho = prior.rho_of_p(point)
    return Estimate(
        method_tag, point, rho, von_neumann_entropy(rho), n_samples, "Converged",
        std_error=std_error,
    )


def random_estimator(prior, rng=None, method_tag="random", budget=10_000_000):
    """A single uniform draw from the permissible region."""
    rng = rng or np.random.default_rng()
    try:
        point = sample_region(prior, 1, rng, budget=budget)[0]
    except (RegionTooSmall, InfeasibleRegionSuspected):
        return _failed(method_tag, prior)
    rho = prior.rho_of_p(point)
    return Estimate(method_tag, point, rho, von_neumann_entropy(rho), 1, "Converged")


def ensemble_mse(prior, n_bases=100, rng=None, opts=None, method_tag="ensemble_mse"):
    """Average of mse estimates over Haar-random future measurement bases."""
    from .sampling import haar_unitary

    if n_bases < 10:
        raise ValueError("n_bases must be >= 10")
    rng = rng or np.random.default_rng()
    opts = opts or OptimizerOptions()

    members = []
    failures = 0
    for _ in range(n_bases):
        future = [haar_unitary(rng) for _ in range(prior.m)]
        try:
            est = mse(prior, future=future, opts=opts, method_tag="mse_member")
        except DegenerateFutureMeasurement:
            failures += 1
            continue
        if est.status == "Failed":
            failures += 1
            continue
        members.append(est)
    if failures > n_bases // 2:
        raise EnsembleTooSmall(f"{failures}/{n_bases} ensemble members failed")

    rho = np.mean([m.rho for m in members], axis=0)
    point = prior.born_unmeasured(rho)
    return Estimate(
        method_tag, point, rho, von_neumann_entropy(rho), len(members), "Converged",
        members=tuple(members),
    )
