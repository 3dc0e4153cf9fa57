"""The permissible region: feasibility tests, the minimum-eigenvalue field
and its analytic gradient, feasible-point search, uniform sampling, and
boundary tracing.

Coordinates: `p` is the concatenated vector of unmeasured-basis probabilities
(length 3m); `u` is the reduced in-simplex coordinate vector (length 2m)
obtained through PriorData.lift, which removes the unit-sum constraints.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import InfeasibleRegionSuspected, RegionTooSmall
from .qcore import min_eigen_batch, von_neumann_entropy

FEASIBILITY_TOL = 1e-10
BOUNDARY_TOL = 1e-8

# borderline band inside which the fast cubic eigenvalue formula is re-checked
# with the LAPACK solver before a feasibility verdict
_RECHECK_BAND = 1e-7


def min_eig_field(p, prior):
    """Smallest eigenvalue of the candidate matrix at simplex point(s) p."""
    return float(np.linalg.eigvalsh(prior.rho_of_p(p))[0])


def min_eig_field_batch(P, prior, exact=False):
    """Vectorized minimum-eigenvalue field over P of shape (N, 3m)."""
    rho = prior.rho_of_p_batch(P)
    if exact:
        return np.linalg.eigvalsh(rho)[..., 0]
    lo = min_eigen_batch(rho)
    border = np.abs(lo) < _RECHECK_BAND
    if border.any():
        lo[border] = np.linalg.eigvalsh(rho[border])[..., 0]
    return lo


def membership(p, prior, tol=FEASIBILITY_TOL):
    """True iff the candidate matrix at p is PSD within tolerance."""
    return min_eig_field(p, prior) >= -tol


def membership_batch(P, prior, tol=FEASIBILITY_TOL):
    return min_eig_field_batch(P, prior) >= -tol


def grad_min_eig(u, prior, return_gap=False):
    """Analytic gradient of the minimum eigenvalue in reduced coordinates.

    Where the smallest eigenvalue is degenerate this is a subgradient built
    from an arbitrary eigenvector of the degenerate subspace; any such
    direction still increases the minimum eigenvalue to first order.
    """
    rho = prior.rho_of_u(u)
    lam, vec = np.linalg.eigh(rho)
    e_min = vec[:, 0]
    grad = np.real(np.einsum("jab,b,a->j", prior.D, e_min, e_min.conj()))
    if return_gap:
        return grad, float(lam[1] - lam[0])
    return grad


def _lambda_and_grad(u, prior):
    rho = prior.rho_of_u(u)
    lam, vec = np.linalg.eigh(rho)
    e_min = vec[:, 0]
    grad = np.real(np.einsum("jab,b,a->j", prior.D, e_min, e_min.conj()))
    return float(lam[0]), grad


def ascend_min_eig(prior, u0, target=0.0, alpha=0.25, beta=0.5, max_iters=500, grad_tol=1e-12):
    """Gradient ascent on lambda_min with Armijo backtracking.

    Stops as soon as lambda_min >= target; returns (u, lambda_min, iterations).
    """
    u = np.asarray(u0, dtype=float).copy()
    val, grad = _lambda_and_grad(u, prior)
    t_init = 1.0
    for it in range(max_iters):
        if val >= target:
            return u, val, it
        gnorm2 = float(grad @ grad)
        if gnorm2 < grad_tol**2:
            break
        t = t_init
        while t > 1e-14:
            u_new = u + t * grad
            new_val = min_eig_field(prior.p_of_u(u_new), prior)
            if new_val >= val + alpha * t * gnorm2:
                break
            t *= beta
        else:
            break
        if t <= 1e-14:
            break
        # warm-start the next search near the last accepted step size
        t_init = min(1.0, t / (beta * beta))
        u = u_new
        improved = new_val - val
        val, grad = _lambda_and_grad(u, prior)
        if improved <= 1e-10:
            # nonsmooth kink (degenerate minimum eigenvalue): progress stalled
            break
    return u, val, max_iters


def find_feasible(prior, start=None, max_iters=500, tol=FEASIBILITY_TOL):
    """A point of the permissible region, located by minimum-eigenvalue ascent.

    The start may be infeasible (default: simplex center).  Raises
    InfeasibleRegionSuspected when ascent stalls below feasibility, which
    signals a point-like or numerically empty region.
    """
    u0 = np.zeros(2 * prior.m) if start is None else np.asarray(start, dtype=float)
    u, val, _ = ascend_min_eig(prior, u0, target=0.0, max_iters=max_iters)
    if val < -tol:
        raise InfeasibleRegionSuspected(f"minimum-eigenvalue ascent stalled at {val:.3e}")
    return prior.p_of_u(u)


def _uniform_simplex(rng, n, m):
    """n uniform draws from the product of m probability simplexes, (n, 3m)."""
    blocks = [rng.dirichlet(np.ones(3), size=n) for _ in range(m)]
    return np.concatenate(blocks, axis=1)


def sample_region(
    prior,
    n,
    rng,
    budget=10_000_000,
    importance_trigger=1e-4,
    pilot=20_000,
    tol=FEASIBILITY_TOL,
):
    """n approximately independent uniform draws from the permissible region.

    Plain rejection from the uniform product-simplex proposal; when the
    acceptance rate estimated from a pilot run drops below the trigger, falls
    back to a Gaussian importance proposal fitted to trial feasible points
    (re-thinned toward uniformity by inverse-density rejection).  Raises
    RegionTooSmall when the total proposal budget is exhausted.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    accepted = []
    n_acc = 0
    proposed = 0
    batch = max(1024, min(4 * n, 65_536))
    while n_acc < n and proposed < budget:
        P = _uniform_simplex(rng, batch, prior.m)
        keep = membership_batch(P, prior, tol=tol)
        proposed += batch
        got = P[keep]
        if got.shape[0]:
            accepted.append(got)
            n_acc += got.shape[0]
        if proposed >= pilot and n_acc / proposed < importance_trigger:
            tail = _sample_region_importance(
                prior, n - n_acc, rng, budget - proposed, tol=tol
            )
            accepted.append(tail)
            n_acc += tail.shape[0]
            break
    if n_acc < n:
        raise RegionTooSmall(f"{n_acc}/{n} accepted after {proposed} proposals")
    return np.concatenate(accepted, axis=0)[:n]


def _sample_region_importance(prior, n, rng, budget, tol=FEASIBILITY_TOL):
    """Gaussian importance fallback for regions far smaller than the simplex."""
    if n <= 0:
        return np.zeros((0, 3 * prior.m))
    try:
        p_seed = find_feasible(prior)
    except InfeasibleRegionSuspected as err:
        raise RegionTooSmall("no feasible seed point for importance sampling") from err
    u_seed = prior.u_of_p(p_seed)
    d = 2 * prior.m

    # grow a trial cloud of feasible points around the seed
    cloud = [u_seed]
    scale = 0.05
    spent = 0
    while len(cloud) < 200 and spent < budget // 4 and scale > 1e-9:
        U = u_seed + scale * rng.standard_normal((2048, d))
        P = 1.0 / 3.0 + U @ prior.lift.T
        keep = membership_batch(P, prior, tol=tol)
        spent += 2048
        if keep.sum() < 8:
            scale *= 0.5
            continue
        cloud.extend(U[keep][:200])
    cloud = np.asarray(cloud)
    mean = cloud.mean(axis=0)
    if cloud.shape[0] < 2:
        cov = 1e-16 * np.eye(d)
    else:
        cov = np.cov(cloud.T).reshape(d, d) + 1e-18 * np.eye(d)
    cov *= 4.0  # widen so the proposal dominates the region

    L = np.linalg.cholesky(cov)
    Linv = np.linalg.inv(L)
    out = []
    n_out = 0
    while n_out < n and spent < budget:
        U = mean + rng.standard_normal((4096, d)) @ L.T
        P = 1.0 / 3.0 + U @ prior.lift.T
        keep = membership_batch(P, prior, tol=tol)
        spent += 4096
        U = U[keep]
        if not U.shape[0]:
            continue
        # thin toward uniformity: accept with probability prop. to 1/pdf
        z = (U - mean) @ Linv.T
        log_q = -0.5 * np.einsum("ij,ij->i", z, z)
        w = np.exp(log_q.min() - log_q)
        take = rng.random(U.shape[0]) < w
        kept = 1.0 / 3.0 + U[take] @ prior.lift.T
        out.append(kept)
        n_out += kept.shape[0]
    if n_out < n:
        raise RegionTooSmall(f"importance sampling produced {n_out}/{n} points")
    return np.concatenate(out, axis=0)[:n]


@dataclass(frozen=True)
class BoundaryMesh:
    """Discretized approximation of the region boundary (one unmeasured basis)."""

    angles: np.ndarray  # (n,)
    points: np.ndarray  # (n, 3)
    min_eigs: np.ndarray  # (n,)
    on_simplex_edge: np.ndarray  # (n,) bool; ray left the simplex still feasible

    def to_csv(self, path):
        header = "angle,p1,p2,p3,min_eig"
        data = np.column_stack([self.angles, self.points, self.min_eigs])
        np.savetxt(path, data, delimiter=",", header=header, comments="")


def trace_boundary(prior, n_angles=1024, interior=None, mu_tol=1e-10):
    """Mesh of boundary points by bisection along rays from an interior point.

    Requires one unmeasured basis (the boundary is then a closed curve).  A
    ray that exits the simplex while still feasible is clipped to the simplex
    edge and flagged in `on_simplex_edge`.
    """
    if prior.m != 1:
        raise ValueError("boundary tracing needs exactly one unmeasured basis")
    if interior is None:
        interior = find_feasible(prior)
    u0 = prior.u_of_p(interior)
    if min_eig_field(prior.p_of_u(u0), prior) < -FEASIBILITY_TOL:
        raise InfeasibleRegionSuspected("interior point is not feasible")

    angles = np.linspace(0.0, 2.0 * np.pi, n_angles, endpoint=False)
    points = np.empty((n_angles, 3))
    eigs = np.empty(n_angles)
    edge_flags = np.zeros(n_angles, dtype=bool)
    for i, theta in enumerate(angles):
        direction = np.array([np.sin(theta), np.cos(theta)])
        mu_edge = _mu_to_simplex_edge(u0, direction, prior)
        feasible_at = lambda mu: min_eig_field(prior.p_of_u(u0 + mu * direction), prior) >= 0.0
        if feasible_at(mu_edge):
            edge_flags[i] = True
            p = prior.p_of_u(u0 + mu_edge * direction)
        else:
            lo, hi = 0.0, mu_edge
            while hi - lo > mu_tol:
                mid = 0.5 * (lo + hi)
                if feasible_at(mid):
                    lo = mid
                else:
                    hi = mid
            p = prior.p_of_u(u0 + lo * direction)
        points[i] = p
        eigs[i] = min_eig_field(p, prior)
    return BoundaryMesh(angles=angles, points=points, min_eigs=eigs, on_simplex_edge=edge_flags)


def _mu_to_simplex_edge(u0, direction, prior):
    """Largest mu with p(u0 + mu*dir) still inside the probability simplex."""
    p0 = prior.p_of_u(u0)
    dp = prior.lift @ direction
    mu = np.inf
    for k in range(p0.shape[0]):
        if dp[k] < -1e-15:
            mu = min(mu, -p0[k] / dp[k])
    return float(mu if np.isfinite(mu) else 0.0)


def min_entropy_boundary_state(prior, n_angles=1024, refine_steps=40):
    """Boundary point with the smallest von Neumann entropy (pure-state probe).

    Scans the traced mesh, then refines the winning angle by golden-section
    search between its neighbors.
    """
    mesh = trace_boundary(prior, n_angles=n_angles)
    interior = find_feasible(prior)
    u0 = prior.u_of_p(interior)

    def entropy_at(theta):
        p = _boundary_point_at(prior, u0, theta)
        return von_neumann_entropy(prior.rho_of_p(p)), p

    entropies = np.array([von_neumann_entropy(prior.rho_of_p(p)) for p in mesh.points])
    best = int(np.argmin(entropies))
    step = 2.0 * np.pi / n_angles
    lo = mesh.angles[best] - step
    hi = mesh.angles[best] + step
    inv_phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, pc = entropy_at(c)
    fd, pd = entropy_at(d)
    for _ in range(refine_steps):
        if fc < fd:
            b, d, fd, pd = d, c, fc, pc
            c = b - inv_phi * (b - a)
            fc, pc = entropy_at(c)
        else:
            a, c, fc, pc = c, d, fd, pd
            d = a + inv_phi * (b - a)
            fd, pd = entropy_at(d)
    return pc if fc < fd else pd


def _boundary_point_at(prior, u0, theta, mu_tol=1e-10):
    direction = np.array([np.sin(theta), np.cos(theta)])
    mu_edge = _mu_to_simplex_edge(u0, direction, prior)
    feasible_at = lambda mu: min_eig_field(prior.p_of_u(u0 + mu * direction), prior) >= 0.0
    if feasible_at(mu_edge):
        return prior.p_of_u(u0 + mu_edge * direction)
    lo, hi = 0.0, mu_edge
    while hi - lo > mu_tol:
        mid = 0.5 * (lo + hi)
        if feasible_at(mid):
            lo = mid
        else:
            hi = mid
    return prior.p_of_u(u0 + lo * direction)
