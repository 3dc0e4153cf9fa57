"""Distances between states, the counting-measure area of the permissible
region, and the search for the future measurement that maximizes it.
"""

from dataclasses import dataclass
import json

import numpy as np

from .measurement import future_transform
from .region import membership_batch

RELENT_FLOOR = 1e-14
RELENT_SUPPORT_TOL = 1e-10


def hs_distance(a, b):
    """Hilbert-Schmidt distance sqrt(Tr((a-b)^2)); ranges up to sqrt(2)."""
    d = a - b
    return float(np.sqrt(max(np.real(np.trace(d @ d)), 0.0)))


def fidelity(a, b):
    """Uhlmann fidelity Tr sqrt(sqrt(a) b sqrt(a))."""
    lam_a, vec_a = np.linalg.eigh(a)
    sqrt_a = (vec_a * np.sqrt(np.clip(lam_a, 0.0, None))) @ vec_a.conj().T
    inner = sqrt_a @ b @ sqrt_a
    lam = np.linalg.eigvalsh(inner)
    return float(np.sqrt(np.clip(lam, 0.0, None)).sum())


def bures_distance(a, b):
    """Bures metric sqrt(2(1 - F))."""
    return float(np.sqrt(max(2.0 * (1.0 - min(fidelity(a, b), 1.0)), 0.0)))


def relative_entropy(a, b, return_flag=False):
    """Quantum relative entropy Tr(a(ln a - ln b)) in nats.

    Eigenvalues of b below the floor are regularized upward; when a has
    weight on that regularized subspace, the value is finite but large and
    the support-mismatch flag is set.
    """
    lam_a, vec_a = np.linalg.eigh(a)
    lam_a = np.clip(lam_a, 0.0, None)
    nz = lam_a > 0.0
    term_a = float((lam_a[nz] * np.log(lam_a[nz])).sum())

    lam_b, vec_b = np.linalg.eigh(b)
    lam_b_reg = np.clip(lam_b, RELENT_FLOOR, None)
    # weight of a in each eigenvector of b
    overlap = np.real(np.einsum("ik,ij,jk->k", vec_b.conj(), a, vec_b))
    term_b = float((overlap * np.log(lam_b_reg)).sum())

    mismatch = bool((overlap[lam_b < RELENT_FLOOR] > RELENT_SUPPORT_TOL).sum())
    value = max(term_a - term_b, 0.0)
    if return_flag:
        return value, mismatch
    return value


def angular_distance(p, q):
    """Bhattacharyya angle arccos(sum sqrt(p_i q_i)) between simplex points.

    For concatenated multi-basis probability vectors the per-basis angles are
    combined in quadrature.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape[0] == 3:
        arg = np.clip(np.sqrt(np.clip(p, 0, None) * np.clip(q, 0, None)).sum(), -1.0, 1.0)
        return float(np.arccos(arg))
    total = 0.0
    for k in range(0, p.shape[0], 3):
        total += angular_distance(p[k : k + 3], q[k : k + 3]) ** 2
    return float(np.sqrt(total))


@dataclass(frozen=True)
class DistanceReport:
    """The four benchmark distance measures for one (truth, estimate) pair."""

    hs: float
    fidelity: float
    bures: float
    relative_entropy: float

    def to_csv_row(self):
        return f"{self.hs},{self.fidelity},{self.bures},{self.relative_entropy}"


def distance_report(truth, estimate):
    return DistanceReport(
        hs=hs_distance(truth, estimate),
        fidelity=fidelity(truth, estimate),
        bures=bures_distance(truth, estimate),
        relative_entropy=relative_entropy(truth, estimate),
    )


@dataclass(frozen=True)
class AreaResult:
    """Counting-measure area of the permissible region (octant-sphere units)."""

    area: float
    std_error: float
    n_samples: int
    acceptance_rate: float

    def to_json(self):
        return json.dumps(
            {
                "area": self.area,
                "std_error": self.std_error,
                "n": self.n_samples,
                "acceptance": self.acceptance_rate,
            }
        )


def region_area(prior, n=100_000, rng=None, n_factor=1.0, batch=65_536):
    """Monte Carlo area of the region under the counting measure.

    Proposals come from Dirichlet(0.5, 0.5, 0.5) per unmeasured basis, whose
    density is exactly the normalized 1/sqrt(p1 p2 p3) counting weight, so the
    acceptance rate times (pi/2)^m estimates the octant-sphere surface area of
    the region.  `n_factor` applies an optional global multiplier.
    """
    if n < 1_000:
        raise ValueError("n must be >= 1000")
    rng = rng or np.random.default_rng()
    accepted = 0
    done = 0
    alpha = 0.5 * np.ones(3)
    while done < n:
        k = min(batch, n - done)
        blocks = [rng.dirichlet(alpha, size=k) for _ in range(prior.m)]
        P = np.concatenate(blocks, axis=1)
        accepted += int(membership_batch(P, prior).sum())
        done += k
    rate = accepted / n
    norm = (np.pi / 2.0) ** prior.m * n_factor
    se = norm * np.sqrt(max(rate * (1.0 - rate), 1.0 / n)) / np.sqrt(n)
    return AreaResult(area=norm * rate, std_error=se, n_samples=n, acceptance_rate=rate)


def search_best_measurement(prior, candidates, n=50_000, rng=None):
    """Future basis with the largest region area among the candidates.

    Each candidate is a single orthonormal basis for the (one) unmeasured
    slot; a candidate whose coordinate change is degenerate scores area 0.
    Returns (best_basis, AreaResult, all_areas).
    """
    from .exceptions import DegenerateFrame

    if prior.m != 1:
        raise ValueError("measurement search needs exactly one unmeasured basis")
    if len(candidates) < 1:
        raise ValueError("need at least one candidate basis")
    rng = rng or np.random.default_rng()
    results = []
    for basis in candidates:
        amap = future_transform(prior, [basis])
        if amap.degenerate:
            results.append(AreaResult(0.0, 0.0, 0, 0.0))
            continue
        try:
            alt = prior.with_future_bases([basis])
        except DegenerateFrame:
            results.append(AreaResult(0.0, 0.0, 0, 0.0))
            continue
        results.append(region_area(alt, n=n, rng=rng))
    best = int(np.argmax([r.area for r in results]))
    return candidates[best], results[best], results
