"""Random qutrit states and unitaries for benchmark ground truth.

All samplers take an explicit numpy Generator so trials are reproducible;
the benchmark derives one independent sub-stream per trial index.
"""

from dataclasses import dataclass

import numpy as np

from .qcore import check_density_matrix


def haar_unitary(rng):
    """Haar-distributed 3x3 unitary via QR with the sign-of-R phase fix."""
    z = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_pure(rng):
    """Haar-uniform pure state (rank-1 projector)."""
    psi = haar_unitary(rng)[:, 0]
    return np.outer(psi, psi.conj())


def sample_hs(rng):
    """Hilbert-Schmidt-uniform mixed state, rho = AA†/Tr(AA†)."""
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def sample_eig_simplex(rng, alpha=(1.0, 1.0, 1.0)):
    """Dirichlet eigenvalues in a Haar-random eigenbasis."""
    alpha = np.asarray(alpha, dtype=float)
    if (alpha <= 0).any():
        raise ValueError("Dirichlet parameters must be positive")
    lam = rng.dirichlet(alpha)
    u = haar_unitary(rng)
    return (u * lam) @ u.conj().T


def sample_pure_mix(rng):
    """Haar pure state mixed with identity; purity uniform on [1/3, 1]."""
    x = np.sqrt(rng.random())
    return x * random_pure(rng) + (1.0 - x) / 3.0 * np.eye(3)


def sample_rank2(rng):
    """Rank-2 state: eigenvalues (lam, 1-lam, 0), lam ~ Unif(0.5, 1), Haar basis."""
    lam1 = rng.uniform(0.5, 1.0)
    lam = np.array([lam1, 1.0 - lam1, 0.0])
    u = haar_unitary(rng)
    return (u * lam) @ u.conj().T


def sample_factorized_unitary(rng):
    """Haar unitary assembled from its phase/rotation factorization.

    Six phases uniform on (0, 2pi); the rotation angles drawn so that
    sin^4(theta1), sin^2(theta2), sin^2(theta3) are uniform on (0, 1), which
    makes the parameterization's Jacobian the Haar density.
    """
    phi = rng.uniform(0.0, 2.0 * np.pi, size=6)
    t1 = np.arcsin(rng.random() ** 0.25)
    t2 = np.arcsin(np.sqrt(rng.random()))
    t3 = np.arcsin(np.sqrt(rng.random()))
    c1, s1 = np.cos(t1), np.sin(t1)
    c2, s2 = np.cos(t2), np.sin(t2)
    c3, s3 = np.cos(t3), np.sin(t3)
    o12 = np.array(
        [
            [c1, -s1, 0.0],
            [s1 * c2, c1 * c2, -s2],
            [s1 * s2, c1 * s2, c2],
        ]
    )
    o23 = np.array([[1.0, 0.0, 0.0], [0.0, c3, -s3], [0.0, s3, c3]])
    left = np.diag(np.exp(1j * phi[:3]))
    mid = np.diag([1.0, np.exp(1j * phi[3]), np.exp(1j * phi[4])])
    right = np.diag([1.0, 1.0, np.exp(1j * phi[5])])
    return left @ o12 @ mid @ o23 @ right


def purity(rho):
    """Tr(rho^2), in [1/3, 1] for qutrit states."""
    return float(np.real(np.trace(rho @ rho)))


_KINDS = {
    "hs": lambda rng, spec: sample_hs(rng),
    "eig": lambda rng, spec: sample_eig_simplex(rng, spec.dirichlet_alpha),
    "puremix": lambda rng, spec: sample_pure_mix(rng),
    "pure": lambda rng, spec: random_pure(rng),
    "rank2": lambda rng, spec: sample_rank2(rng),
}


@dataclass(frozen=True)
class SamplerSpec:
    """Named state-preparation recipe with an optional purity-band filter."""

    kind: str = "hs"
    dirichlet_alpha: tuple = (1.0, 1.0, 1.0)
    purity_band: tuple | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown sampler kind {self.kind!r}; choose from {sorted(_KINDS)}")
        if any(a <= 0 for a in self.dirichlet_alpha):
            raise ValueError("Dirichlet parameters must be positive")
        if self.purity_band is not None:
            lo, hi = self.purity_band
            if not (1.0 / 3.0 - 1e-12 <= lo < hi <= 1.0 + 1e-12):
                raise ValueError("purity_band must satisfy 1/3 <= lo < hi <= 1")


def make_sampler(spec):
    """Callable rng -> DensityMatrix implementing the spec (band by rejection)."""
    draw = _KINDS[spec.kind]

    if spec.purity_band is None:
        def sampler(rng):
            return draw(rng, spec)
        return sampler

    lo, hi = spec.purity_band

    def sampler(rng):
        for _ in range(1_000_000):
            rho = draw(rng, spec)
            if lo <= purity(rho) <= hi:
                return rho
        raise RuntimeError("purity-band rejection did not terminate")

    return sampler


def validate_state(rho):
    """Raise if rho is not a valid density matrix."""
    check_density_matrix(rho)
    return rho
