"""Canonical qutrit MUB, frame operators, Born rule, linear reconstruction,
and affine transforms between alternative future measurements.

Conventions, fixed once for every file format and cross-check in the package:
  * omega = exp(-2*pi*i/3),
  * the four bases are ordered computational, Fourier, then the two
    omega-shifted bases, with kets as matrix columns,
  * 12-vectors are ordered basis-major, ket-minor (index = 3*basis + ket).
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    DegenerateFrame,
    InconsistentProbabilities,
    InvalidSimplexPoint,
)
from .qcore import check_hermitian

OMEGA = np.exp(-2j * np.pi / 3.0)

# Orthonormal in-plane directions for a 3-outcome simplex, chosen once so
# reduced coordinates are reproducible across runs and machines.  Columns are
# orthonormal and orthogonal to (1,1,1).
SIMPLEX_DIRECTIONS = np.array(
    [
        [1.0 / np.sqrt(2.0), 1.0 / np.sqrt(6.0)],
        [-1.0 / np.sqrt(2.0), 1.0 / np.sqrt(6.0)],
        [0.0, -2.0 / np.sqrt(6.0)],
    ]
)


def check_orthonormal(basis, tol=1e-10):
    """Validate that the columns of `basis` form an orthonormal set."""
    basis = np.asarray(basis, dtype=complex)
    gram = basis.conj().T @ basis
    if np.abs(gram - np.eye(3)).max() > tol:
        raise InvalidSimplexPoint("basis columns are not orthonormal")
    return basis


@dataclass(frozen=True)
class MubSet:
    """The four canonical qutrit bases; `bases[j][:, k]` is ket k of basis j."""

    bases: tuple

    def ket(self, j, k):
        return self.bases[j][:, k]


def qutrit_mub():
    """The canonical maximal set of four mutually unbiased qutrit bases."""
    w = OMEGA
    b0 = np.eye(3, dtype=complex)
    b1 = np.array([[1, 1, 1], [1, w, w**2], [1, w**2, w]], dtype=complex) / np.sqrt(3)
    b2 = np.array([[1, 1, 1], [w, w**2, 1], [w, 1, w**2]], dtype=complex) / np.sqrt(3)
    b3 = np.array([[1, 1, 1], [w**2, w, 1], [w**2, 1, w]], dtype=complex) / np.sqrt(3)
    return MubSet(bases=(b0, b1, b2, b3))


def check_unbiased(a, b, tol=1e-8):
    """True iff every cross overlap satisfies |<a_i|b_j>|^2 = 1/3."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    overlaps = np.abs(a.conj().T @ b) ** 2
    return bool(np.abs(overlaps - 1.0 / 3.0).max() <= tol)


@dataclass(frozen=True)
class Frame:
    """Twelve traceless projector deviations and their Gram (pseudo)inverse.

    `assemble(p) = T0 + sum_l p_l B[l]` is the linear reconstruction map from
    a full 12-vector of probabilities to a Hermitian unit-trace matrix.
    """

    bases: tuple  # 4 orthonormal (3,3) bases, kets as columns
    projectors: np.ndarray  # (12, 3, 3)
    lambdas: np.ndarray  # (12, 3, 3), traceless Hermitian
    gram: np.ndarray  # (12, 12) real, Tr(Lambda_j Lambda_k)
    pinv: np.ndarray  # (12, 12) pseudoinverse of gram
    rank: int
    B: np.ndarray = field(repr=False, default=None)  # (12, 3, 3)
    T0: np.ndarray = field(repr=False, default=None)  # (3, 3)

    def assemble(self, probs12):
        """Linear reconstruction from a full 12-vector (no positivity check)."""
        p = np.asarray(probs12, dtype=float)
        return self.T0 + np.tensordot(p, self.B, axes=(0, 0))


def build_frame(bases):
    """Frame operators, Gram matrix, and pseudoinverse for four bases."""
    bases = tuple(check_orthonormal(b) for b in bases)
    if len(bases) != 4:
        raise DegenerateFrame("a qutrit frame needs exactly 4 bases")
    projectors = np.empty((12, 3, 3), dtype=complex)
    for j, basis in enumerate(bases):
        for k in range(3):
            ket = basis[:, k]
            projectors[3 * j + k] = np.outer(ket, ket.conj())
    lambdas = projectors - np.eye(3) / 3.0
    gram = np.real(np.einsum("aij,bji->ab", lambdas, lambdas))
    svals = np.linalg.svd(gram, compute_uv=False)
    cutoff = 1e-10 * svals[0]
    rank = int((svals > cutoff).sum())
    if rank < 8:
        raise DegenerateFrame(f"frame rank {rank} < 8; bases do not span")
    pinv = np.linalg.pinv(gram, rcond=1e-10)
    B = np.tensordot(pinv, lambdas, axes=(0, 0))
    T0 = np.eye(3, dtype=complex) / 3.0 - np.tensordot(np.full(12, 1.0 / 3.0), B, axes=(0, 0))
    return Frame(
        bases=bases,
        projectors=projectors,
        lambdas=lambdas,
        gram=gram,
        pinv=pinv,
        rank=rank,
        B=B,
        T0=T0,
    )


_CANONICAL_FRAME = None


def canonical_frame():
    """The frame built from the canonical MUB (memoized; Frame is immutable)."""
    global _CANONICAL_FRAME
    if _CANONICAL_FRAME is None:
        _CANONICAL_FRAME = build_frame(qutrit_mub().bases)
    return _CANONICAL_FRAME


def born_probabilities(rho, basis):
    """Outcome probabilities p_k = <e_k| rho |e_k> for one orthonormal basis."""
    rho = np.asarray(rho, dtype=complex)
    basis = np.asarray(basis, dtype=complex)
    p = np.real(np.einsum("ik,ij,jk->k", basis.conj(), rho, basis))
    return p


def reconstruct(probs12, frame=None, sum_tol=1e-6):
    """State from all twelve MUB probabilities via the Gram pseudoinverse.

    Output is Hermitian with unit trace; positivity is *not* enforced, that
    check belongs to the caller (it is the whole point of the region module).
    """
    frame = frame if frame is not None else canonical_frame()
    p = np.asarray(probs12, dtype=float)
    if p.shape != (12,):
        raise InconsistentProbabilities(f"expected 12 probabilities, got {p.shape}")
    sums = p.reshape(4, 3).sum(axis=1)
    if np.abs(sums - 1.0).max() > sum_tol:
        raise InconsistentProbabilities(f"per-basis sums {sums} deviate from 1")
    return frame.assemble(p)


@dataclass(frozen=True)
class MeasuredProbabilities:
    """Exact outcome probabilities for one measured basis."""

    basis_index: int
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (3,) or p.min() < -1e-9 or abs(p.sum() - 1.0) > 1e-6:
            raise InvalidSimplexPoint(f"bad probability triple {p}")
        object.__setattr__(self, "probs", p)


class PriorData:
    """Measured MUB probabilities plus the frame; defines the permissible region.

    Precomputes the affine assembly rho(p) = K0 + sum_l p_l Bu[l] over the
    unmeasured probabilities p (length 3m, basis-major), and the lift from
    reduced simplex coordinates u (length 2m) to p.  Instances are immutable
    in practice and safe to share across threads.
    """

    def __init__(self, measured, unmeasured_indices, frame=None):
        self.frame = frame if frame is not None else canonical_frame()
        self.measured = tuple(
            m if isinstance(m, MeasuredProbabilities) else MeasuredProbabilities(**m)
            for m in measured
        )
        self.unmeasured_indices = tuple(int(i) for i in unmeasured_indices)
        covered = sorted([m.basis_index for m in self.measured] + list(self.unmeasured_indices))
        if covered != [0, 1, 2, 3]:
            raise InvalidSimplexPoint("measured + unmeasured must cover bases 0..3 once")
        self.m = len(self.unmeasured_indices)
        if self.m not in (1, 2):
            raise InvalidSimplexPoint("need 1 or 2 unmeasured bases")

        # assembly pieces
        K0 = self.frame.T0.copy()
        for meas in self.measured:
            j = meas.basis_index
            for k in range(3):
                K0 = K0 + meas.probs[k] * self.frame.B[3 * j + k]
        self.K0 = K0
        idx = []
        for j in self.unmeasured_indices:
            idx.extend([3 * j, 3 * j + 1, 3 * j + 2])
        self.unmeasured_slots = np.array(idx)
        self.Bu = self.frame.B[self.unmeasured_slots]  # (3m, 3, 3)
        self.projectors_u = self.frame.projectors[self.unmeasured_slots]

        # block-diagonal lift from reduced coordinates to simplex coordinates
        lift = np.zeros((3 * self.m, 2 * self.m))
        for g in range(self.m):
            lift[3 * g : 3 * g + 3, 2 * g : 2 * g + 2] = SIMPLEX_DIRECTIONS
        self.lift = lift
        # d rho / d u_j, shape (2m, 3, 3)
        self.D = np.tensordot(lift.T, self.Bu, axes=(1, 0))
        # flattened copies for the hot single-point assembly path
        self._Bu_flat = self.Bu.reshape(3 * self.m, 9)
        self._rho_center = self.K0 + (np.full(3 * self.m, 1.0 / 3.0) @ self._Bu_flat).reshape(3, 3)
        self._D_flat = self.D.reshape(2 * self.m, 9)

    # -- coordinates ------------------------------------------------------
    def p_of_u(self, u):
        return 1.0 / 3.0 + self.lift @ np.asarray(u, dtype=float)

    def u_of_p(self, p):
        return self.lift.T @ (np.asarray(p, dtype=float) - 1.0 / 3.0)

    # -- assembly ---------------------------------------------------------
    def rho_of_p(self, p):
        """Candidate matrix for unmeasured probabilities p (length 3m).

        Hermitian with unit trace by construction; may have negative
        eigenvalues -- feasibility is a separate test.
        """
        p = np.asarray(p, dtype=float)
        return self.K0 + (p @ self._Bu_flat).reshape(3, 3)

    def rho_of_p_batch(self, P):
        """Vectorized rho_of_p for P of shape (N, 3m) -> (N, 3, 3)."""
        P = np.asarray(P, dtype=float)
        return self.K0 + np.tensordot(P, self.Bu, axes=(1, 0))

    def rho_of_u(self, u):
        return self._rho_center + (np.asarray(u, dtype=float) @ self._D_flat).reshape(3, 3)

    def born_unmeasured(self, rho):
        """Born probabilities of rho in the unmeasured bases, concatenated."""
        rho = np.asarray(rho, dtype=complex)
        return np.real(np.einsum("lij,ji->l", self.projectors_u, rho))

    # -- construction helpers ----------------------------------------------
    @classmethod
    def from_state(cls, rho, unmeasured_indices, frame=None):
        """Prior from exact Born probabilities of a known state."""
        frame = frame if frame is not None else canonical_frame()
        unmeasured = set(int(i) for i in unmeasured_indices)
        measured = [
            MeasuredProbabilities(j, born_probabilities(rho, frame.bases[j]))
            for j in range(4)
            if j not in unmeasured
        ]
        return cls(measured, sorted(unmeasured), frame=frame)

    def with_future_bases(self, alt_bases):
        """Same measured data, unmeasured slots re-parameterized by alt_bases.

        Raises DegenerateFrame when the replacement bases fail to span.
        """
        alt_bases = [np.asarray(b, dtype=complex) for b in alt_bases]
        if len(alt_bases) != self.m:
            raise InvalidSimplexPoint("need one replacement basis per unmeasured slot")
        new_bases = list(self.frame.bases)
        for slot, basis in zip(self.unmeasured_indices, alt_bases):
            new_bases[slot] = basis
        new_frame = build_frame(new_bases)
        return PriorData(self.measured, self.unmeasured_indices, frame=new_frame)

    # -- file format --------------------------------------------------------
    def to_json(self):
        return json.dumps(
            {
                "measured": [
                    {"basis": m.basis_index, "probs": [float(x) for x in m.probs]}
                    for m in self.measured
                ],
                "unmeasured": list(self.unmeasured_indices),
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        measured = [
            MeasuredProbabilities(int(item["basis"]), np.asarray(item["probs"], dtype=float))
            for item in data["measured"]
        ]
        return cls(measured, [int(i) for i in data["unmeasured"]])


def rho_of_unmeasured(p, prior):
    """Candidate state for unmeasured probabilities p under the prior data."""
    return prior.rho_of_p(p)


@dataclass(frozen=True)
class AffineMap:
    """f = V q + beta between two future-measurement parameterizations."""

    V: np.ndarray  # (3m, 3m)
    beta: np.ndarray  # (3m,)
    jacobian: float  # |det V|
    degenerate: bool
    m: int

    def apply(self, q):
        return self.V @ np.asarray(q, dtype=float) + self.beta

    def apply_batch(self, Q):
        return np.asarray(Q, dtype=float) @ self.V.T + self.beta


def future_transform(prior, alt_bases, degeneracy_tol=1e-9):
    """Affine map from alt-basis probabilities q to the prior's unmeasured f.

    For every state consistent with the measured data, the Born probabilities
    satisfy f = V q + beta.  V is gauged so that replacing the unmeasured
    bases by themselves gives V = I, beta = 0.  A degenerate alt choice (its
    projectors linearly dependent on the measured operators) gives det V = 0
    and is returned flagged rather than raised.
    """
    alt_bases = [check_orthonormal(np.asarray(b, dtype=complex)) for b in alt_bases]
    n = 3 * prior.m
    try:
        alt = prior.with_future_bases(alt_bases)
        degenerate_frame = False
    except DegenerateFrame:
        degenerate_frame = True
        # best-effort map through the pseudoinverse of the degenerate Gram
        new_bases = list(prior.frame.bases)
        for slot, basis in zip(prior.unmeasured_indices, alt_bases):
            new_bases[slot] = basis
        alt = _prior_with_degenerate_frame(prior, new_bases)

    # f_i = Tr(rho(q) Pi_i) with rho(q) affine in q through the alt frame
    A = np.real(np.einsum("jab,iba->ij", alt.Bu, prior.projectors_u))
    beta_raw = np.real(np.einsum("iba,ab->i", prior.projectors_u, alt.K0))
    # absorb the per-group gauge freedom so the identity choice maps to V = I
    V = A.copy()
    for g in range(prior.m):
        rows = slice(3 * g, 3 * g + 3)
        cols = slice(3 * g, 3 * g + 3)
        V[rows, cols] += 1.0 / 3.0
    beta = beta_raw - 1.0 / 3.0
    det = float(np.linalg.det(V))
    degenerate = degenerate_frame or abs(det) <= degeneracy_tol
    return AffineMap(V=V, beta=beta, jacobian=abs(det), degenerate=degenerate, m=prior.m)


def _prior_with_degenerate_frame(prior, new_bases):
    """PriorData-shaped assembly pieces over a rank-deficient frame.

    Only used to produce a flagged AffineMap; bypasses the rank guard in
    build_frame.
    """
    bases = tuple(check_orthonormal(b) for b in new_bases)
    projectors = np.empty((12, 3, 3), dtype=complex)
    for j, basis in enumerate(bases):
        for k in range(3):
            ket = basis[:, k]
            projectors[3 * j + k] = np.outer(ket, ket.conj())
    lambdas = projectors - np.eye(3) / 3.0
    gram = np.real(np.einsum("aij,bji->ab", lambdas, lambdas))
    pinv = np.linalg.pinv(gram, rcond=1e-10)
    B = np.tensordot(pinv, lambdas, axes=(0, 0))
    T0 = np.eye(3, dtype=complex) / 3.0 - np.tensordot(np.full(12, 1.0 / 3.0), B, axes=(0, 0))
    frame = Frame(
        bases=bases,
        projectors=projectors,
        lambdas=lambdas,
        gram=gram,
        pinv=pinv,
        rank=int(np.linalg.matrix_rank(gram, tol=1e-10)),
        B=B,
        T0=T0,
    )
    shell = PriorData.__new__(PriorData)
    shell.frame = frame
    shell.measured = prior.measured
    shell.unmeasured_indices = prior.unmeasured_indices
    shell.m = prior.m
    K0 = T0.copy()
    for meas in prior.measured:
        j = meas.basis_index
        for k in range(3):
            K0 = K0 + meas.probs[k] * B[3 * j + k]
    shell.K0 = K0
    idx = []
    for j in prior.unmeasured_indices:
        idx.extend([3 * j, 3 * j + 1, 3 * j + 2])
    shell.unmeasured_slots = np.array(idx)
    shell.Bu = B[shell.unmeasured_slots]
    shell.projectors_u = projectors[shell.unmeasured_slots]
    return shell
