import numpy as np
import pytest

from conftest import central_difference, random_prior
from qutrit_tomo.estimators import (
    Estimate,
    OptimizerOptions,
    com,
    ensemble_mse,
    mse,
    mvne,
    random_estimator,
)
from qutrit_tomo.exceptions import DegenerateFutureMeasurement
from qutrit_tomo.measurement import PriorData, canonical_frame
from qutrit_tomo.qcore import shannon_entropy, von_neumann_entropy
from qutrit_tomo.region import grad_min_eig, membership, min_eig_field
from qutrit_tomo.sampling import haar_unitary, random_pure, sample_hs

OK = {"Converged", "BoundaryOptimum"}


def grid_max(prior, objective, n=240):
    """Brute-force maximum of a feasible objective over the u-plane (m=1)."""
    span = np.sqrt(2.0 / 3.0)  # circumradius of the simplex in u-coordinates
    xs = np.linspace(-span, span, n)
    best = -np.inf
    for x in xs:
        for y in xs:
            u = np.array([x, y])
            p = prior.p_of_u(u)
            if p.min() < 0.0 or min_eig_field(p, prior) < 0.0:
                continue
            best = max(best, objective(u))
    return best


def test_options_validation():
    with pytest.raises(ValueError):
        OptimizerOptions(armijo_alpha=0.7)
    with pytest.raises(ValueError):
        OptimizerOptions(armijo_beta=1.5)
    with pytest.raises(ValueError):
        OptimizerOptions(barrier_t=0.0)


def test_mvne_beats_grid_search(rng):
    # optimizer must match or exceed a dense brute-force scan
    for _ in range(5):
        prior = random_prior(rng, (0,))
        est = mvne(prior)
        assert est.status in OK
        ref = grid_max(prior, lambda u: von_neumann_entropy(prior.rho_of_u(u)))
        assert est.objective >= ref - 1e-5


def test_mvne_feasible_and_data_consistent(rng):
    for unmeasured in ((0,), (1, 2)):
        for _ in range(20):
            prior = random_prior(rng, unmeasured)
            est = mvne(prior)
            assert est.status in OK
            assert membership(est.point, prior, tol=1e-8)
            # the estimate reproduces the measured probabilities exactly
            recon = PriorData.from_state(est.rho, unmeasured)
            for a, b in zip(recon.measured, prior.measured):
                assert np.allclose(a.probs, b.probs, atol=1e-9)


def test_mvne_multi_start_agreement(rng):
    # entropy is strictly concave, so the maximizer is unique; restarting the
    # ascent from scattered seeds has to land on the same point
    for _ in range(10):
        prior = random_prior(rng, (0,))
        base = mvne(prior)
        assert base.status in OK
        for _ in range(4):
            start = prior.u_of_p(rng.dirichlet(np.ones(3)))
            est = mvne(prior, start=start)
            assert est.status in OK
            assert np.abs(est.point - base.point).max() <= 1e-6


def test_mvne_log_rho_span_property(rng):
    # at an interior maximum, ln(rho_hat) lies in the span of the identity and
    # the measured projectors (gradient of entropy orthogonal to the free plane)
    found = 0
    while found < 10:
        prior = random_prior(rng, (0,))
        est = mvne(prior)
        if est.status != "Converged":
            continue
        lam, vec = np.linalg.eigh(est.rho)
        if lam[0] < 1e-8:
            continue
        log_rho = (vec * np.log(lam)) @ vec.conj().T
        # residual of projecting ln(rho) onto the unmeasured tangent directions
        resid = np.real(np.einsum("jab,ba->j", prior.D, log_rho))
        assert np.abs(resid).max() <= 1e-5
        found += 1


def test_mse_uniform_point_shortcut(rng):
    # when the uniform point is feasible the maximum-Shannon-entropy answer is
    # exactly uniform, found with zero iterations
    prior = PriorData.from_state(np.eye(3) / 3.0, (0,))
    est = mse(prior)
    assert est.iterations == 0
    assert np.allclose(est.point, 1.0 / 3.0, atol=1e-12)
    assert est.objective == pytest.approx(np.log(3.0), abs=1e-12)


def test_mse_beats_grid_search(rng):
    for _ in range(5):
        prior = random_prior(rng, (0,))
        est = mse(prior)
        assert est.status in OK

        def h_of_u(u):
            p = np.clip(prior.p_of_u(u), 1e-300, None)
            return float(-(p * np.log(p)).sum())

        ref = grid_max(prior, h_of_u)
        assert est.objective >= ref - 1e-4


def test_mse_kkt_antiparallel_on_boundary(rng):
    # on a boundary optimum the entropy gradient and the feasibility gradient
    # must be anti-parallel (their angle within 1e-3 rad of pi)
    checked = 0
    while checked < 10:
        prior = random_prior(rng, (0,))
        est = mse(prior, opts=OptimizerOptions(barrier_t=1e-7))
        if est.status != "BoundaryOptimum":
            continue
        u = prior.u_of_p(est.point)
        p = np.clip(prior.p_of_u(u), 1e-300, None)
        h_grad = -prior.lift.T @ (1.0 + np.log(p))
        lam_grad = grad_min_eig(u, prior)
        cosang = float(h_grad @ lam_grad) / (
            np.linalg.norm(h_grad) * np.linalg.norm(lam_grad)
        )
        assert np.arccos(np.clip(cosang, -1.0, 1.0)) >= np.pi - 1e-3
        checked += 1


def test_mse_future_basis_changes_answer(rng):
    prior = random_prior(rng, (0,))
    base = mse(prior)
    alt = mse(prior, future=[haar_unitary(rng)])
    assert alt.status in OK
    assert membership(alt.point, prior, tol=1e-6)
    assert not np.allclose(alt.point, base.point, atol=1e-6)


def test_mse_degenerate_future_raises(rng):
    prior = random_prior(rng, (0,))
    with pytest.raises(DegenerateFutureMeasurement):
        mse(prior, future=[prior.frame.bases[1]])  # already measured


def test_com_matches_sample_mean_and_reports_error(rng):
    prior = random_prior(rng, (0,))
    est = com(prior, n_samples=20_000, rng=np.random.default_rng(7))
    assert est.status == "Converged"
    assert membership(est.point, prior, tol=1e-6)
    assert est.std_error is not None and 0.0 < est.std_error < 0.01
    est2 = com(prior, n_samples=20_000, rng=np.random.default_rng(8))
    assert np.abs(est.point - est2.point).max() < 6 * est.std_error + 1e-12


def test_com_rejects_tiny_sample():
    prior = PriorData.from_state(np.eye(3) / 3.0, (0,))
    with pytest.raises(ValueError):
        com(prior, n_samples=10)


def test_random_estimator_member_and_spread(rng):
    prior = PriorData.from_state(np.eye(3) / 3.0, (0,))
    pts = np.array(
        [random_estimator(prior, rng=np.random.default_rng(k)).point for k in range(50)]
    )
    assert np.all(pts.min(axis=1) >= -1e-12)
    assert pts.std(axis=0).min() > 0.05  # genuinely random over the simplex


def test_estimators_graceful_failure_on_point_region():
    # a pure state can shrink the region below what sampling resolves; the
    # sampling estimators must fail cleanly (NaN point, status Failed)
    rho = random_pure(np.random.default_rng(8))
    prior = PriorData.from_state(rho, (0,))
    est = com(prior, n_samples=2000, rng=np.random.default_rng(0), budget=50_000)
    if est.status == "Failed":
        assert np.isnan(est.point).all()
    det = mvne(prior)
    assert det.status in OK | {"FallbackMaxMinEig"}


def test_ensemble_mse_average_is_member(rng):
    prior = random_prior(rng, (0,))
    est = ensemble_mse(prior, n_bases=20, rng=np.random.default_rng(1))
    assert est.status == "Converged"
    assert len(est.members) >= 10
    assert membership(est.point, prior, tol=1e-6)


def test_estimate_json_round_trip(rng):
    import json

    prior = random_prior(rng, (0,))
    est = mvne(prior)
    data = json.loads(est.to_json())
    assert data["method"] == "mvne"
    assert data["status"] in OK
    rho = np.array([[complex(re, im) for re, im in row] for row in data["rho"]])
    assert np.allclose(rho, est.rho, atol=1e-15)
