"""Per-stage cost family oracles and the online Newton recursion."""

import numpy as np
import pytest

from dctfield import (
    EstimatorConfig,
    EstimatorError,
    EstimatorState,
    GridSpec,
    Quantizer,
    basis_vector,
    initial_state,
    newton_update,
    per_stage_cost,
    per_stage_gradient,
    per_stage_hessian,
    refine_modes,
    select_modes_largest,
)
from dctfield.dct import ModeSet

Q4 = Quantizer((1.0, 2.0, 3.0))


def three_branch_cost(beta, k_vec, z, taus, eta):
    """Literal three-branch evaluation (level 0 / interior / top)."""
    a = float(beta @ k_vec)
    L = len(taus) + 1
    if z == 0:
        return np.log1p(np.exp(eta * (a - taus[0])))
    if z == L - 1:
        return np.log1p(np.exp(-eta * (a - taus[L - 2])))
    return (np.log1p(np.exp(-eta * (a - taus[z - 1])))
            + np.log1p(np.exp(eta * (a - taus[z]))))


def three_branch_gradient(beta, k_vec, z, taus, eta):
    a = float(beta @ k_vec)
    L = len(taus) + 1
    if z == 0:
        s = eta / (1.0 + np.exp(-eta * (a - taus[0])))
    elif z == L - 1:
        s = -eta / (1.0 + np.exp(eta * (a - taus[L - 2])))
    else:
        s = (-eta / (1.0 + np.exp(eta * (a - taus[z - 1])))
             + eta / (1.0 + np.exp(-eta * (a - taus[z]))))
    return s * k_vec


def three_branch_hessian(beta, k_vec, z, taus, eta):
    a = float(beta @ k_vec)
    L = len(taus) + 1

    def bump(tau):
        e = np.exp(eta * (a - tau))
        return eta**2 * e / (1.0 + e) ** 2

    if z == 0:
        s = bump(taus[0])
    elif z == L - 1:
        s = bump(taus[L - 2])
    else:
        s = bump(taus[z - 1]) + bump(taus[z])
    return s * np.outer(k_vec, k_vec)


def random_tuples(rng, n, dims=6):
    """Tuples spanning all level kinds, L in {2, 3, 4}, eta in {1, 5, 20}."""
    out = []
    for _ in range(n):
        L = int(rng.integers(2, 5))
        taus = tuple(np.sort(rng.uniform(-1.0, 3.0, L - 1)))
        q = Quantizer(taus)
        z = int(rng.integers(0, L))
        eta = float(rng.choice([1.0, 5.0, 20.0]))
        beta = rng.normal(size=dims)
        k_vec = rng.normal(size=dims)
        out.append((beta, k_vec, z, q, eta))
    return out


def rel_err(got, want, floor=1e-6):
    # below the floor both sides have decayed to saturation-tail dust where
    # central differences are pure roundoff; treat as agreement
    scale = max(np.max(np.abs(got)), np.max(np.abs(want)))
    if scale < floor:
        return 0.0
    return np.max(np.abs(got - want)) / scale


class TestPerStageCost:
    def test_level0_at_first_threshold_is_log2(self):
        k_vec = np.array([0.5, -0.2, 0.1])
        beta = np.array([2.0, 0.0, 0.0])  # a = 1.0 = tau_0
        assert per_stage_cost(beta, k_vec, 0, Q4, 5.0) == pytest.approx(np.log(2), abs=1e-12)

    def test_interior_symmetric_midpoint(self):
        # a = 2.5 between tau_1 = 2 and tau_2 = 3 with eta = 5
        k_vec = np.array([1.0])
        beta = np.array([2.5])
        want = 2 * np.log1p(np.exp(-2.5))
        assert per_stage_cost(beta, k_vec, 2, Q4, 5.0) == pytest.approx(want, abs=1e-12)

    def test_strictly_positive(self, rng):
        for beta, k_vec, z, q, eta in random_tuples(rng, 50):
            assert per_stage_cost(beta, k_vec, z, q, eta) > 0.0

    def test_matches_three_branch_form(self, rng):
        for beta, k_vec, z, q, eta in random_tuples(rng, 100):
            a = float(beta @ k_vec)
            if abs(eta * (a - q.thresholds[0])) > 30:
                continue  # keep the naive oracle away from overflow
            want = three_branch_cost(beta, k_vec, z, q.thresholds, eta)
            assert per_stage_cost(beta, k_vec, z, q, eta) == pytest.approx(want, rel=1e-12)

    def test_binary_reduction_exact(self, rng):
        for _ in range(100):
            tau = float(rng.uniform(-1, 2))
            q = Quantizer((tau,))
            beta = rng.normal(size=4)
            k_vec = rng.normal(size=4)
            z = int(rng.integers(0, 2))
            eta = float(rng.choice([1.0, 5.0]))
            a = float(beta @ k_vec)
            sign = 1.0 if z == 0 else -1.0
            want = np.log1p(np.exp(sign * eta * (a - tau)))
            if abs(eta * (a - tau)) > 30:
                continue
            assert per_stage_cost(beta, k_vec, z, q, eta) == pytest.approx(want, rel=1e-12, abs=1e-12)

    def test_no_overflow_at_extreme_arguments(self):
        beta = np.array([500.0])
        k_vec = np.array([1.0])
        got = per_stage_cost(beta, k_vec, 0, Q4, 5.0)
        assert np.isfinite(got) and got == pytest.approx(5.0 * (500.0 - 1.0), rel=1e-9)

    def test_out_of_range_level_rejected(self):
        with pytest.raises(ValueError):
            per_stage_cost(np.zeros(2), np.zeros(2), 4, Q4, 5.0)
        with pytest.raises(ValueError):
            per_stage_gradient(np.zeros(2), np.zeros(2), -1, Q4, 5.0)
        with pytest.raises(ValueError):
            per_stage_hessian(np.zeros(2), np.zeros(2), 9, Q4, 5.0)

    def test_convex_along_random_lines(self, rng):
        for beta, k_vec, z, q, eta in random_tuples(rng, 30):
            d = rng.normal(size=beta.size)
            h = 1e-3

            def g(t):
                return per_stage_cost(beta + t * d, k_vec, z, q, eta)

            for t in rng.uniform(-2, 2, 5):
                assert g(t - h) + g(t + h) - 2 * g(t) >= -1e-10


class TestPerStageGradient:
    def test_level0_at_threshold_half_eta(self):
        k_vec = np.array([0.5, -0.2, 0.1])
        beta = np.array([2.0, 0.0, 0.0])
        got = per_stage_gradient(beta, k_vec, 0, Q4, 5.0)
        assert np.allclose(got, (5.0 / 2.0) * k_vec, atol=1e-12)

    def test_saturated_top_level_vanishes(self):
        k_vec = np.array([1.0, 1.0])
        beta = np.array([400.0, 400.0])  # a far above tau_2
        got = per_stage_gradient(beta, k_vec, 3, Q4, 5.0)
        assert np.all(got == 0.0)

    def test_multiple_of_k_vec(self, rng):
        for beta, k_vec, z, q, eta in random_tuples(rng, 30):
            g = per_stage_gradient(beta, k_vec, z, q, eta)
            # g x k_vec = 0 when g is a scalar multiple of k_vec
            outer = np.outer(g, k_vec) - np.outer(k_vec, g)
            assert np.max(np.abs(outer)) < 1e-10 * max(np.max(np.abs(g)), 1.0)

    def test_matches_three_branch_form(self, rng):
        for beta, k_vec, z, q, eta in random_tuples(rng, 100):
            a = float(beta @ k_vec)
            if max(abs(eta * (a - t)) for t in q.thresholds) > 30:
                continue
            want = three_branch_gradient(beta, k_vec, z, q.thresholds, eta)
            got = per_stage_gradient(beta, k_vec, z, q, eta)
            assert rel_err(got, want) < 1e-12

    def test_finite_difference_oracle(self, rng):
        worst = 0.0
        for beta, k_vec, z, q, eta in random_tuples(rng, 200):
            d = rng.normal(size=beta.size)
            d /= np.linalg.norm(d)
            h = 1e-6
            num = (per_stage_cost(beta + h * d, k_vec, z, q, eta)
                   - per_stage_cost(beta - h * d, k_vec, z, q, eta)) / (2 * h)
            ana = float(per_stage_gradient(beta, k_vec, z, q, eta) @ d)
            worst = max(worst, rel_err(np.array(num), np.array(ana)))
        assert worst < 1e-5


class TestPerStageHessian:
    def test_level0_at_threshold_quarter_eta_squared(self):
        k_vec = np.array([0.5, -0.2, 0.1])
        beta = np.array([2.0, 0.0, 0.0])
        got = per_stage_hessian(beta, k_vec, 0, Q4, 5.0)
        assert np.allclose(got, (25.0 / 4.0) * np.outer(k_vec, k_vec), atol=1e-12)

    def test_positive_semidefinite(self, rng):
        for beta, k_vec, z, q, eta in random_tuples(rng, 50):
            H = per_stage_hessian(beta, k_vec, z, q, eta)
            assert np.min(np.linalg.eigvalsh(H)) >= -1e-12

    def test_matches_three_branch_form(self, rng):
        for beta, k_vec, z, q, eta in random_tuples(rng, 100):
            a = float(beta @ k_vec)
            if max(abs(eta * (a - t)) for t in q.thresholds) > 30:
                continue
            want = three_branch_hessian(beta, k_vec, z, q.thresholds, eta)
            got = per_stage_hessian(beta, k_vec, z, q, eta)
            assert rel_err(got, want) < 1e-12

    def test_finite_difference_oracle(self, rng):
        worst = 0.0
        for beta, k_vec, z, q, eta in random_tuples(rng, 200):
            d = rng.normal(size=beta.size)
            d /= np.linalg.norm(d)
            h = 1e-6
            num = (per_stage_gradient(beta + h * d, k_vec, z, q, eta)
                   - per_stage_gradient(beta - h * d, k_vec, z, q, eta)) / (2 * h)
            ana = per_stage_hessian(beta, k_vec, z, q, eta) @ d
            # differencing a gradient of size g at step h carries eps*g/h
            # cancellation noise; below that the comparison is meaningless
            gscale = np.max(np.abs(per_stage_gradient(beta, k_vec, z, q, eta)))
            worst = max(worst, rel_err(num, ana, floor=1e-5 * max(1.0, gscale)))
        assert worst < 1e-4


class TestNewtonUpdate:
    def setup_method(self):
        self.spec = GridSpec(0, 100, 0, 100, 16, 16)
        self.modes = select_modes_largest(8, self.spec)
        self.cfg = EstimatorConfig(eta=5.0, sigma_lm=1.0 / 20000, delta=1.0)

    def test_zero_gradient_leaves_estimate_unchanged(self):
        state = initial_state(self.modes)
        big = EstimatorState(self.modes, np.full(8, 1e6), state.h_tilde, 0)
        out = newton_update(big, self.cfg, (3, 3), 3, Q4, self.spec)
        assert np.array_equal(out.beta_hat, big.beta_hat)
        assert out.k == 1

    def test_single_step_closed_form(self):
        state = initial_state(self.modes)
        kv = basis_vector((5, 9), self.modes, self.spec)
        out = newton_update(state, self.cfg, (5, 9), 2, Q4, self.spec)
        G = per_stage_gradient(np.zeros(8), kv, 2, Q4, 5.0)
        H = per_stage_hessian(np.zeros(8), kv, 2, Q4, 5.0) + self.cfg.sigma_lm * np.eye(8)
        want = -np.linalg.solve(H, G)
        assert np.max(np.abs(out.beta_hat - want)) < 1e-12
        assert out.k == 1

    def test_delta_one_matches_undiscounted_recursion(self, rng):
        """Update with per-step ridge at delta=1 equals the recursion that
        seeds the curvature once with the ridge and never discounts."""
        from scipy.linalg import cho_factor, cho_solve

        state = initial_state(self.modes)
        beta_ref = np.zeros(8)
        h_ref = self.cfg.sigma_lm * np.eye(8)
        for _ in range(50):
            index = (int(rng.integers(16)), int(rng.integers(16)))
            z = int(rng.integers(0, 4))
            state = newton_update(state, self.cfg, index, z, Q4, self.spec)
            kv = basis_vector(index, self.modes, self.spec)
            g = per_stage_gradient(beta_ref, kv, z, Q4, 5.0)
            h_ref = h_ref + per_stage_hessian(beta_ref, kv, z, Q4, 5.0)
            beta_ref = beta_ref - cho_solve(cho_factor(h_ref, lower=True), g)
            assert np.max(np.abs(state.beta_hat - beta_ref)) < 1e-9

    def test_h_tilde_stays_symmetric_psd(self, rng):
        state = initial_state(self.modes)
        for _ in range(25):
            index = (int(rng.integers(16)), int(rng.integers(16)))
            z = int(rng.integers(0, 4))
            state = newton_update(state, self.cfg, index, z, Q4, self.spec)
        assert np.array_equal(state.h_tilde, state.h_tilde.T)
        assert np.min(np.linalg.eigvalsh(state.h_tilde)) >= -1e-12
        np.linalg.cholesky(state.h_tilde + self.cfg.sigma_lm * np.eye(8))

    def test_forgetting_discounts_curvature(self, rng):
        cfg = EstimatorConfig(eta=5.0, sigma_lm=1e-4, delta=0.9)
        state = initial_state(self.modes)
        s1 = newton_update(state, cfg, (2, 2), 1, Q4, self.spec)
        s2 = newton_update(s1, cfg, (9, 9), 2, Q4, self.spec)
        kv2 = basis_vector((9, 9), self.modes, self.spec)
        a2 = float(s1.beta_hat @ kv2)
        from dctfield.estimator import hessian_scalar

        want = 0.9 * s1.h_tilde + hessian_scalar(a2, 2, Q4, 5.0) * np.outer(kv2, kv2)
        assert np.max(np.abs(s2.h_tilde - want)) < 1e-12

    def test_noiseless_identifiability_smoke(self, rng):
        # a field made of exactly the estimated modes is pinned down by 500
        # noiseless quantized samples at random locations
        from dctfield import (DctCoefficients, NoiseModel, inverse_dct, measure,
                              mse, modeled_field, truncation_mse, forward_dct)

        spec = GridSpec(0, 100, 0, 100, 20, 20)
        modes = select_modes_largest(5, spec)
        vals = np.zeros((20, 20))
        amplitudes = [50.0, 12.0, -9.0, 7.0, -5.0]
        for (u, v), c in zip(modes.modes, amplitudes):
            vals[u, v] = c
        coeffs = DctCoefficients(spec, vals)
        field = inverse_dct(coeffs)
        assert field.values.max() > 3.0  # spans the quantizer range

        noise = NoiseModel("none", 0.0)
        cfg = EstimatorConfig(eta=5.0, sigma_lm=1.0 / 20000, delta=1.0)
        state = initial_state(modes)
        stream = np.random.default_rng(7)
        for _ in range(500):
            index = (int(stream.integers(20)), int(stream.integers(20)))
            z = measure(field, index, noise, Q4, stream)
            state = newton_update(state, cfg, index, z, Q4, spec)
        est = modeled_field(state.beta_hat, modes, spec)
        floor = truncation_mse(forward_dct(field), modes)
        energy = float(np.mean(field.values**2))
        assert mse(field, est) < floor + 0.1 * energy

    def test_bad_state_factorization_error(self):
        # corrupt curvature (negative definite) defeats the ridge
        corrupt = EstimatorState(self.modes, np.zeros(8), -np.eye(8), 0)
        with pytest.raises(EstimatorError):
            newton_update(corrupt, self.cfg, (0, 0), 0, Q4, self.spec)


class TestRefineModes:
    def setup_method(self):
        self.spec = GridSpec(0, 100, 0, 100, 50, 50)

    def _state_after(self, modes, steps, rng):
        cfg = EstimatorConfig(5.0, 1e-4, 1.0)
        state = initial_state(modes)
        for _ in range(steps):
            index = (int(rng.integers(50)), int(rng.integers(50)))
            state = newton_update(state, cfg, index, int(rng.integers(0, 4)), Q4, self.spec)
        return state

    def test_identity_refinement(self, rng):
        modes = select_modes_largest(10, self.spec)
        state = self._state_after(modes, 20, rng)
        out = refine_modes(state, modes)
        assert np.array_equal(out.beta_hat, state.beta_hat)
        assert np.array_equal(out.h_tilde, state.h_tilde)
        assert out.k == state.k

    def test_expand_40_to_80_preserves_prefix_bitwise(self, rng):
        modes40 = select_modes_largest(40, self.spec)
        modes80 = select_modes_largest(80, self.spec)
        state = self._state_after(modes40, 30, rng)
        out = refine_modes(state, modes80)
        assert out.k == state.k
        assert np.array_equal(out.beta_hat[:40], state.beta_hat)
        assert np.all(out.beta_hat[40:] == 0.0)
        assert np.array_equal(out.h_tilde[:40, :40], state.h_tilde)
        assert np.all(out.h_tilde[40:, :] == 0.0)
        assert np.all(out.h_tilde[:, 40:] == 0.0)

    def test_expand_then_delete_roundtrip(self, rng):
        modes = select_modes_largest(12, self.spec)
        bigger = select_modes_largest(30, self.spec)
        state = self._state_after(modes, 15, rng)
        back = refine_modes(refine_modes(state, bigger), modes)
        assert np.array_equal(back.beta_hat, state.beta_hat)
        assert np.array_equal(back.h_tilde, state.h_tilde)

    def test_deletion_keeps_surviving_entries(self, rng):
        modes = select_modes_largest(12, self.spec)
        smaller = select_modes_largest(5, self.spec)
        state = self._state_after(modes, 15, rng)
        out = refine_modes(state, smaller)
        assert np.array_equal(out.beta_hat, state.beta_hat[:5])
        assert np.array_equal(out.h_tilde, state.h_tilde[:5, :5])

    def test_mixed_add_and_remove_rejected(self, rng):
        state = self._state_after(select_modes_largest(3, self.spec), 5, rng)
        mixed = ModeSet(((0, 0), (0, 1), (7, 7)), 50, 50)
        with pytest.raises(ValueError):
            refine_modes(state, mixed)


class TestConfigValidation:
    def test_bad_hyperparameters_rejected(self):
        with pytest.raises(ValueError):
            EstimatorConfig(eta=0.0)
        with pytest.raises(ValueError):
            EstimatorConfig(sigma_lm=0.0)
        with pytest.raises(ValueError):
            EstimatorConfig(delta=0.0)
        with pytest.raises(ValueError):
            EstimatorConfig(delta=1.5)

    def test_state_symmetry_enforced(self):
        modes = ModeSet(((0, 0), (0, 1)), 4, 4)
        bad = np.array([[1.0, 0.5], [0.2, 1.0]])
        with pytest.raises(ValueError):
            EstimatorState(modes, np.zeros(2), bad, 0)
