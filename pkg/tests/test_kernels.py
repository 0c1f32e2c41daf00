import numpy as np
import pytest

from wavelqr.kernels import (
    QUAD_WARNING,
    assemble_K,
    assemble_P,
    assemble_Q,
    basis_matrix,
    convergence_report,
    decay_fit,
    pde_residual,
    residual_coefficient_matrices,
    series_thresholds,
)
from wavelqr.model import (
    Boundary,
    ExplicitWeights,
    ModalWeight,
    PowerLawWeights,
    WaveConfig,
    mode_range,
    weight_of,
)
from wavelqr.quad import simpson_weights
from wavelqr.riccati import ModalRiccati, modal_gain, solve_closed_form, solve_family


def unit_solution(n):
    return ModalRiccati(n, 1.0, 1.0, 1.0, (0.0, 0.0, 0.0, 0.0))


class TestAssembleP:
    def test_single_mode_midpoint_identity(self, dirichlet_cfg):
        kf = assemble_P([unit_solution(1)], np.array([0.5]), Boundary.DIRICHLET)
        np.testing.assert_allclose(kf.values[0, 0], np.ones((2, 2)), rtol=1e-15)

    def test_symmetry_at_random_pairs(self, rng, dirichlet_cfg):
        sols = solve_family(dirichlet_cfg, PowerLawWeights(1.0, 5.0, cutoff=16), 16)
        a = rng.random(100)
        b = rng.random(100)
        kab = assemble_P(sols, a, Boundary.DIRICHLET, grid_x2=b)
        kba = assemble_P(sols, b, Boundary.DIRICHLET, grid_x2=a)
        for i in range(100):
            np.testing.assert_allclose(
                kab.values[i, i], kba.values[i, i].T, rtol=0, atol=1e-14
            )

    def test_dirichlet_boundary_rows_vanish(self, dirichlet_cfg):
        sols = solve_family(dirichlet_cfg, PowerLawWeights(1.0, 5.0, cutoff=32), 32)
        grid = np.linspace(0.0, 1.0, 101)
        kf = assemble_P(sols, grid, Boundary.DIRICHLET)
        assert np.abs(kf.values[0]).max() < 1e-12
        assert np.abs(kf.values[-1]).max() < 1e-12
        assert np.abs(kf.values[:, 0]).max() < 1e-12
        assert np.abs(kf.values[:, -1]).max() < 1e-12

    def test_neumann_edge_slope_second_order(self, neumann_cfg):
        sols = solve_family(neumann_cfg, PowerLawWeights(1.0, 7.0, cutoff=16), 16)
        h = 1e-3
        grid = np.array([0.0, h, 2 * h, 1.0 - 2 * h, 1.0 - h, 1.0])
        kf = assemble_P(sols, grid, Boundary.NEUMANN)
        # curvature bound of the truncated series scales the O(h^2) slope
        curv = sum(
            np.abs(s.matrix).max() * (s.n * np.pi) ** 2 for s in sols
        )
        left = np.abs(kf.values[1] - kf.values[0]).max() / h
        right = np.abs(kf.values[-1] - kf.values[-2]).max() / h
        assert left <= 0.6 * curv * h
        assert right <= 0.6 * curv * h

    def test_empty_solutions(self, dirichlet_cfg):
        kf = assemble_P([], np.linspace(0, 1, 5), Boundary.DIRICHLET)
        assert kf.values.shape == (5, 5, 2, 2) and np.all(kf.values == 0.0)

    def test_cauchy_tail_regression_p11(self, dirichlet_cfg):
        """Partial-sum sup differences shrink slowly for r = 5 but do shrink.

        Frozen from a direct evaluation: the 128 -> 256 difference is about
        0.0994, two orders above naive expectations because the P11
        coefficients decay only like n^(-1.5).
        """
        grid = np.linspace(0.0, 1.0, 201)

        def tail_sup(n1, n2):
            fam = PowerLawWeights(1.0, 5.0, cutoff=n2)
            sols = [
                solve_closed_form(dirichlet_cfg, weight_of(fam, n, Boundary.DIRICHLET))
                for n in range(n1 + 1, n2 + 1)
            ]
            return float(np.abs(assemble_P(sols, grid, Boundary.DIRICHLET).component(0, 0)).max())

        d1 = tail_sup(128, 256)
        d2 = tail_sup(256, 512)
        np.testing.assert_allclose(d1, 0.09943576477914128, rtol=1e-6)
        np.testing.assert_allclose(d2, 0.07041133199459508, rtol=1e-6)
        assert d2 < d1


class TestAssembleK:
    def test_zero_solutions_zero_profile(self, dirichlet_cfg):
        sols = [ModalRiccati(n, 0.0, 0.0, 0.0, (0.0,) * 4) for n in range(1, 5)]
        prof = assemble_K(sols, dirichlet_cfg, np.linspace(0, 1, 11))
        assert np.all(prof.values == 0.0)

    def test_single_dirichlet_mode_shape(self, dirichlet_cfg):
        n = 3
        sol = solve_closed_form(dirichlet_cfg, ModalWeight(n, 1.0, 0.0, 1.0))
        grid = np.linspace(0.0, 1.0, 41)
        prof = assemble_K([sol], dirichlet_cfg, grid)
        coef = -(dirichlet_cfg.beta / dirichlet_cfg.R) * n * np.pi * np.array([sol.p12, sol.p22])
        expect = np.outer(np.sin(n * np.pi * grid), coef)
        np.testing.assert_allclose(prof.values, expect, atol=1e-14)

    def test_dirichlet_profile_vanishes_at_ends(self, dirichlet_cfg):
        sols = solve_family(dirichlet_cfg, PowerLawWeights(1.0, 3.0, cutoff=24), 24)
        prof = assemble_K(sols, dirichlet_cfg, np.linspace(0, 1, 21))
        assert np.abs(prof.values[0]).max() < 1e-12
        assert np.abs(prof.values[-1]).max() < 1e-12

    def test_dirichlet_matches_kernel_derivative_trace(self, dirichlet_cfg):
        # K(x2) = -R^-1 beta dP/dx1 at x1 = 0, rows (2,1) and (2,2); checked
        # by finite differences of the assembled kernel
        sols = solve_family(dirichlet_cfg, PowerLawWeights(1.0, 5.0, cutoff=8), 8)
        grid = np.linspace(0.0, 1.0, 21)
        h = 1e-6
        k_near = assemble_P(sols, np.array([0.0, h, 2 * h]), Boundary.DIRICHLET, grid_x2=grid)
        dP21 = (-3 * k_near.values[0, :, 1, 0] + 4 * k_near.values[1, :, 1, 0]
                - k_near.values[2, :, 1, 0]) / (2 * h)
        dP22 = (-3 * k_near.values[0, :, 1, 1] + 4 * k_near.values[1, :, 1, 1]
                - k_near.values[2, :, 1, 1]) / (2 * h)
        expect = -(dirichlet_cfg.beta / dirichlet_cfg.R) * np.stack([dP21, dP22], axis=1)
        prof = assemble_K(sols, dirichlet_cfg, grid)
        np.testing.assert_allclose(prof.values, expect, rtol=1e-6, atol=1e-8)

    def test_neumann_matches_kernel_value_trace(self, neumann_cfg):
        # K(x2) = -R^-1 beta P(1, x2), rows (2,1) and (2,2)
        sols = solve_family(neumann_cfg, PowerLawWeights(1.0, 7.0, cutoff=8), 8)
        grid = np.linspace(0.0, 1.0, 21)
        edge = assemble_P(sols, np.array([1.0]), Boundary.NEUMANN, grid_x2=grid)
        expect = -(neumann_cfg.beta / neumann_cfg.R) * np.stack(
            [edge.values[0, :, 1, 0], edge.values[0, :, 1, 1]], axis=1
        )
        prof = assemble_K(sols, neumann_cfg, grid)
        np.testing.assert_allclose(prof.values, expect, rtol=0, atol=1e-13)

    def test_neumann_single_mode_sign_flip_at_origin(self, neumann_cfg):
        sol = solve_closed_form(neumann_cfg, ModalWeight(1, 1.0, 0.0, 1.0))
        prof = assemble_K([sol], neumann_cfg, np.array([0.0]))
        expect = +(neumann_cfg.beta / neumann_cfg.R) * np.array([sol.p12, sol.p22])
        np.testing.assert_allclose(prof.values[0], expect, rtol=1e-14)


class TestAssembleQ:
    def test_non_summable_warning(self, dirichlet_cfg):
        kf = assemble_Q(PowerLawWeights(1.0, 1.0, cutoff=8), np.linspace(0, 1, 11),
                        Boundary.DIRICHLET, 8)
        assert QUAD_WARNING in kf.warnings
        kf2 = assemble_Q(PowerLawWeights(1.0, 1.5, cutoff=8), np.linspace(0, 1, 11),
                         Boundary.DIRICHLET, 8)
        assert kf2.warnings == ()

    def test_zero_family_zero_field(self):
        kf = assemble_Q(ExplicitWeights({}, cutoff=8), np.linspace(0, 1, 11),
                        Boundary.NEUMANN, 8)
        assert np.all(kf.values == 0.0)

    def test_single_mode_product_structure(self):
        fam = ExplicitWeights({1: ModalWeight(1, 1.0, 0.0, 1.0)}, cutoff=1)
        grid = np.linspace(0.0, 1.0, 31)
        kf = assemble_Q(fam, grid, Boundary.DIRICHLET, 1)
        s = np.sin(np.pi * grid)
        np.testing.assert_allclose(kf.component(0, 0), np.outer(s, s), atol=1e-15)
        np.testing.assert_allclose(kf.component(0, 1), 0.0, atol=1e-15)


class TestPdeResidual:
    @pytest.mark.parametrize("boundary,k", [(Boundary.DIRICHLET, 2), (Boundary.NEUMANN, 1)])
    def test_single_active_mode_residual_vanishes(self, boundary, k):
        cfg = WaveConfig(boundary, alpha=0.3, beta=1.2, R=0.8)
        fam = ExplicitWeights({k: ModalWeight(k, 1.0, 0.2, 2.0)}, cutoff=6)
        sols = solve_family(cfg, fam, 6)
        grid = np.linspace(0.0, 1.0, 201)
        fields = pde_residual(cfg, sols, fam, grid)
        assert fields.max_abs() <= 1e-10

    def test_zero_weights_zero_residual(self, dirichlet_cfg):
        fam = ExplicitWeights({}, cutoff=4)
        sols = solve_family(dirichlet_cfg, fam, 4)
        fields = pde_residual(dirichlet_cfg, sols, fam, np.linspace(0, 1, 51))
        assert fields.max_abs() == 0.0

    def test_two_mode_cross_term_formula(self, dirichlet_cfg):
        """The surviving first-equation residual is exactly
        -gamma^2 sum_{m != n} m n pi^2 P12^m P21^n sin(m pi x1) sin(n pi x2)."""
        fam = ExplicitWeights(
            {1: ModalWeight(1, 1.0, 0.0, 1.0), 3: ModalWeight(3, 0.5, 0.0, 0.5)},
            cutoff=3,
        )
        sols = solve_family(dirichlet_cfg, fam, 3)
        by_n = {s.n: s for s in sols}
        grid = np.linspace(0.0, 1.0, 201)
        fields = pde_residual(dirichlet_cfg, sols, fam, grid)
        g2 = dirichlet_cfg.gamma_sq
        expect = np.zeros((201, 201))
        for m in (1, 3):
            for n in (1, 3):
                if m == n:
                    continue
                expect -= (
                    g2 * m * n * np.pi**2 * by_n[m].p12 * by_n[n].p12
                    * np.outer(np.sin(m * np.pi * grid), np.sin(n * np.pi * grid))
                )
        np.testing.assert_allclose(fields.r11, expect, atol=1e-10)

    def test_diagonal_coefficients_match_modal_residuals(self, neumann_cfg):
        fam = PowerLawWeights(1.0, 4.0, cutoff=6)
        sols = solve_family(neumann_cfg, fam, 6)
        modes, mats = residual_coefficient_matrices(neumann_cfg, sols, fam)
        for m, key in zip(mats, range(4)):
            np.testing.assert_allclose(
                np.diag(m), [s.residuals[key] for s in sols], atol=1e-14
            )

    def test_diagonal_extraction_by_quadrature(self, dirichlet_cfg):
        from wavelqr.model import projection_weight

        fam = PowerLawWeights(1.0, 5.0, cutoff=12)
        sols = solve_family(dirichlet_cfg, fam, 12)
        npts = 1001
        grid = np.linspace(0.0, 1.0, npts)
        fields = pde_residual(dirichlet_cfg, sols, fam, grid)
        wq = simpson_weights(npts, grid[1] - grid[0])
        modes = [s.n for s in sols]
        phi = basis_matrix(Boundary.DIRICHLET, modes, grid)
        pw = np.array([projection_weight(Boundary.DIRICHLET, n) for n in modes])
        proj = (phi * wq) / pw[:, None]
        for f in (fields.r11, fields.r12, fields.r21, fields.r22):
            coeffs = proj @ f @ proj.T
            assert np.abs(np.diag(coeffs)).max() <= 1e-8

    def test_duplicate_modes_rejected(self, dirichlet_cfg):
        fam = PowerLawWeights(1.0, 5.0, cutoff=2)
        sol = solve_closed_form(dirichlet_cfg, weight_of(fam, 1, Boundary.DIRICHLET))
        with pytest.raises(ValueError, match="more than once"):
            pde_residual(dirichlet_cfg, [sol, sol], fam, np.linspace(0, 1, 11))


class TestDecayFit:
    def test_exact_power_sequence(self):
        ns = np.arange(10, 200)
        np.testing.assert_allclose(decay_fit(ns, ns.astype(float) ** -2), -2.0, atol=1e-12)

    def test_synthetic_exponent_recovery(self, rng):
        ns = np.arange(5, 500)
        for p in (-0.5, -3.7, -9.0):
            vals = 2.3 * ns.astype(float) ** p
            np.testing.assert_allclose(decay_fit(ns, vals), p, atol=1e-6)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            decay_fit([1, 2, 3], [1.0, -1.0, 0.5])

    def test_dirichlet_r5_component_exponents(self, dirichlet_cfg):
        ns = np.arange(50, 501)
        p12, p22, p11 = [], [], []
        for n in ns:
            amp = 1.0 / float(n) ** 5
            s = solve_closed_form(dirichlet_cfg, ModalWeight(int(n), amp, 0.0, amp))
            p12.append(s.p12)
            p22.append(s.p22)
            p11.append(s.p11)
        assert abs(decay_fit(ns, p12) - (-7.0)) < 0.1
        assert abs(decay_fit(ns, p22) - (-3.5)) < 0.1
        assert abs(decay_fit(ns, p11) - (-1.5)) < 0.1

    def test_neumann_r7_component_exponents(self, neumann_cfg):
        # P22 and P11 follow the -r/2 and 2-r/2 rates; P12 decays like
        # n^-(r+2) (the quadratic-formula difference), which the fit
        # confirms at -9 for r = 7
        ns = np.arange(50, 501)
        p12, p22, p11 = [], [], []
        for n in ns:
            amp = 1.0 / float(n) ** 7
            s = solve_closed_form(neumann_cfg, ModalWeight(int(n), amp, 0.0, amp))
            p12.append(s.p12)
            p22.append(s.p22)
            p11.append(s.p11)
        assert abs(decay_fit(ns, p22) - (-3.5)) < 0.1
        assert abs(decay_fit(ns, p11) - (-1.5)) < 0.1
        assert abs(decay_fit(ns, p12) - (-9.0)) < 0.1


class TestConvergenceReport:
    def test_thresholds(self):
        assert series_thresholds(Boundary.DIRICHLET) == {"Q": 1.0, "K": 2.0, "P11": 4.0}
        assert series_thresholds(Boundary.NEUMANN) == {"Q": 1.0, "K": 2.0, "P11": 6.0}

    @pytest.mark.parametrize("r,expect", [
        (1.5, {"Q": "convergent", "K": "divergent", "P11": "divergent"}),
        (2.5, {"Q": "convergent", "K": "convergent", "P11": "divergent"}),
        (4.5, {"Q": "convergent", "K": "convergent", "P11": "convergent"}),
        (6.5, {"Q": "convergent", "K": "convergent", "P11": "convergent"}),
    ])
    def test_dirichlet_verdicts(self, dirichlet_cfg, r, expect):
        rep = convergence_report(
            dirichlet_cfg, PowerLawWeights(1.0, r, cutoff=64), [16, 32, 64],
            fit_window=(50, 150),
        )
        for name, verdict in expect.items():
            assert rep[name].verdict == verdict

    @pytest.mark.parametrize("r,p11", [
        (4.5, "divergent"), (5.0, "divergent"), (6.5, "convergent"),
    ])
    def test_neumann_p11_threshold(self, neumann_cfg, r, p11):
        rep = convergence_report(
            neumann_cfg, PowerLawWeights(1.0, r, cutoff=64), [16, 32, 64],
            fit_window=(50, 150),
        )
        assert rep["P11"].verdict == p11

    def test_dirichlet_r3_k_convergent(self, dirichlet_cfg):
        rep = convergence_report(
            dirichlet_cfg, PowerLawWeights(1.0, 3.0, cutoff=64), [16, 32, 64],
            fit_window=(50, 150),
        )
        assert rep["K"].verdict == "convergent"
        assert rep["P11"].verdict == "divergent"

    def test_convergent_series_cauchy_decreasing(self, dirichlet_cfg):
        rep = convergence_report(
            dirichlet_cfg, PowerLawWeights(1.0, 5.0, cutoff=128), [16, 32, 64, 128],
            fit_window=(50, 150),
        )
        for name in ("Q", "K", "P11"):
            assert rep[name].cauchy_decreasing

    def test_requires_power_law(self, dirichlet_cfg):
        with pytest.raises(TypeError):
            convergence_report(dirichlet_cfg, ExplicitWeights({}, cutoff=4), [8, 16])
