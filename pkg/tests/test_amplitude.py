import numpy as np
import pytest
from scipy.integrate import quad

import pondsense._kernels as kernels
from pondsense.amplitude import (bound_matrix_element, chi,
                                 compute_amplitude_grid, derivative_amplitude,
                                 intercycle_factor, saddle_terms,
                                 transition_amplitude)
from pondsense.field import LaserField
from pondsense.measure import build_grid
from pondsense.reference import amplitude_by_quadrature, fd_derivative
from pondsense.saddle import (default_t_ref, mono_saddle_times,
                              pulse_saddle_times, select_channels)

IP = 0.5


class TestBoundMatrixElement:
    def test_reference_values(self):
        assert bound_matrix_element(1.0) == pytest.approx((2 * np.pi) ** -1.5)
        assert bound_matrix_element(0.5) == pytest.approx(
            (2 * np.pi) ** -1.5 * 0.5**0.25)
        assert bound_matrix_element(0.5) == pytest.approx(0.0533, abs=2e-4)

    @pytest.mark.parametrize("q", [0.0, np.sqrt(50.0)])
    def test_quadrature_oracle_and_q_independence(self, q):
        # <q|V|0> by radial quadrature with a narrowing Gaussian spread of the
        # contact term: V psi0 = -(2 pi/sqrt(Ip)) d_r(r psi0)|_0 x delta(r);
        # angular integral of exp(-i q.r) gives 4 pi r^2 sinc(q r).
        ip = 0.5
        kappa = np.sqrt(ip)

        def dr_rpsi0(r):
            return -ip**0.25 * kappa * np.exp(-kappa * r) / (2 * np.pi)

        def sinc(x):
            return np.sinc(x / np.pi)

        def value(eps):
            norm = (2 * np.pi * eps**2) ** -1.5

            def integrand(r):
                delta = norm * np.exp(-r**2 / (2 * eps**2))
                return (-(2 * np.pi) / kappa * (2 * np.pi) ** -1.5
                        * delta * dr_rpsi0(r) * sinc(q * r) * 4 * np.pi * r**2)

            out, _ = quad(integrand, 0.0, 12 * eps, limit=400)
            return out

        # cusp at r = 0 gives an O(eps) leading error; eliminate the eps and
        # eps^2 terms with a three-point extrapolation
        eps = 5e-4
        v1, v2, v3 = value(eps), value(2 * eps), value(4 * eps)
        extrap = (8 * v1 - 6 * v2 + v3) / 3.0
        assert extrap == pytest.approx(bound_matrix_element(ip), rel=1e-6)

    def test_invalid_ip(self):
        with pytest.raises(ValueError):
            bound_matrix_element(-0.5)


class TestIntercycleFactor:
    def test_single_cycle_unity(self, mono_field):
        p = (0.37, 0.21)
        assert intercycle_factor(p, 1, mono_field, IP) == pytest.approx(1.0)

    def test_resonance_limit(self, mono_field):
        # on an ATI ring x = k omega the factor peaks at N^2
        k = 20
        x = k * mono_field.omega
        pperp = 0.1
        ppar = np.sqrt(2 * (x - IP - mono_field.up) - pperp**2)
        for n in (2, 5, 9):
            val = intercycle_factor((ppar, pperp), n, mono_field, IP)
            assert val == pytest.approx(n**2, rel=1e-8)

    def test_chi_identity_against_finite_difference(self, mono_field):
        # d Omega_N / dU_p = chi_N Omega_N, oracle: central FD over U_p
        p = (0.324, 0.15)
        for n in (2, 5):
            def omega_of_up(up):
                return intercycle_factor(p, n, mono_field.with_up(up), IP)

            want = fd_derivative(omega_of_up, mono_field.up,
                                 1e-6 * mono_field.up)
            got = (chi(p, n, mono_field, IP)
                   * intercycle_factor(p, n, mono_field, IP))
            assert got == pytest.approx(want, rel=1e-6)

    def test_factorization_identity(self, mono_field):
        # |M_N|^2 = Omega_N |M_0|^2 on a 50 x 50 grid, below 1e-8 relative
        n_c = 4
        pp = np.linspace(-1.2, 1.2, 50)
        pt = np.linspace(0.02, 1.2, 50)
        ch1 = select_channels(mono_field, 1, intra_pairs=True)
        chn = select_channels(mono_field, n_c, intra_pairs=True)
        t_ref = default_t_ref(mono_field, ch1)
        a1 = compute_amplitude_grid(pp, pt, mono_field, IP, channels=ch1,
                                    t_ref=t_ref, backend="python")
        an = compute_amplitude_grid(pp, pt, mono_field, IP, channels=chn,
                                    t_ref=t_ref, backend="python")
        omega_n = intercycle_factor(
            (pp[:, None], pt[None, :]), n_c, mono_field, IP)
        lhs = an.prob()
        rhs = omega_n * a1.prob()
        rel = np.abs(lhs - rhs) / np.maximum(rhs.max() * 1e-12, np.abs(rhs))
        assert rel.max() < 1e-8


class TestTransitionAmplitude:
    def test_single_channel_smooth(self, mono_field):
        # one saddle: no interference fringes along p_par
        ch = select_channels(mono_field, 1, intra_pairs=False)
        pp = np.linspace(-1.0, 1.0, 201)
        amps = compute_amplitude_grid(pp, np.array([0.1]), mono_field, IP,
                                      channels=ch, backend="python")
        rho = amps.prob()[:, 0]
        sign_changes = np.sum(np.diff(np.sign(np.diff(rho))) != 0)
        assert sign_changes <= 2

    def test_quadrature_oracle_two_cycle(self, gauss2_field):
        # saddle-point M within 20 percent of the direct time integral
        ch = select_channels(gauss2_field, None, intra_pairs=True)
        t_ref = default_t_ref(gauss2_field)
        p = (0.3, 0.3)
        ss = pulse_saddle_times(p, gauss2_field, IP, ch)
        m_saddle = transition_amplitude(p, ss, gauss2_field, IP, t_ref)
        m_quad = amplitude_by_quadrature(p, gauss2_field, IP)
        rel = abs(abs(m_saddle) ** 2 - abs(m_quad) ** 2) / abs(m_quad) ** 2
        assert rel < 0.20

    def test_quadrature_oracle_converges(self, gauss2_field):
        a = amplitude_by_quadrature((0.3, 0.3), gauss2_field, IP, tol=1e-6)
        b = amplitude_by_quadrature((0.3, 0.3), gauss2_field, IP, tol=1e-8)
        assert abs(a - b) < 1e-6

    def test_incoherent_mode_returns_per_saddle(self, mono_field):
        ch = select_channels(mono_field, 2, intra_pairs=True)
        ss = mono_saddle_times((0.2, 0.2), mono_field, IP, channels=ch)
        t_ref = default_t_ref(mono_field, ch)
        terms = transition_amplitude((0.2, 0.2), ss, mono_field, IP, t_ref,
                                     coherent=False)
        assert terms.shape == (4,)
        assert abs(terms.sum() - transition_amplitude(
            (0.2, 0.2), ss, mono_field, IP, t_ref)) < 1e-14


class TestDerivativeAmplitude:
    def test_finite_difference_consistency(self, gauss5_field):
        # oracle: M_g = e^{iS(t)} d/dU_p [e^{-iS(t)} M], centred difference
        f = gauss5_field
        ch = select_channels(f, None, intra_pairs=True)
        t_ref = default_t_ref(f)
        t_end = f.nearest_a_zero(3 * f.tau)
        p = (0.3, 0.25)

        def phase_adjusted_m(up):
            fu = f.with_up(up)
            ss = pulse_saddle_times(p, fu, IP, ch)
            m = transition_amplitude(p, ss, fu, IP, t_ref)
            from pondsense.saddle import action_bundle
            s_end = action_bundle(p, t_end, fu, IP, t_ref).s
            return np.exp(-1j * s_end) * m

        fd = fd_derivative(phase_adjusted_m, f.up, 1e-6 * f.up,
                           richardson=False)
        from pondsense.saddle import action_bundle
        s_end = action_bundle(p, t_end, f, IP, t_ref).s
        want = np.exp(1j * s_end) * fd
        ss = pulse_saddle_times(p, f, IP, ch)
        got = derivative_amplitude(p, t_end, ss, f, IP, t_ref)
        assert abs(got - want) / abs(want) < 0.01

    def test_contact_potential_has_no_direct_term(self):
        # d is U_p independent, so f reduces to the action-derivative part
        assert bound_matrix_element(IP) == bound_matrix_element(IP)

    def test_large_time_growth(self, mono_field):
        # |M_g / M| approaches int A^2 / (2 U_p), growing linearly at zeros
        f = mono_field
        ch = select_channels(f, 1, intra_pairs=False)
        t_ref = default_t_ref(f, ch)
        p = (0.1, 0.2)
        ss = mono_saddle_times(p, f, IP, channels=ch)
        m = transition_amplitude(p, ss, f, IP, t_ref)
        t0 = float(ch.t_seed[0])
        ratios = []
        for k in (40, 80):
            t = t0 + k * f.period
            mg = derivative_amplitude(p, t, ss, f, IP, t_ref)
            beta = complex(f.int_a2(t0, t)).real / (2 * f.up)
            ratios.append(abs(mg / m) / beta)
        assert ratios[0] == pytest.approx(1.0, rel=0.05)
        assert ratios[1] == pytest.approx(1.0, rel=0.03)


class TestGridEvaluation:
    def test_backend_parity_mono(self, mono_field):
        if "compiled" not in kernels.available_backends():
            pytest.skip("compiled backend not built")
        ch = select_channels(mono_field, 3, intra_pairs=True)
        grid = build_grid(n_par=48, n_perp=24, field=mono_field)
        a = compute_amplitude_grid(grid.p_par, grid.p_perp, mono_field, IP,
                                   channels=ch, backend="python")
        b = compute_amplitude_grid(grid.p_par, grid.p_perp, mono_field, IP,
                                   channels=ch, backend="compiled")
        tol_m = 1e-12 * np.abs(a.m).max()
        tol_g = 1e-12 * np.abs(a.g).max()
        assert np.allclose(a.m, b.m, rtol=1e-10, atol=tol_m)
        assert np.allclose(a.g, b.g, rtol=1e-10, atol=tol_g)

    def test_backend_parity_pulse(self, gauss2_field):
        if "compiled" not in kernels.available_backends():
            pytest.skip("compiled backend not built")
        ch = select_channels(gauss2_field, None, intra_pairs=True)
        grid = build_grid(n_par=48, n_perp=24, field=gauss2_field)
        a = compute_amplitude_grid(grid.p_par, grid.p_perp, gauss2_field, IP,
                                   channels=ch, backend="python")
        b = compute_amplitude_grid(grid.p_par, grid.p_perp, gauss2_field, IP,
                                   channels=ch, backend="compiled")
        assert np.allclose(a.m, b.m, rtol=1e-9, atol=1e-12 * np.abs(a.m).max())
        assert np.allclose(a.g, b.g, rtol=1e-9, atol=1e-12 * np.abs(a.g).max())
        assert np.allclose(a.rho_inc, b.rho_inc, rtol=1e-9,
                           atol=1e-12 * a.rho_inc.max())

    def test_scalar_grid_agreement(self, gauss2_field):
        # the grid kernel and the scalar saddle sum agree point by point
        ch = select_channels(gauss2_field, 2, intra_pairs=True)
        t_ref = default_t_ref(gauss2_field)
        pp = np.array([0.3])
        pt = np.array([0.25])
        amps = compute_amplitude_grid(pp, pt, gauss2_field, IP, channels=ch,
                                      backend="python", t_ref=t_ref)
        ss = pulse_saddle_times((0.3, 0.25), gauss2_field, IP, ch)
        m_scalar = transition_amplitude((0.3, 0.25), ss, gauss2_field, IP, t_ref)
        assert amps.m[0, 0] == pytest.approx(m_scalar, rel=1e-10)

    def test_momentum_map_features(self, gauss2_field):
        # peak near p = 0; intracycle fringes only with both branches on
        # (one cycle, so no intercycle rings confound the count)
        ch_pair = select_channels(gauss2_field, 1, intra_pairs=True)
        ch_single = select_channels(gauss2_field, 1, intra_pairs=False)
        grid = build_grid(n_par=160, n_perp=48, field=gauss2_field)
        on = compute_amplitude_grid(grid.p_par, grid.p_perp, gauss2_field, IP,
                                    channels=ch_pair)
        off = compute_amplitude_grid(grid.p_par, grid.p_perp, gauss2_field, IP,
                                     channels=ch_single)
        rho_on, rho_off = on.prob(), off.prob()
        i, j = np.unravel_index(np.argmax(rho_on), rho_on.shape)
        assert abs(grid.p_par[i]) < 0.35
        assert grid.p_perp[j] < 0.35

        def fringe_count(rho):
            line = rho[:, 2]
            line = line / line.max()
            d = np.diff(np.sign(np.diff(line)))
            return np.sum((d != 0) & (line[1:-1] > 1e-3))

        assert fringe_count(rho_on) > 3 * max(fringe_count(rho_off), 1)

    def test_ati_rings_only_with_multiple_cycles(self, mono_field):
        # radial oscillation of |M|^2 with period omega in energy needs
        # at least two intercycle events
        grid_pp = np.linspace(0.05, 1.2, 400)
        pt = np.array([0.05])
        ch1 = select_channels(mono_field, 1, intra_pairs=False)
        ch5 = select_channels(mono_field, 5, intra_pairs=False)
        a1 = compute_amplitude_grid(grid_pp, pt, mono_field, IP, channels=ch1)
        a5 = compute_amplitude_grid(grid_pp, pt, mono_field, IP, channels=ch5)

        def count_peaks(rho):
            line = rho[:, 0] / rho[:, 0].max()
            d = np.diff(np.sign(np.diff(line)))
            return np.sum((d < 0) & (line[1:-1] > 1e-4))

        assert count_peaks(a5.prob()) >= 5
        assert count_peaks(a1.prob()) <= 2
