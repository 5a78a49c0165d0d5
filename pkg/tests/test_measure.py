import numpy as np
import pytest

from pondsense.amplitude import compute_amplitude_grid
from pondsense.field import LaserField
from pondsense.measure import (build_grid, coarse_partition, coarsen,
                               default_p_max, energy_spectrum, floor_mask,
                               partition_sums, spectral_partition,
                               yield_partition)
from pondsense.saddle import select_channels

IP = 0.5


class TestGrid:
    def test_gaussian_integral(self):
        grid = build_grid(n_par=128, n_perp=128, p_max=6.0)
        f = np.exp(-(grid.p_par[:, None] ** 2 + grid.p_perp[None, :] ** 2))
        assert grid.integrate(f) == pytest.approx(np.pi**1.5, rel=1e-8)

    def test_default_cutoff_rule(self, mono_field):
        pmax = default_p_max(mono_field)
        assert 0.5 * pmax**2 == pytest.approx(2 * 0.44 + 10 * 0.057)

    def test_validation(self):
        with pytest.raises(ValueError):
            build_grid(n_par=8, n_perp=64, p_max=2.0)
        with pytest.raises(ValueError):
            build_grid(n_par=64, n_perp=64, p_max=-1.0)
        with pytest.raises(ValueError):
            build_grid(n_par=64, n_perp=64)

    def test_quadrature_convergence_on_amplitude(self, mono_field):
        # halving the node counts moves the total yield by < 0.5 percent
        ch = select_channels(mono_field, 2, intra_pairs=True)
        fine = build_grid(n_par=256, n_perp=128, field=mono_field)
        half = build_grid(n_par=128, n_perp=64, field=mono_field)
        ys = []
        for g in (fine, half):
            amps = compute_amplitude_grid(g.p_par, g.p_perp, mono_field, IP,
                                          channels=ch)
            ys.append(g.integrate(amps.prob()))
        assert abs(ys[1] - ys[0]) / ys[0] < 5e-3


class TestPartitions:
    def test_yield_equals_total(self, mono_field):
        grid = build_grid(n_par=64, n_perp=32, field=mono_field)
        rng = np.random.default_rng(3)
        f = rng.random(grid.shape)
        part = yield_partition(grid)
        sums = partition_sums(grid, f, part)
        assert sums.shape == (1,)
        assert sums[0] == pytest.approx(grid.integrate(f), rel=1e-12)

    def test_coarse_sums_cover_total(self, mono_field):
        grid = build_grid(n_par=64, n_perp=32, field=mono_field)
        rng = np.random.default_rng(4)
        f = rng.random(grid.shape)
        part = coarse_partition(grid, 0.1)
        sums = partition_sums(grid, f, part)
        assert sums.sum() == pytest.approx(grid.integrate(f), rel=1e-12)

    def test_coarsen_is_exact_merge(self, mono_field):
        grid = build_grid(n_par=96, n_perp=48, field=mono_field)
        rng = np.random.default_rng(5)
        f = rng.random(grid.shape)
        fine = coarse_partition(grid, 0.1)
        merged = coarsen(fine, 2)
        assert merged.width == pytest.approx(0.2)
        # every merged region must be a union of fine regions
        fine_sum = partition_sums(grid, f, fine)
        merged_sum = partition_sums(grid, f, merged)
        assert merged_sum.sum() == pytest.approx(fine_sum.sum(), rel=1e-12)
        pairs = np.stack([fine.labels.ravel(), merged.labels.ravel()])
        uniq = {tuple(c) for c in pairs.T}
        fine_ids = [a for a, _ in uniq]
        assert len(fine_ids) == len(set(fine_ids))

    def test_spectral_partition_widths(self, mono_field):
        grid = build_grid(n_par=64, n_perp=32, field=mono_field)
        part = spectral_partition(grid, 0.05 / 8)
        co = coarsen(part, 8)
        assert co.width == pytest.approx(0.05)
        f = np.ones(grid.shape)
        assert partition_sums(grid, f, co).sum() == pytest.approx(
            grid.integrate(f), rel=1e-12)

    def test_floor_mask_drops_only_negligible_mass(self, mono_field):
        grid = build_grid(n_par=64, n_perp=32, field=mono_field)
        ch = select_channels(mono_field, 1, intra_pairs=False)
        amps = compute_amplitude_grid(grid.p_par, grid.p_perp, mono_field, IP,
                                      channels=ch)
        rho = amps.prob()
        keep = floor_mask(grid, rho)
        dropped = grid.integrate(np.where(keep, 0.0, rho))
        assert dropped <= 1e-12 * grid.integrate(rho)


class TestEnergySpectrum:
    def test_isotropic_normalization(self, mono_field):
        # constructed isotropic density (negligible outside the inscribed
        # energy ball): 3-D integral equals int P(E) dE
        grid = build_grid(n_par=384, n_perp=192, p_max=4.0)
        e = grid.energies()
        rho = np.exp(-4.0 * e)
        e_grid, p_of_e, e_w = energy_spectrum(grid, rho, n_e=2000, n_theta=128)
        total_e = float(np.sum(e_w * p_of_e))
        assert total_e == pytest.approx(grid.integrate(rho), rel=1e-8)

    def test_zero_density(self, mono_field):
        grid = build_grid(n_par=64, n_perp=32, field=mono_field)
        _, p_of_e, _ = energy_spectrum(grid, np.zeros(grid.shape))
        assert np.all(p_of_e == 0.0)

    def test_amplitude_yield_agreement(self, mono_field):
        # energy-grid and momentum-grid total yields agree once the grid
        # covers the support (no mass outside the inscribed energy ball)
        ch = select_channels(mono_field, 1, intra_pairs=False)
        grid = build_grid(n_par=256, n_perp=128,
                          p_max=1.3 * default_p_max(mono_field))
        amps = compute_amplitude_grid(grid.p_par, grid.p_perp, mono_field, IP,
                                      channels=ch)
        rho = amps.prob()
        e_grid, p_of_e, e_w = energy_spectrum(grid, rho, n_e=4000, n_theta=256)
        total_e = float(np.sum(e_w * p_of_e))
        assert total_e == pytest.approx(grid.integrate(rho), rel=1e-6)

    def test_ati_peak_spacing(self, mono_field):
        # five intercycle events produce rings spaced by omega in energy
        ch = select_channels(mono_field, 5, intra_pairs=False)
        grid = build_grid(n_par=768, n_perp=384, field=mono_field)
        amps = compute_amplitude_grid(grid.p_par, grid.p_perp, mono_field, IP,
                                      channels=ch)
        e_grid, p_of_e, _ = energy_spectrum(grid, amps.prob(), n_e=4000,
                                            n_theta=128)
        # the intercycle comb has period omega in energy: the fundamental of
        # the spectrum's Fourier transform sits at 1/omega
        e_u = np.linspace(e_grid[0], e_grid[-1], 8192)
        p_u = np.interp(e_u, e_grid, p_of_e)
        p_u = p_u - p_u.mean()
        freqs = np.fft.rfftfreq(e_u.size, d=e_u[1] - e_u[0])
        spec = np.abs(np.fft.rfft(p_u))
        # look above the smooth-envelope scale (a few periods per E range)
        band = freqs > 8.0 / (e_u[-1] - e_u[0])
        f_star = freqs[band][np.argmax(spec[band])]
        assert 1.0 / f_star == pytest.approx(mono_field.omega, rel=0.05)
