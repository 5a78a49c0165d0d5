"""Quantum and classical Fisher information, Cramér-Rao uncertainties, and
the large-time growth law of the quantum information.

All classical informations are functionals of the outcome probabilities
P_r = int_R |M|^2 and their parameter derivatives D_r = int_R d|M|^2/dU_p;
regions are grid-node partitions from :mod:`pondsense.measure`, so the
chain full >= coarse >= yield is an exact Cauchy-Schwarz statement about
the same weighted samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .amplitude import AmplitudeGrid
from .field import LaserField
from .measure import (BinPartition, MomentumGrid, coarse_partition, coarsen,
                      floor_mask, partition_sums, spectral_partition,
                      yield_partition)


class FisherError(RuntimeError):
    pass


def quantum_fisher(amps: AmplitudeGrid, grid: MomentumGrid, t_eval: float):
    """Q_F(t) = 4 [ int |M_g|^2 - |int conj(M) M_g|^2 ].

    ``t_eval`` must sit at a vector-potential zero (or after the pulse) so
    the canonical and kinetic momenta coincide.
    """
    a_t = abs(complex(amps.field.vector_potential(t_eval)))
    if a_t > 1e-6 * amps.field.a0:
        raise FisherError(
            f"t_eval={t_eval} is not a vector-potential zero (A={a_t:.3e})")
    w = grid.weights2d()
    mg = amps.m_g(t_eval)
    first = float(np.sum(w * np.abs(mg) ** 2))
    overlap = np.sum(w * np.conj(amps.m) * mg)
    qf = 4.0 * (first - abs(overlap) ** 2)
    if qf < -1e-10 * max(4.0 * first, 1.0):
        raise FisherError(f"quantum Fisher information came out negative: {qf}")
    return max(qf, 0.0)


def total_yield(amps: AmplitudeGrid, grid: MomentumGrid) -> float:
    return grid.integrate(amps.prob())


def qf_alpha(amps: AmplitudeGrid, grid: MomentumGrid) -> float:
    """Growth-law coefficient alpha = Y (1 - Y) with Y the ionized fraction."""
    y = total_yield(amps, grid)
    return y * (1.0 - y)


def masked_fields(amps: AmplitudeGrid, grid: MomentumGrid):
    """Probability density and its U_p derivative with the floor rule applied."""
    rho = amps.prob()
    d = amps.prob_derivative()
    keep = floor_mask(grid, rho)
    return np.where(keep, rho, 0.0), np.where(keep, d, 0.0)


def cfi_from_partition(grid: MomentumGrid, rho: np.ndarray, d: np.ndarray,
                       partition: BinPartition) -> float:
    """Classical Fisher information sum_r D_r^2 / P_r over the partition."""
    if partition.n_regions < 1:
        raise FisherError("empty partition")
    pr = partition_sums(grid, rho, partition)
    dr = partition_sums(grid, d, partition)
    keep = pr > 0.0
    return float(np.sum(dr[keep] ** 2 / pr[keep]))


def cfi_full(grid: MomentumGrid, rho: np.ndarray, d: np.ndarray) -> float:
    """Infinite-precision momentum measurement: int d^3p (d rho/dg)^2 / rho."""
    w = grid.weights2d()
    keep = rho > 0.0
    return float(np.sum((w[keep] * d[keep] ** 2) / rho[keep]))


def cfi_yield(grid: MomentumGrid, rho: np.ndarray, d: np.ndarray) -> float:
    return cfi_from_partition(grid, rho, d, yield_partition(grid))


def cfi_coarse(grid: MomentumGrid, rho: np.ndarray, d: np.ndarray,
               dp: float) -> float:
    return cfi_from_partition(grid, rho, d, coarse_partition(grid, dp))


def cfi_spectral(grid: MomentumGrid, rho: np.ndarray, d: np.ndarray,
                 de: float | None = None, omega: float | None = None) -> float:
    """Full spectral measurement, approximated by fine energy shells."""
    if de is None:
        if omega is None:
            raise FisherError("pass a shell width or omega for the default")
        de = omega / 16.0
    return cfi_from_partition(grid, rho, d, spectral_partition(grid, de))


def cramer_rao(f: float, n_measurements: float, up: float) -> float:
    """Relative uncertainty (percent): 100 / (sqrt(N F) U_p).

    Identical for U_p and intensity since the two are proportional.
    """
    if f <= 0:
        raise FisherError(f"Fisher information must be positive, got {f}")
    if n_measurements < 1:
        raise FisherError(f"need at least one measurement, got {n_measurements}")
    return 100.0 / (np.sqrt(n_measurements * f) * up)


def qf_asymptote(field: LaserField, t, t0: float = 0.0):
    """Large-time growth curve Q_F / alpha = ((1/U_p) int_{t0}^{t} A^2 ds)^2.

    ``t0`` is the ionization-event time the growth is referenced to (the
    envelope peak for the bundled scenarios).
    """
    val = np.real(field.int_a2(t0, t)) / field.up
    return np.asarray(val) ** 2


POVM_KEYS = ("full", "coarse", "yield", "spec", "spec_coarse")


@dataclass
class FisherReport:
    """All Fisher quantities and Cramér-Rao uncertainties at one parameter point."""

    params: dict
    t_eval: float
    qf: float
    alpha: float
    cfi: dict
    n_measurements: float
    yield_total: float
    depletion_flag: bool
    uncertainty_pct: dict = dc_field(default_factory=dict)
    diagnostics: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        if not self.uncertainty_pct:
            up = self.params["up"]
            unc = {}
            if self.qf > 0:
                unc["optimal"] = cramer_rao(self.qf, self.n_measurements, up)
            for k, v in self.cfi.items():
                if v is not None and v > 0:
                    unc[k] = cramer_rao(v, self.n_measurements, up)
            self.uncertainty_pct = unc

    def to_dict(self) -> dict:
        return {
            "params": self.params,
            "t_eval": self.t_eval,
            "qf": self.qf,
            "alpha": self.alpha,
            "cfi": self.cfi,
            "n_measurements": self.n_measurements,
            "uncertainty_pct": self.uncertainty_pct,
            "yield_total": self.yield_total,
            "depletion_flag": self.depletion_flag,
            "diagnostics": self.diagnostics,
        }


def compute_report(amps: AmplitudeGrid, grid: MomentumGrid, t_eval: float,
                   n_measurements: float = 1.0,
                   dp: float = 0.1, de: float = 0.05, spec_subdivide: int = 8,
                   params: dict | None = None,
                   povm: tuple = POVM_KEYS) -> FisherReport:
    """Evaluate the quantum information and the requested POVM informations."""
    rho, d = masked_fields(amps, grid)
    qf = quantum_fisher(amps, grid, t_eval)
    y = total_yield(amps, grid)

    cfi: dict = {k: None for k in POVM_KEYS}
    if "full" in povm:
        cfi["full"] = cfi_full(grid, rho, d)
    if "coarse" in povm:
        cfi["coarse"] = cfi_coarse(grid, rho, d, dp)
    if "yield" in povm:
        cfi["yield"] = cfi_yield(grid, rho, d)
    if "spec" in povm or "spec_coarse" in povm:
        fine = spectral_partition(grid, de / spec_subdivide)
        if "spec" in povm:
            cfi["spec"] = cfi_from_partition(grid, rho, d, fine)
        if "spec_coarse" in povm:
            cfi["spec_coarse"] = cfi_from_partition(
                grid, rho, d, coarsen(fine, spec_subdivide))

    base = dict(params or {})
    base.setdefault("up", amps.field.up)
    return FisherReport(
        params=base,
        t_eval=float(t_eval),
        qf=qf,
        alpha=y * (1.0 - y),
        cfi=cfi,
        n_measurements=n_measurements,
        yield_total=y,
        depletion_flag=bool(y > 0.10),
        diagnostics={"n_saddles": len(amps.channels),
                     "n_failed": amps.n_failed,
                     "max_residual": amps.max_residual},
    )
