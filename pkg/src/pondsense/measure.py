"""Momentum-space quadrature, POVM region partitions, and the energy spectrum.

The grid is cylindrical: Gauss-Legendre nodes in p_par on [-p_max, p_max]
and in p_perp on [0, p_max], with the measure 2 pi w_i w_j p_perp_j.  All
POVM partitions are defined directly on the grid nodes, so refining or
merging bins is an exact regrouping of the same weighted samples and the
data-processing inequalities hold to rounding error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .field import LaserField

PROB_FLOOR_REL = 1e-15


@dataclass(frozen=True)
class MomentumGrid:
    p_par: np.ndarray
    w_par: np.ndarray
    p_perp: np.ndarray
    w_perp: np.ndarray
    p_max: float

    @property
    def shape(self):
        return (self.p_par.size, self.p_perp.size)

    def weights2d(self) -> np.ndarray:
        """Cylindrical quadrature weights: int d^3p f = sum W f."""
        return 2.0 * np.pi * np.outer(self.w_par, self.w_perp * self.p_perp)

    def energies(self) -> np.ndarray:
        return 0.5 * (self.p_par[:, None] ** 2 + self.p_perp[None, :] ** 2)

    def integrate(self, f: np.ndarray) -> float:
        return float(np.sum(self.weights2d() * f))


def default_p_max(field: LaserField) -> float:
    """Cutoff rule: p_max^2/2 = 2 U_p + 10 omega (direct-ATI edge + margin)."""
    return float(np.sqrt(2.0 * (2.0 * field.up + 10.0 * field.omega)))


def build_grid(n_par: int = 128, n_perp: int = 64,
               p_max: float | None = None,
               field: LaserField | None = None) -> MomentumGrid:
    if p_max is None:
        if field is None:
            raise ValueError("pass p_max or a field for the default cutoff")
        p_max = default_p_max(field)
    if p_max <= 0:
        raise ValueError(f"p_max must be positive, got {p_max}")
    if n_par < 16 or n_perp < 16:
        raise ValueError("node counts must be >= 16")
    x, wx = np.polynomial.legendre.leggauss(n_par)
    y, wy = np.polynomial.legendre.leggauss(n_perp)
    return MomentumGrid(
        p_par=x * p_max, w_par=wx * p_max,
        p_perp=0.5 * (y + 1.0) * p_max, w_perp=0.5 * wy * p_max,
        p_max=float(p_max),
    )


@dataclass(frozen=True)
class BinPartition:
    """Disjoint cover of the grid nodes by measurement regions.

    ``labels`` maps every node to a region id in [0, n_regions); ``kind`` is
    one of full, coarse, yield, spec, spec_coarse.  ``cells`` keeps the raw
    integer cell coordinates so that coarsening by an integer factor stays an
    exact merge of regions.
    """

    kind: str
    labels: np.ndarray
    n_regions: int
    cells: tuple | None = None
    width: float | None = None


def _compact(raw: np.ndarray) -> tuple[np.ndarray, int]:
    uniq, inv = np.unique(raw.ravel(), return_inverse=True)
    return inv.reshape(raw.shape), uniq.size


def yield_partition(grid: MomentumGrid) -> BinPartition:
    """Single-region partition: the two-outcome ionized/bound measurement."""
    labels = np.zeros(grid.shape, dtype=np.int64)
    return BinPartition("yield", labels, 1)


def coarse_partition(grid: MomentumGrid, dp: float) -> BinPartition:
    """Squares of side dp in the (p_par, p_perp) plane, edges anchored at 0."""
    if dp <= 0:
        raise ValueError(f"dp must be positive, got {dp}")
    cp = np.floor(grid.p_par / dp).astype(np.int64)
    ct = np.floor(grid.p_perp / dp).astype(np.int64)
    raw = cp[:, None] * 1_000_003 + ct[None, :]
    labels, nreg = _compact(raw)
    return BinPartition("coarse", labels, nreg, cells=(cp, ct), width=dp)


def coarsen(partition: BinPartition, factor: int) -> BinPartition:
    """Merge a coarse/spec partition by an integer factor (exact nesting)."""
    if partition.cells is None:
        raise ValueError("partition does not carry cell coordinates")
    if partition.kind == "coarse":
        cp, ct = partition.cells
        raw = (cp // factor)[:, None] * 1_000_003 + (ct // factor)[None, :]
        labels, nreg = _compact(raw)
        return BinPartition("coarse", labels, nreg,
                            cells=(cp // factor, ct // factor),
                            width=partition.width * factor)
    if partition.kind == "spec":
        (ce,) = partition.cells
        labels, nreg = _compact(ce // factor)
        return BinPartition("spec_coarse", labels, nreg, cells=(ce // factor,),
                            width=partition.width * factor)
    raise ValueError(f"cannot coarsen partition of kind {partition.kind}")


def spectral_partition(grid: MomentumGrid, de: float, kind: str = "spec") -> BinPartition:
    """Energy shells of width de over E = p^2/2 (angular info discarded)."""
    if de <= 0:
        raise ValueError(f"de must be positive, got {de}")
    ce = np.floor(grid.energies() / de).astype(np.int64)
    labels, nreg = _compact(ce)
    return BinPartition(kind, labels, nreg, cells=(ce,), width=de)


def partition_sums(grid: MomentumGrid, values: np.ndarray,
                   partition: BinPartition) -> np.ndarray:
    """Per-region integrals of ``values`` under the cylindrical measure."""
    wv = grid.weights2d() * values
    return np.bincount(partition.labels.ravel(), weights=wv.ravel(),
                       minlength=partition.n_regions)


def floor_mask(grid: MomentumGrid, rho: np.ndarray,
               rel: float = PROB_FLOOR_REL) -> np.ndarray:
    """Nodes carrying non-negligible probability mass (0/0 protection).

    Applied once to both the probability and its derivative so every POVM
    sums exactly the same sample set.
    """
    wrho = grid.weights2d() * rho
    return wrho >= rel * wrho.max()


def energy_spectrum(grid: MomentumGrid, rho: np.ndarray,
                    n_e: int = 600, n_theta: int = 256):
    """Angle-integrated spectrum P(E) = p * int dOmega |M|^2.

    Uses a bicubic interpolant of the momentum-grid samples, swept over the
    polar angle at fixed energy.  Returns (e_grid, p_of_e, e_weights) with
    Gauss-Legendre energy nodes on [0, p_max^2/2], so sum(e_weights * p_of_e)
    is the spectral total.  Note the energy ball E <= p_max^2/2 is inscribed
    in the cylindrical grid domain: totals agree only when the density is
    negligible outside the ball.
    """
    spl = RectBivariateSpline(grid.p_par, grid.p_perp, rho, kx=3, ky=3)
    e_max = 0.5 * grid.p_max**2
    xe, we = np.polynomial.legendre.leggauss(n_e)
    e_grid = 0.5 * (xe + 1.0) * e_max
    e_w = 0.5 * we * e_max
    xt, wt = np.polynomial.legendre.leggauss(n_theta)
    theta = 0.5 * (xt + 1.0) * np.pi
    w_theta = 0.5 * np.pi * wt
    p = np.sqrt(2.0 * e_grid)
    pp = np.clip(np.outer(p, np.cos(theta)), grid.p_par[0], grid.p_par[-1])
    pt = np.clip(np.outer(p, np.sin(theta)), grid.p_perp[0], grid.p_perp[-1])
    vals = spl.ev(pp, pt)
    integ = 2.0 * np.pi * (vals * np.sin(theta) * w_theta).sum(axis=1)
    return e_grid, p * integ, e_w
