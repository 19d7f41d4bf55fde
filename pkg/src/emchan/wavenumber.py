"""Wavenumber-domain channel generation for densely spaced planar arrays.

Pipeline: enumerate the propagating plane-wave lattice for each aperture,
integrate a directional power spectrum over the lattice cells to get coupling
variances, draw complex-Gaussian wavenumber coefficients, split them into
polarization blocks, and project onto element space through pattern-weighted
Fourier harmonics and per-element efficiency factors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .emcore import WaveContext
from .errors import DomainError, NumericalError, ShapeError
from .patterns import PatternSet

RECEIVER = "receiver"
TRANSMITTER = "transmitter"


# ---------------------------------------------------------------------------
# directional power spectra


@dataclass(frozen=True)
class VmfCluster:
    """One directional cluster: mean direction plus concentration."""

    weight: float
    mean_theta: float
    mean_phi: float
    concentration: float

    def __post_init__(self):
        if self.weight < 0.0:
            raise DomainError("cluster weight must be nonnegative")
        if self.concentration < 0.0:
            raise DomainError("concentration must be nonnegative")


@dataclass(frozen=True)
class VmfMixture:
    clusters: tuple[VmfCluster, ...]

    def __post_init__(self):
        if len(self.clusters) < 1:
            raise DomainError("mixture needs at least one cluster")
        total = sum(c.weight for c in self.clusters)
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"mixture weights sum to {total!r}, expected 1")

    def pdf(self, theta, phi) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(np.broadcast_shapes(theta.shape, np.shape(phi)), dtype=float)
        for c in self.clusters:
            out += c.weight * vmf_pdf(theta, phi, c)
        return out


def vmf_pdf(theta, phi, cluster: VmfCluster) -> np.ndarray:
    """Density on the sphere; alpha = 0 degenerates to the uniform 1/(4 pi).

    Evaluated as alpha * exp(alpha (cos(gamma) - 1)) / (2 pi (1 - e^{-2 alpha}))
    which stays finite for large concentrations.
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    a = cluster.concentration
    if a < 0.0:
        raise DomainError("concentration must be nonnegative")
    if a == 0.0:
        return np.broadcast_to(1.0 / (4.0 * np.pi), np.broadcast_shapes(theta.shape, phi.shape)).copy()
    cosg = (
        np.sin(theta) * np.sin(cluster.mean_theta) * np.cos(phi - cluster.mean_phi)
        + np.cos(theta) * np.cos(cluster.mean_theta)
    )
    return a * np.exp(a * (cosg - 1.0)) / (2.0 * np.pi * (1.0 - np.exp(-2.0 * a)))


def isotropic_mixture() -> VmfMixture:
    return VmfMixture(clusters=(VmfCluster(1.0, 0.0, 0.0, 0.0),))


# ---------------------------------------------------------------------------
# plane-wave lattice


@dataclass(frozen=True)
class WavenumberSupport:
    """Integer lattice indices of propagating plane waves for one aperture."""

    indices: tuple[tuple[int, int], ...]
    side: str
    length_x: float
    length_y: float
    wavelength: float

    @property
    def count(self) -> int:
        return len(self.indices)


def wavenumber_support(length_x: float, length_y: float, ctx: WaveContext,
                       side: str = RECEIVER) -> WavenumberSupport:
    """All (l_x, l_y) with (l_x lam/L_x)^2 + (l_y lam/L_y)^2 <= 1."""
    if length_x <= 0.0 or length_y <= 0.0:
        raise DomainError("aperture lengths must be positive")
    if side not in (RECEIVER, TRANSMITTER):
        raise DomainError("side must be 'receiver' or 'transmitter'")
    lam = ctx.wavelength
    nx = int(np.floor(length_x / lam))
    ny = int(np.floor(length_y / lam))
    indices = sorted(
        (lx, ly)
        for lx in range(-nx - 1, nx + 2)
        for ly in range(-ny - 1, ny + 2)
        if (lx * lam / length_x) ** 2 + (ly * lam / length_y) ** 2 <= 1.0
    )
    return WavenumberSupport(indices=tuple(indices), side=side,
                             length_x=length_x, length_y=length_y, wavelength=lam)


def wavenumber_to_angles(l_x: int, l_y: int, length_x: float, length_y: float,
                         ctx: WaveContext) -> tuple[float, float]:
    """Propagation angles of one lattice index on the front hemisphere."""
    lam = ctx.wavelength
    rad = (l_x * lam / length_x) ** 2 + (l_y * lam / length_y) ** 2
    if rad > 1.0:
        raise DomainError(f"index ({l_x}, {l_y}) lies outside the propagating disk")
    k0 = ctx.wavenumber
    k_x = 2.0 * np.pi * l_x / length_x
    k_y = 2.0 * np.pi * l_y / length_y
    k_z = np.sqrt(max(k0**2 - k_x**2 - k_y**2, 0.0))
    theta = float(np.arccos(np.clip(k_z / k0, -1.0, 1.0)))
    phi = float(np.arctan2(k_y, k_x))
    return theta, phi


# ---------------------------------------------------------------------------
# coupling variances


def _cell_measure(l_x: int, l_y: int, length_x: float, length_y: float,
                  aps: VmfMixture, ctx: WaveContext, order: int) -> float:
    """Integral of the spectrum over one lattice cell clipped to the disk.

    Work in (k_x, u) with k_y = B sin(u), B = sqrt(k0^2 - k_x^2); the
    substitution absorbs the 1/k_z area factor so the rim is regular.
    """
    k0 = ctx.wavenumber
    xg, xw = leggauss(order)
    kx_lo = max(2.0 * np.pi * (l_x - 0.5) / length_x, -k0)
    kx_hi = min(2.0 * np.pi * (l_x + 0.5) / length_x, k0)
    if kx_hi <= kx_lo:
        return 0.0
    kx = 0.5 * (kx_hi + kx_lo) + 0.5 * (kx_hi - kx_lo) * xg
    wx = 0.5 * (kx_hi - kx_lo) * xw
    total = 0.0
    for kxi, wxi in zip(kx, wx):
        b2 = k0**2 - kxi**2
        if b2 <= 0.0:
            continue
        b = np.sqrt(b2)
        ky_lo = max(2.0 * np.pi * (l_y - 0.5) / length_y, -b)
        ky_hi = min(2.0 * np.pi * (l_y + 0.5) / length_y, b)
        if ky_hi <= ky_lo:
            continue
        u_lo = np.arcsin(np.clip(ky_lo / b, -1.0, 1.0))
        u_hi = np.arcsin(np.clip(ky_hi / b, -1.0, 1.0))
        u = 0.5 * (u_hi + u_lo) + 0.5 * (u_hi - u_lo) * xg
        wu = 0.5 * (u_hi - u_lo) * xw
        ky = b * np.sin(u)
        kz = b * np.cos(u)
        theta = np.arccos(np.clip(kz / k0, -1.0, 1.0))
        phi = np.arctan2(ky, kxi)
        total += wxi * float(np.sum(wu * aps.pdf(theta, phi))) / k0
    return total


def _hemisphere_mass(aps: VmfMixture, n_theta: int = 128, n_phi: int = 256) -> float:
    """Front-hemisphere integral of the spectrum on an independent dense grid."""
    tg, tw = leggauss(n_theta)
    pg, pw = leggauss(n_phi)
    theta = 0.25 * np.pi * (tg + 1.0)
    phi = np.pi * (pg + 1.0)
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    wt = np.outer(0.25 * np.pi * tw, np.pi * pw)
    return float(np.sum(wt * aps.pdf(th, ph) * np.sin(th)))


def cell_power_fractions(support: WavenumberSupport, aps: VmfMixture,
                         ctx: WaveContext, order: int = 16) -> np.ndarray:
    """Per-cell share of the front-hemisphere power, summing to 1.

    Lattice cells outside the support whose rectangle still clips the disk
    (rim slivers) are merged into the nearest support cell so the cells tile
    the hemisphere; the result is normalized by an independently computed
    hemisphere mass.
    """
    values = {
        idx: _cell_measure(idx[0], idx[1], support.length_x, support.length_y, aps, ctx, order)
        for idx in support.indices
    }
    in_support = set(support.indices)
    lam = support.wavelength
    nx = int(np.ceil(support.length_x / lam)) + 2
    ny = int(np.ceil(support.length_y / lam)) + 2
    for lx in range(-nx, nx + 1):
        for ly in range(-ny, ny + 1):
            if (lx, ly) in in_support:
                continue
            mass = _cell_measure(lx, ly, support.length_x, support.length_y, aps, ctx, order)
            if mass <= 0.0:
                continue
            dists = [
                (((lx - sx) / support.length_x) ** 2 + ((ly - sy) / support.length_y) ** 2, (sx, sy))
                for sx, sy in support.indices
            ]
            dmin = min(dists)[0]
            nearest = [s for d, s in dists if d <= dmin * (1.0 + 1e-12)]
            for s in nearest:
                values[s] += mass / len(nearest)
    hemi = _hemisphere_mass(aps)
    if not np.isfinite(hemi) or hemi <= 0.0:
        raise NumericalError(f"hemisphere power quadrature failed (mass={hemi!r})")
    fractions = np.array([values[idx] for idx in support.indices]) / hemi
    if not np.all(np.isfinite(fractions)) or np.any(fractions < 0.0):
        raise NumericalError("cell quadrature produced invalid fractions")
    return fractions


@dataclass(frozen=True)
class CouplingVariances:
    """Per wavenumber-pair variances (and optional deterministic means)."""

    variances: np.ndarray
    means: np.ndarray
    support_r: WavenumberSupport
    support_s: WavenumberSupport

    def __post_init__(self):
        v = np.asarray(self.variances, dtype=float)
        m = np.asarray(self.means, dtype=complex)
        expected = (self.support_r.count, self.support_s.count)
        if v.shape != expected or m.shape != expected:
            raise ShapeError(f"variance/mean arrays must have shape {expected}")
        if not np.all(np.isfinite(v)) or np.any(v < 0.0):
            raise DomainError("variances must be finite and nonnegative")
        object.__setattr__(self, "variances", v)
        object.__setattr__(self, "means", m)


def coupling_variances(support_r: WavenumberSupport, support_s: WavenumberSupport,
                       aps_r: VmfMixture, aps_s: VmfMixture, ctx: WaveContext,
                       order: int = 16) -> CouplingVariances:
    """sigma^2[beta, alpha] as the product of per-side cell power fractions."""
    f_r = cell_power_fractions(support_r, aps_r, ctx, order)
    f_s = cell_power_fractions(support_s, aps_s, ctx, order)
    var = np.outer(f_r, f_s)
    return CouplingVariances(variances=var, means=np.zeros_like(var, dtype=complex),
                             support_r=support_r, support_s=support_s)


# ---------------------------------------------------------------------------
# coefficient sampling and polarization


def _as_rng(rng_seed) -> np.random.Generator:
    if isinstance(rng_seed, np.random.Generator):
        return rng_seed
    return np.random.default_rng(rng_seed)


def sample_wavenumber_channel(variances: CouplingVariances, rng_seed) -> np.ndarray:
    """Draw H_a entrywise from CN(mean, variance)."""
    rng = _as_rng(rng_seed)
    shape = variances.variances.shape
    noise = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return variances.means + np.sqrt(variances.variances / 2.0) * noise


@dataclass(frozen=True)
class PolarizedWavenumberChannel:
    """The four polarization blocks of the wavenumber-domain channel."""

    h_tt: np.ndarray
    h_tp: np.ndarray
    h_pt: np.ndarray
    h_pp: np.ndarray
    mu_xpr_db: float
    sigma_xpr_db: float

    def __post_init__(self):
        shape = np.shape(self.h_tt)
        for blk in (self.h_tp, self.h_pt, self.h_pp):
            if np.shape(blk) != shape:
                raise ShapeError("polarization blocks must share one shape")

    def block_matrix(self) -> np.ndarray:
        return np.block([[self.h_tt, self.h_tp], [self.h_pt, self.h_pp]])


def apply_polarization(h_a: np.ndarray, mu_xpr_db: float, sigma_xpr_db: float,
                       rng_seed) -> PolarizedWavenumberChannel:
    """Split H_a into four blocks with random phases and XPR attenuation.

    Co-pol blocks are phase rotations of H_a; cross-pol blocks additionally
    carry kappa^{-1/2} with kappa = 10^(X/10), X normal in dB. One kappa is
    drawn per entry and shared by both cross blocks.
    """
    h_a = np.asarray(h_a, dtype=complex)
    if not np.all(np.isfinite(h_a)):
        raise DomainError("wavenumber coefficients must be finite")
    rng = _as_rng(rng_seed)
    phases = np.exp(1j * rng.uniform(-np.pi, np.pi, size=(4,) + h_a.shape))
    xpr_db = rng.normal(mu_xpr_db, sigma_xpr_db, size=h_a.shape)
    inv_sqrt_kappa = 10.0 ** (-xpr_db / 20.0)
    return PolarizedWavenumberChannel(
        h_tt=h_a * phases[0],
        h_tp=h_a * phases[1] * inv_sqrt_kappa,
        h_pt=h_a * phases[2] * inv_sqrt_kappa,
        h_pp=h_a * phases[3],
        mu_xpr_db=mu_xpr_db,
        sigma_xpr_db=sigma_xpr_db,
    )


# ---------------------------------------------------------------------------
# arrays, harmonics, efficiencies, assembly


@dataclass(frozen=True)
class PlanarArray:
    """Rectangular-aperture element grid in its local xy plane."""

    length_x: float
    length_y: float
    spacing_x: float
    spacing_y: float
    element_positions: np.ndarray

    def __post_init__(self):
        if min(self.length_x, self.length_y, self.spacing_x, self.spacing_y) <= 0.0:
            raise DomainError("aperture lengths and spacings must be positive")
        pos = np.asarray(self.element_positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] < 1:
            raise ShapeError("element positions must have shape (n, 3)")
        eps = 1e-9
        if (pos[:, 0].min() < -eps or pos[:, 0].max() > self.length_x + eps
                or pos[:, 1].min() < -eps or pos[:, 1].max() > self.length_y + eps):
            raise DomainError("element positions must lie inside the aperture")
        object.__setattr__(self, "element_positions", pos)

    @property
    def count(self) -> int:
        return self.element_positions.shape[0]


def uniform_planar_array(length_x: float, length_y: float, spacing_x: float,
                         spacing_y: float, z: float = 0.0) -> PlanarArray:
    """Edge-inclusive uniform grid: L/spacing + 1 elements per side."""
    nx = int(round(length_x / spacing_x))
    ny = int(round(length_y / spacing_y))
    if abs(nx * spacing_x - length_x) > 1e-9 or abs(ny * spacing_y - length_y) > 1e-9:
        raise DomainError("aperture length must be an integer multiple of the spacing")
    xs = np.arange(nx + 1) * spacing_x
    ys = np.arange(ny + 1) * spacing_y
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pos = np.stack([gx.ravel(), gy.ravel(), np.full(gx.size, float(z))], axis=1)
    return PlanarArray(length_x=length_x, length_y=length_y,
                       spacing_x=spacing_x, spacing_y=spacing_y,
                       element_positions=pos)


def fourier_harmonics(array: PlanarArray, support: WavenumberSupport,
                      patterns: PatternSet, ctx: WaveContext) -> tuple[np.ndarray, np.ndarray]:
    """Pattern-weighted plane-wave steering columns, one per support index."""
    k0 = ctx.wavenumber
    idx = np.asarray(support.indices, dtype=float)
    k_x = 2.0 * np.pi * idx[:, 0] / support.length_x
    k_y = 2.0 * np.pi * idx[:, 1] / support.length_y
    gamma_sq = k0**2 - k_x**2 - k_y**2
    if np.any(gamma_sq < -1e-9 * k0**2):
        raise DomainError("support contains an evanescent index")
    gamma = np.sqrt(np.maximum(gamma_sq, 0.0))
    theta = np.arccos(np.clip(gamma / k0, -1.0, 1.0))
    phi = np.arctan2(k_y, k_x)
    pos = array.element_positions
    n = array.count
    phase = np.exp(
        1j * (np.outer(pos[:, 0], k_x) + np.outer(pos[:, 1], k_y) + np.outer(pos[:, 2], gamma))
    ) / np.sqrt(n)
    if patterns.shared:
        ft, fp = patterns.element(0).gains(theta, phi)
        return phase * ft[None, :], phase * fp[None, :]
    if patterns.count() != n:
        raise ShapeError("per-element pattern count must match the array")
    psi_t = np.empty_like(phase)
    psi_p = np.empty_like(phase)
    for q in range(n):
        ft, fp = patterns.element(q).gains(theta, phi)
        psi_t[q] = phase[q] * ft
        psi_p[q] = phase[q] * fp
    return psi_t, psi_p


def hannan_efficiency(spacing_x: float, spacing_y: float, ctx: WaveContext) -> float:
    """Dense-array embedded-element efficiency bound min(1, pi dx dy / lam^2)."""
    if spacing_x <= 0.0 or spacing_y <= 0.0:
        raise DomainError("spacings must be positive")
    return min(1.0, np.pi * spacing_x * spacing_y / ctx.wavelength**2)


@dataclass(frozen=True)
class EfficiencyMatrix:
    """Diagonal per-element amplitude efficiencies in (0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ShapeError("efficiency values must form a 1-D array")
        if np.any(v <= 0.0) or np.any(v > 1.0):
            raise DomainError("efficiencies must lie in (0, 1]")
        object.__setattr__(self, "values", v)

    @classmethod
    def uniform(cls, value: float, count: int) -> "EfficiencyMatrix":
        return cls(values=np.full(count, float(value)))

    @property
    def count(self) -> int:
        return self.values.size


def assemble_channel(gamma_r: EfficiencyMatrix, psi_r_theta: np.ndarray, psi_r_phi: np.ndarray,
                     h_pol: PolarizedWavenumberChannel, psi_s_theta: np.ndarray,
                     psi_s_phi: np.ndarray, gamma_s: EfficiencyMatrix) -> np.ndarray:
    """H = Gamma_R [Psi_R^t Psi_R^p] H_pol [Psi_S^t Psi_S^p]^H Gamma_S."""
    psi_r = np.hstack([psi_r_theta, psi_r_phi])
    psi_s = np.hstack([psi_s_theta, psi_s_phi])
    blocks = h_pol.block_matrix()
    if psi_r.shape[1] != blocks.shape[0] or psi_s.shape[1] != blocks.shape[1]:
        raise ShapeError("harmonic and polarization block shapes do not conform")
    if gamma_r.count != psi_r.shape[0] or gamma_s.count != psi_s.shape[0]:
        raise ShapeError("efficiency diagonals must match element counts")
    return (gamma_r.values[:, None] * psi_r) @ blocks @ (psi_s.conj() * gamma_s.values[:, None]).T
