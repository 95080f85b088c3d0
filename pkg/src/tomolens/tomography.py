"""Optical tomograms on quadrature grids.

The single-mode tomogram of a pure state is evaluated as
w(X, theta) = |sum_n c_n e^{-i n theta} psi_n(X)|^2, which is the textbook
Hermite-polynomial form with the Gaussian and factorial factors absorbed
into the normalized eigenfunctions psi_n, so nothing overflows at large n.
Two-mode tomograms of pure states factor the same way; mixed two-mode states
are handled through the eigendecomposition of the density matrix, which
keeps every evaluated value exactly real and non-negative.

Integrals use composite Simpson weights on a uniform, symmetric grid; the
default half-width is an energy-based support estimate from the highest
occupied level.  Values below 1e-300 are clamped to zero so downstream
logarithms stay finite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridTooNarrow
from .fock import (
    BUFFER_LEVELS,
    SingleModeState,
    TwoModeDensityMatrix,
    TwoModeState,
    hermite_psi_matrix,
)

DEFAULT_POINTS = 2001
DEFAULT_POINTS_TWO_MODE = 1201
NORMALIZATION_GUARD = 1e-6
CLAMP = 1e-300

# theta sampling for plot-ready tomogram maps (the [0, pi] convention).
DEFAULT_THETAS = np.linspace(0.0, np.pi, 181)


@dataclass(frozen=True)
class QuadratureGrid:
    """Uniform symmetric grid with composite Simpson weights for integrals over X."""

    x: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if x.ndim != 1 or x.size < 3 or x.size % 2 == 0:
            raise ValueError("grid needs an odd number (>= 3) of points for Simpson weights")
        x = x.copy()
        w = w.copy()
        x.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, half_width: float, n_points: int = DEFAULT_POINTS) -> "QuadratureGrid":
        if n_points % 2 == 0:
            n_points += 1
        x = np.linspace(-half_width, half_width, n_points)
        h = x[1] - x[0]
        w = np.ones(n_points)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return cls(x, w * (h / 3.0))

    @property
    def half_width(self) -> float:
        return float(self.x[-1])

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Integrate along the last axis."""
        return np.asarray(values) @ self.weights

    def is_symmetric(self) -> bool:
        return bool(np.allclose(self.x, -self.x[::-1], atol=1e-12))


def support_half_width(top_level: int) -> float:
    """Energy-based estimate of the quadrature support for states up to `top_level`."""
    return float(np.sqrt(2.0 * (top_level + BUFFER_LEVELS)) + 5.0)


def default_grid(obj, n_points: int | None = None) -> QuadratureGrid:
    """Grid sized for a state or density matrix from its highest occupied level."""
    if n_points is None:
        n_points = DEFAULT_POINTS if isinstance(obj, SingleModeState) else DEFAULT_POINTS_TWO_MODE
    return QuadratureGrid.uniform(support_half_width(obj.top_occupied()), n_points)


@dataclass(frozen=True)
class Tomogram:
    """Sampled probability densities w[theta_i][x_j], one row per phase."""

    thetas: np.ndarray
    values: np.ndarray
    grid: QuadratureGrid

    def __post_init__(self):
        th = np.atleast_1d(np.asarray(self.thetas, dtype=float))
        v = np.atleast_2d(np.asarray(self.values, dtype=float))
        if v.shape != (th.size, self.grid.x.size):
            raise ValueError("values must have shape (n_theta, n_x)")
        th = th.copy()
        v = v.copy()
        th.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "thetas", th)
        object.__setattr__(self, "values", v)

    def row(self, theta: float) -> np.ndarray:
        idx = np.nonzero(np.isclose(self.thetas, theta, atol=1e-12))[0]
        if idx.size == 0:
            raise KeyError(f"theta {theta!r} not sampled in this tomogram")
        return self.values[idx[0]]

    def normalization_defect(self) -> float:
        return float(np.max(np.abs(self.grid.integrate(self.values) - 1.0)))


@dataclass(frozen=True)
class TwoModeTomogram:
    """Joint density w(X1, X2) at one phase pair (theta1, theta2)."""

    theta1: float
    theta2: float
    values: np.ndarray
    grid1: QuadratureGrid
    grid2: QuadratureGrid

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid1.x.size, self.grid2.x.size):
            raise ValueError("values must have shape (len(grid1.x), len(grid2.x))")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def normalization_defect(self) -> float:
        total = self.grid1.weights @ self.values @ self.grid2.weights
        return float(abs(total - 1.0))


def _clamped(values: np.ndarray) -> np.ndarray:
    return np.where(values < CLAMP, 0.0, values)


def tomogram_pure(state: SingleModeState, thetas, grid: QuadratureGrid | None = None) -> Tomogram:
    """Optical tomogram of a pure single-mode state at the given phases."""
    if grid is None:
        grid = default_grid(state)
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    psis = hermite_psi_matrix(state.n_cut, grid.x)
    n = np.arange(state.n_cut + 1)
    phased = np.exp(-1j * np.outer(thetas, n)) * state.amplitudes
    values = _clamped(np.abs(phased @ psis) ** 2)
    tomo = Tomogram(thetas, values, grid)
    defect = tomo.normalization_defect()
    if defect > NORMALIZATION_GUARD:
        raise GridTooNarrow(
            f"per-theta tomogram mass misses 1 by {defect:.3e} on half-width "
            f"{grid.half_width:.2f}; enlarge the grid"
        )
    return tomo


def _pure_two_mode_values(c, theta1, theta2, psis1, psis2) -> np.ndarray:
    n = np.arange(c.shape[0])
    m = np.arange(c.shape[1])
    phased = c * np.exp(-1j * theta1 * n)[:, None] * np.exp(-1j * theta2 * m)[None, :]
    amp = psis1.T @ phased @ psis2
    return np.abs(amp) ** 2


def tomogram_two_mode_pure(
    state: TwoModeState,
    theta1: float,
    theta2: float,
    grid1: QuadratureGrid | None = None,
    grid2: QuadratureGrid | None = None,
) -> TwoModeTomogram:
    """Joint tomogram of a pure two-mode state at one phase pair."""
    if grid1 is None:
        grid1 = default_grid(state)
    if grid2 is None:
        grid2 = grid1
    psis1 = hermite_psi_matrix(state.n_cut, grid1.x)
    psis2 = psis1 if grid2 is grid1 else hermite_psi_matrix(state.n_cut, grid2.x)
    values = _clamped(_pure_two_mode_values(state.amplitudes, theta1, theta2, psis1, psis2))
    tomo = TwoModeTomogram(theta1, theta2, values, grid1, grid2)
    defect = tomo.normalization_defect()
    if defect > NORMALIZATION_GUARD:
        raise GridTooNarrow(f"two-mode tomogram mass misses 1 by {defect:.3e}; enlarge the grids")
    return tomo


def density_eigenmodes(rho: TwoModeDensityMatrix, floor: float = 1e-14):
    """Spectral decomposition of rho as (weights, list of c_{nm} matrices).

    Eigenvalues below `floor` (relative to the largest) are dropped; small
    negative eigenvalues from rounding are rejected if they exceed 1e-10.
    """
    mat = rho.as_matrix()
    vals, vecs = np.linalg.eigh(mat)
    if vals.min() < -1e-10:
        raise ValueError(f"density matrix has negative eigenvalue {vals.min():.3e}")
    keep = vals > floor * max(vals.max(), 1.0)
    d = rho.dim
    modes = [vecs[:, i].reshape(d, d) for i in np.nonzero(keep)[0]]
    return vals[keep], modes


def tomogram_mixed(
    rho: TwoModeDensityMatrix,
    theta1: float,
    theta2: float,
    grid1: QuadratureGrid | None = None,
    grid2: QuadratureGrid | None = None,
    eigenmodes=None,
) -> TwoModeTomogram:
    """Joint tomogram of a mixed two-mode state.

    Summing |amplitude|^2 over the eigenmodes of rho keeps the result real
    and non-negative by construction.  Pass `eigenmodes` (from
    density_eigenmodes) to reuse the decomposition across phase pairs.
    """
    if grid1 is None:
        grid1 = default_grid(rho)
    if grid2 is None:
        grid2 = grid1
    if eigenmodes is None:
        eigenmodes = density_eigenmodes(rho)
    weights, modes = eigenmodes
    psis1 = hermite_psi_matrix(rho.n_cut, grid1.x)
    psis2 = psis1 if grid2 is grid1 else hermite_psi_matrix(rho.n_cut, grid2.x)
    values = np.zeros((grid1.x.size, grid2.x.size))
    for w, c in zip(weights, modes):
        values += w * _pure_two_mode_values(c, theta1, theta2, psis1, psis2)
    tomo = TwoModeTomogram(theta1, theta2, _clamped(values), grid1, grid2)
    defect = tomo.normalization_defect()
    if defect > NORMALIZATION_GUARD:
        raise GridTooNarrow(f"mixed tomogram mass misses 1 by {defect:.3e}; enlarge the grids")
    return tomo


def tomogram_joint(obj, theta1, theta2, grid1=None, grid2=None, eigenmodes=None) -> TwoModeTomogram:
    """Dispatch to the pure or mixed two-mode evaluation."""
    if isinstance(obj, TwoModeState):
        return tomogram_two_mode_pure(obj, theta1, theta2, grid1, grid2)
    return tomogram_mixed(obj, theta1, theta2, grid1, grid2, eigenmodes)


def marginal(tomo: TwoModeTomogram, keep: str = "a") -> Tomogram:
    """Integrate one mode out of a joint tomogram.

    Returns the kept mode's distribution as a one-row Tomogram at its phase.
    The result is independent of the integrated-out phase; tests verify that
    by recomputation at a second value.
    """
    if keep == "a":
        vals = tomo.values @ tomo.grid2.weights
        return Tomogram([tomo.theta1], vals[None, :], tomo.grid1)
    if keep == "b":
        vals = tomo.grid1.weights @ tomo.values
        return Tomogram([tomo.theta2], vals[None, :], tomo.grid2)
    raise ValueError("keep must be 'a' or 'b'")


@dataclass(frozen=True)
class PiShiftReport:
    pairs_checked: int
    max_deviation: float


def check_pi_shift(tomo: Tomogram) -> PiShiftReport:
    """Verify w(X, theta + pi) = w(-X, theta) on an X-symmetric grid."""
    if not tomo.grid.is_symmetric():
        raise ValueError("pi-shift check requires an X-symmetric grid")
    worst = 0.0
    pairs = 0
    for i, th in enumerate(tomo.thetas):
        match = np.nonzero(np.isclose(tomo.thetas, th + np.pi, atol=1e-10))[0]
        if match.size == 0:
            continue
        pairs += 1
        shifted = tomo.values[match[0]]
        mirrored = tomo.values[i][::-1]
        worst = max(worst, float(np.max(np.abs(shifted - mirrored))))
    if pairs == 0:
        raise ValueError("tomogram holds no (theta, theta + pi) pairs to compare")
    return PiShiftReport(pairs, worst)


def tomogram_to_csv(tomo: Tomogram, path, comment: str | None = None) -> None:
    """Write a tomogram as CSV: first column X, one column per theta."""
    with open(path, "w", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        headers = ",".join(f"theta={th:.17g}" for th in tomo.thetas)
        fh.write(f"X,{headers}\n")
        for j, x in enumerate(tomo.grid.x):
            row = ",".join(f"{tomo.values[i, j]:.17g}" for i in range(tomo.thetas.size))
            fh.write(f"{x:.17g},{row}\n")


def two_mode_tomogram_to_csv(tomo: TwoModeTomogram, path, comment: str | None = None) -> None:
    """Write one (theta1, theta2) slice as CSV: first column X1, one column per X2."""
    with open(path, "w", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write(f"# theta1={tomo.theta1:.17g}, theta2={tomo.theta2:.17g}\n")
        headers = ",".join(f"X2={x:.17g}" for x in tomo.grid2.x)
        fh.write(f"X1,{headers}\n")
        for j, x in enumerate(tomo.grid1.x):
            row = ",".join(f"{v:.17g}" for v in tomo.values[j])
            fh.write(f"{x:.17g},{row}\n")
