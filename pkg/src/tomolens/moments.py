"""Normal-ordered moments <a^dag^k a^l> from tomograms, with a Fock-space oracle.

The tomogram route samples k+l+1 phases theta_m = m pi/(k+l+1), integrates
each distribution against the Hermite polynomial H_{k+l}, applies the
roots-of-unity phase weights exp(-i(k-l) m pi/(k+l+1)) and the combinatorial
constant C_kl = k! l! / ((k+l+1)! sqrt(2^{k+l})).  The two-mode extraction is
the double sum over independent phase sets for each mode; it reduces to the
single-mode formula when one mode's indices vanish and is validated against
the oracle for every catalog state before any other module relies on it.

The oracle route applies ladder operators directly in the truncated basis:
<a^dag^k a^l> = <a^k psi | a^l psi> for pure states and Tr(a^dag^k a^l rho)
for density matrices, touching only annihilation so nothing spills the
truncation buffer.

H_n inside the integrals is evaluated through the normalized eigenfunctions
with explicit exponent bookkeeping in log space: H_n(X) = psi_n(X)
exp(X^2/2) pi^(1/4) sqrt(2^n n!), safe because the tomogram supplies the
compensating exp(-X^2) factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import MissingOrder, OrderTooHigh
from .fock import (
    SingleModeState,
    TwoModeDensityMatrix,
    TwoModeState,
    annihilation_matrix,
    apply_annihilation,
    hermite_psi_matrix,
    inner,
)
from .tomography import (
    QuadratureGrid,
    default_grid,
    density_eigenmodes,
    marginal,
    tomogram_joint,
    tomogram_pure,
)

K_MAX_DEFAULT = 6

SOURCE_TOMOGRAM = "tomogram"
SOURCE_FOCK_ORACLE = "fock-oracle"


def extraction_constant(k: int, l: int) -> float:
    """C_kl = k! l! / ((k+l+1)! sqrt(2^{k+l}))."""
    return float(
        np.exp(gammaln(k + 1.0) + gammaln(l + 1.0) - gammaln(k + l + 2.0) - 0.5 * (k + l) * np.log(2.0))
    )


def extraction_phases(order: int, n_phases: int | None = None) -> np.ndarray:
    """The order+1 tomogram phases m pi/(order+1), m = 0..order."""
    count = order + 1 if n_phases is None else n_phases
    return np.arange(count) * np.pi / count


def hermite_weighted_integral(omega_row: np.ndarray, order: int, grid: QuadratureGrid) -> float:
    """integral of w(X) H_order(X) dX, assembled in log space.

    w carries exp(-X^2), so w * H_order is tame even where H_order alone
    would overflow; the product is formed as exp(ln w + ln|psi_order| +
    X^2/2 + ln(pi^(1/4) sqrt(2^order order!))) with the sign of psi.
    """
    psi_vals = hermite_psi_matrix(order, grid.x)[order]
    log_const = 0.25 * np.log(np.pi) + 0.5 * (order * np.log(2.0) + gammaln(order + 1.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        log_term = (
            np.log(np.where(omega_row > 0.0, omega_row, 1.0))
            + np.log(np.abs(np.where(psi_vals != 0.0, psi_vals, 1.0)))
            + 0.5 * grid.x**2
            + log_const
        )
        integrand = np.where(
            (omega_row > 0.0) & (psi_vals != 0.0), np.sign(psi_vals) * np.exp(log_term), 0.0
        )
    return float(grid.integrate(integrand))


def _check_order(k: int, l: int, k_max: int) -> None:
    if k < 0 or l < 0:
        raise ValueError("moment indices must be non-negative")
    if k + l > k_max:
        raise OrderTooHigh(f"moment order {k + l} exceeds K_max = {k_max}")


def _single_mode_rows(obj, phases, grid, mode):
    """Tomogram rows at the given phases for a state or a reduced mode."""
    if isinstance(obj, SingleModeState):
        if grid is None:
            grid = default_grid(obj)
        return tomogram_pure(obj, phases, grid).values, grid
    if mode not in ("a", "b"):
        raise ValueError("two-mode input needs mode='a' or mode='b'")
    if grid is None:
        grid = default_grid(obj)
    eigen = density_eigenmodes(obj) if isinstance(obj, TwoModeDensityMatrix) else None
    rows = []
    for th in phases:
        pair = (th, 0.0) if mode == "a" else (0.0, th)
        joint = tomogram_joint(obj, pair[0], pair[1], grid, grid, eigenmodes=eigen)
        rows.append(marginal(joint, mode).values[0])
    return np.asarray(rows), grid


def extract_moment(
    obj,
    k: int,
    l: int,
    grid: QuadratureGrid | None = None,
    mode: str | None = None,
    k_max: int = K_MAX_DEFAULT,
    _n_phases: int | None = None,
) -> complex:
    """<a^dag^k a^l> recovered from tomograms alone.

    `obj` is a SingleModeState, or a two-mode state / density matrix with
    `mode` selecting the reduced mode.  `_n_phases` deliberately breaks the
    phase count for the documented negative test; leave it at None.
    """
    _check_order(k, l, k_max)
    order = k + l
    phases = extraction_phases(order, _n_phases)
    rows, grid = _single_mode_rows(obj, phases, grid, mode)
    integrals = np.array([hermite_weighted_integral(row, order, grid) for row in rows])
    weights = np.exp(-1j * (k - l) * phases)
    return complex(extraction_constant(k, l) * np.sum(weights * integrals))


def oracle_moment(obj, k: int, l: int, mode: str | None = None, k_max: int = K_MAX_DEFAULT) -> complex:
    """<a^dag^k a^l> by direct ladder action in the Fock basis."""
    _check_order(k, l, k_max)
    if isinstance(obj, SingleModeState):
        bra = obj
        for _ in range(k):
            bra = apply_annihilation(bra)
        ket = obj
        for _ in range(l):
            ket = apply_annihilation(ket)
        return inner(bra, ket)
    if mode == "a":
        return oracle_moment_two_mode(obj, k, l, 0, 0)
    if mode == "b":
        return oracle_moment_two_mode(obj, 0, 0, k, l)
    raise ValueError("two-mode input needs mode='a' or mode='b'")


def _annihilate_two_mode(c: np.ndarray, times_a: int, times_b: int) -> np.ndarray:
    out = c
    for _ in range(times_a):
        nxt = np.zeros_like(out)
        nxt[:-1, :] = np.sqrt(np.arange(1.0, out.shape[0]))[:, None] * out[1:, :]
        out = nxt
    for _ in range(times_b):
        nxt = np.zeros_like(out)
        nxt[:, :-1] = np.sqrt(np.arange(1.0, out.shape[1]))[None, :] * out[:, 1:]
        out = nxt
    return out


def oracle_moment_two_mode(obj, k: int, l: int, p: int, q: int, k_max: int = K_MAX_DEFAULT) -> complex:
    """<a^dag^k a^l b^dag^p b^q> by ladder action (pure) or trace (mixed)."""
    _check_order(k, l, k_max)
    _check_order(p, q, k_max)
    if isinstance(obj, TwoModeState):
        bra = _annihilate_two_mode(obj.amplitudes, k, p)
        ket = _annihilate_two_mode(obj.amplitudes, l, q)
        return complex(np.vdot(bra, ket))
    dim = obj.dim
    a = annihilation_matrix(dim)
    op_a = np.linalg.matrix_power(a.T, k) @ np.linalg.matrix_power(a, l)
    op_b = np.linalg.matrix_power(a.T, p) @ np.linalg.matrix_power(a, q)
    # Tr((O_a x O_b) rho) against the (n, n', m, m') index layout.
    return complex(np.einsum("ab,cd,badc->", op_a, op_b, obj.entries))


def extract_moment_two_mode(
    obj,
    k: int,
    l: int,
    p: int,
    q: int,
    grid1: QuadratureGrid | None = None,
    grid2: QuadratureGrid | None = None,
    k_max: int = K_MAX_DEFAULT,
    _tomogram_cache: dict | None = None,
    _eigenmodes=None,
) -> complex:
    """Two-mode tomogram extraction: the double roots-of-unity sum."""
    _check_order(k, l, k_max)
    _check_order(p, q, k_max)
    if grid1 is None:
        grid1 = default_grid(obj)
    if grid2 is None:
        grid2 = grid1
    order1, order2 = k + l, p + q
    phases1 = extraction_phases(order1)
    phases2 = extraction_phases(order2)
    if _eigenmodes is None and isinstance(obj, TwoModeDensityMatrix):
        _eigenmodes = density_eigenmodes(obj)
    psi1 = hermite_psi_matrix(order1, grid1.x)[order1]
    psi2 = hermite_psi_matrix(order2, grid2.x)[order2]
    logc1 = 0.25 * np.log(np.pi) + 0.5 * (order1 * np.log(2.0) + gammaln(order1 + 1.0))
    logc2 = 0.25 * np.log(np.pi) + 0.5 * (order2 * np.log(2.0) + gammaln(order2 + 1.0))
    total = 0.0 + 0.0j
    for m1, th1 in enumerate(phases1):
        for m2, th2 in enumerate(phases2):
            key = (round(th1, 15), round(th2, 15))
            if _tomogram_cache is not None and key in _tomogram_cache:
                joint = _tomogram_cache[key]
            else:
                joint = tomogram_joint(obj, th1, th2, grid1, grid2, eigenmodes=_eigenmodes)
                if _tomogram_cache is not None:
                    _tomogram_cache[key] = joint
            with np.errstate(divide="ignore", invalid="ignore"):
                w = joint.values
                log_term = (
                    np.log(np.where(w > 0.0, w, 1.0))
                    + np.log(np.abs(np.where(psi1 != 0.0, psi1, 1.0)))[:, None]
                    + np.log(np.abs(np.where(psi2 != 0.0, psi2, 1.0)))[None, :]
                    + 0.5 * grid1.x[:, None] ** 2
                    + 0.5 * grid2.x[None, :] ** 2
                    + logc1
                    + logc2
                )
                sign = np.sign(psi1)[:, None] * np.sign(psi2)[None, :]
                integrand = np.where((w > 0.0) & (sign != 0.0), sign * np.exp(log_term), 0.0)
            integral = grid1.weights @ integrand @ grid2.weights
            total += (
                np.exp(-1j * (k - l) * th1) * np.exp(-1j * (p - q) * th2) * integral
            )
    return complex(extraction_constant(k, l) * extraction_constant(p, q) * total)


@dataclass(frozen=True)
class MomentTable:
    """Map (k, l) -> <a^dag^k a^l> with provenance."""

    entries: dict
    max_order: int
    source: str

    def get(self, k: int, l: int) -> complex:
        try:
            return self.entries[(k, l)]
        except KeyError:
            raise MissingOrder(f"moment ({k}, {l}) not present (max order {self.max_order})")

    def hermiticity_defect(self) -> float:
        worst = 0.0
        for (k, l), val in self.entries.items():
            worst = max(worst, abs(val - np.conj(self.entries[(l, k)])))
        return worst

    def validate(self) -> "MomentTable":
        if abs(self.entries[(0, 0)] - 1.0) > 1e-9:
            raise ValueError(f"(0,0) entry {self.entries[(0, 0)]!r} differs from 1")
        defect = self.hermiticity_defect()
        if defect > 1e-8:
            raise ValueError(f"moment table breaks hermiticity by {defect:.3e}")
        return self


@dataclass(frozen=True)
class TwoModeMomentTable:
    """Map (k, l, p, q) -> <a^dag^k a^l b^dag^p b^q> with provenance."""

    entries: dict
    max_order: int
    source: str

    def get(self, k: int, l: int, p: int, q: int) -> complex:
        try:
            return self.entries[(k, l, p, q)]
        except KeyError:
            raise MissingOrder(f"moment ({k},{l},{p},{q}) not present (max order {self.max_order})")

    def hermiticity_defect(self) -> float:
        worst = 0.0
        for (k, l, p, q), val in self.entries.items():
            worst = max(worst, abs(val - np.conj(self.entries[(l, k, q, p)])))
        return worst

    def validate(self) -> "TwoModeMomentTable":
        if abs(self.entries[(0, 0, 0, 0)] - 1.0) > 1e-9:
            raise ValueError("(0,0,0,0) entry differs from 1")
        defect = self.hermiticity_defect()
        if defect > 1e-8:
            raise ValueError(f"moment table breaks hermiticity by {defect:.3e}")
        return self


def moment_table(
    obj,
    max_order: int = 4,
    grid: QuadratureGrid | None = None,
    mode: str | None = None,
    source: str = SOURCE_TOMOGRAM,
    k_max: int = K_MAX_DEFAULT,
) -> MomentTable:
    """All <a^dag^k a^l> with k + l <= max_order from one tomogram family.

    Phase integrals are shared across every (k, l) with the same k + l.
    """
    if max_order > k_max:
        raise OrderTooHigh(f"max_order {max_order} exceeds K_max = {k_max}")
    entries = {}
    if source == SOURCE_FOCK_ORACLE:
        for k in range(max_order + 1):
            for l in range(max_order + 1 - k):
                entries[(k, l)] = oracle_moment(obj, k, l, mode=mode)
        return MomentTable(entries, max_order, source)
    if grid is None:
        grid = default_grid(obj)
    for order in range(max_order + 1):
        phases = extraction_phases(order)
        rows, grid = _single_mode_rows(obj, phases, grid, mode)
        integrals = np.array([hermite_weighted_integral(row, order, grid) for row in rows])
        for k in range(order + 1):
            l = order - k
            weights = np.exp(-1j * (k - l) * phases)
            entries[(k, l)] = complex(extraction_constant(k, l) * np.sum(weights * integrals))
    return MomentTable(entries, max_order, source)


def two_mode_moment_table(
    obj,
    max_order_each: int = 2,
    grid1: QuadratureGrid | None = None,
    grid2: QuadratureGrid | None = None,
    source: str = SOURCE_TOMOGRAM,
    k_max: int = K_MAX_DEFAULT,
) -> TwoModeMomentTable:
    """All <a^dag^k a^l b^dag^p b^q> with k+l and p+q each <= max_order_each."""
    if max_order_each > k_max:
        raise OrderTooHigh(f"max_order {max_order_each} exceeds K_max = {k_max}")
    indices = [
        (k, l, p, q)
        for k in range(max_order_each + 1)
        for l in range(max_order_each + 1 - k)
        for p in range(max_order_each + 1)
        for q in range(max_order_each + 1 - p)
    ]
    entries = {}
    if source == SOURCE_FOCK_ORACLE:
        for idx in indices:
            entries[idx] = oracle_moment_two_mode(obj, *idx)
        return TwoModeMomentTable(entries, max_order_each, source)
    if grid1 is None:
        grid1 = default_grid(obj)
    if grid2 is None:
        grid2 = grid1
    cache: dict = {}
    eigen = density_eigenmodes(obj) if isinstance(obj, TwoModeDensityMatrix) else None
    # The integrals depend on (k+l, p+q, m1, m2) only; share them across
    # every index with the same order pair.
    integral_sets: dict = {}
    for s1 in range(max_order_each + 1):
        for s2 in range(max_order_each + 1):
            integral_sets[(s1, s2)] = _two_mode_integrals(
                obj, s1, s2, grid1, grid2, cache, eigen
            )
    for k, l, p, q in indices:
        s1, s2 = k + l, p + q
        ints = integral_sets[(s1, s2)]
        w1 = np.exp(-1j * (k - l) * extraction_phases(s1))
        w2 = np.exp(-1j * (p - q) * extraction_phases(s2))
        entries[(k, l, p, q)] = complex(
            extraction_constant(k, l) * extraction_constant(p, q) * (w1 @ ints @ w2)
        )
    return TwoModeMomentTable(entries, max_order_each, source)


def _two_mode_integrals(obj, order1, order2, grid1, grid2, cache, eigenmodes):
    """Matrix of double integrals of w * H_order1(X1) H_order2(X2) over the phase sets."""
    phases1 = extraction_phases(order1)
    phases2 = extraction_phases(order2)
    psi1 = hermite_psi_matrix(order1, grid1.x)[order1]
    psi2 = hermite_psi_matrix(order2, grid2.x)[order2]
    logc = (
        0.5 * np.log(np.pi)
        + 0.5 * (order1 * np.log(2.0) + gammaln(order1 + 1.0))
        + 0.5 * (order2 * np.log(2.0) + gammaln(order2 + 1.0))
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        log_h = (
            np.log(np.abs(np.where(psi1 != 0.0, psi1, 1.0)))[:, None]
            + np.log(np.abs(np.where(psi2 != 0.0, psi2, 1.0)))[None, :]
            + 0.5 * grid1.x[:, None] ** 2
            + 0.5 * grid2.x[None, :] ** 2
            + logc
        )
    sign = np.sign(psi1)[:, None] * np.sign(psi2)[None, :]
    out = np.empty((phases1.size, phases2.size))
    for m1, th1 in enumerate(phases1):
        for m2, th2 in enumerate(phases2):
            key = (round(th1, 15), round(th2, 15))
            if key in cache:
                joint = cache[key]
            else:
                joint = tomogram_joint(obj, th1, th2, grid1, grid2, eigenmodes=eigenmodes)
                cache[key] = joint
            with np.errstate(divide="ignore", invalid="ignore"):
                w = joint.values
                integrand = np.where(
                    (w > 0.0) & (sign != 0.0),
                    sign * np.exp(np.log(np.where(w > 0.0, w, 1.0)) + log_h),
                    0.0,
                )
            out[m1, m2] = grid1.weights @ integrand @ grid2.weights
    return out


def moment_table_to_csv(table, path, comment: str | None = None) -> None:
    """CSV rows (indices..., Re, Im, source) for either table flavour."""
    two_mode = isinstance(table, TwoModeMomentTable)
    with open(path, "w", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write(("k,l,p,q" if two_mode else "k,l") + ",re,im,source\n")
        for idx in sorted(table.entries):
            val = table.entries[idx]
            head = ",".join(str(i) for i in idx)
            fh.write(f"{head},{val.real:.17g},{val.imag:.17g},{table.source}\n")
