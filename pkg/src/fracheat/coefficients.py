"""Deterministic small-time expansion coefficients and their cross-checks.

The heat content admits Q(t) = -t C_1 + sum_{l=2}^{N} (-t)^l C_l + O(t^{N+1})
with C_1 = int V and, for l >= 2,

    C_l = sum_{n + k = l, k >= 2} (1/n!) C_{n,k},

    C_{n,k} = sum_{|l| = n} A(n, l) *
        (2 pi)^{-d(k-1)} int vhat(-sum th_i) prod vhat(th_i)
                             prod_i |th_1 + ... + th_i|^{alpha l_i} dth.

Every C_{n,k} needed for l <= 5 also has a closed route in terms of mixture
integrals, the Dirichlet form E_alpha and powers of F = (-Delta)^{alpha/2}:

    C_2 = (1/2) int V^2
    C_3 = (1/6) (int V^3 + E_alpha(V))
    C_4 = (1/24) (int V^4 + 2 int V^2 FV + int |FV|^2)
    C_5 = (1/120) (int V^5 + 2 int V^3 FV + 2 int V^2 F^2 V
                   + int V |FV|^2 + E_alpha(FV) + E_alpha(V^2))

plus sum-of-squares forms of C_4 and C_5 that make nonnegativity for V >= 0
manifest.  Routes are independent enough that their agreement is a real
check, while shared lattice objects are reused so the agreement tolerances
hold far below the individual truncation errors.
"""

from __future__ import annotations

import functools
import hashlib
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .potentials import GaussianMixturePotential
from .simplex import enumerate_compositions, weight_A
from .spectral import (
    GridField,
    SpectralGrid,
    apply_fractional_laplacian,
    dirichlet_form,
    forward_transform,
    grid_integral,
    kink_correction,
    sample_on_grid,
    symbol_array,
    weighted_freq_sum,
)

__all__ = [
    "RouteUnavailable",
    "cnk_closed",
    "CoefficientEntry",
    "CoefficientTable",
    "c0k",
    "cnk_fourier",
    "c3_closed",
    "c4_closed",
    "c4_sos",
    "c5_closed",
    "c5_sos",
    "c_ell",
    "partial_sum",
    "t2_exact",
    "t2_kernel",
    "coefficient_table",
]

_IMAG_TOL = 1e-9


class RouteUnavailable(ValueError):
    """Requested coefficient route is outside the supported set."""


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (0, 2], got {alpha}")


# -- exact pieces ---------------------------------------------------------


def c0k(v: GaussianMixturePotential, k: int) -> float:
    """C_{0,k} = (1/k!) int V^k, exact through the mixture algebra."""
    if k < 2:
        raise ValueError("c0k requires k >= 2")
    if v.is_zero:
        return 0.0
    return v.power(k).integral() / math.factorial(k)


# -- shared lattice objects ------------------------------------------------


@functools.lru_cache(maxsize=None)
def _spec_density(v: GaussianMixturePotential, grid: SpectralGrid) -> np.ndarray:
    """|vhat|^2 on the frequency lattice from the discrete transform."""
    spec = forward_transform(sample_on_grid(v, grid))
    return np.abs(spec.values) ** 2


def _smooth_density(v: GaussianMixturePotential):
    return lambda x: float(np.abs(v.fourier(x)) ** 2)


@functools.lru_cache(maxsize=None)
def _f_power_field(
    v: GaussianMixturePotential, grid: SpectralGrid, alpha: float, power: int
) -> GridField:
    return apply_fractional_laplacian(v, grid, alpha, power)


# -- Fourier-lattice route -------------------------------------------------


def _abs_pow(arr: np.ndarray, p: float) -> np.ndarray:
    """|arr|^p with the convention |0|^0 = 1, |0|^p = 0 for p > 0."""
    mag = np.abs(arr)
    if p == 0.0:
        return np.ones_like(mag)
    out = np.where(mag > 0.0, mag, 1.0) ** p
    out[mag == 0.0] = 0.0
    return out


def cnk_fourier(
    v: GaussianMixturePotential, grid: SpectralGrid, alpha: float, n: int, k: int
) -> float:
    """C_{n,k} through frequency-lattice quadrature.

    Supported: k = 2 (any n <= 6, any grid dimension with d <= 2), k = 3
    (n <= 6, d = 1 only, since the sum lives on a d(k-1)-dimensional
    lattice), n = 0 for any k (analytic), and (n, k) = (1, 4) via the closed
    identity C_{1,4} = (1/5!)(2 int V^3 FV + E_alpha(V^2)).  Anything else
    raises RouteUnavailable.
    """
    _check_alpha(alpha)
    if n < 0 or k < 2:
        raise ValueError(f"need n >= 0 and k >= 2, got (n, k) = ({n}, {k})")
    if n == 0:
        return c0k(v, k)
    if (n, k) == (1, 4):
        return c14_closed(v, grid, alpha)
    if k not in (2, 3) or n > 6 or grid.dimension * (k - 1) > 2:
        raise RouteUnavailable(
            "cnk_fourier supports k = 2 with n <= 6 (d = 1 or 2), k = 3 with "
            f"n <= 6 (d = 1), n = 0 for any k, and (n, k) = (1, 4); "
            f"got (n, k) = ({n}, {k}) in d = {grid.dimension}"
        )
    if v.is_zero:
        return 0.0
    if k == 2:
        weight = float(weight_A(n, (n,)))
        dens = _spec_density(v, grid)
        smooth = _smooth_density(v) if grid.dimension == 1 else None
        return weight * weighted_freq_sum(grid, dens, alpha * n, smooth_at=smooth)
    # k == 3, d == 1: two-dimensional lattice sum with analytic vhat.
    xi = grid.axis_freqs()
    f1 = v.fourier(xi)
    s12 = xi[:, np.newaxis] + xi[np.newaxis, :]
    f12 = v.fourier(-s12)
    base = f12 * f1[:, np.newaxis] * f1[np.newaxis, :]
    total = 0.0 + 0.0j
    for ell in enumerate_compositions(n, 2):
        w = _abs_pow(xi, alpha * ell[0])[:, np.newaxis] * _abs_pow(s12, alpha * ell[1])
        total += float(weight_A(n, ell)) * (base * w).sum()
    total *= (grid.freq_spacing / (2.0 * math.pi)) ** 2
    if abs(total.imag) > _IMAG_TOL * (1.0 + abs(total.real)):
        raise FloatingPointError(f"imaginary residual {total.imag:.3e} in cnk_fourier({n},{k})")
    return float(total.real)


# -- closed routes ----------------------------------------------------------


def cnk_closed(
    v: GaussianMixturePotential, grid: SpectralGrid, alpha: float, n: int, k: int
) -> float:
    """Closed (operator/spatial) route for the individually supported C_{n,k}.

    C_{n,2} = A(n,(n)) int F^{n/?}... concretely: C_{1,2} = (1/6) E_alpha(V),
    C_{2,2} = (1/12) int (FV)^2, C_{3,2} = (1/20) int FV F^2V,
    C_{1,3} = (1/12) int V^2 FV, C_{2,3} = (1/60)(2 int V^2 F^2V + int V (FV)^2),
    C_{1,4} = (1/5!)(2 int V^3 FV + E_alpha(V^2)), C_{0,k} = (1/k!) int V^k.
    Quadratic-in-V pieces carry the kink correction so this route matches the
    continuum like the corrected frequency route does.
    """
    _check_alpha(alpha)
    if n == 0:
        return c0k(v, k)
    if v.is_zero:
        return 0.0
    smooth = _smooth_density(v) if grid.dimension == 1 else None
    if (n, k) == (1, 2):
        return dirichlet_form(v, grid, alpha) / 6.0
    if (n, k) == (2, 2):
        fv = _f_power_field(v, grid, alpha, 1)
        out = grid_integral(GridField(grid, "physical", fv.values**2))
        if smooth is not None:
            out += kink_correction(grid, 2.0 * alpha, smooth)
        return out / 12.0
    if (n, k) == (3, 2):
        fv = _f_power_field(v, grid, alpha, 1)
        f2v = _f_power_field(v, grid, alpha, 2)
        out = grid_integral(GridField(grid, "physical", fv.values * f2v.values))
        if smooth is not None:
            out += kink_correction(grid, 3.0 * alpha, smooth)
        return out / 20.0
    if (n, k) == (1, 3):
        v2 = sample_on_grid(v.power(2), grid)
        fv = _f_power_field(v, grid, alpha, 1)
        return grid_integral(GridField(grid, "physical", v2.values * fv.values)) / 12.0
    if (n, k) == (2, 3):
        v1 = sample_on_grid(v, grid)
        v2 = sample_on_grid(v.power(2), grid)
        fv = _f_power_field(v, grid, alpha, 1)
        f2v = _f_power_field(v, grid, alpha, 2)
        cross = grid_integral(GridField(grid, "physical", v2.values * f2v.values))
        vfv2 = grid_integral(GridField(grid, "physical", v1.values * fv.values**2))
        return (2.0 * cross + vfv2) / 60.0
    if (n, k) == (1, 4):
        return c14_closed(v, grid, alpha)
    raise RouteUnavailable(
        "cnk_closed supports (n, k) in {(1,2), (2,2), (3,2), (1,3), (2,3), (1,4)} "
        f"and n = 0 for any k; got ({n}, {k})"
    )


def c3_closed(v: GaussianMixturePotential, grid: SpectralGrid, alpha: float) -> float:
    """C_3 = (1/6)(int V^3 + E_alpha(V))."""
    _check_alpha(alpha)
    if v.is_zero:
        return 0.0
    return (v.power(3).integral() + dirichlet_form(v, grid, alpha)) / 6.0


def _c4_pieces(v: GaussianMixturePotential, grid: SpectralGrid, alpha: float):
    v2 = sample_on_grid(v.power(2), grid)
    fv = _f_power_field(v, grid, alpha, 1)
    return v2, fv


def c4_closed(v: GaussianMixturePotential, grid: SpectralGrid, alpha: float) -> float:
    """C_4 = (1/24)(int V^4 + 2 int V^2 FV + int |FV|^2).

    int |FV|^2 is evaluated in frequency space with the kink correction;
    the spatial cross term stays on the physical grid.
    """
    _check_alpha(alpha)
    if v.is_zero:
        return 0.0
    v2, fv = _c4_pieces(v, grid, alpha)
    cross = grid_integral(GridField(grid, "physical", v2.values * fv.values))
    smooth = _smooth_density(v) if grid.dimension == 1 else None
    fv_sq = weighted_freq_sum(grid, _spec_density(v, grid), 2.0 * alpha, smooth_at=smooth)
    return (v.power(4).integral() + 2.0 * cross + fv_sq) / 24.0


def c4_sos(v: GaussianMixturePotential, grid: SpectralGrid, alpha: float) -> float:
    """C_4 = (1/24) int (V^2 + FV)^2, nonnegative by inspection.

    The same kink correction as in c4_closed is added for the int |FV|^2
    content of the square, so both routes carry identical lattice error.
    """
    _check_alpha(alpha)
    if v.is_zero:
        return 0.0
    v2, fv = _c4_pieces(v, grid, alpha)
    square = grid_integral(GridField(grid, "physical", (v2.values + fv.values) ** 2))
    if grid.dimension == 1:
        square += kink_correction(grid, 2.0 * alpha, _smooth_density(v))
    return square / 24.0


def c14_closed(v: GaussianMixturePotential, grid: SpectralGrid, alpha: float) -> float:
    """C_{1,4} = (1/5!)(2 int V^3 FV + E_alpha(V^2))."""
    _check_alpha(alpha)
    if v.is_zero:
        return 0.0
    v3 = sample_on_grid(v.power(3), grid)
    fv = _f_power_field(v, grid, alpha, 1)
    cross = grid_integral(GridField(grid, "physical", v3.values * fv.values))
    return (2.0 * cross + dirichlet_form(v.power(2), grid, alpha)) / 120.0


def c5_closed(v: GaussianMixturePotential, grid: SpectralGrid, alpha: float) -> float:
    """C_5 = (1/120)(int V^5 + 2 int V^3 FV + 2 int V^2 F^2 V
    + int V (FV)^2 + E_alpha(FV) + E_alpha(V^2)).

    E_alpha(FV) = (2 pi)^{-d} int |xi|^{3 alpha} |vhat|^2 and E_alpha(V^2)
    use corrected frequency sums; the three cross terms stay on the
    physical grid.
    """
    _check_alpha(alpha)
    if v.is_zero:
        return 0.0
    vf = sample_on_grid(v, grid)
    v2 = sample_on_grid(v.power(2), grid)
    v3 = sample_on_grid(v.power(3), grid)
    fv = _f_power_field(v, grid, alpha, 1)
    f2v = _f_power_field(v, grid, alpha, 2)
    cross3 = grid_integral(GridField(grid, "physical", v3.values * fv.values))
    cross2 = grid_integral(GridField(grid, "physical", v2.values * f2v.values))
    vfv2 = grid_integral(GridField(grid, "physical", vf.values * fv.values**2))
    smooth = _smooth_density(v) if grid.dimension == 1 else None
    e_fv = weighted_freq_sum(grid, _spec_density(v, grid), 3.0 * alpha, smooth_at=smooth)
    e_v2 = dirichlet_form(v.power(2), grid, alpha)
    return (v.power(5).integral() + 2.0 * cross3 + 2.0 * cross2 + vfv2 + e_fv + e_v2) / 120.0


def c5_sos(v: GaussianMixturePotential, grid: SpectralGrid, alpha: float) -> float:
    """C_5 = (1/120)[int V (V^2 + FV)^2
    + (2 pi)^{-d} int | |xi|^alpha vhat + (V^2)hat |^2 |xi|^alpha dxi],
    manifestly nonnegative for V >= 0.

    The frequency square expands into pieces with kinks |xi|^{3 alpha} and
    |xi|^alpha plus a smooth-matched cross term; corrections for the two
    square pieces mirror those inside c5_closed exactly.
    """
    _check_alpha(alpha)
    if v.is_zero:
        return 0.0
    vf = sample_on_grid(v, grid)
    v2 = sample_on_grid(v.power(2), grid)
    fv = _f_power_field(v, grid, alpha, 1)
    spatial = grid_integral(GridField(grid, "physical", vf.values * (v2.values + fv.values) ** 2))
    w = v.power(2)
    vhat = forward_transform(sample_on_grid(v, grid)).values
    what = forward_transform(v2).values
    sym = symbol_array(grid, alpha)
    dens = np.abs(sym * vhat + what) ** 2
    freq = weighted_freq_sum(grid, dens, alpha)
    if grid.dimension == 1:
        freq += kink_correction(grid, 3.0 * alpha, _smooth_density(v))
        freq += kink_correction(grid, alpha, _smooth_density(w))
    return (spatial + freq) / 120.0


# -- assembled coefficients --------------------------------------------------


@functools.lru_cache(maxsize=None)
def c_ell(
    v: GaussianMixturePotential, grid: SpectralGrid, alpha: float, ell: int, route: str = "closed"
) -> float:
    """Order-l coefficient C_l, 1 <= l <= 5, via the chosen route.

    route 'closed' uses the mixture-integral forms; 'fourier' assembles
    C_l = sum (1/n!) C_{n,k} from cnk_fourier (d = 1 for l >= 4).
    """
    _check_alpha(alpha)
    if ell < 1:
        raise ValueError("need ell >= 1")
    if ell == 1:
        return v.integral()
    if ell > 5:
        raise RouteUnavailable(f"coefficients are implemented for ell <= 5, got {ell}")
    if route == "closed":
        if ell == 2:
            return c0k(v, 2)
        fn = {3: c3_closed, 4: c4_closed, 5: c5_closed}[ell]
        return fn(v, grid, alpha)
    if route == "fourier":
        total = 0.0
        for k in range(2, ell + 1):
            n = ell - k
            total += cnk_fourier(v, grid, alpha, n, k) / math.factorial(n)
        return total
    raise ValueError(f"unknown route {route!r}; use 'closed' or 'fourier'")


def partial_sum(
    v: GaussianMixturePotential,
    grid: SpectralGrid,
    alpha: float,
    n_terms: int,
    t: float,
    route: str = "closed",
) -> float:
    """Q_N(t) = -t C_1 + sum_{l=2}^{N} (-t)^l C_l for N = n_terms <= 5."""
    if not 1 <= n_terms <= 5:
        raise ValueError(f"n_terms must lie in 1..5, got {n_terms}")
    if t < 0:
        raise ValueError("t must be nonnegative")
    out = -t * c_ell(v, grid, alpha, 1, route)
    for ell in range(2, n_terms + 1):
        out += (-t) ** ell * c_ell(v, grid, alpha, ell, route)
    return out


# -- exact second-order profile ----------------------------------------------


def t2_kernel(u) -> np.ndarray:
    """psi(u) = (e^{-u} - 1 + u)/u^2, with the series branch below 1e-4.

    psi(0) = 1/2; psi is completely monotone decreasing toward 0.
    """
    arr = np.asarray(u, dtype=float)
    out = np.empty_like(arr)
    small = arr < 1e-4
    a_small = arr[small]
    out[small] = 0.5 - a_small / 6.0 + a_small**2 / 24.0
    a_big = arr[~small]
    out[~small] = (np.expm1(-a_big) + a_big) / a_big**2
    if np.ndim(u) == 0:
        return float(out)
    return out


def t2_exact(
    v: GaussianMixturePotential,
    alpha: float,
    t: float,
    grid: SpectralGrid | None = None,
) -> float:
    """T_2(t) = (2 pi)^{-d} int |vhat(xi)|^2 psi(t |xi|^alpha) dxi.

    The exact t^2 profile: Q(t) = -t int V + t^2 T_2(t) + R_3 with
    |R_3| <= t^3 ||V||_1 ||V||_inf^2 e^{t ||V||_inf}.  d = 1 uses adaptive
    quadrature; d >= 2 falls back to the frequency lattice.
    """
    _check_alpha(alpha)
    if t < 0:
        raise ValueError("t must be nonnegative")
    if v.is_zero:
        return 0.0
    if v.dimension == 1:
        a_max = max(v.sharpness)
        cut = math.sqrt(2.0 * a_max * 80.0)
        fn = lambda x: float(np.abs(v.fourier(x)) ** 2) * t2_kernel(t * x**alpha)
        val, _ = integrate.quad(fn, 0.0, cut, limit=300, epsabs=1e-14, epsrel=1e-12)
        return val / math.pi
    if grid is None:
        grid = SpectralGrid.default_for(v.dimension)
    dens = _spec_density(v, grid) * t2_kernel(t * grid.freq_norms() ** alpha)
    return weighted_freq_sum(grid, dens, 0.0)


# -- table assembly -----------------------------------------------------------


@dataclass(frozen=True)
class CoefficientEntry:
    value: float
    route: str
    grid: str


@dataclass(frozen=True)
class CoefficientTable:
    alpha: float
    dimension: int
    entries: dict[str, CoefficientEntry]
    provenance: str

    def value(self, label: str) -> float:
        return self.entries[label].value


def coefficient_table(
    v: GaussianMixturePotential, grid: SpectralGrid, alpha: float
) -> CoefficientTable:
    """All implemented coefficients and routes for one (V, grid, alpha)."""
    _check_alpha(alpha)
    if v.dimension != grid.dimension:
        raise ValueError("potential and grid dimensions differ")
    gdesc = grid.descriptor
    entries: dict[str, CoefficientEntry] = {}
    entries["C1"] = CoefficientEntry(v.integral(), "analytic", "exact")
    entries["C2"] = CoefficientEntry(c0k(v, 2), "analytic", "exact")
    entries["C3"] = CoefficientEntry(c3_closed(v, grid, alpha), "closed_form", gdesc)
    entries["C4"] = CoefficientEntry(c4_closed(v, grid, alpha), "closed_form", gdesc)
    entries["C5"] = CoefficientEntry(c5_closed(v, grid, alpha), "closed_form", gdesc)
    entries["C4_sos"] = CoefficientEntry(c4_sos(v, grid, alpha), "sos", gdesc)
    entries["C5_sos"] = CoefficientEntry(c5_sos(v, grid, alpha), "sos", gdesc)
    for k in range(2, 6):
        entries[f"C(0,{k})"] = CoefficientEntry(c0k(v, k), "analytic", "exact")
    pairs = [(1, 2), (2, 2), (3, 2)]
    if grid.dimension == 1:
        pairs += [(1, 3), (2, 3), (1, 4)]
    for n, k in pairs:
        if grid.dimension * (k - 1) > 2 and (n, k) != (1, 4):
            continue
        route = "closed_form" if (n, k) == (1, 4) else "fourier_grid"
        entries[f"C({n},{k})"] = CoefficientEntry(cnk_fourier(v, grid, alpha, n, k), route, gdesc)
    token = f"{v!r}|{gdesc}|alpha={alpha!r}"
    digest = hashlib.sha256(token.encode()).hexdigest()[:16]
    return CoefficientTable(alpha, grid.dimension, entries, digest)
