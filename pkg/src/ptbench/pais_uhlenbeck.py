"""Euclidean lattice path integral of the fourth-order Pais-Uhlenbeck oscillator.

The Euclidean action

    S_E = (gamma/2) int dtau [z''^2 + (w1^2 + w2^2) z'^2 + w1^2 w2^2 z^2]

is discretised on ``N`` interior sites with ``z = 0`` outside, giving
``S_E = 1/2 z^T K z`` with the pentadiagonal kernel

    K = gamma * dtau * (D2^T D2 + (w1^2 + w2^2) D1^T D1 + w1^2 w2^2 I).

Here ``D1`` holds forward differences and ``D2`` central second differences.
With these boundaries ``D2^T D2 = (D1^T D1)^2``, so ``K`` factorises as
``gamma dtau (L + w1^2)(L + w2^2)`` with ``L`` the Dirichlet Laplacian.

The original theory integrates over separate ``z`` and ``z'`` paths; the
single-field Gaussian used here differs from it only by a
parameter-independent Jacobian, which cancels in every energy difference.
"""
import csv
from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure, ValidationError
from .validation import check_nonnegative, check_positive

MIN_SITES = 5


@dataclass(frozen=True)
class PUParams:
    omega1: float
    omega2: float
    gamma: float = 1.0
    epsilon: float = 0.0

    def __post_init__(self):
        check_positive(self.gamma, "gamma")
        check_nonnegative(self.omega1, "omega1")
        check_nonnegative(self.omega2, "omega2")
        check_nonnegative(self.epsilon, "epsilon")


@dataclass(frozen=True)
class LatticeSpec:
    n_sites: int
    delta_tau: float

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < MIN_SITES:
            raise ValidationError(f"need an integer n_sites >= {MIN_SITES}, got {self.n_sites}")
        check_positive(self.delta_tau, "delta_tau")

    @property
    def total_time(self):
        return self.n_sites * self.delta_tau


@dataclass(frozen=True)
class LatticeQuadraticForm:
    """Symmetric pentadiagonal kernel; ``bands[k]`` is the k-th superdiagonal."""

    bands: tuple

    @property
    def n(self):
        return len(self.bands[0])

    def dense(self):
        n = self.n
        k = np.zeros((n, n))
        for off, band in enumerate(self.bands):
            idx = np.arange(n - off)
            k[idx, idx + off] = band
            k[idx + off, idx] = band
        return k


@dataclass(frozen=True)
class LogDet:
    logdet: float
    positive: bool


@dataclass(frozen=True)
class EnergyEstimate:
    e0: float
    e0_refined: float  # same estimate at delta_tau / 2
    converged: bool
    achieved: float  # |e0 - e0_refined|
    free_energies: tuple  # ((T, F), ...) at the requested delta_tau


@dataclass(frozen=True)
class CorrelatorFit:
    model: str  # "two-mode", "jordan" or "none"
    coeffs: tuple
    rel_residual: float


@dataclass(frozen=True)
class WedgeReport:
    theta_z: float
    theta_zdot: float
    re_z: float  # Re of the z-term coefficient per unit |z|^2
    re_zdot: float
    damping_z: str
    damping_zdot: str

    @property
    def damped(self):
        return self.damping_z == "damped" and self.damping_zdot == "damped"


def action_matrix(p, lattice):
    """Pentadiagonal kernel ``K`` with ``S_E = 1/2 z^T K z``."""
    n = lattice.n_sites
    dt = lattice.delta_tau
    s = p.omega1 ** 2 + p.omega2 ** 2
    prod = p.omega1 ** 2 * p.omega2 ** 2
    # D2^T D2 = L^2 with L = tridiag(-1, 2, -1) / dt^2 under zero boundaries
    d0 = np.full(n, 6.0)
    d0[0] = d0[-1] = 5.0
    d0 = d0 / dt ** 4 + 2.0 * s / dt ** 2 + prod
    d1 = np.full(n - 1, -4.0 / dt ** 4 - s / dt ** 2)
    d2 = np.full(n - 2, 1.0 / dt ** 4)
    scale = p.gamma * dt
    return LatticeQuadraticForm((scale * d0, scale * d1, scale * d2))


def _ldl_banded(form):
    """LDL^T of a symmetric pentadiagonal matrix; returns (unit factor bands, pivots).

    Raises NumericalFailure (with ``index``) at the first zero pivot.
    """
    a0, a1, a2 = (np.asarray(b, dtype=float) for b in form.bands)
    n = len(a0)
    d = np.zeros(n)
    l1 = np.zeros(max(n - 1, 0))
    l2 = np.zeros(max(n - 2, 0))
    scale = max(np.max(np.abs(a0)), 1e-300)
    for i in range(n):
        di = a0[i]
        if i >= 1:
            di -= l1[i - 1] ** 2 * d[i - 1]
        if i >= 2:
            di -= l2[i - 2] ** 2 * d[i - 2]
        if abs(di) <= 1e-14 * scale:
            raise NumericalFailure(f"singular action kernel at pivot {i}", residual=di, index=i)
        d[i] = di
        if i + 1 < n:
            v = a1[i]
            if i >= 1:
                v -= l2[i - 1] * l1[i - 1] * d[i - 1]
            l1[i] = v / di
        if i + 2 < n:
            l2[i] = a2[i] / di
    return l1, l2, d


def logdet_partition(form):
    """``log|det K|`` by banded LDL^T; ``positive`` iff every pivot is > 0.

    The Gaussian partition function ``~ det(K)^(-1/2)`` is real exactly when
    ``positive`` holds.
    """
    _, _, d = _ldl_banded(form)
    return LogDet(float(np.sum(np.log(np.abs(d)))), bool(np.all(d > 0)))


def _banded_solve(form, rhs):
    l1, l2, d = _ldl_banded(form)
    n = len(d)
    y = np.array(rhs, dtype=float)
    for i in range(1, n):
        y[i] -= l1[i - 1] * y[i - 1]
        if i >= 2:
            y[i] -= l2[i - 2] * y[i - 2]
    y /= d
    for i in range(n - 2, -1, -1):
        y[i] -= l1[i] * y[i + 1]
        if i + 2 < n:
            y[i] -= l2[i] * y[i + 2]
    return y


def free_energy(p, lattice):
    """``F = 1/2 log det(K dtau^3 / gamma)``.

    Dividing out ``gamma / dtau^3`` per site removes the measure constant,
    which would otherwise contribute ``log(gamma/dtau^3) / (2 dtau)`` to any
    slope taken at fixed ``dtau``.
    """
    form = action_matrix(p, lattice)
    ld = logdet_partition(form)
    if not ld.positive:
        raise NumericalFailure("action kernel is not positive-definite")
    n = lattice.n_sites
    return 0.5 * (ld.logdet - n * np.log(p.gamma / lattice.delta_tau ** 3))


def _slope_estimate(p, delta_tau, total_time):
    n2 = int(round(total_time / delta_tau))
    n1 = n2 // 2
    lat1, lat2 = LatticeSpec(n1, delta_tau), LatticeSpec(n2, delta_tau)
    f1, f2 = free_energy(p, lat1), free_energy(p, lat2)
    return (f2 - f1) / (lat2.total_time - lat1.total_time), (
        (lat1.total_time, f1), (lat2.total_time, f2)
    )


def ground_energy(p, delta_tau=0.01, total_time=20.0, tol=0.02):
    """Ground energy from the large-T slope of the free energy.

    ``E0 = [F(T2) - F(T1)] / (T2 - T1)`` with ``T1 = T2 / 2`` at fixed
    ``delta_tau``; repeated at ``delta_tau / 2`` and flagged as converged
    when the two agree to ``tol`` (relative).
    """
    if p.omega1 <= 0 or p.omega2 <= 0:
        raise ValidationError("ground_energy needs omega1, omega2 > 0")
    check_positive(delta_tau, "delta_tau")
    check_positive(total_time, "total_time")
    e0, free = _slope_estimate(p, delta_tau, total_time)
    e0_fine, _ = _slope_estimate(p, delta_tau / 2, total_time)
    achieved = abs(e0 - e0_fine)
    return EnergyEstimate(e0, e0_fine, achieved <= tol * abs(e0_fine), achieved, free)


def _source_site(lattice):
    return int(round(lattice.n_sites / 2.0)) - 1


def lattice_correlator(p, lattice, tau_list):
    """``<z(tau) z(0)> = (K^-1)[s, s + tau/dtau]`` with the source ``s`` at mid-lattice."""
    form = action_matrix(p, lattice)
    src = _source_site(lattice)
    rhs = np.zeros(lattice.n_sites)
    rhs[src] = 1.0
    column = _banded_solve(form, rhs)
    out = []
    for tau in np.atleast_1d(tau_list):
        site = src + int(round(float(tau) / lattice.delta_tau))
        if site < 0 or site >= lattice.n_sites:
            raise ValidationError(f"tau={tau} falls outside the lattice")
        out.append(float(column[site]))
    return np.array(out)


def fit_correlator(tau, values, omega1, omega2, degenerate_tol=1e-9):
    """Least-squares fit of the lattice correlator.

    Unequal frequencies: ``c1 exp(-w1 tau) + c2 exp(-w2 tau)``.
    Equal frequencies: ``(a + b tau) exp(-w tau)``.
    A vanishing frequency leaves no exponential to fit (model ``"none"``).
    """
    tau = np.asarray(tau, dtype=float)
    values = np.asarray(values, dtype=float)
    if min(omega1, omega2) <= 0:
        return CorrelatorFit("none", (), float("nan"))
    if abs(omega1 - omega2) <= degenerate_tol * max(omega1, omega2):
        w = 0.5 * (omega1 + omega2)
        design = np.column_stack([np.exp(-w * tau), tau * np.exp(-w * tau)])
        model = "jordan"
    else:
        design = np.column_stack([np.exp(-omega1 * tau), np.exp(-omega2 * tau)])
        model = "two-mode"
    coeffs, *_ = np.linalg.lstsq(design, values, rcond=None)
    resid = np.linalg.norm(design @ coeffs - values) / np.linalg.norm(values)
    return CorrelatorFit(model, tuple(float(c) for c in coeffs), float(resid))


def _damping(value, scale):
    if abs(value) <= 1e-12 * max(scale, 1e-300):
        return "marginal"
    return "damped" if value < 0 else "divergent"


def wedge_scan(p, theta_z, theta_zdot):
    """Signs of ``Re(i Delta S)`` on rotated rays ``z = e^(i theta_z)|z|``, ``z' = e^(i theta_zdot)|z'|``.

    The Feynman deformation ``w^2 -> w^2 - i eps`` adds
    ``(gamma/2)(-2 eps z'^2 + eps (w1^2 + w2^2) z^2)`` to ``i S``; each term
    is damped where its real part is negative.
    """
    if p.epsilon <= 0:
        raise ValidationError("wedge_scan needs epsilon > 0")
    half = p.gamma / 2.0
    coef_z = half * p.epsilon * (p.omega1 ** 2 + p.omega2 ** 2)
    coef_zdot = half * 2.0 * p.epsilon
    re_z = coef_z * np.cos(2.0 * theta_z)
    re_zdot = -coef_zdot * np.cos(2.0 * theta_zdot)
    return WedgeReport(
        float(theta_z), float(theta_zdot), float(re_z), float(re_zdot),
        _damping(re_z, coef_z), _damping(re_zdot, coef_zdot),
    )


def omega_sweep(omega1, omega2_values, lattice, gamma=1.0):
    """logdet of the kernel along a sweep of ``omega2`` at fixed ``omega1``."""
    rows = []
    for w2 in omega2_values:
        ld = logdet_partition(action_matrix(PUParams(omega1, float(w2), gamma), lattice))
        rows.append((float(w2), ld.logdet, ld.positive))
    return rows


def continuity_jumps(values):
    """Relative deviation of each interior point from its neighbours' midpoint.

    A smooth sweep gives ``O(h^2)`` values; a jump or kink at some point
    shows up as an ``O(1)`` or ``O(h)`` spike.
    """
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return np.zeros(0)
    return np.abs(v[2:] - 2 * v[1:-1] + v[:-2]) / np.max(np.abs(v))


def write_sweep_csv(path, rows):
    """Rows of ``(omega1, omega2, N, delta_tau, logdet, E0_estimate)``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["omega1", "omega2", "N", "delta_tau", "logdet", "E0_estimate"])
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, float) else x for x in row])
