"""Two-point functions of finite-dimensional Hamiltonians in Euclidean time.

With right eigencolumns ``R``, left rows ``L = R^-1`` and field matrix
elements ``X = L phi R``, the Euclidean correlator between a vacuum pair
``(a, b)`` is ``G(tau) = sum_n X[a, n] X[n, b] exp(-E_n tau)``.

Energies are reported relative to the real part of the lowest state, so
every exponential decays and ``G(0)`` is finite; this factor is real and
does not affect reality of ``G``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import NonDiagonalizableError, ValidationError
from .pt_analysis import AntilinearSymmetry, build_biorthogonal
from .validation import as_matrix, opnorm, same_shape

DEFAULT_TAU_GRID = np.linspace(0.0, 5.0, 21)


@dataclass(frozen=True)
class FieldOperator:
    phi: np.ndarray
    symmetry: AntilinearSymmetry
    pt_even_defect: float


@dataclass(frozen=True)
class Term:
    amplitude: complex
    energy: complex  # shifted by the vacuum energy
    raw_energy: complex
    state: int


@dataclass(frozen=True)
class TwoPointSeries:
    """``G(tau) = sum amplitude * exp(-energy * tau)``, summed in a fixed order."""

    terms: tuple
    vacuum_label: str
    vacuum_states: tuple
    energy_shift: float

    def evaluate(self, tau):
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        g = np.zeros(tau.shape, dtype=np.complex128)
        for t in self.terms:
            g = g + t.amplitude * np.exp(-t.energy * tau)
        return g

    def connected(self):
        """The series without intermediate states equal to the vacuum."""
        keep = tuple(t for t in self.terms if t.state not in self.vacuum_states)
        return TwoPointSeries(keep, self.vacuum_label + " (connected)", self.vacuum_states, self.energy_shift)


@dataclass(frozen=True)
class MatrixElementReport:
    elements: np.ndarray
    max_real_sector_imag: float
    max_pairing_defect: float
    failures: tuple
    passed: bool


@dataclass(frozen=True)
class RealityCertificate:
    passed: bool
    max_imag: float
    witness: object  # (Term, vacuum_label) on failure
    sectors: tuple  # (vacuum_label, max |Im G|)


def check_pt_even(phi, symmetry, tol=1e-9):
    """Certify ``A conj(phi) A^-1 = phi``; raises ValidationError with the defect otherwise."""
    phi = as_matrix(phi, "phi")
    a = symmetry.A if isinstance(symmetry, AntilinearSymmetry) else as_matrix(symmetry, "A")
    same_shape(phi, a, ("phi", "A"))
    if not isinstance(symmetry, AntilinearSymmetry):
        symmetry = AntilinearSymmetry(a, opnorm(a @ a.conj() - np.eye(a.shape[0])), 0.0)
    defect = opnorm(a @ np.conj(phi) @ np.linalg.inv(a) - phi)
    if defect > tol * max(opnorm(phi), 1.0):
        err = ValidationError(f"not PT-even: defect {defect:.6g}")
        err.defect = defect
        raise err
    return FieldOperator(phi, symmetry, defect)


def lr_matrix_elements(phi, system, h=None, tol=1e-9):
    """``X[n, m] = L_n phi R_m`` and the reality relations PT-evenness implies.

    Real-energy sectors must give real elements; across conjugate pairs
    ``X[n, m] = conj(X[pi(n), pi(m)])``.  When ``phi`` is a
    :class:`FieldOperator` and ``h`` is given, the system is first aligned
    with the symmetry that certified ``phi``.
    """
    if isinstance(phi, FieldOperator):
        if h is not None:
            system = build_biorthogonal(h, tol, symmetry=phi.symmetry)
        phi = phi.phi
    phi = as_matrix(phi, "phi")
    x = system.L @ phi @ system.R
    scale = max(np.max(np.abs(x)), 1.0)
    real = np.array([system.pairing[k] == k for k in range(len(system.pairing))])
    failures = []
    real_imag = float(np.max(np.abs(x[np.ix_(real, real)].imag))) if real.any() else 0.0
    if real_imag > tol * scale:
        failures.append(f"real sector: max |Im phi_nm| = {real_imag:.3e}")
    if system.complete_pairing:
        p = system.pairing
        pair_defect = float(np.max(np.abs(x - np.conj(x[np.ix_(p, p)]))))
        if pair_defect > tol * scale:
            failures.append(f"pairing: max |phi_nm - conj(phi_pi(n)pi(m))| = {pair_defect:.3e}")
    else:
        pair_defect = float("inf")
        failures.append("pairing: energies not closed under conjugation")
    if not system.pt_aligned:
        failures.append("eigenvectors not aligned with a PT involution")
    return MatrixElementReport(x, real_imag, pair_defect, tuple(failures), not failures)


def _series(x, energies, vacua, shift, label):
    terms = []
    for n in range(len(energies)):
        amp = sum(x[v, n] * x[n, v] for v in vacua)
        terms.append(Term(complex(amp), complex(energies[n] - shift), complex(energies[n]), n))
    return TwoPointSeries(tuple(terms), label, tuple(vacua), shift)


def _diagonal_system(h, tol):
    try:
        return build_biorthogonal(h, tol, symmetry=None)
    except NonDiagonalizableError as exc:
        raise NonDiagonalizableError(
            "non-diagonalizable: use pais_uhlenbeck module for the Jordan showcase"
        ) from exc


def _vacuum_sectors(system):
    """Every vacuum choice: each real state, each conjugate pair, each unpaired state."""
    sectors = []
    seen = set()
    for k, p in enumerate(system.pairing):
        if k in seen:
            continue
        if p == k:
            sectors.append(((k,), f"Omega_{k}"))
        elif p < 0:
            sectors.append(((k,), f"Omega_{k} (unpaired)"))
        else:
            sectors.append(((k, int(p)), f"Omega_{k}+Omega_{int(p)} (symmetrized)"))
            seen.add(int(p))
        seen.add(k)
    return sectors


def two_point_euclidean(h, phi, tau_grid=None, tol=1e-9, vacuum=None):
    """Euclidean two-point series and ``max |Im G|`` on ``tau_grid``.

    The default vacuum is the state of lowest real energy.  If it belongs
    to a conjugate pair and the whole spectrum is complex, the symmetrized
    combination of both vacua of the pair is used.  A mixed spectrum whose
    lowest state is complex is rejected.  ``vacuum`` may name explicit state
    indices instead.
    """
    h = as_matrix(h, "H")
    phi = phi.phi if isinstance(phi, FieldOperator) else as_matrix(phi, "phi")
    same_shape(h, phi, ("H", "phi"))
    tau = DEFAULT_TAU_GRID if tau_grid is None else np.asarray(tau_grid, dtype=float)
    system = _diagonal_system(h, tol)
    e = system.energies
    x = system.L @ phi @ system.R
    shift = float(np.min(e.real))

    if vacuum is None:
        ground = int(np.argmin(e.real + 1e-12 * np.arange(len(e))))
        partner = system.pairing[ground]
        if partner == ground or partner < 0:
            vacua, label = (ground,), f"Omega_{ground}"
        elif np.any(system.pairing == np.arange(len(e))):
            raise ValidationError(
                "mixed spectrum: the lowest state must have a real energy"
            )
        else:
            vacua = (ground, int(partner))
            label = f"Omega_{ground}+Omega_{int(partner)} (symmetrized)"
    else:
        vacua = tuple(int(v) for v in np.atleast_1d(vacuum))
        label = "+".join(f"Omega_{v}" for v in vacua)

    series = _series(x, e, vacua, shift, label)
    g = series.evaluate(tau)
    return series, float(np.max(np.abs(g.imag)))


def reality_certificate(h, phi, tau_grid=None, tol=1e-9):
    """Pass iff ``max |Im G(tau)| <= tol`` in every vacuum sector.

    Each real state, each conjugate pair (symmetrized) and each unpaired
    state serves as a vacuum in turn.  On failure the witness is the
    non-real-energy term contributing most to ``Im G`` in the worst sector.
    """
    h = as_matrix(h, "H")
    phi = phi.phi if isinstance(phi, FieldOperator) else as_matrix(phi, "phi")
    same_shape(h, phi, ("H", "phi"))
    tau = DEFAULT_TAU_GRID if tau_grid is None else np.asarray(tau_grid, dtype=float)
    system = _diagonal_system(h, tol)
    e = system.energies
    x = system.L @ phi @ system.R
    shift = float(np.min(e.real))

    sectors = []
    worst = (0.0, None)
    for vacua, label in _vacuum_sectors(system):
        series = _series(x, e, vacua, shift, label)
        im = float(np.max(np.abs(series.evaluate(tau).imag)))
        sectors.append((label, im))
        if worst[1] is None or im > worst[0]:
            worst = (im, series)
    max_imag, series = worst
    if max_imag <= tol:
        return RealityCertificate(True, max_imag, None, tuple(sectors))

    def contribution(term):
        return float(np.max(np.abs((term.amplitude * np.exp(-term.energy * tau)).imag)))

    ctol = system.spectrum.cluster_tol
    complex_terms = [t for t in series.terms if abs(t.raw_energy.imag) > ctol] or list(series.terms)
    witness = max(complex_terms, key=contribution)
    return RealityCertificate(False, max_imag, (witness, series.vacuum_label), tuple(sectors))

