"""Antilinear (PT) symmetry of finite matrices.

A PT operator is modelled as ``A K`` with ``A`` an invertible matrix and
``K`` entrywise complex conjugation, so ``[H, PT] = 0`` reads
``A conj(H) = H A``.  This module finds such ``A``, builds biorthogonal
eigensystems, the metric ``V`` with ``H^dagger V = V H``, and the
Hermitian form of a matrix that is Hermitian in disguise.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import NoSymmetryError, NonDiagonalizableError, NumericalFailure, ValidationError
from .linalg_core import SpectralClass, char_poly, eigen_system, eigenvectors, rank_nullspace
from .validation import as_matrix, opnorm, same_shape

MAX_SAMPLES = 32


@dataclass(frozen=True)
class AntilinearSymmetry:
    """``PT = A K`` certified for a Hamiltonian.

    ``involutive`` is False when the solution space held an invertible
    element but none with ``A conj(A)`` proportional to the identity
    ("symmetry without involution").
    """

    A: np.ndarray
    involution_defect: float
    residual: float
    involutive: bool = True
    solution_basis: np.ndarray = field(default=None, repr=False)

    @classmethod
    def from_matrix(cls, a, h, tol=1e-9):
        """Certify a user-supplied ``A`` for ``h``; raises if it does not intertwine."""
        a = as_matrix(a, "A")
        h = as_matrix(h, "H")
        same_shape(a, h, ("A", "H"))
        if abs(np.linalg.det(a)) <= tol * opnorm(a) ** a.shape[0]:
            raise ValidationError("A is not invertible")
        resid = _intertwining_residual(a, [h])
        if resid > tol:
            raise ValidationError(f"A conj(H) != H A (relative residual {resid:.3e})")
        defect = opnorm(a @ a.conj() - np.eye(a.shape[0]))
        return cls(a, defect, resid, involutive=defect <= tol)

    def apply(self, v):
        """Action of ``A K`` on a vector or on the columns of a matrix."""
        return self.A @ np.conj(v)

    def conjugate_operator(self, x):
        """``PT x TP = A conj(x) A^-1``."""
        return self.A @ np.conj(x) @ np.linalg.inv(self.A)


@dataclass(frozen=True)
class SecularReport:
    coeffs: np.ndarray
    max_imag: float


@dataclass(frozen=True)
class BiorthogonalSystem:
    """Right eigencolumns ``R``, left eigenrows ``L = R^-1`` and pairing.

    ``pairing[n]`` is the state carrying ``conj(E_n)`` (``n`` itself for a
    real energy, ``-1`` when no partner exists).  When ``pt_aligned`` the
    columns are normalised so that ``A conj(R_n) = R_pairing[n]``.
    """

    R: np.ndarray
    L: np.ndarray
    energies: np.ndarray
    pairing: np.ndarray
    spectrum: object
    pt_aligned: bool = False

    @property
    def complete_pairing(self):
        return bool(np.all(self.pairing >= 0))

    def pairing_matrix(self):
        """``P[i, j] = 1`` iff ``j = pairing[i]``."""
        if not self.complete_pairing:
            raise NoSymmetryError("energies are not closed under conjugation")
        n = len(self.pairing)
        p = np.zeros((n, n))
        p[np.arange(n), self.pairing] = 1.0
        return p

    def residuals(self, h):
        h = as_matrix(h, "H")
        n = h.shape[0]
        e = np.diag(self.energies)
        eye = np.eye(n)
        return {
            "right": opnorm(h @ self.R - self.R @ e),
            "left": opnorm(self.L @ h - e @ self.L),
            "biorthogonality": opnorm(self.L @ self.R - eye),
            "completeness": opnorm(self.R @ self.L - eye),
            "reconstruction": opnorm(self.R @ e @ self.L - h),
        }


@dataclass(frozen=True)
class VOperator:
    V: np.ndarray
    residual: float
    construction: str

    @property
    def is_hermitian_positive(self):
        v = self.V
        if opnorm(v - v.conj().T) > 1e-9 * opnorm(v):
            return False
        return bool(np.min(np.linalg.eigvalsh((v + v.conj().T) / 2)) > 0)


@dataclass(frozen=True)
class Hermitianization:
    S: np.ndarray
    hermitian_form: np.ndarray
    defect: float


@dataclass(frozen=True)
class NormInvarianceReport:
    times: np.ndarray
    overlaps: np.ndarray  # overlaps[k, j, i] = <L_j(t_k)|R_i(t_k)>
    admitted: np.ndarray  # admitted[j, i]: E_i = conj(E_j)
    variation: np.ndarray  # max_t |o(t) - o(0)| per (j, i)
    passed: bool


def _intertwining_residual(a, hs):
    worst = 0.0
    for h in hs:
        r = opnorm(a @ np.conj(h) - h @ a)
        worst = max(worst, r / max(opnorm(h) * opnorm(a), 1e-300))
    return worst


def _solution_space(blocks, tol):
    """Basis of the matrices ``X`` with ``X B_left = B_right X`` for all block pairs.

    ``blocks`` holds ``(left, right)`` pairs.  Row-major vectorisation turns
    ``X B - C X = 0`` into ``(I kron B^T - C kron I) vec(X) = 0``.
    """
    n = blocks[0][0].shape[0]
    eye = np.eye(n)
    system = np.vstack([np.kron(eye, left.T) - np.kron(right, eye) for left, right in blocks])
    _, basis = rank_nullspace(system, tol)
    return np.array([basis[:, k].reshape(n, n) for k in range(basis.shape[1])])


def _candidates(basis, rng, max_samples=MAX_SAMPLES):
    if len(basis) == 0:
        return
    if len(basis) == 1:
        yield basis[0]
        return
    for _ in range(max_samples):
        c = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
        yield np.tensordot(c, basis, axes=1)


def _is_invertible(a, tol):
    nrm = opnorm(a)
    if nrm == 0:
        return False
    return abs(np.linalg.det(a / nrm)) > tol


def _normalize_involution(a0, tol):
    """Rescale ``a0`` within its commutant class so that ``A conj(A) = I``.

    With ``N = a0 conj(a0)`` (which commutes with H), ``N^-1/2 a0`` stays in
    the solution space and satisfies ``A conj(A) = I`` whenever the principal
    square root is conjugation-compatible, i.e. N has no eigenvalue on the
    closed negative real axis.  Returns None when that fails.
    """
    n = a0.shape[0]
    eye = np.eye(n)
    nmat = a0 @ a0.conj()
    c = np.trace(nmat) / n
    if opnorm(nmat - c * eye) <= tol * abs(c) and c.real > 0:
        a = a0 / np.sqrt(c.real)
    else:
        w = np.linalg.eigvals(nmat)
        if np.any((np.abs(w.imag) <= 1e-12 * np.max(np.abs(w))) & (w.real <= 0)):
            return None
        root = scipy.linalg.sqrtm(nmat)
        a = np.linalg.solve(root, a0)
    defect = opnorm(a @ a.conj() - eye)
    return (a, defect) if defect <= tol else None


def find_antilinear_symmetry(h, tol=1e-9, also=(), seed=0, max_samples=MAX_SAMPLES):
    """Search for ``A`` with ``A conj(H) = H A`` (and the same for each matrix in ``also``).

    Returns an :class:`AntilinearSymmetry`, or None when the solution space
    contains no invertible element.  Invertibility is probed with up to
    ``max_samples`` random combinations of a solution-space basis, a
    generic combination of which is singular only if every element is.
    """
    h = as_matrix(h, "H")
    others = [as_matrix(x, "operator") for x in also]
    for x in others:
        same_shape(h, x, ("H", "operator"))
    mats = [h, *others]
    basis = _solution_space([(np.conj(m), m) for m in mats], tol)
    rng = np.random.default_rng(seed)
    fallback = None
    for a0 in _candidates(basis, rng, max_samples):
        if not _is_invertible(a0, tol):
            continue
        resid = _intertwining_residual(a0, mats)
        if resid > tol:
            continue
        normalized = _normalize_involution(a0, tol)
        if normalized is not None:
            a, defect = normalized
            resid = _intertwining_residual(a, mats)
            if resid <= tol:
                return AntilinearSymmetry(a, defect, resid, True, basis)
        if fallback is None:
            a = a0 / opnorm(a0)
            fallback = AntilinearSymmetry(
                a, opnorm(a @ a.conj() - np.eye(h.shape[0])), resid, False, basis
            )
    return fallback


def secular_reality(h):
    """Characteristic coefficients (leading ``(-1)^n``) and their largest imaginary part."""
    coeffs = char_poly(h)
    return SecularReport(coeffs, float(np.max(np.abs(coeffs.imag))))


def classify_spectrum(h, tol=1e-9, cluster_tol=None):
    """Spectrum with conjugate-pairing verification.

    The returned report's ``pairing_violated`` flag is the "pairing
    violated" outcome; it is set whenever a non-real eigenvalue has no
    conjugate partner, which rules out any antilinear symmetry.
    """
    return eigen_system(h, tol=tol, cluster_tol=cluster_tol)


def _pt_real_basis(block, a, tol):
    """Basis of the same span whose columns satisfy ``A conj(v) = v``."""
    m = block.shape[1]
    image = a @ block.conj()
    cands = np.hstack([block + image, 1j * (block - image)])
    _, _, piv = scipy.linalg.qr(cands, pivoting=True, mode="economic")
    chosen = cands[:, np.sort(piv[:m])]
    norms = np.linalg.norm(chosen, axis=0)
    if np.min(norms) <= tol:
        return None
    return chosen / norms


def _resolve_symmetry(h, symmetry, tol):
    if symmetry is None:
        return None
    if isinstance(symmetry, str):
        if symmetry != "auto":
            raise ValidationError(f"unknown symmetry option {symmetry!r}")
        return find_antilinear_symmetry(h, tol)
    if isinstance(symmetry, AntilinearSymmetry):
        return symmetry
    return AntilinearSymmetry.from_matrix(symmetry, h, tol)


def build_biorthogonal(h, tol=1e-9, symmetry="auto", cluster_tol=None):
    """Right/left eigenvectors with ``L R = I`` for a diagonalizable ``h``.

    ``symmetry`` may be ``"auto"`` (search for one), None (no phase
    alignment), an :class:`AntilinearSymmetry` or a raw matrix ``A``.
    With an involutive symmetry the columns are aligned so that
    ``A conj(R_n) = R_pairing[n]``; the matrix elements of PT-even
    operators then obey ``X[n, m] = conj(X[pairing[n], pairing[m]])``.
    """
    h = as_matrix(h, "H")
    n = h.shape[0]
    spec = eigen_system(h, tol=tol, cluster_tol=cluster_tol)
    if spec.spectral_class is SpectralClass.JORDAN_BLOCK:
        raise NonDiagonalizableError("non-diagonalizable: H has a Jordan block")
    sym = _resolve_symmetry(h, symmetry, tol)
    align = sym is not None and sym.involutive

    blocks = [eigenvectors(h, e, tol) for e in spec.eigenvalues]
    if align:
        for i, e in enumerate(spec.eigenvalues):
            if spec.is_real(i):
                aligned = _pt_real_basis(blocks[i], sym.A, tol)
                if aligned is None:
                    align = False
                    break
                blocks[i] = aligned
        if align:
            for i, j in spec.pairing:
                blocks[j] = sym.A @ blocks[i].conj()

    starts = np.cumsum([0] + [b.shape[1] for b in blocks])
    r = np.hstack(blocks)
    energies = np.concatenate([[e.value] * b.shape[1] for e, b in zip(spec.eigenvalues, blocks)])
    pairing = -np.ones(n, dtype=int)
    for i in range(len(blocks)):
        j = spec.partner(i)
        if j is None:
            continue
        width = blocks[i].shape[1]
        pairing[starts[i]:starts[i] + width] = np.arange(starts[j], starts[j] + width)

    cond = np.linalg.cond(r)
    if not np.isfinite(cond) or cond > 1.0 / tol:
        raise NumericalFailure(f"eigenvector matrix ill-conditioned (cond={cond:.3e})", residual=cond)
    return BiorthogonalSystem(r, np.linalg.inv(r), energies, pairing, spec, align)


def align_to_symmetry(system, h, symmetry, tol=1e-9):
    """Re-normalise an existing system against a given symmetry."""
    return build_biorthogonal(h, tol, symmetry=symmetry, cluster_tol=system.spectrum.cluster_tol)


def _v_residual(h, v):
    hd = h.conj().T
    return opnorm(hd @ v - v @ h) / max(opnorm(h) * opnorm(v), 1e-300)


def construct_V(h, tol=1e-9, seed=0):
    """Invertible ``V`` with ``H^dagger V = V H``.

    RealComplete: ``V = (R R^dagger)^-1``, Hermitian positive-definite.
    ConjugatePairs: ``V = (R^dagger)^-1 Pi R^-1`` with ``Pi`` the pairing.
    JordanBlock: a generic invertible element of the intertwiner space.
    Raises NoSymmetryError when H has no antilinear symmetry or no
    invertible V exists.
    """
    h = as_matrix(h, "H")
    if find_antilinear_symmetry(h, tol, seed=seed) is None:
        raise NoSymmetryError("H admits no antilinear symmetry, so no metric V exists")
    spec = eigen_system(h, tol=tol)
    if spec.spectral_class is SpectralClass.JORDAN_BLOCK:
        basis = _solution_space([(h, h.conj().T)], tol)
        rng = np.random.default_rng(seed)
        for v in _candidates(basis, rng):
            if _is_invertible(v, tol):
                v = v / opnorm(v)
                resid = _v_residual(h, v)
                if resid <= tol:
                    return VOperator(v, resid, "intertwiner")
        raise NoSymmetryError("no invertible V in the solution space of H^dagger V = V H")

    system = build_biorthogonal(h, tol, symmetry=None)
    if spec.spectral_class is SpectralClass.REAL_COMPLETE:
        v = np.linalg.inv(system.R @ system.R.conj().T)
        v = (v + v.conj().T) / 2
        kind = "real-complete"
    else:
        v = system.L.conj().T @ system.pairing_matrix() @ system.L
        kind = "conjugate-pairs"
    resid = _v_residual(h, v)
    if resid > tol:
        raise NumericalFailure(f"H^dagger V - V H residual {resid:.3e} exceeds tol", residual=resid)
    return VOperator(v, resid, kind)


def hermitianize(h, tol=1e-9):
    """Similarity ``S = V^1/2`` making ``S H S^-1`` Hermitian, or None.

    Only a RealComplete spectrum (Hermitian in disguise) admits one.
    """
    h = as_matrix(h, "H")
    spec = eigen_system(h, tol=tol)
    if spec.spectral_class is not SpectralClass.REAL_COMPLETE:
        return None
    v = construct_V(h, tol).V
    w, u = np.linalg.eigh(v)
    if np.min(w) <= 0:
        raise NumericalFailure("metric V is not positive-definite", residual=float(np.min(w)))
    s = (u * np.sqrt(w)) @ u.conj().T
    hf = s @ h @ np.linalg.inv(s)
    defect = opnorm(hf - hf.conj().T)
    if defect > tol * max(opnorm(h), 1.0):
        raise NumericalFailure(f"Hermiticity defect {defect:.3e} exceeds tol", residual=defect)
    return Hermitianization(s, hf, defect)


def norm_invariance_check(h, t_grid, tol=1e-9):
    """Time dependence of ``<L_j(t)|R_i(t)> = <R_j|V|R_i> exp(-i(E_i - conj E_j) t)``.

    Left states are taken as ``<L_j| = <R_j| V``.  The check passes when
    every pair with ``E_i = conj(E_j)`` is constant over ``t_grid`` and every
    other pair has vanishing overlap.
    """
    h = as_matrix(h, "H")
    t = np.asarray(t_grid, dtype=float).ravel()
    system = build_biorthogonal(h, tol, symmetry=None)
    v = construct_V(h, tol).V
    r = system.R
    e = system.energies
    base = r.conj().T @ v @ r  # base[j, i] = <R_j|V|R_i>
    phase = np.exp(-1j * (e[None, None, :] - np.conj(e)[None, :, None]) * t[:, None, None])
    overlaps = base[None, :, :] * phase
    variation = np.max(np.abs(overlaps - overlaps[:1]), axis=0)
    ctol = system.spectrum.cluster_tol
    admitted = np.abs(e[None, :] - np.conj(e)[:, None]) <= ctol
    scale = max(np.max(np.abs(base)), 1.0)
    passed = bool(
        np.all(variation[admitted] <= tol * scale)
        and np.all(np.abs(base[~admitted]) <= tol * scale)
    )
    return NormInvarianceReport(t, overlaps, admitted, variation, passed)


def pt_maps_solutions(h, a, tol=1e-9):
    """True iff ``A conj(v)`` is an eigenvector with eigenvalue ``conj(E)`` for every eigenpair."""
    h = as_matrix(h, "H")
    amat = a.A if isinstance(a, AntilinearSymmetry) else as_matrix(a, "A")
    same_shape(h, amat, ("H", "A"))
    spec = eigen_system(h, tol=tol)
    scale = max(opnorm(h), 1.0)
    for eig in spec.eigenvalues:
        vecs = eigenvectors(h, eig, tol)
        for k in range(vecs.shape[1]):
            w = amat @ np.conj(vecs[:, k])
            nw = np.linalg.norm(w)
            if nw == 0:
                return False
            resid = np.linalg.norm(h @ w - np.conj(eig.value) * w) / nw
            if resid > max(tol, 10 * eig.spread) * scale:
                return False
    return True
