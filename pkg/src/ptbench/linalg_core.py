"""Small dense complex linear algebra: characteristic polynomials, roots,
rank/nullspace and Jordan-structure detection.

Everything here targets matrices of dimension ``n <= 16``. Larger inputs are
accepted but the resulting :class:`SpectrumReport` is marked ``best_effort``.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import NumericalFailure, ValidationError
from .validation import as_matrix

SUPPORTED_DIM = 16
ROOT_ITER_CAP = 500
_EPS = np.finfo(float).eps


class SpectralClass(str, Enum):
    REAL_COMPLETE = "RealComplete"
    CONJUGATE_PAIRS = "ConjugatePairs"
    JORDAN_BLOCK = "JordanBlock"


@dataclass(frozen=True)
class Eigenvalue:
    value: complex
    algebraic: int
    geometric: int
    spread: float = 0.0


@dataclass(frozen=True)
class SpectrumReport:
    """Eigenvalues grouped into clusters, plus the conjugate pairing.

    ``pairing`` holds index pairs ``(i, j)`` into ``eigenvalues`` with
    ``E_j ~ conj(E_i)``.  ``pairing_violated`` is set when some non-real
    eigenvalue has no partner; ``pairing_ambiguous`` when a greedy match had
    more than one candidate inside ``cluster_tol``.
    """

    eigenvalues: tuple
    spectral_class: SpectralClass
    pairing: tuple
    cluster_tol: float
    pairing_violated: bool = False
    pairing_ambiguous: bool = False
    best_effort: bool = False

    @property
    def n(self):
        return sum(e.algebraic for e in self.eigenvalues)

    def values(self):
        """Eigenvalues repeated according to algebraic multiplicity."""
        return np.array([e.value for e in self.eigenvalues for _ in range(e.algebraic)])

    def is_real(self, i):
        return abs(self.eigenvalues[i].value.imag) <= self.cluster_tol

    def partner(self, i):
        """Index of the conjugate partner of cluster ``i`` (itself when real)."""
        if self.is_real(i):
            return i
        for a, b in self.pairing:
            if a == i:
                return b
            if b == i:
                return a
        return None


def char_poly(h):
    """Coefficients of ``det(H - lambda I)``, degree-ascending.

    Uses the Faddeev-LeVerrier recursion, so the leading coefficient is
    exactly ``(-1)**n``.
    """
    h = as_matrix(h, "H")
    n = h.shape[0]
    coeffs = np.zeros(n + 1, dtype=np.complex128)
    coeffs[n] = 1.0
    m = np.zeros_like(h)
    eye = np.eye(n, dtype=np.complex128)
    for k in range(1, n + 1):
        m = h @ m + coeffs[n - k + 1] * eye
        coeffs[n - k] = -np.trace(h @ m) / k
    # the recursion yields det(lambda I - H)
    return coeffs * (-1) ** n


def _horner(coeffs, z):
    p = np.full_like(z, coeffs[-1])
    dp = np.zeros_like(z)
    for c in coeffs[-2::-1]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _poly_scale(coeffs, z):
    """Backward-error scale sum_k |c_k| |z|^k, evaluated per root."""
    az = np.abs(z)
    s = np.zeros(z.shape)
    for c in coeffs[::-1]:
        s = s * az + abs(c)
    return s


def sort_roots(roots, scale=1.0):
    """Deterministic (Re, Im) ordering; real parts equal to ~1e-9*scale tie."""
    roots = np.asarray(roots, dtype=np.complex128)
    re_key = np.round(roots.real / (1e-9 * max(scale, 1.0)))
    order = np.lexsort((roots.imag, re_key))
    return roots[order]


def poly_roots(coeffs, tol=1e-9, max_iter=ROOT_ITER_CAP):
    """All roots of a degree-ascending polynomial, via Aberth-Ehrlich iteration.

    Starting points lie on a circle of radius ``1 + max|c_k / c_n|``, so the
    result is reproducible.  Raises NumericalFailure when the iteration cap
    is hit and some root still has ``|p(z)| > tol * scale(p, z)``.
    """
    c = np.array(coeffs, dtype=np.complex128).ravel()
    if c.size < 2:
        raise ValidationError("polynomial must have degree >= 1")
    if not np.all(np.isfinite(c)):
        raise ValidationError("polynomial coefficients must be finite")
    if c[-1] == 0:
        raise ValidationError("leading coefficient must be nonzero")
    c = c / c[-1]
    n = c.size - 1
    if n == 1:
        return np.array([-c[0]])

    radius = 1.0 + np.max(np.abs(c[:-1]))
    # offset angle keeps the start away from symmetric configurations
    z = radius * np.exp(1j * (2 * np.pi * np.arange(n) / n + 0.4))
    off_diag = ~np.eye(n, dtype=bool)
    for _ in range(max_iter):
        p, dp = _horner(c, z)
        diff = z[:, None] - z[None, :]
        inv = np.zeros_like(diff)
        inv[off_diag] = 1.0 / diff[off_diag]
        denom = dp - p * inv.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(denom != 0, p / denom, 0.0)
        z = z - w
        small_step = np.abs(w) <= 4 * _EPS * np.maximum(np.abs(z), 1e-300)
        at_noise = np.abs(p) <= 8 * _EPS * _poly_scale(c, z)
        if np.all(small_step | at_noise):
            break
    else:
        p, _ = _horner(c, z)
        resid = np.abs(p) / _poly_scale(c, z)
        if np.max(resid) > tol:
            raise NumericalFailure(
                f"Aberth iteration did not converge in {max_iter} steps",
                residual=float(np.max(resid)),
            )
    return sort_roots(z, scale=float(np.max(np.abs(z))))


def rank_nullspace(a, tol=1e-9):
    """Numerical rank and an orthonormal nullspace basis of ``a``.

    Gaussian elimination with full pivoting; a pivot counts as zero once it
    drops to ``tol * ||a||_inf``.  Works for rectangular input too.
    Returns ``(rank, basis)`` where ``basis`` has shape ``(n_cols, n_cols - rank)``.
    """
    a = np.array(a, dtype=np.complex128)
    if a.ndim != 2:
        raise ValidationError("rank_nullspace expects a 2-d array")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix entries must be finite")
    m, n = a.shape
    u = a.copy()
    cols = np.arange(n)
    norm_inf = np.max(np.sum(np.abs(a), axis=1)) if a.size else 0.0
    thresh = tol * norm_inf
    rank = 0
    for k in range(min(m, n)):
        sub = np.abs(u[k:, k:])
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        if sub[i, j] <= thresh or sub[i, j] == 0:
            break
        i += k
        j += k
        u[[k, i], :] = u[[i, k], :]
        u[:, [k, j]] = u[:, [j, k]]
        cols[[k, j]] = cols[[j, k]]
        factors = u[k + 1:, k] / u[k, k]
        u[k + 1:, k:] -= np.outer(factors, u[k, k:])
        u[k + 1:, k] = 0.0
        rank += 1

    free = n - rank
    if free == 0:
        return rank, np.zeros((n, 0), dtype=np.complex128)
    u11 = u[:rank, :rank]
    u12 = u[:rank, rank:]
    x = np.zeros((n, free), dtype=np.complex128)
    x[rank:, :] = np.eye(free)
    # back substitution on the upper-triangular pivot block
    for r in range(rank - 1, -1, -1):
        acc = u12[r, :] + u11[r, r + 1:] @ x[r + 1:rank, :]
        x[r, :] = -acc / u11[r, r]
    basis = np.zeros_like(x)
    basis[cols, :] = x
    q, _ = np.linalg.qr(basis)
    return rank, q


def _refine_multiple(coeffs, value, mult, radius, steps=8):
    """Newton on the (m-1)-th derivative, where an m-fold root is simple.

    The plain mean of an Aberth cluster is only ~sqrt(eps) accurate for a
    genuinely multiple root; this recovers near full precision.  The
    refined value is discarded if it leaves the cluster neighbourhood.
    """
    d = np.polynomial.polynomial.polyder(coeffs, mult - 1)
    dd = np.polynomial.polynomial.polyder(d)
    z = value
    for _ in range(steps):
        f = np.polynomial.polynomial.polyval(z, d)
        fp = np.polynomial.polynomial.polyval(z, dd)
        if fp == 0:
            break
        step = f / fp
        z = z - step
        if abs(step) <= 4 * _EPS * max(abs(z), 1.0):
            break
    return complex(z) if abs(z - value) <= radius else value


def _cluster(roots, cluster_tol):
    """Single-linkage clustering; returns lists of root indices."""
    n = len(roots)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(roots[i] - roots[j]) <= cluster_tol:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])


def _multiple_root_groups(roots, scale):
    """Groups of ``m >= 3`` roots that look like one perturbed m-fold root.

    Rounding splits an m-fold root into a ring of radius ~``eps^(1/m)``,
    which for ``m >= 3`` exceeds the default cluster tolerance.  Largest
    candidates are tried first; a group is accepted when single-linkage at
    radius ``10 eps^(1/m) scale`` yields exactly ``m`` roots of that diameter.
    """
    n = len(roots)
    taken = np.zeros(n, dtype=bool)
    groups = []
    for m in range(n, 2, -1):
        radius = 10 * _EPS ** (1.0 / m) * scale
        free = np.flatnonzero(~taken)
        if len(free) < m:
            continue
        for comp in _cluster(roots[free], radius):
            if len(comp) != m:
                continue
            idx = free[comp]
            diam = np.max(np.abs(roots[idx][:, None] - roots[idx][None, :]))
            if diam <= radius:
                groups.append(list(idx))
                taken[idx] = True
    return groups, taken


def conjugate_pairing(values, mults, tol):
    """Greedy nearest match of each non-real value with its conjugate.

    Returns ``(pairs, violated, ambiguous)``.
    """
    values = np.asarray(values)
    pairs = []
    used = set()
    violated = ambiguous = False
    for i, v in enumerate(values):
        if abs(v.imag) <= tol or i in used:
            continue
        cands = [
            j for j in range(len(values))
            if j != i and j not in used and abs(values[j].imag) > tol
            and abs(values[j] - np.conj(v)) <= tol and mults[j] == mults[i]
        ]
        if not cands:
            violated = True
            continue
        if len(cands) > 1:
            ambiguous = True
        j = min(cands, key=lambda k: abs(values[k] - np.conj(v)))
        used.update((i, j))
        pairs.append((min(i, j), max(i, j)))
    return tuple(sorted(pairs)), violated, ambiguous


def default_cluster_tol(roots):
    return 1e-6 * (1.0 + float(np.max(np.abs(roots)))) if len(roots) else 1e-6


def eigen_system(h, tol=1e-9, cluster_tol=None):
    """Eigenvalues with algebraic and geometric multiplicities.

    Roots of the characteristic polynomial closer than ``cluster_tol``
    (default ``1e-6 * (1 + max|lambda|)``) are merged and represented by
    their mean.  With the default tolerance, rings of three or more roots
    at the rounding radius of a multiple root are merged first.  Geometric multiplicity is ``n - rank(H - lambda I)``, with
    the rank tolerance widened to the cluster's spread so that an imprecise
    multiple root still exposes its eigenvectors.
    """
    h = as_matrix(h, "H")
    n = h.shape[0]
    coeffs = char_poly(h)
    roots = poly_roots(coeffs, tol=max(tol, 1e-12))
    ctol = default_cluster_tol(roots) if cluster_tol is None else float(cluster_tol)
    scale = max(float(np.max(np.abs(roots))), 1.0)

    groups = []
    if cluster_tol is None:
        groups, taken = _multiple_root_groups(roots, 1.0 + float(np.max(np.abs(roots))))
        rest = np.flatnonzero(~taken)
        groups += [list(rest[g]) for g in _cluster(roots[rest], ctol)]
    else:
        groups = _cluster(roots, ctol)

    eigs = []
    for group in groups:
        members = roots[group]
        value = complex(np.mean(members))
        spread = float(np.max(np.abs(members - value)))
        if len(group) > 1:
            value = _refine_multiple(coeffs, value, len(group), spread + ctol)
        shifted = h - value * np.eye(n)
        norm_inf = max(np.max(np.sum(np.abs(shifted), axis=1)), _EPS)
        rank, _ = rank_nullspace(shifted, tol=max(tol, 10 * spread / norm_inf))
        geometric = min(max(n - rank, 1), len(group))
        eigs.append(Eigenvalue(value, len(group), geometric, spread))

    values = sort_roots([e.value for e in eigs], scale=scale)
    eigs.sort(key=lambda e: int(np.flatnonzero(values == e.value)[0]))
    mults = [e.algebraic for e in eigs]
    vals = np.array([e.value for e in eigs])
    pairs, violated, ambiguous = conjugate_pairing(vals, mults, ctol)

    if any(e.geometric < e.algebraic for e in eigs):
        cls = SpectralClass.JORDAN_BLOCK
    elif np.all(np.abs(vals.imag) <= ctol):
        cls = SpectralClass.REAL_COMPLETE
    else:
        cls = SpectralClass.CONJUGATE_PAIRS
    return SpectrumReport(
        eigenvalues=tuple(eigs),
        spectral_class=cls,
        pairing=pairs,
        cluster_tol=ctol,
        pairing_violated=violated,
        pairing_ambiguous=ambiguous,
        best_effort=n > SUPPORTED_DIM,
    )


def eigenvectors(h, eig, tol=1e-9):
    """Orthonormal basis (columns) of the eigenspace of ``h`` for cluster ``eig``.

    Exactly ``eig.geometric`` columns are returned; if the pivoted
    elimination disagrees with that count the smallest right singular
    vectors of ``H - lambda I`` are used instead.
    """
    h = as_matrix(h, "H")
    shifted = h - eig.value * np.eye(h.shape[0])
    norm_inf = max(np.max(np.sum(np.abs(shifted), axis=1)), _EPS)
    _, basis = rank_nullspace(shifted, tol=max(tol, 10 * eig.spread / norm_inf))
    if basis.shape[1] == eig.geometric:
        return basis
    _, _, vh = np.linalg.svd(shifted)
    return vh[-eig.geometric:, :].conj().T
