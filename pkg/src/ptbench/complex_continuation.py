"""Phase-space polynomials, complex symplectic maps and the Weyl algebra.

Polynomials are stored as ``{(a, b): coeff}`` for monomials ``q^a p^b``.
Classical polynomials commute; quantum ones are kept normal ordered with
every ``q`` to the left of every ``p`` under ``[q, p] = i``.  Normal-ordering
combinatorics are integers, so with integer-valued inputs all products and
brackets are exact in floating point.
"""
from dataclasses import dataclass, field
from math import comb, factorial

import numpy as np

from .errors import ValidationError

CLASSICAL = "classical"
QUANTUM = "quantum"
J = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=np.complex128)
SIGMA3 = np.diag([1.0, -1.0]).astype(np.complex128)


@dataclass(frozen=True)
class PhasePolynomial:
    terms: dict = field(default_factory=dict)
    kind: str = CLASSICAL

    def __post_init__(self):
        if self.kind not in (CLASSICAL, QUANTUM):
            raise ValidationError(f"unknown polynomial kind {self.kind!r}")
        clean = {}
        for (a, b), c in self.terms.items():
            a, b = int(a), int(b)
            if a < 0 or b < 0:
                raise ValidationError("exponents must be non-negative")
            c = complex(c)
            if not np.isfinite(c):
                raise ValidationError("coefficients must be finite")
            if c != 0:
                clean[(a, b)] = clean.get((a, b), 0) + c
        object.__setattr__(self, "terms", {k: v for k, v in sorted(clean.items()) if v != 0})

    @classmethod
    def q(cls, kind=CLASSICAL):
        return cls({(1, 0): 1}, kind)

    @classmethod
    def p(cls, kind=CLASSICAL):
        return cls({(0, 1): 1}, kind)

    @classmethod
    def const(cls, c, kind=CLASSICAL):
        return cls({(0, 0): c}, kind)

    def _coerce(self, other):
        if isinstance(other, PhasePolynomial):
            if other.kind != self.kind:
                raise ValidationError("cannot mix classical and quantum polynomials")
            return other
        return PhasePolynomial.const(other, self.kind)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return PhasePolynomial(out, self.kind)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c):
        return PhasePolynomial({k: c * v for k, v in self.terms.items()}, self.kind)

    def __mul__(self, other):
        if not isinstance(other, PhasePolynomial):
            return self.scale(other)
        other = self._coerce(other)
        if self.kind == QUANTUM:
            return weyl_product(self, other)
        out = {}
        for (a, b), c in self.terms.items():
            for (e, f), d in other.terms.items():
                out[(a + e, b + f)] = out.get((a + e, b + f), 0) + c * d
        return PhasePolynomial(out, self.kind)

    def __rmul__(self, other):
        return self.scale(other)

    def dq(self):
        return PhasePolynomial({(a - 1, b): a * c for (a, b), c in self.terms.items() if a}, self.kind)

    def dp(self):
        return PhasePolynomial({(a, b - 1): b * c for (a, b), c in self.terms.items() if b}, self.kind)

    def is_zero(self):
        return not self.terms

    def max_abs(self):
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def __eq__(self, other):
        if not isinstance(other, PhasePolynomial):
            return NotImplemented
        return self.kind == other.kind and self.terms == other.terms

    def __hash__(self):
        return hash((self.kind, tuple(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return f"PhasePolynomial(0, {self.kind})"
        parts = [f"({c:.6g})q^{a}p^{b}" for (a, b), c in self.terms.items()]
        return f"PhasePolynomial({' + '.join(parts)}, {self.kind})"


def defect(x, y):
    """Largest coefficient of ``x - y``."""
    return (x - y).max_abs()


def poisson_bracket(u, v):
    """``{u, v} = du/dq dv/dp - du/dp dv/dq`` on classical polynomials."""
    for w in (u, v):
        if not isinstance(w, PhasePolynomial) or w.kind != CLASSICAL:
            raise TypeError("poisson_bracket requires classical polynomials")
    return u.dq() * v.dp() - u.dp() * v.dq()


def _reorder(b, c):
    """``p^b q^c`` in normal order: ``sum_k k! C(b,k) C(c,k) (-i)^k q^(c-k) p^(b-k)``."""
    out = {}
    for k in range(min(b, c) + 1):
        out[(c - k, b - k)] = factorial(k) * comb(b, k) * comb(c, k) * (-1j) ** k
    return out


def weyl_product(a, b):
    """Normal-ordered product of quantum polynomials under ``[q, p] = i``."""
    for w in (a, b):
        if not isinstance(w, PhasePolynomial) or w.kind != QUANTUM:
            raise TypeError("weyl_product requires quantum polynomials")
    out = {}
    for (i, j), c in a.terms.items():
        for (k, l), d in b.terms.items():
            for (m, n), e in _reorder(j, k).items():
                key = (i + m, n + l)
                out[key] = out.get(key, 0) + c * d * e
    return PhasePolynomial(out, QUANTUM)


def commutator(a, b):
    return weyl_product(a, b) - weyl_product(b, a)


def similarity_flow(x, omega):
    """``e^(omega pq) x e^(-omega pq)``: monomial ``q^a p^b`` gains ``e^(-i omega (a-b))``."""
    omega = complex(omega)
    return PhasePolynomial(
        {(a, b): c * np.exp(-1j * omega * (a - b)) for (a, b), c in x.terms.items()}, x.kind
    )


def pt_conjugate(x):
    """Antilinear rule ``q -> -q``, ``p -> p`` with conjugated coefficients."""
    return PhasePolynomial(
        {(a, b): (-1) ** a * np.conj(c) for (a, b), c in x.terms.items()}, x.kind
    )


def transformed_pt(x, omega):
    """Action of ``(PT)' = e^(omega pq) PT e^(-omega pq)`` by conjugation on ``x``.

    Moving ``PT`` past ``e^(-omega pq)`` turns it into ``e^(omega* pq)``,
    so the action is the base rule followed by the two similarity flows.
    """
    return similarity_flow(similarity_flow(pt_conjugate(x), np.conj(omega)), omega)


@dataclass(frozen=True)
class SymplecticMap:
    M: np.ndarray

    @classmethod
    def from_omega(cls, omega):
        omega = complex(omega)
        return cls(np.diag([np.exp(-1j * omega), np.exp(1j * omega)]))

    @property
    def defect(self):
        return symplectic_check(self.M)


def symplectic_check(m):
    """``||M J M^T - J||_2`` with ``J = i sigma_2``."""
    m = np.asarray(m, dtype=np.complex128)
    if m.shape != (2, 2):
        raise ValidationError("symplectic_check needs a 2x2 matrix")
    return float(np.linalg.norm(m @ J @ m.T - J, 2))


@dataclass(frozen=True)
class ClassicalPTReport:
    omega: complex
    linear_part: np.ndarray  # acts after complex conjugation
    symplectic_defect: float
    defect: float
    samples: tuple


def classical_pt_transform(omega, samples=None):
    """Transform ``PT = -sigma_3 K`` by ``M = exp(-i omega sigma_3)``.

    ``(PT)' = M (-sigma_3 K) M^-1 = [M (-sigma_3) conj(M^-1)] K``; on
    ``eta' = M eta`` with real ``eta`` it must act as ``-sigma_3``.
    """
    omega = complex(omega)
    m = SymplecticMap.from_omega(omega).M
    lin = m @ (-SIGMA3) @ np.conj(np.linalg.inv(m))
    if samples is None:
        samples = [(1.0, 2.0), (0.0, 0.0), (-0.5, 3.0), (2.5, -1.25)]
    worst = 0.0
    for eta in samples:
        eta = np.asarray(eta, dtype=float)
        primed = m @ eta
        worst = max(worst, float(np.max(np.abs(lin @ np.conj(primed) + SIGMA3 @ primed), initial=0.0)))
    return ClassicalPTReport(omega, lin, symplectic_check(m), worst, tuple(map(tuple, samples)))


@dataclass(frozen=True)
class QuantumPTReport:
    omega: complex
    q_defect: float
    p_defect: float
    commutator_defect: float

    @property
    def passed(self):
        return max(self.q_defect, self.p_defect, self.commutator_defect) <= 1e-13


def pt_conjugate_check(omega):
    """``(PT)' q' (TP)' = -q'`` and ``(PT)' p' (TP)' = p'`` for ``x' = e^(omega pq) x e^(-omega pq)``."""
    omega = complex(omega)
    q, p = PhasePolynomial.q(QUANTUM), PhasePolynomial.p(QUANTUM)
    qq, pp = similarity_flow(q, omega), similarity_flow(p, omega)
    dq = defect(transformed_pt(qq, omega), -qq)
    dp = defect(transformed_pt(pp, omega), pp)
    dc = defect(commutator(qq, pp), PhasePolynomial.const(1j, QUANTUM))
    return QuantumPTReport(omega, dq, dp, dc)


def random_polynomial(rng, degree=3, kind=CLASSICAL, low=-3, high=4):
    """Integer-coefficient polynomial of total degree <= ``degree``."""
    terms = {}
    for a in range(degree + 1):
        for b in range(degree + 1 - a):
            terms[(a, b)] = complex(rng.integers(low, high), rng.integers(low, high))
    return PhasePolynomial(terms, kind)


def algebra_report(omegas=None, seed=0, trials=10):
    """Run every identity of the module; returns a dict of named defects."""
    rng = np.random.default_rng(seed)
    jacobi = leibniz = assoc = invol = 0.0
    for _ in range(trials):
        u, v, w = (random_polynomial(rng) for _ in range(3))
        jac = (poisson_bracket(u, poisson_bracket(v, w)) + poisson_bracket(v, poisson_bracket(w, u))
               + poisson_bracket(w, poisson_bracket(u, v)))
        jacobi = max(jacobi, jac.max_abs())
        leibniz = max(leibniz, defect(poisson_bracket(u * v, w),
                                      u * poisson_bracket(v, w) + poisson_bracket(u, w) * v))
        a, b, c = (random_polynomial(rng, kind=QUANTUM) for _ in range(3))
        assoc = max(assoc, defect(weyl_product(a, weyl_product(b, c)), weyl_product(weyl_product(a, b), c)))
        invol = max(invol, defect(pt_conjugate(pt_conjugate(a)), a))
    if omegas is None:
        re, im = np.meshgrid(np.linspace(-1.0, 1.0, 5), np.linspace(-0.8, 0.8, 4))
        omegas = (re + 1j * im).ravel()
    qc, pc = PhasePolynomial.q(), PhasePolynomial.p()
    qq, pq = PhasePolynomial.q(QUANTUM), PhasePolynomial.p(QUANTUM)
    one = PhasePolynomial.const(1)
    out = {
        "jacobi": jacobi,
        "leibniz": leibniz,
        "associativity": assoc,
        "pt_involution": invol,
        "poisson_qp": defect(poisson_bracket(qc, pc), one),
        "commutator_qp": defect(commutator(qq, pq), PhasePolynomial.const(1j, QUANTUM)),
    }
    flow, comm, tpt, cpt, symp = 0.0, 0.0, 0.0, 0.0, 0.0
    for w in omegas:
        flow = max(flow, defect(similarity_flow(qq, w), qq.scale(np.exp(-1j * w))),
                   defect(similarity_flow(pq, w), pq.scale(np.exp(1j * w))))
        rep = pt_conjugate_check(w)
        comm = max(comm, rep.commutator_defect)
        tpt = max(tpt, rep.q_defect, rep.p_defect)
        c = classical_pt_transform(w)
        cpt = max(cpt, c.defect)
        symp = max(symp, c.symplectic_defect)
    out.update(flow_factors=flow, flow_commutator=comm, transformed_pt=tpt,
               classical_pt=cpt, symplectic=symp)
    return out
