"""Shared matrix families and random corpora for the test suite."""
import numpy as np

SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA3 = np.diag([1.0, -1.0]).astype(complex)
S_GRID = (0.25, 0.5, 1.0, 1.5, 2.0, 3.0)


def m_family(s):
    """Two-level family with eigenvalues ``1 +- sqrt(s^2 - 1)`` and ``P = sigma_1``, ``T = K``."""
    return np.array([[1 + 1j, s], [s, 1 - 1j]], dtype=complex)


def exact_energies(s):
    root = np.sqrt(complex(s * s - 1))
    return np.array([1 - root, 1 + root])


def random_complex(rng, shape, scale=1.0):
    return scale * (rng.uniform(-1, 1, shape) + 1j * rng.uniform(-1, 1, shape))


def real_involution(rng, n):
    """Random real orthogonal ``A`` with ``A @ A = I`` and both eigenvalues +-1 present."""
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    k = rng.integers(1, n)
    d = np.array([1.0] * k + [-1.0] * (n - k))
    return (q * d) @ q.T


def pt_symmetric(rng, n=4):
    """``H = B + A conj(B) A`` so that ``A conj(H) A = H``; returns ``(H, A)``."""
    a = real_involution(rng, n)
    b = random_complex(rng, (n, n))
    return b + a @ np.conj(b) @ a, a


def pt_even_field(rng, a):
    c = random_complex(rng, a.shape)
    return c + a @ np.conj(c) @ a


def pt_corpus(seed, count, n=4):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        h, a = pt_symmetric(rng, n)
        out.append((h, a, pt_even_field(rng, a)))
    return out


def random_hermitian(rng, n=4):
    x = random_complex(rng, (n, n))
    return (x + x.conj().T) / 2


def with_spectrum(rng, energies):
    """Non-normal matrix ``S diag(E) S^-1`` with a well-conditioned random ``S``."""
    n = len(energies)
    s = np.eye(n) + 0.3 * random_complex(rng, (n, n))
    return s @ np.diag(energies) @ np.linalg.inv(s)
