import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from helpers import S_GRID, exact_energies, m_family, random_complex
from ptbench.errors import NumericalFailure, ValidationError
from ptbench.linalg_core import (
    SUPPORTED_DIM,
    SpectralClass,
    char_poly,
    eigen_system,
    eigenvectors,
    poly_roots,
    rank_nullspace,
    sort_roots,
)

seeds = st.integers(0, 2 ** 32 - 1)


def numpy_char_poly(h):
    """det(H - lambda I) from numpy's monic det(lambda I - H), degree-ascending."""
    n = h.shape[0]
    return (-1) ** n * np.poly(h)[::-1]


class TestCharPoly:
    @pytest.mark.parametrize("h, expected", [
        (m_family(2.0), [-2, -2, 1]),
        (np.eye(2), [1, -2, 1]),
        (np.diag([1 + 1j, 2]), [2 + 2j, -(3 + 1j), 1]),
        (m_family(0.5), [1.75, -2, 1]),
    ])
    def test_examples(self, h, expected):
        np.testing.assert_allclose(char_poly(h), expected, atol=1e-14)

    def test_leading_sign(self):
        for n in range(1, 7):
            assert char_poly(np.eye(n))[-1] == (-1) ** n

    def test_integer_input_exact(self):
        h = np.array([[2, -1, 0, 3], [1, 0, 4, -2], [0, 5, -1, 1], [2, 2, 1, 0]])
        c = char_poly(h)
        np.testing.assert_array_equal(c, np.round(c.real))

    @given(seeds, st.integers(1, 8))
    @settings(max_examples=40, deadline=None)
    def test_matches_numpy(self, seed, n):
        h = random_complex(np.random.default_rng(seed), (n, n))
        np.testing.assert_allclose(char_poly(h), numpy_char_poly(h), atol=1e-10)

    @pytest.mark.parametrize("bad", [np.zeros((2, 3)), np.array([[1, np.nan], [0, 1]]), np.zeros((0, 0))])
    def test_rejects_invalid(self, bad):
        with pytest.raises(ValidationError):
            char_poly(bad)


class TestPolyRoots:
    def test_real_pair(self):
        r = poly_roots([-2, -2, 1])
        np.testing.assert_allclose(r, [1 - np.sqrt(3), 1 + np.sqrt(3)], atol=1e-14)

    def test_double_root(self):
        np.testing.assert_allclose(poly_roots([1, -2, 1]), [1, 1], atol=1e-7)

    def test_complex_pair_sorted(self):
        r = poly_roots([1.75, -2, 1])
        np.testing.assert_allclose(r, [1 - 0.8660254037844386j, 1 + 0.8660254037844386j], atol=1e-14)

    def test_deterministic(self):
        c = [3 - 1j, 0.5, -2j, 1, 1 + 1j]
        np.testing.assert_array_equal(poly_roots(c), poly_roots(c))

    def test_iteration_cap_raises_with_residual(self):
        with pytest.raises(NumericalFailure) as info:
            poly_roots([1, 0, 0, 0, 0, 0, 1e-3, 1], max_iter=1)
        assert info.value.residual is not None and info.value.residual > 0

    @pytest.mark.parametrize("bad", [[1], [1, 0], [np.inf, 1]])
    def test_rejects_invalid(self, bad):
        with pytest.raises(ValidationError):
            poly_roots(bad)

    @given(seeds, st.integers(1, 10))
    @settings(max_examples=50, deadline=None)
    def test_matches_numpy_roots(self, seed, deg):
        c = random_complex(np.random.default_rng(seed), deg + 1)
        c[-1] = 1.0 + 0.5j
        ours = poly_roots(c)
        ref = sort_roots(np.roots(c[::-1]), scale=1.0)
        # match each reference root to its nearest computed one
        for z in ref:
            assert np.min(np.abs(ours - z)) < 1e-7 * (1 + abs(z))

    @given(seeds, st.integers(2, 8))
    @settings(max_examples=30, deadline=None)
    def test_residual_bound(self, seed, deg):
        c = random_complex(np.random.default_rng(seed), deg + 1)
        roots = poly_roots(c, tol=1e-9)
        scale = np.array([np.sum(np.abs(c) * np.abs(z) ** np.arange(deg + 1)) for z in roots])
        vals = np.abs(np.polynomial.polynomial.polyval(roots, c))
        assert np.all(vals <= 1e-9 * scale)


class TestRankNullspace:
    def test_zero(self):
        rank, basis = rank_nullspace(np.zeros((2, 2)))
        assert rank == 0
        np.testing.assert_allclose(np.abs(basis.conj().T @ basis), np.eye(2), atol=1e-15)

    def test_jordan_point(self):
        rank, basis = rank_nullspace(m_family(1.0) - np.eye(2))
        assert rank == 1 and basis.shape == (2, 1)
        v = basis[:, 0] / basis[0, 0]
        np.testing.assert_allclose(v, [1, -1j], atol=1e-14)

    def test_diag(self):
        rank, basis = rank_nullspace(np.diag([1.0, 0.0]))
        assert rank == 1
        np.testing.assert_allclose(np.abs(basis[:, 0]), [0, 1], atol=1e-15)

    def test_full_rank(self):
        rank, basis = rank_nullspace(np.eye(3))
        assert rank == 3 and basis.shape == (3, 0)

    @given(seeds, st.integers(2, 7), st.integers(0, 6))
    @settings(max_examples=50, deadline=None)
    def test_against_svd_oracle(self, seed, n, deficit):
        rng = np.random.default_rng(seed)
        r = max(n - deficit, 0)
        a = random_complex(rng, (n, r)) @ random_complex(rng, (r, n))
        rank, basis = rank_nullspace(a, tol=1e-9)
        ref = scipy.linalg.null_space(a, rcond=1e-9)
        assert rank == n - ref.shape[1] == r
        assert rank + basis.shape[1] == n
        np.testing.assert_allclose(basis.conj().T @ basis, np.eye(basis.shape[1]), atol=1e-12)
        if basis.size:
            assert np.linalg.norm(a @ basis) <= 1e-9 * np.linalg.norm(a, 2) * np.sqrt(n)
            # same subspace: projections agree
            np.testing.assert_allclose(basis @ basis.conj().T, ref @ ref.conj().T, atol=1e-8)

    @given(seeds)
    @settings(max_examples=20, deadline=None)
    def test_row_permutation_invariant(self, seed):
        rng = np.random.default_rng(seed)
        a = random_complex(rng, (5, 3)) @ random_complex(rng, (3, 5))
        assert rank_nullspace(a)[0] == rank_nullspace(a[rng.permutation(5)])[0] == 3


class TestEigenSystem:
    @pytest.mark.parametrize("s", S_GRID)
    def test_family_energies(self, s):
        spec = eigen_system(m_family(s))
        assert spec.n == 2
        np.testing.assert_allclose(np.sort_complex(spec.values()), np.sort_complex(exact_energies(s)), atol=1e-10)

    @pytest.mark.parametrize("s, cls", [(0.25, "ConjugatePairs"), (0.5, "ConjugatePairs"), (1.0, "JordanBlock"),
                                        (1.5, "RealComplete"), (2.0, "RealComplete"), (3.0, "RealComplete")])
    def test_family_classes(self, s, cls):
        assert eigen_system(m_family(s)).spectral_class.value == cls

    def test_jordan_point(self):
        spec = eigen_system(m_family(1.0))
        (e,) = spec.eigenvalues
        assert (e.algebraic, e.geometric) == (2, 1)
        assert abs(e.value - 1) < 1e-10

    def test_conjugate_pairing(self):
        spec = eigen_system(m_family(0.5))
        assert spec.pairing == ((0, 1),)
        assert spec.partner(0) == 1 and spec.partner(1) == 0
        assert not spec.pairing_violated

    def test_pairing_violated(self):
        spec = eigen_system(np.diag([1 + 1j, 2]))
        assert spec.pairing_violated and spec.pairing == ()

    def test_semisimple_degeneracy(self):
        spec = eigen_system(np.eye(3))
        (e,) = spec.eigenvalues
        assert (e.algebraic, e.geometric) == (3, 3)
        assert spec.spectral_class is SpectralClass.REAL_COMPLETE

    @pytest.mark.parametrize("h, mults", [
        (np.eye(4), [(4, 4)]),
        (np.array([[2, 1, 0], [0, 2, 1], [0, 0, 2.0]]), [(3, 1)]),
        (np.diag([1, 1, 1, 2.0]), [(3, 3), (1, 1)]),
        (np.kron(np.eye(2), np.array([[1, 1], [0, 1.0]])), [(4, 2)]),
    ])
    def test_higher_multiplicity(self, h, mults):
        spec = eigen_system(h)
        assert [(e.algebraic, e.geometric) for e in spec.eigenvalues] == mults

    def test_explicit_cluster_tol(self):
        spec = eigen_system(np.diag([1.0, 1.001]), cluster_tol=1e-2)
        (e,) = spec.eigenvalues
        assert e.algebraic == 2 and spec.cluster_tol == 1e-2

    def test_best_effort_flag(self):
        n = SUPPORTED_DIM + 1
        assert eigen_system(np.diag(np.arange(1.0, n + 1))).best_effort
        assert not eigen_system(np.eye(2)).best_effort

    @given(seeds)
    @settings(max_examples=40, deadline=None)
    def test_trace_and_det(self, seed):
        h = random_complex(np.random.default_rng(seed), (4, 4))
        vals = eigen_system(h).values()
        assert abs(vals.sum() - np.trace(h)) <= 1e-8 * max(1, abs(np.trace(h)))
        assert abs(np.prod(vals) - np.linalg.det(h)) <= 1e-8 * max(1, abs(np.linalg.det(h)))

    @given(seeds)
    @settings(max_examples=40, deadline=None)
    def test_char_poly_vanishes(self, seed):
        h = random_complex(np.random.default_rng(seed), (4, 4))
        c = char_poly(h)
        for z in eigen_system(h).values():
            scale = np.sum(np.abs(c) * abs(z) ** np.arange(5))
            assert abs(np.polynomial.polynomial.polyval(z, c)) <= 10 * 1e-9 * scale

    @given(seeds)
    @settings(max_examples=30, deadline=None)
    def test_similarity_invariant(self, seed):
        rng = np.random.default_rng(seed)
        h = random_complex(rng, (4, 4))
        s = np.eye(4) + 0.3 * random_complex(rng, (4, 4))
        a = np.sort_complex(eigen_system(h).values())
        b = np.sort_complex(eigen_system(s @ h @ np.linalg.inv(s)).values())
        np.testing.assert_allclose(a, b, atol=1e-6)

    @given(seeds)
    @settings(max_examples=30, deadline=None)
    def test_matches_numpy_eigvals(self, seed):
        h = random_complex(np.random.default_rng(seed), (5, 5))
        np.testing.assert_allclose(
            np.sort_complex(eigen_system(h).values()), np.sort_complex(np.linalg.eigvals(h)), atol=1e-8
        )

    def test_multiplicity_invariants(self):
        for h in (m_family(1.0), np.eye(3), np.diag([1, 1, 2.0]), np.array([[2, 1, 0], [0, 2, 1], [0, 0, 2.0]])):
            spec = eigen_system(h)
            assert spec.n == h.shape[0]
            for e in spec.eigenvalues:
                assert 1 <= e.geometric <= e.algebraic
            jordan = any(e.geometric < e.algebraic for e in spec.eigenvalues)
            assert jordan == (spec.spectral_class is SpectralClass.JORDAN_BLOCK)

    def test_eigenvectors(self):
        h = m_family(2.0)
        for e in eigen_system(h).eigenvalues:
            v = eigenvectors(h, e)
            assert v.shape == (2, 1)
            assert np.linalg.norm(h @ v - e.value * v) < 1e-12
