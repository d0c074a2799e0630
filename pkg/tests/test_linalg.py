import numpy as np
import pytest

from momiht import linalg

from oracles import jacobi_eigvalsh, singular_values_via_gram


class TestExtremeEigs:
    def test_identity(self):
        lo, hi = linalg.extreme_eigs_sym(np.eye(3))
        assert lo == pytest.approx(1.0) and hi == pytest.approx(1.0)

    def test_diagonal(self):
        lo, hi = linalg.extreme_eigs_sym(np.diag([0.25, 4.0]))
        assert lo == pytest.approx(0.25) and hi == pytest.approx(4.0)

    def test_matches_jacobi_oracle_on_gram(self):
        rng = np.random.default_rng(7)
        Phi = rng.standard_normal((9, 6))
        G = Phi.T @ Phi
        lo, hi = linalg.extreme_eigs_sym(G)
        w = jacobi_eigvalsh(G)
        assert lo == pytest.approx(w[0], abs=1e-8)
        assert hi == pytest.approx(w[-1], abs=1e-8)

    def test_rayleigh_quotient_bracket(self):
        rng = np.random.default_rng(3)
        M = rng.standard_normal((8, 8))
        M = M + M.T
        lo, hi = linalg.extreme_eigs_sym(M)
        for _ in range(100):
            v = rng.standard_normal(8)
            q = (v @ M @ v) / (v @ v)
            assert lo - 1e-10 <= q <= hi + 1e-10

    def test_rejects_nonsymmetric(self):
        with pytest.raises(ValueError, match="symmetric"):
            linalg.extreme_eigs_sym(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError, match="finite"):
            linalg.extreme_eigs_sym(np.array([[np.nan, 0.0], [0.0, 1.0]]))


class TestTruncatedSvd:
    def test_rank_one_exact(self):
        u = np.array([1.0, 2.0, -1.0])
        v = np.array([0.5, 1.5])
        M = np.outer(u, v)
        U, s, V = linalg.truncated_svd(M, 1)
        assert np.linalg.norm(M - U @ np.diag(s) @ V.T) < 1e-12

    def test_diagonal_truncation(self):
        U, s, V = linalg.truncated_svd(np.diag([3.0, 2.0, 1.0]), 2)
        assert s == pytest.approx([3.0, 2.0])
        err = np.linalg.norm(np.diag([3.0, 2.0, 1.0]) - U @ np.diag(s) @ V.T)
        assert err == pytest.approx(1.0)

    def test_singular_values_match_gram_oracle(self):
        rng = np.random.default_rng(11)
        M = rng.standard_normal((8, 5))
        _, s, _ = linalg.truncated_svd(M, 3)
        assert np.allclose(s, singular_values_via_gram(M)[:3], atol=1e-8)

    def test_orthonormal_factors(self):
        rng = np.random.default_rng(5)
        M = rng.standard_normal((7, 6))
        U, s, V = linalg.truncated_svd(M, 4)
        assert np.max(np.abs(U.T @ U - np.eye(4))) < 1e-8
        assert np.max(np.abs(V.T @ V - np.eye(4))) < 1e-8

    def test_beats_random_low_rank_candidates(self):
        rng = np.random.default_rng(13)
        for _ in range(5):
            M = rng.standard_normal((6, 7))
            r = int(rng.integers(1, 4))
            U, s, V = linalg.truncated_svd(M, r)
            best = np.linalg.norm(M - U @ np.diag(s) @ V.T)
            for _ in range(50):
                Y = rng.standard_normal((6, r)) @ rng.standard_normal((r, 7))
                assert best <= np.linalg.norm(M - Y) + 1e-12

    def test_rank_out_of_range(self):
        with pytest.raises(ValueError, match="out of range"):
            linalg.truncated_svd(np.eye(3), 4)
        with pytest.raises(ValueError, match="out of range"):
            linalg.truncated_svd(np.eye(3), 0)


class TestRestrictedLs:
    def test_orthonormal_single_column(self):
        Q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((6, 4)))
        b = np.random.default_rng(1).standard_normal(6)
        x = linalg.solve_restricted_ls(Q, b, [2])
        assert x[2] == pytest.approx(Q[:, 2] @ b)
        assert np.all(x[[0, 1, 3]] == 0.0)

    def test_full_support_square(self):
        rng = np.random.default_rng(2)
        Phi = rng.standard_normal((4, 4))
        b = rng.standard_normal(4)
        x = linalg.solve_restricted_ls(Phi, b, range(4))
        assert np.allclose(x, np.linalg.solve(Phi, b), atol=1e-10)

    def test_matches_normal_equations(self):
        rng = np.random.default_rng(4)
        Phi = rng.standard_normal((10, 4))
        b = rng.standard_normal(10)
        support = [1, 3]
        x = linalg.solve_restricted_ls(Phi, b, support)
        sub = Phi[:, support]
        expected = np.linalg.solve(sub.T @ sub, sub.T @ b)  # explicit 2x2 system
        assert np.allclose(x[support], expected, atol=1e-10)

    def test_residual_orthogonality(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            Phi = rng.standard_normal((12, 8))
            b = rng.standard_normal(12)
            support = sorted(rng.choice(8, size=3, replace=False))
            x = linalg.solve_restricted_ls(Phi, b, support)
            resid = b - Phi @ x
            assert np.max(np.abs(Phi[:, support].T @ resid)) <= 1e-8 * np.linalg.norm(b)

    def test_empty_support_is_zero(self):
        x = linalg.solve_restricted_ls(np.eye(3), np.ones(3), [])
        assert np.all(x == 0.0)

    def test_rank_deficient_raises(self):
        Phi = np.ones((5, 3))  # duplicate columns
        with pytest.raises(np.linalg.LinAlgError, match="rank deficient"):
            linalg.solve_restricted_ls(Phi, np.ones(5), [0, 1])

    def test_bad_index(self):
        with pytest.raises(ValueError, match="out of range"):
            linalg.solve_restricted_ls(np.eye(3), np.ones(3), [5])


class TestTextFormat:
    def test_matrix_round_trip(self, tmp_path):
        rng = np.random.default_rng(8)
        M = rng.standard_normal((4, 3))
        path = tmp_path / "m.txt"
        linalg.save_matrix(path, M)
        assert np.array_equal(linalg.load_matrix(path), M)

    def test_vector_round_trip(self, tmp_path):
        v = np.array([1.5, -2.25, 1e-17])
        path = tmp_path / "v.txt"
        linalg.save_vector(path, v)
        assert np.array_equal(linalg.load_vector(path), v)

    def test_header_mismatch(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("2 2\n1 2 3\n4 5 6\n")
        with pytest.raises(ValueError):
            linalg.load_matrix(path)

    def test_vector_rejects_matrix(self, tmp_path):
        path = tmp_path / "m.txt"
        linalg.save_matrix(path, np.eye(2))
        with pytest.raises(ValueError, match="not a vector"):
            linalg.load_vector(path)

    def test_atomic_write_leaves_no_temp(self, tmp_path):
        linalg.atomic_write_text(tmp_path / "a.txt", "hello")
        assert [p.name for p in tmp_path.iterdir()] == ["a.txt"]
