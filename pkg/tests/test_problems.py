import numpy as np
import pytest

from momiht import models, problems, solvers
from momiht.solvers import SolverConfig

from oracles import pairwise_auc


class TestIidGaussian:
    def test_noiseless_consistency(self):
        inst = problems.gen_iid_gaussian(50, 30, 4, noise_sigma=0.0, seed=0)
        assert np.linalg.norm(inst.objective.b - inst.objective.Phi @ inst.truth) == 0.0
        assert inst.noise is None

    def test_noisy_construction_identity(self):
        inst = problems.gen_iid_gaussian(50, 30, 4, noise_sigma=0.3, seed=1)
        assert np.array_equal(inst.objective.b, inst.objective.Phi @ inst.truth + inst.noise)

    def test_truth_normalized_and_sparse(self):
        inst = problems.gen_iid_gaussian(60, 20, 5, seed=2)
        assert np.count_nonzero(inst.truth) == 5
        assert np.linalg.norm(inst.truth) == pytest.approx(1.0)

    def test_seed_determinism(self):
        a = problems.gen_iid_gaussian(40, 25, 3, noise_sigma=0.2, seed=7)
        b = problems.gen_iid_gaussian(40, 25, 3, noise_sigma=0.2, seed=7)
        assert np.array_equal(a.objective.Phi, b.objective.Phi)
        assert np.array_equal(a.objective.b, b.objective.b)
        assert np.array_equal(a.truth, b.truth)

    def test_distinct_seeds_differ(self):
        a = problems.gen_iid_gaussian(40, 25, 3, seed=7)
        b = problems.gen_iid_gaussian(40, 25, 3, seed=8)
        assert not np.array_equal(a.objective.Phi, b.objective.Phi)

    def test_overshoot_budget_is_usable(self):
        # a larger solver budget (e.g. a phase-transition estimate) is legal input
        inst = problems.gen_iid_gaussian(100, 70, 5, seed=3)
        trace = solvers.acc_iht(inst.objective, inst.model, SolverConfig(k=24, max_iter=300))
        assert np.count_nonzero(trace.final) <= 24

    def test_invalid_dimensions(self):
        with pytest.raises(ValueError):
            problems.gen_iid_gaussian(10, 5, 11)
        with pytest.raises(ValueError):
            problems.gen_iid_gaussian(10, 0, 2)


class TestAr1:
    def test_default_split_shapes(self):
        train, test = problems.gen_ar1(seed=0)
        assert train.objective.Phi.shape == (400, 200)
        assert test.objective.Phi.shape == (400, 200)

    def test_unit_column_norms(self):
        train, test = problems.gen_ar1(n=50, m_total=200, k=5, seed=1)
        Phi = np.vstack([train.objective.Phi, test.objective.Phi])
        # rows are permuted relative to generation but column norms survive
        assert np.allclose(np.linalg.norm(Phi, axis=0), 1.0, atol=1e-12)

    def test_realized_snr_exact(self):
        train, test = problems.gen_ar1(n=60, m_total=160, k=6, snr=10.0, seed=2)
        Phi = np.vstack([train.objective.Phi, test.objective.Phi])
        eps = np.concatenate([train.noise, test.noise])
        x = train.truth
        ratio = np.linalg.norm(Phi @ x) ** 2 / np.linalg.norm(eps) ** 2
        assert ratio == pytest.approx(10.0, abs=1e-9)

    def test_construction_identity_per_split(self):
        train, test = problems.gen_ar1(n=40, m_total=100, k=4, seed=3)
        for inst in (train, test):
            rebuilt = inst.objective.Phi @ inst.truth + inst.noise
            assert np.array_equal(inst.objective.b, rebuilt)

    def test_zero_correlation_decorrelates_columns(self):
        train, _ = problems.gen_ar1(n=30, m_total=2000, rho=0.0, k=3, seed=4)
        Phi = train.objective.Phi
        corr = [
            float(Phi[:, j] @ Phi[:, j + 1]) / (np.linalg.norm(Phi[:, j]) * np.linalg.norm(Phi[:, j + 1]))
            for j in range(0, 29)
        ]
        assert np.mean(np.abs(corr)) < 0.1

    def test_positive_correlation_is_visible(self):
        train, _ = problems.gen_ar1(n=30, m_total=2000, rho=0.4, k=3, seed=4)
        Phi = train.objective.Phi
        corr = [np.corrcoef(Phi[:, j], Phi[:, j + 1])[0, 1] for j in range(0, 29)]
        assert np.mean(corr) == pytest.approx(0.4, abs=0.08)

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            problems.gen_ar1(rho=1.0)
        with pytest.raises(ValueError):
            problems.gen_ar1(snr=0.0)


class TestMatrixCompletion:
    def test_full_mask_equals_dense_objective(self):
        inst = problems.gen_matrix_completion(6, 7, 2, 1.0, seed=0)
        rng = np.random.default_rng(1)
        X = rng.standard_normal((6, 7))
        dense = 0.5 * np.sum((X - inst.truth) ** 2)
        assert inst.objective.value(X) == pytest.approx(dense)

    def test_planted_rank_exact(self):
        inst = problems.gen_matrix_completion(30, 40, 3, 0.35, seed=1)
        s = np.linalg.svd(inst.truth, compute_uv=False)
        assert np.all(s[:3] > 1e-6)
        assert np.all(s[3:] < 1e-10 * s[0])

    def test_observation_count(self):
        inst = problems.gen_matrix_completion(10, 12, 2, 0.35, seed=2)
        assert inst.objective.n_observed == int(0.35 * 120)

    def test_large_rank_accepted(self):
        inst = problems.gen_matrix_completion(80, 90, 60, 0.35, seed=3)
        assert inst.model.r == 60

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            problems.gen_matrix_completion(5, 5, 6, 0.5)
        with pytest.raises(ValueError):
            problems.gen_matrix_completion(5, 5, 2, 0.0)


class TestSupportAuc:
    def test_perfect_scores(self):
        truth = np.zeros(10, dtype=bool)
        truth[[2, 5]] = True
        scores = truth.astype(float)
        assert problems.support_auc(scores, truth) == 1.0

    def test_matches_pairwise_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            n = int(rng.integers(20, 200))
            truth = np.zeros(n, dtype=bool)
            truth[rng.choice(n, size=max(1, n // 10), replace=False)] = True
            scores = np.round(rng.standard_normal(n), 1)  # rounding makes ties
            got = problems.support_auc(scores, truth)
            assert got == pytest.approx(pairwise_auc(scores, truth), abs=1e-12)

    def test_degenerate_labels(self):
        assert problems.support_auc(np.ones(4), np.ones(4, dtype=bool)) is None


class TestEvaluate:
    def test_perfect_recovery(self):
        inst = problems.gen_iid_gaussian(30, 20, 3, seed=5)
        report = problems.evaluate(inst.truth, inst)
        assert report.relative_error == 0.0
        assert report.support_auc == 1.0
        assert report.exact_support_match is True

    def test_zero_estimate(self):
        inst = problems.gen_iid_gaussian(30, 20, 3, seed=6)
        report = problems.evaluate(np.zeros(30), inst)
        assert report.relative_error == pytest.approx(1.0)

    def test_accepts_trace(self):
        inst = problems.gen_iid_gaussian(30, 20, 3, seed=7)
        trace = solvers.acc_iht(inst.objective, inst.model, SolverConfig(), truth=inst.truth)
        report = problems.evaluate(trace, inst)
        assert report.relative_error < 1e-5

    def test_r2_on_test_split(self):
        train, test = problems.gen_ar1(n=60, m_total=200, k=5, seed=8)
        trace = solvers.acc_iht(train.objective, train.model, SolverConfig(eta=1e-9))
        report = problems.evaluate(trace, train, test=test)
        assert report.r2_test is not None and 0.5 < report.r2_test <= 1.0
        assert np.isfinite(report.train_loglik)

    def test_matrix_truth_skips_support_metrics(self):
        inst = problems.gen_matrix_completion(8, 9, 2, 0.6, seed=9)
        report = problems.evaluate(inst.truth, inst)
        assert report.support_auc is None
        assert report.exact_support_match is None
        assert report.relative_error == 0.0

    def test_missing_truth_raises(self):
        inst = problems.gen_iid_gaussian(20, 10, 2, seed=10)
        inst.truth = None
        with pytest.raises(ValueError, match="truth"):
            problems.evaluate(np.zeros(20), inst)


class TestInstanceIo:
    def test_least_squares_round_trip(self, tmp_path):
        inst = problems.gen_iid_gaussian(25, 15, 3, noise_sigma=0.2, seed=11)
        problems.save_instance(tmp_path / "inst", inst)
        loaded = problems.load_instance(tmp_path / "inst")
        assert np.array_equal(loaded.objective.Phi, inst.objective.Phi)
        assert np.array_equal(loaded.objective.b, inst.objective.b)
        assert np.array_equal(loaded.truth, inst.truth)
        assert np.array_equal(loaded.noise, inst.noise)
        assert loaded.model == inst.model
        assert loaded.seed == inst.seed
        assert loaded.descriptor == inst.descriptor

    def test_completion_round_trip(self, tmp_path):
        inst = problems.gen_matrix_completion(8, 9, 2, 0.5, seed=12)
        problems.save_instance(tmp_path / "inst", inst)
        loaded = problems.load_instance(tmp_path / "inst")
        assert loaded.objective.shape == inst.objective.shape
        assert np.array_equal(loaded.objective.values, inst.objective.values)
        assert np.array_equal(loaded.truth, inst.truth)
        assert loaded.model == inst.model

    def test_block_model_round_trips_one_based_groups(self, tmp_path):
        inst = problems.gen_iid_gaussian(6, 8, 2, seed=13)
        inst.model = models.BlockSparsity(((0, 1), (2, 3), (4, 5)), 2)
        problems.save_instance(tmp_path / "inst", inst)
        import json

        meta = json.loads((tmp_path / "inst" / "descriptor.json").read_text())
        assert meta["model"]["groups"][0] == [1, 2]
        loaded = problems.load_instance(tmp_path / "inst")
        assert loaded.model == inst.model
