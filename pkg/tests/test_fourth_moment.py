"""Block kernels, estimation, verdict logic, and the KS side channel."""

import math
from fractions import Fraction

import numpy as np
import pytest

from chaoslab import fourth_moment as fm
from chaoslab.chaos import exact_moment, sample_batch
from chaoslab.exact import EC
from chaoslab.tensor import ComplexKernel


class TestBlockKernel:
    def test_single_block_second_moment(self):
        phi = fm.gen_block_kernel(1, 2, 1)
        assert exact_moment([phi, (phi, True)]) == EC(2)

    def test_unbalanced_square_vanishes_for_all_k(self):
        for k in (1, 2, 4):
            phi = fm.gen_block_kernel(1, 2, k)
            assert exact_moment([phi, phi]) == EC(0)

    def test_balanced_single_block_is_degenerate(self):
        phi = fm.gen_block_kernel(1, 1, 1)
        sq = exact_moment([phi, phi])
        abs2 = exact_moment([phi, (phi, True)])
        assert sq == abs2 == EC(1)  # real-valued: a = 1, b = 0

    def test_second_moment_is_k_independent(self):
        for k in (1, 2, 4):
            phi = fm.gen_block_kernel(1, 2, k)
            assert exact_moment([phi, (phi, True)]) == EC(2)

    def test_exactness_window(self):
        assert fm.gen_block_kernel(1, 2, 2).is_exact()   # 1/sqrt(2) in the field
        assert fm.gen_block_kernel(1, 2, 9).is_exact()   # perfect square
        assert not fm.gen_block_kernel(1, 2, 3).is_exact()

    def test_validation(self):
        with pytest.raises(ValueError):
            fm.gen_block_kernel(1, 0, 2)
        with pytest.raises(ValueError):
            fm.gen_block_kernel(1, 2, 0)


class TestTrajectoryLaw:
    def test_offdiagonal_blocks(self):
        base = fm.exact_report(fm.gen_block_kernel(1, 2, 1))
        assert base.abs4 == 176.0
        limit = 2 * base.abs2 ** 2
        c = base.abs4 - limit
        for k in (2, 4):
            rep = fm.exact_report(fm.gen_block_kernel(1, 2, k))
            assert rep.abs4 == limit + c / k  # exact dyadic arithmetic

    def test_balanced_blocks(self):
        base = fm.exact_report(fm.gen_block_kernel(1, 1, 1))
        assert base.abs4 == 9.0
        limit = 2 * base.abs2 ** 2 + abs(base.sq) ** 2
        c = base.abs4 - limit
        rep = fm.exact_report(fm.gen_block_kernel(1, 1, 2))
        assert rep.abs4 == limit + c / 2

    def test_reference_trajectory_matches_exact_reports(self):
        refs = fm.block_reference_trajectory(1, 2, [1, 2, 4])
        for k in (1, 2, 4):
            rep = fm.exact_report(fm.gen_block_kernel(1, 2, k))
            assert refs[k]["abs4"].real == rep.abs4
            assert refs[k]["abs2"].real == rep.abs2
            assert refs[k]["sq"] == rep.sq


class TestEstimate:
    def test_exact_mode_matches_oracle(self):
        phi = fm.gen_block_kernel(1, 2, 2)
        rep = fm.estimate(phi, 10, seed=0, mode="exact")
        assert rep.exact and rep.abs4_se == 0.0
        assert rep == fm.exact_report(phi, seed=0)

    def test_deterministic_per_seed(self):
        phi = fm.gen_block_kernel(1, 2, 2)
        assert fm.estimate(phi, 5000, seed=3) == fm.estimate(phi, 5000, seed=3)

    def test_worker_count_invariance(self):
        phi = fm.gen_block_kernel(1, 2, 4)
        r1 = fm.estimate(phi, 20000, seed=5, workers=1)
        r4 = fm.estimate(phi, 20000, seed=5, workers=4)
        assert r1 == r4

    def test_isonormal_variance(self):
        phi = ComplexKernel(1, 0, 1, {((0,), ()): 1})
        rep = fm.estimate(phi, 100_000, seed=21)
        assert abs(rep.abs2 - 1.0) <= 5 * rep.abs2_se

    def test_five_sigma_coverage_over_seeds(self):
        phi = fm.gen_block_kernel(1, 2, 1)
        oracle = fm.exact_report(phi)
        hits = 0
        trials = 100
        for seed in range(trials):
            rep = fm.estimate(phi, 2000, seed=seed)
            ok = (abs(rep.abs2 - oracle.abs2) <= 5 * rep.abs2_se
                  and abs(rep.sq - oracle.sq) <= 5 * rep.sq_se)
            hits += ok
        assert hits >= 99

    def test_decomposed_pair_target(self):
        from chaoslab.chaos import decompose
        phi = fm.gen_block_kernel(1, 2, 2)
        pair = decompose(phi)
        a = fm.estimate(phi, 4000, seed=9)
        b = fm.estimate(pair, 4000, seed=9)
        assert a.abs2 == pytest.approx(b.abs2, rel=1e-9)
        assert a.t3 == pytest.approx(b.t3, rel=1e-9)

    def test_summed_target(self):
        phi = fm.gen_block_kernel(1, 1, 2)
        psi = fm.gen_block_kernel(2, 0, 2)
        mixed = [(EC(Fraction(1, 2)), phi), (EC(Fraction(1, 2)), psi)]
        rep = fm.estimate(mixed, 4000, seed=13)
        exact = fm.exact_report(mixed)
        assert abs(rep.abs2 - exact.abs2) <= 5 * rep.abs2_se

    def test_report_validation(self):
        with pytest.raises(ValueError):
            fm.MomentReport(n_samples=1, seed=0, exact=False, abs2=1, sq=0,
                            abs4=1, fourth=0, t3=0, abs2_se=-1)
        with pytest.raises(ValueError):
            fm.MomentReport(n_samples=0, seed=0, exact=True, abs2=1, sq=0,
                            abs4=1, fourth=0, t3=0, abs2_se=0.1)


class TestThirdMomentCombination:
    def test_real_sequence_reduces_to_four_cubes(self):
        # for a real-valued F the combination E[F^3 + 3|F|^2 conj F] is 4 E[F^3]
        phi = fm.gen_block_kernel(1, 1, 1)
        rep = fm.exact_report(phi)
        cube = fm.exact_mixed_moment([(EC(1), phi)], [False, False, False])
        assert rep.t3 == 4 * cube.to_complex()
        assert rep.t3.imag == 0


class TestCriterionSpec:
    def test_rejects_bad_parameters(self):
        with pytest.raises(fm.ConfigError):
            fm.CriterionSpec(case="gaussian-offdiag", sigma2=0.0)
        with pytest.raises(fm.ConfigError):
            fm.CriterionSpec(case="gaussian-diag", sigma2=1.0, a=1.0, b=0.5)
        with pytest.raises(fm.ConfigError):
            fm.CriterionSpec(case="unknown", sigma2=1.0)

    def test_chi2_odd_degree_excluded(self):
        with pytest.raises(fm.ConfigError):
            fm.CriterionSpec(case="chi2-offdiag", sigma2=2.0, m=1, n=2)
        fm.CriterionSpec(case="chi2-offdiag", sigma2=2.0, m=1, n=3)

    def test_multivariate_needs_distinct_degrees(self):
        with pytest.raises(fm.ConfigError):
            fm.CriterionSpec(case="multivariate", sigma2=1.0, degrees=(2, 2))
        fm.CriterionSpec(case="multivariate", sigma2=1.0, degrees=(2, 3))


class TestTargets:
    def test_gaussian_cases(self):
        offdiag = fm.case_targets(fm.CriterionSpec(case="gaussian-offdiag", sigma2=2.0))
        assert offdiag == {"abs2": 2.0, "sq": 0j, "abs4": 8.0}
        diag = fm.case_targets(
            fm.CriterionSpec(case="gaussian-diag", sigma2=1.0, a=0.5, b=0.0))
        assert diag["abs4"] == pytest.approx(2.25)
        dg = fm.case_targets(
            fm.CriterionSpec(case="gaussian-degenerate", sigma2=1.0, a=1.0))
        assert dg["abs4"] == 3.0 and dg["fourth"] == 3.0

    def test_chi2_targets_match_configured_law(self):
        # the stated limits coincide with the configured-law moments under
        # the variance-equals-alpha convention
        for a in (0.0, 0.5):
            sigma2 = 2.0
            spec = fm.CriterionSpec(case="chi2-diag" if a else "chi2-offdiag",
                                    sigma2=sigma2, a=a, m=1, n=1)
            targets = fm.case_targets(spec)
            law = fm.chi2_target_moments((1 + a) * sigma2 / 2, (1 - a) * sigma2 / 2)
            assert law["t3"] == pytest.approx(targets["t3"])
            assert law["abs4"] == pytest.approx(targets["abs4"])
            assert law["abs2"] == pytest.approx(targets["abs2"])

    def test_plain_convention_differs(self):
        law = fm.chi2_target_moments(1.0, 1.0, variance_is_alpha=False)
        assert law["abs2"] == 4.0  # Var = 2 alpha each


def synthetic_report(abs2, sq, abs4, se=0.01):
    return fm.MomentReport(n_samples=1000, seed=0, exact=False, abs2=abs2, sq=sq,
                           abs4=abs4, fourth=0j, t3=0j, abs2_se=se, sq_se=se,
                           abs4_se=se, fourth_se=se, t3_se=se)


class TestVerdict:
    def test_passing_trajectory(self):
        spec = fm.CriterionSpec(case="gaussian-offdiag", sigma2=1.0)
        reports = [(1, synthetic_report(1.0, 0j, 2.5)),
                   (4, synthetic_report(1.0, 0j, 2.1)),
                   (16, synthetic_report(1.0, 0j, 2.004))]
        v = fm.verdict(reports, spec)
        assert v.passed
        assert v.quantities["abs4"].trajectory_pass

    def test_fails_when_last_index_misses(self):
        spec = fm.CriterionSpec(case="gaussian-offdiag", sigma2=1.0)
        reports = [(1, synthetic_report(1.0, 0j, 2.5)),
                   (4, synthetic_report(1.0, 0j, 2.4))]
        v = fm.verdict(reports, spec)
        assert not v.passed
        assert not v.quantities["abs4"].rows[-1].passed

    def test_fails_on_growing_gap(self):
        spec = fm.CriterionSpec(case="gaussian-offdiag", sigma2=1.0)
        reports = [(1, synthetic_report(1.0, 0j, 2.004)),
                   (4, synthetic_report(1.0, 0j, 2.7))]
        v = fm.verdict(reports, spec)
        assert not v.quantities["abs4"].trajectory_pass

    def test_per_k_references(self):
        spec = fm.CriterionSpec(case="gaussian-offdiag", sigma2=1.0)
        refs = {1: {"abs4": 10.0}, 4: {"abs4": 4.0}, 16: {"abs4": 2.5}}
        reports = [(1, synthetic_report(1.0, 0j, 10.01)),
                   (4, synthetic_report(1.0, 0j, 3.99)),
                   (16, synthetic_report(1.0, 0j, 2.52))]
        v = fm.verdict(reports, spec, refs)
        assert v.passed  # per-k consistent and the gap to 2 sigma^4 shrinks

    def test_degenerate_autodetection(self):
        spec = fm.CriterionSpec(case="gaussian-diag", sigma2=1.0)
        reports = [(1, synthetic_report(1.0, 1.0 + 0j, 3.2)),
                   (4, synthetic_report(1.0, 1.0 + 0j, 3.01))]
        v = fm.verdict(reports, spec)
        assert v.case == "gaussian-degenerate"
        assert "fourth" in v.quantities
        assert any("degenerate" in note for note in v.notes)

    def test_explicit_degenerate_routing(self):
        spec = fm.CriterionSpec(case="gaussian-diag", sigma2=1.0, a=1.0, b=0.0)
        reports = [(1, synthetic_report(1.0, 1.0 + 0j, 3.0))]
        v = fm.verdict(reports, spec)
        assert "fourth" in v.quantities

    def test_reports_must_be_ordered(self):
        spec = fm.CriterionSpec(case="gaussian-offdiag", sigma2=1.0)
        with pytest.raises(ValueError):
            fm.verdict([(4, synthetic_report(1, 0j, 2)),
                        (1, synthetic_report(1, 0j, 2))], spec)

    def test_chi2_notes_carry_law_moments(self):
        spec = fm.CriterionSpec(case="chi2-offdiag", sigma2=2.0, m=1, n=1)
        reports = [(1, synthetic_report(2.0, 0j, 56.0))]
        v = fm.verdict(reports, spec)
        assert any("chi-square law" in note for note in v.notes)

    def test_multivariate_componentwise(self):
        specs = [fm.CriterionSpec(case="gaussian-offdiag", sigma2=1.0, m=1, n=1,
                                  total_degree=2),
                 fm.CriterionSpec(case="gaussian-offdiag", sigma2=1.0, m=1, n=2,
                                  total_degree=3)]
        reports = [[(1, synthetic_report(1.0, 0j, 2.001))],
                   [(1, synthetic_report(1.0, 0j, 2.001))]]
        out = fm.multivariate_verdict(specs, reports)
        assert out["pass"]
        with pytest.raises(fm.ConfigError):
            fm.multivariate_verdict([specs[0], specs[0]], reports)


class TestContractionTrajectory:
    def test_block_contractions_shrink(self):
        seq = [(k, fm.gen_block_kernel(1, 2, k)) for k in (1, 2, 4)]
        out = fm.contraction_trajectory(seq)
        vals = [r["max_contraction_norm_sq"] for r in out["rows"]]
        assert out["nonincreasing"] and out["pass"]
        assert vals[0] > vals[-1] > 0


def mixed_degree_two_target(k):
    """Fixed total degree 2, mixed bidegrees (2,0) and (1,1)."""
    return [(EC(Fraction(1, 2)), fm.gen_block_kernel(2, 0, k)),
            (EC(Fraction(1, 2)), fm.gen_block_kernel(1, 1, k))]


class TestMultichaos:
    def test_mixed_bidegree_moments(self):
        rep = fm.exact_report(mixed_degree_two_target(1))
        assert rep.abs2 == 0.75
        assert rep.sq == 0.25 + 0j  # a + ib = 1/3

    def test_mixed_bidegree_verdict(self):
        ks = (1, 2, 4)
        refs = {k: {q: fm.exact_report(mixed_degree_two_target(k)).value(q)
                    for q in fm.QUANTITIES}
                for k in ks}
        reports = [(k, fm.estimate(mixed_degree_two_target(k), 40_000, seed=808))
                   for k in ks]
        spec = fm.CriterionSpec(case="multichaos", sigma2=0.75, a=1 / 3, b=0.0,
                                total_degree=2)
        v = fm.verdict(reports, spec, refs)
        assert v.passed
        assert v.quantities["abs4"].limit == pytest.approx((1 / 9 + 2) * 0.75 ** 2)

    def test_mixed_contraction_condition(self):
        from chaoslab.chaos import decompose
        half = EC(Fraction(1, 2))
        vals = []
        for k in (1, 2, 4):
            u = v = None
            for coeff, kern in mixed_degree_two_target(k):
                du, dv = decompose(kern)
                du, dv = coeff * du, coeff * dv
                u = du if u is None else u + du
                v = dv if v is None else v + dv
            norms = fm.contraction_norms_sq(u) + fm.contraction_norms_sq(v)
            vals.append(max(norms))
        assert vals[0] > vals[1] > vals[2] > 0


class TestCrossMoments:
    def test_matches_oracle_at_small_k(self):
        low = fm.gen_block_kernel(1, 1, 4)
        high = fm.gen_block_kernel(2, 2, 4)
        out = fm.estimate_cross_moments(high, low, 40_000, seed=99)
        want = exact_moment([low, low, high]).to_complex()
        assert abs(out["square_cross"] - want) <= 5 * out["square_cross_se"]
        # the low component is real-valued here, so both cross moments agree
        assert out["abs_cross"] == pytest.approx(out["square_cross"])

    def test_cross_conditions_shrink_along_k(self):
        # degrees 2 and 4 with aligned blocks: cross moments decay like 1/sqrt(k)
        vals = []
        for k in (4, 16, 64):
            out = fm.estimate_cross_moments(fm.gen_block_kernel(2, 2, k),
                                            fm.gen_block_kernel(1, 1, k),
                                            20_000, seed=99)
            vals.append(abs(out["square_cross"]))
        assert vals[0] > vals[1] > vals[2] > 0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            fm.estimate_cross_moments(fm.gen_block_kernel(1, 1, 2),
                                      fm.gen_block_kernel(1, 1, 4), 1000, seed=0)


class TestComponentGaps:
    def test_gaps_are_nonnegative(self):
        for kern in (fm.gen_block_kernel(1, 2, 1), fm.gen_block_kernel(1, 1, 2),
                     fm.gen_block_kernel(2, 0, 1)):
            for gap in fm.component_gaps(kern):
                assert gap.is_real() and gap.real_sign() >= 0


class TestKolmogorovSmirnov:
    def test_exact_normals_pass(self):
        xs = sample_batch(1, 1_000_000, seed=29).xi[:, 0]
        d, p = fm.ks_distance(xs, fm.normal_cdf())
        assert d < 1.95 / math.sqrt(1_000_000)
        assert p > 0.01

    def test_constant_samples_maximal_mismatch(self):
        d, p = fm.ks_distance(np.zeros(1000), fm.normal_cdf())
        assert d >= 0.5
        assert p < 1e-6

    def test_needs_enough_samples(self):
        with pytest.raises(ValueError):
            fm.ks_distance(np.zeros(10), fm.normal_cdf())

    def test_degenerate_targets_rejected(self):
        with pytest.raises(ValueError):
            fm.normal_cdf(0.0, 0.0)
        with pytest.raises(ValueError):
            fm.centered_chi2_cdf(0.0)

    def test_chi2_cdf_shape(self):
        cdf = fm.centered_chi2_cdf(4.0)  # variance 4 => 2 dof, support (-2, inf)
        assert float(cdf(-2.0)) == 0.0
        assert float(cdf(0.0)) == pytest.approx(1 - math.exp(-1))
        got = fm.centered_chi2_cdf(4.0, variance_is_alpha=False)
        assert float(got(0.0)) == pytest.approx(1 - math.exp(-2) * 3, rel=1e-6)

    def test_chi2_samples_match_their_cdf(self):
        rng = np.random.default_rng(31)
        nu = 2.0
        samples = rng.chisquare(nu, size=200_000) - nu
        d, p = fm.ks_distance(samples, fm.centered_chi2_cdf(2 * nu))
        assert p > 0.01

    def test_component_collection(self):
        phi = fm.gen_block_kernel(1, 2, 2)
        re = fm.collect_component_samples(phi, 500, seed=41, component="re")
        im = fm.collect_component_samples(phi, 500, seed=41, component="im")
        batch = sample_batch(2, 500, seed=41)
        from chaoslab.chaos import eval_complex
        f = eval_complex(phi, batch)
        assert np.allclose(re, f.real) and np.allclose(im, f.imag)
