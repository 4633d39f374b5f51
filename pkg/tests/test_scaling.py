"""Joint scaling orchestration: families, fits, verdicts, censoring.

The verdict pipeline is validated against planted power laws where the
exponents are known by construction: alpha = c1/(ln N)^g1 and
kappa_c = c2/(ln N)^g2 give exact recovery through the log-log-log
regression, so every clause can be driven to pass or fail with crafted
inputs. Monte Carlo paths reuse the log2-readout family at a reduced
budget (expected numbers probed at seed 11 before freezing).
"""
import math

import numpy as np
import pytest

from driftlab.breakdown import make_ontology
from driftlab.errors import CensoringError, ConfigError
from driftlab.fields import SimConfig
from driftlab.scaling import (
    DEFAULT_SIZES,
    JointPoint,
    ScalingConfig,
    ScalingInstance,
    SystemFamily,
    consistent_exponents,
    default_family,
    fit_joint,
    joint_scaling_suite,
    measure_family,
    planted_points,
    readout_count,
    run_joint_scaling,
    scaling_rows,
    scaling_summary,
    write_scaling_csv,
    write_scaling_summary,
)

NS = (16, 64, 256, 1024, 4096)

# small enough to keep the whole module under ~20 s, large enough that
# the standard sizes stay in the asymptotic regime (probed: gamma1 1.025)
FAST = ScalingConfig(
    sim=SimConfig(dt=1e-3, noise=0.5, n_steps=4000, n_chains=4),
    rel_tol=0.05,
    n_trials=200,
    max_points=512,
)


def censor(p: JointPoint) -> JointPoint:
    inf = math.inf
    return JointPoint(n=p.n, alpha=p.alpha, alpha_ci=p.alpha_ci,
                      kappa_c=inf, kappa_ci=(inf, inf), note="no coupling")


class TestFamilyValidation:
    def test_default_family_shape(self):
        fam = default_family()
        assert fam.family_id == "log2-readout"
        assert fam.n_values == DEFAULT_SIZES
        assert "1/log N" in fam.note

    def test_generator_is_deterministic(self):
        fam = default_family(seed=4)
        a, b = fam.generator(64), fam.generator(64)
        assert np.array_equal(a.system.readout, b.system.readout)
        assert np.array_equal(a.ontology.p1, b.ontology.p1)
        assert np.array_equal(a.ontology.p2, b.ontology.p2)

    def test_readout_count_tracks_log2(self):
        assert readout_count(16) == 4
        assert readout_count(17) == 5
        assert readout_count(4096) == 12
        fam = default_family()
        assert fam.generator(256).system.readout.shape == (8, 4)

    def test_readout_rows_are_unit_norm(self):
        p = default_family(seed=9).generator(1024).system.readout
        assert np.allclose(np.linalg.norm(p, axis=1), 1.0)

    def test_sizes_move_the_ontology(self):
        fam = default_family(seed=4)
        assert fam.generator(16).ontology.n_primitives == 16
        assert fam.generator(4096).ontology.n_primitives == 4096

    def test_rejects_too_few_sizes(self):
        with pytest.raises(ConfigError, match="at least 5"):
            default_family(n_values=(16, 64, 256, 1024))

    def test_rejects_unsorted_sizes(self):
        with pytest.raises(ConfigError, match="strictly increasing"):
            default_family(n_values=(16, 64, 64, 256, 4096))

    def test_rejects_narrow_span(self):
        with pytest.raises(ConfigError, match="decades"):
            default_family(n_values=(16, 24, 32, 48, 64))

    def test_rejects_empty_id(self):
        with pytest.raises(ConfigError, match="family_id"):
            default_family(family_id="")

    def test_rejects_degenerate_sizes(self):
        with pytest.raises(ConfigError, match="at least 2"):
            SystemFamily("x", lambda n: None, (1, 10, 100, 1000, 10000))


class TestPlantedRecovery:
    def test_default_laws_recovered_exactly(self):
        # alpha = 1/ln N and kappa_c = 2/sqrt(ln N) on noise-free points
        rep = fit_joint(planted_points(NS))
        assert rep.gamma1 == pytest.approx(1.0, abs=1e-9)
        assert rep.c1 == pytest.approx(1.0, abs=1e-9)
        assert rep.gamma2 == pytest.approx(0.5, abs=1e-9)
        assert rep.c2 == pytest.approx(2.0, abs=1e-9)

    def test_recovery_within_band_on_many_laws(self):
        for g1, g2 in [(0.7, 0.3), (1.3, 1.0), (1.0, 0.5)]:
            rep = fit_joint(planted_points(NS, gamma1=g1, gamma2=g2))
            assert abs(rep.gamma1 - g1) < 0.05
            assert abs(rep.gamma2 - g2) < 0.05

    def test_planted_points_follow_the_laws(self):
        pts = planted_points((16, 256), gamma1=2.0, c1=3.0, gamma2=0.5, c2=2.0)
        assert pts[0].alpha == pytest.approx(3.0 / math.log(16) ** 2)
        assert pts[1].kappa_c == pytest.approx(2.0 / math.sqrt(math.log(256)))
        assert pts[0].alpha_ci == (pts[0].alpha, pts[0].alpha)
        assert not pts[0].censored

    def test_standard_errors_are_tiny_on_exact_laws(self):
        rep = fit_joint(planted_points(NS))
        assert rep.gamma1_se < 1e-9
        assert rep.gamma2_se < 1e-9


class TestVerdicts:
    def test_all_pass_on_well_behaved_laws(self):
        rep = fit_joint(planted_points(NS))
        assert rep.verdict_a is True
        assert rep.verdict_b is True
        assert rep.verdict_c is None
        assert rep.verdict_d is True

    def test_nonlinear_breakdown_curve_fails_linearity(self):
        pts = []
        for i, n in enumerate(NS):
            a = (1.0 / math.log(n)) * (2.2 if i % 2 else 0.4)
            k = 2.0 / math.sqrt(math.log(n))
            pts.append(JointPoint(n=n, alpha=a, alpha_ci=(a, a),
                                  kappa_c=k, kappa_ci=(k, k)))
        rep = fit_joint(pts)
        assert rep.verdict_a is False
        assert rep.alpha_fit.r_squared < 0.9
        # the other clauses judge their own numbers, not the fit quality
        assert rep.verdict_d is True

    def test_wrong_breakdown_exponent_fails_band(self):
        rep = fit_joint(planted_points(NS, gamma1=0.5))
        assert rep.verdict_b is False
        assert rep.verdict_a is True

    def test_band_edges(self):
        assert fit_joint(planted_points(NS, gamma1=1.14)).verdict_b is True
        assert fit_joint(planted_points(NS, gamma1=0.86)).verdict_b is True
        assert fit_joint(planted_points(NS, gamma1=1.2)).verdict_b is False

    def test_flat_threshold_fires_no_decay_clause(self):
        rep = fit_joint(planted_points(NS, gamma2=0.0, c2=0.3))
        assert rep.gamma2 == pytest.approx(0.0, abs=1e-12)
        assert rep.verdict_d is False
        # a flat line is still a perfect line
        assert rep.verdict_a is True

    def test_rising_threshold_fires_no_decay_clause(self):
        rep = fit_joint(planted_points(NS, gamma2=-0.4, c2=0.05))
        assert rep.verdict_d is False

    def test_summary_text_mirrors_flags(self):
        rep = fit_joint(planted_points(NS, gamma1=0.5))
        s = scaling_summary(rep)
        assert s["verdict_a"] == "pass"
        assert s["verdict_b"] == "fail"
        assert s["verdict_c"] == "n/a"
        assert s["verdict_d"] == "pass"


class TestCrossFamily:
    def test_matching_exponents_are_class_consistent(self):
        r1 = fit_joint(planted_points(NS), family_id="a")
        r2 = fit_joint(planted_points(NS), family_id="b")
        out = consistent_exponents([r1, r2])
        assert [r.verdict_c for r in out] == [True, True]
        assert [r.family_id for r in out] == ["a", "b"]

    def test_distinct_exponents_are_flagged(self):
        r1 = fit_joint(planted_points(NS, gamma2=0.5))
        r2 = fit_joint(planted_points(NS, gamma2=0.9))
        out = consistent_exponents([r1, r2])
        assert [r.verdict_c for r in out] == [False, False]

    def test_one_bad_pair_taints_all(self):
        r1 = fit_joint(planted_points(NS, gamma2=0.5))
        r2 = fit_joint(planted_points(NS, gamma2=0.5))
        r3 = fit_joint(planted_points(NS, gamma2=0.9))
        out = consistent_exponents([r1, r2, r3])
        assert [r.verdict_c for r in out] == [False, False, False]

    def test_single_report_stays_undetermined(self):
        r1 = fit_joint(planted_points(NS))
        assert consistent_exponents([r1])[0].verdict_c is None

    def test_original_reports_untouched(self):
        r1 = fit_joint(planted_points(NS))
        consistent_exponents([r1, r1])
        assert r1.verdict_c is None


class TestCensoring:
    def test_majority_censored_is_infeasible(self):
        pts = [censor(p) if i < 3 else p
               for i, p in enumerate(planted_points(NS))]
        with pytest.raises(CensoringError, match="3 of 5"):
            fit_joint(pts)

    def test_too_few_survivors_is_infeasible(self):
        pts = [censor(p) if i < 2 else p
               for i, p in enumerate(planted_points(NS))]
        with pytest.raises(CensoringError, match="at least 5"):
            fit_joint(pts)

    def test_minority_censoring_drops_points_with_note(self):
        ns8 = (16, 32, 64, 256, 512, 1024, 2048, 4096)
        pts = [censor(p) if i in (1, 3) else p
               for i, p in enumerate(planted_points(ns8))]
        rep = fit_joint(pts, note="family note")
        assert "censored sizes (no finite threshold): 32, 256" in rep.note
        assert rep.note.startswith("family note")
        # threshold fit sees only the six finite points, and stays exact
        assert rep.kappa_fit.n_points == 6
        assert rep.gamma2 == pytest.approx(0.5, abs=1e-9)
        # breakdown fit keeps the full grid
        assert rep.alpha_fit.n_points == 8

    def test_censored_flag(self):
        p = planted_points((16,))[0]
        assert not p.censored
        assert censor(p).censored

    def test_empty_points_rejected(self):
        with pytest.raises(ConfigError, match="no points"):
            fit_joint(())


class TestRangeDiagnostics:
    def test_consistent_law_reports_agreement(self):
        rep = fit_joint(planted_points(NS))
        assert "breakdown: upper-half exponent" in rep.range_note
        assert "threshold: upper-half exponent" in rep.range_note
        assert "disagrees" not in rep.range_note

    def test_kinked_law_reports_disagreement(self):
        # exact 1/ln N on the small sizes, a much steeper decay after the
        # fifth size; the pooled fit still clears R^2 = 0.9, so only the
        # range probe catches the break (probed: r_squared 0.926)
        ns9 = (16, 32, 64, 128, 256, 512, 1024, 2048, 4096)
        knee = math.log(ns9[4]) ** 2
        pts = []
        for i, n in enumerate(ns9):
            ln = math.log(n)
            a = 1.0 / ln if i < 5 else knee / ln**3
            k = 2.0 / math.sqrt(ln)
            pts.append(JointPoint(n=n, alpha=a, alpha_ci=(a, a),
                                  kappa_c=k, kappa_ci=(k, k)))
        rep = fit_joint(pts)
        assert rep.verdict_a is True
        assert "breakdown: upper-half exponent 3.000 disagrees" in rep.range_note
        assert "threshold: upper-half exponent 0.500 consistent" in rep.range_note


@pytest.fixture(scope="module")
def fast_points():
    return measure_family(default_family(seed=3), FAST, seed=11, workers=2)


class TestMeasureFamily:
    def test_every_size_measured(self, fast_points):
        assert tuple(p.n for p in fast_points) == DEFAULT_SIZES
        assert all(math.isfinite(p.alpha) for p in fast_points)
        assert all(math.isfinite(p.kappa_c) for p in fast_points)

    def test_intervals_bracket_estimates(self, fast_points):
        for p in fast_points:
            assert p.alpha_ci[0] <= p.alpha <= p.alpha_ci[1]
            assert p.kappa_ci[0] <= p.kappa_c <= p.kappa_ci[1]

    def test_both_laws_decay(self, fast_points):
        alphas = [p.alpha for p in fast_points]
        kappas = [p.kappa_c for p in fast_points]
        assert all(b < a for a, b in zip(alphas, alphas[1:]))
        assert all(b < a for a, b in zip(kappas, kappas[1:]))

    def test_worker_count_does_not_change_results(self, fast_points):
        seq = measure_family(default_family(seed=3), FAST, seed=11)
        assert seq == fast_points

    def test_fit_passes_all_verdicts(self, fast_points):
        fam = default_family(seed=3)
        rep = fit_joint(fast_points, family_id=fam.family_id, note=fam.note)
        assert abs(rep.gamma1 - 1.0) <= 0.15
        assert rep.verdict_a and rep.verdict_b and rep.verdict_d
        assert rep.gamma2 > 0
        assert "1/log N" in rep.note

    def test_seed_changes_estimates(self, fast_points):
        other = measure_family(default_family(seed=3), FAST, seed=12, workers=2)
        assert other != fast_points

    def test_generator_size_mismatch_rejected(self):
        def bad(n):
            good = default_family(seed=3).generator(n)
            return ScalingInstance(
                ontology=make_ontology(n + 1, 0.5, seed=0),
                system=good.system,
                manifold=good.manifold,
            )

        fam = SystemFamily("bad", bad, DEFAULT_SIZES)
        with pytest.raises(ConfigError, match="primitives"):
            measure_family(fam, FAST, seed=11)

    def test_uncoupled_scan_censors_every_size(self):
        cfg = ScalingConfig(
            sim=SimConfig(dt=1e-3, noise=0.5, n_steps=2000, n_chains=4),
            kappas=(1e-6, 3e-6),
            rel_tol=0.05,
            n_trials=200,
            max_points=512,
        )
        pts = measure_family(default_family(seed=3), cfg, seed=11, workers=2)
        assert all(p.censored for p in pts)
        assert all("no scanned feedback strength" in p.note for p in pts)
        with pytest.raises(CensoringError, match="5 of 5"):
            fit_joint(pts)


class TestSuite:
    def test_suite_fills_cross_family_verdict(self):
        fams = [default_family(seed=3, family_id="fam-a"),
                default_family(seed=21, family_id="fam-b")]
        reports = joint_scaling_suite(fams, FAST, seed=11, workers=2)
        assert [r.family_id for r in reports] == ["fam-a", "fam-b"]
        # the flag must agree with a manual reading of the emitted numbers;
        # at this budget the reported errors carry only the bisection
        # tolerance, so the verdict itself can go either way
        gap = abs(reports[0].gamma2 - reports[1].gamma2)
        spread = 2 * math.hypot(reports[0].gamma2_se, reports[1].gamma2_se)
        expected = gap <= spread
        assert all(r.verdict_c is expected for r in reports)
        assert abs(reports[0].gamma2 - reports[1].gamma2) < 0.2

    def test_run_joint_scaling_threads_family_note(self):
        rep = run_joint_scaling(default_family(seed=3), FAST, seed=11,
                                workers=2)
        assert rep.family_id == "log2-readout"
        assert "1/log N" in rep.note


@pytest.fixture(scope="module")
def report():
    return fit_joint(planted_points(NS), family_id="planted")


class TestExports:
    def test_rows_mirror_points(self, report):
        rows = scaling_rows(report)
        assert len(rows) == 5
        for row, p in zip(rows, report.points):
            assert row[0] == p.n
            assert row[1] == p.alpha
            assert row[4] == p.kappa_c
            assert row[7] == p.note

    def test_csv_roundtrip_is_byte_identical(self, report, tmp_path):
        path = tmp_path / "scaling.csv"
        write_scaling_csv(str(path), report)
        first = path.read_bytes()
        lines = first.decode().splitlines()
        assert lines[0] == "N,alpha_dagger,alpha_lo,alpha_hi,kappa_c,kappa_lo,kappa_hi,note"
        assert len(lines) == 6
        write_scaling_csv(str(path), report)
        assert path.read_bytes() == first

    def test_summary_key_order(self, report):
        keys = list(scaling_summary(report).keys())
        assert keys == ["gamma1", "gamma1_se", "gamma2", "gamma2_se",
                        "c1", "c2", "verdict_a", "verdict_b", "verdict_c",
                        "verdict_d"]

    def test_summary_file(self, report, tmp_path):
        path = tmp_path / "scaling_summary.txt"
        write_scaling_summary(str(path), report)
        text = path.read_text()
        assert "gamma1 = " in text
        assert "verdict_d = pass" in text
