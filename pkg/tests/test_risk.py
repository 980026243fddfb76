import math

import numpy as np
import pytest

from glmbound.base.data_structures import (
    BoxPrior,
    EstimatorConfig,
    RiskEstimate,
)
from glmbound.base.exceptions import PreconditionError
from glmbound.base.family import GlmModel
from glmbound.bound import construct_prior, theorem1_bound
from glmbound.design import make_design, reparametrize
from glmbound.families import Bernoulli, Gaussian, Poisson, make_family
from glmbound.risk import (
    bayes_risk,
    favorability_report,
    risk_at,
    worst_case_risk,
)

UNPROJECTED = EstimatorConfig('linear_mle', project_to_ball=False)


def test_half_width() -> None:
    estimate = RiskEstimate(
        mean_sq_error=1.0, second_moment=2.0, trials=101, seed=0
    )
    assert estimate.half_width == pytest.approx(1.96 * math.sqrt(0.01))
    assert estimate.upper > estimate.mean_sq_error > estimate.lower


@pytest.mark.slow
def test_identity_gaussian_risk(identity10) -> None:
    model = GlmModel(identity10, Gaussian(1.0, 0.01))
    result = risk_at(model, np.zeros(10), UNPROJECTED, 100_000, seed=1)
    assert result.mean_sq_error == pytest.approx(0.1, rel=0.02)
    assert result.trials == 100_000
    assert result.failures == 0


@pytest.mark.slow
@pytest.mark.parametrize('condition', [1.0, 3.0, 10.0, 30.0, 100.0])
def test_ill_conditioned_gaussian_risk(condition: float) -> None:
    design = make_design(np.diag(np.geomspace(1.0, condition, 4)))
    family = Gaussian(1.0, 0.01)
    result = risk_at(
        GlmModel(design, family), np.zeros(4), UNPROJECTED, 100_000, seed=2
    )
    assert result.mean_sq_error == pytest.approx(
        family.scale * design.trace_inv_gram, rel=0.02
    )


def test_thread_count_does_not_change_results(tall_design) -> None:
    model = GlmModel(tall_design, Gaussian(1.0, 0.1))
    theta = np.array([0.2, -0.4])
    config = EstimatorConfig('linear_mle')
    single = risk_at(model, theta, config, 5000, seed=9, threads=1)
    pooled = risk_at(model, theta, config, 5000, seed=9, threads=4)
    assert single == pooled


def test_seed_changes_results(tall_design) -> None:
    model = GlmModel(tall_design, Gaussian(1.0, 0.1))
    config = EstimatorConfig('linear_mle')
    first = risk_at(model, np.zeros(2), config, 500, seed=1, threads=1)
    second = risk_at(model, np.zeros(2), config, 500, seed=2, threads=1)
    assert first.mean_sq_error != second.mean_sq_error


def test_too_few_trials(tall_design) -> None:
    model = GlmModel(tall_design, Gaussian())
    with pytest.raises(PreconditionError):
        risk_at(model, np.zeros(2), UNPROJECTED, trials=99)


def test_rank_deficient_needs_zero_estimator(rank_deficient) -> None:
    model = GlmModel(rank_deficient, Gaussian())
    with pytest.raises(PreconditionError):
        risk_at(model, np.zeros(2), EstimatorConfig('linear_mle'), 100)
    result = risk_at(
        model, np.array([0.6, 0.0]), EstimatorConfig('zero'), 100
    )
    assert result.mean_sq_error == pytest.approx(0.36)


def test_zero_prior_zero_risk(identity2) -> None:
    model = GlmModel(identity2, Gaussian())
    prior = BoxPrior(np.zeros(2), 'case1', 0.0)
    result = bayes_risk(model, prior, EstimatorConfig('zero'), 100)
    assert result.mean_sq_error == 0.0


def test_gaussian_risk_is_parameter_free(tall_design) -> None:
    model = GlmModel(tall_design, Gaussian(1.0, 0.1))
    at_origin = risk_at(model, np.zeros(2), UNPROJECTED, 1000, seed=4)
    at_boundary = risk_at(
        model, np.array([0.6, 0.8]), UNPROJECTED, 1000, seed=4
    )
    assert at_boundary.mean_sq_error == pytest.approx(
        at_origin.mean_sq_error, rel=1e-9
    )


def test_worst_case_dominates_origin(tall_design) -> None:
    model = GlmModel(tall_design, Bernoulli())
    config = EstimatorConfig('irls_mle')
    origin = risk_at(model, np.zeros(2), config, 200, seed=5)
    worst = worst_case_risk(model, config, budget=2, trials=200, seed=5)
    assert worst.mean_sq_error >= origin.mean_sq_error
    assert worst.theta_at_max is not None
    assert np.linalg.norm(worst.theta_at_max) <= 1 + 1e-12


def test_worst_case_budget(tall_design) -> None:
    model = GlmModel(tall_design, Gaussian())
    with pytest.raises(PreconditionError):
        worst_case_risk(model, UNPROJECTED, budget=1, trials=100)


def test_bayes_risk_above_bayes_bound(identity2) -> None:
    family = Gaussian(1.0, 0.01)
    design = reparametrize(identity2)
    prior = construct_prior(design, family)
    report = theorem1_bound(identity2, family)
    result = bayes_risk(
        GlmModel(design, family),
        prior,
        EstimatorConfig('linear_mle'),
        2000,
        seed=6,
    )
    assert result.upper >= report.bayes_bound


def test_favorability_report_small(identity2) -> None:
    families = [Gaussian(1.0, 0.05), Bernoulli(), Poisson(1.0)]
    rows = favorability_report(identity2, families, trials=100, seed=3)
    assert [row.family for row in rows] == [
        'gaussian',
        'bernoulli',
        'poisson',
    ]
    for row in rows:
        assert row.is_sound
        assert row.bayes_risk.upper >= row.bayes_bound
        assert np.isfinite(row.gaussian_empirical_risk)


def test_favorability_gaussian_ratio(identity10) -> None:
    (row,) = favorability_report(
        identity10, [Gaussian(1.0, 0.01)], trials=2000, seed=7
    )
    assert row.gaussian_risk == pytest.approx(0.1)
    assert row.achievability_ratio == pytest.approx(
        math.pi * math.e**3, rel=0.05
    )


def test_favorability_rank_deficient(rank_deficient) -> None:
    (row,) = favorability_report(
        rank_deficient, [Gaussian()], trials=100, seed=0
    )
    assert row.case == 'rank_deficient'
    assert math.isnan(row.gaussian_empirical_risk)
    assert row.is_sound


@pytest.mark.slow
def test_bound_is_sound_on_random_designs() -> None:
    rng = np.random.default_rng(11)
    for _ in range(20):
        n, d = int(rng.integers(3, 7)), int(rng.integers(1, 3))
        entries = rng.standard_normal((n, d))
        entries /= np.linalg.norm(entries, axis=1, keepdims=True)
        entries *= rng.uniform(0.2, 1.0, size=(n, 1))
        design = make_design(entries)
        families = [
            Gaussian(1.0, rng.uniform(0.01, 1.0)),
            Bernoulli(),
            Poisson(design.radius),
        ]
        rows = favorability_report(design, families, trials=100, seed=0)
        for row in rows:
            assert row.is_sound, row


DESIGNS = {
    'identity': np.eye(3),
    'diagonal': np.diag([0.3, 0.6, 1.0]),
    'rank_deficient': np.array([[1.0, 0.0], [0.5, 0.0]]),
    'tall': np.array([[0.6, 0.3], [0.2, 0.7], [0.4, -0.2], [0.5, 0.5]]),
}


@pytest.mark.parametrize('name', ['gaussian', 'bernoulli', 'poisson'])
@pytest.mark.parametrize('kind', list(DESIGNS))
def test_worst_case_risk_exceeds_bound(kind: str, name: str) -> None:
    design = make_design(DESIGNS[kind])
    family = make_family(name, scale=0.05, design_radius=design.radius)
    estimator = (
        EstimatorConfig('zero')
        if not design.is_full_rank
        else EstimatorConfig('irls_mle')
    )
    report = theorem1_bound(design, family)
    worst = worst_case_risk(
        GlmModel(design, family),
        estimator,
        budget=design.d,
        trials=200,
        seed=13,
    )
    assert worst.upper >= report.bound_value


def test_zero_noise_limit(tall_design) -> None:
    model = GlmModel(tall_design, Gaussian(1.0, 1e-12))
    result = risk_at(model, np.array([0.3, 0.3]), UNPROJECTED, 100)
    assert result.mean_sq_error < 1e-10


def test_risk_doubles_with_noise_variance(tall_design) -> None:
    theta = np.array([0.1, 0.2])
    risks = [
        risk_at(
            GlmModel(tall_design, Gaussian(1.0, scale)),
            theta,
            UNPROJECTED,
            2000,
            seed=12,
        ).mean_sq_error
        for scale in (0.05, 0.1)
    ]
    assert risks[1] == pytest.approx(2 * risks[0], rel=0.03)


def test_gaussian_worst_case_matches_any_point(tall_design) -> None:
    model = GlmModel(tall_design, Gaussian(1.0, 0.1))
    origin = risk_at(model, np.zeros(2), UNPROJECTED, 500, seed=13)
    worst = worst_case_risk(model, UNPROJECTED, 4, 500, seed=13)
    assert worst.mean_sq_error == pytest.approx(
        origin.mean_sq_error, rel=1e-9
    )


def test_bayes_risk_below_worst_case(tall_design) -> None:
    family = Bernoulli()
    design = reparametrize(tall_design)
    model = GlmModel(design, family)
    config = EstimatorConfig('irls_mle')
    average = bayes_risk(
        model, construct_prior(design, family), config, 300, seed=14
    )
    worst = worst_case_risk(model, config, 2, 300, seed=14)
    assert average.lower <= worst.upper


def test_identical_families_give_identical_rows(identity2) -> None:
    family = Gaussian(1.0, 0.05)
    first, second = favorability_report(
        identity2, [family, family], trials=100, seed=15
    )
    assert first == second
