import logging
import math

import numpy as np
import pytest

from glmbound.base.exceptions import DomainError
from glmbound.base.family import GlmModel, draw_uniforms
from glmbound.design import make_design
from glmbound.families import (
    Bernoulli,
    Gaussian,
    Poisson,
    make_family,
    parse_family_spec,
)
from glmbound.utils.functions import substream


def test_gaussian_mean_and_variance() -> None:
    family = Gaussian(curvature_bound=2.0, scale=0.5)
    assert family.mean_and_variance(0.5) == pytest.approx((1.0, 1.0))


def test_bernoulli_mean_and_variance() -> None:
    assert Bernoulli().mean_and_variance(0.0) == pytest.approx((0.5, 0.25))


def test_poisson_mean_and_variance() -> None:
    family = Poisson(design_radius=1.0)
    assert family.curvature_bound == pytest.approx(math.e)
    assert family.mean_and_variance(0.0) == pytest.approx((1.0, 1.0))
    with pytest.raises(DomainError):
        family.mean_and_variance(2.0)


@pytest.mark.parametrize(
    'family', [Gaussian(1.5, 0.3), Bernoulli(), Poisson(1.0)]
)
def test_cumulant_derivatives(family) -> None:
    t = np.linspace(-0.9, 0.9, 7)
    h = 1e-5
    numeric_d1 = (family.cumulant(t + h) - family.cumulant(t - h)) / (2 * h)
    numeric_d2 = (
        family.cumulant_d1(t + h) - family.cumulant_d1(t - h)
    ) / (2 * h)
    np.testing.assert_allclose(
        family.cumulant_d1(t), numeric_d1, rtol=1e-7, atol=1e-9
    )
    np.testing.assert_allclose(family.cumulant_d2(t), numeric_d2, rtol=1e-7)


@pytest.mark.parametrize(
    'family', [Gaussian(1.5, 0.3), Bernoulli(), Poisson(1.0)]
)
def test_curvature_certified(family) -> None:
    assert family.certify_curvature(-1.0, 1.0)


def test_poisson_not_certified_beyond_radius() -> None:
    design = make_design(np.array([[2.0, 0.0], [0.0, 1.0]]))
    with pytest.raises(DomainError, match='design radius'):
        GlmModel(design, Poisson(design_radius=1.0))


@pytest.mark.parametrize(
    'family', [Gaussian(2.0, 0.5), Bernoulli(), Poisson(1.0)]
)
def test_sample_moments(family) -> None:
    eta = 0.4
    rng = substream(5, 0)
    samples = family.sample_from_uniforms(
        np.full(200_000, eta), draw_uniforms(rng, 200_000)
    )
    mean, variance = family.mean_and_variance(eta)
    assert np.all(np.isfinite(samples))
    assert np.mean(samples) == pytest.approx(mean, abs=0.01)
    assert np.var(samples) == pytest.approx(variance, rel=0.02)


class ExtremeGenerator:
    """
    Returns the smallest and largest integers a generator can draw.
    """

    def integers(self, low, high, size=None):
        return np.array([low, high - 1])


@pytest.mark.parametrize(
    'family', [Gaussian(2.0, 0.5), Bernoulli(), Poisson(1.0)]
)
def test_extreme_uniforms_give_finite_samples(family) -> None:
    uniforms = draw_uniforms(ExtremeGenerator(), 2)
    assert 0 < uniforms[0] < uniforms[1] < 1
    samples = family.sample_from_uniforms(np.zeros(2), uniforms)
    assert np.all(np.isfinite(samples))


def test_model_sample_is_seeded(tall_design) -> None:
    model = GlmModel(tall_design, Poisson(tall_design.radius))
    theta = np.array([0.3, -0.4])
    np.testing.assert_array_equal(
        model.sample(theta, seed=9), model.sample(theta, seed=9)
    )
    assert model.sample(theta, seed=9).shape == (tall_design.n,)


def test_model_rejects_theta_outside_ball(identity2) -> None:
    model = GlmModel(identity2, Gaussian())
    with pytest.raises(DomainError, match='unit ball'):
        model.sample(np.array([1.0, 1.0]), seed=0)
    with pytest.raises(DomainError, match='length'):
        model.sample(np.array([0.1, 0.1, 0.1]), seed=0)


def test_fisher_information_gaussian(tall_design) -> None:
    model = GlmModel(tall_design, Gaussian(2.0, 0.5))
    information = model.fisher_information(np.array([0.2, 0.1]))
    np.testing.assert_allclose(
        information, 2.0 * tall_design.gram / 0.5, rtol=1e-12
    )


def test_fisher_information_bernoulli(tall_design) -> None:
    model = GlmModel(tall_design, Bernoulli())
    theta = np.array([0.5, -0.5])
    information = model.fisher_information(theta)
    assert np.allclose(information, information.T)
    assert np.all(np.linalg.eigvalsh(information) >= 0)
    # Phi'' <= 1/4
    np.testing.assert_array_less(
        np.linalg.eigvalsh(information - 0.25 * tall_design.gram), 1e-12
    )


@pytest.mark.parametrize('name', ['gaussian', 'bernoulli', 'poisson'])
def test_fisher_diagonal_below_curvature_bound(tall_design, name) -> None:
    family = make_family(
        name, scale=0.5, design_radius=tall_design.radius, curvature_bound=2.0
    )
    model = GlmModel(tall_design, family)
    ceiling = (
        family.curvature_bound / family.scale * np.diag(tall_design.gram)
    )
    rng = np.random.default_rng(17)
    for _ in range(200):
        theta = rng.standard_normal(2)
        theta *= rng.uniform() / np.linalg.norm(theta)
        diagonal = np.diag(model.fisher_information(theta))
        assert np.all(diagonal <= ceiling * (1 + 1e-12))


def test_score_has_zero_mean(tall_design) -> None:
    model = GlmModel(tall_design, Poisson(tall_design.radius))
    theta = np.array([0.3, 0.6])
    rng = substream(1, 0)
    uniforms = draw_uniforms(rng, (50_000, tall_design.n))
    x = model.sample_from_uniforms(np.tile(theta, (50_000, 1)), uniforms)
    scores = model.score(theta, x)
    standard_error = np.std(scores, axis=0) / math.sqrt(50_000)
    assert np.all(np.abs(np.mean(scores, axis=0)) <= 4 * standard_error)
    # The score covariance is the Fisher information
    np.testing.assert_allclose(
        np.cov(scores.T), model.fisher_information(theta), rtol=0.05
    )


def test_log_likelihood_gradient(tall_design) -> None:
    model = GlmModel(tall_design, Bernoulli())
    theta = np.array([0.2, -0.3])
    x = np.array([1.0, 0.0, 1.0, 1.0, 0.0, 1.0])
    h = 1e-6
    numeric = [
        (
            model.log_likelihood(theta + h * e, x)
            - model.log_likelihood(theta - h * e, x)
        )
        / (2 * h)
        for e in np.eye(2)
    ]
    np.testing.assert_allclose(model.score(theta, x), numeric, rtol=1e-6)


def test_parse_family_spec() -> None:
    family = parse_family_spec('gaussian:L=2.5', scale=0.01)
    assert isinstance(family, Gaussian)
    assert family.curvature_bound == 2.5
    assert family.scale == 0.01
    assert parse_family_spec('gaussian').curvature_bound == 1.0
    assert isinstance(parse_family_spec('bernoulli'), Bernoulli)
    poisson = parse_family_spec('poisson', design_radius=0.5)
    assert poisson.curvature_bound == pytest.approx(math.exp(0.5))


@pytest.mark.parametrize(
    'spec', ['cauchy', 'gaussian:L', 'gaussian:L=abc', 'bernoulli:L=2']
)
def test_parse_family_spec_errors(spec: str) -> None:
    with pytest.raises(DomainError):
        parse_family_spec(spec)


def test_fixed_dispersion_scale_is_replaced(caplog) -> None:
    with caplog.at_level(logging.WARNING):
        family = make_family('bernoulli', scale=0.1)
    assert family.scale == 1.0
    assert 'unit scale' in caplog.text


def test_nonpositive_parameters() -> None:
    with pytest.raises(DomainError):
        Gaussian(curvature_bound=0.0)
    with pytest.raises(DomainError):
        Gaussian(scale=-1.0)
    with pytest.raises(DomainError):
        Poisson(design_radius=0.0)
