import numpy as np
import pytest
from scipy.stats import norm

from gridflow.exceptions import DegenerateSamples
from ppf.engine import kde, kde_curve, kde_grid, silverman_bandwidth


@pytest.fixture(scope="module")
def normal_samples():
    n = 20000
    return norm.ppf((np.arange(n) + 0.5) / n)


def test_recovers_standard_normal(normal_samples):
    grid = np.linspace(-3, 3, 241)
    assert np.max(np.abs(kde(normal_samples, grid) - norm.pdf(grid))) < 0.01


def test_symmetric_samples_give_symmetric_density(normal_samples):
    curve = kde_curve("z", normal_samples)
    np.testing.assert_allclose(curve.grid, -curve.grid[::-1], atol=1e-12)
    np.testing.assert_allclose(curve.density, curve.density[::-1], atol=1e-12)


def test_density_integrates_to_one(rng):
    curve = kde_curve("w", rng.weibull(2.0, size=3000))
    assert curve.integral() == pytest.approx(1.0, abs=1e-3)
    assert curve.grid.size == 512
    assert np.all(curve.density >= 0)


def test_shift_equivariance(rng):
    x = rng.normal(size=500)
    grid = np.linspace(-4, 4, 101)
    np.testing.assert_allclose(kde(x + 3.0, grid + 3.0), kde(x, grid), atol=1e-12)


def test_grid_pads_five_bandwidths(rng):
    x = rng.normal(size=400)
    h = silverman_bandwidth(x)
    grid = kde_grid(x)
    assert grid[0] == pytest.approx(x.min() - 5 * h)
    assert grid[-1] == pytest.approx(x.max() + 5 * h)


def test_silverman_bandwidth_formula(rng):
    x = rng.normal(size=1000)
    q75, q25 = np.percentile(x, [75, 25])
    expected = 0.9 * min(x.std(ddof=1), (q75 - q25) / 1.34) * 1000 ** -0.2
    assert silverman_bandwidth(x) == pytest.approx(expected)


def test_bandwidth_falls_back_when_iqr_is_zero():
    x = np.r_[np.zeros(90), np.ones(10)]
    assert silverman_bandwidth(x) == pytest.approx(0.9 * x.std(ddof=1) * 100 ** -0.2)


@pytest.mark.parametrize("samples", [np.full(10, 1.05), np.array([0.3])])
def test_point_mass_is_reported(samples):
    with pytest.raises(DegenerateSamples) as exc:
        kde_curve("vm:1", samples)
    assert exc.value.value == samples[0]
