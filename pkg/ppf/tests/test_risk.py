import math

import numpy as np
import pytest

from gridflow.exceptions import BadParameter, NoSamples
from ppf.engine import (
    Limit,
    build_limits,
    limit_matrix,
    records_frame,
    required_samples,
    risk_assess,
    samples_to_converge,
    variance_coefficient,
    variance_coefficient_scan,
)


@pytest.fixture
def bernoulli_column():
    values = np.zeros(5000)
    values[::25] = 1.0
    return values


def test_no_violations(rng):
    (record,) = risk_assess(rng.uniform(0.95, 1.05, size=1000), [Limit("vm:3", 0, 1.1, "upper")])
    assert record.probability == 0.0
    assert (record.ci_low, record.ci_high) == (0.0, 0.0)
    assert record.variance_coefficient is None
    assert not record.estimable and not record.converged
    assert record.required_samples is None
    assert record.mean_depth is None


def test_bernoulli_probability_and_coefficient(bernoulli_column):
    (record,) = risk_assess(bernoulli_column, [Limit("s:1", 0, 0.5, "upper")])
    half = 1.96 * math.sqrt(0.04 * 0.96 / 5000)
    assert record.violations == 200
    assert record.probability == pytest.approx(0.04)
    assert record.ci_low == pytest.approx(0.04 - half)
    assert record.ci_high == pytest.approx(0.04 + half)
    assert record.variance_coefficient == pytest.approx(0.0693, abs=5e-4)
    assert not record.converged
    assert record.mean_depth == pytest.approx(0.5)
    assert record.depth_ci_low == record.depth_ci_high == pytest.approx(0.5)


def test_lower_limits_measure_depth_below_bound():
    values = np.array([0.90, 0.93, 0.96, 1.00])
    (record,) = risk_assess(values, [Limit("vm:5", 0, 0.95, "lower")])
    assert record.violations == 2
    assert record.mean_depth == pytest.approx(0.035)


def test_interval_is_clipped():
    (record,) = risk_assess(np.ones(3), [Limit("s:1", 0, 0.0, "upper")])
    assert record.probability == 1.0
    assert record.ci_high == 1.0
    assert record.variance_coefficient == 0.0
    assert record.converged


def test_required_samples():
    assert required_samples(0.5, 0.1) == 100
    assert required_samples(0.0) is None
    n = required_samples(0.04, 0.01)
    assert variance_coefficient(0.04, n) <= 0.01


def test_samples_to_converge():
    assert samples_to_converge(np.ones(10, dtype=bool)) == 1
    assert samples_to_converge(np.zeros(10, dtype=bool)) is None


def test_variance_coefficient_needs_samples():
    with pytest.raises(NoSamples):
        variance_coefficient(0.1, 0)
    with pytest.raises(NoSamples):
        risk_assess(np.empty((0, 2)), [Limit("vm:1", 0, 1.0, "upper")])


def test_bad_limits():
    with pytest.raises(BadParameter):
        Limit("vm:1", 0, 1.0, "sideways")
    with pytest.raises(BadParameter):
        risk_assess(np.ones((4, 2)), [Limit("vm:1", 5, 1.0, "upper")])


def test_records_frame(bernoulli_column):
    frame = records_frame(risk_assess(bernoulli_column, [Limit("s:1", 0, 0.5, "upper")]))
    assert frame.loc[0, "violations"] == 200
    assert "variance_coefficient" in frame.columns


def test_scan_zero_mean_dimensions():
    table = variance_coefficient_scan(np.zeros((100, 3)), [10, 100])
    assert table["mean_coefficient"].tolist() == [0.0, 0.0]


def test_scan_halves_with_four_times_the_samples(rng):
    samples = rng.normal(10.0, 1.0, size=(8000, 4))
    table = variance_coefficient_scan(samples, [2000, 8000])
    first, second = table["mean_coefficient"]
    assert second / first == pytest.approx(0.5, abs=0.05)
    assert first == pytest.approx(1.0 / (math.sqrt(2000) * 10.0), rel=0.1)


def test_scan_rejects_bad_counts():
    with pytest.raises(BadParameter):
        variance_coefficient_scan(np.ones((10, 2)), [1])
    with pytest.raises(BadParameter):
        variance_coefficient_scan(np.ones((10, 2)), [11])


def test_build_limits(case30, rng):
    vm = rng.uniform(0.95, 1.05, size=(200, 30))
    limits = build_limits(case30, vm, vm_lower_percentile=4.0, vm_upper=1.1, branch_rate=True)
    vm_limits = [lim for lim in limits if lim.quantity.startswith("vm:")]
    branch_limits = [lim for lim in limits if lim.quantity.startswith("s:")]
    assert len(vm_limits) == 2 * case30.n_pq
    assert len(branch_limits) == int(np.sum(case30.rate_a > 0))
    lower = next(lim for lim in vm_limits if lim.direction == "lower")
    assert lower.bound == pytest.approx(np.percentile(vm[:, lower.column], 4.0))
    assert branch_limits[0].column == case30.n_bus


def test_percentile_limit_flags_four_percent(case30, rng):
    vm = rng.uniform(0.95, 1.05, size=(5000, 30))
    limits = build_limits(case30, vm, vm_lower_percentile=4.0)
    records = risk_assess(limit_matrix(vm, np.zeros((5000, 0))), limits)
    for record in records:
        assert record.probability == pytest.approx(0.04, abs=0.001)
