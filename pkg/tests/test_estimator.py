import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hawkes_scaling import (
    CenteredPath,
    EventStream,
    HawkesModel,
    KernelMatrix,
    SimConfig,
    clt_samples,
    covariation_empirical,
    increments,
    limit_summary,
    lln_statistic,
    simulate,
    simulate_batch,
)
from hawkes_scaling.errors import DataCoverageError
from hawkes_scaling.estimator import validation_summary, write_summary_json

e1 = np.array([1.0, 0.0])
e2 = np.array([0.0, 1.0])


def one_d_poisson(mu=1.0):
    return HawkesModel([mu], KernelMatrix.zeros(1))


# ---- increments

def test_pure_drift_increments():
    s = EventStream(2.0, [], [], 1)
    inc = increments(CenteredPath.linear(s, one_d_poisson()), 1.0, 2.0)
    assert inc.ravel().tolist() == [-1.0, -1.0]


def test_single_jump_in_first_bin():
    s = EventStream(2.0, [0.5], [0], 2)
    inc = increments(CenteredPath.uncentered(s), 1.0, 2.0)
    assert np.array_equal(inc, np.array([e1, 0 * e1]))


def test_negative_shift_uses_right_continuous_counts():
    # bins (-0.5, 0.5] and (0.5, 1.5]: the jump at 0.5 closes the first bin
    s = EventStream(2.0, [0.5], [0], 2)
    inc = increments(CenteredPath.uncentered(s), 1.0, 2.0, tau=-0.5)
    assert np.array_equal(inc, np.array([e1, 0 * e1]))


def test_bins_in_negative_time_are_zero():
    s = EventStream(5.0, [0.2, 1.7], [0, 1], 2)
    path = CenteredPath.linear(s, HawkesModel([1.0, 1.0], KernelMatrix.zeros(2)))
    inc = increments(path, 1.0, 5.0, tau=-3.0)
    assert not np.any(inc[:2])
    assert path(-1.0).tolist() == [0.0, 0.0]


# ---- covariation_empirical

def test_empty_stream_expected_centering_is_zero():
    m = HawkesModel([0.0, 0.0], KernelMatrix.zeros(2))
    s = EventStream(3.0, [], [], 2)
    r = covariation_empirical(CenteredPath.expected(s, m), 1.0, 2.0)
    assert r.provenance == "empirical"
    assert not np.any(r.matrix)


def test_three_event_oracle():
    s = EventStream(2.0, [0.3, 0.9, 1.4], [0, 1, 0], 2)
    r = covariation_empirical(CenteredPath.uncentered(s), 1.0, 2.0)
    target = 0.5 * (np.outer(e1 + e2, e1 + e2) + np.outer(e1, e1))
    assert np.array_equal(r.matrix, target)


def test_partial_last_bin_is_dropped():
    s = EventStream(2.5, [0.3, 2.2], [0, 0], 1)
    r = covariation_empirical(CenteredPath.uncentered(s), 1.0, 2.5)
    assert r.meta["n_bins"] == 2
    assert r.matrix[0, 0] == pytest.approx(1 / 2.5)


def test_coverage_error_names_horizon():
    s = EventStream(10.0, [1.0], [0], 1)
    with pytest.raises(DataCoverageError) as info:
        covariation_empirical(CenteredPath.uncentered(s), 1.0, 10.0, tau=0.5)
    assert info.value.required_horizon == pytest.approx(10.5)


def test_zero_lag_is_psd(micro_hawkes):
    s = simulate(micro_hawkes, SimConfig(500.0, 2))
    v = covariation_empirical(CenteredPath.linear(s, micro_hawkes), 0.7, 500.0).matrix
    assert np.allclose(v, v.T)
    assert np.linalg.eigvalsh(v).min() >= -1e-9


@given(st.permutations([0, 1, 2]), st.integers(0, 1000))
def test_permutation_conjugates(perm, seed):
    rng = np.random.default_rng(seed)
    t = np.sort(rng.uniform(0, 50, 80))
    c = rng.integers(0, 3, 80)
    s = EventStream(50.0, t, c, 3)
    m = HawkesModel([0.5, 1.0, 2.0], KernelMatrix.zeros(3))
    V = covariation_empirical(CenteredPath.linear(s, m), 2.0, 40.0, 3.0).matrix
    Vp = covariation_empirical(CenteredPath.linear(s.permuted(perm), m.permuted(perm)), 2.0, 40.0, 3.0).matrix
    P = np.eye(3)[list(perm)]
    assert np.allclose(Vp, P @ V @ P.T, atol=1e-12)


def test_poisson_mean_covariation_is_diag_mu(poisson2):
    T, R = 100.0, 500
    streams = simulate_batch(poisson2, SimConfig(T, 61, replica_count=R))
    mats = np.array([covariation_empirical(CenteredPath.linear(s, poisson2), 1.0, T).matrix for s in streams])
    mean = mats.mean(axis=0)
    se = mats.std(axis=0, ddof=1) / math.sqrt(R)
    assert np.all(np.abs(mean - np.diag(poisson2.mu)) <= 3 * se)


def test_stderr_reported(micro_hawkes):
    s = simulate(micro_hawkes, SimConfig(2000.0, 3))
    r = covariation_empirical(CenteredPath.linear(s, micro_hawkes), 1.0, 2000.0)
    assert r.meta["stderr"].shape == (2, 2)
    assert np.all(r.meta["stderr"] > 0)


def test_centering_modes_agree_at_large_times(micro_hawkes):
    s = simulate(micro_hawkes, SimConfig(3000.0, 5))
    lin = CenteredPath.for_model(s, micro_hawkes, "linear")
    exp = CenteredPath.for_model(s, micro_hawkes, "expected")
    assert CenteredPath.for_model(s, micro_hawkes).mode == "linear"
    gap = lin(np.array([1000.0, 2000.0])) - exp(np.array([1000.0, 2000.0]))
    # the drifts differ by the constant (int_0^inf s psi(s) ds) mu, up to t times the grid error of int psi
    assert np.allclose(gap[0], gap[1], atol=1e-3)
    a = covariation_empirical(lin, 1.0, 3000.0).matrix
    b = covariation_empirical(exp, 1.0, 3000.0).matrix
    assert np.abs(a - b).max() < 0.01 * np.abs(a).max()
    with pytest.raises(ValueError):
        CenteredPath.for_model(s, micro_hawkes, "bogus")


# ---- LLN and CLT statistics

class DeterministicPath:
    """Counts equal to the limit drift, with no jumps."""

    def __init__(self, rate, horizon):
        self.rate, self.horizon, self.d = rate, horizon, rate.size
        self.times = np.zeros(0)
        self.components = np.zeros(0, dtype=int)

    def counts(self, t):
        return np.asarray(t, dtype=float)[..., None] * self.rate


def test_lln_statistic_of_drift_is_zero(micro_hawkes):
    mock = DeterministicPath(limit_summary(micro_hawkes).rate, 100.0)
    assert lln_statistic(mock, micro_hawkes) == pytest.approx(0.0, abs=1e-12)


def test_lln_statistic_poisson():
    m = one_d_poisson()
    assert lln_statistic(simulate(m, SimConfig(1e4, 7)), m) <= 0.05


def test_lln_statistic_sees_jumps_between_grid_points():
    m = one_d_poisson()
    s = EventStream(10.0, [5.05], [0], 1)
    # only v = 0 on the grid: the sup comes from the left limit at the jump
    coarse = lln_statistic(s, m, v_grid=np.array([0.0]))
    assert coarse == pytest.approx(0.505, abs=1e-12)


def test_lln_statistic_decreases_with_horizon(micro_hawkes):
    med = []
    for k, T in enumerate((1e3, 1e4)):
        streams = simulate_batch(micro_hawkes, SimConfig(T, 100 + k, replica_count=100, jobs=4))
        med.append(np.median([lln_statistic(s, micro_hawkes) for s in streams]))
    assert med[1] < med[0]


def test_clt_samples_at_zero(micro_hawkes):
    streams = simulate_batch(micro_hawkes, SimConfig(50.0, 1, replica_count=3))
    assert not np.any(clt_samples(streams, micro_hawkes, v=0.0))


def test_clt_poisson_variance():
    m = one_d_poisson()
    streams = simulate_batch(m, SimConfig(500.0, 71, replica_count=2000, jobs=4))
    x = clt_samples(streams, m)
    assert x.shape == (2000, 1)
    assert abs(x.var(ddof=1) - 1.0) <= 0.1


def test_validation_summary_json(tmp_path, micro_hawkes):
    doc = validation_summary(micro_hawkes, 5, 100.0, 1.0, 0.0, 0.01, 0.05, True)
    assert set(doc) == {"model_hash", "seed", "T", "delta", "tau", "statistic", "tolerance", "pass"}
    write_summary_json(doc, tmp_path / "s.json")
    assert json.loads((tmp_path / "s.json").read_text()) == doc
