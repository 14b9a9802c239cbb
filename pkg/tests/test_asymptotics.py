import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hawkes_scaling import (
    CovariationTheory,
    ExpKernel,
    HawkesModel,
    KernelMatrix,
    covariation_theory,
    covariation_theory_sweep,
    expected_counts,
    limit_summary,
    resolvent,
)
from hawkes_scaling.asymptotics import ExpectedCounts, read_covariation_csv, write_covariation_csv
from hawkes_scaling.errors import ResolutionError, StabilityError, TruncationError

from .conftest import exp_model

S = np.array([1.0, -1.0])


@pytest.fixture(scope="module")
def micro_theory(micro_hawkes):
    return CovariationTheory(micro_hawkes)


@pytest.fixture(scope="module")
def asym_model():
    return exp_model([0.4, 1.1], [[0.2, 0.5], [0.1, 0.3]], [[1.0, 2.0], [0.8, 1.5]])


@pytest.fixture(scope="module")
def asym_theory(asym_model):
    return CovariationTheory(asym_model)


# ---- limit summary

def test_summary_without_excitation(poisson2):
    ls = limit_summary(poisson2)
    assert np.array_equal(ls.rate, poisson2.mu)
    assert np.array_equal(ls.macro_cov, np.diag(poisson2.mu))


def test_summary_microstructure(micro_hawkes, micro):
    ls = limit_summary(micro_hawkes)
    assert np.allclose(ls.rate, [2.0, 2.0])
    assert S @ ls.macro_cov @ S == pytest.approx(micro.sigma2, abs=1e-10)


def test_summary_leadlag_rate(epps):
    ls = limit_summary(epps.hawkes)
    p = epps.norm_product
    target = np.array([epps.nu1, epps.nu1, epps.nu2, epps.nu2]) / (1 - p)
    assert np.allclose(ls.rate, target, rtol=1e-12)


def test_summary_invariants(asym_model):
    ls = limit_summary(asym_model)
    assert np.all(ls.rate >= asym_model.mu)
    assert np.allclose(ls.macro_cov, ls.macro_cov.T)
    assert np.linalg.eigvalsh(ls.macro_cov).min() >= -1e-12


def test_summary_supercritical():
    m = HawkesModel([1.0], KernelMatrix(((ExpKernel(1.0, 1.0),),)))
    with pytest.raises(StabilityError):
        limit_summary(m)


# ---- expected counts

def test_expected_counts_poisson(poisson2):
    assert np.allclose(expected_counts(poisson2, 7.5), 7.5 * poisson2.mu)


def test_expected_counts_closed_form():
    m = HawkesModel([1.0], KernelMatrix(((ExpKernel(0.5, 1.0),),)))
    t = 5.0
    assert expected_counts(m, t)[0] == pytest.approx(2 * t - 2 * (1 - math.exp(-t / 2)), abs=1e-4)


def test_expected_counts_approach_rate(micro_hawkes):
    # psi decays like exp(-t/2): 100 decay scales is t = 200
    psi = resolvent(micro_hawkes, horizon=250.0)
    t = 200.0
    rate = limit_summary(micro_hawkes).rate
    assert np.all(np.abs(expected_counts(micro_hawkes, t, psi) / t - rate) <= 0.01 * rate)


def test_expected_counts_monotone_and_bounded(asym_model):
    ec = ExpectedCounts(asym_model)
    t = np.linspace(0.0, ec.horizon, 400)
    e = ec(t)
    assert np.all(np.diff(e, axis=0) >= 0)
    assert np.all(e <= t[:, None] * limit_summary(asym_model).rate + 1e-9)


def test_expected_counts_truncation(micro_hawkes):
    ec = ExpectedCounts(micro_hawkes)
    with pytest.raises(TruncationError):
        ec(ec.horizon * 2)
    far = ec(ec.horizon * 2, extrapolate=True)
    assert np.all(far > ec(ec.horizon))


# ---- covariation theory

@pytest.mark.parametrize("delta", [0.01, 1.0, 50.0])
def test_poisson_covariation_is_diag_mu(poisson2, delta):
    v = covariation_theory(poisson2, delta, 0.0).matrix
    assert np.allclose(v, np.diag(poisson2.mu), atol=1e-14)


def test_large_delta_limit(micro_hawkes, micro_theory):
    v = micro_theory(2e6, 0.0).matrix
    mc = limit_summary(micro_hawkes).macro_cov
    assert np.abs(v - mc).max() <= 0.005 * np.abs(mc).max()


def test_small_delta_with_lag_vanishes(micro_hawkes):
    fine = CovariationTheory(micro_hawkes, resolvent(micro_hawkes, step=1e-4, horizon=40.0))
    v = fine(1e-3, 1.0).matrix
    mc = limit_summary(micro_hawkes).macro_cov
    assert np.abs(v).max() < 1e-2 * np.abs(mc).max()


def test_resolution_error(micro_theory):
    with pytest.raises(ResolutionError):
        micro_theory(1e-3, 0.0)


def test_error_bound_in_meta(micro_theory):
    r = micro_theory(1.0, 0.0)
    assert r.provenance == "theory"
    assert 0 <= r.meta["error_bound"] < 1e-6


def test_sweep_matches_single_calls(asym_model, asym_theory):
    deltas, taus = [0.1, 2.0], [-1.0, 0.0, 0.3]
    sweep = asym_theory.sweep(deltas, taus)
    assert [(r.delta, r.tau) for r in sweep] == [(d, t) for d in deltas for t in taus]
    for r in sweep:
        assert np.array_equal(r.matrix, asym_theory(r.delta, r.tau).matrix)
    [one] = covariation_theory_sweep(asym_model, [0.5], [0.2])
    assert np.allclose(one.matrix, covariation_theory(asym_model, 0.5, 0.2).matrix, atol=1e-15)


@given(st.floats(0.005, 500.0), st.floats(-30.0, 30.0))
def test_transpose_symmetry(asym_theory, delta, tau):
    a = asym_theory(delta, tau).matrix
    b = asym_theory(delta, -tau).matrix
    assert np.abs(a - b.T).max() <= 1e-12


@given(st.floats(0.005, 1e4))
def test_zero_lag_covariation_is_psd(asym_theory, delta):
    v = asym_theory(delta, 0.0).matrix
    assert np.allclose(v, v.T, atol=1e-12)
    assert np.linalg.eigvalsh(v).min() >= -1e-9


def test_signature_contrast_enters_one_percent_band(micro_theory, micro):
    deltas = np.logspace(-2, 3, 26)
    vals = np.array([S @ micro_theory(d, 0.0).matrix @ S for d in deltas])
    inside = np.abs(vals / micro.sigma2 - 1) <= 0.01
    assert inside[-1]
    first = int(np.argmax(inside))
    assert np.all(inside[first:])
    assert np.all(np.diff(vals) <= 1e-12)


def test_homogeneity_in_baseline(asym_model, asym_theory):
    m2 = asym_model.scaled(2.0)
    a, b = limit_summary(asym_model), limit_summary(m2)
    assert np.allclose(b.rate, 2 * a.rate)
    assert np.allclose(b.Sigma, 2 * a.Sigma)
    assert np.allclose(b.macro_cov, 2 * a.macro_cov)
    th2 = CovariationTheory(m2)
    for d, t in [(0.1, 0.0), (1.0, 0.5), (10.0, -2.0)]:
        assert np.allclose(th2(d, t).matrix, 2 * asym_theory(d, t).matrix, rtol=1e-12)


def test_covariation_csv_roundtrip(tmp_path, asym_theory):
    rows = asym_theory.sweep([0.5, 5.0], [0.0, 1.0])
    path = tmp_path / "v.csv"
    write_covariation_csv(rows, path)
    assert path.read_text().splitlines()[0] == "delta,tau,i,j,value,provenance"
    back = read_covariation_csv(path)
    for r, b in zip(rows, back):
        assert (r.delta, r.tau, r.provenance) == (b.delta, b.tau, b.provenance)
        assert np.array_equal(r.matrix, b.matrix)
