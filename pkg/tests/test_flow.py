import numpy as np
import pytest

from rmtlab.ensembles import EnsembleSpec, sample_erdos_renyi, sample_goe
from rmtlab.errors import InfeasibleDecompositionError
from rmtlab.flow import FlowParams, decompose_sample, evolve, theta_t
from rmtlab.rng import derive_stream
from rmtlab.spectral import eigenvalues_of
from rmtlab.statistics import ks_distance


def upper(h):
    return h[np.triu_indices(h.shape[0])]


def test_theta_t_zero_time():
    assert theta_t(0.0, 1.0) == 0.0


def test_theta_t_long_time_limit():
    assert theta_t(1e9, 1.0) == pytest.approx(np.sqrt(0.5))


def test_theta_t_small_time_series():
    # theta^2 = (t - t^2/(2r) + ...)/2, so sqrt(t/2) is accurate to O(t)
    t = 1e-8
    assert theta_t(t, 1.0) == pytest.approx(np.sqrt(t / 2), rel=1e-6)


def test_theta_t_monotone_and_capped():
    ts = np.linspace(0, 20, 50)
    vals = [theta_t(t, 2.0) for t in ts]
    assert all(np.diff(vals) >= 0)
    assert vals[-1] <= np.sqrt(1.0)


def test_theta_t_validation():
    with pytest.raises(ValueError):
        theta_t(-1.0, 1.0)
    with pytest.raises(ValueError):
        theta_t(1.0, 0.0)


def test_evolve_time_zero_is_identity():
    spec = EnsembleSpec(n=50, kind="erdos_renyi", q_exponent=0.4)
    h0 = sample_erdos_renyi(spec, derive_stream(1, 0))
    params = FlowParams(n=50, t=0.0, mean=spec.entry_mean)
    assert np.array_equal(evolve(h0, params, derive_stream(1, 1)), h0)


def test_evolve_rejects_negative_time():
    with pytest.raises(ValueError):
        FlowParams(n=10, t=-0.5)


def test_evolve_preserves_mean_and_variance():
    # stationarity of the entry law: E = f, Var = s_ij at every t (4 sigma)
    spec = EnsembleSpec(n=100, kind="erdos_renyi", q_exponent=0.4)
    f = spec.entry_mean
    for t, base in ((0.1, 100), (1.0, 5000)):
        params = FlowParams(n=100, t=t, mean=f)
        vals = []
        for k in range(60):
            h0 = sample_erdos_renyi(spec, derive_stream(2, base + 2 * k))
            ht = evolve(h0, params, derive_stream(2, base + 2 * k + 1))
            vals.append(upper(ht))
        x = np.concatenate(vals)
        c = x - f
        se_mean = x.std() / np.sqrt(x.size)
        assert abs(x.mean() - f) <= 4 * se_mean
        m2 = np.mean(c * c)
        se_var = np.sqrt((np.mean(c ** 4) - m2 * m2) / x.size)
        assert abs(m2 - 0.01) <= 4 * se_var


def test_evolve_long_time_reaches_stationary_gaussian():
    # at t = 50 the decay factor is ~0, so entries are f + N(0, 1/n)
    n = 200
    spec = EnsembleSpec(n=n, kind="erdos_renyi", q_exponent=0.4)
    params = FlowParams(n=n, t=50.0, mean=spec.entry_mean)
    vals = []
    for k in range(10):
        h0 = sample_erdos_renyi(spec, derive_stream(3, 2 * k))
        vals.append(upper(evolve(h0, params, derive_stream(3, 2 * k + 1))))
    x = np.concatenate(vals) - spec.entry_mean
    assert x.size >= 100_000
    assert np.mean(x * x) == pytest.approx(1.0 / n, rel=0.02)


def test_evolve_semigroup_in_law():
    # evolve(evolve(., s), t) and evolve(., s + t) share first and second
    # entry moments within Monte Carlo error
    n, s, t = 100, 0.3, 0.4
    spec = EnsembleSpec(n=n, kind="erdos_renyi", q_exponent=0.4)
    f = spec.entry_mean
    two_step, one_step = [], []
    for k in range(100):
        h0 = sample_erdos_renyi(spec, derive_stream(4, 4 * k))
        a = evolve(h0, FlowParams(n=n, t=s, mean=f), derive_stream(4, 4 * k + 1))
        a = evolve(a, FlowParams(n=n, t=t, mean=f), derive_stream(4, 4 * k + 2))
        b = evolve(h0, FlowParams(n=n, t=s + t, mean=f), derive_stream(4, 4 * k + 3))
        two_step.append(upper(a))
        one_step.append(upper(b))
    x, y = np.concatenate(two_step), np.concatenate(one_step)
    se = np.hypot(x.std() / np.sqrt(x.size), y.std() / np.sqrt(y.size))
    assert abs(x.mean() - y.mean()) <= 4 * se
    vx, vy = np.var(x - f), np.var(y - f)
    se_v = np.hypot(vx, vy) * np.sqrt(2.0 / x.size)
    assert abs(vx - vy) <= 4 * se_v + 1e-12


def test_decompose_reconstruction_identity():
    spec = EnsembleSpec(n=80, kind="erdos_renyi", q_exponent=0.4)
    h0 = sample_erdos_renyi(spec, derive_stream(5, 0))
    params = FlowParams(n=80, t=0.7, mean=spec.entry_mean)
    fs = decompose_sample(h0, params, derive_stream(5, 1))
    assert np.abs(fs.h_t - (fs.h_t1 + fs.theta * fs.goe_part)).max() <= 1e-12
    assert fs.theta == pytest.approx(theta_t(0.7, params.r))


def test_decompose_time_zero():
    spec = EnsembleSpec(n=40, kind="erdos_renyi", q_exponent=0.4)
    h0 = sample_erdos_renyi(spec, derive_stream(5, 2))
    fs = decompose_sample(h0, FlowParams(n=40, t=0.0), derive_stream(5, 3))
    assert np.array_equal(fs.h_t1, h0)
    assert np.array_equal(fs.h_t, h0)
    assert fs.theta == 0.0


def test_decompose_infeasible_r_override():
    # an r above the profile minimum drives the diagonal residual variance
    # negative, which must be an error rather than silent clipping
    h0 = sample_goe(30, derive_stream(5, 4))
    params = FlowParams(n=30, t=1.0, r_value=2.0)
    with pytest.raises(InfeasibleDecompositionError):
        decompose_sample(h0, params, derive_stream(5, 5))


def test_decompose_matches_evolve_moments():
    # law equivalence of the two sampling routes: pooled entry mean and
    # variance agree within 4 combined standard errors
    n, t = 100, 0.5
    spec = EnsembleSpec(n=n, kind="erdos_renyi", q_exponent=0.4)
    f = spec.entry_mean
    params = FlowParams(n=n, t=t, mean=f)
    ev, de = [], []
    for k in range(400):
        h_e = evolve(
            sample_erdos_renyi(spec, derive_stream(6, 4 * k)),
            params, derive_stream(6, 4 * k + 1),
        )
        h_d = decompose_sample(
            sample_erdos_renyi(spec, derive_stream(6, 4 * k + 2)),
            params, derive_stream(6, 4 * k + 3),
        ).h_t
        ev.append(upper(h_e))
        de.append(upper(h_d))
    x, y = np.concatenate(ev), np.concatenate(de)
    se = np.hypot(x.std() / np.sqrt(x.size), y.std() / np.sqrt(y.size))
    assert abs(x.mean() - y.mean()) <= 4 * se
    cx, cy = x - f, y - f
    vx, vy = np.mean(cx * cx), np.mean(cy * cy)
    se_v = np.hypot(
        np.sqrt((np.mean(cx ** 4) - vx * vx) / x.size),
        np.sqrt((np.mean(cy ** 4) - vy * vy) / y.size),
    )
    assert abs(vx - vy) <= 4 * se_v


def test_decompose_matches_evolve_spectra():
    # Gaussian-divisibility consistency: the two sampling routes must give
    # the same spectral law, KS <= 0.02 over pooled N = 200 spectra
    n, t, trials = 200, 0.5, 200
    spec = EnsembleSpec(n=n, kind="erdos_renyi", q_exponent=0.4)
    params = FlowParams(n=n, t=t, mean=spec.entry_mean)
    ev, de = [], []
    for k in range(trials):
        h_e = evolve(
            sample_erdos_renyi(spec, derive_stream(7, 4 * k)),
            params, derive_stream(7, 4 * k + 1),
        )
        h_d = decompose_sample(
            sample_erdos_renyi(spec, derive_stream(7, 4 * k + 2)),
            params, derive_stream(7, 4 * k + 3),
        ).h_t
        ev.append(eigenvalues_of(h_e))
        de.append(eigenvalues_of(h_d))
    ks = ks_distance(np.concatenate(ev), np.concatenate(de))
    assert ks <= 0.02


def test_flow_params_profile_r():
    n = 10
    profile = np.full((n, n), 2.0 / n)
    profile[0, 1] = profile[1, 0] = 0.5 / n
    params = FlowParams(n=n, t=1.0, profile=profile)
    assert params.r == pytest.approx(0.5)
