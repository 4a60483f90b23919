import numpy as np
import pytest

from rmtlab.ensembles import (
    DeformationSelector,
    EnsembleSpec,
    alternating_profile,
    centered_part,
    deform,
    dump_matrix_csv,
    moment_report,
    sample_erdos_renyi,
    sample_goe,
    sample_sparse_generic,
)
from rmtlab.rng import derive_stream


def upper(h):
    return h[np.triu_indices(h.shape[0])]


def test_erdos_renyi_centered_variance_is_one_over_n():
    # Var(h_ij) = gamma^2 (q^2/N)(1 - q^2/N)/q^2 = 1/N holds exactly in law;
    # the pooled Monte Carlo estimate must sit within 4 standard errors.
    spec = EnsembleSpec(n=1000, kind="erdos_renyi", q_exponent=0.4)
    b = upper(centered_part(sample_erdos_renyi(spec, derive_stream(8, 0)), spec))
    m2 = np.mean(b * b)
    m4 = np.mean(b ** 4)
    se = np.sqrt((m4 - m2 * m2) / b.size)
    assert abs(m2 - 1.0 / spec.n) <= 4 * se


def test_erdos_renyi_entry_mean_is_gamma_q_over_n():
    spec = EnsembleSpec(n=1000, kind="erdos_renyi", q_exponent=0.4)
    h = sample_erdos_renyi(spec, derive_stream(8, 1))
    x = upper(h)
    se = x.std() / np.sqrt(x.size)
    assert spec.rank_one_mean == spec.gamma * spec.q
    assert abs(x.mean() - spec.entry_mean) <= 4 * se


def test_erdos_renyi_third_moment_bound():
    # Monte Carlo check of E|b|^3 <= C^3/(N q) with C = 2 over 1e6 entries.
    spec = EnsembleSpec(n=1000, kind="erdos_renyi", q_exponent=0.4)
    samples = [
        sample_erdos_renyi(spec, derive_stream(8, 2 + k)) for k in range(2)
    ]
    rep = moment_report(samples, 3, spec)
    assert max(rep.pooled_offdiag, rep.pooled_diag) <= rep.bound
    assert rep.bound == pytest.approx(8.0 / (1000 * spec.q))
    assert rep.ok


def test_erdos_renyi_rejects_dense_boundary():
    with pytest.raises(ValueError, match="q\\^2"):
        EnsembleSpec(n=100, kind="erdos_renyi", q_exponent=0.5)


def test_goe_entry_variances():
    # Monte Carlo bands, 4 sigma: offdiag 0.1 +- 0.005, diag 0.2 +- 0.01 at N=10
    n, trials = 10, 100_000
    rng = derive_stream(13, 0)
    iu = np.triu_indices(n)
    offs = np.empty(trials)
    diags = np.empty(trials)
    for k in range(trials):
        variance = np.where(iu[0] == iu[1], 2.0 / n, 1.0 / n)
        vals = rng.gaussian(0.0, variance, size=iu[0].size)
        offs[k] = vals[1]   # entry (0, 1)
        diags[k] = vals[0]  # entry (0, 0)
    assert abs(offs.var() - 0.1) <= 0.005
    assert abs(diags.var() - 0.2) <= 0.01


def test_goe_matrix_is_exactly_symmetric_and_finite():
    h = sample_goe(200, derive_stream(13, 1))
    assert np.array_equal(h, h.T)
    assert np.all(np.isfinite(h))


def test_sparse_generic_uniform_profile_matches_centered_erdos_renyi():
    # With s_ij = 1/N and f = 0 the construction literally reduces to the
    # centered Erdos-Renyi entry law, bernoulli draw for bernoulli draw.
    er = EnsembleSpec(n=300, kind="erdos_renyi", q_exponent=0.4)
    sg = EnsembleSpec(n=300, kind="sparse_generic", q_exponent=0.4)
    b_er = centered_part(sample_erdos_renyi(er, derive_stream(77, 5)), er)
    b_sg = sample_sparse_generic(sg, derive_stream(77, 5))
    assert np.allclose(b_er, b_sg, rtol=0, atol=1e-15)


def test_sparse_generic_alternating_profile_variances():
    n = 100
    profile = alternating_profile(n, 0.8, 1.2)
    spec = EnsembleSpec(n=n, kind="sparse_generic", q_exponent=0.4,
                        profile=profile)
    iu = np.triu_indices(n)
    lo_mask = profile[iu] < 1.0 / n
    acc = np.zeros(iu[0].size)
    trials = 400
    for k in range(trials):
        b = upper(sample_sparse_generic(spec, derive_stream(99, k)))
        acc += b * b
    per_entry = acc / trials
    # pooled per class: >= 1e5 draws each, so 5% is comfortably 4 sigma
    assert np.mean(per_entry[lo_mask]) == pytest.approx(0.8 / n, rel=0.05)
    assert np.mean(per_entry[~lo_mask]) == pytest.approx(1.2 / n, rel=0.05)


def test_sparse_generic_mean():
    spec = EnsembleSpec(n=200, kind="sparse_generic", q_exponent=0.4, mean_f=0.5)
    vals = np.concatenate([
        upper(sample_sparse_generic(spec, derive_stream(31, k))) for k in range(50)
    ])
    se = vals.std() / np.sqrt(vals.size)
    assert abs(vals.mean() - 0.5 / 200) <= 4 * se


def test_profile_bounds_enforced():
    n = 50
    bad = np.full((n, n), 100.0 / n)
    with pytest.raises(ValueError, match="profile"):
        EnsembleSpec(n=n, kind="sparse_generic", profile=bad)


def test_deform_theta_one_is_identity():
    h = sample_goe(20, derive_stream(4, 0))
    out = deform(h, DeformationSelector(2, 5, theta=1.0), f=0.3)
    assert np.array_equal(out, h)


def test_deform_theta_zero_pins_entry_at_f():
    h = sample_goe(20, derive_stream(4, 1))
    out = deform(h, DeformationSelector(2, 5, theta=0.0), f=0.3)
    assert out[2, 5] == 0.3 and out[5, 2] == 0.3
    mask = np.ones_like(h, dtype=bool)
    mask[2, 5] = mask[5, 2] = False
    assert np.array_equal(out[mask], h[mask])


def test_deform_midpoint():
    h = np.zeros((3, 3))
    h[0, 1] = h[1, 0] = 1.0
    out = deform(h, DeformationSelector(0, 1, theta=0.5), f=0.0)
    assert out[0, 1] == 0.5 and out[1, 0] == 0.5


def test_deform_is_monotone_in_theta():
    h = np.zeros((2, 2))
    h[0, 1] = h[1, 0] = 2.0
    vals = [
        deform(h, DeformationSelector(0, 1, theta=t), f=0.5)[0, 1]
        for t in (0.0, 0.25, 0.5, 0.75, 1.0)
    ]
    assert vals == sorted(vals)


def test_moment_report_second_moment_erdos_renyi():
    spec = EnsembleSpec(n=1000, kind="erdos_renyi", q_exponent=0.4)
    samples = [sample_erdos_renyi(spec, derive_stream(55, k)) for k in range(2)]
    rep = moment_report(samples, 2, spec)
    assert rep.pooled_offdiag == pytest.approx(1.0 / 1000, rel=0.01)


def test_moment_report_goe_fourth_moment():
    # Gaussian fourth-moment oracle: E b^4 = 3 (1/N)^2 off the diagonal
    spec = EnsembleSpec(n=10, kind="goe")
    samples = [sample_goe(10, derive_stream(56, k)) for k in range(20_000)]
    rep = moment_report(samples, 4, spec)
    assert rep.bound == pytest.approx(3.0 / 100)
    assert rep.pooled_offdiag == pytest.approx(rep.bound, rel=0.10)


def test_moment_report_rejects_empty_and_bad_k():
    spec = EnsembleSpec(n=10, kind="goe")
    with pytest.raises(ValueError):
        moment_report([], 2, spec)
    with pytest.raises(ValueError):
        moment_report([sample_goe(10, derive_stream(0, 0))], 9, spec)


def test_dump_matrix_csv_round_trip(tmp_path):
    h = sample_goe(6, derive_stream(60, 0))
    path = tmp_path / "m.csv"
    dump_matrix_csv(h, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "row,col,value"
    assert len(lines) == 1 + 6 * 7 // 2
    r, c, v = lines[1].split(",")
    assert (int(r), int(c)) == (0, 0) and float(v) == h[0, 0]


def test_samplers_reject_mismatched_kind():
    with pytest.raises(ValueError):
        sample_erdos_renyi(EnsembleSpec(n=10, kind="goe"), derive_stream(0, 0))
    with pytest.raises(ValueError):
        sample_sparse_generic(EnsembleSpec(n=10, kind="goe"), derive_stream(0, 0))
