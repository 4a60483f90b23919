"""Multi-eigenvalue observables and paired Monte Carlo comparisons.

Bulk gaps are normalized by the local semicircle density, so their mean is 1
in the bulk: gap_i = N rho_sc(gamma_i) (lambda_{i+1} - lambda_i).  The inverse
square sum

    Q_i = (1/N^2) sum_{j != i} 1/(lambda_j - lambda_i)^2

measures repulsion around eigenvalue i and is regularized by the saturating
cutoff chi_M before taking expectations, so that exact degeneracies (Q_i =
+inf) contribute the finite value M.

Monte Carlo estimators draw per-trial streams derived from (seed, stream_base
+ trial), so results do not depend on how trials are scheduled, and coupled
comparisons at t = 0 are exactly zero.
"""

import math
from dataclasses import dataclass

import numpy as np

from .ensembles import EnsembleSpec, sample_matrix
from .flow import FlowParams, evolve
from .rng import derive_stream, trial_map
from .spectral import (
    bulk_indices,
    classical_locations,
    counting_check,
    eigenvalues_of,
    rho_sc,
    stieltjes_empirical,
)

__all__ = [
    "EmpiricalDistribution",
    "CutoffSpec",
    "ObservableSpec",
    "RepulsionEstimate",
    "FlowComparison",
    "GreenComparison",
    "CorrelationEstimate",
    "bulk_gaps",
    "q_statistic",
    "q_dyadic_bound_check",
    "chi_m",
    "wilson_interval",
    "level_repulsion_probability",
    "gap_observable_expectation",
    "correlation_average",
    "chi_q_flow_comparison",
    "green_trace_comparison",
    "ks_distance",
    "ks_distance_to_cdf",
]

# Audited maxima of |chi'|, |chi''|, |chi'''| for the quintic blend below.
CHI_DERIVATIVE_BOUNDS = (1.512, 3.941, 36.0)


class EmpiricalDistribution:
    """Sorted sample set with right-continuous CDF evaluation."""

    def __init__(self, samples):
        samples = np.asarray(samples, dtype=float).ravel()
        if samples.size == 0:
            raise ValueError("need at least one sample")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        self.samples = np.sort(samples)
        self.n = samples.size

    def cdf(self, x):
        return np.searchsorted(self.samples, x, side="right") / self.n


def _as_samples(dist):
    if isinstance(dist, EmpiricalDistribution):
        return dist.samples
    return EmpiricalDistribution(dist).samples


def ks_distance(a, b):
    """Exact two-sample Kolmogorov-Smirnov distance.

    Both ECDFs are right-continuous steps, so the supremum of |F_a - F_b| is
    attained at one of the merged sample points.
    """
    xa, xb = _as_samples(a), _as_samples(b)
    grid = np.concatenate([xa, xb])
    fa = np.searchsorted(xa, grid, side="right") / xa.size
    fb = np.searchsorted(xb, grid, side="right") / xb.size
    return float(np.abs(fa - fb).max())


def ks_distance_to_cdf(samples, cdf):
    """Exact one-sample KS distance against a continuous CDF callable."""
    x = _as_samples(samples)
    n = x.size
    f = np.asarray(cdf(x), dtype=float)
    upper = np.abs(np.arange(1, n + 1) / n - f)
    lower = np.abs(np.arange(0, n) / n - f)
    return float(max(upper.max(), lower.max()))


@dataclass(frozen=True)
class CutoffSpec:
    """Saturating cutoff chi_M: identity up to M-1, constant M from M on.

    The unit-width blend is the quintic Hermite interpolant with endpoint
    values (M-1, M), slopes (1, 0) and vanishing second derivatives, which
    keeps |chi(x) - x| <= 1 on [0, M] and derivative maxima
    CHI_DERIVATIVE_BOUNDS.  In flow experiments M = N^(2 tau).
    """

    m: float
    tau: float | None = None

    def __post_init__(self):
        if self.m <= 1.0:
            raise ValueError(f"M must exceed 1, got {self.m}")

    @classmethod
    def from_n_tau(cls, n, tau):
        return cls(m=float(n) ** (2.0 * tau), tau=tau)


def chi_m(x, cut: CutoffSpec, order=0):
    """chi_M(x) or its derivative of the given order (1..3).

    Accepts scalars or arrays; x = +inf maps to M (derivatives to 0), which
    is how degenerate-spectrum sentinels enter expectations.
    """
    if order not in (0, 1, 2, 3):
        raise ValueError(f"order must be 0..3, got {order}")
    x = np.asarray(x, dtype=float)
    if np.any(x[np.isfinite(x)] < 0):
        raise ValueError("chi_M is defined for x >= 0")
    m = cut.m
    s = np.clip(x - (m - 1.0), 0.0, 1.0)
    saturated = x >= m
    if order == 0:
        blend = (m - 1.0) + s + s ** 3 * (4.0 - 7.0 * s + 3.0 * s * s)
        out = np.where(x <= m - 1.0, x, np.where(saturated, m, blend))
    elif order == 1:
        blend = 1.0 + s * s * (12.0 - 28.0 * s + 15.0 * s * s)
        out = np.where(x <= m - 1.0, 1.0, np.where(saturated, 0.0, blend))
    elif order == 2:
        blend = s * (24.0 - 84.0 * s + 60.0 * s * s)
        out = np.where(x <= m - 1.0, 0.0, np.where(saturated, 0.0, blend))
    else:
        blend = 24.0 - 168.0 * s + 180.0 * s * s
        out = np.where(x <= m - 1.0, 0.0, np.where(saturated, 0.0, blend))
    return float(out) if out.ndim == 0 else out


def bulk_gaps(spectrum, kappa):
    """Normalized gaps N rho_sc(gamma_i) (lambda_{i+1} - lambda_i) over the bulk."""
    lam = np.asarray(spectrum, dtype=float)
    n = lam.shape[0]
    idx = bulk_indices(n, kappa)
    idx = idx[idx + 1 < n]
    gamma = classical_locations(idx, n)
    return n * rho_sc(gamma) * (lam[idx + 1] - lam[idx])


def q_statistic(spectrum, i):
    """Q_i = (1/N^2) sum_{j != i} (lambda_j - lambda_i)^(-2).

    An exact degeneracy returns the +inf sentinel instead of raising; chi_M
    maps it to M.
    """
    lam = np.asarray(spectrum, dtype=float)
    n = lam.shape[0]
    if not 0 <= i < n:
        raise ValueError(f"index {i} outside spectrum of size {n}")
    d = np.delete(lam - lam[i], i)
    if np.any(d == 0.0):
        return math.inf
    return float(np.sum(1.0 / (d * d))) / (n * n)


def q_dyadic_bound_check(spectrum, i, delta, c_bound):
    """Check Q_i <= 3 C N^delta theta^(-2) on spectra with controlled counts.

    theta is N times the smaller adjacent gap at i.  Returns (applicable,
    q_value, bound, ok): the bound is only claimed when the spectrum passes
    counting_check(delta, c_bound) and both adjacent gaps are positive.
    """
    lam = np.asarray(spectrum, dtype=float)
    n = lam.shape[0]
    adjacent = []
    if i > 0:
        adjacent.append(lam[i] - lam[i - 1])
    if i + 1 < n:
        adjacent.append(lam[i + 1] - lam[i])
    theta = n * min(adjacent)
    counts_ok, _ = counting_check(lam, delta, c_bound)
    q = q_statistic(lam, i)
    if not counts_ok or theta <= 0:
        return False, q, math.inf, True
    bound = 3.0 * c_bound * n ** delta / theta ** 2
    return True, q, bound, bool(q <= bound)


def wilson_interval(successes, trials, z=1.959963984540054):
    """95% Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials ** 2)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class RepulsionEstimate:
    frequency: float
    wilson_low: float
    wilson_high: float
    threshold: float
    trials: int


def level_repulsion_probability(spec: EnsembleSpec, i, trials, seed, *,
                                tau=None, threshold=None, stream_base=0,
                                threads=1, sample_fn=None):
    """Empirical P(lambda_{i+1} - lambda_i <= threshold) with Wilson interval.

    The default threshold is the repulsion scale N^(-1-tau); pass an explicit
    threshold to probe other gap scales (e.g. a fixed normalized gap).
    ``sample_fn(stream) -> matrix`` overrides the ensemble sampler, e.g. to
    probe a deterministic spectrum.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    if threshold is None:
        if tau is None:
            raise ValueError("give either tau or an explicit threshold")
        threshold = float(spec.n) ** (-1.0 - tau)
    if not 0 <= i < spec.n - 1:
        raise ValueError(f"index {i} has no upper neighbour in a spectrum of {spec.n}")
    draw = sample_fn if sample_fn is not None else (
        lambda stream: sample_matrix(spec, stream)
    )

    def one(k):
        lam = eigenvalues_of(draw(derive_stream(seed, stream_base + k)))
        return lam[i + 1] - lam[i] <= threshold

    hits = int(np.sum(trial_map(one, trials, threads)))
    low, high = wilson_interval(hits, trials)
    return RepulsionEstimate(hits / trials, low, high, threshold, trials)


@dataclass(frozen=True, eq=False)
class ObservableSpec:
    """Test function from a fixed catalog, product form across its arity.

    gaussian_bump   exp(1 - 1/(1 - u^2)) on |u| < 1, u = (x - center)/width
    cosine_bump     (1 + cos(pi u))/2 on |u| < 1
    constant        the constant ``value`` everywhere (test plumbing; not
                    compactly supported)

    center may be a scalar or a per-axis sequence.
    """

    kind: str
    arity: int = 1
    center: float | tuple = 0.0
    width: float = 1.0
    value: float = 1.0

    def __post_init__(self):
        if self.kind not in ("gaussian_bump", "cosine_bump", "constant"):
            raise ValueError(f"unknown observable kind {self.kind!r}")
        if self.arity < 1:
            raise ValueError("arity must be >= 1")
        if self.width <= 0:
            raise ValueError("width must be positive")

    def centers(self):
        c = np.asarray(self.center, dtype=float).ravel()
        if c.size == 1:
            return np.full(self.arity, c[0])
        if c.size != self.arity:
            raise ValueError(f"{c.size} centers for arity {self.arity}")
        return c

    def support(self):
        """Per-axis (lo, hi) support bounds, or None when unbounded."""
        if self.kind == "constant":
            return None
        c = self.centers()
        return [(ci - self.width, ci + self.width) for ci in c]

    def __call__(self, *args):
        """Evaluate at points; each arg is the array of one coordinate."""
        if len(args) != self.arity:
            raise ValueError(f"expected {self.arity} coordinates, got {len(args)}")
        args = [np.asarray(a, dtype=float) for a in args]
        if self.kind == "constant":
            return np.broadcast_arrays(*args)[0] * 0.0 + self.value
        c = self.centers()
        out = 1.0
        for x, ci in zip(args, c):
            u = (x - ci) / self.width
            inside = np.abs(u) < 1.0
            u = np.where(inside, u, 0.0)
            if self.kind == "gaussian_bump":
                vals = np.where(inside, np.exp(1.0 - 1.0 / (1.0 - u * u)), 0.0)
            else:
                vals = np.where(inside, 0.5 * (1.0 + np.cos(np.pi * u)), 0.0)
            out = out * vals
        return out


@dataclass(frozen=True)
class MeanEstimate:
    value: float
    se: float
    trials: int


def gap_observable_expectation(spec: EnsembleSpec, obs: ObservableSpec, i,
                               offsets, trials, seed, *, stream_base=0,
                               threads=1):
    """Monte Carlo E[O(N rho_sc(gamma_i)(lambda_i - lambda_{i+k}) for k in offsets)]."""
    offsets = [int(k) for k in offsets]
    if len(offsets) != obs.arity:
        raise ValueError(f"{len(offsets)} offsets for arity {obs.arity}")
    if any(k < 1 for k in offsets):
        raise ValueError("offsets must be positive")
    n = spec.n
    if i + max(offsets) >= n:
        raise ValueError("offset reaches past the spectrum")
    scale = n * rho_sc(classical_locations(np.array([i]), n))[0]

    def one(k):
        lam = eigenvalues_of(sample_matrix(spec, derive_stream(seed, stream_base + k)))
        args = [np.array([scale * (lam[i] - lam[i + off])]) for off in offsets]
        return float(obs(*args)[0])

    vals = np.array(trial_map(one, trials, threads))
    se = float(vals.std(ddof=1) / math.sqrt(trials)) if trials > 1 else math.inf
    return MeanEstimate(float(vals.mean()), se, trials)


@dataclass(frozen=True)
class CorrelationEstimate:
    value: float
    se: float
    n_spectra: int


def correlation_average(spectra, e, b, obs: ObservableSpec, grid_points=64):
    """Energy-window-averaged n-point correlation estimator.

    Computes (1/2b) * integral over E' in [E-b, E+b] of the expected sum over
    ordered distinct index tuples of O(N rho_sc(E) (lambda_i1 - E'), ...),
    with the E' integral evaluated on a midpoint grid and the tuple sums
    restricted to eigenvalues inside the observable's support window.  The
    expectation is the mean over the supplied spectra; the standard error is
    across spectra.
    """
    if obs.arity not in (1, 2):
        raise ValueError(f"unsupported arity {obs.arity}; only n = 1, 2")
    if obs.support() is None:
        raise ValueError("correlation_average needs a compactly supported observable")
    spectra = [np.sort(np.asarray(s, dtype=float)) for s in spectra]
    if not spectra:
        raise ValueError("need at least one spectrum")
    if b <= 0:
        raise ValueError("b must be positive")
    if grid_points < 64:
        raise ValueError("grid must have at least 64 points")
    n = spectra[0].shape[0]
    if any(s.shape[0] != n for s in spectra):
        raise ValueError("all spectra must have equal length")
    scale = n * rho_sc(np.asarray(e, dtype=float))
    if scale <= 0:
        raise ValueError("E must lie strictly inside the bulk (-2, 2)")
    step = 2.0 * b / grid_points
    eprimes = e - b + step * (np.arange(grid_points) + 0.5)
    support = obs.support()

    def window(lam, eprime, lo, hi):
        a = np.searchsorted(lam, eprime + lo / scale, side="left")
        z = np.searchsorted(lam, eprime + hi / scale, side="right")
        return lam[a:z]

    per_spectrum = np.empty(len(spectra))
    for si, lam in enumerate(spectra):
        total = 0.0
        for eprime in eprimes:
            if obs.arity == 1:
                xs = scale * (window(lam, eprime, *support[0]) - eprime)
                total += float(obs(xs).sum())
            else:
                x1 = scale * (window(lam, eprime, *support[0]) - eprime)
                x2 = scale * (window(lam, eprime, *support[1]) - eprime)
                if x1.size and x2.size:
                    vals = obs(x1[:, None], x2[None, :])
                    # ordered distinct pairs: drop coincident eigenvalues
                    same = x1[:, None] == x2[None, :]
                    total += float(vals.sum() - vals[same].sum())
        per_spectrum[si] = total / grid_points
    se = (
        float(per_spectrum.std(ddof=1) / math.sqrt(len(spectra)))
        if len(spectra) > 1
        else math.inf
    )
    return CorrelationEstimate(float(per_spectrum.mean()), se, len(spectra))


@dataclass(frozen=True)
class FlowComparison:
    """Coupled estimates of E[chi_M(Q_i)] at times 0 and t."""

    e0: float
    et: float
    diff: float
    se: float
    t: float
    trials: int


def chi_q_flow_comparison(spec: EnsembleSpec, t, i, cut: CutoffSpec, trials,
                          seed, *, stream_base=0, threads=1):
    """Compare E[chi_M(Q_i(H_0))] with E[chi_M(Q_i(H_t))] under coupling.

    Trial k draws H_0 from stream 2k and the flow noise from stream 2k+1, so
    the two expectations share every sample of H_0; at t = 0 the difference
    is exactly zero.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    params = FlowParams(n=spec.n, t=t, mean=spec.entry_mean)

    def one(k):
        h0 = sample_matrix(spec, derive_stream(seed, stream_base + 2 * k))
        ht = evolve(h0, params, derive_stream(seed, stream_base + 2 * k + 1))
        x0 = chi_m(q_statistic(eigenvalues_of(h0), i), cut)
        xt = chi_m(q_statistic(eigenvalues_of(ht), i), cut)
        return x0, xt

    vals = np.array(trial_map(one, trials, threads))
    diffs = vals[:, 1] - vals[:, 0]
    se = float(diffs.std(ddof=1) / math.sqrt(trials)) if trials > 1 else math.inf
    return FlowComparison(
        float(vals[:, 0].mean()), float(vals[:, 1].mean()),
        float(diffs.mean()), se, t, trials,
    )


@dataclass(frozen=True, eq=False)
class GreenComparison:
    """Per-point difference of E[F(N^-1 Tr G(z))] between times 0 and t."""

    z: np.ndarray
    diff: np.ndarray
    se: np.ndarray
    t: float
    trials: int


def green_trace_comparison(spec: EnsembleSpec, t, zs, f_kind, trials, seed, *,
                           kappa=0.1, delta=0.5, stream_base=0, threads=1):
    """Coupled comparison of resolvent-trace observables along the flow.

    The admissible spectral window is |E| <= 2 - kappa with
    N^(-1-delta) <= eta <= N^(-1).  F acts on the complex normalized trace:
    'im' takes the imaginary part, 're' the real part.
    """
    if f_kind not in ("im", "re"):
        raise ValueError(f"unknown trace functional {f_kind!r}")
    zs = np.asarray(zs, dtype=complex).ravel()
    n = spec.n
    lo_eta, hi_eta = float(n) ** (-1.0 - delta), 1.0 / n
    for z in zs:
        if abs(z.real) > 2.0 - kappa or not lo_eta <= z.imag <= hi_eta:
            raise ValueError(
                f"z = {z} outside the window |E| <= {2 - kappa}, "
                f"eta in [{lo_eta:.3g}, {hi_eta:.3g}]"
            )
    take = np.imag if f_kind == "im" else np.real
    params = FlowParams(n=n, t=t, mean=spec.entry_mean)

    def one(k):
        h0 = sample_matrix(spec, derive_stream(seed, stream_base + 2 * k))
        ht = evolve(h0, params, derive_stream(seed, stream_base + 2 * k + 1))
        m0 = stieltjes_empirical(eigenvalues_of(h0), zs)
        mt = stieltjes_empirical(eigenvalues_of(ht), zs)
        return take(mt) - take(m0)

    diffs = np.array(trial_map(one, trials, threads))
    se = (
        diffs.std(axis=0, ddof=1) / math.sqrt(trials)
        if trials > 1
        else np.full(zs.shape, math.inf)
    )
    return GreenComparison(zs, diffs.mean(axis=0), se, t, trials)
