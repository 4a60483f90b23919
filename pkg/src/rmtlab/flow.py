"""Ornstein-Uhlenbeck matrix flow, sampled exactly from its transition law.

The flow relaxes every entry independently toward the entry mean ``f`` at rate
1/(2 n s_ij) while injecting matching Gaussian noise, so that (f, s_ij) is
stationary:

    h_ij(t) = f + exp(-t/(2 n s_ij)) (h_ij(0) - f) + Normal(0, s_ij (1 - e^{-t/(n s_ij)})).

There is no time stepping: the right-hand side IS the law of the flow at time
t, so trajectories carry zero discretization error.

The same endpoint law splits into a Gaussian-divisible pair

    H_t  =d=  H_t^(1) + theta_t G,      theta_t = sqrt(r (1 - e^{-t/r}) / 2),

with G an independent GOE, r = min_{i<=j} n s_ij, and H_t^(1) the decayed
initial matrix plus the residual (entrywise) Gaussian noise.  The residual
variance on the diagonal carries the GOE weight (1+delta_ij)/2 and can only
vanish, never go negative, when r is the exact profile minimum.
"""

from dataclasses import dataclass

import numpy as np

from .ensembles import sample_goe
from .errors import InfeasibleDecompositionError
from .rng import RngStream

__all__ = ["FlowParams", "FlowSample", "theta_t", "evolve", "decompose_sample"]


def theta_t(t, r):
    """sqrt(r (1 - e^{-t/r}) / 2), evaluated stably for t/r << 1."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if r <= 0:
        raise ValueError(f"r must be positive, got {r}")
    return float(np.sqrt(0.5 * r * -np.expm1(-t / r)))


@dataclass(frozen=True, eq=False)
class FlowParams:
    """Flow time, variance profile and entry mean.

    n         matrix dimension
    t         flow time, >= 0
    profile   entry variances s_ij, or None for the uniform 1/n profile
    mean      per-entry mean f (note: a rank-one coefficient f_coef on
              |e><e| corresponds to entry mean f_coef/n)
    r_value   override for r = min n s_ij; leave None for the exact minimum
              (overrides larger than the minimum make the Gaussian-divisible
              split infeasible and are rejected there)
    """

    n: int
    t: float
    profile: np.ndarray | None = None
    mean: float = 0.0
    r_value: float | None = None

    def __post_init__(self):
        if self.t < 0:
            raise ValueError(f"t must be nonnegative, got {self.t}")
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.profile is not None:
            p = np.asarray(self.profile)
            if p.shape != (self.n, self.n):
                raise ValueError(f"profile shape {p.shape} does not match n = {self.n}")
            if not np.array_equal(p, p.T) or not np.all(p > 0):
                raise ValueError("profile must be symmetric and positive")

    def variance_profile(self):
        if self.profile is not None:
            return self.profile
        return np.full((self.n, self.n), 1.0 / self.n)

    @property
    def r(self):
        if self.r_value is not None:
            return float(self.r_value)
        return float(self.n * self.variance_profile().min())

    @property
    def theta(self):
        return theta_t(self.t, self.r)


@dataclass(frozen=True, eq=False)
class FlowSample:
    """Gaussian-divisible sample: h_t = h_t1 + theta * goe_part exactly."""

    h_t: np.ndarray
    h_t1: np.ndarray
    goe_part: np.ndarray
    theta: float


def _upper(n):
    return np.triu_indices(n)


def evolve(h0, params: FlowParams, rng: RngStream):
    """Sample H_t given H_0, exact in law; t = 0 returns a copy of H_0."""
    n = params.n
    if h0.shape != (n, n):
        raise ValueError(f"h0 shape {h0.shape} does not match n = {n}")
    if params.t == 0:
        return h0.copy()
    iu = _upper(n)
    s = params.variance_profile()[iu]
    decay = np.exp(-params.t / (2.0 * n * s))
    noise_var = s * -np.expm1(-params.t / (n * s))
    vals = params.mean + decay * (h0[iu] - params.mean)
    vals = vals + rng.gaussian(0.0, noise_var, size=s.shape[0])
    out = np.empty((n, n))
    out[iu] = vals
    out[iu[1], iu[0]] = vals
    return out


def decompose_sample(h0, params: FlowParams, rng: RngStream):
    """Sample the pair (H_t^(1), G) and assemble H_t = H_t^(1) + theta_t G.

    Raises InfeasibleDecompositionError when the residual entry variance
    s_ij (1-e^{-t/(n s_ij)}) - (1+delta_ij)/(2n) r (1-e^{-t/r}) dips negative,
    which can only happen for an r_value override above the profile minimum.
    """
    n = params.n
    if h0.shape != (n, n):
        raise ValueError(f"h0 shape {h0.shape} does not match n = {n}")
    iu = _upper(n)
    s = params.variance_profile()[iu]
    r = params.r
    theta = params.theta
    goe_weight = np.where(iu[0] == iu[1], 1.0, 0.5)
    resid_var = s * -np.expm1(-params.t / (n * s)) - goe_weight * (
        r / n
    ) * -np.expm1(-params.t / r)
    tol = 1e-12 * float(s.max())
    if resid_var.min() < -tol:
        raise InfeasibleDecompositionError(
            f"negative residual variance {resid_var.min():.3e}: "
            f"r = {r:.6g} is too large for the profile"
        )
    resid_var = np.clip(resid_var, 0.0, None)

    decay = np.exp(-params.t / (2.0 * n * s))
    vals = params.mean + decay * (h0[iu] - params.mean)
    vals = vals + rng.gaussian(0.0, resid_var, size=s.shape[0])
    h1 = np.empty((n, n))
    h1[iu] = vals
    h1[iu[1], iu[0]] = vals
    if params.t == 0:
        h1 = h0.copy()

    goe = sample_goe(n, rng)
    return FlowSample(h1 + theta * goe, h1, goe, theta)
