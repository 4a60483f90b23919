"""Samplers for the random matrix ensembles under study.

All samplers return dense real symmetric ``(n, n)`` arrays whose symmetry is
exact: the upper triangle (diagonal included) is drawn and mirrored.  Matrices
are plain ndarrays; treat them as immutable once sampled.

The sparse ensemble at sparsity ``q`` draws each upper-triangle entry as

    h_ij = (gamma / q) * Bernoulli(q^2 / n),     gamma = (1 - q^2/n)^(-1/2),

which has mean ``gamma*q/n`` and centered variance exactly ``1/n``.  The mean
part is the rank-one matrix ``f |e><e|`` with ``e = (1,..,1)/sqrt(n)`` and
``f = gamma*q``, so the centered part is available by subtracting ``f/n`` from
every entry.
"""

import math
from dataclasses import dataclass

import numpy as np

from .rng import RngStream

__all__ = [
    "EnsembleSpec",
    "DeformationSelector",
    "MomentReport",
    "sample_erdos_renyi",
    "sample_goe",
    "sample_sparse_generic",
    "sample_matrix",
    "deform",
    "moment_report",
    "centered_part",
    "alternating_profile",
    "dump_matrix_csv",
]

KINDS = ("erdos_renyi", "sparse_generic", "goe")

# Admissible variance profiles satisfy c1/n <= s_ij <= c2/n.
PROFILE_BOUNDS = (0.05, 20.0)

# Default constant for the entry moment bound C^k / (n q^(k-2)); violations
# are reported as flags, never raised.
MOMENT_BOUND_C = 2.0

_MOMENT_K_RANGE = range(2, 9)


@dataclass(frozen=True, eq=False)
class EnsembleSpec:
    """Parameters pinning down one sampling law.

    n            matrix dimension
    kind         "erdos_renyi" | "sparse_generic" | "goe"
    q_exponent   sparsity exponent a with q = n**a (sparse kinds only)
    mean_f       rank-one mean coefficient f (entry mean is f/n); None means
                 the kind's default: gamma*q for erdos_renyi, 0 otherwise
    profile      per-entry variance matrix s_ij, or None for the uniform 1/n
                 profile (sparse_generic only)
    """

    n: int
    kind: str
    q_exponent: float = 0.4
    mean_f: float | None = None
    profile: np.ndarray | None = None

    def __post_init__(self):
        problems = self.validation_errors()
        if problems:
            raise ValueError("; ".join(problems))

    def validation_errors(self):
        errs = []
        if self.kind not in KINDS:
            errs.append(f"unknown ensemble kind {self.kind!r}")
            return errs
        if self.n < 2:
            errs.append(f"n must be >= 2, got {self.n}")
            return errs
        if self.kind in ("erdos_renyi", "sparse_generic"):
            if not 0.0 < self.q_exponent <= 0.5:
                errs.append(f"q_exponent must lie in (0, 1/2], got {self.q_exponent}")
            elif self.kind == "erdos_renyi" and self.q ** 2 >= self.n:
                errs.append(
                    f"q^2 = {self.q ** 2:.6g} must be < n = {self.n} "
                    "(entry probability q^2/n must stay below 1)"
                )
        if self.kind == "erdos_renyi" and self.mean_f is not None:
            errs.append("erdos_renyi derives mean_f = gamma*q; leave it unset")
        if self.mean_f is not None:
            if not 0.0 <= self.mean_f <= math.sqrt(self.n):
                errs.append(f"mean_f must lie in [0, sqrt(n)], got {self.mean_f}")
        if self.profile is not None:
            if self.kind != "sparse_generic":
                errs.append(f"kind {self.kind!r} does not take a variance profile")
            else:
                errs.extend(_profile_errors(self.profile, self.n))
        return errs

    @property
    def q(self):
        return float(self.n) ** self.q_exponent

    @property
    def gamma(self):
        p = self.q ** 2 / self.n
        return (1.0 - p) ** -0.5

    @property
    def rank_one_mean(self):
        """The coefficient f in H = B + f|e><e|; entry mean is f/n."""
        if self.kind == "erdos_renyi":
            return self.gamma * self.q
        return 0.0 if self.mean_f is None else float(self.mean_f)

    @property
    def entry_mean(self):
        return self.rank_one_mean / self.n

    def variance_profile(self):
        """Full (n, n) matrix of entry variances s_ij."""
        if self.profile is not None:
            return self.profile
        return np.full((self.n, self.n), 1.0 / self.n)


def _profile_errors(profile, n):
    errs = []
    profile = np.asarray(profile)
    if profile.shape != (n, n):
        return [f"profile shape {profile.shape} does not match n = {n}"]
    if not np.array_equal(profile, profile.T):
        errs.append("profile must be symmetric")
    lo, hi = PROFILE_BOUNDS
    if not np.all(np.isfinite(profile)):
        errs.append("profile entries must be finite")
    elif profile.min() < lo / n or profile.max() > hi / n:
        errs.append(
            f"profile entries must lie in [{lo}/n, {hi}/n] = "
            f"[{lo / n:.3g}, {hi / n:.3g}]"
        )
    return errs


def alternating_profile(n, lo, hi):
    """Checkerboard variance profile taking values lo/n and hi/n."""
    i = np.arange(n)
    parity = (i[:, None] + i[None, :]) % 2
    return np.where(parity == 0, lo / n, hi / n)


@dataclass(frozen=True)
class DeformationSelector:
    """Entry position (a, b) with interpolation weight theta in [0, 1].

    Indices are 0-based row/column positions with a <= b.
    """

    a: int
    b: int
    theta: float = 1.0

    def __post_init__(self):
        if self.a < 0 or self.b < self.a:
            raise ValueError(f"need 0 <= a <= b, got a={self.a}, b={self.b}")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"theta must lie in [0, 1], got {self.theta}")


def _symmetric_from_upper(n, values):
    iu = np.triu_indices(n)
    out = np.empty((n, n))
    out[iu] = values
    out[iu[1], iu[0]] = values
    return out


def sample_erdos_renyi(spec: EnsembleSpec, rng: RngStream):
    """Sparse Erdos-Renyi matrix: entries (gamma/q) * Bernoulli(q^2/n)."""
    if spec.kind != "erdos_renyi":
        raise ValueError(f"spec.kind must be 'erdos_renyi', got {spec.kind!r}")
    n, q = spec.n, spec.q
    p = q * q / n
    scale = spec.gamma / q
    m = n * (n + 1) // 2
    vals = scale * rng.bernoulli(p, size=m)
    return _symmetric_from_upper(n, vals)


def sample_goe(n, rng: RngStream):
    """GOE matrix: off-diagonal N(0, 1/n), diagonal N(0, 2/n)."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    iu = np.triu_indices(n)
    variance = np.where(iu[0] == iu[1], 2.0 / n, 1.0 / n)
    vals = rng.gaussian(0.0, variance, size=iu[0].shape[0])
    return _symmetric_from_upper(n, vals)


def sample_sparse_generic(spec: EnsembleSpec, rng: RngStream):
    """Centered sparse entries rescaled to an admissible variance profile.

    Each centered entry is sqrt(n*s_ij) times the centered Erdos-Renyi entry
    (gamma/q)(Bernoulli(q^2/n) - q^2/n), so it has mean 0, variance s_ij and
    k-th moment bounded by C^k / (n q^(k-2)).  The mean f is added back as
    f/n on every entry.
    """
    if spec.kind != "sparse_generic":
        raise ValueError(f"spec.kind must be 'sparse_generic', got {spec.kind!r}")
    n, q = spec.n, spec.q
    p = q * q / n
    scale = spec.gamma / q
    iu = np.triu_indices(n)
    s_upper = spec.variance_profile()[iu]
    m = iu[0].shape[0]
    bern = rng.bernoulli(p, size=m)
    centered = np.sqrt(n * s_upper) * scale * (bern - p)
    return _symmetric_from_upper(n, centered + spec.entry_mean)


def sample_matrix(spec: EnsembleSpec, rng: RngStream):
    """Dispatch on spec.kind."""
    if spec.kind == "erdos_renyi":
        return sample_erdos_renyi(spec, rng)
    if spec.kind == "sparse_generic":
        return sample_sparse_generic(spec, rng)
    return sample_goe(spec.n, rng)


def centered_part(h, spec: EnsembleSpec):
    """B = H - f|e><e|, the matrix of centered entries."""
    return h - spec.entry_mean


def deform(h, sel: DeformationSelector, f):
    """Interpolate one symmetric entry pair toward its mean.

    Positions (a, b) and (b, a) become f + theta*(h_ab - f); everything else
    is copied unchanged.  theta = 1 is the identity, theta = 0 pins the entry
    at f.
    """
    n = h.shape[0]
    if not (0 <= sel.a < n and sel.b < n):
        raise ValueError(f"selector ({sel.a}, {sel.b}) outside a {n}x{n} matrix")
    out = h.copy()
    if sel.theta != 1.0:
        value = f + sel.theta * (h[sel.a, sel.b] - f)
        out[sel.a, sel.b] = value
        out[sel.b, sel.a] = value
    return out


def dump_matrix_csv(h, path):
    """Debug dump: one "row,col,value" line per upper-triangle entry."""
    n = h.shape[0]
    iu = np.triu_indices(n)
    with open(path, "w") as fh:
        fh.write("row,col,value\n")
        for r, c in zip(*iu):
            fh.write(f"{r},{c},{float(h[r, c])!r}\n")


@dataclass(frozen=True)
class MomentReport:
    """Empirical k-th absolute moment of centered entries vs its bound.

    pooled_offdiag  moment averaged over off-diagonal entries and samples
    pooled_diag     moment averaged over diagonal entries and samples
    max_entry       largest single-entry moment estimate (noisy for few samples)
    bound           reference: C^k/(n q^(k-2)) for sparse kinds; for GOE the
                    exact Gaussian moment E|Z|^k of the off-diagonal law
    ok              flag, never an error: pooled moments against the bound
                    (GOE gets 25% slack since its bound is an equality, not
                    an inequality, and the diagonal variance is doubled)
    """

    k: int
    pooled_offdiag: float
    pooled_diag: float
    max_entry: float
    bound: float
    ok: bool


def moment_report(samples, k, spec: EnsembleSpec, c_bound=MOMENT_BOUND_C):
    """Check E|b_ij|^k of the centered entries against the sparsity bound."""
    if k not in _MOMENT_K_RANGE:
        raise ValueError(f"k must lie in [2, 8], got {k}")
    if len(samples) == 0:
        raise ValueError("need at least one sampled matrix")
    n = spec.n
    for h in samples:
        if h.shape != (n, n):
            raise ValueError(f"sample shape {h.shape} does not match spec n = {n}")

    iu = np.triu_indices(n)
    acc = np.zeros(iu[0].shape[0])
    for h in samples:
        acc += np.abs(h[iu] - spec.entry_mean) ** k
    per_entry = acc / len(samples)

    off = iu[0] != iu[1]
    pooled_offdiag = float(per_entry[off].mean())
    pooled_diag = float(per_entry[~off].mean())
    max_entry = float(per_entry.max())

    if spec.kind == "goe":
        # exact absolute moment E|Z|^k of N(0, 1/n); equals (k-1)!! n^(-k/2)
        # for even k
        bound = 2 ** (k / 2) * math.gamma((k + 1) / 2) / math.sqrt(math.pi) * n ** (-k / 2)
        ok = bool(pooled_offdiag <= bound * 1.25)
    else:
        bound = c_bound ** k / (n * spec.q ** (k - 2))
        ok = bool(max(pooled_offdiag, pooled_diag) <= bound)
    return MomentReport(k, pooled_offdiag, pooled_diag, max_entry, bound, ok)
