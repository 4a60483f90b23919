"""Dense symmetric eigendecomposition and single-matrix spectral functionals.

Everything an experiment reads off one matrix lives here: the certified
eigendecomposition, empirical and semicircle Stieltjes transforms, classical
eigenvalue locations, the local-law deviation report, eigenvector
delocalization and eigenvalue-counting diagnostics, resolvent entries, and the
closed-form eigenvalue perturbation derivatives.

Conventions: eigenvalues ascend; eigenvector ``i`` is column ``i``; all indices
are 0-based, so the classical location of eigenvalue index ``i`` is the
``(i+1)/n`` quantile of the semicircle density.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .ensembles import DeformationSelector
from .errors import DegenerateSpectrumError, NumericalError

__all__ = [
    "SpectralDecomposition",
    "LocalLawReport",
    "eigh",
    "eigenvalues_of",
    "stieltjes_empirical",
    "m_sc",
    "rho_sc",
    "semicircle_cdf",
    "classical_location",
    "classical_locations",
    "bulk_indices",
    "local_law_deviation",
    "delocalization_sup",
    "counting_check",
    "resolvent_entry",
    "eigenvalue_derivatives",
]

ORTHONORMALITY_TOL = 1e-10
DEGENERACY_GAP = 1e-8
LOCAL_LAW_PREFACTOR = 5.0


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Ascending eigenvalues, orthonormal eigenvector columns, and the
    certified residual max_i ||A u_i - lambda_i u_i||_2."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual: float

    @property
    def n(self):
        return self.eigenvalues.shape[0]


def eigh(a):
    """Full decomposition of a real symmetric matrix, with accuracy audit.

    Raises NumericalError (carrying the achieved residual) if the backend
    output misses the residual or orthonormality contract.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    if not np.array_equal(a, a.T):
        raise ValueError("matrix must be exactly symmetric")

    try:
        w, u = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc

    resid_cols = a @ u - u * w
    residual = float(np.sqrt((resid_cols ** 2).sum(axis=0)).max())
    scale = 1.0 + float(np.abs(w).max(initial=0.0))
    if residual > 1e-9 * scale:
        raise NumericalError(
            f"residual {residual:.3e} exceeds 1e-9 * (1 + max|lambda|)",
            residual=residual,
        )
    gram_defect = float(np.abs(u.T @ u - np.eye(a.shape[0])).max())
    if gram_defect > ORTHONORMALITY_TOL:
        raise NumericalError(
            f"orthonormality defect {gram_defect:.3e} exceeds {ORTHONORMALITY_TOL}",
            residual=residual,
        )
    return SpectralDecomposition(w, u, residual)


def eigenvalues_of(a):
    """Ascending eigenvalues only; the fast path for Monte Carlo loops."""
    return np.linalg.eigvalsh(a)


def _eigs(spectrum):
    if isinstance(spectrum, SpectralDecomposition):
        return spectrum.eigenvalues
    return np.asarray(spectrum, dtype=float)


def stieltjes_empirical(spectrum, z):
    """m_N(z) = (1/N) sum_i 1/(lambda_i - z) for Im z > 0."""
    lam = _eigs(spectrum)
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise ValueError("Im z must be positive")
    return (1.0 / (lam - z[..., None])).mean(axis=-1)


def m_sc(z):
    """Semicircle Stieltjes transform: the root of m^2 + z m + 1 = 0 with
    Im m >= 0, i.e. the branch behaving like -1/z at infinity.

    Defined for Im z >= 0; on the real axis inside (-2, 2) it returns the
    boundary value (-E + i sqrt(4 - E^2))/2.
    """
    z = np.asarray(z, dtype=complex)
    # sqrt(z-2)*sqrt(z+2) with principal branches is continuous on the closed
    # upper half plane and asymptotic to z, which selects the right root.
    return 0.5 * (-z + np.sqrt(z - 2.0) * np.sqrt(z + 2.0))


def rho_sc(e):
    """Semicircle density (1/2pi) sqrt(4 - E^2) on [-2, 2], zero outside."""
    e = np.asarray(e, dtype=float)
    return np.sqrt(np.clip(4.0 - e * e, 0.0, None)) / (2.0 * np.pi)


def semicircle_cdf(e):
    """Closed-form semicircle CDF, evaluated via the stable arcsine form."""
    e = np.clip(np.asarray(e, dtype=float), -2.0, 2.0)
    return 0.5 + (e * np.sqrt(4.0 - e * e) / 4.0 + np.arcsin(e / 2.0)) / np.pi


def classical_locations(indices, n):
    """Vectorized classical locations: gamma solving CDF(gamma) = (i+1)/n."""
    indices = np.asarray(indices)
    if np.any(indices < 0) or np.any(indices >= n):
        raise ValueError("indices must lie in [0, n-1]")
    target = (indices + 1.0) / n
    lo = np.full(target.shape, -2.0)
    hi = np.full(target.shape, 2.0)
    # 60 bisection steps shrink the bracket to 4*2^-60 < 1e-17
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        below = semicircle_cdf(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def classical_location(i, n):
    """gamma_i with integral_{-inf}^{gamma_i} rho_sc = (i+1)/n, 0-based i."""
    if i == n - 1:
        warnings.warn("classical location of the top index sits at the edge 2")
    return float(classical_locations(np.array([i]), n)[0])


def bulk_indices(n, kappa):
    """0-based indices of the bulk window [[kappa N, (1-kappa) N]]."""
    if not 0.0 < kappa < 0.5:
        raise ValueError(f"kappa must lie in (0, 1/2), got {kappa}")
    first = math.ceil(kappa * n)
    last = math.floor((1.0 - kappa) * n)
    return np.arange(first - 1, last)


@dataclass(frozen=True, eq=False)
class LocalLawReport:
    """Per-grid-point deviation |m_N - m_sc| against its envelope."""

    e: np.ndarray
    eta: np.ndarray
    deviation: np.ndarray
    bound: np.ndarray
    passed: np.ndarray

    def all_passed(self):
        return bool(self.passed.all())


def local_law_deviation(spectrum, grid, q, prefactor=LOCAL_LAW_PREFACTOR):
    """Compare m_N to m_sc on a grid of spectral points.

    ``grid`` is a sequence of complex points E + i eta with eta > 0; the
    envelope is prefactor * (1/q + 1/(N eta)).  For a GOE reference pass
    q = sqrt(N).
    """
    lam = _eigs(spectrum)
    n = lam.shape[0]
    z = np.asarray(grid, dtype=complex).ravel()
    if np.any(z.imag <= 0):
        raise ValueError("grid points need Im z > 0")
    dev = np.abs(stieltjes_empirical(lam, z) - m_sc(z))
    bound = prefactor * (1.0 / q + 1.0 / (n * z.imag))
    return LocalLawReport(z.real, z.imag, dev, bound, dev <= bound)


def delocalization_sup(dec: SpectralDecomposition, kappa):
    """sup over bulk eigenvectors and coordinates of |u_i(j)|^2."""
    idx = bulk_indices(dec.n, kappa)
    return float((dec.eigenvectors[:, idx] ** 2).max())


def counting_check(spectrum, delta, c_bound):
    """Do eigenvalue counts stay below C |I| N for all windows |I| >= N^(delta-1)?

    Windows of dyadic widths 2^k N^(-1+delta) slide across [-3, 3]; returns
    (ok, worst) where worst = (left, width, count, ratio) describes the
    interval with the largest count/(|I| N) ratio.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    lam = _eigs(spectrum)
    n = lam.shape[0]
    inside = np.sort(lam[(lam >= -3.0) & (lam <= 3.0)])
    if inside.size == 0:
        return True, (math.nan, math.nan, 0, 0.0)

    worst = (math.nan, math.nan, 0, -math.inf)
    width = n ** (-1.0 + delta)
    while width <= 6.0:
        # the ratio over all windows of this width is maximized by a window
        # whose left end sits on an eigenvalue
        counts = np.searchsorted(inside, inside + width, side="right") - np.arange(
            inside.size
        )
        j = int(counts.argmax())
        ratio = counts[j] / (width * n)
        if ratio > worst[3]:
            worst = (float(inside[j]), float(width), int(counts[j]), float(ratio))
        width *= 2.0
    return bool(worst[3] <= c_bound), worst


def resolvent_entry(dec: SpectralDecomposition, j, k, z):
    """G_jk(z) = sum_i u_i(j) u_i(k) / (lambda_i - z)."""
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("Im z must be positive")
    u = dec.eigenvectors
    return complex(np.sum(u[j] * u[k] / (dec.eigenvalues - z)))


def _direction_overlaps(dec, i, sel):
    """w_j = u_i^T V u_j for the symmetric unit direction V at (a, b)."""
    u = dec.eigenvectors
    ua, ub = u[sel.a], u[sel.b]
    if sel.a == sel.b:
        return ua[i] * ua
    return ua[i] * ub + ub[i] * ua


def eigenvalue_derivatives(dec: SpectralDecomposition, i, sel: DeformationSelector, order):
    """d^k lambda_i / d eps^k for A + eps V, V the symmetric direction at (a, b).

    V carries ones at (a, b) and (b, a) (a single one at (a, a) when a = b).
    Closed forms:

        order 1:  u_i^T V u_i
        order 2:  2 sum_{j != i} (u_i^T V u_j)^2 / (lambda_i - lambda_j)
        order 3:  6 sum_{j1, j2 != i} (u_i^T V u_j1)(u_j1^T V u_j2)(u_j2^T V u_i)
                      / ((lambda_i - lambda_j1)(lambda_i - lambda_j2))
                  - 6 (u_i^T V u_i) sum_{j != i} (u_i^T V u_j)^2
                      / (lambda_i - lambda_j)^2

    Requires lambda_i simple: the closest neighbour must sit at least
    DEGENERACY_GAP away.
    """
    if order not in (1, 2, 3):
        raise ValueError(f"order must be 1, 2 or 3, got {order}")
    lam = dec.eigenvalues
    n = lam.shape[0]
    if not 0 <= i < n:
        raise ValueError(f"index {i} outside spectrum of size {n}")
    if not (0 <= sel.a < n and sel.b < n):
        raise ValueError(f"selector ({sel.a}, {sel.b}) outside a {n}x{n} matrix")

    diff = lam - lam[i]
    others = np.arange(n) != i
    colliding = np.flatnonzero(others & (np.abs(diff) < DEGENERACY_GAP))
    if colliding.size:
        raise DegenerateSpectrumError(
            f"eigenvalue {i} is within {DEGENERACY_GAP} of indices "
            f"{colliding.tolist()}",
            indices=[i, *colliding.tolist()],
        )

    w = _direction_overlaps(dec, i, sel)
    if order == 1:
        return float(w[i])
    if order == 2:
        return float(2.0 * np.sum(w[others] ** 2 / -diff[others]))

    p = np.zeros(n)
    p[others] = w[others] / (-diff[others])  # (lambda_i - lambda_j) = -diff_j
    u = dec.eigenvectors
    alpha = float(u[sel.a] @ p)
    if sel.a == sel.b:
        quad = alpha * alpha
    else:
        quad = 2.0 * alpha * float(u[sel.b] @ p)
    corr = float(np.sum(w[others] ** 2 / diff[others] ** 2))
    return 6.0 * quad - 6.0 * float(w[i]) * corr
