"""Level repulsion: small gaps are rare, and chi_M(Q_i) stays flat in t.

Q_i = (1/N^2) sum_{j != i} (lambda_j - lambda_i)^(-2) blows up as the gap at
i closes; composing with the saturating cutoff chi_M makes its expectation
finite and comparable along the flow.  This script estimates the small-gap
probability for sparse and GOE ensembles and shows the coupled flow
comparison of E[chi_M(Q_i)].
"""

from rmtlab import EnsembleSpec
from rmtlab.spectral import classical_location, rho_sc
from rmtlab.statistics import (
    CutoffSpec,
    chi_q_flow_comparison,
    level_repulsion_probability,
)

SEED = 20250808
N, TRIALS = 300, 400
i = N // 2 - 1

gamma = classical_location(i, N)
threshold = 0.1 / (N * rho_sc(gamma))  # normalized gap <= 0.1
print(f"P(normalized central gap <= 0.1), {TRIALS} trials each "
      f"(2x2 surmise mass: 0.0078):")
for kind, q_exp in (("erdos_renyi", 0.4), ("goe", None)):
    spec = (EnsembleSpec(n=N, kind=kind, q_exponent=q_exp) if q_exp
            else EnsembleSpec(n=N, kind=kind))
    est = level_repulsion_probability(spec, i, TRIALS, SEED,
                                      threshold=float(threshold))
    print(f"  {kind:12s} freq={est.frequency:.4f}  "
          f"Wilson 95% [{est.wilson_low:.4f}, {est.wilson_high:.4f}]")

print("\ncoupled E[chi_M(Q_i)] along the flow (same matrices, same noise):")
spec = EnsembleSpec(n=N, kind="erdos_renyi", q_exponent=0.4)
cut = CutoffSpec.from_n_tau(N, 0.2)
print(f"  cutoff M = N^0.4 = {cut.m:.2f}")
for t in (0.0, 1e-4, 1e-2):
    cmp = chi_q_flow_comparison(spec, t, i, cut, 150, SEED)
    print(f"  t={t:8.1e}  E0={cmp.e0:.4f}  Et={cmp.et:.4f}  "
          f"diff={cmp.diff:+.5f} +- {cmp.se:.5f}")
print("  (the t = 0 difference is exactly zero by construction)")
