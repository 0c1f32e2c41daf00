# Dirichlet vs Neumann actuation under the same power-law weight family.
#
# Three quantities tell the story: how fast the solved Riccati components
# decay in the mode number, which kernel series converge, and how much
# damping the closed loop gives each mode.  Dirichlet actuation wins on all
# three for the same r, mainly because its input gain grows like n pi while
# the Neumann input stays flat.

import numpy as np

from wavelqr import ModalWeight, PowerLawWeights, WaveConfig, closed_loop_eigs, solve_closed_form
from wavelqr.kernels import decay_fit, series_thresholds
from wavelqr.model import Boundary, mode_range, weight_of

q, r = 1.0, 5.0
print(f"power-law family q = {q}, r = {r}\n")

ns_fit = np.arange(50, 301)
for boundary in (Boundary.DIRICHLET, Boundary.NEUMANN):
    cfg = WaveConfig(boundary, alpha=0.0, beta=1.0, R=1.0)
    comp = {"P12": [], "P22": [], "P11": []}
    for n in ns_fit:
        s = solve_closed_form(cfg, ModalWeight(int(n), q / n**r, 0.0, q / n**r))
        comp["P12"].append(s.p12)
        comp["P22"].append(s.p22)
        comp["P11"].append(s.p11)
    exps = {k: decay_fit(ns_fit, v) for k, v in comp.items()}
    th = series_thresholds(boundary)
    verdict = "convergent" if r > th["P11"] else "divergent"
    print(f"{boundary.value:>9}: decay exponents "
          f"P12 {exps['P12']:+.2f}, P22 {exps['P22']:+.2f}, P11 {exps['P11']:+.2f}; "
          f"P11 series {verdict} (needs r > {th['P11']:.0f})")

print("\nclosed-loop damping |Re mu_n| per mode:")
print(f"{'n':>3} {'dirichlet':>12} {'neumann':>12}")
for n in range(1, 13):
    row = []
    for boundary in (Boundary.DIRICHLET, Boundary.NEUMANN):
        cfg = WaveConfig(boundary, alpha=0.0, beta=1.0, R=1.0)
        fam = PowerLawWeights(q=q, r=r, cutoff=16)
        sol = solve_closed_form(cfg, weight_of(fam, n, boundary))
        row.append(abs(closed_loop_eigs(cfg, sol).abscissa))
    print(f"{n:>3} {row[0]:>12.6f} {row[1]:>12.6f}")

print("\nsame weights, same control penalty: the Dirichlet loop both damps")
print("low modes harder and keeps its cost kernel summable at smaller r.")
