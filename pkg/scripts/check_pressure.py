"""Quick look at the two pressure branches and their crossing."""

from horseshoe_thermo.config import MapParams
from horseshoe_thermo.errors import NotFoundError
from horseshoe_thermo.expansion import detect_phase_transition, pressure_curve
from horseshoe_thermo.measures import LOG_OMEGA, topological_entropy_estimate

params = MapParams()

report = topological_entropy_estimate(30)
print(f"log omega = {LOG_OMEGA:.10f}")
print(f"  count growth = {report.h_estimate:.10f}  naive = {report.naive:.6f}")

for L in (6, 8):
    curve = pressure_curve([0.1 * k for k in range(21)], L, params, threads=4)
    print(f"\nL = {L}")
    for row in curve.rows()[::4]:
        print(f"  t={row['t']:.2f}  Q={row['branch_Q']:.4f}  hyp={row['branch_hyp']:.4f}")
    try:
        found = detect_phase_transition(curve)
    except NotFoundError:
        print("  no crossing on [0, 2]")
        continue
    print(f"  t0 = {found.t0_hat:.6f}  slope jump = {found.slope_jump:.4f}")
