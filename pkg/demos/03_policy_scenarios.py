"""
Reference case versus three policy campaigns
============================================

Run the four scenarios on the calibrated population and compare EV shares.
The default averages 10 replicates; pass a smaller number on the
command line for a quicker look, e.g. ``python demos/03_policy_scenarios.py 2``.
"""

import sys
from pathlib import Path

from coherence_diffusion import ScenarioConfig, ScenarioKind, compare_scenarios, run_scenario
from coherence_diffusion.engine import PopulationSpec, base_population, write_averaged_csv
from coherence_diffusion.influence import default_campaign
from coherence_diffusion.profiles import CALIBRATION_SEED

replicates = int(sys.argv[1]) if len(sys.argv) > 1 else 10
out = Path("out")
out.mkdir(exist_ok=True)
spec = PopulationSpec(seed=CALIBRATION_SEED)
pop = base_population(ScenarioConfig(population=spec))

results = []
for kind in ScenarioKind:
    cfg = ScenarioConfig(kind=kind, campaign=default_campaign(kind),
                         replicates=replicates, population=spec)
    res = run_scenario(cfg, pop)
    write_averaged_csv(res.averaged, out / f"{kind.value}.averaged.csv")
    results.append((kind.value, res.averaged))
    ev = res.averaged.share("ALL", "EV")
    print(f"{kind.value:17s} EV share t=1 {100 * ev[0]:5.1f}%   "
          f"t=50 {100 * ev[49]:5.1f}%   t=100 {100 * ev[-1]:5.1f}%")

# difference to the reference case, per mobility type, at the last step
report = compare_scenarios(results)
print("\nEV delta at t=100 (pp):  " + "  ".join(f"{g:>5s}" for g in report.groups))
for name, d in report.deltas.items():
    print(f"  {name:22s}" + "  ".join(f"{x:+5.1f}" for x in d[-1]))
