"""
How strongly must agents react to policy?
=========================================

Override every agent's policy-impact factor with a fixed value and record the
final EV share, one replicate per setting.
"""

from coherence_diffusion import ScenarioConfig, ScenarioKind, run_sweep
from coherence_diffusion.engine import PopulationSpec, base_population
from coherence_diffusion.influence import default_campaign
from coherence_diffusion.profiles import CALIBRATION_SEED

spec = PopulationSpec(seed=CALIBRATION_SEED)
pop = base_population(ScenarioConfig(population=spec))
settings = ["empirical", 0.0, 0.25, 0.5, 0.75, 1.0]

for kind in ScenarioKind.policies():
    cfg = ScenarioConfig(kind=kind, campaign=default_campaign(kind),
                         population=spec)
    sweep = run_sweep(cfg, settings, replicates=1, population=pop)
    row = "  ".join(f"{s!s:>9}: {100 * m:5.1f}%" for s, m in zip(settings, sweep.mean()))
    print(f"{kind.value:17s} {row}")
