"""Default mobility-type profiles.

Population shares, policy-impact moments and the initial modal splits are
target aggregates.  Everything about weight distributions is an assumption
to be tuned by :func:`coherence_diffusion.calibration.calibrate_profiles`;
the shipped ``calibrated_profiles.json`` holds the result for the default
seed.
"""

from importlib import resources

import numpy as np

from .kinds import ACTION_LABELS, NEED_LABELS, ScenarioKind
from .population import TypeProfile, load_profiles

Z, T, P = (ScenarioKind.ZERO_EMISSION_ZONE, ScenarioKind.TAX_EXEMPTION,
           ScenarioKind.PURCHASE_SUBSIDY)

TYPE_NAMES = {
    1: "Comfort-oriented Individualists",
    2: "Cost-oriented Pragmatics",
    3: "Innovation-oriented Progressives",
    4: "Eco-oriented Opinion Leaders",
}

TYPE_SHARES = {1: 0.15, 2: 0.16, 3: 0.34, 4: 0.35}

# initial splits, order: ICE car, EV, public transport, bicycle, car sharing
TARGET_SHARES = {
    1: (0.91, 0.03, 0.05, 0.00, 0.01),
    2: (0.25, 0.05, 0.38, 0.27, 0.05),
    3: (0.49, 0.25, 0.15, 0.09, 0.02),
    4: (0.07, 0.29, 0.29, 0.27, 0.08),
}

MU_MOMENTS = {  # (mean, sd) per scenario
    1: {Z: (0.45, 0.25), T: (0.47, 0.26), P: (0.53, 0.28)},
    2: {Z: (0.48, 0.22), T: (0.52, 0.27), P: (0.56, 0.26)},
    3: {Z: (0.60, 0.20), T: (0.66, 0.22), P: (0.69, 0.23)},
    4: {Z: (0.63, 0.21), T: (0.71, 0.22), P: (0.71, 0.23)},
}

# three most important needs per type
TOP_NEEDS = {
    1: ("independence", "security", "comfort"),
    2: ("cost efficiency", "security", "independence"),
    3: ("independence", "security", "comfort"),
    4: ("cost efficiency", "security", "eco-friendliness"),
}

# actions each type feels warmly about
WARM_ACTIONS = {
    1: ("ICE car",),
    2: (),
    3: (),
    4: ("bicycle", "public transport", "EV"),
}

FACILITATION_SD = 0.10
PRIORITY_HIGH, PRIORITY_LOW, PRIORITY_SD = 0.6, 0.3, 0.2
NEED_VALENCE_MEAN, NEED_VALENCE_SD = 0.3, 0.2
WARM_VALENCE, ACTION_VALENCE_SD = 0.4, 0.2


def default_profiles() -> list[TypeProfile]:
    """Uncalibrated profiles: flat facilitation means, target moments."""
    G, A = len(NEED_LABELS), len(ACTION_LABELS)
    out = []
    for tid in sorted(TYPE_SHARES):
        pri = np.full(G, PRIORITY_LOW)
        for label in TOP_NEEDS[tid]:
            pri[NEED_LABELS.index(label)] = PRIORITY_HIGH
        aval = np.zeros(A)
        for label in WARM_ACTIONS[tid]:
            aval[ACTION_LABELS.index(label)] = WARM_VALENCE
        out.append(TypeProfile(
            type_id=tid,
            name=TYPE_NAMES[tid],
            share=TYPE_SHARES[tid],
            target_initial_shares=np.array(TARGET_SHARES[tid]),
            mu_mean={k: m for k, (m, _) in MU_MOMENTS[tid].items()},
            mu_sd={k: s for k, (_, s) in MU_MOMENTS[tid].items()},
            facilitation_mean=np.zeros((G, A)),
            facilitation_sd=FACILITATION_SD,
            priority_mean=pri,
            priority_sd=PRIORITY_SD,
            need_valence_mean=np.full(G, NEED_VALENCE_MEAN),
            need_valence_sd=NEED_VALENCE_SD,
            action_valence_mean=aval,
            action_valence_sd=ACTION_VALENCE_SD,
        ))
    return out


def calibrated_profiles() -> list[TypeProfile]:
    """Profiles calibrated for ``CALIBRATION_SEED`` at n = 675."""
    ref = resources.files(__package__) / "data" / "calibrated_profiles.json"
    with resources.as_file(ref) as path:
        return load_profiles(path)


CALIBRATION_SEED = 20140601
DEFAULT_N = 675
