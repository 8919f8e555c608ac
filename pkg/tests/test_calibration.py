import warnings

import numpy as np
import pytest

from coherence_diffusion.calibration import (CalibrationWarning,
                                             calibrate_profiles)
from coherence_diffusion.population import (PopulationError,
                                            generate_population)
from coherence_diffusion.profiles import (CALIBRATION_SEED, TARGET_SHARES,
                                          calibrated_profiles,
                                          default_profiles)
from oracles import recount


def test_reported_error_matches_independent_recount():
    res = calibrate_profiles(default_profiles(), seed=5, n=200,
                             tolerance=0.05, budget=100)
    pop = generate_population(200, res.profiles, seed=5)
    worst = 0.0
    for t in range(1, 5):
        prefs = [a.current_preference for a in pop.agents if a.mobility_type == t]
        shares = recount(prefs, 5)
        worst = max(worst, max(abs(s - x) for s, x in zip(shares, TARGET_SHARES[t])))
    assert res.error == pytest.approx(worst, abs=1e-12)
    assert res.converged == (res.error <= 0.05)


def test_degenerate_target_all_choose_first_action():
    targets = dict(TARGET_SHARES)
    targets[1] = (1.0, 0.0, 0.0, 0.0, 0.0)
    res = calibrate_profiles(default_profiles(), targets=targets, seed=5,
                             n=200, tolerance=0.05, budget=200)
    assert res.type_errors[1] == 0.0
    pop = generate_population(200, res.profiles, seed=5)
    assert {a.current_preference for a in pop.agents
            if a.mobility_type == 1} == {0}


@pytest.mark.filterwarnings("ignore::coherence_diffusion.calibration.CalibrationWarning")
def test_deterministic_given_seed():
    a = calibrate_profiles(default_profiles(), seed=9, n=120, budget=20)
    b = calibrate_profiles(default_profiles(), seed=9, n=120, budget=20)
    for pa, pb in zip(a.profiles, b.profiles):
        assert np.array_equal(pa.facilitation_mean, pb.facilitation_mean)
    assert a.error == b.error


def test_budget_exhaustion_warns_and_returns_best():
    with pytest.warns(CalibrationWarning, match="exhausted"):
        res = calibrate_profiles(default_profiles(), seed=1, n=120, budget=1,
                                 tolerance=1e-6)
    assert not res.converged and res.warning
    assert res.iterations == 1


def test_invalid_targets_rejected():
    targets = dict(TARGET_SHARES)
    targets[2] = (0.5, 0.5, 0.5, 0.0, 0.0)
    with pytest.raises(PopulationError, match="probability"):
        calibrate_profiles(default_profiles(), targets=targets, budget=1)


def test_shipped_profiles_reproduce_targets():
    pop = generate_population(675, calibrated_profiles(), CALIBRATION_SEED)
    for t in range(1, 5):
        prefs = [a.current_preference for a in pop.agents if a.mobility_type == t]
        dev = np.abs(np.array(recount(prefs, 5)) - TARGET_SHARES[t])
        assert dev.max() <= 0.03


def test_shipped_profiles_are_reproducible():
    with warnings.catch_warnings():
        warnings.simplefilter("error", CalibrationWarning)
        res = calibrate_profiles(default_profiles(), seed=CALIBRATION_SEED)
    for got, shipped in zip(res.profiles, calibrated_profiles()):
        np.testing.assert_allclose(got.facilitation_mean,
                                   shipped.facilitation_mean, rtol=0, atol=1e-15)
