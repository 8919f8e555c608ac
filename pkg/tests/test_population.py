import json

import numpy as np
from scipy.integrate import trapezoid
import pytest
from hypothesis import given, settings, strategies as st

from coherence_diffusion.coherence import build_network
from coherence_diffusion.kinds import ScenarioKind
from coherence_diffusion.population import (
    DEMOGRAPHIC_RANGES, Agent, Demographics, Population, PopulationError,
    generate_population, largest_remainder, load_population,
    population_from_dict, population_to_dict, save_population, tally_arrays,
    tally_shares, truncated_normal)
from coherence_diffusion.profiles import (MU_MOMENTS, TYPE_SHARES,
                                          calibrated_profiles,
                                          default_profiles)
from oracles import largest_remainder_oracle, recount


@pytest.fixture(scope="module")
def small_pop():
    return generate_population(40, default_profiles(), seed=11)


def test_type_counts_for_675():
    counts = largest_remainder(675, [0.15, 0.16, 0.34, 0.35])
    assert counts.tolist() == [101, 108, 230, 236]
    assert counts.tolist() == largest_remainder_oracle(675, [0.15, 0.16, 0.34, 0.35])


@settings(max_examples=1000, deadline=None)
@given(st.integers(4, 5000),
       st.lists(st.integers(1, 100), min_size=2, max_size=6))
def test_property_largest_remainder(n, raw):
    shares = np.array(raw) / sum(raw)
    counts = largest_remainder(n, shares)
    assert counts.sum() == n
    assert np.all(np.abs(counts - shares * n) < 1 + 1e-9)


def test_generated_population_is_valid_and_deterministic(small_pop):
    again = generate_population(40, default_profiles(), seed=11)
    for a, b in zip(small_pop.agents, again.agents):
        assert a.mind.state_equal(b.mind)
        assert a.demographics == b.demographics
        assert a.location == b.location and a.policy_impact == b.policy_impact
    for a in small_pop.agents:
        d = a.demographics
        for name, (lo, hi, _) in DEMOGRAPHIC_RANGES.items():
            assert lo <= getattr(d, name) <= hi
        assert all(0.33 <= c <= 0.68 for c in a.location)
        assert 0 <= a.social_radius <= 1
        assert all(0 <= m <= 1 for m in a.policy_impact.values())
        # preference is the decision of the settled mind
        assert a.current_preference == a.mind.decide().chosen_action
    other = generate_population(40, default_profiles(), seed=12)
    assert any(not a.mind.state_equal(b.mind)
               for a, b in zip(small_pop.agents, other.agents))


def test_generator_rejects_bad_shares():
    profiles = default_profiles()
    profiles[0].share = 0.2
    with pytest.raises(PopulationError, match="sum"):
        generate_population(40, profiles, seed=0)
    with pytest.raises(PopulationError):
        generate_population(3, default_profiles(), seed=0)


def test_mu_truncated_normal_moments():
    u = (np.arange(200000) + 0.5) / 200000
    x = truncated_normal(u, 0.71, 0.22)
    assert x.min() >= 0 and x.max() <= 1
    # moments of the truncated law, computed independently by quadrature
    grid = np.linspace(0, 1, 200001)
    dens = np.exp(-0.5 * ((grid - 0.71) / 0.22) ** 2)
    mean = trapezoid(grid * dens, grid) / trapezoid(dens, grid)
    assert abs(x.mean() - mean) < 1e-3


def test_type_iv_tax_mu_drawn_from_target_moments():
    pop = generate_population(675, default_profiles(), seed=3)
    mu = np.array([a.policy_impact[ScenarioKind.TAX_EXEMPTION]
                   for a in pop.agents if a.mobility_type == 4])
    assert MU_MOMENTS[4][ScenarioKind.TAX_EXEMPTION] == (0.71, 0.22)
    grid = np.linspace(0, 1, 20001)
    dens = np.exp(-0.5 * ((grid - 0.71) / 0.22) ** 2)
    mean = trapezoid(grid * dens, grid) / trapezoid(dens, grid)
    assert abs(mu.mean() - mean) < 0.03  # 236 agents: ~3 standard errors


def test_type_shares_match_targets():
    assert TYPE_SHARES == {1: 0.15, 2: 0.16, 3: 0.34, 4: 0.35}


def test_tally_counting_and_empty_group():
    t = tally_arrays(np.array([0, 0, 1, 2]), 5)
    assert t.shares.tolist() == [0.5, 0.25, 0.25, 0, 0]
    e = tally_arrays(np.zeros(0, dtype=np.int64), 5)
    assert e.empty and e.shares.tolist() == [0] * 5


def test_tally_matches_recount(small_pop):
    prefs = [a.current_preference for a in small_pop.agents]
    assert tally_shares(small_pop).shares.tolist() == pytest.approx(
        recount(prefs, 5), abs=1e-15)
    by_type = tally_shares(small_pop, by_type=True)
    for t, tally in by_type.items():
        sub = [a.current_preference for a in small_pop.agents
               if a.mobility_type == t]
        assert tally.shares.tolist() == pytest.approx(recount(sub, 5), abs=1e-15)
        if not tally.empty:
            assert abs(tally.shares.sum() - 1) <= 1e-12


def test_save_load_round_trip(tmp_path, small_pop):
    path = tmp_path / "pop.json"
    save_population(small_pop, path)
    back = load_population(path)
    assert len(back) == len(small_pop)
    for a, b in zip(small_pop.agents, back.agents):
        assert a.mind.state_equal(b.mind)
        assert a.current_preference == b.current_preference
        assert a.demographics == b.demographics
        assert a.policy_impact == b.policy_impact
    assert population_to_dict(back) == population_to_dict(small_pop)


def _doc(small_pop, n=3):
    data = population_to_dict(small_pop)
    data["agents"] = data["agents"][:n]
    return data


def test_three_agent_file(tmp_path, small_pop):
    path = tmp_path / "p.json"
    path.write_text(json.dumps(_doc(small_pop)))
    assert len(load_population(path)) == 3


def test_age_below_range_cites_bound(small_pop):
    data = _doc(small_pop)
    data["agents"][1]["age"] = 17
    with pytest.raises(PopulationError, match=r"agent row 1.*age=17.*\[18, 69\]"):
        population_from_dict(data)


@pytest.mark.parametrize("mutate, pattern", [
    (lambda r: r.update(colour=1), "agent row 0, field 'colour': unknown"),
    (lambda r: r.pop("income"), "agent row 0, field 'income': missing"),
    (lambda r: r.update(x=0.9), "agent row 0: x=0.9"),
    (lambda r: r.update(gender="f"), "field 'gender': expected a number"),
    (lambda r: r["mu"].update(Reference=0.5), "Reference takes no mu"),
])
def test_schema_errors_name_row_and_field(small_pop, mutate, pattern):
    data = _doc(small_pop)
    mutate(data["agents"][0])
    with pytest.raises(PopulationError, match=pattern):
        population_from_dict(data)


def test_header_rejects_unknown_field(small_pop):
    data = _doc(small_pop)
    data["extra"] = 1
    with pytest.raises(PopulationError, match="header"):
        population_from_dict(data)


def test_population_ids_must_be_dense():
    mind = build_network(np.zeros((8, 5)), np.zeros(8), np.zeros(8),
                         np.zeros(5))
    demo = Demographics(30, 0, 3, 3, 2.0, 2.0)
    agent = Agent(1, mind, demo, (0.5, 0.5), 0.3, 1, {})
    with pytest.raises(PopulationError, match="dense"):
        Population([agent])


def test_calibrated_profiles_ship_with_package():
    profiles = calibrated_profiles()
    assert [p.type_id for p in profiles] == [1, 2, 3, 4]
    assert sum(p.share for p in profiles) == pytest.approx(1.0, abs=1e-12)


def test_pack_unpack_round_trip(small_pop):
    state = small_pop.pack()
    state.fac[0, 0, 0] = 0.123
    back = small_pop.unpack(state)
    assert back.agents[0].mind.facilitation[0, 0] == 0.123
    assert small_pop.agents[0].mind.facilitation[0, 0] != 0.123
