"""Agents, population files and the synthetic population generator."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.stats import truncnorm

from . import _kernels as K
from .coherence import TIE_EPS, CoherenceNetwork, SettleParams, build_network
from .kinds import ACTION_LABELS, N_TYPES, NEED_LABELS, ScenarioKind

FORMAT_TAG = "coherence-diffusion-population/1"

# (low, high, integer?) per socio-demographic field
DEMOGRAPHIC_RANGES = {
    "age": (18, 69, True),
    "gender": (0, 1, True),
    "income": (1, 7, True),
    "education": (1, 5, True),
    "consumption": (1.0, 3.6, False),
    "modernity": (1.0, 4.0, False),
}
COORD_RANGE = (0.33, 0.68)
RADIUS_RANGE = (0.0, 1.0)
MU_RANGE = (0.0, 1.0)


class PopulationError(ValueError):
    """Schema or range violation in population data."""


def _check_range(name, value, lo, hi, integer=False):
    if integer and float(value) != int(value):
        raise PopulationError(f"{name}={value} must be an integer")
    if not lo <= value <= hi:
        raise PopulationError(
            f"{name}={value} outside allowed range [{lo}, {hi}]")


@dataclass(frozen=True)
class Demographics:
    age: int
    gender: int
    income: int
    education: int
    consumption: float
    modernity: float

    def __post_init__(self):
        for name, (lo, hi, integer) in DEMOGRAPHIC_RANGES.items():
            _check_range(name, getattr(self, name), lo, hi, integer)

    def as_vector(self) -> np.ndarray:
        """Blau-space coordinates in the order age, gender, income,
        education, modernity, consumption."""
        return np.array([self.age, self.gender, self.income, self.education,
                         self.modernity, self.consumption], dtype=float)


@dataclass
class Agent:
    id: int
    mind: CoherenceNetwork
    demographics: Demographics
    location: tuple[float, float]
    social_radius: float
    mobility_type: int
    policy_impact: dict[ScenarioKind, float]
    current_preference: int = -1

    def __post_init__(self):
        for name, c in zip("xy", self.location):
            _check_range(name, c, *COORD_RANGE)
        _check_range("radius", self.social_radius, *RADIUS_RANGE)
        _check_range("type", self.mobility_type, 1, N_TYPES, True)
        self.policy_impact = {ScenarioKind(k): float(v)
                              for k, v in self.policy_impact.items()}
        for kind, mu in self.policy_impact.items():
            _check_range(f"mu[{kind.value}]", mu, *MU_RANGE)

    def resettle(self) -> int:
        """Settle from a fresh initial state and refresh the preference."""
        self.mind.reset()
        self.mind.settle()
        prev = None if self.current_preference < 0 else self.current_preference
        self.current_preference = self.mind.decide(prev).chosen_action
        return self.current_preference

    def copy(self) -> "Agent":
        return Agent(self.id, self.mind.copy(), self.demographics,
                     self.location, self.social_radius, self.mobility_type,
                     dict(self.policy_impact), self.current_preference)


@dataclass
class PopulationState:
    """Stacked array view of a population, used by the compiled step loop."""

    fac: np.ndarray
    pri: np.ndarray
    nval: np.ndarray
    aval: np.ndarray
    act: np.ndarray
    val: np.ndarray
    pref: np.ndarray
    types: np.ndarray
    mu: dict[ScenarioKind, np.ndarray]

    def copy(self) -> "PopulationState":
        return PopulationState(
            self.fac.copy(), self.pri.copy(), self.nval.copy(),
            self.aval.copy(), self.act.copy(), self.val.copy(),
            self.pref.copy(), self.types.copy(),
            {k: v.copy() for k, v in self.mu.items()})

    @property
    def n(self) -> int:
        return self.fac.shape[0]


@dataclass
class Population:
    agents: list[Agent]
    need_labels: list[str] = field(default_factory=lambda: list(NEED_LABELS))
    action_labels: list[str] = field(
        default_factory=lambda: list(ACTION_LABELS))
    params: SettleParams = field(default_factory=SettleParams)

    def __post_init__(self):
        G, A = len(self.need_labels), len(self.action_labels)
        for pos, agent in enumerate(self.agents):
            if agent.id != pos:
                raise PopulationError(
                    f"agent ids must be dense 0..N-1; row {pos} has id "
                    f"{agent.id}")
            if (agent.mind.n_needs, agent.mind.n_actions) != (G, A):
                raise PopulationError(
                    f"agent {pos}: network is {agent.mind.n_needs}x"
                    f"{agent.mind.n_actions}, labels say {G}x{A}")

    def __len__(self):
        return len(self.agents)

    @property
    def n_needs(self) -> int:
        return len(self.need_labels)

    @property
    def n_actions(self) -> int:
        return len(self.action_labels)

    @property
    def types(self) -> np.ndarray:
        return np.array([a.mobility_type for a in self.agents], dtype=np.int64)

    @property
    def preferences(self) -> np.ndarray:
        return np.array([a.current_preference for a in self.agents],
                        dtype=np.int64)

    def copy(self) -> "Population":
        return Population([a.copy() for a in self.agents],
                          list(self.need_labels), list(self.action_labels),
                          self.params)

    def pack(self) -> PopulationState:
        ag = self.agents
        mu = {kind: np.array([a.policy_impact.get(kind, 0.0) for a in ag])
              for kind in ScenarioKind.policies()}
        return PopulationState(
            np.stack([a.mind.facilitation for a in ag]),
            np.stack([a.mind.priorities for a in ag]),
            np.stack([a.mind.need_valences for a in ag]),
            np.stack([a.mind.action_valences for a in ag]),
            np.stack([a.mind.activation for a in ag]),
            np.stack([a.mind.valence for a in ag]),
            self.preferences, self.types, mu)

    def unpack(self, state: PopulationState) -> "Population":
        """New population carrying this one's attributes and ``state``'s minds."""
        out = self.copy()
        for i, agent in enumerate(out.agents):
            m = agent.mind
            m.facilitation[:] = state.fac[i]
            m.priorities[:] = state.pri[i]
            m.need_valences[:] = state.nval[i]
            m.action_valences[:] = state.aval[i]
            m.activation[:] = state.act[i]
            m.valence[:] = state.val[i]
            agent.current_preference = int(state.pref[i])
        return out


def settle_population(pop: Population) -> None:
    for agent in pop.agents:
        agent.current_preference = -1
        agent.resettle()


# ---------------------------------------------------------------- file I/O

_AGENT_FIELDS = {
    "id", "type", "age", "gender", "income", "education", "consumption",
    "modernity", "x", "y", "radius", "mu", "facilitation", "priorities",
    "need_valences", "action_valences",
}
_HEADER_FIELDS = {"format", "needs", "actions", "need_labels",
                  "action_labels", "settle", "agents"}


def _agent_record(a: Agent) -> dict:
    d = a.demographics
    return {
        "id": a.id,
        "type": a.mobility_type,
        "age": d.age,
        "gender": d.gender,
        "income": d.income,
        "education": d.education,
        "consumption": d.consumption,
        "modernity": d.modernity,
        "x": a.location[0],
        "y": a.location[1],
        "radius": a.social_radius,
        "mu": {k.value: v for k, v in a.policy_impact.items()},
        "facilitation": a.mind.facilitation.tolist(),
        "priorities": a.mind.priorities.tolist(),
        "need_valences": a.mind.need_valences.tolist(),
        "action_valences": a.mind.action_valences.tolist(),
    }


def population_to_dict(pop: Population) -> dict:
    return {
        "format": FORMAT_TAG,
        "needs": pop.n_needs,
        "actions": pop.n_actions,
        "need_labels": list(pop.need_labels),
        "action_labels": list(pop.action_labels),
        "settle": pop.params.to_dict(),
        "agents": [_agent_record(a) for a in pop.agents],
    }


def save_population(pop: Population, path) -> None:
    Path(path).write_text(json.dumps(population_to_dict(pop)) + "\n")


def _parse_agent(row: int, rec, G: int, A: int, params) -> Agent:
    def where(name):
        return f"agent row {row}, field '{name}'"

    if not isinstance(rec, dict):
        raise PopulationError(f"agent row {row}: expected an object")
    unknown = set(rec) - _AGENT_FIELDS
    if unknown:
        raise PopulationError(
            f"{where(sorted(unknown)[0])}: unknown field")
    missing = _AGENT_FIELDS - set(rec)
    if missing:
        raise PopulationError(f"{where(sorted(missing)[0])}: missing")

    def number(name, integer=False):
        v = rec[name]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise PopulationError(f"{where(name)}: expected a number")
        if integer and v != int(v):
            raise PopulationError(f"{where(name)}: expected an integer")
        return int(v) if integer else float(v)

    try:
        demo = Demographics(**{
            name: number(name, integer)
            for name, (_, _, integer) in DEMOGRAPHIC_RANGES.items()})
    except PopulationError as exc:
        if str(exc).startswith("agent row"):
            raise
        raise PopulationError(f"agent row {row}: {exc}") from None
    mu = rec["mu"]
    if not isinstance(mu, dict):
        raise PopulationError(f"{where('mu')}: expected an object")
    try:
        mu = {ScenarioKind(k): float(v) for k, v in mu.items()}
    except ValueError as exc:
        raise PopulationError(f"{where('mu')}: {exc}") from None
    if ScenarioKind.REFERENCE in mu:
        raise PopulationError(f"{where('mu')}: Reference takes no mu")
    try:
        mind = build_network(rec["facilitation"], rec["priorities"],
                             rec["need_valences"], rec["action_valences"],
                             params)
    except ValueError as exc:
        raise PopulationError(f"agent row {row}: {exc}") from None
    if (mind.n_needs, mind.n_actions) != (G, A):
        raise PopulationError(
            f"{where('facilitation')}: expected {G}x{A} matrix")
    try:
        return Agent(number("id", True), mind, demo,
                     (number("x"), number("y")), number("radius"),
                     number("type", True), mu)
    except PopulationError as exc:
        raise PopulationError(f"agent row {row}: {exc}") from None


def population_from_dict(data: dict, settle: bool = True) -> Population:
    if not isinstance(data, dict):
        raise PopulationError("population document must be an object")
    unknown = set(data) - _HEADER_FIELDS
    if unknown:
        raise PopulationError(f"header: unknown field '{sorted(unknown)[0]}'")
    if data.get("format") != FORMAT_TAG:
        raise PopulationError(
            f"header: field 'format' must be '{FORMAT_TAG}'")
    for key in ("needs", "actions", "need_labels", "action_labels", "agents"):
        if key not in data:
            raise PopulationError(f"header: field '{key}' missing")
    G, A = int(data["needs"]), int(data["actions"])
    if len(data["need_labels"]) != G or len(data["action_labels"]) != A:
        raise PopulationError("header: label counts disagree with needs/actions")
    params = SettleParams(**data.get("settle", {}))
    agents = [_parse_agent(i, rec, G, A, params)
              for i, rec in enumerate(data["agents"])]
    pop = Population(agents, list(data["need_labels"]),
                     list(data["action_labels"]), params)
    if settle:
        settle_population(pop)
    return pop


def load_population(path) -> Population:
    """Read, validate and settle a population file."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise PopulationError(
            f"{path}: line {exc.lineno}: {exc.msg}") from None
    return population_from_dict(data)


# ---------------------------------------------------------------- profiles

@dataclass
class TypeProfile:
    """Generation profile of one mobility type.

    Weight slots are drawn as ``clip(mean + sd * z, -1, 1)`` with z standard
    normal; calibration moves the facilitation means.
    """

    type_id: int
    share: float
    target_initial_shares: np.ndarray
    mu_mean: dict[ScenarioKind, float]
    mu_sd: dict[ScenarioKind, float]
    facilitation_mean: np.ndarray
    facilitation_sd: float
    priority_mean: np.ndarray
    priority_sd: float
    need_valence_mean: np.ndarray
    need_valence_sd: float
    action_valence_mean: np.ndarray
    action_valence_sd: float
    name: str = ""

    def __post_init__(self):
        for attr in ("target_initial_shares", "facilitation_mean",
                     "priority_mean", "need_valence_mean",
                     "action_valence_mean"):
            setattr(self, attr, np.array(getattr(self, attr), dtype=float))
        self.mu_mean = {ScenarioKind(k): float(v)
                        for k, v in self.mu_mean.items()}
        self.mu_sd = {ScenarioKind(k): float(v) for k, v in self.mu_sd.items()}
        if not 1 <= self.type_id <= N_TYPES:
            raise PopulationError(f"type_id {self.type_id} outside 1..{N_TYPES}")

    def copy(self) -> "TypeProfile":
        return TypeProfile.from_dict(self.to_dict())

    def to_dict(self) -> dict:
        return {
            "type_id": self.type_id,
            "name": self.name,
            "share": self.share,
            "target_initial_shares": self.target_initial_shares.tolist(),
            "mu_mean": {k.value: v for k, v in self.mu_mean.items()},
            "mu_sd": {k.value: v for k, v in self.mu_sd.items()},
            "facilitation_mean": self.facilitation_mean.tolist(),
            "facilitation_sd": self.facilitation_sd,
            "priority_mean": self.priority_mean.tolist(),
            "priority_sd": self.priority_sd,
            "need_valence_mean": self.need_valence_mean.tolist(),
            "need_valence_sd": self.need_valence_sd,
            "action_valence_mean": self.action_valence_mean.tolist(),
            "action_valence_sd": self.action_valence_sd,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TypeProfile":
        return cls(**d)


def save_profiles(profiles: Sequence[TypeProfile], path) -> None:
    Path(path).write_text(
        json.dumps([p.to_dict() for p in profiles], indent=1) + "\n")


def load_profiles(path) -> list[TypeProfile]:
    try:
        raw = json.loads(Path(path).read_text())
        return [TypeProfile.from_dict(d) for d in raw]
    except (TypeError, KeyError, json.JSONDecodeError) as exc:
        raise PopulationError(f"{path}: bad profile file: {exc}") from None


def largest_remainder(n: int, shares: Sequence[float]) -> np.ndarray:
    """Integer counts summing to ``n``, each within 1 of ``share * n``.

    Ties in the fractional remainder go to the lower index.
    """
    quotas = np.asarray(shares, dtype=float) * n
    counts = np.floor(quotas).astype(np.int64)
    left = n - int(counts.sum())
    order = sorted(range(len(quotas)),
                   key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:left]:
        counts[i] += 1
    return counts


# ---------------------------------------------------------------- generator

@dataclass
class _Draws:
    """All random numbers of one generation run; independent of profile means."""

    types: np.ndarray
    demo: dict[str, np.ndarray]
    location: np.ndarray
    radius: np.ndarray
    mu_u: dict[ScenarioKind, np.ndarray]
    z_fac: np.ndarray
    z_pri: np.ndarray
    z_nval: np.ndarray
    z_aval: np.ndarray


def _check_profiles(profiles: Sequence[TypeProfile]) -> None:
    total = sum(p.share for p in profiles)
    if abs(total - 1.0) > 1e-9:
        raise PopulationError(f"profile shares sum to {total}, not 1")
    ids = [p.type_id for p in profiles]
    if len(set(ids)) != len(ids):
        raise PopulationError("duplicate type_id in profiles")


def _draw(n: int, profiles: Sequence[TypeProfile], G: int, A: int,
          seed) -> _Draws:
    rng = np.random.default_rng(seed)
    counts = largest_remainder(n, [p.share for p in profiles])
    labels = np.repeat([p.type_id for p in profiles], counts)
    types = rng.permutation(labels).astype(np.int64)
    demo = {
        "age": rng.integers(18, 70, n),
        "gender": rng.integers(0, 2, n),
        "income": rng.integers(1, 8, n),
        "education": rng.integers(1, 6, n),
        "consumption": rng.uniform(1.0, 3.6, n),
        "modernity": rng.uniform(1.0, 4.0, n),
    }
    location = rng.uniform(*COORD_RANGE, size=(n, 2))
    radius = rng.uniform(*RADIUS_RANGE, size=n)
    mu_u = {kind: rng.random(n) for kind in ScenarioKind.policies()}
    return _Draws(types, demo, location, radius, mu_u,
                  rng.standard_normal((n, G, A)),
                  rng.standard_normal((n, G)),
                  rng.standard_normal((n, G)),
                  rng.standard_normal((n, A)))


def truncated_normal(u: np.ndarray, mean: float, sd: float,
                     lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    """Map uniforms ``u`` to a normal(mean, sd) truncated to [lo, hi]."""
    if sd <= 0:
        return np.full_like(u, min(max(mean, lo), hi))
    a, b = (lo - mean) / sd, (hi - mean) / sd
    return np.clip(truncnorm.ppf(u, a, b, loc=mean, scale=sd), lo, hi)


def _materialize(draws: _Draws, profiles: Sequence[TypeProfile]):
    """Weight arrays and mu for every agent from the fixed draws."""
    by_id = {p.type_id: p for p in profiles}
    n = draws.types.shape[0]
    G, A = draws.z_fac.shape[1:]
    fac = np.empty((n, G, A))
    pri = np.empty((n, G))
    nval = np.empty((n, G))
    aval = np.empty((n, A))
    mu = {kind: np.empty(n) for kind in ScenarioKind.policies()}
    for tid, p in by_id.items():
        m = draws.types == tid
        fac[m] = p.facilitation_mean + p.facilitation_sd * draws.z_fac[m]
        pri[m] = p.priority_mean + p.priority_sd * draws.z_pri[m]
        nval[m] = p.need_valence_mean + p.need_valence_sd * draws.z_nval[m]
        aval[m] = p.action_valence_mean + p.action_valence_sd * draws.z_aval[m]
        for kind in ScenarioKind.policies():
            mu[kind][m] = truncated_normal(draws.mu_u[kind][m],
                                           p.mu_mean[kind], p.mu_sd[kind])
    for arr in (fac, pri, nval, aval):
        np.clip(arr, -1.0, 1.0, out=arr)
    return fac, pri, nval, aval, mu


def settled_preferences(fac, pri, nval, aval, params: SettleParams):
    n, G, A = fac.shape
    act = np.empty((n, G + A + 1))
    val = np.empty((n, G + A + 1))
    pref = np.empty(n, dtype=np.int64)
    K.settle_all(fac, pri, nval, aval, act, val, pref, *params.kernel_args(),
                 TIE_EPS)
    return act, val, pref


def generate_population(n: int, profiles: Sequence[TypeProfile], seed,
                        need_labels: Sequence[str] = NEED_LABELS,
                        action_labels: Sequence[str] = ACTION_LABELS,
                        params: Optional[SettleParams] = None) -> Population:
    """Synthesize ``n`` settled agents from per-type profiles.

    Deterministic in ``seed``.  Type counts follow the profile shares by
    largest remainder; demographics, locations and radii are uniform over
    their allowed ranges.
    """
    if n < N_TYPES:
        raise PopulationError(f"n={n} too small; need at least {N_TYPES}")
    _check_profiles(profiles)
    params = params or SettleParams()
    G, A = len(need_labels), len(action_labels)
    draws = _draw(n, profiles, G, A, seed)
    fac, pri, nval, aval, mu = _materialize(draws, profiles)
    act, val, pref = settled_preferences(fac, pri, nval, aval, params)
    agents = []
    for i in range(n):
        mind = CoherenceNetwork(fac[i].copy(), pri[i].copy(), nval[i].copy(),
                                aval[i].copy(), act[i].copy(), val[i].copy(),
                                params)
        demo = Demographics(**{k: (int(v[i]) if DEMOGRAPHIC_RANGES[k][2]
                                   else float(v[i]))
                               for k, v in draws.demo.items()})
        agents.append(Agent(
            i, mind, demo,
            (float(draws.location[i, 0]), float(draws.location[i, 1])),
            float(draws.radius[i]), int(draws.types[i]),
            {kind: float(mu[kind][i]) for kind in ScenarioKind.policies()},
            int(pref[i])))
    return Population(agents, list(need_labels), list(action_labels), params)


# ---------------------------------------------------------------- tallies

@dataclass(frozen=True)
class ShareTally:
    shares: np.ndarray
    count: int

    @property
    def empty(self) -> bool:
        return self.count == 0


def tally_arrays(pref: np.ndarray, n_actions: int) -> ShareTally:
    count = int(pref.shape[0])
    if count == 0:
        return ShareTally(np.zeros(n_actions), 0)
    return ShareTally(np.bincount(pref, minlength=n_actions) / count, count)


def tally_shares(pop: Population, by_type: bool = False):
    """Share of agents preferring each action.

    Returns one :class:`ShareTally` for the whole population, or a dict
    ``{type_id: ShareTally}`` covering types 1..4 when ``by_type`` is set.
    """
    pref = pop.preferences
    if not by_type:
        return tally_arrays(pref, pop.n_actions)
    types = pop.types
    return {t: tally_arrays(pref[types == t], pop.n_actions)
            for t in range(1, N_TYPES + 1)}
