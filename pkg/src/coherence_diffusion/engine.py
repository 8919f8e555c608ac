"""Scenario runs: the per-step communication loop, media events, replicates,
per-type aggregation and the policy-impact sweep.

Random streams
--------------
Every stream is a :class:`numpy.random.PCG64` seeded from
``SeedSequence(entropy=seed, spawn_key=key)``:

* population generation: the population seed as a plain integer (so that
  profiles calibrated at that seed reproduce exactly), or
  ``key=(r, STREAM_POPULATION)`` when populations are regenerated per
  replicate;
* social graph: ``key=(r, STREAM_GRAPH)``, or ``(STREAM_GRAPH,)`` when the
  graph is frozen across replicates;
* communication order and partner choice: ``key=(r, STREAM_TALK)``;
* media sampling: ``key=(r, STREAM_MEDIA)``.

Within a step the talk stream yields a permutation of the agents followed by
one uniform per visited agent; the partner is ``neighbours[floor(u * deg)]``.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from . import _kernels as K
from .coherence import SettleParams
from .influence import (InfluenceTables, MediaCampaign, apply_media_state,
                        pair_kernel_args)
from .kinds import N_TYPES, ScenarioKind
from .population import (Population, PopulationState, generate_population,
                         load_population, load_profiles, tally_arrays)
from .socialnet import SocialGraph, build_graph

log = logging.getLogger(__name__)

STREAM_POPULATION = 0
STREAM_GRAPH = 1
STREAM_TALK = 2
STREAM_MEDIA = 3

ALL = "ALL"
EMPIRICAL = "empirical"


class ScenarioError(ValueError):
    pass


def stream(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(key))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass
class PopulationSpec:
    """Where agents come from: a population file or the generator."""

    path: Optional[str] = None
    n: int = 675
    profiles: str = "calibrated"  # "calibrated", "default" or a file path
    seed: Optional[int] = None  # generator seed; None -> scenario seed
    regenerate: bool = False  # new population per replicate

    def profile_list(self):
        from .profiles import calibrated_profiles, default_profiles
        if self.profiles == "calibrated":
            return calibrated_profiles()
        if self.profiles == "default":
            return default_profiles()
        return load_profiles(self.profiles)

    def build(self, seed: int, replicate: int, params: SettleParams
              ) -> Population:
        if self.path is not None:
            pop = load_population(self.path)
            pop.params = params
            return pop
        base = seed if self.seed is None else self.seed
        gen_seed = (np.random.SeedSequence(base, spawn_key=(
            replicate, STREAM_POPULATION)) if self.regenerate else base)
        return generate_population(self.n, self.profile_list(), gen_seed,
                                   params=params)

    def to_dict(self) -> dict:
        return {"path": self.path, "n": self.n, "profiles": self.profiles,
                "seed": self.seed, "regenerate": self.regenerate}


@dataclass
class GraphSpec:
    reach: str = "max"
    radius_scale: float = 1.0
    neighbourhood_max: bool = False
    freeze: bool = False

    def to_dict(self) -> dict:
        return {"reach": self.reach, "radius_scale": self.radius_scale,
                "neighbourhood_max": self.neighbourhood_max,
                "freeze": self.freeze}


@dataclass
class ScenarioConfig:
    kind: ScenarioKind = ScenarioKind.REFERENCE
    steps: int = 100
    replicates: int = 10
    seed: int = 42
    campaign: Optional[MediaCampaign] = None
    population: PopulationSpec = field(default_factory=PopulationSpec)
    graph: GraphSpec = field(default_factory=GraphSpec)
    mu: Union[str, float] = EMPIRICAL
    tables: InfluenceTables = field(default_factory=InfluenceTables)
    settle: SettleParams = field(default_factory=SettleParams)
    name: str = ""

    def __post_init__(self):
        self.kind = ScenarioKind(self.kind)
        if self.steps < 1:
            raise ScenarioError("steps must be >= 1")
        if self.replicates < 1:
            raise ScenarioError("replicates must be >= 1")
        if self.kind is ScenarioKind.REFERENCE and self.campaign is not None:
            raise ScenarioError("the Reference scenario cannot have a campaign")
        if self.campaign is not None and self.campaign.kind is not self.kind:
            raise ScenarioError(
                f"campaign kind {self.campaign.kind.value} does not match "
                f"scenario kind {self.kind.value}")
        if self.mu != EMPIRICAL:
            self.mu = float(self.mu)
            if not 0.0 <= self.mu <= 1.0:
                raise ScenarioError(f"mu override {self.mu} outside [0, 1]")
        if not self.name:
            self.name = self.kind.value

    def to_dict(self) -> dict:
        camp = None
        if self.campaign is not None:
            c = self.campaign
            camp = {"schedule": sorted(c.schedule), "reach": c.reach,
                    "targets": [list(t) for t in c.targeted_links],
                    "mode": c.mode}
        return {
            "name": self.name,
            "kind": self.kind.value,
            "steps": self.steps,
            "replicates": self.replicates,
            "seed": self.seed,
            "campaign": camp,
            "population": self.population.to_dict(),
            "graph": self.graph.to_dict(),
            "mu": self.mu,
            "tables": self.tables.to_dict(),
            "settle": self.settle.to_dict(),
        }

    def digest(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()


@dataclass
class ModalShareSeries:
    """Shares indexed ``[replicate, step - 1, group, action]``.

    Group 0 is the whole population; the others are the mobility types that
    have at least one member.
    """

    replicates: list[int]
    groups: list[str]
    actions: list[str]
    shares: np.ndarray

    @property
    def steps(self) -> int:
        return self.shares.shape[1]

    def entries(self):
        for ri, r in enumerate(self.replicates):
            for s in range(self.steps):
                for gi, g in enumerate(self.groups):
                    for ai, a in enumerate(self.actions):
                        yield r, s + 1, g, a, float(self.shares[ri, s, gi, ai])

    def averaged(self) -> "AveragedSeries":
        return AveragedSeries(list(self.groups), list(self.actions),
                              self.shares.mean(axis=0))

    def share(self, group: str, action: str) -> np.ndarray:
        """(replicate, step) array for one group and action."""
        return self.shares[:, :, self.groups.index(group),
                           self.actions.index(action)]

    @classmethod
    def concat(cls, parts: Sequence["ModalShareSeries"]) -> "ModalShareSeries":
        first = parts[0]
        return cls([r for p in parts for r in p.replicates], first.groups,
                   first.actions, np.concatenate([p.shares for p in parts]))


@dataclass
class AveragedSeries:
    """Replicate-mean shares indexed ``[step - 1, group, action]``."""

    groups: list[str]
    actions: list[str]
    shares: np.ndarray

    @property
    def steps(self) -> int:
        return self.shares.shape[0]

    def share(self, group: str, action: str) -> np.ndarray:
        return self.shares[:, self.groups.index(group),
                           self.actions.index(action)]


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    series: ModalShareSeries
    averaged: AveragedSeries
    isolated_turns: int = 0
    media_events: int = 0


def group_labels(types: np.ndarray) -> list[str]:
    return [ALL] + [str(t) for t in range(1, N_TYPES + 1)
                    if np.any(types == t)]


def tally_groups(pref: np.ndarray, types: np.ndarray, groups: list[str],
                 n_actions: int) -> np.ndarray:
    out = np.empty((len(groups), n_actions))
    for gi, g in enumerate(groups):
        sel = pref if g == ALL else pref[types == int(g)]
        out[gi] = tally_arrays(sel, n_actions).shares
    return out


def _mu_override(cfg: ScenarioConfig, state: PopulationState):
    if cfg.mu == EMPIRICAL:
        return None
    return np.full(state.n, float(cfg.mu))


def run_replicate(pop: Population, graph: SocialGraph, cfg: ScenarioConfig,
                  replicate: int, mu: Union[str, float, None] = None
                  ) -> tuple[ModalShareSeries, dict]:
    """Simulate one replicate; ``pop`` is not modified.

    At each step t = 1..steps: a media event scheduled for t - 1 fires first,
    then every agent, visited in a fresh random order, talks with one random
    neighbour, then shares are tallied.
    """
    if graph.n != len(pop):
        raise ScenarioError("graph and population sizes differ")
    mu = cfg.mu if mu is None else mu
    state = pop.pack()
    types = state.types
    groups = group_labels(types)
    A = pop.n_actions
    talk = stream(cfg.seed, replicate, STREAM_TALK)
    media = stream(cfg.seed, replicate, STREAM_MEDIA)
    mu_arr = None if mu == EMPIRICAL else np.full(state.n, float(mu))
    campaign = cfg.campaign
    if campaign is not None:
        campaign.check(cfg.steps, pop.n_needs, pop.n_actions)
    ptr, idx = graph.csr
    pair_args = pair_kernel_args(cfg.tables, pop.params)
    out = np.empty((1, cfg.steps, len(groups), A))
    isolated = 0
    events = 0
    for s in range(cfg.steps):
        if campaign is not None and s in campaign.schedule:
            apply_media_state(state, campaign, media, pop.params, mu_arr)
            events += 1
        order = talk.permutation(state.n).astype(np.int64)
        u = talk.random(state.n)
        isolated += K.communication_round(
            order, u, ptr, idx, state.fac, state.pri, state.nval, state.aval,
            state.act, state.val, state.pref, *pair_args)
        out[0, s] = tally_groups(state.pref, types, groups, A)
    return (ModalShareSeries([replicate], groups, list(pop.action_labels),
                             out),
            {"isolated_turns": isolated, "media_events": events})


def replicate_graph(pop: Population, cfg: ScenarioConfig,
                    replicate: int) -> SocialGraph:
    key = ((STREAM_GRAPH,) if cfg.graph.freeze
           else (replicate, STREAM_GRAPH))
    return build_graph(pop, stream(cfg.seed, *key), cfg.graph.reach,
                       cfg.graph.radius_scale, cfg.graph.neighbourhood_max)


def _one(cfg: ScenarioConfig, replicate: int, pop: Optional[Population],
         mu=None):
    if pop is None or cfg.population.regenerate:
        pop = cfg.population.build(cfg.seed, replicate, cfg.settle)
    graph = replicate_graph(pop, cfg, replicate)
    return run_replicate(pop, graph, cfg, replicate, mu)


def _run_many(cfg: ScenarioConfig, pop, mu=None, workers: int = 1):
    reps = list(range(cfg.replicates))
    if workers > 1 and len(reps) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            futures = [ex.submit(_one, cfg, r, pop, mu) for r in reps]
            results = [f.result() for f in futures]
    else:
        results = [_one(cfg, r, pop, mu) for r in reps]
    return results


def base_population(cfg: ScenarioConfig) -> Optional[Population]:
    """The shared population, or None when it is rebuilt per replicate."""
    if cfg.population.regenerate and cfg.population.path is None:
        return None
    return cfg.population.build(cfg.seed, 0, cfg.settle)


def run_scenario(cfg: ScenarioConfig, population: Optional[Population] = None,
                 workers: int = 1) -> ScenarioResult:
    """All replicates of one scenario plus their average."""
    pop = population if population is not None else base_population(cfg)
    results = _run_many(cfg, pop, workers=workers)
    series = ModalShareSeries.concat([r[0] for r in results])
    return ScenarioResult(
        cfg, series, series.averaged(),
        sum(r[1]["isolated_turns"] for r in results),
        sum(r[1]["media_events"] for r in results))


@dataclass
class SweepResult:
    settings: list[Union[str, float]]
    replicates: list[int]
    ev_share: np.ndarray  # [setting, replicate]

    def mean(self) -> np.ndarray:
        return self.ev_share.mean(axis=1)

    def rows(self):
        for si, s in enumerate(self.settings):
            for ri, r in enumerate(self.replicates):
                yield s, r, float(self.ev_share[si, ri])


DEFAULT_SWEEP = (EMPIRICAL, 0.25, 0.50, 0.75, 1.00)


def parse_mu_setting(value) -> Union[str, float]:
    if isinstance(value, str) and value.strip().lower() == EMPIRICAL:
        return EMPIRICAL
    mu = float(value)
    if not 0.0 <= mu <= 1.0:
        raise ScenarioError(f"mu setting {value} outside [0, 1]")
    return mu


def run_sweep(cfg: ScenarioConfig, settings=DEFAULT_SWEEP,
              replicates: int = 1, population: Optional[Population] = None,
              workers: int = 1, action: str = "EV") -> SweepResult:
    """Final-step overall share of ``action`` for each policy-impact setting.

    Seeds are shared across settings, so only the policy impact differs.
    """
    if cfg.kind is ScenarioKind.REFERENCE:
        raise ScenarioError("a sweep needs a policy scenario")
    settings = [parse_mu_setting(s) for s in settings]
    run_cfg = ScenarioConfig(**{**cfg.__dict__, "replicates": replicates})
    pop = population if population is not None else base_population(run_cfg)
    out = np.empty((len(settings), replicates))
    for si, setting in enumerate(settings):
        results = _run_many(run_cfg, pop, mu=setting, workers=workers)
        series = ModalShareSeries.concat([r[0] for r in results])
        out[si] = series.share(ALL, action)[:, -1]
    return SweepResult(settings, list(range(replicates)), out)


@dataclass
class DeltaReport:
    """EV-share difference of each scenario against the reference, in pp."""

    reference: str
    groups: list[str]
    deltas: dict[str, np.ndarray]  # name -> [step - 1, group]

    def rows(self):
        for name, d in self.deltas.items():
            for s in range(d.shape[0]):
                for gi, g in enumerate(self.groups):
                    yield name, s + 1, g, float(d[s, gi])


def compare_scenarios(results: Sequence[tuple[str, AveragedSeries]],
                      reference: Optional[str] = None,
                      action: str = "EV") -> DeltaReport:
    """Per-step, per-group share difference vs the reference series.

    ``results`` holds (name, averaged series) pairs; the reference is the
    entry named ``reference`` (default: the one named "Reference", else the
    first).
    """
    if len(results) < 2:
        raise ScenarioError("need at least two series to compare")
    names = [n for n, _ in results]
    if reference is None:
        reference = (ScenarioKind.REFERENCE.value
                     if ScenarioKind.REFERENCE.value in names else names[0])
    if reference not in names:
        raise ScenarioError(f"no series named {reference!r}")
    ref = dict(results)[reference]
    deltas = {}
    for name, series in results:
        if name == reference:
            continue
        if (series.groups != ref.groups or series.actions != ref.actions
                or series.shares.shape != ref.shares.shape):
            raise ScenarioError(
                f"series {name!r} does not match the reference structure")
        ai = series.actions.index(action)
        deltas[name] = 100.0 * (series.shares[:, :, ai] - ref.shares[:, :, ai])
    return DeltaReport(reference, list(ref.groups), deltas)


# ---------------------------------------------------------------- CSV files

SERIES_HEADER = ["replicate", "step", "group", "mode", "share"]
AVERAGED_HEADER = ["step", "group", "mode", "mean_share"]
SWEEP_HEADER = ["setting", "replicate", "ev_share"]
DELTA_HEADER = ["scenario", "step", "group", "ev_delta_pp"]


def _fmt(x: float) -> str:
    return repr(float(x))


def write_series_csv(series: ModalShareSeries, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SERIES_HEADER)
        for r, s, g, a, v in series.entries():
            w.writerow([r, s, g, a, _fmt(v)])


def write_averaged_csv(avg: AveragedSeries, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AVERAGED_HEADER)
        for s in range(avg.steps):
            for gi, g in enumerate(avg.groups):
                for ai, a in enumerate(avg.actions):
                    w.writerow([s + 1, g, a, _fmt(avg.shares[s, gi, ai])])


def _read_rows(path, header):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != header:
        raise ScenarioError(f"{path}: expected header {','.join(header)}")
    return rows[1:]


def _ordered_unique(values):
    return list(dict.fromkeys(values))


def read_averaged_csv(path) -> AveragedSeries:
    rows = _read_rows(path, AVERAGED_HEADER)
    groups = _ordered_unique(r[1] for r in rows)
    actions = _ordered_unique(r[2] for r in rows)
    steps = max(int(r[0]) for r in rows) if rows else 0
    shares = np.full((steps, len(groups), len(actions)), np.nan)
    for s, g, a, v in rows:
        shares[int(s) - 1, groups.index(g), actions.index(a)] = float(v)
    if np.isnan(shares).any():
        raise ScenarioError(f"{path}: incomplete averaged series")
    return AveragedSeries(groups, actions, shares)


def read_series_csv(path) -> ModalShareSeries:
    rows = _read_rows(path, SERIES_HEADER)
    reps = _ordered_unique(int(r[0]) for r in rows)
    groups = _ordered_unique(r[2] for r in rows)
    actions = _ordered_unique(r[3] for r in rows)
    steps = max(int(r[1]) for r in rows) if rows else 0
    shares = np.full((len(reps), steps, len(groups), len(actions)), np.nan)
    for r, s, g, a, v in rows:
        shares[reps.index(int(r)), int(s) - 1, groups.index(g),
               actions.index(a)] = float(v)
    if np.isnan(shares).any():
        raise ScenarioError(f"{path}: incomplete series")
    return ModalShareSeries(reps, groups, actions, shares)


def write_sweep_csv(result: SweepResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for s, r, v in result.rows():
            w.writerow([s if s == EMPIRICAL else _fmt(s), r, _fmt(v)])


def write_delta_csv(report: DeltaReport, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DELTA_HEADER)
        for name, s, g, v in report.rows():
            w.writerow([name, s, g, _fmt(v)])


def manifest(cfg: ScenarioConfig, extra: Optional[dict] = None) -> dict:
    from . import __version__
    out = {"package": "coherence_diffusion", "version": __version__,
           "seed": cfg.seed, "config_sha256": cfg.digest(),
           "config": cfg.to_dict()}
    if extra:
        out.update(extra)
    return out


def write_manifest(cfg: ScenarioConfig, path, extra: Optional[dict] = None
                   ) -> None:
    Path(path).write_text(
        json.dumps(manifest(cfg, extra), indent=1, sort_keys=True) + "\n")
