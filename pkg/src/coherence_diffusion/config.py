"""Scenario config files (JSON).

A config is one JSON object; every key is optional except ``kind``::

    {
      "name": "zez",
      "kind": "ZeroEmissionZone",     # Reference | ZeroEmissionZone |
                                      # TaxExemption | PurchaseSubsidy
      "steps": 100, "replicates": 10, "seed": 42,
      "mu": "empirical",              # or a number in [0, 1]
      "campaign": {                   # omitted -> the kind's default campaign
        "every": 10,                  # or "schedule": [0, 10, ...]
        "reach": 0.7,
        "mode": "additive",           # or "multiplicative"
        "targets": [{"need": "independence", "action": "EV", "delta": 0.1}]
      },
      "population": {"path": "pop.json"}
                 or {"n": 675, "profiles": "calibrated", "seed": null,
                     "regenerate": false},
      "graph": {"reach": "max", "radius_scale": 1.0,
                "neighbourhood_max": false, "freeze": false},
      "influence": {"pi": [[...], [...]], "alpha": [[...], [...]],
                    "z_fact": 0.3, "z_emotion": 0.1, "receiver_inner": 0.2,
                    "receiver_outer": 0.6, "floor": 0.05,
                    "rule": "directional"},
      "settle": {"decay": 0.05, "initial": 0.01, "tolerance": 1e-4,
                 "max_iterations": 200, "bidirectional": true,
                 "net_input": "literal"},
      "output": {"dir": "out"}
    }

Relative paths are resolved against the config file's directory.  Errors
name the offending key as a JSON path, e.g. ``$.campaign.reach``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Optional

from .coherence import SettleParams
from .engine import (EMPIRICAL, GraphSpec, PopulationSpec, ScenarioConfig,
                     ScenarioError)
from .influence import (DEFAULT_DELTA, DEFAULT_EVERY, DEFAULT_REACH,
                        InfluenceError, InfluenceTables, MediaCampaign,
                        default_campaign)
from .kinds import ACTION_LABELS, NEED_LABELS, ScenarioKind

TOP_KEYS = {"name", "kind", "steps", "replicates", "seed", "mu", "campaign",
            "population", "graph", "influence", "settle", "output"}


class ConfigError(ValueError):
    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


def _keys(obj, path, allowed):
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected an object")
    extra = sorted(set(obj) - set(allowed))
    if extra:
        raise ConfigError(f"{path}.{extra[0]}", "unknown key")


def _num(obj, key, path, default, integer=False):
    if key not in obj:
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}", "expected a number")
    if integer and int(v) != v:
        raise ConfigError(f"{path}.{key}", "expected an integer")
    return int(v) if integer else float(v)


def _choice(obj, key, path, default, choices):
    v = obj.get(key, default)
    if v not in choices:
        raise ConfigError(f"{path}.{key}",
                          f"expected one of {sorted(map(str, choices))}")
    return v


def _bool(obj, key, path, default):
    v = obj.get(key, default)
    if not isinstance(v, bool):
        raise ConfigError(f"{path}.{key}", "expected true or false")
    return v


def _label(value, labels, where):
    if isinstance(value, int) and not isinstance(value, bool):
        if 0 <= value < len(labels):
            return value
    elif isinstance(value, str) and value in labels:
        return list(labels).index(value)
    raise ConfigError(where, f"unknown label {value!r}")


def _campaign(obj, kind, steps, path) -> Optional[MediaCampaign]:
    if kind is ScenarioKind.REFERENCE:
        if obj is not None:
            raise ConfigError(path, "the Reference scenario has no campaign")
        return None
    if obj is None:
        return default_campaign(kind, steps)
    _keys(obj, path, {"every", "schedule", "reach", "mode", "targets"})
    if "schedule" in obj and "every" in obj:
        raise ConfigError(path, "give either 'every' or 'schedule'")
    if "schedule" in obj:
        sched = obj["schedule"]
        if not isinstance(sched, list) or not all(
                isinstance(s, int) and not isinstance(s, bool) for s in sched):
            raise ConfigError(f"{path}.schedule", "expected a list of integers")
    else:
        every = _num(obj, "every", path, DEFAULT_EVERY, integer=True)
        if every < 1:
            raise ConfigError(f"{path}.every", "must be >= 1")
        sched = list(range(0, steps, every))
    reach = _num(obj, "reach", path, DEFAULT_REACH)
    mode = _choice(obj, "mode", path, "additive",
                   {"additive", "multiplicative"})
    targets = default_campaign(kind, steps).targeted_links
    if "targets" in obj:
        if not isinstance(obj["targets"], list):
            raise ConfigError(f"{path}.targets", "expected a list")
        targets = []
        for i, t in enumerate(obj["targets"]):
            tp = f"{path}.targets[{i}]"
            _keys(t, tp, {"need", "action", "delta"})
            if "need" not in t or "action" not in t:
                raise ConfigError(tp, "needs 'need' and 'action'")
            targets.append((_label(t["need"], NEED_LABELS, f"{tp}.need"),
                            _label(t["action"], ACTION_LABELS,
                                   f"{tp}.action"),
                            _num(t, "delta", tp, DEFAULT_DELTA)))
    try:
        camp = MediaCampaign(kind, targets, frozenset(sched), reach, mode)
        camp.check(steps, len(NEED_LABELS), len(ACTION_LABELS))
    except InfluenceError as e:
        raise ConfigError(path, str(e)) from None
    return camp


def _population(obj, base: Path, path) -> PopulationSpec:
    if obj is None:
        return PopulationSpec()
    _keys(obj, path, {"path", "n", "profiles", "seed", "regenerate"})
    if "path" in obj:
        if set(obj) != {"path"}:
            raise ConfigError(path, "'path' excludes generator keys")
        p = base / obj["path"]
        if not p.is_file():
            raise ConfigError(f"{path}.path", f"no such file {p}")
        return PopulationSpec(path=str(p))
    profiles = obj.get("profiles", "calibrated")
    if not isinstance(profiles, str):
        raise ConfigError(f"{path}.profiles", "expected a string")
    if profiles not in ("calibrated", "default"):
        p = base / profiles
        if not p.is_file():
            raise ConfigError(f"{path}.profiles", f"no such file {p}")
        profiles = str(p)
    seed = obj.get("seed")
    if seed is not None:
        seed = _num(obj, "seed", path, None, integer=True)
    n = _num(obj, "n", path, 675, integer=True)
    if n < 4:
        raise ConfigError(f"{path}.n", "must be >= 4")
    return PopulationSpec(n=n, profiles=profiles, seed=seed,
                          regenerate=_bool(obj, "regenerate", path, False))


def _graph(obj, path) -> GraphSpec:
    if obj is None:
        return GraphSpec()
    _keys(obj, path, {"reach", "radius_scale", "neighbourhood_max", "freeze"})
    return GraphSpec(_choice(obj, "reach", path, "max", {"max", "min"}),
                     _num(obj, "radius_scale", path, 1.0),
                     _bool(obj, "neighbourhood_max", path, False),
                     _bool(obj, "freeze", path, False))


def tables_from_dict(obj, path="$.influence") -> InfluenceTables:
    if obj is None:
        return InfluenceTables()
    fields = {"pi", "alpha", "z_fact", "z_emotion", "receiver_inner",
              "receiver_outer", "floor", "rule"}
    _keys(obj, path, fields)
    d = InfluenceTables()
    kw: dict[str, Any] = {}
    for name in ("pi", "alpha"):
        if name in obj:
            m = obj[name]
            if (not isinstance(m, list) or len(m) != 2
                    or any(not isinstance(r, list) or len(r) != 5 for r in m)
                    or any(isinstance(x, bool)
                           or not isinstance(x, (int, float))
                           for r in m for x in r)):
                raise ConfigError(f"{path}.{name}",
                                  "expected a 2 x 5 array of numbers")
            kw[name] = m
    for name in ("z_fact", "z_emotion", "receiver_inner", "receiver_outer",
                 "floor"):
        kw[name] = _num(obj, name, path, getattr(d, name))
    kw["rule"] = _choice(obj, "rule", path, d.rule,
                         {"directional", "proportional"})
    try:
        return InfluenceTables(**kw)
    except InfluenceError as e:
        raise ConfigError(path, str(e)) from None


def _settle(obj, path) -> SettleParams:
    if obj is None:
        return SettleParams()
    d = SettleParams()
    _keys(obj, path, set(d.to_dict()))
    try:
        return SettleParams(
            decay=_num(obj, "decay", path, d.decay),
            act_min=_num(obj, "act_min", path, d.act_min),
            act_max=_num(obj, "act_max", path, d.act_max),
            initial=_num(obj, "initial", path, d.initial),
            tolerance=_num(obj, "tolerance", path, d.tolerance),
            max_iterations=_num(obj, "max_iterations", path,
                                d.max_iterations, integer=True),
            bidirectional=_bool(obj, "bidirectional", path, d.bidirectional),
            net_input=_choice(obj, "net_input", path, d.net_input.value,
                              {"literal", "split"}))
    except ValueError as e:
        raise ConfigError(path, str(e)) from None


def config_from_dict(data, base_dir=".") -> tuple[ScenarioConfig, dict]:
    """Build a config; also returns the ``output`` section (may be empty)."""
    base = Path(base_dir)
    _keys(data, "$", TOP_KEYS)
    if "kind" not in data:
        raise ConfigError("$.kind", "missing")
    kind = _choice(data, "kind", "$", None, {k.value for k in ScenarioKind})
    kind = ScenarioKind(kind)
    steps = _num(data, "steps", "$", 100, integer=True)
    if steps < 1:
        raise ConfigError("$.steps", "must be >= 1")
    replicates = _num(data, "replicates", "$", 10, integer=True)
    if replicates < 1:
        raise ConfigError("$.replicates", "must be >= 1")
    seed = _num(data, "seed", "$", 42, integer=True)
    mu = data.get("mu", EMPIRICAL)
    if mu != EMPIRICAL:
        mu = _num(data, "mu", "$", None)
        if not 0.0 <= mu <= 1.0:
            raise ConfigError("$.mu", "must be 'empirical' or in [0, 1]")
    name = data.get("name", "")
    if not isinstance(name, str):
        raise ConfigError("$.name", "expected a string")
    output = data.get("output", {})
    _keys(output, "$.output", {"dir"})
    if "dir" in output:
        output = {"dir": str(base / output["dir"])}
    try:
        cfg = ScenarioConfig(
            kind=kind, steps=steps, replicates=replicates, seed=seed,
            campaign=_campaign(data.get("campaign"), kind, steps,
                               "$.campaign"),
            population=_population(data.get("population"), base,
                                   "$.population"),
            graph=_graph(data.get("graph"), "$.graph"),
            mu=mu,
            tables=tables_from_dict(data.get("influence")),
            settle=_settle(data.get("settle"), "$.settle"),
            name=name)
    except ScenarioError as e:
        raise ConfigError("$", str(e)) from None
    return cfg, output


def load_config(path) -> tuple[ScenarioConfig, dict]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(str(path), "no such file")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}", e.msg) from None
    try:
        return config_from_dict(data, path.parent)
    except ConfigError as e:
        raise ConfigError(f"{path}:{e.where}",
                          str(e).split(": ", 1)[1]) from None
