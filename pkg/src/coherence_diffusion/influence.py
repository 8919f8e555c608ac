"""Dyadic persuasion and the media agent.

Speakers pass on only confident beliefs: facilitation weights beyond
``z_fact`` and action valences beyond ``z_emotion``.  A listener changes a
facilitation link by a percentage factor looked up from the speaker's and the
listener's belief bands (means-ends), and resets an action's valence link to
its current felt valence before nudging it by an emotional factor
(contagion).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels as K
from .coherence import TIE_EPS
from .kinds import ACTION_LABELS, NEED_LABELS, ScenarioKind
from .population import Agent, PopulationState

log = logging.getLogger(__name__)

# rows: sender positive / negative; columns: receiver band, strongest
# positive first
RATIONAL_FACTORS = ((8.3, 7.3, 4.0, -4.1, -3.0),
                    (-0.3, -0.6, -1.3, -0.3, -2.0))
EMOTIONAL_FACTORS = ((7.5, 3.5, 0.6, -1.0, -2.5),
                     (4.0, 0.35, -0.1, -0.85, -1.8))

WEIGHT_FLOOR = 0.05
DEFAULT_DELTA = 0.1
DEFAULT_REACH = 0.7
DEFAULT_EVERY = 10

RULES = {"directional": K.RULE_DIRECTIONAL,
         "proportional": K.RULE_PROPORTIONAL}
MEDIA_MODES = {"additive": K.MEDIA_ADDITIVE,
               "multiplicative": K.MEDIA_MULTIPLICATIVE}


class InfluenceError(ValueError):
    pass


@dataclass
class InfluenceTables:
    pi: np.ndarray = field(
        default_factory=lambda: np.array(RATIONAL_FACTORS))
    alpha: np.ndarray = field(
        default_factory=lambda: np.array(EMOTIONAL_FACTORS))
    z_fact: float = 0.30
    z_emotion: float = 0.10
    receiver_inner: float = 0.20
    receiver_outer: float = 0.60
    floor: float = WEIGHT_FLOOR
    rule: str = "directional"

    def __post_init__(self):
        self.pi = np.array(self.pi, dtype=float)
        self.alpha = np.array(self.alpha, dtype=float)
        if self.pi.shape != (2, 5) or self.alpha.shape != (2, 5):
            raise InfluenceError("pi and alpha must be 2 x 5 tables")
        if self.rule not in RULES:
            raise InfluenceError(f"rule must be one of {sorted(RULES)}")
        if not 0 < self.receiver_inner < self.receiver_outer:
            raise InfluenceError("receiver band cuts must satisfy 0 < inner < outer")

    def kernel_args(self):
        return (self.pi, self.alpha, self.z_fact, self.z_emotion,
                self.receiver_inner, self.receiver_outer, self.floor,
                RULES[self.rule])

    def to_dict(self) -> dict:
        return {"pi": self.pi.tolist(), "alpha": self.alpha.tolist(),
                "z_fact": self.z_fact, "z_emotion": self.z_emotion,
                "receiver_inner": self.receiver_inner,
                "receiver_outer": self.receiver_outer,
                "floor": self.floor, "rule": self.rule}

    def differences(self, other: "InfluenceTables") -> list[str]:
        """Human-readable list of cells/settings where ``other`` differs."""
        out = []
        for name in ("pi", "alpha"):
            a, b = getattr(self, name), getattr(other, name)
            for r, c in zip(*np.nonzero(a != b)):
                out.append(f"{name}[{r}][{c}]: {a[r, c]} -> {b[r, c]}")
        for name in ("z_fact", "z_emotion", "receiver_inner",
                     "receiver_outer", "floor", "rule"):
            if getattr(self, name) != getattr(other, name):
                out.append(f"{name}: {getattr(self, name)} -> "
                           f"{getattr(other, name)}")
        return out


@dataclass(frozen=True)
class Message:
    facts: tuple[tuple[int, int, float], ...]  # (need, action, weight)
    emotions: tuple[tuple[int, float], ...]  # (action, valence)

    @property
    def empty(self) -> bool:
        return not self.facts and not self.emotions


def compose_message(sender: Agent, tables: Optional[InfluenceTables] = None
                    ) -> Message:
    tables = tables or InfluenceTables()
    m = sender.mind
    G = m.n_needs
    facts = tuple((int(g), int(k), float(m.facilitation[g, k]))
                  for g, k in zip(*np.nonzero(
                      np.abs(m.facilitation) > tables.z_fact)))
    emotions = tuple((k, float(m.valence[G + k]))
                     for k in range(m.n_actions)
                     if abs(m.valence[G + k]) > tables.z_emotion)
    return Message(facts, emotions)


def _lookup(table, sender_value, receiver_value, threshold, tables):
    row = K.sender_band(sender_value, threshold)
    if row < 0:
        return None
    col = K.receiver_band(receiver_value, tables.receiver_inner,
                          tables.receiver_outer)
    return float(table[row, col])


def lookup_pi(tables: InfluenceTables, sender_w: float,
              receiver_w: float) -> Optional[float]:
    """Rational-influence percentage, or None below the sender threshold."""
    return _lookup(tables.pi, sender_w, receiver_w, tables.z_fact, tables)


def lookup_alpha(tables: InfluenceTables, sender_v: float,
                 receiver_v: float) -> Optional[float]:
    return _lookup(tables.alpha, sender_v, receiver_v, tables.z_emotion,
                   tables)


def apply_means_ends(receiver_w: float, pi: float,
                     floor: float = WEIGHT_FLOOR,
                     rule: str = "directional") -> float:
    """New facilitation weight after hearing a fact with factor ``pi`` (%).

    ``directional``: move by ``max(|w|, floor) * pi / 100``, so the sign of
    ``pi`` sets the direction.  ``proportional``: move by ``w * pi / 100``.
    """
    return float(K.nudge(receiver_w, receiver_w, pi, floor, RULES[rule]))


def apply_contagion(receiver_valence_link_w: float,
                    receiver_action_valence: float, alpha: float,
                    floor: float = WEIGHT_FLOOR,
                    rule: str = "directional") -> float:
    """New action-valence link: reset to the felt valence, then nudge.

    The previous link weight is deliberately ignored; valence links do not
    accumulate across conversations.
    """
    v = receiver_action_valence
    return float(K.nudge(v, v, alpha, floor, RULES[rule]))


def exchange(a: Agent, b: Agent, tables: Optional[InfluenceTables] = None
             ) -> tuple[Agent, Agent]:
    """Both agents speak and listen at once, then re-settle.

    Messages are composed from the pre-exchange states, so the result does
    not depend on argument order.  Agents are updated in place and returned.
    """
    tables = tables or InfluenceTables()
    ma, mb = a.mind, b.mind
    G = ma.n_needs
    fac_a, fac_b = ma.facilitation.copy(), mb.facilitation.copy()
    val_a, val_b = ma.valence.copy(), mb.valence.copy()
    targs = tables.kernel_args()
    K.transmit(fac_a, val_a, mb.facilitation, mb.action_valences, val_b, G,
               *targs)
    K.transmit(fac_b, val_b, ma.facilitation, ma.action_valences, val_a, G,
               *targs)
    a.resettle()
    b.resettle()
    return a, b


@dataclass
class MediaCampaign:
    kind: ScenarioKind
    targeted_links: list[tuple[int, int, float]]  # (need, action, base delta)
    schedule: frozenset
    reach: float = DEFAULT_REACH
    mode: str = "additive"

    def __post_init__(self):
        self.kind = ScenarioKind(self.kind)
        if self.kind is ScenarioKind.REFERENCE:
            raise InfluenceError("the reference scenario has no campaign")
        if not 0.0 <= self.reach <= 1.0:
            raise InfluenceError(f"reach {self.reach} outside [0, 1]")
        if self.mode not in MEDIA_MODES:
            raise InfluenceError(f"media mode must be one of {sorted(MEDIA_MODES)}")
        self.schedule = frozenset(int(s) for s in self.schedule)
        self.targeted_links = [(int(g), int(k), float(d))
                               for g, k, d in self.targeted_links]
        for g, k, d in self.targeted_links:
            if not 0.0 <= d <= 1.0:
                raise InfluenceError(f"base delta {d} outside [0, 1]")

    def check(self, steps: int, n_needs: int, n_actions: int) -> None:
        if any(not 0 <= s < steps for s in self.schedule):
            raise InfluenceError(f"campaign schedule outside [0, {steps})")
        for g, k, _ in self.targeted_links:
            if not (0 <= g < n_needs and 0 <= k < n_actions):
                raise InfluenceError(f"targeted link ({g}, {k}) out of range")


def default_targets(kind: ScenarioKind, need_labels=NEED_LABELS,
                    action_labels=ACTION_LABELS,
                    delta: float = DEFAULT_DELTA):
    """Links pushed by each policy campaign."""
    kind = ScenarioKind(kind)
    ev = list(action_labels).index("EV")
    needs = list(need_labels)
    if kind is ScenarioKind.ZERO_EMISSION_ZONE:
        names = ("independence", "no stress")
    elif kind in (ScenarioKind.TAX_EXEMPTION, ScenarioKind.PURCHASE_SUBSIDY):
        names = ("cost efficiency",)
    else:
        return []
    return [(needs.index(nm), ev, delta) for nm in names]


def default_campaign(kind: ScenarioKind, steps: int = 100,
                     reach: float = DEFAULT_REACH,
                     every: int = DEFAULT_EVERY) -> Optional[MediaCampaign]:
    kind = ScenarioKind(kind)
    if kind is ScenarioKind.REFERENCE:
        return None
    return MediaCampaign(kind, default_targets(kind),
                         frozenset(range(0, steps, every)), reach)


def media_sample(n: int, reach: float, rng: np.random.Generator) -> np.ndarray:
    """Indices of the agents a broadcast reaches, sorted ascending."""
    k = int(np.floor(reach * n))
    if k == 0:
        return np.zeros(0, dtype=np.int64)
    return np.sort(rng.choice(n, size=k, replace=False)).astype(np.int64)


def apply_media_state(state: PopulationState, campaign: MediaCampaign,
                      rng: np.random.Generator, params,
                      mu: Optional[np.ndarray] = None) -> np.ndarray:
    """Broadcast to a fresh sample of the stacked population; returns it."""
    sample = media_sample(state.n, campaign.reach, rng)
    if sample.size == 0:
        log.warning("campaign reach %.3f of %d agents rounds to nobody",
                    campaign.reach, state.n)
        return sample
    mu = state.mu[campaign.kind] if mu is None else mu
    links = campaign.targeted_links
    K.media_push(sample,
                 np.array([g for g, _, _ in links], dtype=np.int64),
                 np.array([k for _, k, _ in links], dtype=np.int64),
                 np.array([d for _, _, d in links], dtype=float),
                 np.ascontiguousarray(mu, dtype=float),
                 state.fac, state.pri, state.nval, state.aval, state.act,
                 state.val, state.pref, MEDIA_MODES[campaign.mode],
                 *params.kernel_args(), TIE_EPS)
    return sample


def apply_media(pop, campaign: MediaCampaign, step: int,
                rng: np.random.Generator):
    """Object-level broadcast: returns an updated copy of ``pop``.

    ``step`` must be a scheduled step; the caller owns ``rng`` so that every
    broadcast draws a fresh sample from one seeded stream.
    """
    if step not in campaign.schedule:
        raise InfluenceError(f"step {step} is not in the campaign schedule")
    state = pop.pack()
    apply_media_state(state, campaign, rng, pop.params)
    return pop.unpack(state)


def pair_kernel_args(tables: InfluenceTables, params) -> tuple:
    return (*tables.kernel_args(), *params.kernel_args(), TIE_EPS)


def need_index(labels: Sequence[str], name: str) -> int:
    try:
        return list(labels).index(name)
    except ValueError:
        raise InfluenceError(f"unknown label {name!r}") from None
