"""Emotional-coherence decision networks.

Each agent's mind is a small connectionist network: need units, action units
and one clamped special unit.  Facilitation links join needs and actions,
priority links run from the special unit to needs, and valence links run from
the special unit to every need and action.  Settling spreads activation and
valence synchronously until the network stops moving; the most active action
is the agent's preferred transport mode.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels as K

DECAY = 0.05
ACT_MIN = -1.0
ACT_MAX = 1.0
INITIAL_ACTIVATION = 0.01
TOLERANCE = 1e-4
MAX_ITERATIONS = 200
TIE_EPS = 1e-12


class NetworkError(ValueError):
    """Raised for malformed networks or numerically broken settling."""


class UnitKind(str, enum.Enum):
    NEED = "Need"
    ACTION = "Action"
    SPECIAL = "Special"


class Channel(str, enum.Enum):
    ACTIVATION = "Activation"
    VALENCE = "Valence"


class NetInput(str, enum.Enum):
    """How the activation net input combines activation and valence.

    ``LITERAL`` reads both sums over the same activation-channel links, i.e.
    ``net_j = sum_i w_ij a_i (1 + v_i)``.  ``SPLIT`` lets the valence-channel
    links carry the second sum instead.
    """

    LITERAL = "literal"
    SPLIT = "split"


_NET_CODES = {NetInput.LITERAL: K.NET_LITERAL, NetInput.SPLIT: K.NET_SPLIT}


@dataclass(frozen=True)
class UnitId:
    kind: UnitKind
    index: int = 0

    def __str__(self):
        if self.kind is UnitKind.SPECIAL:
            return "Special"
        return f"{self.kind.value}{self.index}"


@dataclass(frozen=True)
class Link:
    source: UnitId
    target: UnitId
    weight: float
    channel: Channel


@dataclass(frozen=True)
class SettleReport:
    iterations: int
    converged: bool
    max_delta: float


@dataclass(frozen=True)
class Decision:
    chosen_action: int
    action_activations: np.ndarray
    action_valences: np.ndarray
    tied: bool


@dataclass
class SettleParams:
    """Knobs of the settling dynamics; defaults are the reference model values."""

    decay: float = DECAY
    act_min: float = ACT_MIN
    act_max: float = ACT_MAX
    initial: float = INITIAL_ACTIVATION
    tolerance: float = TOLERANCE
    max_iterations: int = MAX_ITERATIONS
    bidirectional: bool = True
    net_input: NetInput = NetInput.LITERAL

    def __post_init__(self):
        self.net_input = NetInput(self.net_input)
        if not self.act_min < self.act_max:
            raise NetworkError("act_min must be below act_max")
        if not 0.0 <= self.decay <= 1.0:
            raise NetworkError(f"decay {self.decay} outside [0, 1]")
        if self.tolerance <= 0:
            raise NetworkError("tolerance must be positive")
        if self.max_iterations < 1:
            raise NetworkError("max_iterations must be >= 1")

    @property
    def net_code(self) -> int:
        return _NET_CODES[self.net_input]

    def kernel_args(self):
        """Positional tail shared by the resettle-style kernels."""
        return (self.initial, self.decay, self.act_min, self.act_max,
                self.tolerance, self.max_iterations, self.bidirectional,
                self.net_code)

    def to_dict(self) -> dict:
        return {
            "decay": self.decay,
            "act_min": self.act_min,
            "act_max": self.act_max,
            "initial": self.initial,
            "tolerance": self.tolerance,
            "max_iterations": self.max_iterations,
            "bidirectional": self.bidirectional,
            "net_input": self.net_input.value,
        }


def _check_weights(name, arr, shape):
    arr = np.array(arr, dtype=float)
    if arr.shape != shape:
        raise NetworkError(f"{name}: expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NetworkError(f"{name}: non-finite weight")
    bad = np.argwhere((arr < -1.0) | (arr > 1.0))
    if bad.size:
        idx = tuple(int(i) for i in bad[0])
        raise NetworkError(
            f"{name}{list(idx)} = {arr[idx]} outside [-1, 1]")
    return arr


@dataclass
class CoherenceNetwork:
    """One agent's decision network.

    Weights live in dense arrays; :attr:`links` gives the equivalent explicit
    link list.  ``activation`` and ``valence`` have ``G + A + 1`` entries with
    the special unit last.
    """

    facilitation: np.ndarray
    priorities: np.ndarray
    need_valences: np.ndarray
    action_valences: np.ndarray
    activation: np.ndarray
    valence: np.ndarray
    params: SettleParams = field(default_factory=SettleParams)

    @property
    def n_needs(self) -> int:
        return self.facilitation.shape[0]

    @property
    def n_actions(self) -> int:
        return self.facilitation.shape[1]

    @property
    def special(self) -> int:
        return self.n_needs + self.n_actions

    @property
    def decay(self) -> float:
        return self.params.decay

    @property
    def units(self) -> list[UnitId]:
        return ([UnitId(UnitKind.NEED, g) for g in range(self.n_needs)]
                + [UnitId(UnitKind.ACTION, k) for k in range(self.n_actions)]
                + [UnitId(UnitKind.SPECIAL)])

    @property
    def links(self) -> list[Link]:
        special = UnitId(UnitKind.SPECIAL)
        out = []
        for g in range(self.n_needs):
            need = UnitId(UnitKind.NEED, g)
            for k in range(self.n_actions):
                out.append(Link(need, UnitId(UnitKind.ACTION, k),
                                float(self.facilitation[g, k]),
                                Channel.ACTIVATION))
        for g in range(self.n_needs):
            out.append(Link(special, UnitId(UnitKind.NEED, g),
                            float(self.priorities[g]), Channel.ACTIVATION))
        for g in range(self.n_needs):
            out.append(Link(special, UnitId(UnitKind.NEED, g),
                            float(self.need_valences[g]), Channel.VALENCE))
        for k in range(self.n_actions):
            out.append(Link(special, UnitId(UnitKind.ACTION, k),
                            float(self.action_valences[k]), Channel.VALENCE))
        return out

    def reset(self) -> None:
        K.reset_state(self.activation, self.valence, self.n_needs,
                      self.n_actions, self.params.initial)

    def copy(self) -> "CoherenceNetwork":
        return CoherenceNetwork(
            self.facilitation.copy(), self.priorities.copy(),
            self.need_valences.copy(), self.action_valences.copy(),
            self.activation.copy(), self.valence.copy(), self.params)

    def settle(self, tolerance: Optional[float] = None,
               max_iterations: Optional[int] = None) -> SettleReport:
        return settle(self, tolerance, max_iterations)

    def decide(self, previous: Optional[int] = None) -> Decision:
        return decide(self, previous)

    def state_equal(self, other: "CoherenceNetwork") -> bool:
        return all(np.array_equal(a, b) for a, b in zip(
            self._arrays(), other._arrays()))

    def _arrays(self):
        return (self.facilitation, self.priorities, self.need_valences,
                self.action_valences, self.activation, self.valence)

    # snapshot form: a JSON document with units, links and state vectors
    def to_dict(self) -> dict:
        return {
            "needs": self.n_needs,
            "actions": self.n_actions,
            "params": self.params.to_dict(),
            "units": [str(u) for u in self.units],
            "links": [
                {"from": str(l.source), "to": str(l.target),
                 "weight": l.weight, "channel": l.channel.value}
                for l in self.links
            ],
            "activation": self.activation.tolist(),
            "valence": self.valence.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CoherenceNetwork":
        G, A = int(data["needs"]), int(data["actions"])
        fac = np.zeros((G, A))
        pri = np.zeros(G)
        nval = np.zeros(G)
        aval = np.zeros(A)
        for link in data["links"]:
            src, dst, w, ch = (link["from"], link["to"], float(link["weight"]),
                               link["channel"])
            if src.startswith("Need") and dst.startswith("Action"):
                fac[int(src[4:]), int(dst[6:])] = w
            elif src == "Special" and dst.startswith("Need"):
                (pri if ch == "Activation" else nval)[int(dst[4:])] = w
            elif src == "Special" and dst.startswith("Action"):
                aval[int(dst[6:])] = w
            else:
                raise NetworkError(f"unrecognised link {src}->{dst}")
        net = build_network(fac, pri, nval, aval,
                            params=SettleParams(**data.get("params", {})))
        net.activation[:] = data["activation"]
        net.valence[:] = data["valence"]
        return net

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def loads(cls, text: str) -> "CoherenceNetwork":
        return cls.from_dict(json.loads(text))


def build_network(facilitation, priorities, need_valences, action_valences,
                  params: Optional[SettleParams] = None) -> CoherenceNetwork:
    """Assemble a network from its input weights.

    ``facilitation`` is G x A; ``priorities`` and ``need_valences`` have G
    entries, ``action_valences`` A entries.  Every weight must lie in [-1, 1].
    """
    params = params or SettleParams()
    fac = np.array(facilitation, dtype=float)
    if fac.ndim != 2 or fac.shape[0] < 1 or fac.shape[1] < 1:
        raise NetworkError(
            f"facilitation must be a non-empty G x A matrix, got {fac.shape}")
    G, A = fac.shape
    fac = _check_weights("facilitation", fac, (G, A))
    pri = _check_weights("priorities", priorities, (G,))
    nval = _check_weights("need_valences", need_valences, (G,))
    aval = _check_weights("action_valences", action_valences, (A,))
    net = CoherenceNetwork(fac, pri, nval, aval, np.empty(G + A + 1),
                           np.empty(G + A + 1), params)
    net.reset()
    return net


def settle(net: CoherenceNetwork, tolerance: Optional[float] = None,
           max_iterations: Optional[int] = None) -> SettleReport:
    """Run synchronous updates from the current state until max |change| < tol."""
    p = net.params
    tol = p.tolerance if tolerance is None else tolerance
    cap = p.max_iterations if max_iterations is None else max_iterations
    if tol <= 0:
        raise NetworkError("tolerance must be positive")
    if cap < 1:
        raise NetworkError("max_iterations must be >= 1")
    iters, delta, bad = K.settle(
        net.facilitation, net.priorities, net.need_valences,
        net.action_valences, net.activation, net.valence, p.decay, p.act_min,
        p.act_max, tol, int(cap), p.bidirectional, p.net_code)
    if bad >= 0:
        raise NetworkError(
            f"non-finite net input at unit {net.units[bad]} "
            f"(iteration {iters})")
    return SettleReport(int(iters), bool(delta < tol), float(delta))


def decide(net: CoherenceNetwork, previous: Optional[int] = None) -> Decision:
    G, A = net.n_needs, net.n_actions
    prev = -1 if previous is None else int(previous)
    chosen, tied = K.decide(net.activation, G, A, prev, TIE_EPS)
    return Decision(int(chosen), net.activation[G:G + A].copy(),
                    net.valence[G:G + A].copy(), bool(tied))
