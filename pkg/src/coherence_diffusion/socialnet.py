"""Static social graph from spatial reach and socio-demographic homophily.

Two agents are candidates for a tie when their geographic distance is within
reach (by default the larger of the two social radii).  Each candidate pair
then becomes a tie with probability equal to its tie weight
``1 - distance / max_distance`` in the normalised six-dimensional
demographic space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .population import Agent, Population

REACH_RULES = ("max", "min")


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class SimilaritySpace:
    """Per-dimension normalisers for the demographic distance.

    Dimensions are age, gender, income, education, modernity, consumption.
    A dimension with zero spread contributes nothing.
    """

    max_dist: np.ndarray
    max_delta: float

    @classmethod
    def from_coords(cls, coords: np.ndarray) -> "SimilaritySpace":
        coords = np.asarray(coords, dtype=float)
        span = coords.max(axis=0) - coords.min(axis=0)
        space = cls(span, 1.0)
        n = coords.shape[0]
        if n < 2:
            return space
        iu = np.triu_indices(n, 1)
        deltas = space.pairwise(coords)[iu]
        return cls(span, float(deltas.max()))

    @classmethod
    def from_population(cls, pop: Population) -> "SimilaritySpace":
        return cls.from_coords(demographic_coords(pop))

    def scaled(self, coords: np.ndarray) -> np.ndarray:
        coords = np.asarray(coords, dtype=float)
        safe = np.where(self.max_dist > 0, self.max_dist, 1.0)
        return np.where(self.max_dist > 0, coords / safe, 0.0)

    def pairwise(self, coords: np.ndarray) -> np.ndarray:
        z = self.scaled(coords)
        diff = z[:, None, :] - z[None, :, :]
        return np.sqrt(np.sum(diff * diff, axis=-1))


def demographic_coords(pop: Population) -> np.ndarray:
    return np.stack([a.demographics.as_vector() for a in pop.agents])


def similarity(space: SimilaritySpace, a: Agent, b: Agent) -> float:
    """Normalised Euclidean distance between two agents' demographics."""
    za = space.scaled(a.demographics.as_vector())
    zb = space.scaled(b.demographics.as_vector())
    return float(np.sqrt(np.sum((za - zb) ** 2)))


def tie_weight(space: SimilaritySpace, delta: float) -> float:
    if space.max_delta <= 0:
        raise GraphError("max_delta must be positive")
    if delta > space.max_delta * (1 + 1e-12):
        raise GraphError(
            f"distance {delta} exceeds the population maximum "
            f"{space.max_delta}; agent not from this population?")
    return max(0.0, 1.0 - delta / space.max_delta)


@dataclass(frozen=True)
class SocialGraph:
    """Undirected graph; ``edges`` is a sorted (E, 2) array with i < j."""

    n: int
    edges: np.ndarray
    _ptr: np.ndarray = field(repr=False, compare=False)
    _idx: np.ndarray = field(repr=False, compare=False)

    @classmethod
    def from_edges(cls, n: int, edges) -> "SocialGraph":
        e = np.array(edges, dtype=np.int64).reshape(-1, 2)
        if e.size:
            if np.any(e[:, 0] == e[:, 1]):
                raise GraphError("self-loop in edge list")
            if e.min() < 0 or e.max() >= n:
                raise GraphError("edge endpoint out of range")
            e = np.sort(e, axis=1)
            e = np.unique(e, axis=0)
        e.setflags(write=False)
        # CSR adjacency with sorted neighbour lists
        both = np.concatenate([e, e[:, ::-1]]) if e.size else e
        order = np.lexsort((both[:, 1], both[:, 0])) if e.size else []
        both = both[order] if e.size else both
        ptr = np.zeros(n + 1, dtype=np.int64)
        if e.size:
            np.add.at(ptr, both[:, 0] + 1, 1)
        ptr = np.cumsum(ptr)
        idx = both[:, 1].copy() if e.size else np.zeros(0, dtype=np.int64)
        ptr.setflags(write=False)
        idx.setflags(write=False)
        return cls(n, e, ptr, idx)

    @property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        return self._ptr, self._idx

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    def degree(self) -> np.ndarray:
        return np.diff(self._ptr)

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(i), int(j)) for i, j in self.edges}

    def write_edge_list(self, path) -> None:
        Path(path).write_text("".join(f"{i} {j}\n" for i, j in self.edges))

    @classmethod
    def read_edge_list(cls, n: int, path) -> "SocialGraph":
        rows = [tuple(map(int, line.split()))
                for line in Path(path).read_text().splitlines() if line.strip()]
        return cls.from_edges(n, rows)


def neighbors(g: SocialGraph, i: int) -> list[int]:
    if not 0 <= i < g.n:
        raise GraphError(f"agent id {i} outside 0..{g.n - 1}")
    return g._idx[g._ptr[i]:g._ptr[i + 1]].tolist()


def candidate_mask(pop: Population, reach: str = "max",
                   radius_scale: float = 1.0) -> np.ndarray:
    """Upper-triangular boolean matrix of pairs within geographic reach."""
    if reach not in REACH_RULES:
        raise GraphError(f"reach rule must be one of {REACH_RULES}")
    xy = np.array([a.location for a in pop.agents])
    r = np.array([a.social_radius for a in pop.agents]) * radius_scale
    dist = np.sqrt(np.sum((xy[:, None, :] - xy[None, :, :]) ** 2, axis=-1))
    lim = (np.maximum if reach == "max" else np.minimum)(r[:, None], r[None, :])
    return np.triu(dist <= lim, 1)


def tie_weights(pop: Population, cand: np.ndarray,
                neighbourhood_max: bool = False) -> np.ndarray:
    """Tie weight for every pair (zero outside ``cand``).

    With ``neighbourhood_max`` the distance is normalised by the largest
    distance either agent sees inside its own reach instead of the
    population-wide maximum.
    """
    coords = demographic_coords(pop)
    space = SimilaritySpace.from_coords(coords)
    delta = space.pairwise(coords)
    n = len(pop)
    if neighbourhood_max:
        sym = cand | cand.T
        local = np.where(sym, delta, 0.0).max(axis=1)
        denom = np.maximum(local[:, None], local[None, :])
    else:
        denom = np.full((n, n), space.max_delta)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(denom > 0, 1.0 - delta / denom, 1.0)
    return np.where(cand, np.clip(w, 0.0, 1.0), 0.0)


def build_graph(pop: Population, seed, reach: str = "max",
                radius_scale: float = 1.0,
                neighbourhood_max: bool = False) -> SocialGraph:
    """Draw the tie set.

    One uniform ``R`` in [0, 1) is drawn per candidate pair, in row-major
    (i < j) order, and the tie forms iff ``R`` is below the pair's tie weight.
    """
    n = len(pop)
    if n == 0:
        raise GraphError("empty population")
    cand = candidate_mask(pop, reach, radius_scale)
    w = tie_weights(pop, cand, neighbourhood_max)
    ii, jj = np.nonzero(cand)  # row-major, i < j
    rng = np.random.default_rng(seed)
    keep = rng.random(ii.shape[0]) < w[ii, jj]
    return SocialGraph.from_edges(n, np.column_stack([ii[keep], jj[keep]]))
