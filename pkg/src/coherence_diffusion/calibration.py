"""Fit facilitation means so generated agents reproduce target modal splits.

The search moves one offset per (type, action): the offset is added to every
need's facilitation mean toward that action.  Each round proposes, for every
type at once, a log-ratio step toward the target plus Gaussian noise, and
keeps the proposal for a type only if it lowers that type's squared share
error.  The random draws of the population itself are fixed, so the
objective is a deterministic function of the offsets and the whole search
is reproducible.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .coherence import SettleParams
from .kinds import ACTION_LABELS, NEED_LABELS
from .population import (PopulationError, TypeProfile, _check_profiles, _draw,
                         _materialize, settled_preferences, tally_arrays)

log = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 0.03
DEFAULT_BUDGET = 400
OFFSET_LIMIT = 0.9
STEP = 0.03
NOISE = 0.003


class CalibrationWarning(UserWarning):
    pass


@dataclass
class CalibrationResult:
    profiles: list[TypeProfile]
    error: float  # max |share - target| over types and modes
    type_errors: dict[int, float]
    iterations: int
    converged: bool

    @property
    def warning(self) -> bool:
        return not self.converged


LOG_EPS = 0.01


def _type_shares(pref, types, type_ids, A):
    return {t: tally_arrays(pref[types == t], A).shares for t in type_ids}


def calibrate_profiles(profiles: Sequence[TypeProfile],
                       targets: Optional[dict[int, Sequence[float]]] = None,
                       seed=0, budget: int = DEFAULT_BUDGET, n: int = 675,
                       tolerance: float = DEFAULT_TOLERANCE,
                       params: Optional[SettleParams] = None,
                       n_needs: int = len(NEED_LABELS),
                       n_actions: int = len(ACTION_LABELS)
                       ) -> CalibrationResult:
    """Stochastic local search over per-type facilitation means.

    ``targets`` defaults to each profile's ``target_initial_shares``.  The
    returned profiles reproduce the targets within ``tolerance`` for a
    population generated with the same ``n`` and ``seed``; if the budget runs
    out first, the best profiles found are returned with ``converged=False``
    and a :class:`CalibrationWarning` is issued.
    """
    _check_profiles(profiles)
    params = params or SettleParams()
    profiles = [p.copy() for p in profiles]
    type_ids = [p.type_id for p in profiles]
    G, A = n_needs, n_actions
    tgt = {}
    for p in profiles:
        t = np.asarray(targets[p.type_id] if targets else
                       p.target_initial_shares, dtype=float)
        if t.shape != (A,) or np.any(t < 0) or abs(t.sum() - 1) > 1e-6:
            raise PopulationError(
                f"type {p.type_id}: target {t.tolist()} is not a probability "
                f"vector over {A} actions")
        p.target_initial_shares = t
        tgt[p.type_id] = t

    draws = _draw(n, profiles, G, A, seed)
    search_rng = np.random.default_rng([int(seed) & 0xFFFFFFFF, 0xCA1])
    base = {p.type_id: p.facilitation_mean.copy() for p in profiles}
    offsets = {t: np.zeros(A) for t in type_ids}

    def evaluate(offs):
        for p in profiles:
            p.facilitation_mean = np.clip(
                base[p.type_id] + offs[p.type_id][None, :], -1.0, 1.0)
        fac, pri, nval, aval, _ = _materialize(draws, profiles)
        _, _, pref = settled_preferences(fac, pri, nval, aval, params)
        return _type_shares(pref, draws.types, type_ids, A)

    def scores(shares):
        return {t: (float(np.abs(shares[t] - tgt[t]).max()),
                    float(np.sum((shares[t] - tgt[t]) ** 2)))
                for t in type_ids}

    shares_cur = evaluate(offsets)
    cur = scores(shares_cur)
    step = {t: STEP for t in type_ids}
    noise = {t: NOISE for t in type_ids}
    it = 0
    while it < budget and max(s[0] for s in cur.values()) > tolerance:
        it += 1
        proposal = {}
        for t in type_ids:
            if cur[t][0] <= tolerance:
                proposal[t] = offsets[t]
                continue
            # log-ratio drift: raise under-chosen actions, lower over-chosen
            move = step[t] * (np.log(tgt[t] + LOG_EPS)
                              - np.log(shares_cur[t] + LOG_EPS))
            move = move + noise[t] * search_rng.standard_normal(A)
            proposal[t] = np.clip(offsets[t] + move - move.mean(),
                                  -OFFSET_LIMIT, OFFSET_LIMIT)
        new_shares = evaluate(proposal)
        new = scores(new_shares)
        for t in type_ids:
            if proposal[t] is offsets[t]:
                continue
            if (new[t][1], new[t][0]) < (cur[t][1], cur[t][0]):
                offsets[t] = proposal[t]
                cur[t] = new[t]
                shares_cur[t] = new_shares[t]
                step[t] = min(step[t] * 1.2, 4 * STEP)
            else:
                step[t] *= 0.7
                if step[t] < STEP / 20:
                    # stalled: restart the step and widen the noise
                    step[t] = STEP
                    noise[t] = min(noise[t] * 1.5, 10 * NOISE)
        log.debug("round %d: errors %s", it,
                  {t: round(s[0], 4) for t, s in cur.items()})

    # leave profiles at the accepted offsets
    final = evaluate(offsets)
    cur = scores(final)
    err = max(s[0] for s in cur.values())
    converged = err <= tolerance
    if not converged:
        warnings.warn(
            f"calibration budget {budget} exhausted; best max share error "
            f"{err:.4f} > {tolerance}", CalibrationWarning, stacklevel=2)
    return CalibrationResult(profiles, err, {t: s[0] for t, s in cur.items()},
                             it, converged)
