"""Compiled inner loops shared by the object API and the simulation engine.

Unit layout for every state vector: needs ``0..G-1``, actions ``G..G+A-1``,
special unit at index ``G+A``.  All kernels mutate their array arguments in
place and never allocate per-agent Python objects.
"""

import numpy as np
from numba import njit

# net-input modes for the activation channel
NET_LITERAL = 0  # sum_i w_ij a_i (1 + v_i) over activation links
NET_SPLIT = 1  # activation links plain, valence links add w_ij v_i a_i

# means-ends / contagion update rules
RULE_DIRECTIONAL = 0
RULE_PROPORTIONAL = 1

# media update modes
MEDIA_ADDITIVE = 0
MEDIA_MULTIPLICATIVE = 1


@njit(cache=True)
def _clamp(x, lo, hi):
    if x < lo:
        return lo
    if x > hi:
        return hi
    return x


@njit(cache=True)
def _relax(x, net, decay, lo, hi):
    if net > 0.0:
        y = x * (1.0 - decay) + net * (hi - x)
    else:
        y = x * (1.0 - decay) + net * (x - lo)
    return _clamp(y, lo, hi)


@njit(cache=True)
def reset_state(act, val, G, A, initial):
    for j in range(G + A):
        act[j] = initial
        val[j] = initial
    act[G + A] = 1.0
    val[G + A] = 1.0


@njit(cache=True)
def settle(fac, pri, nval, aval, act, val, decay, lo, hi, tol, max_iter,
           bidirectional, net_mode):
    """Synchronous settling.  Returns (iterations, max_delta, bad_unit).

    ``bad_unit`` is -1 unless a non-finite value showed up, in which case the
    state is left at the offending iteration and the unit index is returned.
    """
    G = fac.shape[0]
    A = fac.shape[1]
    S = G + A
    new_act = np.empty(S)
    new_val = np.empty(S)
    sa = act[S]
    sv = val[S]
    max_delta = 0.0
    for it in range(max_iter):
        for g in range(G):
            if net_mode == NET_LITERAL:
                net = pri[g] * sa * (1.0 + sv)
            else:
                net = pri[g] * sa + nval[g] * sv * sa
            if bidirectional:
                for k in range(A):
                    if net_mode == NET_LITERAL:
                        net += fac[g, k] * act[G + k] * (1.0 + val[G + k])
                    else:
                        net += fac[g, k] * act[G + k]
            netv = nval[g] * sv * sa
            new_act[g] = _relax(act[g], net, decay, lo, hi)
            new_val[g] = _relax(val[g], netv, decay, lo, hi)
            if not (np.isfinite(new_act[g]) and np.isfinite(new_val[g])):
                return it, np.inf, g
        for k in range(A):
            net = 0.0
            for g in range(G):
                if net_mode == NET_LITERAL:
                    net += fac[g, k] * act[g] * (1.0 + val[g])
                else:
                    net += fac[g, k] * act[g]
            if net_mode == NET_SPLIT:
                net += aval[k] * sv * sa
            netv = aval[k] * sv * sa
            new_act[G + k] = _relax(act[G + k], net, decay, lo, hi)
            new_val[G + k] = _relax(val[G + k], netv, decay, lo, hi)
            if not (np.isfinite(new_act[G + k]) and np.isfinite(new_val[G + k])):
                return it, np.inf, G + k
        max_delta = 0.0
        for j in range(S):
            da = abs(new_act[j] - act[j])
            dv = abs(new_val[j] - val[j])
            if da > max_delta:
                max_delta = da
            if dv > max_delta:
                max_delta = dv
            act[j] = new_act[j]
            val[j] = new_val[j]
        if max_delta < tol:
            return it + 1, max_delta, -1
    return max_iter, max_delta, -1


@njit(cache=True)
def decide(act, G, A, previous, tie_eps):
    """Returns (chosen action, tied flag)."""
    best = act[G]
    for k in range(1, A):
        if act[G + k] > best:
            best = act[G + k]
    n_max = 0
    first = -1
    keep = False
    for k in range(A):
        if best - act[G + k] <= tie_eps:
            n_max += 1
            if first < 0:
                first = k
            if k == previous:
                keep = True
    if keep:
        return previous, n_max > 1
    return first, n_max > 1


@njit(cache=True)
def receiver_band(w, inner, outer):
    # printed inequalities: >=.60 | .20<=w<.60 | -.20<=w<.20 | -.60<w<-.20 | <=-.60
    if w >= outer:
        return 0
    if w >= inner:
        return 1
    if w >= -inner:
        return 2
    if w > -outer:
        return 3
    return 4


@njit(cache=True)
def sender_band(w, threshold):
    if w > threshold:
        return 0
    if w < -threshold:
        return 1
    return -1


@njit(cache=True)
def nudge(base, scale_from, factor, floor, rule):
    if rule == RULE_DIRECTIONAL:
        delta = max(abs(scale_from), floor) / 100.0 * factor
    else:
        delta = scale_from / 100.0 * factor
    return _clamp(base + delta, -1.0, 1.0)


@njit(cache=True)
def transmit(send_fac, send_val, recv_fac, recv_aval, recv_val, G, pi, alpha,
             z_fact, z_emotion, inner, outer, floor, rule):
    """Apply one speaker's selective message to a listener, in place.

    ``send_val`` / ``recv_val`` are full settled valence vectors; the action
    entries start at offset ``G``.
    """
    A = send_fac.shape[1]
    for g in range(G):
        for k in range(A):
            row = sender_band(send_fac[g, k], z_fact)
            if row < 0:
                continue
            w = recv_fac[g, k]
            factor = pi[row, receiver_band(w, inner, outer)]
            recv_fac[g, k] = nudge(w, w, factor, floor, rule)
    for k in range(A):
        row = sender_band(send_val[G + k], z_emotion)
        if row < 0:
            continue
        v = recv_val[G + k]
        factor = alpha[row, receiver_band(v, inner, outer)]
        # link reset to the settled valence, then nudged
        recv_aval[k] = nudge(v, v, factor, floor, rule)


@njit(cache=True)
def resettle(fac, pri, nval, aval, act, val, initial, decay, lo, hi, tol,
             max_iter, bidirectional, net_mode):
    G = fac.shape[0]
    A = fac.shape[1]
    reset_state(act, val, G, A, initial)
    return settle(fac, pri, nval, aval, act, val, decay, lo, hi, tol, max_iter,
                  bidirectional, net_mode)


@njit(cache=True)
def exchange_pair(i, j, FAC, PRI, NVAL, AVAL, ACT, VAL, PREF, pi, alpha,
                  z_fact, z_emotion, inner, outer, floor, rule, initial, decay,
                  lo, hi, tol, max_iter, bidirectional, net_mode, tie_eps):
    G = FAC.shape[1]
    A = FAC.shape[2]
    fac_i = FAC[i].copy()
    fac_j = FAC[j].copy()
    val_i = VAL[i].copy()
    val_j = VAL[j].copy()
    transmit(fac_i, val_i, FAC[j], AVAL[j], val_j, G, pi, alpha, z_fact,
             z_emotion, inner, outer, floor, rule)
    transmit(fac_j, val_j, FAC[i], AVAL[i], val_i, G, pi, alpha, z_fact,
             z_emotion, inner, outer, floor, rule)
    bad = -1
    for r in (i, j):
        _, _, b = resettle(FAC[r], PRI[r], NVAL[r], AVAL[r], ACT[r], VAL[r],
                           initial, decay, lo, hi, tol, max_iter,
                           bidirectional, net_mode)
        if b >= 0:
            bad = r
        PREF[r], _ = decide(ACT[r], G, A, PREF[r], tie_eps)
    return bad


@njit(cache=True)
def communication_round(order, partner_u, nbr_ptr, nbr_idx, FAC, PRI, NVAL,
                        AVAL, ACT, VAL, PREF, pi, alpha, z_fact, z_emotion,
                        inner, outer, floor, rule, initial, decay, lo, hi, tol,
                        max_iter, bidirectional, net_mode, tie_eps):
    """One time step of dyadic talk.  Returns number of isolated agents."""
    isolated = 0
    for t in range(order.shape[0]):
        i = order[t]
        deg = nbr_ptr[i + 1] - nbr_ptr[i]
        if deg == 0:
            isolated += 1
            continue
        pick = int(partner_u[t] * deg)
        if pick >= deg:
            pick = deg - 1
        j = nbr_idx[nbr_ptr[i] + pick]
        exchange_pair(i, j, FAC, PRI, NVAL, AVAL, ACT, VAL, PREF, pi, alpha,
                      z_fact, z_emotion, inner, outer, floor, rule, initial,
                      decay, lo, hi, tol, max_iter, bidirectional, net_mode,
                      tie_eps)
    return isolated


@njit(cache=True)
def media_push(targets_idx, need_idx, action_idx, base_delta, mu, FAC, PRI,
               NVAL, AVAL, ACT, VAL, PREF, mode, initial, decay, lo, hi, tol,
               max_iter, bidirectional, net_mode, tie_eps):
    G = FAC.shape[1]
    A = FAC.shape[2]
    for t in range(targets_idx.shape[0]):
        r = targets_idx[t]
        for q in range(need_idx.shape[0]):
            g = need_idx[q]
            k = action_idx[q]
            w = FAC[r, g, k]
            if mode == MEDIA_ADDITIVE:
                FAC[r, g, k] = _clamp(w + mu[r] * base_delta[q], -1.0, 1.0)
            else:
                FAC[r, g, k] = _clamp(w * mu[r], -1.0, 1.0)
        resettle(FAC[r], PRI[r], NVAL[r], AVAL[r], ACT[r], VAL[r], initial,
                 decay, lo, hi, tol, max_iter, bidirectional, net_mode)
        PREF[r], _ = decide(ACT[r], G, A, PREF[r], tie_eps)


@njit(cache=True)
def settle_all(FAC, PRI, NVAL, AVAL, ACT, VAL, PREF, initial, decay, lo, hi,
               tol, max_iter, bidirectional, net_mode, tie_eps):
    G = FAC.shape[1]
    A = FAC.shape[2]
    for r in range(FAC.shape[0]):
        resettle(FAC[r], PRI[r], NVAL[r], AVAL[r], ACT[r], VAL[r], initial,
                 decay, lo, hi, tol, max_iter, bidirectional, net_mode)
        PREF[r], _ = decide(ACT[r], G, A, -1, tie_eps)
