"""End components usable by resilient schedulers.

The long-run behavior of any resilient scheduler is confined to end
components whose internal scheduler keeps, for every error e, the mean of a
weight function nonnegative: repair successes within budget earn 1 - p,
budget overruns pay -p, everything else is neutral. Maximizing availability
under these mean constraints is an occupation-measure linear program; its
recurrent frequencies are extracted into component triples (state set,
action sets, memoryless scheduler, availability). An elimination loop then
re-runs the program on ever smaller sub-MDPs so that components unreachable
for the global optimum are still discovered.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import analyze
from .graph import strongly_connected_components
from .lp import EQ, GE, OPTIMAL, LinearProgram, LpSolution, solve
from .model import OPERATIONAL
from .sched import MrScheduler
from .transform import TransformedMdp


def build_weights(mt: TransformedMdp, threshold: Fraction) -> dict[int, dict[int, Fraction]]:
    """Per-error weight function over transformed states (sparse, zero omitted)."""
    threshold = Fraction(threshold)
    out: dict[int, dict[int, Fraction]] = {}
    for e in mt.errors():
        base_e = mt.back[e]
        wgt: dict[int, Fraction] = {}
        for i in range(mt.n):
            t = mt.triple[i]
            if t is None:
                continue
            te, ts, r = t
            if te != base_e:
                continue
            if mt.base.kinds[ts] == OPERATIONAL:
                wgt[i] = 1 - threshold
            elif r + mt.base.cost(ts) > mt.cost_bound:
                wgt[i] = -threshold
        if mt.base.cost(base_e) > mt.cost_bound:
            # Repair can never succeed within budget; the error state itself
            # carries the penalty so no end component may contain it.
            wgt[e] = -threshold
        out[e] = wgt
    return out


@dataclass(frozen=True)
class SubMdp:
    """A sub-MDP of the transformed model: a state subset with, per state, a
    nonempty subset of enabled actions whose transitions stay inside."""

    mt: TransformedMdp
    members: tuple[int, ...]
    enabled_map: dict[int, tuple[str, ...]]

    @property
    def actions(self):
        return _RestrictedActions(self)

    def enabled(self, i: int) -> tuple[str, ...]:
        return self.enabled_map[i]

    @property
    def empty(self) -> bool:
        return not self.members


class _RestrictedActions:
    def __init__(self, q: SubMdp):
        self._q = q

    def __getitem__(self, i: int) -> dict[str, list[tuple[int, Fraction]]]:
        return {a: self._q.mt.actions[i][a] for a in self._q.enabled_map[i]}


def full_sub_mdp(mt: TransformedMdp) -> SubMdp:
    return SubMdp(mt, tuple(range(mt.n)),
                  {i: tuple(mt.enabled(i)) for i in range(mt.n)})


def prune(q: SubMdp, removed: set[int]) -> SubMdp:
    """Largest sub-MDP of q avoiding ``removed``.

    Deleting a state disables every action with a transition into it; a state
    with no enabled action left is deleted in turn, until a fixpoint.
    """
    alive = {s: set(q.enabled_map[s]) for s in q.members if s not in removed}
    changed = True
    while changed:
        changed = False
        for s in list(alive):
            for a in list(alive[s]):
                if any(t not in alive for t, _ in q.mt.actions[s][a]):
                    alive[s].discard(a)
                    changed = True
            if not alive[s]:
                del alive[s]
                changed = True
    members = tuple(sorted(alive))
    return SubMdp(q.mt, members, {s: tuple(sorted(alive[s])) for s in members})


def mec_decomposition(q: SubMdp) -> list[tuple[list[int], dict[int, list[str]]]]:
    """Maximal end components of q, ordered by smallest contained state.

    Standard iteration: split into SCCs, disable actions leaving their SCC,
    drop action-less states, repeat until stable. Singleton SCCs without an
    internal action are discarded.
    """
    enabled = {s: list(q.enabled_map[s]) for s in q.members}
    while True:
        states = sorted(enabled)
        pos = {s: k for k, s in enumerate(states)}
        succ = [[] for _ in states]
        for s in states:
            for a in enabled[s]:
                for t, _ in q.mt.actions[s][a]:
                    if t in pos:
                        succ[pos[s]].append(pos[t])
        comps = strongly_connected_components(succ)
        changed = False
        for comp in comps:
            members = {states[v] for v in comp}
            for v in comp:
                s = states[v]
                for a in list(enabled[s]):
                    if any(t not in members for t, _ in q.mt.actions[s][a]):
                        enabled[s].remove(a)
                        changed = True
        for s in list(enabled):
            if not enabled[s]:
                del enabled[s]
                changed = True
        if not changed:
            break
    mecs = []
    for comp in comps:
        members = sorted(states[v] for v in comp if states[v] in enabled)
        if not members:
            continue
        if len(members) == 1:
            s = members[0]
            if not any(t == s for a in enabled[s] for t, _ in q.mt.actions[s][a]):
                continue
        mecs.append((members, {s: sorted(enabled[s]) for s in members}))
    mecs.sort(key=lambda me: me[0][0])
    return mecs


def _yv(q: SubMdp, s: int, a: str) -> str:
    return f"y[{q.mt.ids[s]}|{a}]"


def _ys(q: SubMdp, s: int) -> str:
    return f"y[{q.mt.ids[s]}]"


def _xv(q: SubMdp, s: int, a: str) -> str:
    return f"x[{q.mt.ids[s]}|{a}]"


def build_multi_mp_lp(q: SubMdp, init: int,
                      weights: dict[int, dict[int, Fraction]]) -> LinearProgram:
    """Occupation-measure program for maximal availability under nonnegative
    per-error weight means.

    y[s|a] is expected transient visit mass, y[s] the mass switching to
    recurrent mode at s (allowed only inside maximal end components),
    x[s|a] the long-run state-action frequency. Flow conservation couples y,
    per-MEC matching couples x to the switch mass, and one inequality per
    error keeps that error's expected weight frequency nonnegative.
    """
    if init not in q.enabled_map:
        raise ValueError("initial state not in sub-MDP")
    mecs = mec_decomposition(q)
    mec_states = {s for members, _ in mecs for s in members}

    variables: list[str] = []
    for s in q.members:
        for a in q.enabled(s):
            variables.append(_yv(q, s, a))
        if s in mec_states:
            variables.append(_ys(q, s))
    for s in q.members:
        for a in q.enabled(s):
            variables.append(_xv(q, s, a))

    lp = LinearProgram(variables=variables, nonneg=set(variables))

    inflow_y: dict[int, dict[str, Fraction]] = {s: {} for s in q.members}
    inflow_x: dict[int, dict[str, Fraction]] = {s: {} for s in q.members}
    for s in q.members:
        for a in q.enabled(s):
            for t, p in q.mt.actions[s][a]:
                inflow_y[t][_yv(q, s, a)] = inflow_y[t].get(_yv(q, s, a), Fraction(0)) + p
                inflow_x[t][_xv(q, s, a)] = inflow_x[t].get(_xv(q, s, a), Fraction(0)) + p

    for s in q.members:  # transient flow: outflow + switch = source + inflow
        coeffs: dict[str, Fraction] = {}
        for a in q.enabled(s):
            coeffs[_yv(q, s, a)] = coeffs.get(_yv(q, s, a), Fraction(0)) + 1
        if s in mec_states:
            coeffs[_ys(q, s)] = Fraction(1)
        for var, p in inflow_y[s].items():
            coeffs[var] = coeffs.get(var, Fraction(0)) - p
        lp.add(coeffs, EQ, Fraction(1 if s == init else 0))

    lp.add({_ys(q, s): Fraction(1) for s in sorted(mec_states)}, EQ, 1)

    for s in q.members:  # recurrent flow conservation
        coeffs = {}
        for a in q.enabled(s):
            coeffs[_xv(q, s, a)] = coeffs.get(_xv(q, s, a), Fraction(0)) + 1
        for var, p in inflow_x[s].items():
            coeffs[var] = coeffs.get(var, Fraction(0)) - p
        lp.add(coeffs, EQ, 0)

    for members, acts in mecs:  # recurrent mass appears where switching happened
        coeffs = {}
        for s in members:
            for a in q.enabled(s):
                coeffs[_xv(q, s, a)] = Fraction(1)
            coeffs[_ys(q, s)] = Fraction(-1)
        lp.add(coeffs, EQ, 0)

    for e in sorted(weights):
        if e not in q.enabled_map:
            continue
        wgt = weights[e]
        coeffs = {}
        for s in q.members:
            w = wgt.get(s)
            if w:
                for a in q.enabled(s):
                    coeffs[_xv(q, s, a)] = w
        lp.add(coeffs, GE, 0)

    lp.objective = {}
    for s in q.members:
        pay = q.mt.payoff(s)
        if pay:
            for a in q.enabled(s):
                lp.objective[_xv(q, s, a)] = Fraction(pay)
    lp.direction = "max"
    return lp


@dataclass(frozen=True)
class ComponentTriple:
    states: tuple[int, ...]
    action_sets: dict[int, tuple[str, ...]]
    scheduler: MrScheduler
    avail: Fraction
    snapshot: SubMdp


ComponentSet = list  # of ComponentTriple


def extract_components(q: SubMdp, solution: LpSolution) -> list[ComponentTriple]:
    """Read component triples off the recurrent frequencies of a solution.

    The support of x is a union of bottom SCCs (a stationary measure only
    charges closed recurrent classes); each such SCC yields a triple with the
    frequency-proportional scheduler and its exact stationary availability.
    """
    if solution.status != OPTIMAL:
        raise ValueError("need an optimal solution")
    x = {}
    for s in q.members:
        for a in q.enabled(s):
            v = solution.assignment.get(_xv(q, s, a), Fraction(0))
            if v > 0:
                x[(s, a)] = v
    if not x:
        return []
    support_states = sorted({s for s, _ in x})
    pos = {s: k for k, s in enumerate(support_states)}
    succ = [[] for _ in support_states]
    for (s, a) in x:
        for t, p in q.mt.actions[s][a]:
            if p > 0:
                succ[pos[s]].append(pos[t])
    comps = strongly_connected_components(succ)
    triples = []
    for comp in sorted(comps, key=min):
        members = sorted(support_states[v] for v in comp)
        member_set = set(members)
        assert all(support_states[w] in member_set
                   for v in comp for w in succ[v]), "x support SCC must be bottom"
        action_sets = {s: tuple(sorted(a for (t, a) in x if t == s)) for s in members}
        choices = {}
        for s in members:
            total = sum((x[(s, a)] for a in action_sets[s]), Fraction(0))
            choices[s] = {a: x[(s, a)] / total for a in action_sets[s]}
        sched = MrScheduler(choices)
        triples.append(ComponentTriple(tuple(members), action_sets, sched,
                                       _component_availability(q.mt, sched, members[0]),
                                       q))
    return triples


def _component_availability(mt: TransformedMdp, sched: MrScheduler, start: int) -> Fraction:
    chain = analyze.induce_chain(mt, sched, start)
    return analyze.long_run_value(chain, mt.payoff)


def _certify(triple: ComponentTriple,
             weights: dict[int, dict[int, Fraction]]) -> ComponentTriple:
    """Re-solve on the snapshot with recurrence confined to the component.

    A global optimum need not witness per-initial-state maximality inside
    each component; the restricted solve is cheap and, when it beats the
    extracted scheduler, its own component replaces the triple.
    """
    q = triple.snapshot
    lp = build_multi_mp_lp(q, triple.states[0], weights)
    inside = set(triple.states)
    for s in q.members:
        if s not in inside:
            for a in q.enabled(s):
                lp.add({_xv(q, s, a): Fraction(1)}, EQ, 0)
    sol = solve(lp)
    if sol.status != OPTIMAL:
        return triple
    candidates = extract_components(q, sol)
    candidates = [t for t in candidates if set(t.states) <= inside]
    if not candidates:
        return triple
    best = max(candidates, key=lambda t: t.avail)
    return best if best.avail > triple.avail else triple


def compute_E(mt: TransformedMdp, threshold: Fraction) -> list[ComponentTriple]:
    """Elimination loop producing the full set of usable component triples.

    Solve the availability program on the current sub-MDP; on success keep
    the extracted (certified) triples and remove their states, otherwise
    remove the current initial state. Repeat until nothing is left. The
    result may be empty, in which case no resilient scheduler exists.
    """
    weights = build_weights(mt, threshold)
    q = full_sub_mdp(mt)
    s = mt.initial
    out: list[ComponentTriple] = []
    while not q.empty:
        sol = solve(build_multi_mp_lp(q, s, weights))
        if sol.status == OPTIMAL:
            triples = [_certify(t, weights) for t in extract_components(q, sol)]
            out.extend(triples)
            q = prune(q, {t for tr in triples for t in tr.states})
        else:
            q = prune(q, {s})
        if not q.empty and s not in q.enabled_map:
            s = q.members[0]
    return out
