"""Exact quantitative analysis of scheduler-induced Markov chains.

Everything here is rational arithmetic: until-probabilities and expected
rewards come from Gaussian elimination, long-run averages from stationary
distributions of bottom strongly connected components, and the qualitative
almost-sure checks from graph analysis. A seeded Monte Carlo simulator and a
small brute-force optimum search double as independent cross-checks for the
LP pipeline.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .graph import bottom_sccs, reachable_from
from .linsolve import solve_linear_system
from .model import ERROR
from .sched import MrScheduler
from .transform import TransformedMdp


class SchedulerDomainError(ValueError):
    """The scheduler does not cover a reachable state."""


@dataclass
class InducedChain:
    """Markov chain induced by an MR-scheduler, restricted to reachable states.

    ``states`` are host indices in BFS discovery order (the initial state is
    local index 0); ``rows[i]`` maps local successor index to probability.
    """

    states: list[int]
    rows: list[dict[int, Fraction]]
    index: dict[int, int]

    @property
    def n(self) -> int:
        return len(self.states)

    def succ_lists(self) -> list[list[int]]:
        return [sorted(row) for row in self.rows]


def induce_chain(host, scheduler: MrScheduler, init: int) -> InducedChain:
    """P(s, s') = sum_a sched(s)(a) * P(s, a, s') over states reachable from init."""
    states = [init]
    index = {init: 0}
    rows: list[dict[int, Fraction]] = []
    queue = deque([init])
    while queue:
        s = queue.popleft()
        if s not in scheduler.choices:
            raise SchedulerDomainError(f"scheduler undefined on reachable state {s}")
        row: dict[int, Fraction] = {}
        for act, prob_a in sorted(scheduler.dist(s).items()):
            if prob_a == 0:
                continue
            dist = host.actions[s].get(act)
            if dist is None:
                raise SchedulerDomainError(f"action {act!r} not enabled in state {s}")
            for t, p in dist:
                if t not in index:
                    index[t] = len(states)
                    states.append(t)
                    queue.append(t)
                row[index[t]] = row.get(index[t], Fraction(0)) + prob_a * p
        rows.append(row)
    return InducedChain(states, rows, index)


def until_probability(c: InducedChain, stay: set[int], target: set[int]) -> dict[int, Fraction]:
    """Exact Pr(stay U target) per state, host-indexed.

    States that cannot reach ``target`` through ``stay`` have probability 0 by
    graph analysis; the rest solve the standard linear system.
    """
    loc_stay = {c.index[s] for s in stay if s in c.index}
    loc_target = {c.index[s] for s in target if s in c.index}
    # Backward reachability of target through stay-states.
    pred: list[list[int]] = [[] for _ in range(c.n)]
    for i, row in enumerate(c.rows):
        if i in loc_target or i not in loc_stay:
            continue  # only stay\target states may continue the until path
        for j in row:
            pred[j].append(i)
    possible = set(loc_target)
    frontier = list(loc_target)
    while frontier:
        v = frontier.pop()
        for u in pred[v]:
            if u not in possible:
                possible.add(u)
                frontier.append(u)
    unknown = sorted(possible - loc_target)
    col = {s: k for k, s in enumerate(unknown)}
    rows_mat, rhs = [], []
    for s in unknown:
        row = [Fraction(0)] * len(unknown)
        row[col[s]] = Fraction(1)
        b = Fraction(0)
        for t, p in c.rows[s].items():
            if t in col:
                row[col[t]] -= p
            elif t in loc_target:
                b += p
        rows_mat.append(row)
        rhs.append(b)
    sol = solve_linear_system(rows_mat, rhs) if unknown else []
    out = {}
    for i, s in enumerate(c.states):
        if i in loc_target:
            out[s] = Fraction(1)
        elif i in col:
            out[s] = sol[col[i]]
        else:
            out[s] = Fraction(0)
    return out


def almost_sure_reach(c: InducedChain, target: set[int]) -> dict[int, bool]:
    """Pr(eventually target) = 1, per state, by BSCC analysis.

    With target states made absorbing, reaching target almost surely is
    equivalent to not being able to reach a bottom SCC disjoint from target.
    """
    loc_target = {c.index[s] for s in target if s in c.index}
    succ = [[] if i in loc_target else sorted(row) for i, row in enumerate(c.rows)]
    bad = set()
    for comp in bottom_sccs(succ):
        if not any(v in loc_target for v in comp):
            bad.update(comp)
    out = {}
    for i, s in enumerate(c.states):
        out[s] = not (reachable_from(succ, i) & bad)
    return out


def _bsccs(c: InducedChain) -> list[list[int]]:
    return bottom_sccs(c.succ_lists())


def stationary_distribution(c: InducedChain, comp: list[int]) -> dict[int, Fraction]:
    """Stationary distribution of an irreducible BSCC, local-indexed."""
    col = {s: k for k, s in enumerate(comp)}
    n = len(comp)
    rows_mat = []
    rhs = []
    for s in comp:  # balance: pi(s) = sum_t pi(t) P(t, s)
        row = [Fraction(0)] * n
        row[col[s]] += 1
        for t in comp:
            p = c.rows[t].get(s)
            if p:
                row[col[t]] -= p
        rows_mat.append(row)
        rhs.append(Fraction(0))
    rows_mat.append([Fraction(1)] * n)
    rhs.append(Fraction(1))
    sol = solve_linear_system(rows_mat, rhs)
    return {s: sol[col[s]] for s in comp}


def reach_probabilities(c: InducedChain, absorbing: list[list[int]]) -> list[dict[int, Fraction]]:
    """Probability, per state, of eventually entering each absorbing family member."""
    in_some = {v for comp in absorbing for v in comp}
    transient = [i for i in range(c.n) if i not in in_some]
    col = {s: k for k, s in enumerate(transient)}
    results = []
    for comp in absorbing:
        members = set(comp)
        rows_mat, rhs = [], []
        for s in transient:
            row = [Fraction(0)] * len(transient)
            row[col[s]] = Fraction(1)
            b = Fraction(0)
            for t, p in c.rows[s].items():
                if t in col:
                    row[col[t]] -= p
                elif t in members:
                    b += p
            rows_mat.append(row)
            rhs.append(b)
        sol = solve_linear_system(rows_mat, rhs) if transient else []
        probs = {}
        for i in range(c.n):
            if i in members:
                probs[i] = Fraction(1)
            elif i in in_some:
                probs[i] = Fraction(0)
            else:
                probs[i] = sol[col[i]]
        results.append(probs)
    return results


def long_run_value(c: InducedChain, value_of) -> Fraction:
    """Expected mean value from the initial state: sum over BSCCs of
    (reach probability) x (stationary mean of value_of)."""
    comps = _bsccs(c)
    reach = reach_probabilities(c, comps)
    total = Fraction(0)
    for comp, probs in zip(comps, reach):
        pi = stationary_distribution(c, comp)
        mean = sum((pi[i] * Fraction(value_of(c.states[i])) for i in comp), Fraction(0))
        total += probs[0] * mean
    return total


def availability(c: InducedChain, payoff_of) -> Fraction:
    return long_run_value(c, payoff_of)


def mp_values(c: InducedChain, weights: dict[int, dict[int, Fraction]]) -> dict[int, Fraction]:
    """Long-run average of each error's weight function; host-indexed errors."""
    return {e: long_run_value(c, lambda s: wgt.get(s, Fraction(0)))
            for e, wgt in weights.items()}


@dataclass
class ErrorCheck:
    res_probability: Fraction
    res_ok: bool
    asrep_ok: bool


@dataclass
class VerificationReport:
    per_error: dict[int, ErrorCheck]
    availability: Fraction
    mp: dict[int, Fraction]

    @property
    def ok(self) -> bool:
        return all(ch.res_ok and ch.asrep_ok for ch in self.per_error.values())

    def render(self, mt: TransformedMdp, threshold: Fraction) -> str:
        lines = [f"availability: {self.availability} (~{float(self.availability):.6g})"]
        for e in sorted(self.per_error):
            ch = self.per_error[e]
            lines.append(
                f"error {mt.ids[e]}: repair-success {ch.res_probability} "
                f"(~{float(ch.res_probability):.6g}) "
                f"{'>=' if ch.res_ok else '<'} {threshold}; "
                f"almost-sure repair: {'yes' if ch.asrep_ok else 'NO'}; "
                f"weight mean {self.mp.get(e, Fraction(0))}")
        lines.append("resilient: " + ("yes" if self.ok else "NO"))
        return "\n".join(lines)


def verify_resilient(mt: TransformedMdp, scheduler: MrScheduler,
                     threshold: Fraction) -> VerificationReport:
    """Check the repair-success and almost-sure-repair conditions exactly.

    ``scheduler`` must be memoryless on the transformed MDP; residual
    schedulers after any history then coincide with the scheduler itself, so
    per-state checks at each reachable error are sound and complete.
    """
    from .components import build_weights  # deferred: components builds on analyze

    chain = induce_chain(mt, scheduler, mt.initial)
    triples = {i for i in range(mt.n) if mt.triple[i] is not None}
    op_states = {i for i in range(mt.n) if mt.is_op(i)}
    weights = build_weights(mt, threshold)

    per_error: dict[int, ErrorCheck] = {}
    asrep_all = almost_sure_reach(chain, op_states)
    for e in mt.errors():
        if e not in chain.index:
            continue  # unreachable under this scheduler; nothing to check
        op_e = set(mt.op_copies_of(e))
        q = until_probability(chain, triples, op_e)
        res = sum((p * q[chain.states[t]]
                   for t, p in chain.rows[chain.index[e]].items()), Fraction(0))
        per_error[e] = ErrorCheck(res, res >= threshold, asrep_all[e])

    avail = long_run_value(chain, mt.payoff)
    mp = mp_values(chain, {e: weights[e] for e in per_error})
    return VerificationReport(per_error, avail, mp)


def expected_total_reward(host, scheduler: MrScheduler, start: int) -> Fraction:
    """Expected accumulated reward before absorption in the goal state.

    ``host`` must expose ``actions``, ``reward`` and ``goal_index``. Raises if
    the goal is not reached almost surely from ``start``.
    """
    chain = induce_chain(host, scheduler, start)
    goal = host.goal_index
    sure = almost_sure_reach(chain, {goal})
    if not sure[start]:
        raise ValueError("goal not reached almost surely; total reward diverges")
    non_goal = [i for i in range(chain.n) if chain.states[i] != goal]
    col = {i: k for k, i in enumerate(non_goal)}
    rows_mat, rhs = [], []
    for i in non_goal:
        row = [Fraction(0)] * len(non_goal)
        row[col[i]] = Fraction(1)
        for t, p in chain.rows[i].items():
            if t in col:
                row[col[t]] -= p
        rows_mat.append(row)
        rhs.append(Fraction(host.reward(chain.states[i])))
    sol = solve_linear_system(rows_mat, rhs) if non_goal else []
    if chain.states[0] == goal:
        return Fraction(0)
    return sol[col[0]]


@dataclass
class BruteForceResult:
    best_availability: Fraction | None
    witness: MrScheduler | None
    candidates: int


def brute_force_optimum(mt: TransformedMdp, threshold: Fraction,
                        grid_denominator: int = 1,
                        max_states: int = 14,
                        max_choice_states: int = 4) -> BruteForceResult:
    """Independent oracle: enumerate memoryless schedulers on the transformed MDP.

    All deterministic choices are covered; at states with two actions, the
    first action additionally ranges over probabilities k/grid_denominator.
    Only small instances are accepted, the enumeration is exponential.
    """
    if mt.n > max_states:
        raise ValueError(f"oracle limited to {max_states} states, got {mt.n}")
    choice_states = [i for i in range(mt.n) if len(mt.actions[i]) > 1]
    if len(choice_states) > max_choice_states:
        raise ValueError("oracle limited to few nondeterministic states")
    if any(len(mt.actions[i]) > 2 for i in choice_states):
        raise ValueError("oracle limited to two actions per state")

    base = {i: {mt.enabled(i)[0]: Fraction(1)} for i in range(mt.n) if i not in choice_states}
    options: list[list[dict[str, Fraction]]] = []
    for i in choice_states:
        a, b = mt.enabled(i)
        probs = sorted({Fraction(k, grid_denominator) for k in range(grid_denominator + 1)})
        options.append([{a: p, b: 1 - p} for p in probs])

    best: Fraction | None = None
    witness = None
    count = 0
    stack = [(0, dict(base))]
    while stack:
        k, partial = stack.pop()
        if k < len(choice_states):
            for choice in reversed(options[k]):
                nxt = dict(partial)
                nxt[choice_states[k]] = choice
                stack.append((k + 1, nxt))
            continue
        count += 1
        report = verify_resilient(mt, MrScheduler(partial), threshold)
        if report.ok and (best is None or report.availability > best):
            best = report.availability
            witness = MrScheduler(partial)
    return BruteForceResult(best, witness, count)


@dataclass
class SimulationStats:
    trials: int
    steps: int
    mean_payoff_per_step: Fraction | None
    repair_episodes: int
    episodes_within_budget: int
    traces: list[list[str]] | None

    @property
    def budget_fraction(self) -> Fraction | None:
        if self.repair_episodes == 0:
            return None
        return Fraction(self.episodes_within_budget, self.repair_episodes)

    def render(self) -> str:
        if self.trials == 0:
            return "no trials"
        lines = [
            f"trials: {self.trials}, steps per trial: {self.steps}",
            f"mean payoff per step: {self.mean_payoff_per_step} "
            f"(~{float(self.mean_payoff_per_step):.6g})",
            f"repair episodes: {self.repair_episodes}, "
            f"completed within budget: {self.episodes_within_budget}"
            + (f" (fraction {float(self.budget_fraction):.6g})"
               if self.repair_episodes else ""),
        ]
        return "\n".join(lines)


def simulate(m, policy, steps: int, trials: int, seed: int,
             cost_bound: int, keep_traces: bool = False) -> SimulationStats:
    """Seeded, reproducible trials of a finite-memory policy on the base MDP.

    Trial i draws from a stream derived from (seed, i), so results do not
    depend on execution order. ``policy`` must provide ``initial_memory``,
    ``decide(state, memory) -> {action: prob}`` and
    ``update(state, memory, action, next_state) -> memory``.
    """
    total_payoff = Fraction(0)
    episodes = 0
    within = 0
    traces: list[list[str]] | None = [] if keep_traces else None
    for trial in range(trials):
        rng = random.Random(f"{seed}:{trial}")
        s = m.initial
        mem = policy.initial_memory
        episode_cost = None
        trace = [m.ids[s]] if keep_traces else None
        for _ in range(steps):
            total_payoff += m.payoff(s)
            if m.kinds[s] == ERROR and episode_cost is None:
                episode_cost = 0
            if episode_cost is not None:
                episode_cost += m.cost(s)
                if m.kinds[s] == "op":
                    episodes += 1
                    if episode_cost <= cost_bound:
                        within += 1
                    episode_cost = None
            act = _sample(rng, policy.decide(s, mem))
            nxt = _sample(rng, {t: p for t, p in m.actions[s][act]})
            mem = policy.update(s, mem, act, nxt)
            if keep_traces:
                trace.extend([act, m.ids[nxt]])
            s = nxt
        if keep_traces:
            traces.append(trace)
    mean = total_payoff / (trials * steps) if trials and steps else None
    return SimulationStats(trials, steps, mean, episodes, within, traces)


def _sample(rng: random.Random, dist: dict):
    u = Fraction(rng.getrandbits(64), 2 ** 64)
    acc = Fraction(0)
    items = sorted(dist.items(), key=lambda kv: str(kv[0]))
    for key, p in items:
        acc += Fraction(p)
        if u < acc:
            return key
    return items[-1][0]
