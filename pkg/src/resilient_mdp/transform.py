"""Cost-tracking transformation of an MDP with repair.

The transformed MDP adds repair copies <e, s, r>: the system is in base
state s, repairing the error e, with cost r accumulated since e was entered.
Once the budget R would be exceeded the exact cost is no longer tracked, but
the repair is still pending, so non-operational states are entered through
pending copies until the next operational state; reaching an operational
state always drops back to the base states. Base non-operational states are
therefore only visited with no repair underway. Only the fragment reachable
from the initial state is materialized.

Repair copies are rendered as "e#s#r" in state ids, pending copies as
"s#pending".
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .model import ERROR, OPERATIONAL, REPAIR, MdpWithRepair


@dataclass(frozen=True)
class TransformedMdp:
    base: MdpWithRepair
    cost_bound: int
    ids: tuple[str, ...]
    kinds: tuple[str, ...]          # op/err/rep, repair copies are op or rep
    actions: tuple[dict[str, list[tuple[int, Fraction]]], ...]
    back: tuple[int, ...]           # state -> base state index
    triple: tuple[tuple[int, int, int] | None, ...]  # (e, s, r) for repair copies
    pending: tuple[bool, ...]       # post-overrun copies with a repair unfinished
    initial: int
    index: dict[str, int] = field(repr=False, default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "index", {s: i for i, s in enumerate(self.ids)})

    @property
    def n(self) -> int:
        return len(self.ids)

    def payoff(self, i: int) -> int:
        return self.base.payoff(self.back[i])

    def cost(self, i: int) -> int:
        return self.base.cost(self.back[i])

    def is_op(self, i: int) -> bool:
        return self.kinds[i] == OPERATIONAL

    def enabled(self, i: int) -> list[str]:
        return sorted(self.actions[i])

    def errors(self) -> list[int]:
        return [i for i in range(self.n) if self.kinds[i] == ERROR]

    def op_copies_of(self, e: int) -> list[int]:
        """Repair copies <e, s, r> with s operational (the Op_e set)."""
        base_e = self.back[e]
        return [i for i, t in enumerate(self.triple)
                if t is not None and t[0] == base_e and self.base.kinds[t[1]] == OPERATIONAL]


def _triple_id(m: MdpWithRepair, e: int, s: int, r: int) -> str:
    return f"{m.ids[e]}#{m.ids[s]}#{r}"


def _pending_successor(m: MdpWithRepair, target: int):
    """Past the budget the repair is still unfinished: non-operational
    successors stay pending, operational ones complete the repair."""
    if m.kinds[target] == OPERATIONAL or m.kinds[target] == ERROR:
        return target
    return ("!", target)


def _successor_key(m: MdpWithRepair, bound: int, src, target: int):
    """Transformed successor of ``src`` when the base move lands in ``target``.

    Keys are a base index, an (e, s, r) triple, or ("!", s) for a pending
    copy of the non-operational base state s."""
    if isinstance(src, tuple) and src[0] == "!":
        return _pending_successor(m, target)
    if isinstance(src, tuple):
        e, s, r = src
        if m.kinds[s] == OPERATIONAL:
            return target  # repair completed at s
        if r + m.cost(s) <= bound:
            return (e, target, r + m.cost(s))
        return _pending_successor(m, target)
    if m.kinds[src] == ERROR:
        if m.cost(src) <= bound:
            return (src, target, m.cost(src))
        # Budget already blown by the error itself; pending from the start.
        return _pending_successor(m, target)
    return target


def transform(m: MdpWithRepair, cost_bound: int) -> TransformedMdp:
    """Build the reachable fragment of the cost-annotated MDP."""
    if cost_bound < 0:
        raise ValueError("cost bound must be nonnegative")
    keys = [m.initial]
    index: dict = {m.initial: 0}
    queue = deque([m.initial])
    out_actions: list[dict[str, list[tuple[int, Fraction]]]] = []
    while queue:
        key = queue.popleft()
        base = key[1] if isinstance(key, tuple) else key
        acts: dict[str, list[tuple[int, Fraction]]] = {}
        for act in m.enabled(base):
            dist = []
            for target, prob in m.actions[base][act]:
                succ = _successor_key(m, cost_bound, key, target)
                if succ not in index:
                    index[succ] = len(keys)
                    keys.append(succ)
                    queue.append(succ)
                dist.append((index[succ], prob))
            acts[act] = dist
        out_actions.append(acts)

    ids, kinds, back, triples, pending = [], [], [], [], []
    for key in keys:
        if isinstance(key, tuple) and key[0] == "!":
            s = key[1]
            ids.append(f"{m.ids[s]}#pending")
            kinds.append(REPAIR)
            back.append(s)
            triples.append(None)
            pending.append(True)
        elif isinstance(key, tuple):
            e, s, r = key
            ids.append(_triple_id(m, e, s, r))
            kinds.append(OPERATIONAL if m.kinds[s] == OPERATIONAL else REPAIR)
            back.append(s)
            triples.append(key)
            pending.append(False)
        else:
            ids.append(m.ids[key])
            kinds.append(m.kinds[key])
            back.append(key)
            triples.append(None)
            pending.append(False)
    return TransformedMdp(m, cost_bound, tuple(ids), tuple(kinds),
                          tuple(out_actions), tuple(back), tuple(triples),
                          tuple(pending), 0)


@dataclass(frozen=True)
class PathRecord:
    """Alternating state/action id sequence: s0 a0 s1 a1 ... sn."""
    steps: tuple[str, ...]

    def states(self) -> list[str]:
        return list(self.steps[0::2])

    def actions(self) -> list[str]:
        return list(self.steps[1::2])


class InvalidPathError(ValueError):
    pass


def _check_path(ids_index, actions, p: PathRecord) -> None:
    if len(p.steps) % 2 == 0 or not p.steps:
        raise InvalidPathError("path must be s0 a0 s1 ... sn")
    for k in range(0, len(p.steps) - 1, 2):
        s, a, t = p.steps[k], p.steps[k + 1], p.steps[k + 2]
        if s not in ids_index or t not in ids_index:
            raise InvalidPathError(f"unknown state in path: {s} or {t}")
        dist = actions[ids_index[s]].get(a)
        if dist is None:
            raise InvalidPathError(f"action {a} not enabled in {s}")
        if not any(j == ids_index[t] and prob > 0 for j, prob in dist):
            raise InvalidPathError(f"no transition {s} -{a}-> {t}")


def path_cost(mt_or_m, p: PathRecord) -> int:
    return sum(mt_or_m.cost(mt_or_m.index[s]) for s in p.states())


def path_payoff(mt_or_m, p: PathRecord) -> int:
    return sum(mt_or_m.payoff(mt_or_m.index[s]) for s in p.states())


def project_path(mt: TransformedMdp, p: PathRecord) -> PathRecord:
    """Replace each repair copy by its base state; the result is a base path."""
    _check_path(mt.index, mt.actions, p)
    m = mt.base
    out = []
    for k, step in enumerate(p.steps):
        if k % 2:
            out.append(step)
        else:
            out.append(m.ids[mt.back[mt.index[step]]])
    projected = PathRecord(tuple(out))
    _check_path(m.index, m.actions, projected)
    return projected


def lift_path(mt: TransformedMdp, p: PathRecord) -> PathRecord:
    """Lift a base path starting in the initial state into the transformed MDP."""
    m = mt.base
    _check_path(m.index, m.actions, p)
    states = p.states()
    if m.index[states[0]] != m.initial:
        raise InvalidPathError("lifted paths must start in the initial state")
    key = m.initial
    out = [mt.ids[0]]
    acts = p.actions()
    for a, nxt in zip(acts, states[1:]):
        key = _successor_key(m, mt.cost_bound, key, m.index[nxt])
        out.append(a)
        if isinstance(key, tuple) and key[0] == "!":
            out.append(f"{m.ids[key[1]]}#pending")
        elif isinstance(key, tuple):
            out.append(_triple_id(m, *key))
        else:
            out.append(m.ids[key])
    lifted = PathRecord(tuple(out))
    _check_path(mt.index, mt.actions, lifted)
    return lifted
