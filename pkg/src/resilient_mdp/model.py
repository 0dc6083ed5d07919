"""MDPs with repair: states split into operational, error and repair states.

Probabilities are exact rationals (``fractions.Fraction``), rewards are
nonnegative integers. The reward of an operational state is its payoff; the
reward of any other state is its repair cost. Models are immutable after
construction and validated separately, so a freshly parsed model can be
inspected even when it is broken.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

OPERATIONAL = "op"
ERROR = "err"
REPAIR = "rep"

STATE_KINDS = (OPERATIONAL, ERROR, REPAIR)


@dataclass(frozen=True)
class Violation:
    rule: str
    where: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def render(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(f"[{v.rule}] {v.where}: {v.message}" for v in self.violations)


@dataclass(frozen=True)
class MdpWithRepair:
    """States are indexed densely in input order; ids are arbitrary strings.

    ``actions[i]`` maps an action id to the successor distribution of state i,
    a list of (state index, probability) pairs.
    """

    ids: tuple[str, ...]
    kinds: tuple[str, ...]
    rewards: tuple[int, ...]
    actions: tuple[dict[str, list[tuple[int, Fraction]]], ...]
    initial: int
    index: dict[str, int] = field(repr=False, default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "index", {s: i for i, s in enumerate(self.ids)})

    @property
    def n(self) -> int:
        return len(self.ids)

    def payoff(self, i: int) -> int:
        return self.rewards[i] if self.kinds[i] == OPERATIONAL else 0

    def cost(self, i: int) -> int:
        return self.rewards[i] if self.kinds[i] != OPERATIONAL else 0

    def enabled(self, i: int) -> list[str]:
        return sorted(self.actions[i])


def make_mdp(states, transitions, initial) -> MdpWithRepair:
    """Build a model from plain data.

    ``states``: iterable of (id, kind, reward). ``transitions``: iterable of
    (from_id, action_id, [(to_id, prob), ...]). Unknown state references are
    kept as-is and reported by validate_structure, except that the state list
    itself must be well formed enough to index.
    """
    ids, kinds, rewards = [], [], []
    for sid, kind, reward in states:
        ids.append(str(sid))
        kinds.append(kind)
        rewards.append(reward)
    index = {s: i for i, s in enumerate(ids)}
    if len(index) != len(ids):
        raise ValueError("duplicate state ids")
    actions: list[dict[str, list[tuple[int, Fraction]]]] = [{} for _ in ids]
    dangling: list[tuple[str, str, str]] = []
    for frm, act, dist in transitions:
        if frm not in index:
            dangling.append((str(frm), str(act), "source"))
            continue
        entries = []
        for to, prob in dist:
            if to not in index:
                dangling.append((str(frm), str(act), f"target {to}"))
                continue
            entries.append((index[to], Fraction(prob)))
        actions[index[frm]][str(act)] = entries
    if initial not in index:
        raise ValueError(f"unknown initial state {initial!r}")
    m = MdpWithRepair(tuple(ids), tuple(kinds), tuple(rewards),
                      tuple(actions), index[initial])
    object.__setattr__(m, "_dangling", tuple(dangling))
    return m


def validate_structure(m: MdpWithRepair) -> ValidationReport:
    """Check distributions, trap states, rewards and kind tags."""
    out: list[Violation] = []
    for frm, act, what in getattr(m, "_dangling", ()):
        out.append(Violation("dangling-reference", f"{frm}/{act}",
                             f"transition references unknown {what}"))
    for i, sid in enumerate(m.ids):
        if "#" in sid:
            # '#' is reserved for the ids of cost-annotated repair copies.
            out.append(Violation("bad-id", sid, "state ids must not contain '#'"))
        if "τ" in m.actions[i]:
            out.append(Violation("bad-id", sid, "action id 'τ' is reserved"))
        if m.kinds[i] not in STATE_KINDS:
            out.append(Violation("bad-kind", sid, f"unknown state kind {m.kinds[i]!r}"))
        if not isinstance(m.rewards[i], int) or m.rewards[i] < 0:
            out.append(Violation("bad-reward", sid,
                                 f"reward must be a nonnegative integer, got {m.rewards[i]!r}"))
        if not m.actions[i]:
            out.append(Violation("trap-state", sid, "state has no enabled action"))
        for act in m.enabled(i):
            dist = m.actions[i][act]
            total = sum((p for _, p in dist), Fraction(0))
            if total != 1:
                out.append(Violation("bad-distribution", f"{sid}/{act}",
                                     f"distribution sums to {total}"))
            if any(p <= 0 for _, p in dist):
                out.append(Violation("bad-distribution", f"{sid}/{act}",
                                     "nonpositive transition probability"))
    return ValidationReport(tuple(out))


def validate_repair_assumption(m: MdpWithRepair) -> ValidationReport:
    """Check that no new error can occur before a successful repair.

    The violating set V is the least fixpoint of
    V = Err  U  { s not in Op u Err : some action of s reaches V }.
    Any positive-probability transition from an error into V is a violation:
    from that successor, some path hits Err before Op.
    """
    bad = [m.kinds[i] == ERROR for i in range(m.n)]
    changed = True
    while changed:
        changed = False
        for i in range(m.n):
            if bad[i] or m.kinds[i] in (OPERATIONAL, ERROR):
                continue
            if any(bad[t] for act in m.actions[i] for t, _ in m.actions[i][act]):
                bad[i] = True
                changed = True
    out = []
    for e in range(m.n):
        if m.kinds[e] != ERROR:
            continue
        for act in m.enabled(e):
            for t, p in m.actions[e][act]:
                if p > 0 and bad[t]:
                    out.append(Violation(
                        "repair-assumption", f"{m.ids[e]}/{act}",
                        f"successor {m.ids[t]} can reach an error before an operational state"))
    return ValidationReport(tuple(out))
