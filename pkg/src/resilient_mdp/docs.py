"""Document formats for models and schedulers.

Both are JSON with a fixed key order, so serialized artifacts are stable and
diff-friendly. Probabilities and thresholds are written as exact fraction
strings ("4/5"); on input, "a/b" fractions and terminating decimals are both
accepted and converted exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .model import MdpWithRepair, make_mdp
from .sched import MrScheduler
from .synth import ComposedScheduler
from .transform import TransformedMdp

MODEL_FORMAT = "mdp-with-repair"
SCHEDULER_FORMAT = "resilient-scheduler"
FORMAT_VERSION = 1


class DocumentError(ValueError):
    """The file is not a well-formed document of the expected format."""


def parse_fraction(text) -> Fraction:
    """Exact rational from an "a/b" string or a terminating decimal string."""
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise DocumentError(f"not a fraction or decimal: {text!r} ({exc})") from exc


def _require(data: dict, key: str, where: str):
    if not isinstance(data, dict) or key not in data:
        raise DocumentError(f"missing key {key!r} in {where}")
    return data[key]


def parse_model(data) -> MdpWithRepair:
    if _require(data, "format", "model document") != MODEL_FORMAT:
        raise DocumentError(f"expected format {MODEL_FORMAT!r}")
    states = []
    for entry in _require(data, "states", "model document"):
        reward = _require(entry, "reward", "state entry")
        if not isinstance(reward, int) or isinstance(reward, bool):
            raise DocumentError(f"reward must be an integer, got {reward!r}")
        states.append((str(_require(entry, "id", "state entry")),
                       str(_require(entry, "kind", "state entry")), reward))
    transitions = []
    for entry in _require(data, "transitions", "model document"):
        dist = [(str(_require(t, "target", "transition target")),
                 parse_fraction(_require(t, "prob", "transition target")))
                for t in _require(entry, "to", "transition entry")]
        transitions.append((str(_require(entry, "from", "transition entry")),
                            str(_require(entry, "action", "transition entry")), dist))
    try:
        return make_mdp(states, transitions, str(_require(data, "initial", "model document")))
    except ValueError as exc:
        raise DocumentError(str(exc)) from exc


def model_to_data(m: MdpWithRepair) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": FORMAT_VERSION,
        "initial": m.ids[m.initial],
        "states": [{"id": m.ids[i], "kind": m.kinds[i], "reward": m.rewards[i]}
                   for i in range(m.n)],
        "transitions": [
            {"from": m.ids[i], "action": a,
             "to": [{"target": m.ids[t], "prob": str(p)} for t, p in m.actions[i][a]]}
            for i in range(m.n) for a in m.enabled(i)
        ],
    }


def serialize_model(m: MdpWithRepair) -> str:
    return json.dumps(model_to_data(m), indent=2, ensure_ascii=False) + "\n"


def load_model(path: str) -> MdpWithRepair:
    return parse_model(_load_json(path))


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path} is not valid JSON: {exc}") from exc


def _dist_to_data(dist: dict[str, Fraction]) -> dict[str, str]:
    return {a: str(p) for a, p in sorted(dist.items())}


def _dist_from_data(data, where: str) -> dict[str, Fraction]:
    if not isinstance(data, dict):
        raise DocumentError(f"expected an action distribution in {where}")
    return {str(a): parse_fraction(p) for a, p in data.items()}


@dataclass
class SchedulerDocument:
    """Parsed scheduler artifact: decisions are keyed by transformed-state id."""

    threshold: Fraction
    cost_bound: int
    availability: Fraction | None
    transient: dict[str, dict[str, Fraction]]
    components: list[dict]  # {"states": [ids], "choice": {id: dist}, "availability": Fraction}
    memory_rules: list[dict] = field(default_factory=list)

    def to_mr(self, mt: TransformedMdp) -> MrScheduler:
        """Decisions as a memoryless scheduler on a transformed MDP.

        Entries for states absent from this particular reachable fragment are
        dropped; missing reachable states surface later as domain errors.
        """
        choices: dict[int, dict[str, Fraction]] = {}
        parts = [self.transient] + [comp["choice"] for comp in self.components]
        for part in parts:
            for sid, dist in part.items():
                if sid in mt.index:
                    choices[mt.index[sid]] = dict(dist)
        try:
            return MrScheduler(choices)
        except ValueError as exc:
            raise DocumentError(str(exc)) from exc


def parse_scheduler(data) -> SchedulerDocument:
    if _require(data, "format", "scheduler document") != SCHEDULER_FORMAT:
        raise DocumentError(f"expected format {SCHEDULER_FORMAT!r}")
    cost_bound = _require(data, "costBound", "scheduler document")
    if not isinstance(cost_bound, int) or isinstance(cost_bound, bool) or cost_bound < 0:
        raise DocumentError(f"costBound must be a nonnegative integer, got {cost_bound!r}")
    transient = {str(e["state"]): _dist_from_data(e.get("choice"), "transient rule")
                 for e in _require(data, "transient", "scheduler document")}
    components = []
    for entry in data.get("components", []):
        components.append({
            "states": [str(s) for s in _require(entry, "states", "component entry")],
            "choice": {str(e["state"]): _dist_from_data(e.get("choice"), "component rule")
                       for e in _require(entry, "choice", "component entry")},
            "availability": parse_fraction(_require(entry, "availability", "component entry")),
        })
    avail = data.get("availability")
    return SchedulerDocument(
        threshold=parse_fraction(_require(data, "threshold", "scheduler document")),
        cost_bound=cost_bound,
        availability=None if avail is None else parse_fraction(avail),
        transient=transient,
        components=components,
        memory_rules=list(data.get("memory", {}).get("rules", [])),
    )


def scheduler_to_data(composed: ComposedScheduler, threshold: Fraction,
                      availability: Fraction | None) -> dict:
    mt = composed.mt
    m = mt.base
    mr = composed.as_mr()
    rules = []
    for i in range(mt.n):
        t = mt.triple[i]
        if t is not None:
            memory = {"error": m.ids[t[0]], "cost": t[2]}
        elif mt.pending[i]:
            memory = "pending"
        else:
            memory = None
        rules.append({"state": m.ids[mt.back[i]], "memory": memory,
                      "choice": _dist_to_data(mr.dist(i))})
    return {
        "format": SCHEDULER_FORMAT,
        "version": FORMAT_VERSION,
        "threshold": str(Fraction(threshold)),
        "costBound": mt.cost_bound,
        "availability": None if availability is None else str(availability),
        "transient": [{"state": mt.ids[s], "choice": _dist_to_data(dist)}
                      for s, dist in sorted(composed.transient.choices.items())],
        "components": [
            {"states": [mt.ids[s] for s in comp.states],
             "choice": [{"state": mt.ids[s],
                         "choice": _dist_to_data(comp.scheduler.dist(s))}
                        for s in comp.states],
             "availability": str(comp.avail)}
            for comp in composed.components
        ],
        # Finite-memory rendering on the base model. Memory semantics:
        # entering error e sets (e, cost(e)); leaving a non-operational state
        # s adds cost(s); exceeding the cost bound switches to "pending";
        # entering an operational state clears the memory.
        "memory": {"initial": None, "rules": rules},
    }


def serialize_scheduler(composed: ComposedScheduler, threshold: Fraction,
                        availability: Fraction | None) -> str:
    return json.dumps(scheduler_to_data(composed, threshold, availability),
                      indent=2, ensure_ascii=False) + "\n"


def load_scheduler(path: str) -> SchedulerDocument:
    return parse_scheduler(_load_json(path))
