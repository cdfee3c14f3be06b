"""Event probabilities, discrimination rules, success rates and capacity."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .circuit import Circuit
from .evolution import TwoPhotonAmplitudeMap, amplitude_maps
from .states import BELL_STATES, BellState

ZERO_PROB = 1e-12

Event = tuple[int, int]


@dataclass(frozen=True)
class EventProbabilityMap:
    scheme: str
    state: BellState
    probs: dict[Event, float]

    def __post_init__(self):
        if any(p < 0 for p in self.probs.values()):
            raise ValueError("negative probability")
        total = sum(self.probs.values())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total!r}")

    def __getitem__(self, key: Event) -> float:
        return self.probs.get(key, 0.0)

    def support(self) -> frozenset[Event]:
        return frozenset(k for k, p in self.probs.items() if p > ZERO_PROB)


def event_probabilities(m: TwoPhotonAmplitudeMap) -> EventProbabilityMap:
    probs = {}
    for (i, j), amp in sorted(m.entries.items()):
        probs[(i, j)] = (2.0 if i == j else 1.0) * abs(amp) ** 2
    return EventProbabilityMap(m.scheme, m.state, probs)


def scheme_probabilities(c: Circuit) -> dict[BellState, EventProbabilityMap]:
    return {s: event_probabilities(m) for s, m in amplitude_maps(c).items()}


@dataclass(frozen=True)
class RuleSet:
    """Conclusive events per state plus the optional elimination rule.

    ``support`` keeps every positive-probability event per state; capacity and
    the Monte Carlo classifier need it.  ``indistinguishable`` lists the states
    without unique events when they are too many for elimination.
    """

    scheme: str
    unique_events: dict[BellState, frozenset[Event]]
    elimination_target: Optional[BellState]
    evidence_events: frozenset[Event]
    support: dict[BellState, frozenset[Event]] = field(default_factory=dict)
    indistinguishable: tuple[BellState, ...] = ()

    def __post_init__(self):
        seen: dict[Event, BellState] = {}
        for state, events in self.unique_events.items():
            for ev in events:
                if ev in seen and seen[ev] is not state:
                    raise ValueError(f"event {ev} unique for both {seen[ev].value} and {state.value}")
                seen[ev] = state
        if self.elimination_target is not None and self.unique_events.get(self.elimination_target):
            raise ValueError("elimination target cannot own unique events")

    def owner(self, event: Event) -> Optional[BellState]:
        for state, events in self.unique_events.items():
            if event in events:
                return state
        return None

    def to_dict(self) -> dict:
        def ev(events):
            return [list(e) for e in sorted(events)]
        return {
            "scheme": self.scheme,
            "unique_events": {s.value: ev(self.unique_events.get(s, ())) for s in BELL_STATES},
            "elimination_target": self.elimination_target.value if self.elimination_target else None,
            "evidence_events": ev(self.evidence_events),
            "indistinguishable": [s.value for s in self.indistinguishable],
        }


def derive_rules(maps: Mapping[BellState, EventProbabilityMap]) -> RuleSet:
    schemes = {m.scheme for m in maps.values()}
    if len(schemes) != 1 or set(maps) != set(BELL_STATES):
        raise ValueError("need the four Bell-state maps of a single scheme")
    support = {s: maps[s].support() for s in BELL_STATES}
    unique = {}
    for s in BELL_STATES:
        others = set().union(*(support[o] for o in BELL_STATES if o is not s))
        unique[s] = frozenset(e for e in support[s] if e not in others)
    empty = tuple(s for s in BELL_STATES if not unique[s])
    target, evidence, flagged = None, frozenset(), ()
    if len(empty) == 1:
        target = empty[0]
        evidence = support[target]
    elif all(support[s] for s in empty) and len(empty) > 1:
        flagged = empty
    return RuleSet(schemes.pop(), unique, target, evidence, support, flagged)


def single_pair_success(rules: RuleSet, maps: Mapping[BellState, EventProbabilityMap]) -> dict[BellState, float]:
    return {s: float(sum(maps[s][e] for e in rules.unique_events[s])) for s in BELL_STATES}


def multi_pair_success(s1: Mapping[BellState, float], rules: RuleSet, n: int) -> dict[BellState, float]:
    """Success rate after ``n`` pairs.

    Unique-event states follow ``1 - (1 - S1)**n``.  An elimination target gets
    the complement of the other states' misses; without one, zero-unique states
    stay at S1.
    """
    if n < 1:
        raise ValueError("N must be at least 1")
    out = {}
    for s in BELL_STATES:
        if rules.unique_events[s]:
            out[s] = 1.0 - (1.0 - s1[s]) ** n
    target = rules.elimination_target
    for s in BELL_STATES:
        if s in out:
            continue
        if s is target:
            out[s] = 1.0 - sum(1.0 - out[o] for o in BELL_STATES if o is not s)
        else:
            out[s] = s1[s]
    # complements of float sums can land a few ulp outside [0, 1]
    return {s: min(1.0, max(0.0, out[s])) for s in BELL_STATES}


class CapacityRegime(enum.Enum):
    SINGLE_PAIR = "single"
    ASYMPTOTIC = "asymptotic"


def distinguishable_classes(rules: RuleSet, regime: CapacityRegime) -> list[frozenset[BellState]]:
    """Partition the Bell states into classes the scheme can tell apart.

    Single pair: states that share any outcome are merged (components of the
    overlap graph).  Asymptotic: every state with unique events becomes its own
    class; the rest form one class, identified by elimination when it is a
    single state.
    """
    if regime is CapacityRegime.SINGLE_PAIR:
        classes: list[set[BellState]] = []
        for s in BELL_STATES:
            joined = [k for k in classes if any(rules.support.get(s, frozenset()) & rules.support.get(o, frozenset())
                                                for o in k)]
            merged = {s}.union(*joined)
            classes = [k for k in classes if k not in joined] + [merged]
        return [frozenset(k) for k in classes]
    unique = [frozenset({s}) for s in BELL_STATES if rules.unique_events[s]]
    rest = frozenset(s for s in BELL_STATES if not rules.unique_events[s])
    return unique + ([rest] if rest else [])


def capacity(rules: RuleSet, regime: CapacityRegime) -> float:
    return math.log2(len(distinguishable_classes(rules, regime)))


def success_curve(rules: RuleSet, s1: Mapping[BellState, float], n_max: int) -> list[tuple[int, dict[BellState, float]]]:
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    return [(n, multi_pair_success(s1, rules, n)) for n in range(1, n_max + 1)]


@dataclass(frozen=True)
class SuccessReport:
    scheme: str
    s1: dict[BellState, float]
    rules: RuleSet
    capacity_bits: float

    def s_n(self, n: int) -> dict[BellState, float]:
        return multi_pair_success(self.s1, self.rules, n)


def analyze(c: Circuit) -> SuccessReport:
    maps = scheme_probabilities(c)
    rules = derive_rules(maps)
    s1 = single_pair_success(rules, maps)
    return SuccessReport(c.name, s1, rules, capacity(rules, CapacityRegime.ASYMPTOTIC))
