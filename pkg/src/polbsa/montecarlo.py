"""Seeded sampling of coincidence events and N-pair classification.

Random numbers come from numpy's PCG64.  Trials are grouped in fixed blocks of
``BLOCK`` consecutive trial indices and each block draws from its own stream
``SeedSequence(seed, spawn_key=(state_index, block_index))``.  Results are
therefore bit-identical for any number of workers.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .analysis import Event, EventProbabilityMap, RuleSet, ZERO_PROB, derive_rules, scheme_probabilities
from .circuit import Circuit
from .states import BELL_STATES, BellState

BLOCK = 8192
RNG_NAME = f"numpy-{np.__version__}/PCG64/SeedSequence(seed,spawn_key=(state,block))/block={BLOCK}"
MAX_SEED = 2**64 - 1

INCONCLUSIVE = "inconclusive"


class EvidencePolicy(enum.Enum):
    """Which of the elimination target's events count as positive evidence.

    ``CROSS`` keeps only two-detector coincidences (i < j): for the
    symmetry-broken scheme these are exactly (1, 2) and (3, 4).  ``ALL`` also
    accepts both photons on one detector.
    """

    CROSS = "cross"
    ALL = "all"


def evidence_set(rules: RuleSet, policy: EvidencePolicy = EvidencePolicy.CROSS) -> frozenset[Event]:
    if policy is EvidencePolicy.ALL:
        return rules.evidence_events
    return frozenset(e for e in rules.evidence_events if e[0] < e[1])


class _Sampler:
    def __init__(self, p: EventProbabilityMap):
        keys = sorted(k for k, v in p.probs.items() if v > ZERO_PROB)
        weights = np.array([p.probs[k] for k in keys])
        self.keys: list[Event] = keys
        self.cdf = np.cumsum(weights / weights.sum())

    def indices(self, u: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.cdf, u, side="right")
        return np.minimum(idx, len(self.keys) - 1)


def sample_event(p: EventProbabilityMap, rng: np.random.Generator) -> Event:
    """Inverse-CDF draw over the lexicographically sorted events of ``p``."""
    s = _Sampler(p)
    return s.keys[int(s.indices(np.array([rng.random()]))[0])]


def sample_events(p: EventProbabilityMap, rng: np.random.Generator, size: int) -> list[Event]:
    s = _Sampler(p)
    return [s.keys[k] for k in s.indices(rng.random(size))]


def classify(events: Sequence[Event], rules: RuleSet,
             policy: EvidencePolicy = EvidencePolicy.CROSS) -> Optional[BellState]:
    """Declared state after a run of pairs, or ``None`` when inconclusive."""
    if not events:
        raise ValueError("classify needs at least one event")
    hits = {rules.owner(tuple(e)) for e in events} - {None}
    if len(hits) > 1:
        raise RuntimeError(f"conflicting unique events for {sorted(s.value for s in hits)}")
    if hits:
        return hits.pop()
    evidence = evidence_set(rules, policy)
    if rules.elimination_target is not None and any(tuple(e) in evidence for e in events):
        return rules.elimination_target
    return None


def _label(x: Optional[BellState]) -> str:
    return INCONCLUSIVE if x is None else x.value


LABELS = tuple(s.value for s in BELL_STATES) + (INCONCLUSIVE,)


@dataclass(frozen=True)
class ConfusionMatrix:
    scheme: str
    n_pairs: int
    trials: int
    seed: int
    rng: str
    policy: EvidencePolicy
    counts: dict[BellState, dict[str, int]]

    def __post_init__(self):
        for row in self.counts.values():
            if sum(row.values()) != self.trials:
                raise ValueError("confusion row does not cover every trial")

    def freq(self, true: BellState, declared: Optional[BellState | str]) -> float:
        label = declared if isinstance(declared, str) else _label(declared)
        return self.counts[true][label] / self.trials

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "N": self.n_pairs,
            "trials": self.trials,
            "seed": self.seed,
            "rng": self.rng,
            "evidence": self.policy.value,
            "rows": {t.value: {lab: self.counts[t][lab] / self.trials for lab in LABELS} for t in self.counts},
            "counts": {t.value: dict(self.counts[t]) for t in self.counts},
        }


def _block_counts(sampler: _Sampler, codes: np.ndarray, evidence: np.ndarray, target: int,
                  seed: int, state_index: int, block: int, size: int, n: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(state_index, block))))
    idx = sampler.indices(rng.random((size, n)))
    owners = codes[idx]
    hit = np.stack([(owners == k).any(axis=1) for k in range(len(BELL_STATES))], axis=1)
    if (hit.sum(axis=1) > 1).any():
        raise RuntimeError("conflicting unique events within one trial")
    declared = np.where(hit.any(axis=1), hit.argmax(axis=1), len(BELL_STATES))
    if target >= 0:
        elim = ~hit.any(axis=1) & evidence[idx].any(axis=1)
        declared = np.where(elim, target, declared)
    return np.bincount(declared, minlength=len(LABELS))


def estimate_confusion(c: Circuit, n: int, trials: int, seed: int, workers: int = 1,
                       policy: EvidencePolicy = EvidencePolicy.CROSS,
                       states: Iterable[BellState] = BELL_STATES,
                       maps: Mapping[BellState, EventProbabilityMap] | None = None) -> ConfusionMatrix:
    if n < 1 or trials < 1:
        raise ValueError("need N >= 1 and trials >= 1")
    if not 0 <= seed <= MAX_SEED:
        raise ValueError("seed must be a 64-bit unsigned integer")
    maps = maps if maps is not None else scheme_probabilities(c)
    rules = derive_rules(maps)
    ev = evidence_set(rules, policy)
    target = BELL_STATES.index(rules.elimination_target) if rules.elimination_target else -1

    jobs = []
    for true in states:
        sampler = _Sampler(maps[true])
        codes = np.array([BELL_STATES.index(o) if (o := rules.owner(k)) else -1 for k in sampler.keys])
        evidence = np.array([k in ev for k in sampler.keys])
        si = BELL_STATES.index(true)
        for block, start in enumerate(range(0, trials, BLOCK)):
            size = min(BLOCK, trials - start)
            jobs.append((true, (sampler, codes, evidence, target, seed, si, block, size, n)))

    def run(job):
        return _block_counts(*job[1])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(j) for j in jobs]

    totals: dict[BellState, np.ndarray] = {}
    for (true, _), counts in zip(jobs, results):
        totals[true] = totals.get(true, np.zeros(len(LABELS), dtype=np.int64)) + counts
    counts = {t: {lab: int(v) for lab, v in zip(LABELS, totals[t])} for t in totals}
    return ConfusionMatrix(c.name, n, trials, seed, RNG_NAME, policy, counts)


def analytic_confusion(maps: Mapping[BellState, EventProbabilityMap], n: int,
                       policy: EvidencePolicy = EvidencePolicy.CROSS) -> dict[BellState, dict[str, float]]:
    """Exact declaration probabilities of :func:`classify` after ``n`` pairs.

    Under a true state only its own unique events can fire, so each pair falls
    in one of three classes: own unique event (mass ``u``), an evidence event
    (mass ``e``), or anything else.
    """
    rules = derive_rules(maps)
    ev = evidence_set(rules, policy)
    target = rules.elimination_target
    out = {}
    for true in BELL_STATES:
        p = maps[true]
        u = sum(p[k] for k in rules.unique_events[true])
        e = sum(p[k] for k in ev if k not in rules.unique_events[true])
        row = {lab: 0.0 for lab in LABELS}
        row[true.value] = 1.0 - (1.0 - u) ** n
        if target is not None:
            row[target.value] += (1.0 - u) ** n - (1.0 - u - e) ** n
        row[INCONCLUSIVE] = 1.0 - sum(v for k, v in row.items() if k != INCONCLUSIVE)
        out[true] = row
    return out
