"""Single-photon propagation, coefficient tables and two-photon amplitudes.

Two-photon amplitudes use the merged product notation: a key ``(i, j)`` with
``i <= j`` stands for ``|D_i>|D_j>`` with the ``(j, i)`` term folded in.  The
detection probability is ``|c_ij|**2`` off the diagonal and ``2 |c_ii|**2`` on
it, because ``|D_i>|D_i>`` has bosonic norm ``sqrt(2)``.

Two independent routes produce these maps:

* :func:`combine_two_photon` works only from the 4 x K coefficient rows.
* :func:`brute_force_two_photon` composes the full-space unitary of the circuit
  and evaluates Fock-state transition amplitudes with matrix permanents.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .circuit import Circuit, Element, ElementKind, SpatialMode, element_matrix, validate
from .states import (
    BELL_STATES,
    SQRT1_2,
    TOL,
    BellState,
    H,
    PhotonMode,
    SinglePhotonState,
    V,
    decompose_bell,
)

# Row index pairs (term 1, term 2) and relative sign per Bell state.  Row order
# is C1 = H@first input, C2 = H@second, C3 = V@first, C4 = V@second.
PAIRING = {
    BellState.PSI_MINUS: ((0, 3), (1, 2), -1.0),
    BellState.PSI_PLUS: ((0, 3), (1, 2), +1.0),
    BellState.PHI_MINUS: ((0, 1), (2, 3), -1.0),
    BellState.PHI_PLUS: ((0, 1), (2, 3), +1.0),
}


class EvolutionError(ValueError):
    pass


def _transitions(e: Element) -> dict[PhotonMode, list[tuple[PhotonMode, complex]]]:
    mat, rows, cols = element_matrix(e)
    out = {}
    for k, col in enumerate(cols):
        out[col] = [(rows[r], complex(mat[r, k])) for r in range(len(rows)) if mat[r, k] != 0]
    return out


def propagate(c: Circuit, amplitudes: Mapping[PhotonMode, complex], stop: int | None = None,
              include_pbs: bool = True) -> dict[PhotonMode, complex]:
    """Push a single-photon amplitude dict through ``elements[:stop]``."""
    elements = c.elements if stop is None else c.elements[:stop]
    state = dict(amplitudes)
    for e in elements:
        if e.kind is ElementKind.POLARIZING_BEAM_SPLITTER and not include_pbs:
            continue
        consumed = set(e.consumed)
        trans = _transitions(e)
        nxt: dict[PhotonMode, complex] = defaultdict(complex)
        for m, a in state.items():
            if m.spatial in consumed:
                for dst, u in trans[m]:
                    nxt[dst] += a * u
            else:
                nxt[m] += a
        state = {m: a for m, a in nxt.items() if abs(a) > TOL}
    return state


def evolve_single(c: Circuit, inp: PhotonMode) -> SinglePhotonState:
    """State of one photon just before the PBS stage, over detector-bound modes."""
    if inp.spatial not in c.input_modes:
        raise EvolutionError(f"{inp.spatial} is not an input mode of circuit {c.name!r}")
    out = propagate(c, {inp: 1.0}, include_pbs=False)
    stray = [m for m in out if m not in c.detector_map]
    if stray:
        raise EvolutionError(f"amplitude reaches unbound modes {[str(m) for m in stray]}")
    return SinglePhotonState(out)


def detector_vector(c: Circuit, state: SinglePhotonState) -> np.ndarray:
    vec = np.zeros(c.n_detectors, dtype=complex)
    for m, a in state:
        vec[c.detector_map[m] - 1] += a
    return vec


def canonical_inputs(c: Circuit) -> tuple[PhotonMode, PhotonMode, PhotonMode, PhotonMode]:
    if len(c.input_modes) != 2:
        raise EvolutionError(f"Bell analysis needs exactly two input modes, circuit has {len(c.input_modes)}")
    first, second = c.input_modes
    return (PhotonMode(first, H), PhotonMode(second, H), PhotonMode(first, V), PhotonMode(second, V))


@dataclass(frozen=True)
class CoefficientTable:
    scheme: str
    rows: np.ndarray
    inputs: tuple[PhotonMode, ...]

    def __post_init__(self):
        rows = self.rows
        if rows.shape[0] != 4:
            raise ValueError("coefficient table needs four rows")
        gram = rows.conj() @ rows.T
        if not np.allclose(gram, np.eye(4), atol=TOL, rtol=0):
            raise ValueError("coefficient rows are not orthonormal")

    @property
    def n_detectors(self) -> int:
        return self.rows.shape[1]

    def coefficient(self, row: int, detector: int) -> complex:
        """1-based lookup: ``coefficient(2, 6)`` is C^2_6."""
        return complex(self.rows[row - 1, detector - 1])

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "inputs": [str(m) for m in self.inputs],
            "detectors": list(range(1, self.n_detectors + 1)),
            "rows": [[{"re": z.real, "im": z.imag} for z in row] for row in self.rows.tolist()],
        }


def coefficient_table(c: Circuit) -> CoefficientTable:
    inputs = canonical_inputs(c)
    rows = np.array([detector_vector(c, evolve_single(c, m)) for m in inputs])
    return CoefficientTable(c.name, rows, inputs)


def _combine_rows(rows: np.ndarray, state: BellState) -> dict[tuple[int, int], complex]:
    """Merged amplitudes ``(i, j)`` (0-based, i <= j) from four coefficient rows."""
    (p, q), (r, s), sign = PAIRING[state]
    cp, cq, cr, cs = rows[p], rows[q], rows[r], rows[s]
    k = rows.shape[1]
    out = {}
    for i in range(k):
        for j in range(i, k):
            if i == j:
                amp = SQRT1_2 * (cp[i] * cq[i] + sign * cr[i] * cs[i])
            else:
                amp = SQRT1_2 * (cp[i] * cq[j] + cp[j] * cq[i]
                                 + sign * (cr[i] * cs[j] + cr[j] * cs[i]))
            if abs(amp) > TOL:
                out[(i, j)] = complex(amp)
    return out


def merged_norm(entries: Mapping[tuple, complex]) -> float:
    return float(sum((2.0 if i == j else 1.0) * abs(a) ** 2 for (i, j), a in entries.items()))


@dataclass(frozen=True)
class TwoPhotonAmplitudeMap:
    scheme: str
    state: BellState
    entries: dict[tuple[int, int], complex]

    def __post_init__(self):
        if any(i > j for i, j in self.entries):
            raise ValueError("merged map keys must satisfy i <= j")
        if abs(merged_norm(self.entries) - 1.0) > TOL:
            raise ValueError(f"amplitude map is not normalized ({merged_norm(self.entries)!r})")

    def __getitem__(self, key: tuple[int, int]) -> complex:
        i, j = key
        return self.entries.get((min(i, j), max(i, j)), 0j)

    def keys(self) -> list[tuple[int, int]]:
        return sorted(self.entries)

    def isclose(self, other: "TwoPhotonAmplitudeMap", tol: float = TOL) -> bool:
        keys = set(self.entries) | set(other.entries)
        return all(abs(self[k] - other[k]) <= tol for k in keys)

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "state": self.state.value,
            "entries": {f"({i},{j})": {"re": self.entries[(i, j)].real, "im": self.entries[(i, j)].imag}
                        for i, j in self.keys()},
        }


def combine_two_photon(t: CoefficientTable, state: BellState) -> TwoPhotonAmplitudeMap:
    merged = _combine_rows(t.rows, state)
    return TwoPhotonAmplitudeMap(t.scheme, state, {(i + 1, j + 1): a for (i, j), a in merged.items()})


def amplitude_maps(c: Circuit) -> dict[BellState, TwoPhotonAmplitudeMap]:
    t = coefficient_table(c)
    return {s: combine_two_photon(t, s) for s in BELL_STATES}


@dataclass(frozen=True)
class TapState:
    tap: str
    state: BellState
    entries: dict[tuple[PhotonMode, PhotonMode], complex]

    def __getitem__(self, key: tuple[PhotonMode | str, PhotonMode | str]) -> complex:
        x, y = (PhotonMode.parse(k) if isinstance(k, str) else k for k in key)
        if y < x:
            x, y = y, x
        return self.entries.get((x, y), 0j)

    def norm(self) -> float:
        return merged_norm({(x, y): a for (x, y), a in self.entries.items()})

    def to_dict(self) -> dict:
        return {
            "tap": self.tap,
            "state": self.state.value,
            "entries": [{"modes": [str(x), str(y)], "re": a.real, "im": a.imag}
                        for (x, y), a in self.entries.items()],
        }


def evolve_to_tap(c: Circuit, state: BellState, tap: str) -> TapState:
    """Two-photon state right after the element a tap names."""
    stop = c.tap_index(tap) + 1
    singles = [propagate(c, {m: 1.0}, stop=stop) for m in canonical_inputs(c)]
    modes = sorted({m for s in singles for m in s}, key=PhotonMode.sort_key)
    index = {m: k for k, m in enumerate(modes)}
    rows = np.zeros((4, len(modes)), dtype=complex)
    for r, s in enumerate(singles):
        for m, a in s.items():
            rows[r, index[m]] = a
    merged = _combine_rows(rows, state)
    entries = {(modes[i], modes[j]): a for (i, j), a in sorted(merged.items())}
    return TapState(tap, state, entries)


# --- brute-force oracle -----------------------------------------------------

def permanent(m: np.ndarray) -> complex:
    n = m.shape[0]
    if n == 0:
        return 1.0 + 0j
    return complex(sum(np.prod([m[i, p[i]] for i in range(n)]) for p in itertools.permutations(range(n))))


def _full_space(c: Circuit) -> tuple[list[PhotonMode], list[tuple[Element, dict[SpatialMode, SpatialMode]]]]:
    spatial: list[SpatialMode] = list(c.input_modes)
    plan = []
    for idx, e in enumerate(c.elements):
        rename = {}
        for m in e.inputs:
            if m is None:
                ghost = SpatialMode(f"vac#{idx}")
                rename[SpatialMode("vac")] = ghost
                spatial.append(ghost)
            elif m not in spatial:
                spatial.append(m)
        spatial.extend(m for m in e.outputs if m not in spatial)
        plan.append((e, rename))
    modes = [PhotonMode(s, p) for s in spatial for p in (H, V)]
    return modes, plan


def circuit_unitary(c: Circuit) -> tuple[np.ndarray, list[PhotonMode]]:
    """Unitary of the whole circuit over every photon mode it touches.

    Each element acts as ``[[0, M^dagger], [M, 0]]`` on (inputs, outputs) and as
    the identity elsewhere; the output block is always empty when the element
    fires, so only ``M`` matters physically, but the embedding stays unitary.
    """
    modes, plan = _full_space(c)
    index = {m: k for k, m in enumerate(modes)}
    n = len(modes)
    total = np.eye(n, dtype=complex)
    for e, rename in plan:
        mat, rows, cols = element_matrix(e)
        ri = [index[m] for m in rows]
        ci = [index[PhotonMode(rename.get(m.spatial, m.spatial), m.pol)] for m in cols]
        step = np.eye(n, dtype=complex)
        touched = ri + ci
        step[np.ix_(touched, touched)] = 0.0
        step[np.ix_(ri, ci)] = mat
        step[np.ix_(ci, ri)] = mat.conj().T
        total = step @ total
    return total, modes


def _terminal_detectors(c: Circuit) -> dict[PhotonMode, int]:
    out = {}
    for e in c.elements:
        if e.kind is ElementKind.POLARIZING_BEAM_SPLITTER:
            t, r = e.outputs
            out[PhotonMode(t, H)] = e.detectors[0]
            out[PhotonMode(r, V)] = e.detectors[1]
    return out


def fock_amplitude(u: np.ndarray, inputs: Sequence[int], outputs: Sequence[int]) -> complex:
    """``<outputs| U |inputs>`` for occupation lists given as repeated mode indices."""
    sub = u[np.ix_(list(outputs), list(inputs))]
    norm = math.prod(math.factorial(outputs.count(k)) for k in set(outputs))
    norm *= math.prod(math.factorial(inputs.count(k)) for k in set(inputs))
    return permanent(sub) / math.sqrt(norm)


def brute_force_two_photon(c: Circuit, state: BellState) -> TwoPhotonAmplitudeMap:
    diags = validate(c)
    if diags:
        raise EvolutionError("; ".join(map(str, diags)))
    u, modes = circuit_unitary(c)
    index = {m: k for k, m in enumerate(modes)}
    first, second = c.input_modes
    terms = []
    for t in decompose_bell(state, first, second).terms:
        terms.append((sorted([index[t.first], index[t.second]]), t.coeff))

    terminal = _terminal_detectors(c)
    entries: dict[tuple[int, int], complex] = {}
    captured = 0.0
    for x, y in itertools.combinations_with_replacement(range(len(modes)), 2):
        amp = sum(coeff * fock_amplitude(u, ins, [x, y]) for ins, coeff in terms)
        if abs(amp) <= TOL:
            continue
        mx, my = modes[x], modes[y]
        if mx not in terminal or my not in terminal:
            raise EvolutionError(f"amplitude {amp:.3g} on undetected outcome {mx}, {my}")
        i, j = sorted((terminal[mx], terminal[my]))
        captured += abs(amp) ** 2
        entries[(i, j)] = complex(amp / math.sqrt(2.0)) if i == j else complex(amp)
    if abs(captured - 1.0) > TOL:
        raise EvolutionError(f"detected probability {captured!r} != 1")
    return TwoPhotonAmplitudeMap(c.name, state, entries)
